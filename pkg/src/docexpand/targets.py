"""Per-product training targets: novel tokens, frequencies, loss weights.

All of a product's queries are treated as one concatenated token sequence:
occurrences are counted across queries (including repeats inside a single
query), tokens already present in the product are excluded, and each
surviving token becomes its own training instance carrying the weight
``frequency ** alpha``.
"""

from collections import Counter
from dataclasses import dataclass

from .corpus import Product, product_token_set
from .errors import InputError
from .records import iter_jsonl

SERIALIZED_FIELD_ORDER = ("title", "product_type", "brand", "color", "gender", "description")


@dataclass(frozen=True)
class TargetConfig:
    alpha: float = 0.5

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")


@dataclass(frozen=True)
class TargetToken:
    token: str
    frequency: int
    weight: float


@dataclass(frozen=True)
class TrainingInstance:
    product_id: str
    input_text: str
    target: TargetToken

    def as_record(self) -> dict:
        return {
            "product_id": self.product_id,
            "input_text": self.input_text,
            "target_token": self.target.token,
            "frequency": self.target.frequency,
            "weight": self.target.weight,
        }


def loss_weight(frequency: int, alpha: float) -> float:
    """Smoothing weight ``frequency ** alpha`` attached to an instance."""
    if frequency < 1:
        raise ValueError("frequency must be >= 1")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    return float(frequency) ** alpha


def build_target_tokens(product: Product, novel_pairs, config: TargetConfig = None) -> list:
    """Aggregate a product's novel tokens over all its queries.

    Frequencies sum the pre-collapse occurrence counts carried by each
    NovelPair; tokens present in the product are excluded (re-checked here,
    independently of the upstream filter). Output is ordered by descending
    frequency and then lexicographically.
    """
    config = config or TargetConfig()
    counts = Counter()
    for pair in novel_pairs:
        if pair.product_id != product.id:
            raise ValueError(
                f"novel pair for product {pair.product_id!r} passed to {product.id!r}"
            )
        counts.update(pair.token_counts)
    unique = product_token_set(product).unique
    targets = []
    for token, freq in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
        if token in unique:
            continue
        targets.append(TargetToken(token=token, frequency=freq, weight=loss_weight(freq, config.alpha)))
    return targets


def serialize_product_input(product: Product, field_order=SERIALIZED_FIELD_ORDER) -> str:
    """Labeled-field rendering of a product; empty fields are omitted."""
    parts = []
    for name in field_order:
        value = getattr(product, name)
        if value:
            parts.append(f"{name}: {value}")
    return " ".join(parts)


def emit_training_instances(product: Product, targets, field_order=SERIALIZED_FIELD_ORDER) -> list:
    """One instance per target token, all sharing the serialized input."""
    if not targets:
        raise ValueError(f"no targets for product {product.id!r}")
    input_text = serialize_product_input(product, field_order)
    return [
        TrainingInstance(product_id=product.id, input_text=input_text, target=target)
        for target in targets
    ]


def load_training_instances(source) -> list:
    instances = []
    for lineno, record in iter_jsonl(source):
        try:
            target = TargetToken(
                token=str(record["target_token"]),
                frequency=int(record["frequency"]),
                weight=float(record["weight"]),
            )
            instance = TrainingInstance(
                product_id=str(record["product_id"]),
                input_text=str(record["input_text"]),
                target=target,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"line {lineno}: bad training instance record: {exc}") from exc
        if target.frequency < 1:
            raise InputError(f"line {lineno}: 'frequency' must be >= 1")
        instances.append(instance)
    return instances
