"""Token predictors behind a common scored-token interface.

Two implementations ship with the toolkit: a trainable co-occurrence model
(the statistical reference predictor) and a file-backed adapter for scores
produced by any external model. Both emit confidence-scored tokens in
[0, 1] that the downstream cutoff logic treats identically.
"""

from collections import Counter, defaultdict
from dataclasses import dataclass

from .corpus import Product, analyze, product_token_set
from .errors import InputError
from .records import dump_json, iter_jsonl, load_json, write_jsonl

MODEL_FORMAT = "cooccurrence-model/1"
PREDICTION_KINDS = ("token", "query")


@dataclass(frozen=True)
class ScoredToken:
    token: str
    score: float


class TokenPredictor:
    """Interface: predict(product, n) -> ScoredTokens sorted by score desc."""

    def predict(self, product, n: int) -> list:
        raise NotImplementedError


@dataclass
class CooccurrenceModel:
    """Conditional counts from product context tokens to target tokens."""

    counts: dict          # context token -> {target token: count}
    marginals: dict       # context token -> sum of its target counts
    vocabulary: tuple     # sorted target tokens

    @classmethod
    def empty(cls) -> "CooccurrenceModel":
        return cls(counts={}, marginals={}, vocabulary=())


def train_cooccurrence(instances, products) -> CooccurrenceModel:
    """Count (context token, target token) pairs over training instances.

    The context of an instance is its product's unique token set, so the
    catalog records are needed alongside the instances. Each co-occurrence
    is incremented by the instance frequency.
    """
    by_id = {p.id: p for p in products} if not isinstance(products, dict) else products
    contexts = {}
    counts = defaultdict(Counter)
    for instance in instances:
        product = by_id.get(instance.product_id)
        if product is None:
            raise InputError(f"training instance references unknown product {instance.product_id!r}")
        if instance.product_id not in contexts:
            contexts[instance.product_id] = product_token_set(product).unique
        for context in contexts[instance.product_id]:
            counts[context][instance.target.token] += instance.target.frequency
    marginals = {context: sum(targets.values()) for context, targets in counts.items()}
    vocabulary = tuple(sorted({t for targets in counts.values() for t in targets}))
    return CooccurrenceModel(
        counts={c: dict(t) for c, t in counts.items()},
        marginals=marginals,
        vocabulary=vocabulary,
    )


def predict_cooccurrence(model: CooccurrenceModel, product: Product, n: int) -> list:
    """Score candidates by pooled conditional frequency over the product's tokens.

    score(t) = sum_c count(c, t) / sum_c marginal(c) over the product's
    unique tokens c, clamped to [0, 1]. Tokens already present in the
    product are excluded, which makes every prediction novel by
    construction. Ties break lexicographically.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    context = product_token_set(product).unique
    denominator = sum(model.marginals.get(c, 0) for c in context)
    if denominator == 0:
        return []
    pooled = Counter()
    for c in context:
        for token, count in model.counts.get(c, {}).items():
            pooled[token] += count
    candidates = [
        ScoredToken(token=token, score=min(1.0, count / denominator))
        for token, count in pooled.items()
        if token not in context
    ]
    candidates.sort(key=lambda st: (-st.score, st.token))
    return candidates[:n]


class CooccurrencePredictor(TokenPredictor):
    def __init__(self, model: CooccurrenceModel):
        self.model = model

    def predict(self, product, n: int) -> list:
        return predict_cooccurrence(self.model, product, n)


def save_model(model: CooccurrenceModel, path) -> None:
    dump_json(path, {
        "format": MODEL_FORMAT,
        "counts": model.counts,
        "marginals": model.marginals,
        "vocabulary": list(model.vocabulary),
    })


def load_model(path) -> CooccurrenceModel:
    data = load_json(path)
    if data.get("format") != MODEL_FORMAT:
        raise InputError(f"{path}: not a {MODEL_FORMAT} file")
    return CooccurrenceModel(
        counts={c: {t: int(v) for t, v in targets.items()} for c, targets in data["counts"].items()},
        marginals={c: int(v) for c, v in data["marginals"].items()},
        vocabulary=tuple(data["vocabulary"]),
    )


class ExternalPredictor(TokenPredictor):
    """Lookup predictor over a preloaded {product id -> scored tokens} table."""

    def __init__(self, table: dict):
        self._table = table

    def product_ids(self) -> list:
        return sorted(self._table)

    def predict(self, product, n: int) -> list:
        if n < 1:
            raise ValueError("n must be >= 1")
        product_id = getattr(product, "id", product)
        entries = self._table.get(product_id, {})
        candidates = [ScoredToken(token=t, score=s) for t, s in entries.items()]
        candidates.sort(key=lambda st: (-st.score, st.token))
        return candidates[:n]


def load_external_predictions(source) -> ExternalPredictor:
    """Build a lookup predictor from {product_id, token, score, kind} records.

    ``kind`` defaults to "token" (the text must analyze to exactly one
    stem). With kind "query" the text is exploded into its stemmed tokens,
    each carrying the query's score; this is how multi-token baseline
    predictions enter the shared evaluation path. Duplicate (product,
    token) entries keep the maximum score.
    """
    table = defaultdict(dict)
    for lineno, record in iter_jsonl(source):
        pid = record.get("product_id")
        if not isinstance(pid, str) or not pid:
            raise InputError(f"line {lineno}: prediction record needs a 'product_id'")
        text = record.get("token", record.get("text"))
        if not isinstance(text, str) or not text.strip():
            raise InputError(f"line {lineno}: prediction record needs a non-empty 'token'")
        score = record.get("score")
        if not isinstance(score, (int, float)) or not 0.0 <= score <= 1.0:
            raise InputError(f"line {lineno}: 'score' must be a number in [0, 1]")
        kind = record.get("kind", "token")
        if kind not in PREDICTION_KINDS:
            raise InputError(f"line {lineno}: 'kind' must be one of {PREDICTION_KINDS}")
        stems = analyze(text)
        if kind == "token":
            if len(stems) != 1:
                raise InputError(
                    f"line {lineno}: token text {text!r} must analyze to exactly one token"
                )
        if not stems:
            continue
        for stem in stems:
            current = table[pid].get(stem)
            if current is None or score > current:
                table[pid][stem] = float(score)
    return ExternalPredictor(dict(table))


def write_predictions(path, predictions_by_product: dict, kind: str = "token") -> int:
    """Write a {product id -> ScoredTokens} mapping in the adapter's format."""
    rows = (
        {"product_id": pid, "token": st.token, "score": st.score, "kind": kind}
        for pid in sorted(predictions_by_product)
        for st in predictions_by_product[pid]
    )
    return write_jsonl(path, rows)


def apply_cutoff(predictions, cutoff: float) -> list:
    """Retain predictions scoring strictly above the cutoff."""
    return [p for p in predictions if p.score > cutoff]
