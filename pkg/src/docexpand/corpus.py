"""Catalog ingestion, text analysis, and the product-wise dataset split.

Products and engagement pairs arrive as JSONL records (see README for the
field lists). A single analyzer -- lowercase, split on non-alphanumerics,
Porter stem -- is shared by every downstream stage so that novelty checks
(query token absent from the product) are judged consistently at the stem
level.
"""

import logging
import random
from collections import Counter
from dataclasses import dataclass, field

from .errors import InputError
from .records import iter_jsonl
from .stemmer import stem

log = logging.getLogger(__name__)

PRODUCT_TEXT_FIELDS = ("title", "product_type", "brand", "color", "gender", "description")

DEFAULT_MIN_ATC = 2


@dataclass(frozen=True)
class Product:
    """One catalog record; ``title`` and ``id`` are mandatory, the rest optional."""

    id: str
    title: str
    product_type: str = ""
    brand: str = ""
    color: str = ""
    gender: str = ""
    description: str = ""

    def text_fields(self):
        return tuple(getattr(self, name) for name in PRODUCT_TEXT_FIELDS)

    def as_record(self) -> dict:
        return {"id": self.id, **{name: getattr(self, name) for name in PRODUCT_TEXT_FIELDS}}


@dataclass(frozen=True)
class EngagementPair:
    """A (product, query) pair with its add-to-cart count."""

    product_id: str
    query: str
    atc_count: int = 0

    def as_record(self) -> dict:
        return {"product_id": self.product_id, "query": self.query, "atc_count": self.atc_count}


class TokenSet:
    """Multiset of analyzed (normalized + stemmed) tokens with a unique view."""

    __slots__ = ("counts", "unique")

    def __init__(self, tokens=()):
        self.counts = Counter(tokens)
        self.unique = frozenset(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __contains__(self, token) -> bool:
        return token in self.unique

    def __len__(self) -> int:
        return self.total

    def __eq__(self, other) -> bool:
        return isinstance(other, TokenSet) and self.counts == other.counts

    def __repr__(self) -> str:
        return f"TokenSet({dict(sorted(self.counts.items()))!r})"


@dataclass(frozen=True)
class CatalogSplit:
    train: frozenset
    validation: frozenset
    test: frozenset

    def subset(self, name: str) -> frozenset:
        if name not in ("train", "validation", "test"):
            raise ValueError(f"unknown split subset: {name!r}")
        return getattr(self, name)

    def as_record(self) -> dict:
        return {
            "train": sorted(self.train),
            "validation": sorted(self.validation),
            "test": sorted(self.test),
        }

    @classmethod
    def from_record(cls, record: dict) -> "CatalogSplit":
        return cls(
            train=frozenset(record["train"]),
            validation=frozenset(record["validation"]),
            test=frozenset(record["test"]),
        )


def normalize(text: str) -> list:
    """Lowercase and split on every non-alphanumeric character.

    Empty fragments are discarded and order is preserved, so
    ``"3-in-1"`` becomes ``["3", "in", "1"]``.
    """
    tokens = []
    buf = []
    for ch in text.lower():
        if ch.isalnum():
            buf.append(ch)
        elif buf:
            tokens.append("".join(buf))
            buf.clear()
    if buf:
        tokens.append("".join(buf))
    return tokens


def analyze(text: str) -> list:
    """The shared analyzer: normalize then stem each token."""
    return [stem(token) for token in normalize(text)]


def product_token_set(product: Product) -> TokenSet:
    """Analyzed multiset over all six product text fields."""
    tokens = []
    for value in product.text_fields():
        tokens.extend(analyze(value))
    return TokenSet(tokens)


def load_products(source) -> list:
    """Parse product JSONL records, preserving input order.

    Raises InputError naming the line for malformed records and naming the
    id for duplicates.
    """
    products = []
    seen = {}
    for lineno, record in iter_jsonl(source):
        pid = record.get("id")
        if not isinstance(pid, str) or not pid:
            raise InputError(f"line {lineno}: product record needs a non-empty string 'id'")
        title = record.get("title")
        if not isinstance(title, str) or not title.strip():
            raise InputError(f"line {lineno}: product {pid!r} needs a non-empty 'title'")
        if pid in seen:
            raise InputError(
                f"duplicate product id {pid!r} (lines {seen[pid]} and {lineno})"
            )
        seen[pid] = lineno
        extras = {}
        for name in PRODUCT_TEXT_FIELDS[1:]:
            value = record.get(name, "")
            if value is None:
                value = ""
            if not isinstance(value, str):
                raise InputError(f"line {lineno}: product field {name!r} must be a string")
            extras[name] = value
        products.append(Product(id=pid, title=title, **extras))
    return products


@dataclass
class EngagementLoad:
    pairs: list = field(default_factory=list)
    dropped_below_min_atc: int = 0
    skipped_unknown_product: int = 0


def load_engagement(source, min_atc: int = DEFAULT_MIN_ATC, known_ids=None,
                    unknown_product: str = "skip") -> EngagementLoad:
    """Parse engagement JSONL records, dropping pairs below the ATC floor.

    ``known_ids`` enables referential checking; unknown product ids are
    skipped with a warning by default, or rejected with
    ``unknown_product="error"``.
    """
    if min_atc < 0:
        raise ValueError("min_atc must be >= 0")
    if unknown_product not in ("skip", "error"):
        raise ValueError("unknown_product must be 'skip' or 'error'")
    result = EngagementLoad()
    for lineno, record in iter_jsonl(source):
        pid = record.get("product_id")
        if not isinstance(pid, str) or not pid:
            raise InputError(f"line {lineno}: engagement record needs a 'product_id'")
        query = record.get("query")
        if not isinstance(query, str) or not query.strip():
            raise InputError(f"line {lineno}: engagement record needs a non-empty 'query'")
        atc = record.get("atc_count", 0)
        if not isinstance(atc, int) or isinstance(atc, bool) or atc < 0:
            raise InputError(f"line {lineno}: 'atc_count' must be a non-negative integer")
        if known_ids is not None and pid not in known_ids:
            if unknown_product == "error":
                raise InputError(f"line {lineno}: unknown product id {pid!r}")
            log.warning("line %d: skipping pair for unknown product id %r", lineno, pid)
            result.skipped_unknown_product += 1
            continue
        if atc < min_atc:
            result.dropped_below_min_atc += 1
            continue
        result.pairs.append(EngagementPair(product_id=pid, query=query.strip(), atc_count=atc))
    return result


def split_by_product(product_ids, ratios=(8, 1, 1), seed: int = 0) -> CatalogSplit:
    """Deterministically partition product ids into train/validation/test.

    Set sizes follow ``ratios`` by largest remainder, so each set is within
    one item of its exact quota. The shuffle depends only on the seed and
    the id set, not on input order.
    """
    ids = sorted(set(product_ids))
    if not ids:
        raise ValueError("product_ids must be non-empty")
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ValueError("ratios must be three positive numbers")
    rng = random.Random(seed)
    rng.shuffle(ids)
    sizes = _largest_remainder(len(ids), ratios)
    train = ids[: sizes[0]]
    validation = ids[sizes[0]: sizes[0] + sizes[1]]
    test = ids[sizes[0] + sizes[1]:]
    return CatalogSplit(frozenset(train), frozenset(validation), frozenset(test))


def _largest_remainder(n: int, ratios) -> list:
    total = sum(ratios)
    quotas = [n * r / total for r in ratios]
    sizes = [int(q) for q in quotas]
    fractions = sorted(
        range(len(ratios)), key=lambda i: (-(quotas[i] - sizes[i]), i)
    )
    for i in fractions[: n - sum(sizes)]:
        sizes[i] += 1
    return sizes
