"""Preprocessing chain turning raw engagement pairs into training datasets.

Stage order is fixed: relevance filter, price-token filter, full-match
filter, then tokenization plus the overlapping-token filter. The first
three stages yield the query-level dataset; the last stage yields the
token-level dataset of (product, novel tokens) pairs. Each stage records
how many pairs flowed in and out.
"""

import re
from dataclasses import dataclass, field

from .corpus import EngagementPair, TokenSet, analyze, product_token_set
from .errors import InputError, ToolkitError
from .records import iter_jsonl

KEEP = "keep"
DROP_FULL_MATCH = "drop_full_match"
DROP_EMPTY_QUERY = "drop_empty_query"

_AMOUNT = r"\$?\s*\d+(?:[.,]\d+)?(?:\s*(?:dollars?|bucks?|usd))?"

# Editable pattern surface: price/deal intent phrases removed from queries.
DEFAULT_PRICE_PATTERNS = (
    r"\b(?:under|over|below|above|less\s+than|around|about)\s+" + _AMOUNT,
    r"\$\s*\d+(?:[.,]\d+)?",
    r"\bon\s+sale\b",
    r"\bclearance\b",
    r"\bcheap\b",
    r"\bdiscounts?\b",
    r"\bdeals?\b",
    r"\bcoupons?\b",
)

_DEFAULT_COMPILED = tuple(re.compile(p, re.IGNORECASE) for p in DEFAULT_PRICE_PATTERNS)


class ScorerError(ToolkitError):
    """A relevance scorer failed on a specific pair."""


class RelevanceScorer:
    """Scoring seam for pair relevance; implementations return [0, 1]."""

    def score(self, query: str, product) -> float:
        raise NotImplementedError


class JaccardScorer(RelevanceScorer):
    """Default lexical scorer: Jaccard overlap of stemmed token sets."""

    def score(self, query, product) -> float:
        query_tokens = set(analyze(query))
        product_tokens = product_token_set(product).unique
        union = query_tokens | product_tokens
        if not union:
            return 0.0
        return len(query_tokens & product_tokens) / len(union)


class ExternalScorer(RelevanceScorer):
    """Precomputed (product_id, query, score) triples loaded from JSONL."""

    def __init__(self, scores: dict):
        self._scores = scores

    @classmethod
    def load(cls, source) -> "ExternalScorer":
        scores = {}
        for lineno, record in iter_jsonl(source):
            pid = record.get("product_id")
            query = record.get("query")
            value = record.get("score")
            if not isinstance(pid, str) or not isinstance(query, str):
                raise InputError(f"line {lineno}: score record needs 'product_id' and 'query'")
            if not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
                raise InputError(f"line {lineno}: 'score' must be a number in [0, 1]")
            scores[(pid, query)] = float(value)
        return cls(scores)

    def score(self, query, product) -> float:
        key = (product.id, query)
        if key not in self._scores:
            raise KeyError(f"no precomputed score for product {product.id!r}, query {query!r}")
        return self._scores[key]


def relevance_filter(pairs, scorer: RelevanceScorer, threshold: float):
    """Retain pairs scoring at least ``threshold``; returns (kept, dropped)."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be in [0, 1]")
    kept, dropped = [], 0
    for pair, product in pairs:
        try:
            value = scorer.score(pair.query, product)
        except Exception as exc:
            raise ScorerError(
                f"relevance scorer failed on pair (product={pair.product_id!r}, "
                f"query={pair.query!r}): {exc}"
            ) from exc
        if value >= threshold:
            kept.append(pair)
        else:
            dropped += 1
    return kept, dropped


def price_token_filter(query: str, patterns=None) -> str:
    """Strip price/deal phrases; the remainder is re-joined by single spaces.

    Patterns are re-applied until the text is stable, because a removal can
    butt two words together that themselves form a phrase ("on $5 sale").
    """
    compiled = _DEFAULT_COMPILED if patterns is None else tuple(
        re.compile(p, re.IGNORECASE) for p in patterns
    )
    text = " ".join(query.split())
    while True:
        before = text
        for pattern in compiled:
            text = pattern.sub(" ", text)
        text = " ".join(text.split())
        if text == before:
            return text


def full_match_filter(query: str, product_tokens: TokenSet) -> str:
    """Decide whether a (cleaned) query still mismatches the product.

    Returns KEEP, DROP_FULL_MATCH when every stemmed query token is already
    in the product, or DROP_EMPTY_QUERY when nothing survives tokenization.
    """
    tokens = analyze(query)
    if not tokens:
        return DROP_EMPTY_QUERY
    if all(token in product_tokens.unique for token in tokens):
        return DROP_FULL_MATCH
    return KEEP


def overlapping_token_filter(query_tokens, product_tokens) -> list:
    """Keep the stemmed query tokens absent from the product's unique set.

    Duplicates within one query collapse to their first occurrence; input
    order is preserved.
    """
    unique = product_tokens.unique if isinstance(product_tokens, TokenSet) else frozenset(product_tokens)
    seen = set()
    novel = []
    for token in query_tokens:
        if token in unique or token in seen:
            continue
        seen.add(token)
        novel.append(token)
    return novel


@dataclass(frozen=True)
class NovelPair:
    """A product's novel query tokens from one source query.

    ``token_counts`` keeps the pre-collapse occurrence count of each novel
    token within the query, which target construction aggregates later.
    """

    product_id: str
    novel_tokens: tuple
    source_query: str
    token_counts: dict = field(default_factory=dict)

    def as_record(self) -> dict:
        return {
            "product_id": self.product_id,
            "novel_tokens": list(self.novel_tokens),
            "source_query": self.source_query,
            "token_counts": dict(self.token_counts),
        }

    @classmethod
    def from_record(cls, record: dict) -> "NovelPair":
        return cls(
            product_id=record["product_id"],
            novel_tokens=tuple(record["novel_tokens"]),
            source_query=record["source_query"],
            token_counts={k: int(v) for k, v in record["token_counts"].items()},
        )


@dataclass(frozen=True)
class StageStats:
    stage: str
    pairs_in: int
    pairs_out: int
    products_out: int

    def as_record(self) -> dict:
        return {
            "stage": self.stage,
            "pairs_in": self.pairs_in,
            "pairs_out": self.pairs_out,
            "products_out": self.products_out,
        }


@dataclass
class PipelineStats:
    rows: list = field(default_factory=list)
    dropped_irrelevant: int = 0
    dropped_empty_after_price: int = 0
    dropped_full_match: int = 0
    dropped_empty_query: int = 0
    novel_token_pairs: int = 0

    def as_dict(self) -> dict:
        return {
            "stages": [row.as_record() for row in self.rows],
            "dropped_irrelevant": self.dropped_irrelevant,
            "dropped_empty_after_price": self.dropped_empty_after_price,
            "dropped_full_match": self.dropped_full_match,
            "dropped_empty_query": self.dropped_empty_query,
            "novel_token_pairs": self.novel_token_pairs,
        }


@dataclass
class PipelineConfig:
    rf_threshold: float = 0.0
    scorer: RelevanceScorer = None
    price_patterns: tuple = None
    fmf_enabled: bool = True

    def resolved_scorer(self) -> RelevanceScorer:
        return self.scorer if self.scorer is not None else JaccardScorer()


@dataclass
class PipelineResult:
    query_pairs: list
    novel_pairs: list
    stats: PipelineStats


def run_pipeline(pairs, products, config: PipelineConfig = None) -> PipelineResult:
    """Run all stages and emit both datasets plus per-stage statistics."""
    config = config or PipelineConfig()
    by_id = {p.id: p for p in products} if not isinstance(products, dict) else products
    for pair in pairs:
        if pair.product_id not in by_id:
            raise InputError(f"engagement pair references unknown product {pair.product_id!r}")
    token_sets = {}

    def tokens_of(pid: str) -> TokenSet:
        if pid not in token_sets:
            token_sets[pid] = product_token_set(by_id[pid])
        return token_sets[pid]

    stats = PipelineStats()
    scorer = config.resolved_scorer()

    current = list(pairs)
    kept, dropped = relevance_filter(
        [(pair, by_id[pair.product_id]) for pair in current], scorer, config.rf_threshold
    )
    stats.dropped_irrelevant = dropped
    stats.rows.append(_stage_row("relevance", current, kept))
    current = kept

    cleaned = []
    for pair in current:
        new_query = price_token_filter(pair.query, config.price_patterns)
        if not new_query:
            stats.dropped_empty_after_price += 1
            continue
        if new_query != pair.query:
            pair = EngagementPair(pair.product_id, new_query, pair.atc_count)
        cleaned.append(pair)
    stats.rows.append(_stage_row("price_token", current, cleaned))
    current = cleaned

    if config.fmf_enabled:
        matched = []
        for pair in current:
            decision = full_match_filter(pair.query, tokens_of(pair.product_id))
            if decision == DROP_FULL_MATCH:
                stats.dropped_full_match += 1
            elif decision == DROP_EMPTY_QUERY:
                stats.dropped_empty_query += 1
            else:
                matched.append(pair)
        stats.rows.append(_stage_row("full_match", current, matched))
        current = matched

    query_pairs = list(current)

    novel_pairs = []
    for pair in current:
        query_tokens = analyze(pair.query)
        novel = overlapping_token_filter(query_tokens, tokens_of(pair.product_id))
        if not novel:
            continue
        counts = {token: query_tokens.count(token) for token in novel}
        novel_pairs.append(
            NovelPair(
                product_id=pair.product_id,
                novel_tokens=tuple(novel),
                source_query=pair.query,
                token_counts=counts,
            )
        )
    stats.rows.append(
        StageStats(
            stage="novel_tokens",
            pairs_in=len(current),
            pairs_out=len(novel_pairs),
            products_out=len({p.product_id for p in novel_pairs}),
        )
    )
    stats.novel_token_pairs = sum(len(p.novel_tokens) for p in novel_pairs)

    return PipelineResult(query_pairs=query_pairs, novel_pairs=novel_pairs, stats=stats)


def _stage_row(stage, pairs_in, pairs_out) -> StageStats:
    return StageStats(
        stage=stage,
        pairs_in=len(pairs_in),
        pairs_out=len(pairs_out),
        products_out=len({p.product_id for p in pairs_out}),
    )
