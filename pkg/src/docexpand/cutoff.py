"""Confidence-cutoff selection over validation predictions.

The sweep evaluates every candidate cutoff (all observed scores plus 0.0,
or a fixed-step grid) and picks the one maximizing the novel-reference F1
mean; ties go to the larger cutoff since it retains fewer tokens for the
same quality. A budget-matching variant finds the smallest cutoff whose
retained novel-token volume stays within a target, for like-for-like
comparisons between predictors.
"""

from dataclasses import dataclass

from .metrics import BootstrapConfig, MetricsReport, evaluate_records, make_eval_record
from .predictor import apply_cutoff

OBSERVED_GRID = "observed"


@dataclass(frozen=True)
class ScoredRecord:
    """One product's held-out reference tokens and its scored predictions."""

    product_id: str
    reference: tuple      # analyzed reference tokens, with multiplicity
    predictions: tuple    # ScoredToken entries


@dataclass
class SweepRow:
    cutoff: float
    report: MetricsReport


@dataclass
class CutoffSweepResult:
    rows: list
    chosen: float

    def chosen_row(self) -> SweepRow:
        for row in self.rows:
            if row.cutoff == self.chosen:
                return row
        raise LookupError("chosen cutoff missing from sweep rows")


def candidate_cutoffs(records, grid: str = OBSERVED_GRID) -> list:
    """Candidate set: {0.0} plus observed scores, or an even step grid."""
    if grid == OBSERVED_GRID:
        observed = {p.score for record in records for p in record.predictions}
        return sorted(observed | {0.0})
    if grid.startswith("step:"):
        step = float(grid.split(":", 1)[1])
        if not 0.0 < step <= 1.0:
            raise ValueError("step must be in (0, 1]")
        n = round(1.0 / step)
        return [round(i * step, 10) for i in range(n + 1)]
    raise ValueError(f"unknown grid spec {grid!r}")


def _records_at_cutoff(records, product_tokens, cutoff):
    return [
        make_eval_record(
            record.product_id,
            record.reference,
            product_tokens[record.product_id],
            [p.token for p in apply_cutoff(record.predictions, cutoff)],
        )
        for record in records
    ]


def tune_cutoff(records, product_tokens: dict, grid: str = OBSERVED_GRID,
                bootstrap: BootstrapConfig = None) -> CutoffSweepResult:
    """Sweep candidate cutoffs and select the nROUGE-F1 maximizer."""
    if not any(record.predictions for record in records):
        raise ValueError("no predictions to tune over")
    rows = []
    for cutoff in candidate_cutoffs(records, grid):
        report = evaluate_records(_records_at_cutoff(records, product_tokens, cutoff),
                                  product_tokens, bootstrap=bootstrap)
        rows.append(SweepRow(cutoff=cutoff, report=report))
    chosen = rows[0].cutoff
    best = rows[0].report.nrouge_f1
    for row in rows[1:]:
        if row.report.nrouge_f1 >= best:   # >= sends ties to the larger cutoff
            best = row.report.nrouge_f1
            chosen = row.cutoff
    return CutoffSweepResult(rows=rows, chosen=chosen)


@dataclass
class BudgetMatchResult:
    cutoff: float
    mean_novel: float
    target_reachable: bool


def budget_match_cutoff(records, product_tokens: dict, target: float,
                        grid: str = OBSERVED_GRID) -> BudgetMatchResult:
    """Smallest cutoff whose retained mean novel-token count is <= target.

    When even full retention (cutoff 0.0) stays below the target, the
    target cannot be matched from below; 0.0 is returned with
    ``target_reachable=False``.
    """
    if target <= 0:
        raise ValueError("target must be > 0")
    candidates = candidate_cutoffs(records, grid)
    means = []
    for cutoff in candidates:
        total_novel = 0
        for record in records:
            unique = frozenset(product_tokens[record.product_id])
            retained = apply_cutoff(record.predictions, cutoff)
            total_novel += sum(1 for p in retained if p.token not in unique)
        means.append(total_novel / len(records) if records else 0.0)
    if means and means[0] < target:
        return BudgetMatchResult(cutoff=candidates[0], mean_novel=means[0], target_reachable=False)
    for cutoff, mean_novel in zip(candidates, means):
        if mean_novel <= target:
            return BudgetMatchResult(cutoff=cutoff, mean_novel=mean_novel, target_reachable=True)
    raise AssertionError("a cutoff above all scores always retains zero tokens")
