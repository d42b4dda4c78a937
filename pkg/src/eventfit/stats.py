"""Evaluation statistics: tie-aware Spearman correlation, Fisher r-to-z
model comparison, binary pair accuracy, min-max scaling, and regression
residual analysis, plus the report assembly that combines them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .datasets import ItemPair, ScoreRecord, intersect_coverage
from .errors import CoverageError

MIN_POINTS = 3


def _as_floats(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def average_ranks(values) -> np.ndarray:
    """1-based ranks with ties averaged."""
    arr = _as_floats(values, "values")
    order = np.argsort(arr, kind="mergesort")
    ranks = np.empty(len(arr), dtype=np.float64)
    i = 0
    while i < len(arr):
        j = i
        while j + 1 < len(arr) and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    """Spearman rho: Pearson correlation of average-ranked values."""
    x = _as_floats(xs, "xs")
    y = _as_floats(ys, "ys")
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < MIN_POINTS:
        raise ValueError(f"need at least {MIN_POINTS} points, got {len(x)}")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ValueError("degenerate input: all values equal")
    rx = average_ranks(x)
    ry = average_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = math.sqrt(float(np.dot(rx, rx)) * float(np.dot(ry, ry)))
    if denom == 0.0:
        raise ValueError("degenerate input: constant ranks")
    rho = float(np.dot(rx, ry)) / denom
    return max(-1.0, min(1.0, rho))


def fisher_r_to_z(r1: float, n1: int, r2: float, n2: int) -> tuple[float, float]:
    """One-tailed comparison of two correlations.

    z = (atanh(r1) - atanh(r2)) / sqrt(1/(n1-3) + 1/(n2-3)); the p-value is
    the upper tail of the standard normal, so small p favors r1 > r2.
    """
    for r, label in ((r1, "r1"), (r2, "r2")):
        if not abs(r) < 1.0:
            raise ValueError(f"{label} must satisfy |r| < 1, got {r}")
    for n, label in ((n1, "n1"), (n2, "n2")):
        if n <= 3:
            raise ValueError(f"{label} must exceed 3, got {n}")
    z = (math.atanh(r1) - math.atanh(r2)) / math.sqrt(1.0 / (n1 - 3) + 1.0 / (n2 - 3))
    p = 0.5 * math.erfc(z / math.sqrt(2.0))
    return z, p


def binary_accuracy(pairs: Sequence[tuple[float, float]]) -> float:
    """Fraction of (typical, atypical) score pairs with typical strictly
    higher. Exact ties count as failures (conservative)."""
    if not pairs:
        raise ValueError("no score pairs")
    hits = sum(1 for typical, atypical in pairs if typical > atypical)
    return hits / len(pairs)


def minmax_scale(values) -> np.ndarray:
    """(x - min) / (max - min); order-preserving map onto [0, 1]."""
    arr = _as_floats(values, "values")
    if len(arr) < 2:
        raise ValueError("need at least 2 values")
    lo, hi = float(arr.min()), float(arr.max())
    if lo == hi:
        raise ValueError("cannot scale constant input")
    return (arr - lo) / (hi - lo)


def residual_sum(human, scores, kind: str = "abs") -> float:
    """Residual magnitude of min-max-scaled scores regressed on ratings.

    Fits scaled ~ a + b*rating by ordinary least squares and returns the sum
    of absolute residuals (kind="abs", default) or squared ones ("squared").
    """
    if kind not in ("abs", "squared"):
        raise ValueError(f"bad residual kind {kind!r}")
    h = _as_floats(human, "human")
    s = _as_floats(scores, "scores")
    if len(h) != len(s):
        raise ValueError(f"length mismatch: {len(h)} vs {len(s)}")
    if len(h) < MIN_POINTS:
        raise ValueError(f"need at least {MIN_POINTS} points")
    scaled = minmax_scale(s)
    var = float(np.var(h))
    if var == 0.0:
        raise ValueError("degenerate input: constant ratings")
    slope = float(np.cov(h, scaled, bias=True)[0, 1]) / var
    intercept = float(scaled.mean()) - slope * float(h.mean())
    residuals = scaled - (intercept + slope * h)
    if kind == "abs":
        return float(np.sum(np.abs(residuals)))
    return float(np.sum(residuals**2))


@dataclass(frozen=True)
class EvalReport:
    """Per-dataset, per-scorer evaluation summary."""

    dataset: str
    scorer: str
    n_items: int
    coverage: tuple[int, int]
    spearman_rho: Optional[float]
    accuracy: Optional[float] = None
    residual_sum: Optional[float] = None
    #: (other scorer, z, one-tailed p) for rho(self) > rho(other).
    significance: Optional[tuple[str, float, float]] = None

    def __post_init__(self):
        covered, total = self.coverage
        if covered > total:
            raise ValueError("covered cannot exceed total")
        if self.spearman_rho is not None and not -1.0 <= self.spearman_rho <= 1.0:
            raise ValueError("rho outside [-1, 1]")
        if self.accuracy is not None and not 0.0 <= self.accuracy <= 1.0:
            raise ValueError("accuracy outside [0, 1]")
        if self.residual_sum is not None and self.residual_sum < 0:
            raise ValueError("residual sum must be nonnegative")
        if self.significance is not None and not 0.0 < self.significance[2] < 1.0:
            raise ValueError("p must lie in (0, 1)")

    @property
    def coverage_text(self) -> str:
        return f"{self.coverage[0]}/{self.coverage[1]}"

    @property
    def empty_coverage(self) -> bool:
        return self.coverage[0] == 0


@dataclass(frozen=True)
class EvalOptions:
    scorer: Optional[str] = None  # default: the sole scorer in the records
    compare_to: Optional[str] = None
    log_scores: bool = False
    residuals: bool = False
    residual_kind: str = "abs"
    restrict_ids: Optional[frozenset[str]] = None
    dataset: str = ""


def _scores_by_scorer(records: Sequence[ScoreRecord]) -> dict[str, dict[str, dict[str, float]]]:
    table: dict[str, dict[str, dict[str, float]]] = {}
    for record in records:
        table.setdefault(record.scorer, {}).setdefault(record.item_id, {})[record.variant] = (
            record.score
        )
    return table


def _covered_ids(by_item: dict[str, dict[str, float]], pairs: Sequence[ItemPair]) -> set[str]:
    return {
        pair.pair_id
        for pair in pairs
        if len(by_item.get(pair.pair_id, {})) == 2
    }


def _pooled(pairs: Sequence[ItemPair], by_item, ids: set[str],
            log_scores: bool) -> tuple[np.ndarray, np.ndarray]:
    ratings, scores = [], []
    for pair in pairs:
        if pair.pair_id not in ids:
            continue
        for variant in ("typical", "atypical"):
            filler = pair.filler(variant)
            if filler.human_rating is None:
                raise ValueError(
                    f"{pair.pair_id}: missing human rating, correlation not applicable"
                )
            ratings.append(filler.human_rating)
            scores.append(by_item[pair.pair_id][variant])
    s = np.asarray(scores, dtype=np.float64)
    if log_scores:
        if np.any(s <= 0):
            raise ValueError("log transform requires strictly positive scores")
        s = np.log(s)
    return np.asarray(ratings, dtype=np.float64), s


def evaluate(pairs: Sequence[ItemPair], records: Sequence[ScoreRecord],
             options: EvalOptions = EvalOptions()) -> EvalReport:
    """Assemble an EvalReport for one scorer over one dataset.

    Evaluation is restricted to pairs fully covered by the scorer (and by
    the comparison scorer, when one is named); rho pools the typical and
    atypical (rating, score) points, accuracy compares within pairs, and the
    significance entry tests rho(scorer) > rho(compare_to) with Fisher's
    r-to-z over the covered pair count.
    """
    table = _scores_by_scorer(records)
    if options.scorer is not None:
        scorer = options.scorer
    elif len(table) == 1:
        scorer = next(iter(table))
    else:
        raise ValueError(f"records contain {sorted(table)}; name the scorer to evaluate")
    if scorer not in table:
        raise ValueError(f"no records for scorer {scorer!r}")

    sets = [(scorer, _covered_ids(table[scorer], pairs))]
    if options.compare_to is not None:
        if options.compare_to not in table:
            raise ValueError(f"no records for comparison scorer {options.compare_to!r}")
        sets.append((options.compare_to, _covered_ids(table[options.compare_to], pairs)))
    common = intersect_coverage(sets)
    if options.restrict_ids is not None:
        common &= options.restrict_ids
    total = len(pairs)
    if len(common) < MIN_POINTS:
        raise CoverageError(
            f"only {len(common)}/{total} pairs covered after intersection, need >= {MIN_POINTS}"
        )

    has_ratings = all(pair.has_ratings for pair in pairs if pair.pair_id in common)
    rho = None
    resid = None
    if has_ratings:
        ratings, scores = _pooled(pairs, table[scorer], common, options.log_scores)
        rho = spearman(ratings, scores)
        if options.residuals:
            resid = residual_sum(ratings, scores, options.residual_kind)

    score_pairs = [
        (table[scorer][pair.pair_id]["typical"], table[scorer][pair.pair_id]["atypical"])
        for pair in pairs
        if pair.pair_id in common
    ]
    accuracy = binary_accuracy(score_pairs)

    significance = None
    if options.compare_to is not None and has_ratings:
        other_ratings, other_scores = _pooled(
            pairs, table[options.compare_to], common, options.log_scores
        )
        rho_other = spearman(other_ratings, other_scores)
        z, p = fisher_r_to_z(rho, len(common), rho_other, len(common))
        significance = (options.compare_to, z, p)

    return EvalReport(
        dataset=options.dataset,
        scorer=scorer,
        n_items=len(common),
        coverage=(len(common), total),
        spearman_rho=rho,
        accuracy=accuracy,
        residual_sum=resid,
        significance=significance,
    )


_TSV_COLUMNS = (
    "dataset", "scorer", "n_items", "coverage", "spearman_rho", "accuracy",
    "residual_sum", "vs_scorer", "z", "p_one_tailed",
)


def report_tsv_header() -> str:
    return "\t".join(_TSV_COLUMNS)


def report_tsv_row(report: EvalReport) -> str:
    def fmt(value, digits=6):
        return "" if value is None else f"{value:.{digits}f}"

    vs, z, p = report.significance if report.significance else ("", None, None)
    cells = (
        report.dataset, report.scorer, str(report.n_items), report.coverage_text,
        fmt(report.spearman_rho), fmt(report.accuracy), fmt(report.residual_sum),
        vs, fmt(z, 4), fmt(p, 6),
    )
    return "\t".join(cells)


def render_reports(reports: Sequence[EvalReport]) -> str:
    """Human-readable fixed-width table of one or more reports."""
    header = ("dataset", "scorer", "coverage", "rho", "accuracy", "resid", "significance")
    rows = [header]
    for r in reports:
        sig = ""
        if r.significance:
            vs, z, p = r.significance
            sig = f"vs {vs}: z={z:.2f} p={p:.4f}"
        if r.empty_coverage:
            sig = (sig + " " if sig else "") + "[EMPTY COVERAGE]"
        rows.append((
            r.dataset, r.scorer, r.coverage_text,
            "-" if r.spearman_rho is None else f"{r.spearman_rho:.3f}",
            "-" if r.accuracy is None else f"{r.accuracy:.3f}",
            "-" if r.residual_sum is None else f"{r.residual_sum:.2f}",
            sig,
        ))
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def export_scatter_tsv(pairs: Sequence[ItemPair], records: Sequence[ScoreRecord],
                       path, scorer: Optional[str] = None, log_scores: bool = True) -> None:
    """Plot-ready (rating, score) points, one per covered variant."""
    table = _scores_by_scorer(records)
    if scorer is None:
        if len(table) != 1:
            raise ValueError("name the scorer to export")
        scorer = next(iter(table))
    by_item = table[scorer]
    ids = _covered_ids(by_item, pairs)
    header = "rating\tlog_score\n" if log_scores else "rating\tscore\n"
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(header)
        for pair in pairs:
            if pair.pair_id not in ids or not pair.has_ratings:
                continue
            for variant in ("typical", "atypical"):
                score = by_item[pair.pair_id][variant]
                if log_scores:
                    if score <= 0:
                        raise ValueError(
                            f"{pair.pair_id}/{variant}: log transform needs positive scores"
                        )
                    score = math.log(score)
                handle.write(f"{pair.filler(variant).human_rating:g}\t{score:.8f}\n")
