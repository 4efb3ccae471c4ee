"""Partition comparison metrics and Monte Carlo validation suites.

The Monte Carlo suites check the concentration assumptions behind the
planted-form objectives: modularity moments under multinomial group
degrees, and the vanishing variance of the map-equation score over
mixing-matrix ensembles with fixed totals.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import xlogy
from sklearn.metrics import adjusted_mutual_info_score

from .errors import ValidationError
from .graph import Partition

__all__ = [
    "ComparisonRecord",
    "KlEstimate",
    "max_overlap",
    "adjusted_mutual_information",
    "compare_partitions",
    "kl_estimate",
    "modularity_fluctuation_moments",
    "infomap_variance_table",
    "fit_loglog_slope",
]

_EXACT_ASSIGNMENT_MAX_B = 2000


@dataclass(frozen=True)
class ComparisonRecord:
    overlap: float
    ami: float
    b_effective_1: float
    b_effective_2: float


@dataclass
class KlEstimate:
    """Monte Carlo mean/stderr of a description-length difference."""

    mean: float
    stderr: float
    n_samples: int
    n_failures: int = 0
    diffs: list[float] = field(default_factory=list)


def _contingency(b1: Partition, b2: Partition) -> np.ndarray:
    if b1.n_nodes != b2.n_nodes:
        raise ValidationError("partitions cover different node counts")
    table = np.zeros((b1.n_groups, b2.n_groups), dtype=np.int64)
    np.add.at(table, (b1.labels, b2.labels), 1)
    return table


def max_overlap(b1: Partition, b2: Partition) -> float:
    """Best label-bijection agreement fraction between two partitions.

    Exact via optimal assignment on the square-padded contingency table;
    above _EXACT_ASSIGNMENT_MAX_B groups a greedy matching is used and a
    warning emitted.
    """
    table = _contingency(b1, b2)
    side = max(table.shape)
    if side > _EXACT_ASSIGNMENT_MAX_B:
        warnings.warn("group count exceeds exact-assignment cap; "
                      "using greedy matching", RuntimeWarning, stacklevel=2)
        matched = _greedy_match(table)
    else:
        padded = np.zeros((side, side), dtype=np.int64)
        padded[: table.shape[0], : table.shape[1]] = table
        rows, cols = linear_sum_assignment(padded, maximize=True)
        matched = int(padded[rows, cols].sum())
    return matched / b1.n_nodes


def _greedy_match(table: np.ndarray) -> int:
    t = table.copy()
    total = 0
    for _ in range(min(t.shape)):
        i, j = np.unravel_index(np.argmax(t), t.shape)
        if t[i, j] <= 0:
            break
        total += int(t[i, j])
        t[i, :] = -1
        t[:, j] = -1
    return total


def adjusted_mutual_information(b1: Partition, b2: Partition) -> float:
    """AMI normalized by max(H1, H2); degenerate cases return 0.

    When both partitions are trivial the chance-adjusted denominator
    vanishes, so the score is pinned to 0 rather than special-cased to
    perfect agreement.
    """
    if b1.n_nodes != b2.n_nodes:
        raise ValidationError("partitions cover different node counts")
    if b1.n_groups == 1 and b2.n_groups == 1:
        return 0.0
    return float(adjusted_mutual_info_score(b1.labels, b2.labels,
                                            average_method="max"))


def compare_partitions(b1: Partition, b2: Partition) -> ComparisonRecord:
    from .optimize import effective_group_count

    return ComparisonRecord(
        overlap=max_overlap(b1, b2),
        ami=adjusted_mutual_information(b1, b2),
        b_effective_1=effective_group_count(b1),
        b_effective_2=effective_group_count(b2),
    )


def kl_estimate(sampler, sigma_p, sigma_q, n_samples: int,
                seed: int = 0) -> KlEstimate:
    """Mean description-length overhead of code Q on samples from P.

    ``sampler(seed)`` must return an instance accepted by both
    evaluators; evaluator failures are recorded and excluded.
    """
    if n_samples < 2:
        raise ValueError("need at least two samples")
    diffs: list[float] = []
    failures = 0
    for i in range(n_samples):
        sub_seed = int(np.random.SeedSequence([seed, i]).generate_state(1)[0])
        inst = sampler(sub_seed)
        try:
            diffs.append(float(sigma_q(inst)) - float(sigma_p(inst)))
        except Exception:
            failures += 1
    if len(diffs) < 2:
        raise ValidationError("fewer than two successful evaluations")
    arr = np.asarray(diffs)
    return KlEstimate(float(arr.mean()),
                      float(arr.std(ddof=1) / math.sqrt(arr.size)),
                      arr.size, failures, diffs)


def modularity_fluctuation_moments(n_edges: int, b: int, e_in: int,
                                   gamma: float, trials: int,
                                   seed: int = 0) -> tuple[float, float]:
    """Empirical (mean, var) of modularity over multinomial group degrees.

    Holds E_in fixed and draws the group degree sums e_r from a uniform
    multinomial over 2E endpoint slots.
    """
    if trials < 10**3:
        raise ValueError("need at least 1000 trials")
    rng = np.random.default_rng(seed)
    e_r = rng.multinomial(2 * n_edges, np.full(b, 1.0 / b), size=trials)
    q = e_in / n_edges - gamma * np.sum(e_r.astype(float) ** 2, axis=1) \
        / (2.0 * n_edges) ** 2
    return float(q.mean()), float(q.var(ddof=1))


_DEFAULT_VARIANCE_GRID = {
    "n_nodes": (100, 1000, 10_000, 100_000),
    "avg_k": (5.0, 20.0, 100.0),
    "b": (2, 20, 200),
    "ein_frac": (0.05, 0.5, 0.95),
}


def infomap_variance_table(grid: dict | None = None, trials: int = 100,
                           seed: int = 0) -> list[dict]:
    """Variance of the map-equation score over random mixing matrices.

    Each grid point fixes (N, <k>, B, E_in/E); diagonal entries are
    multinomial over 2 E_in, off-diagonal entries multinomial over
    E - E_in, resolving the fixed-total ensemble explicitly.  Rows carry
    n, b, avg_k, ein_frac, e, var_l.
    """
    spec = dict(_DEFAULT_VARIANCE_GRID)
    if grid:
        spec.update(grid)
    rng = np.random.default_rng(seed)
    rows = []
    for n in spec["n_nodes"]:
        for avg_k in spec["avg_k"]:
            e = int(round(n * avg_k / 2))
            for b in spec["b"]:
                if b > n / 2:
                    continue
                for frac in spec["ein_frac"]:
                    e_in = int(round(frac * e))
                    var_l = _infomap_variance_point(rng, e, e_in, b, trials)
                    rows.append({
                        "n_nodes": n, "b": b, "avg_k": avg_k,
                        "ein_frac": frac, "n_edges": e, "var_l": var_l,
                    })
    return rows


def _infomap_variance_point(rng, e: int, e_in: int, b: int,
                            trials: int) -> float:
    diag = rng.multinomial(2 * e_in, np.full(b, 1.0 / b), size=trials)
    n_off = b * (b - 1) // 2
    if n_off:
        off = rng.multinomial(e - e_in, np.full(n_off, 1.0 / n_off),
                              size=trials).astype(float)
        ri, si = np.triu_indices(b, k=1)
        e_r = diag.astype(float)
        np.add.at(e_r, (slice(None), ri), off)
        np.add.at(e_r, (slice(None), si), off)
    else:
        e_r = diag.astype(float)
    two_e = 2.0 * e
    exit_frac = (e_r - diag) / two_e
    visit = (2.0 * e_r - diag) / two_e
    scores = 2.0 * np.sum(xlogy(exit_frac, exit_frac), axis=1)
    scores -= np.sum(xlogy(visit, visit), axis=1)
    total_exit = np.sum(exit_frac, axis=1)
    scores -= xlogy(total_exit, total_exit)
    return float(scores.var(ddof=1))


def fit_loglog_slope(rows: list[dict], x_key: str = "n_edges",
                     y_key: str = "var_l") -> float:
    """Least-squares slope of ln y against ln x over table rows."""
    x = np.log([r[x_key] for r in rows])
    y = np.array([r[y_key] for r in rows])
    keep = y > 0
    if keep.sum() < 2:
        raise ValidationError("not enough positive variances to fit")
    return float(np.polyfit(x[keep], np.log(y[keep]), 1)[0])
