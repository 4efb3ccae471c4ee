"""Description lengths of (graph, partition) pairs with baselines.

The description length of a pair under a quality function's implicit
model is -beta W + ln Z(beta, E) plus the flat edge-count prior, taken
at the beta whose ensemble mean matches the observed quality value (the
minimizer, since d ln Z / d beta = <W>).  Degree-corrected variants swap
in the degree-constrained ensemble plus degree-sequence priors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dos import PlantedGrid
from .errors import InfeasibleError, UndefinedObjectiveError
from .graph import Graph, Partition, block_summary, degree_stats
from .numeric import (log_binomial, log_double_factorial_even, log_factorial,
                      log_multiset, log_q_partitions_flagged)
from .quality import Method, quality_of

__all__ = [
    "DlReport",
    "description_length",
    "er_description_length",
    "cm_description_length",
    "pp_description_length",
]

_BETA_RESIDUAL = 1e-7
_BETA_MAX_ITER = 300


@dataclass
class DlReport:
    """Description length in nats with its additive breakdown."""

    sigma: float
    beta_star: float
    w: float
    method: Method
    components: dict[str, float]
    baselines: dict[str, float]
    flags: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "sigma_nats": self.sigma,
            "beta_star": self.beta_star,
            "w": self.w,
            "method": self.method.to_json(),
            "components": dict(self.components),
            "baselines": dict(self.baselines),
            "flags": list(self.flags),
            "notes": list(self.notes),
        }


def er_description_length(n_nodes: int, n_edges: int) -> float:
    """ln C(C(N, 2), E): the fully random simple-graph baseline."""
    pairs = n_nodes * (n_nodes - 1) // 2
    if n_edges > pairs:
        raise InfeasibleError(f"E={n_edges} exceeds the {pairs} node pairs")
    return float(log_binomial(pairs, n_edges))


def cm_description_length(g: Graph) -> float:
    """Configuration-model baseline with degree-sequence priors."""
    if g.n_edges < 1:
        raise UndefinedObjectiveError("baseline undefined for E = 0")
    ds = degree_stats(g)
    two_e = 2 * g.n_edges
    graph_term = (log_factorial(two_e) - log_double_factorial_even(two_e)
                  - float(np.sum(log_factorial(ds.degrees))))
    eta = ds.counts[ds.counts > 0]
    hist_term = log_factorial(g.n_nodes) - float(np.sum(log_factorial(eta)))
    q_term = log_q_partitions_flagged(two_e, g.n_nodes).value
    pairs = g.n_nodes * (g.n_nodes - 1) // 2
    return float(graph_term + hist_term + q_term + math.log(pairs + 1))


def pp_description_length(g: Graph, p: Partition) -> float:
    """Flat planted-partition encoding of (graph, partition).

    Uniform priors over the group-size composition, the group count, the
    internal edge count, and the edge count complete the conditional
    likelihood of a partitioned graph with fixed internal edges.
    """
    if g.n_edges < 1:
        raise UndefinedObjectiveError("baseline undefined for E = 0")
    s = block_summary(g, p)
    n, e, b = g.n_nodes, g.n_edges, s.n_groups
    sizes = s.group_sizes.astype(np.int64)
    within_pairs = int(np.sum(sizes * (sizes - 1) // 2))
    between_pairs = n * (n - 1) // 2 - within_pairs
    graph_term = (log_binomial(within_pairs, s.e_in)
                  + log_binomial(between_pairs, e - s.e_in))
    if not np.isfinite(graph_term):
        raise InfeasibleError("edge counts exceed pair capacities")
    partition_term = log_factorial(n) - float(np.sum(log_factorial(sizes)))
    priors = (log_binomial(n - 1, b - 1) + math.log(n) + math.log(e + 1)
              + math.log(n * (n - 1) // 2 + 1))
    return float(graph_term + partition_term + priors)


def description_length(g: Graph, p: Partition, method: Method, *,
                       b_max: int | None = None,
                       ein_stride: int | None = None,
                       beta_max: float | None = None,
                       allow_negative_beta: bool = False,
                       flat_degree_prior: bool = False,
                       grid: PlantedGrid | None = None,
                       include_baselines: bool = True) -> DlReport:
    """Minimum description length of (g, p) under the implicit model.

    The minimizing beta solves <W>_beta = W by bisection on the
    monotone ensemble mean; if W lies outside the attainable range the
    nearest domain endpoint is used and flagged.
    """
    if g.n_edges < 1:
        raise UndefinedObjectiveError("description length undefined for E = 0")
    s = block_summary(g, p)
    w_obs = quality_of(s, method)
    ds = degree_stats(g) if method.degree_corrected else None
    if grid is None:
        grid = PlantedGrid(g.n_nodes, g.n_edges, method, b_max=b_max,
                           ein_stride=ein_stride, degree_stats=ds)
    elif grid.method != method:
        grid = grid.with_method(method)

    beta_hi = 1e3 * g.n_nodes if beta_max is None else float(beta_max)
    beta_lo = -beta_hi if allow_negative_beta else 0.0
    flags: list[str] = []
    beta_star, clamped = _solve_beta(grid, w_obs, beta_lo, beta_hi)
    if clamped:
        flags.append(clamped)

    log_z = grid.moments(beta_star)[0]
    pairs = g.n_nodes * (g.n_nodes - 1) // 2
    components = {
        "beta_w": -beta_star * w_obs,
        "log_z": log_z,
        "e_prior": math.log(pairs + 1),
    }
    notes = []
    if method.kind == "infomap":
        notes.append("map-equation score excludes the degree-entropy term")
    if method.degree_corrected:
        assert ds is not None
        two_e = 2 * g.n_edges
        if flat_degree_prior:
            components["degree_prior"] = float(log_multiset(g.n_nodes, two_e))
        else:
            qv = log_q_partitions_flagged(two_e, g.n_nodes)
            if not qv.exact:
                flags.append("q_partitions_asymptotic")
            eta = ds.counts[ds.counts > 0]
            components["degree_prior_hist"] = qv.value
            components["degree_prior_perm"] = float(
                log_factorial(g.n_nodes) - np.sum(log_factorial(eta)))
    sigma = float(sum(components.values()))

    baselines: dict[str, float] = {}
    if include_baselines:
        baselines["sigma_er"] = er_description_length(g.n_nodes, g.n_edges)
        baselines["sigma_er_with_e_prior"] = (
            baselines["sigma_er"] + math.log(pairs + 1))
        baselines["sigma_cm"] = cm_description_length(g)
        try:
            baselines["sigma_pp"] = pp_description_length(g, p)
        except InfeasibleError:
            pass
    return DlReport(sigma, beta_star, w_obs, method, components, baselines,
                    flags, notes)


def _solve_beta(grid: PlantedGrid, w_obs: float, beta_lo: float,
                beta_hi: float) -> tuple[float, str]:
    """Bisection for <W>_beta = w_obs on the monotone ensemble mean."""
    tol = _BETA_RESIDUAL * max(1.0, abs(w_obs))
    mean_lo = grid.moments(beta_lo)[1]
    if w_obs <= mean_lo + tol:
        if w_obs < mean_lo - tol:
            return beta_lo, "beta_clamped_low"
        return beta_lo, ""
    mean_hi = grid.moments(beta_hi)[1]
    if w_obs >= mean_hi - tol:
        if w_obs > mean_hi + tol:
            return beta_hi, "beta_clamped_high"
        return beta_hi, ""
    lo, hi = beta_lo, beta_hi
    mid = 0.5 * (lo + hi)
    for _ in range(_BETA_MAX_ITER):
        mid = 0.5 * (lo + hi)
        mean_mid = grid.moments(mid)[1]
        if abs(mean_mid - w_obs) <= tol:
            return mid, ""
        if mean_mid < w_obs:
            lo = mid
        else:
            hi = mid
    return mid, "beta_not_converged"
