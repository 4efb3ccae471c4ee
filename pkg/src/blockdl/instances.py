"""Implicit priors, regime transitions, feasibility, and instance sampling.

The implicit model at inverse temperature beta induces marginals over
the quality value and group count; sweeping beta traces the feasible
(E_in, B) states, and sampling at a fixed beta yields problem instances
on which maximizing that quality function is the optimal strategy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dos import ArgmaxState, PlantedGrid, argmax_state
from .errors import InfeasibleError
from .graph import Graph, Partition
from .numeric import NEG_INF
from .quality import Method

__all__ = [
    "PriorCurve",
    "FeasibilityCurve",
    "InstanceSample",
    "TransitionResult",
    "prior_curves",
    "conditional_b_given_w",
    "locate_transition",
    "feasibility_curve",
    "detectability_ein_fraction",
    "sample_instance",
    "sample_pp",
]


@dataclass(frozen=True, eq=False)
class PriorCurve:
    """Per-beta means of W and B, with optional full marginal tables."""

    beta_grid: np.ndarray
    mean_w: np.ndarray
    mean_b: np.ndarray
    b_values: np.ndarray
    log_p_b: np.ndarray | None = None     # (n_beta, n_b)


@dataclass(frozen=True, eq=False)
class FeasibilityCurve:
    """Argmax states traced over a beta grid for one method."""

    method: Method
    betas: np.ndarray
    states: tuple[ArgmaxState, ...]


@dataclass(frozen=True, eq=False)
class TransitionResult:
    beta_star: float
    b_low_side: int
    b_high_side: int

    @property
    def jump(self) -> float:
        return max(self.b_low_side, self.b_high_side) / max(
            1, min(self.b_low_side, self.b_high_side))


@dataclass(frozen=True, eq=False)
class InstanceSample:
    graph: Graph
    partition: Partition
    meta: dict


def prior_curves(grid: PlantedGrid, beta_grid, *,
                 keep_marginals: bool = False) -> PriorCurve:
    """Ensemble means (and optionally P(B | beta) tables) per beta."""
    betas = np.asarray(beta_grid, dtype=float)
    mean_w = np.empty(betas.size)
    mean_b = np.empty(betas.size)
    table = np.empty((betas.size, grid.b_values.size)) if keep_marginals else None
    b_float = grid.b_values.astype(float)
    for i, beta in enumerate(betas):
        log_z, mw, log_mass = grid.moments(float(beta))
        mean_w[i] = mw
        probs = np.exp(log_mass - log_z)
        mean_b[i] = float(probs @ b_float)
        if table is not None:
            table[i] = log_mass - log_z
    return PriorCurve(betas, mean_w, mean_b, grid.b_values.copy(), table)


def conditional_b_given_w(grid: PlantedGrid, bins: int
                          ) -> tuple[np.ndarray, np.ndarray]:
    """Mean group count per quality bin; independent of beta.

    Returns (bin centers, <B> per bin), with NaN for empty bins.
    """
    from .dos import dos_histogram

    hist = dos_histogram(grid, bins)
    b_float = hist.b_values.astype(float)
    mean_b = np.full(hist.log_xi.size, np.nan)
    for i in range(hist.log_xi.size):
        if not np.isfinite(hist.log_xi[i]):
            continue
        probs = np.exp(hist.log_xi_b[i] - hist.log_xi[i])
        mean_b[i] = float(probs @ b_float)
    return hist.bin_centers, mean_b


def locate_transition(grid: PlantedGrid, beta_bracket: tuple[float, float], *,
                      rel_tol: float = 1e-6, jump_factor: float = 4.0
                      ) -> TransitionResult | None:
    """Bisect the discontinuity of the argmax group count.

    The bracket must straddle two regimes whose B* differ by at least
    ``jump_factor``; returns None when it does not (e.g. a continuous
    crossover).
    """
    lo, hi = float(beta_bracket[0]), float(beta_bracket[1])
    if not lo < hi:
        raise ValueError("bracket must satisfy beta_lo < beta_hi")
    b_lo = argmax_state(lo, grid).b_star
    b_hi = argmax_state(hi, grid).b_star
    big, small = max(b_lo, b_hi), min(b_lo, b_hi)
    if big < jump_factor * small:
        return None
    log_mid = 0.5 * (math.log(max(b_lo, 1)) + math.log(max(b_hi, 1)))
    while (hi - lo) > rel_tol * max(abs(hi), 1.0):
        mid = 0.5 * (lo + hi)
        b_mid = argmax_state(mid, grid).b_star
        if (math.log(max(b_mid, 1)) >= log_mid) == (b_lo >= b_hi):
            lo = mid
            b_lo = b_mid
        else:
            hi = mid
            b_hi = b_mid
    return TransitionResult(0.5 * (lo + hi), b_lo, b_hi)


def feasibility_curve(grid: PlantedGrid, beta_grid) -> FeasibilityCurve:
    """Argmax states per beta, consecutive duplicates dropped."""
    betas = np.asarray(beta_grid, dtype=float)
    states: list[ArgmaxState] = []
    kept: list[float] = []
    for beta in betas:
        st = argmax_state(float(beta), grid)
        if states and (st.b_star, st.e_in_star) == (
                states[-1].b_star, states[-1].e_in_star):
            continue
        states.append(st)
        kept.append(float(beta))
    return FeasibilityCurve(grid.method, np.asarray(kept), tuple(states))


def detectability_ein_fraction(b: int, avg_k: float) -> float:
    """Internal-edge fraction below which recovery is impossible."""
    if b < 1 or avg_k <= 0:
        raise ValueError("need b >= 1 and avg_k > 0")
    if b == 1:
        return 1.0
    return 1.0 / b + (b - 1) / (b * math.sqrt(avg_k))


def sample_instance(method: Method, beta: float, n_nodes: int, n_edges: int,
                    seed: int, *, b_max: int | None = None,
                    ein_stride: int | None = None) -> InstanceSample:
    """Sample a problem instance from the implicit model at beta.

    Fluctuations around the dominant (B, E_in) state are neglected: the
    partition has B* near-equal groups and the graph places exactly
    E_in* internal and E - E_in* external edges uniformly.
    """
    if method.degree_corrected:
        raise ValueError("instance sampling uses the plain ensemble")
    grid = PlantedGrid(n_nodes, n_edges, method, b_max=b_max,
                       ein_stride=ein_stride)
    st = argmax_state(float(beta), grid)
    sample = sample_pp(n_nodes, st.b_star, n_edges, st.e_in_star, seed)
    meta = dict(sample.meta)
    meta.update({
        "beta": float(beta),
        "method": method.to_json(),
        "b_star": st.b_star,
        "e_in_star": st.e_in_star,
        "w_star": st.w_star,
    })
    return InstanceSample(sample.graph, sample.partition, meta)


def sample_pp(n_nodes: int, b: int, n_edges: int, e_in: int,
              seed: int) -> InstanceSample:
    """Microcanonical equal-size planted-partition sample.

    Group sizes differ by at most one; exactly ``e_in`` distinct
    within-group pairs and ``n_edges - e_in`` distinct between-group
    pairs are drawn uniformly without replacement.  Deterministic for a
    given seed.
    """
    if not 1 <= b <= n_nodes:
        raise InfeasibleError(f"group count {b} outside [1, {n_nodes}]")
    if not 0 <= e_in <= n_edges:
        raise InfeasibleError("need 0 <= E_in <= E")
    sizes = np.full(b, n_nodes // b, dtype=np.int64)
    sizes[: n_nodes % b] += 1
    labels = np.repeat(np.arange(b, dtype=np.int64), sizes)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    cap_in = int(np.sum(sizes * (sizes - 1) // 2))
    cap_out = n_nodes * (n_nodes - 1) // 2 - cap_in
    e_out = n_edges - e_in
    if e_in > cap_in:
        raise InfeasibleError(f"E_in={e_in} exceeds {cap_in} within-group pairs")
    if e_out > cap_out:
        raise InfeasibleError(f"E-E_in={e_out} exceeds {cap_out} between-group pairs")
    rng = np.random.default_rng(seed)
    within = _sample_within(rng, sizes, offsets, cap_in, e_in)
    between = _sample_between(rng, labels, n_nodes, cap_out, e_out)
    edges = within + between
    g = Graph.from_edges(n_nodes, edges)
    p = Partition.from_labels(labels)
    meta = {
        "n_nodes": n_nodes,
        "n_edges": n_edges,
        "b": int(b),
        "e_in": int(e_in),
        "seed": int(seed),
        "group_sizes": "max_spread_1",
    }
    return InstanceSample(g, p, meta)


def _sample_within(rng, sizes, offsets, cap_in, e_in):
    if e_in == 0:
        return []
    pair_counts = sizes * (sizes - 1) // 2
    if e_in > cap_in // 2:
        pool = []
        for r in range(sizes.size):
            base = offsets[r]
            i, j = np.triu_indices(sizes[r], k=1)
            pool.extend(zip((i + base).tolist(), (j + base).tolist()))
        idx = rng.choice(len(pool), size=e_in, replace=False)
        return [pool[i] for i in np.sort(idx)]
    cum = np.cumsum(pair_counts / cap_in)
    chosen: set[tuple[int, int]] = set()
    out = []
    while len(out) < e_in:
        r = int(np.searchsorted(cum, rng.random(), side="right"))
        r = min(r, sizes.size - 1)
        u = int(rng.integers(sizes[r]))
        v = int(rng.integers(sizes[r]))
        if u == v:
            continue
        pair = (offsets[r] + min(u, v), offsets[r] + max(u, v))
        if pair in chosen:
            continue
        chosen.add(pair)
        out.append(pair)
    return out


def _sample_between(rng, labels, n_nodes, cap_out, e_out):
    if e_out == 0:
        return []
    if e_out > cap_out // 2:
        if n_nodes > 4000:
            raise InfeasibleError(
                "between-group pair density too high to sample at this size")
        i, j = np.triu_indices(n_nodes, k=1)
        mask = labels[i] != labels[j]
        pool = list(zip(i[mask].tolist(), j[mask].tolist()))
        idx = rng.choice(len(pool), size=e_out, replace=False)
        return [pool[k] for k in np.sort(idx)]
    chosen: set[tuple[int, int]] = set()
    out = []
    while len(out) < e_out:
        u = int(rng.integers(n_nodes))
        v = int(rng.integers(n_nodes))
        if u == v or labels[u] == labels[v]:
            continue
        pair = (min(u, v), max(u, v))
        if pair in chosen:
            continue
        chosen.add(pair)
        out.append(pair)
    return out
