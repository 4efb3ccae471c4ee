"""The (B, E_in) state lattice: ensemble counts, Z(beta), and argmax states.

The lattice covers group counts B on a dense-then-log-spaced grid and
internal edge counts E_in on a strided integer grid.  Per-cell weights
are the equal-size-partition ensemble counts (a lower bound that
dominates asymptotically), real-extended through log-gamma so the grid
stays evaluable when B does not divide N.

Log-count matrices are cached per (N, E, grid, ensemble) and shared by
every inverse temperature, resolution value, and method that reuses the
same lattice; accumulations run in fixed B order for determinism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, xlogy

from .errors import NumericError
from .graph import DegreeStats
from .numeric import NEG_INF
from .quality import Method, planted_quality

__all__ = [
    "PlantedGrid",
    "ArgmaxState",
    "DosHistogram",
    "log_omega",
    "log_omega_dc",
    "log_partition_function",
    "mean_quality",
    "argmax_state",
    "dos_histogram",
]

_MAX_CELLS = 4 * 10**7


def log_omega(n_nodes, n_edges, e_in, b):
    """Log-count of partitioned graphs with E_in internal edges.

    Counts pairs (graph with E edges, partition into b equal groups)
    where exactly e_in edges fall within groups.  Real-extended in both
    e_in and b; impossible counts give -inf.
    """
    n = np.asarray(n_nodes, dtype=float)
    e_in_arr = np.asarray(e_in, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    size = n / b_arr
    within_pairs = b_arr * size * (size - 1.0) / 2.0
    between_pairs = size * size * b_arr * (b_arr - 1.0) / 2.0
    out = (_lbinom(within_pairs, e_in_arr)
           + _lbinom(between_pairs, n_edges - e_in_arr)
           + gammaln(n + 1.0) - b_arr * gammaln(size + 1.0))
    if np.isscalar(e_in) and np.isscalar(b):
        return float(out)
    return out


def log_omega_dc(n_nodes, n_edges, e_in, b, ds: DegreeStats):
    """Degree-constrained analog of :func:`log_omega` (configuration counts).

    Treats 2 E_in as even via the real extension ln(2^x Gamma(x + 1)).
    """
    base = _log_omega_dc_nodeg(n_nodes, n_edges, e_in, b)
    out = base - float(np.sum(gammaln(ds.degrees + 1.0)))
    if np.isscalar(e_in) and np.isscalar(b):
        return float(out)
    return out


def _log_omega_dc_nodeg(n_nodes, n_edges, e_in, b):
    """Degree-corrected count without the degree-sequence term.

    The full count subtracts sum_i ln k_i!, a grid-independent constant,
    which callers add back once.
    """
    n = np.asarray(n_nodes, dtype=float)
    e_in_arr = np.asarray(e_in, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    e_out = n_edges - e_in_arr
    pair_classes = b_arr * (b_arr - 1.0) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        between = xlogy(e_out, pair_classes)
    out = (b_arr * gammaln(2.0 * n_edges / b_arr + 1.0)
           + xlogy(e_in_arr, b_arr)
           + between
           - (e_in_arr * math.log(2.0) + gammaln(e_in_arr + 1.0))
           - gammaln(e_out + 1.0)
           + gammaln(n + 1.0) - b_arr * gammaln(n / b_arr + 1.0))
    return out


def _lbinom(n, k):
    """Vectorized real-extended ln C(n, k); -inf outside 0 <= k <= n."""
    n_arr = np.asarray(n, dtype=float)
    k_arr = np.asarray(k, dtype=float)
    with np.errstate(invalid="ignore"):
        out = gammaln(n_arr + 1.0) - gammaln(k_arr + 1.0) - gammaln(n_arr - k_arr + 1.0)
    return np.where((k_arr < 0) | (k_arr > n_arr), NEG_INF, out)


def default_b_values(n_nodes: int, b_max: int | None = None) -> np.ndarray:
    """Dense 1..200 plus log-spaced values up to b_max (default min(N, 1e4))."""
    cap = min(n_nodes, 10**4) if b_max is None else max(1, min(b_max, n_nodes))
    dense_top = min(n_nodes, 200, cap)
    dense = np.arange(1, dense_top + 1, dtype=np.int64)
    if cap > dense_top:
        tail = np.round(np.geomspace(dense_top, cap, num=80)).astype(np.int64)
        return np.unique(np.concatenate([dense, tail]))
    return dense


def default_ein_values(n_edges: int, stride: int | None = None
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Strided integer E_in grid with midpoint-rule integer weights.

    Weights count the integers each grid point stands for; they sum to
    E + 1 so the strided sum approximates the full one.
    """
    step = max(1, n_edges // 5000) if stride is None else max(1, int(stride))
    vals = np.arange(0, n_edges + 1, step, dtype=np.int64)
    if vals[-1] != n_edges:
        vals = np.append(vals, n_edges)
    bounds = np.empty(vals.size + 1)
    bounds[0] = vals[0] - 0.5
    bounds[-1] = vals[-1] + 0.5
    bounds[1:-1] = (vals[:-1] + vals[1:]) / 2.0
    return vals, np.diff(bounds)


@lru_cache(maxsize=8)
def _cached_log_omega(n_nodes: int, n_edges: int, b_key: bytes, ein_key: bytes,
                      dc: bool) -> np.ndarray:
    b_values = np.frombuffer(b_key, dtype=np.int64)
    ein = np.frombuffer(ein_key, dtype=np.int64)
    cols = ein[None, :]
    rows = b_values.astype(float)[:, None]
    if dc:
        mat = _log_omega_dc_nodeg(n_nodes, n_edges, cols, rows)
    else:
        mat = log_omega(n_nodes, n_edges, cols, rows)
    mat.setflags(write=False)
    return mat


@dataclass(frozen=True, eq=False)
class ArgmaxState:
    """Most probable feasible lattice cell at a given inverse temperature."""

    w_star: float
    b_star: int
    e_in_star: int


@dataclass(frozen=True, eq=False)
class DosHistogram:
    """Binned log density of states, total and per group count."""

    bin_edges: np.ndarray          # nbins + 1
    log_xi: np.ndarray             # nbins
    log_xi_b: np.ndarray           # nbins x len(b_values)
    b_values: np.ndarray

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


class PlantedGrid:
    """State lattice for one (N, E, method) triple.

    Exposes the per-cell planted quality values and log ensemble counts
    as matrices indexed [B, E_in]; the count matrix is shared through a
    module cache keyed by the lattice geometry.
    """

    def __init__(self, n_nodes: int, n_edges: int, method: Method,
                 b_max: int | None = None, b_values=None,
                 ein_stride: int | None = None,
                 degree_stats: DegreeStats | None = None):
        if n_edges < 1:
            raise NumericError("grid requires at least one edge")
        self.n_nodes = int(n_nodes)
        self.n_edges = int(n_edges)
        self.method = method
        if b_values is not None:
            self.b_values = np.unique(np.asarray(b_values, dtype=np.int64))
            if self.b_values[0] < 1 or self.b_values[-1] > n_nodes:
                raise ValueError("b_values must lie in [1, N]")
        else:
            self.b_values = default_b_values(n_nodes, b_max)
        self.ein_values, self.ein_weights = default_ein_values(n_edges, ein_stride)
        self.ein_stride = max(1, n_edges // 5000) if ein_stride is None else int(ein_stride)
        if self.b_values.size * self.ein_values.size > _MAX_CELLS:
            raise NumericError(
                "grid too large; increase ein_stride or reduce b_max")
        self.degree_stats = degree_stats
        if method.degree_corrected:
            if degree_stats is None:
                raise ValueError("degree-corrected grids need degree statistics")
            self.log_count_offset = -float(
                np.sum(gammaln(degree_stats.degrees + 1.0)))
        else:
            self.log_count_offset = 0.0
        self._w_matrix: np.ndarray | None = None

    @property
    def log_omega_matrix(self) -> np.ndarray:
        """Per-cell log counts, [B, E_in]; degree term excluded (constant)."""
        return _cached_log_omega(
            self.n_nodes, self.n_edges,
            self.b_values.tobytes(), self.ein_values.tobytes(),
            self.method.degree_corrected)

    @property
    def w_matrix(self) -> np.ndarray:
        if self._w_matrix is None:
            self._w_matrix = planted_quality(
                self.method, self.ein_values[None, :], self.n_edges,
                self.b_values.astype(float)[:, None])
        return self._w_matrix

    def with_method(self, method: Method) -> "PlantedGrid":
        g = PlantedGrid.__new__(PlantedGrid)
        g.__dict__.update(self.__dict__)
        g.method = method
        g._w_matrix = None
        if method.degree_corrected != self.method.degree_corrected:
            raise ValueError("ensemble change requires a fresh grid")
        return g

    # -- accumulation ----------------------------------------------------

    def moments(self, beta: float) -> tuple[float, float, np.ndarray]:
        """(ln Z, <W>, per-B log masses) in one fixed-order pass."""
        t = beta * self.w_matrix + (self.log_omega_matrix
                                    + np.log(self.ein_weights)[None, :])
        row_max = np.max(t, axis=1)
        finite = np.isfinite(row_max)
        if not np.any(finite):
            raise NumericError("no feasible cells on the grid")
        safe_max = np.where(finite, row_max, 0.0)
        scaled = np.exp(t - safe_max[:, None])
        row_sum = np.sum(scaled, axis=1)
        log_mass_b = np.where(finite, safe_max + np.log(row_sum), NEG_INF)
        row_mean_w = np.zeros(self.b_values.size)
        rs = np.where(row_sum > 0, row_sum, 1.0)
        row_mean_w = np.sum(scaled * self.w_matrix, axis=1) / rs
        shift = np.max(log_mass_b)
        mass = np.exp(log_mass_b - shift)
        total = float(np.sum(mass))
        log_z = float(shift + math.log(total)) + self.log_count_offset
        mean_w = float(np.sum(mass * row_mean_w) / total)
        return log_z, mean_w, log_mass_b + self.log_count_offset

    def b_marginal(self, beta: float) -> np.ndarray:
        """Normalized log P(B = b | beta) on the grid's B values."""
        log_z, _, log_mass_b = self.moments(beta)
        return log_mass_b - log_z


def log_partition_function(beta: float, grid: PlantedGrid) -> float:
    """ln Z(beta) over the lattice, strided cells weighted by width."""
    return grid.moments(beta)[0]


def mean_quality(beta: float, grid: PlantedGrid) -> float:
    """Ensemble mean of the quality value; nondecreasing in beta."""
    return grid.moments(beta)[1]


def argmax_state(beta: float, grid: PlantedGrid, refine: bool = True) -> ArgmaxState:
    """Lattice cell maximizing beta W + ln Omega, locally refined.

    The coarse grid maximum is re-scanned at unit E_in resolution and on
    intermediate group counts between neighboring grid B values.
    """
    t = beta * grid.w_matrix + grid.log_omega_matrix
    flat = int(np.argmax(t))
    bi, ej = np.unravel_index(flat, t.shape)
    if not np.isfinite(t[bi, ej]):
        raise NumericError("no feasible cells on the grid")
    best_b = int(grid.b_values[bi])
    best_ein = int(grid.ein_values[ej])
    if not refine:
        w = float(planted_quality(grid.method, best_ein, grid.n_edges, best_b))
        return ArgmaxState(w, best_b, best_ein)

    lo_b = int(grid.b_values[bi - 1]) if bi > 0 else best_b
    hi_b = int(grid.b_values[bi + 1]) if bi + 1 < grid.b_values.size else best_b
    cand = np.unique(np.round(np.geomspace(max(lo_b, 1), max(hi_b, 1), num=48))
                     .astype(np.int64))
    cand = cand[(cand >= 1) & (cand <= grid.n_nodes)]
    best_b, best_ein, _ = _scan_b_candidates(beta, grid, cand,
                                             coarse_ein=grid.ein_values)
    near = np.arange(max(1, best_b - 3), min(grid.n_nodes, best_b + 3) + 1,
                     dtype=np.int64)
    best_b, best_ein, _ = _scan_b_candidates(beta, grid, near,
                                             coarse_ein=grid.ein_values,
                                             start=(best_b, best_ein))
    # unit-resolution window around the coarse optimum
    window = np.arange(max(0, best_ein - 2 * grid.ein_stride),
                       min(grid.n_edges, best_ein + 2 * grid.ein_stride) + 1,
                       dtype=np.int64)
    best_b, best_ein, _ = _scan_b_candidates(beta, grid, near,
                                             coarse_ein=window,
                                             start=(best_b, best_ein))
    w = float(planted_quality(grid.method, best_ein, grid.n_edges, best_b))
    return ArgmaxState(w, best_b, best_ein)


def _scan_b_candidates(beta, grid, b_candidates, coarse_ein, start=None):
    best = (NEG_INF, None, None)
    if start is not None:
        b0, e0 = start
        v0 = _cell_value(beta, grid, b0, np.asarray([e0]))[0]
        best = (v0, b0, e0)
    for b in b_candidates:
        vals = _cell_value(beta, grid, int(b), coarse_ein)
        j = int(np.argmax(vals))
        if vals[j] > best[0]:
            best = (vals[j], int(b), int(coarse_ein[j]))
    if best[1] is None:
        raise NumericError("no feasible cells among candidates")
    return best[1], best[2], best[0]


def _cell_value(beta, grid, b, ein):
    if grid.method.degree_corrected:
        lw = _log_omega_dc_nodeg(grid.n_nodes, grid.n_edges,
                                 ein.astype(float), float(b))
    else:
        lw = log_omega(grid.n_nodes, grid.n_edges, ein.astype(float), float(b))
    w = planted_quality(grid.method, ein, grid.n_edges, float(b))
    return beta * np.asarray(w) + lw


def dos_histogram(grid: PlantedGrid, bins: int) -> DosHistogram:
    """Accumulate cell masses into quality-value bins (total and per B)."""
    if bins < 2:
        raise ValueError("need at least two bins")
    logw = grid.log_omega_matrix + np.log(grid.ein_weights)[None, :]
    w = grid.w_matrix
    feasible = np.isfinite(logw)
    if not np.any(feasible):
        raise NumericError("no feasible cells on the grid")
    w_min = float(np.min(w[feasible]))
    w_max = float(np.max(w[feasible]))
    pad = 1e-9 * max(1.0, abs(w_min), abs(w_max))
    edges = np.linspace(w_min - pad, w_max + pad, bins + 1)
    nb = grid.b_values.size
    log_xi_b = np.full((bins, nb), NEG_INF)
    idx = np.clip(np.searchsorted(edges, w, side="right") - 1, 0, bins - 1)
    for bi in range(nb):
        row_mask = feasible[bi]
        if not np.any(row_mask):
            continue
        vals = logw[bi][row_mask]
        bins_here = idx[bi][row_mask]
        shift = vals.max()
        acc = np.zeros(bins)
        np.add.at(acc, bins_here, np.exp(vals - shift))
        nonzero = acc > 0
        log_xi_b[nonzero, bi] = shift + np.log(acc[nonzero])
    with np.errstate(divide="ignore"):
        shift = np.max(log_xi_b, axis=1)
        safe = np.where(np.isfinite(shift), shift, 0.0)
        log_xi = np.where(
            np.isfinite(shift),
            safe + np.log(np.sum(np.exp(log_xi_b - safe[:, None]), axis=1)),
            NEG_INF)
    off = grid.log_count_offset
    return DosHistogram(edges, log_xi + off, log_xi_b + off, grid.b_values.copy())
