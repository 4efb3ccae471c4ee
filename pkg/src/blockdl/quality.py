"""Quality functions on block summaries and their planted-partition forms.

Both objectives depend on the graph and partition only through the block
summary.  The map-equation score is sign-flipped so that better
partitions score higher, and the degree-entropy term is dropped since it
does not depend on the partition; raw scores from external map-equation
tools are therefore not directly comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .errors import InfeasibleError, NumericError, UndefinedObjectiveError
from .graph import BlockSummary

__all__ = [
    "Method",
    "modularity",
    "infomap_score",
    "planted_modularity",
    "planted_infomap",
    "planted_quality",
    "ein_from_modularity",
    "ein_from_infomap",
    "quality_of",
]

TWO_LN_2 = 2.0 * math.log(2.0)


@dataclass(frozen=True)
class Method:
    """A quality function: generalized modularity or the map-equation score.

    ``degree_corrected`` selects the degree-constrained ensemble in
    description-length computations; it never changes the objective.
    """

    kind: str = "modularity"
    gamma: float = 1.0
    degree_corrected: bool = False

    def __post_init__(self):
        if self.kind not in ("modularity", "infomap"):
            raise ValueError(f"unknown method kind {self.kind!r}")
        if self.kind == "modularity" and not self.gamma > 0:
            raise ValueError("modularity requires gamma > 0")

    def to_json(self) -> dict:
        out = {"method": self.kind, "dc": self.degree_corrected}
        if self.kind == "modularity":
            out["gamma"] = self.gamma
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Method":
        return cls(obj["method"], obj.get("gamma", 1.0), obj.get("dc", False))


def modularity(s: BlockSummary, gamma: float = 1.0) -> float:
    """Generalized modularity (1/2E) sum_r [e_rr - gamma e_r^2 / 2E]."""
    if s.n_edges < 1:
        raise UndefinedObjectiveError("modularity undefined for E = 0")
    two_e = 2.0 * s.n_edges
    return float(np.sum(s.e_rr - gamma * s.e_r.astype(float) ** 2 / two_e) / two_e)


def infomap_score(s: BlockSummary) -> float:
    """Sign-flipped map-equation score, degree-entropy term excluded.

    Uses the convention 0 ln 0 = 0 throughout.
    """
    if s.n_edges < 1:
        raise UndefinedObjectiveError("infomap score undefined for E = 0")
    two_e = 2.0 * s.n_edges
    exit_frac = (s.e_r - s.e_rr) / two_e
    total_exit = float(np.sum(exit_frac))
    out = -xlogy(total_exit, total_exit)
    out += 2.0 * float(np.sum(xlogy(exit_frac, exit_frac)))
    visit = (2.0 * s.e_r - s.e_rr) / two_e
    out -= float(np.sum(xlogy(visit, visit)))
    return float(out)


def planted_modularity(e_in, e: int, b, gamma: float = 1.0):
    """Modularity of an equal-size, equal-density split: E_in/E - gamma/B."""
    return np.asarray(e_in, dtype=float) / e - gamma / np.asarray(b, dtype=float)


def planted_infomap(e_in, e: int, b):
    """Map-equation score of the planted split with E_in internal edges.

    Monotone nondecreasing in E_in, ranging from -2 ln 2 at E_in = 0 to
    ln B at E_in = E.
    """
    x_out = (e - np.asarray(e_in, dtype=float)) / e       # leave fraction
    b_arr = np.asarray(b, dtype=float)
    val = -xlogy(x_out, x_out)
    val = val + 2.0 * xlogy(x_out, x_out / b_arr)
    visit = 1.0 + x_out
    val = val - xlogy(visit, visit / b_arr)
    if np.isscalar(e_in) and np.isscalar(b):
        return float(val)
    return val


def planted_quality(method: Method, e_in, e: int, b):
    if method.kind == "modularity":
        return planted_modularity(e_in, e, b, method.gamma)
    return planted_infomap(e_in, e, b)


def quality_of(s: BlockSummary, method: Method) -> float:
    if method.kind == "modularity":
        return modularity(s, method.gamma)
    return infomap_score(s)


def ein_from_modularity(q: float, e: int, b: int, gamma: float = 1.0) -> float:
    """Invert the planted modularity: E_in = E (Q + gamma / B)."""
    e_in = e * (q + gamma / b)
    if not -1e-9 <= e_in <= e * (1 + 1e-12) + 1e-9:
        raise InfeasibleError(
            f"modularity {q} not attainable with E={e}, B={b}, gamma={gamma}")
    return float(min(max(e_in, 0.0), float(e)))


def ein_from_infomap(l_value: float, e: int, b: int, tol: float = 1e-12) -> float:
    """Invert the planted map-equation score for E_in by bisection.

    The planted score is strictly increasing in E_in, so bisection over
    the internal fraction x in [0, 1] converges unconditionally; ``tol``
    is the absolute tolerance on x.
    """
    lo_val = -TWO_LN_2
    hi_val = math.log(b)
    if not lo_val - 1e-9 <= l_value <= hi_val + 1e-9:
        raise InfeasibleError(
            f"map score {l_value} outside [{lo_val:.6f}, {hi_val:.6f}] for B={b}")
    lo, hi = 0.0, 1.0
    if l_value <= lo_val:
        return 0.0
    if l_value >= hi_val:
        return float(e)
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        f_mid = planted_infomap(mid * e, e, b) - l_value
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
    else:
        raise NumericError("bisection failed to bracket the map score")
    return 0.5 * (lo + hi) * e
