"""Pure-Python optimizer kernels.

Reference implementation of the hot inner loops; the compiled extension
in ``_core.pyx`` mirrors these semantics exactly (same move order, same
pseudo-random stream), so either can back the optimizer.  Keep the two
in sync.
"""

from __future__ import annotations

import math

IMPLEMENTATION = "python"

EPS = 1e-12
_MASK = (1 << 64) - 1
_INV_2_53 = 1.0 / 9007199254740992.0


def _rng_next(state: int) -> tuple[int, int]:
    """One splitmix64 step: (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    z ^= z >> 31
    return state, z


def _group_term(kind: int, gamma: float, err_r: float, er_r: float,
                two_e: float) -> float:
    if kind == 0:
        return (err_r - gamma * er_r * er_r / two_e) / two_e
    exit_frac = (er_r - err_r) / two_e
    visit = (2.0 * er_r - err_r) / two_e
    val = 0.0
    if exit_frac > 0.0:
        val += 2.0 * exit_frac * math.log(exit_frac)
    if visit > 0.0:
        val -= visit * math.log(visit)
    return val


def _global_term(kind: int, e_in: float, n_edges: float) -> float:
    if kind == 0:
        return 0.0
    x = (n_edges - e_in) / n_edges
    return -x * math.log(x) if x > 0.0 else 0.0


def local_sweep(indptr, indices, labels, err, er, nr, scal, stack,
                kind: int, gamma: float, n_edges: int) -> int:
    """One best-move pass over all nodes in index order.

    ``scal`` holds [e_in, frontier, stack_size]; ``stack`` recycles
    emptied group ids so a move can always open a fresh group.  Strictly
    improving moves only; ties keep the current assignment.  Returns the
    number of moves applied.
    """
    n = len(labels)
    two_e = 2.0 * n_edges
    moves = 0
    for u in range(n):
        lo, hi = indptr[u], indptr[u + 1]
        deg_u = hi - lo
        r = labels[u]
        cnt: dict[int, int] = {}
        for t in range(lo, hi):
            lv = labels[indices[t]]
            cnt[lv] = cnt.get(lv, 0) + 1
        k_ur = cnt.get(r, 0)
        e_in = scal[0]
        base = (_group_term(kind, gamma, err[r] - 2 * k_ur, er[r] - deg_u, two_e)
                - _group_term(kind, gamma, err[r], er[r], two_e))
        f0 = _global_term(kind, e_in, n_edges)
        best_delta = EPS
        best_s = -1
        best_kus = 0
        for s, k_us in cnt.items():
            if s == r:
                continue
            delta = (base
                     + _group_term(kind, gamma, err[s] + 2 * k_us,
                                   er[s] + deg_u, two_e)
                     - _group_term(kind, gamma, err[s], er[s], two_e)
                     + _global_term(kind, e_in - k_ur + k_us, n_edges) - f0)
            if delta > best_delta:
                best_delta, best_s, best_kus = delta, s, k_us
        if nr[r] > 1:
            c = _empty_candidate(scal, stack, n)
            if c >= 0:
                delta = (base
                         + _group_term(kind, gamma, 0.0, float(deg_u), two_e)
                         + _global_term(kind, e_in - k_ur, n_edges) - f0)
                if delta > best_delta:
                    best_delta, best_s, best_kus = delta, c, 0
        if best_s >= 0:
            _apply_move(u, r, best_s, k_ur, best_kus, deg_u,
                        labels, err, er, nr, scal, stack)
            moves += 1
    return moves


def _empty_candidate(scal, stack, n: int) -> int:
    if scal[2] > 0:
        return stack[scal[2] - 1]
    if scal[1] < n:
        return scal[1]
    return -1


def _apply_move(u, r, s, k_ur, k_us, deg_u, labels, err, er, nr, scal, stack):
    labels[u] = s
    err[r] -= 2 * k_ur
    er[r] -= deg_u
    nr[r] -= 1
    was_empty = nr[s] == 0
    err[s] += 2 * k_us
    er[s] += deg_u
    nr[s] += 1
    scal[0] += k_us - k_ur
    if was_empty:
        if s == scal[1]:
            scal[1] += 1
        elif scal[2] > 0 and stack[scal[2] - 1] == s:
            scal[2] -= 1
    if nr[r] == 0:
        stack[scal[2]] = r
        scal[2] += 1


def metropolis(indptr, indices, labels, err, er, nr, scal,
               kind: int, gamma: float, n_edges: int, beta: float,
               n_steps: int, thin: int, burn: int, seed: int, out) -> int:
    """Single-node label-flip Metropolis chain over label vectors.

    Proposes (node, new label) uniformly over [0, N)^2 and accepts with
    min(1, exp(beta * delta)).  Records the label vector every ``thin``
    steps after ``burn`` into ``out``.  Returns the accepted count.
    """
    n = len(labels)
    two_e = 2.0 * n_edges
    state = seed & _MASK
    accepted = 0
    sample_i = 0
    n_out = out.shape[0] if out is not None else 0
    for step in range(1, n_steps + 1):
        state, z = _rng_next(state)
        u = z % n
        state, z = _rng_next(state)
        s = z % n
        r = labels[u]
        if s != r:
            lo, hi = indptr[u], indptr[u + 1]
            deg_u = hi - lo
            k_ur = 0
            k_us = 0
            for t in range(lo, hi):
                lv = labels[indices[t]]
                if lv == r:
                    k_ur += 1
                elif lv == s:
                    k_us += 1
            e_in = scal[0]
            delta = (_group_term(kind, gamma, err[r] - 2 * k_ur, er[r] - deg_u, two_e)
                     - _group_term(kind, gamma, err[r], er[r], two_e)
                     + _group_term(kind, gamma, err[s] + 2 * k_us,
                                   er[s] + deg_u, two_e)
                     - _group_term(kind, gamma, err[s], er[s], two_e)
                     + _global_term(kind, e_in - k_ur + k_us, n_edges)
                     - _global_term(kind, e_in, n_edges))
            accept = delta >= 0.0
            if not accept:
                state, z = _rng_next(state)
                accept = (z >> 11) * _INV_2_53 < math.exp(beta * delta)
            if accept:
                labels[u] = s
                err[r] -= 2 * k_ur
                er[r] -= deg_u
                nr[r] -= 1
                err[s] += 2 * k_us
                er[s] += deg_u
                nr[s] += 1
                scal[0] += k_us - k_ur
                accepted += 1
        else:
            accepted += 1
        if step > burn and (step - burn) % thin == 0 and sample_i < n_out:
            out[sample_i, :] = labels
            sample_i += 1
    return accepted
