# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled optimizer kernels.

Mirrors ``_kernels_py`` exactly: same move order, same splitmix64
stream, same tie handling.  Keep the two in sync.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log

IMPLEMENTATION = "cython"

cdef double EPS = 1e-12
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline unsigned long long _rng_next(unsigned long long* state) nogil:
    cdef unsigned long long z
    state[0] = state[0] + 0x9E3779B97F4A7C15ULL
    z = state[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _group_term(int kind, double gamma, double err_r,
                               double er_r, double two_e) nogil:
    cdef double exit_frac, visit, val
    if kind == 0:
        return (err_r - gamma * er_r * er_r / two_e) / two_e
    exit_frac = (er_r - err_r) / two_e
    visit = (2.0 * er_r - err_r) / two_e
    val = 0.0
    if exit_frac > 0.0:
        val += 2.0 * exit_frac * log(exit_frac)
    if visit > 0.0:
        val -= visit * log(visit)
    return val


cdef inline double _global_term(int kind, double e_in, double n_edges) nogil:
    cdef double x
    if kind == 0:
        return 0.0
    x = (n_edges - e_in) / n_edges
    if x > 0.0:
        return -x * log(x)
    return 0.0


def local_sweep(const long long[::1] indptr, const long long[::1] indices,
                long long[::1] labels, long long[::1] err, long long[::1] er,
                long long[::1] nr, long long[::1] scal, long long[::1] stack,
                int kind, double gamma, long long n_edges):
    """One best-move pass over all nodes in index order; returns move count."""
    cdef Py_ssize_t n = labels.shape[0]
    cdef double two_e = 2.0 * n_edges
    cdef cnp.ndarray cnt_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.ndarray touched_arr = np.zeros(n, dtype=np.int64)
    cdef long long[::1] cnt = cnt_arr
    cdef long long[::1] touched = touched_arr
    cdef Py_ssize_t u, t, i, n_touched
    cdef long long r, s, lv, k_ur, k_us, deg_u, e_in, c, best_s, best_kus
    cdef long long lo, hi
    cdef double base, f0, best_delta, delta
    cdef long long moves = 0

    for u in range(n):
        lo = indptr[u]
        hi = indptr[u + 1]
        deg_u = hi - lo
        r = labels[u]
        n_touched = 0
        for t in range(lo, hi):
            lv = labels[indices[t]]
            if cnt[lv] == 0:
                touched[n_touched] = lv
                n_touched += 1
            cnt[lv] += 1
        k_ur = cnt[r]
        e_in = scal[0]
        base = (_group_term(kind, gamma, err[r] - 2.0 * k_ur, er[r] - deg_u, two_e)
                - _group_term(kind, gamma, err[r], er[r], two_e))
        f0 = _global_term(kind, e_in, n_edges)
        best_delta = EPS
        best_s = -1
        best_kus = 0
        for i in range(n_touched):
            s = touched[i]
            if s == r:
                continue
            k_us = cnt[s]
            delta = (base
                     + _group_term(kind, gamma, err[s] + 2.0 * k_us,
                                   er[s] + deg_u, two_e)
                     - _group_term(kind, gamma, err[s], er[s], two_e)
                     + _global_term(kind, e_in - k_ur + k_us, n_edges) - f0)
            if delta > best_delta:
                best_delta = delta
                best_s = s
                best_kus = k_us
        if nr[r] > 1:
            c = -1
            if scal[2] > 0:
                c = stack[scal[2] - 1]
            elif scal[1] < n:
                c = scal[1]
            if c >= 0:
                delta = (base
                         + _group_term(kind, gamma, 0.0, <double>deg_u, two_e)
                         + _global_term(kind, e_in - k_ur, n_edges) - f0)
                if delta > best_delta:
                    best_delta = delta
                    best_s = c
                    best_kus = 0
        for i in range(n_touched):
            cnt[touched[i]] = 0
        if best_s >= 0:
            labels[u] = best_s
            err[r] -= 2 * k_ur
            er[r] -= deg_u
            nr[r] -= 1
            if nr[best_s] == 0:
                if best_s == scal[1]:
                    scal[1] += 1
                elif scal[2] > 0 and stack[scal[2] - 1] == best_s:
                    scal[2] -= 1
            err[best_s] += 2 * best_kus
            er[best_s] += deg_u
            nr[best_s] += 1
            scal[0] += best_kus - k_ur
            if nr[r] == 0:
                stack[scal[2]] = r
                scal[2] += 1
            moves += 1
    return int(moves)


def metropolis(const long long[::1] indptr, const long long[::1] indices,
               long long[::1] labels, long long[::1] err, long long[::1] er,
               long long[::1] nr, long long[::1] scal,
               int kind, double gamma, long long n_edges, double beta,
               long long n_steps, long long thin, long long burn,
               unsigned long long seed, long long[:, ::1] out):
    """Single-node label-flip Metropolis chain; returns accepted count."""
    cdef Py_ssize_t n = labels.shape[0]
    cdef double two_e = 2.0 * n_edges
    cdef unsigned long long state = seed
    cdef unsigned long long z
    cdef long long accepted = 0
    cdef long long sample_i = 0
    cdef long long n_out = out.shape[0] if out is not None else 0
    cdef long long step, r, s, k_ur, k_us, deg_u, lv, e_in
    cdef Py_ssize_t u, t
    cdef long long lo, hi
    cdef double delta
    cdef bint accept

    for step in range(1, n_steps + 1):
        z = _rng_next(&state)
        u = <Py_ssize_t>(z % <unsigned long long>n)
        z = _rng_next(&state)
        s = <long long>(z % <unsigned long long>n)
        r = labels[u]
        if s != r:
            lo = indptr[u]
            hi = indptr[u + 1]
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
            delta = (_group_term(kind, gamma, err[r] - 2.0 * k_ur,
                                 er[r] - deg_u, two_e)
                     - _group_term(kind, gamma, err[r], er[r], two_e)
                     + _group_term(kind, gamma, err[s] + 2.0 * k_us,
                                   er[s] + deg_u, two_e)
                     - _group_term(kind, gamma, err[s], er[s], two_e)
                     + _global_term(kind, e_in - k_ur + k_us, n_edges)
                     - _global_term(kind, e_in, n_edges))
            accept = delta >= 0.0
            if not accept:
                z = _rng_next(&state)
                accept = (z >> 11) * INV_2_53 < exp(beta * delta)
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
            for t in range(n):
                out[sample_i, t] = labels[t]
            sample_i += 1
    return int(accepted)
