"""State-lattice counts, partition function, and argmax states."""

import math
from itertools import combinations, permutations

import mpmath
import numpy as np
import pytest

from blockdl.dos import (PlantedGrid, argmax_state, dos_histogram, log_omega,
                         log_omega_dc, log_partition_function, mean_quality)
from blockdl.errors import NumericError
from blockdl.graph import DegreeStats
from blockdl.numeric import NEG_INF, log_binomial
from blockdl.quality import Method, planted_modularity


def equal_label_vectors(n, b):
    """All assignments of n nodes to b labeled groups of size n/b."""
    assert n % b == 0
    base = []
    for r in range(b):
        base.extend([r] * (n // b))
    return sorted(set(permutations(base)))


def omega_oracle(n, e, e_in, b):
    """Count (equal labeled partition, graph) pairs with fixed E, E_in.

    Counts graphs per partition with binomial coefficients over the
    within/between pair sets; fully independent of the closed form.
    """
    pairs = list(combinations(range(n), 2))
    total = 0
    for labels in equal_label_vectors(n, b):
        within = sum(1 for u, v in pairs if labels[u] == labels[v])
        between = len(pairs) - within
        total += math.comb(within, e_in) * math.comb(between, e - e_in)
    return total


class TestLogOmega:
    def test_small_exact(self):
        assert omega_oracle(4, 2, 1, 2) == 48
        assert log_omega(4, 2, 1, 2) == pytest.approx(math.log(48), rel=1e-12)

    def test_within_only_cell(self):
        assert omega_oracle(4, 2, 2, 2) == 6
        assert log_omega(4, 2, 2, 2) == pytest.approx(math.log(6), rel=1e-12)

    def test_reduces_to_er_count(self):
        for n, e in ((4, 2), (10, 7), (30, 50)):
            assert log_omega(n, e, e, 1) == pytest.approx(
                float(log_binomial(n * (n - 1) // 2, e)), rel=1e-12)

    def test_enumeration_sweep(self):
        for n, b in ((4, 2), (4, 4), (6, 2), (6, 3)):
            for e in range(0, 4):
                for e_in in range(0, e + 1):
                    exact = omega_oracle(n, e, e_in, b)
                    got = log_omega(n, e, e_in, b)
                    if exact == 0:
                        assert got == NEG_INF
                    else:
                        assert got == pytest.approx(math.log(exact), abs=1e-9)

    def test_infeasible_is_neginf(self):
        # B = N admits no within-group pairs
        assert log_omega(5, 3, 1, 5) == NEG_INF


class TestLogOmegaDc:
    def test_configuration_model_collapse(self):
        # B = 1 with all edges internal: ln[(2E)! / ((2E)!! prod k_i!)]
        degrees = np.array([2, 2, 1, 1], dtype=np.int64)
        ds = DegreeStats(degrees, np.bincount(degrees), 3)
        e = 3
        expected = (float(mpmath.log(mpmath.factorial(2 * e)))
                    - math.log(2.0 ** e * math.factorial(e))
                    - sum(math.log(math.factorial(k)) for k in degrees))
        assert log_omega_dc(4, e, e, 1, ds) == pytest.approx(expected,
                                                             rel=1e-12)

    def test_b1_partial_internal_impossible(self):
        degrees = np.ones(4, dtype=np.int64)
        ds = DegreeStats(degrees, np.bincount(degrees), 2)
        assert log_omega_dc(4, 2, 1, 1, ds) == NEG_INF

    def test_term_by_term_oracle(self):
        # regular degree-1 sequence on 4 nodes, E=2, E_in=1, B=2
        n, e, e_in, b = 4, 2, 1, 2
        degrees = np.ones(n, dtype=np.int64)
        ds = DegreeStats(degrees, np.bincount(degrees), e)
        mp = mpmath.mpf
        expected = (b * mpmath.log(mpmath.factorial(mp(2 * e) / b))
                    + e_in * mpmath.log(mp(b))
                    + (e - e_in) * mpmath.log(mp(b * (b - 1)) / 2)
                    - (e_in * mpmath.log(mp(2)) + mpmath.log(mpmath.factorial(e_in)))
                    - mpmath.log(mpmath.factorial(e - e_in))
                    + mpmath.log(mpmath.factorial(n))
                    - b * mpmath.log(mpmath.factorial(mp(n) / b))
                    - sum(mpmath.log(mpmath.factorial(int(k))) for k in degrees))
        assert log_omega_dc(n, e, e_in, b, ds) == pytest.approx(
            float(expected), rel=1e-12)

    def test_no_between_edges_drops_pair_term(self):
        degrees = np.full(6, 2, dtype=np.int64)
        ds = DegreeStats(degrees, np.bincount(degrees), 6)
        with_term = log_omega_dc(6, 6, 6, 3, ds)
        assert np.isfinite(with_term)


def exhaustive_cells(n=4, e=2, b_values=(1, 2, 4)):
    cells = []
    for b in b_values:
        for e_in in range(e + 1):
            cnt = omega_oracle(n, e, e_in, b)
            if cnt:
                cells.append((b, e_in, cnt))
    return cells


class TestPartitionFunction:
    @pytest.fixture
    def tiny_grid(self):
        return PlantedGrid(4, 2, Method("modularity", 1.0),
                           b_values=[1, 2, 4], ein_stride=1)

    def test_exhaustive_equivalence(self, tiny_grid):
        cells = exhaustive_cells()
        for beta in (0.0, 0.7, 3.0, 25.0):
            direct = math.log(sum(
                cnt * math.exp(beta * planted_modularity(e_in, 2, b, 1.0))
                for b, e_in, cnt in cells))
            assert log_partition_function(beta, tiny_grid) == pytest.approx(
                direct, abs=1e-9)

    def test_beta0_counts_collapse(self, tiny_grid):
        total = sum(cnt for _, _, cnt in exhaustive_cells())
        assert log_partition_function(0.0, tiny_grid) == pytest.approx(
            math.log(total), abs=1e-9)
        # independent of gamma at beta = 0
        g2 = PlantedGrid(4, 2, Method("modularity", 3.7),
                         b_values=[1, 2, 4], ein_stride=1)
        assert log_partition_function(0.0, g2) == pytest.approx(
            math.log(total), abs=1e-9)

    def test_mean_quality_beta0(self, tiny_grid):
        cells = exhaustive_cells()
        total = sum(cnt for _, _, cnt in cells)
        direct = sum(cnt * planted_modularity(e_in, 2, b, 1.0)
                     for b, e_in, cnt in cells) / total
        assert mean_quality(0.0, tiny_grid) == pytest.approx(direct, abs=1e-12)

    def test_mean_quality_limits(self, tiny_grid):
        cells = exhaustive_cells()
        ws = [planted_modularity(e_in, 2, b, 1.0) for b, e_in, _ in cells]
        assert mean_quality(4000.0, tiny_grid) == pytest.approx(max(ws),
                                                                abs=1e-6)
        assert mean_quality(-4000.0, tiny_grid) == pytest.approx(min(ws),
                                                                 abs=1e-6)

    def test_convexity_bound(self, tiny_grid):
        w_min = min(planted_modularity(e_in, 2, b, 1.0)
                    for b, e_in, _ in exhaustive_cells())
        for b1, b2 in ((0.0, 1.0), (1.0, 5.0), (2.0, 9.0)):
            z1 = log_partition_function(b1, tiny_grid)
            z2 = log_partition_function(b2, tiny_grid)
            assert z2 >= z1 + (b2 - b1) * w_min - 1e-9

    def test_derivative_is_mean(self):
        grid = PlantedGrid(40, 80, Method("modularity", 1.0), ein_stride=1)
        for beta in (0.0, 5.0, 40.0, 200.0, 900.0):
            h = 1e-4 * max(1.0, beta)
            dz = (log_partition_function(beta + h, grid)
                  - log_partition_function(beta - h, grid)) / (2 * h)
            assert dz == pytest.approx(mean_quality(beta, grid),
                                       rel=1e-4, abs=1e-7)

    def test_logz_convex_in_beta(self):
        grid = PlantedGrid(40, 80, Method("infomap"), ein_stride=1)
        betas = np.linspace(0.0, 400.0, 21)
        z = np.array([log_partition_function(b, grid) for b in betas])
        second = np.diff(z, 2)
        assert np.all(second >= -1e-8)

    def test_mean_monotone_in_beta(self):
        grid = PlantedGrid(40, 80, Method("modularity", 1.0), ein_stride=1)
        betas = np.geomspace(0.1, 4e4, 25)
        means = [mean_quality(b, grid) for b in betas]
        assert np.all(np.diff(means) >= -1e-10)

    def test_stride_insensitivity(self):
        # halving the default stride moves ln Z by < 0.1% relative
        n, e = 10**4, 5 * 10**4
        m = Method("modularity", 1.0)
        base = PlantedGrid(n, e, m)
        half = PlantedGrid(n, e, m, ein_stride=max(1, base.ein_stride // 2))
        for beta in (0.0, 10.0 * n, 40.0 * n):
            z1 = log_partition_function(beta, base)
            z2 = log_partition_function(beta, half)
            assert abs(z2 - z1) / abs(z1) < 1e-3

    def test_empty_grid_errors(self):
        # more edges than node pairs: every lattice cell has count zero
        with pytest.raises(NumericError):
            PlantedGrid(4, 20, Method("modularity", 1.0),
                        ein_stride=1).moments(0.0)


class TestArgmax:
    def test_beta0_pure_entropy(self):
        grid = PlantedGrid(30, 40, Method("modularity", 1.0), ein_stride=1)
        st = argmax_state(0.0, grid)
        lw = grid.log_omega_matrix
        flat = np.unravel_index(np.argmax(lw), lw.shape)
        assert st.b_star == int(grid.b_values[flat[0]])
        assert st.e_in_star == int(grid.ein_values[flat[1]])

    def test_large_beta_fully_internal(self):
        grid = PlantedGrid(30, 40, Method("modularity", 1.0), ein_stride=1)
        st = argmax_state(5e4, grid)
        assert st.e_in_star == grid.n_edges

    def test_refinement_off_grid(self):
        # a coarse E_in stride still recovers the exact integer optimum
        m = Method("modularity", 1.0)
        coarse = PlantedGrid(60, 120, m, ein_stride=7)
        fine = PlantedGrid(60, 120, m, ein_stride=1)
        for beta in (50.0, 200.0, 1000.0):
            a = argmax_state(beta, coarse)
            b = argmax_state(beta, fine)
            assert (a.b_star, a.e_in_star) == (b.b_star, b.e_in_star)


class TestDosHistogram:
    def test_single_cell(self):
        grid = PlantedGrid(4, 2, Method("modularity", 1.0), b_values=[1],
                           ein_stride=1)
        hist = dos_histogram(grid, 4)
        finite = np.isfinite(hist.log_xi)
        assert finite.sum() == 1
        assert hist.log_xi[finite][0] == pytest.approx(math.log(15), abs=1e-9)

    def test_bin_masses_match_enumeration(self):
        grid = PlantedGrid(4, 2, Method("modularity", 1.0),
                           b_values=[1, 2, 4], ein_stride=1)
        hist = dos_histogram(grid, 6)
        cells = exhaustive_cells()
        edges = hist.bin_edges
        expected = np.zeros(hist.log_xi.size)
        for b, e_in, cnt in cells:
            w = planted_modularity(e_in, 2, b, 1.0)
            idx = min(np.searchsorted(edges, w, side="right") - 1,
                      expected.size - 1)
            expected[idx] += cnt
        got = np.where(np.isfinite(hist.log_xi), np.exp(hist.log_xi), 0.0)
        assert got == pytest.approx(expected, rel=1e-9)

    def test_mass_conservation(self):
        grid = PlantedGrid(50, 100, Method("infomap"), ein_stride=3)
        hist = dos_histogram(grid, 40)
        from blockdl.numeric import log_sum_exp
        total_bins = log_sum_exp(hist.log_xi[np.isfinite(hist.log_xi)])
        assert total_bins == pytest.approx(
            log_partition_function(0.0, grid), rel=1e-6)
