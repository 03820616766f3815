"""Tests of the Bell functionals, their bounds, and the numeric maximizer."""

import itertools
import math

import numpy as np
import pytest
from scipy import optimize as sciopt

from bellbox import quantum
from bellbox.inequalities import (
    CHSH,
    TLM,
    Chained,
    Tilted,
    chained_value,
    chsh_value,
    classical_bound,
    quantum_max,
    tilted_value,
    tlm_value,
)
from bellbox.quantum import TSIRELSON, make_noisy_state, make_pure_state

RNG = np.random.default_rng(52)

INV_SQRT2 = 1 / math.sqrt(2)


def brute_force_chained_planar(k: int, restarts: int = 40) -> float:
    """Independent oracle: maximize the chained sum over planar measurement angles.

    Uses the planar correlator E(a, b) = -cos(a + b) of the maximally entangled
    target state directly (no library calls), with multi-start local refinement.
    """
    def value(angles):
        a, b = angles[:k], angles[k:]
        total = 0.0
        for i in range(1, k + 1):
            y = i - 1
            e_same = -math.cos(a[y] + b[y])
            if i < k:
                e_next = -math.cos(a[i] + b[y])
                total += abs(0.5 * (e_same + e_next))
            else:
                e_wrap = -math.cos(a[0] + b[y])
                total += abs(0.5 * (e_same - e_wrap))
        return total

    rng = np.random.default_rng(k)
    best = 0.0
    for trial in range(restarts):
        if trial % 2 == 0:
            x0 = rng.uniform(0, 2 * math.pi, size=2 * k)
        else:  # evenly fanned angles with random offsets
            x0 = np.concatenate([
                rng.uniform(0, math.pi) + np.arange(k) * math.pi / k,
                rng.uniform(0, math.pi) + (np.arange(k) + 0.5) * math.pi / k,
            ])
        res = sciopt.minimize(lambda x: -value(x), x0, method="Nelder-Mead",
                              options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 6000})
        best = max(best, -res.fun)
    return best


class TestChsh:
    def test_tsirelson_table(self):
        e = np.array([[INV_SQRT2, INV_SQRT2], [INV_SQRT2, -INV_SQRT2]])
        assert chsh_value(e) == pytest.approx(TSIRELSON, abs=1e-12)

    def test_deterministic_saturates_local_bound(self):
        assert chsh_value(np.ones((2, 2))) == pytest.approx(2.0)

    def test_zero_table(self):
        assert chsh_value(np.zeros((2, 2))) == 0.0

    def test_wrong_size_rejected(self):
        with pytest.raises(ValueError):
            chsh_value(np.zeros((3, 3)))


class TestChained:
    def test_k2_optimum_matches_planar_brute_force(self):
        brute = brute_force_chained_planar(2)
        assert brute == pytest.approx(math.sqrt(2), abs=1e-9)
        rho = make_pure_state(math.pi / 4)
        assert quantum_max(Chained(2), rho) == pytest.approx(brute, abs=1e-6)

    def test_k3_optimum_matches_planar_brute_force(self):
        brute = brute_force_chained_planar(3)
        assert brute == pytest.approx(3 * math.cos(math.pi / 6), abs=1e-9)
        rho = make_pure_state(math.pi / 4)
        assert quantum_max(Chained(3), rho) == pytest.approx(brute, abs=1e-6)

    @pytest.mark.parametrize("k", [2, 3, 4, 5])
    def test_numeric_max_matches_analytic(self, k):
        rho = make_pure_state(math.pi / 4)
        analytic = k * math.cos(math.pi / (2 * k))
        assert quantum_max(Chained(k), rho) == pytest.approx(analytic, abs=1e-6)
        assert quantum_max(Chained(k)) == pytest.approx(analytic, abs=1e-12)

    def test_zero_table(self):
        assert chained_value(np.zeros((4, 4)), 4) == 0.0

    def test_reads_only_neighboring_correlators(self):
        e = RNG.uniform(-1, 1, size=(3, 3))
        poisoned = e.copy()
        poisoned[0, 1] = 123.0  # never read by the k=3 functional
        poisoned[2, 0] = -77.0  # pair (x=2, y=0) is not a neighbor either
        assert chained_value(poisoned, 3) == pytest.approx(chained_value(e, 3))

    def test_half_normalization_ties_to_chsh(self):
        # when signs align, the k=2 chained sum is exactly half the CHSH value
        for _ in range(100):
            e = np.empty((2, 2))
            e[0, 0], e[1, 0] = RNG.uniform(0, 1, 2)   # E00 + E10 >= 0
            e[0, 1] = RNG.uniform(0, 1)               # E01 - E11 >= 0 (wrap sign)
            e[1, 1] = -RNG.uniform(0, 1)
            assert chained_value(e, 2) == pytest.approx(chsh_value(e) / 2, abs=1e-12)

    def test_bad_k_rejected(self):
        with pytest.raises(ValueError):
            Chained(1)


class TestTilted:
    def test_alpha1_beta0_reduces_to_chsh(self):
        for _ in range(50):
            e = RNG.uniform(-1, 1, size=(2, 2))
            assert tilted_value(e, RNG.uniform(-1, 1), 1.0, 0.0) == pytest.approx(
                chsh_value(e), abs=1e-12
            )

    def test_quantum_max_formula(self):
        assert quantum_max(Tilted(1.0, 1.0)) == pytest.approx(2 * math.sqrt(2.5), abs=1e-12)
        assert quantum_max(Tilted(1.0, 0.0)) == pytest.approx(TSIRELSON, abs=1e-12)

    def test_trivial_marginal_case(self):
        assert tilted_value(np.zeros((2, 2)), 1.0, 1.0, 1.0) == pytest.approx(1.0)

    def test_parameter_ranges(self):
        with pytest.raises(ValueError):
            tilted_value(np.zeros((2, 2)), 0.0, 0.9, 0.0)
        with pytest.raises(ValueError):
            tilted_value(np.zeros((2, 2)), 0.0, 1.0, -0.1)

    @pytest.mark.parametrize("beta", [0.5, 1.0])
    def test_matched_state_achieves_closed_form_max(self, beta):
        # the state with sin(2 gamma) = sqrt((4 - beta^2)/(4 + beta^2)) saturates
        # the closed-form maximum for alpha = 1
        gamma = 0.5 * math.asin(math.sqrt((4 - beta**2) / (4 + beta**2)))
        rho = make_pure_state(gamma)
        target = 2 * math.sqrt(2 * (1 + beta**2 / 4))
        assert quantum_max(Tilted(1.0, beta), rho) == pytest.approx(target, abs=1e-6)


class TestTlm:
    def test_optimal_singlet_correlators_reach_pi(self):
        e = np.array([[-INV_SQRT2, INV_SQRT2], [INV_SQRT2, INV_SQRT2]])
        assert tlm_value(e) == pytest.approx(math.pi, abs=1e-12)

    def test_zero_table(self):
        assert tlm_value(np.zeros((2, 2))) == 0.0

    def test_single_saturated_entry(self):
        e = np.zeros((2, 2))
        e[0, 0] = 1.0
        assert tlm_value(e) == pytest.approx(-math.pi / 2, abs=1e-12)
        e = np.zeros((2, 2))
        e[0, 1] = 1.0
        assert tlm_value(e) == pytest.approx(math.pi / 2, abs=1e-12)

    def test_clamps_out_of_range_inputs(self):
        e = np.array([[1.0 + 1e-9, 0.0], [0.0, 0.0]])
        assert tlm_value(e) == pytest.approx(-math.pi / 2, abs=1e-9)

    def test_singlet_numeric_max_is_pi(self):
        rho = make_pure_state(math.pi / 4)
        assert quantum_max(TLM(), rho) == pytest.approx(math.pi, abs=1e-6)


class TestBounds:
    def test_classical_bounds(self):
        assert classical_bound(CHSH()) == 2.0
        assert classical_bound(Chained(5)) == 4.0
        assert classical_bound(Tilted(1.5, 0.5)) == pytest.approx(3.5)

    def test_tlm_has_no_classical_bound(self):
        with pytest.raises(ValueError, match="quantum"):
            classical_bound(TLM())

    def test_local_deterministic_strategies_never_violate(self):
        ks = range(2, 7)
        tilted_params = [(1 + RNG.uniform(0, 2), RNG.uniform(0, 2)) for _ in range(20)]
        for _ in range(10_000):
            a = RNG.choice([-1.0, 1.0], size=6)
            b = RNG.choice([-1.0, 1.0], size=6)
            e = np.outer(a, b)
            assert chsh_value(e[:2, :2]) <= 2.0 + 1e-12
            for k in ks:
                assert chained_value(e[:k, :k], k) <= k - 1 + 1e-12
        for alpha, beta in tilted_params:
            for _ in range(200):
                a = RNG.choice([-1.0, 1.0], size=2)
                b = RNG.choice([-1.0, 1.0], size=2)
                value = tilted_value(np.outer(a, b), a[0], alpha, beta)
                assert value <= 2 * alpha + beta + 1e-12

    def test_quantum_points_respect_horodecki_and_tlm(self):
        for _ in range(10_000):
            rho = make_noisy_state(*RNG.uniform(0, 1, 2), RNG.uniform(0, math.pi))
            t = quantum.correlation_matrix(rho)
            thetas = RNG.uniform(0, math.pi, size=4)
            phis = RNG.uniform(0, 2 * math.pi, size=4)
            dirs = np.array([quantum.bloch_vector(th, ph) for th, ph in zip(thetas, phis)])
            e = dirs[:2] @ t @ dirs[2:].T
            assert chsh_value(e) <= quantum.horodecki_chsh_max(rho) + 1e-9
            assert abs(tlm_value(e)) <= math.pi + 1e-9

    def test_horodecki_cross_check_by_angle_search(self):
        # brute-force angle search must reproduce the closed form within 1e-6
        for gamma in (0.131, 0.4, math.pi / 4):
            rho = make_pure_state(gamma)
            t = quantum.correlation_matrix(rho)

            def neg_s(x):
                dirs = np.array([quantum.bloch_vector(x[2 * i], x[2 * i + 1]) for i in range(4)])
                e = dirs[:2] @ t @ dirs[2:].T
                return -chsh_value(e)

            best = 0.0
            rng = np.random.default_rng(7)
            for _ in range(20):
                res = sciopt.minimize(neg_s, rng.uniform(0, math.pi, 8), method="Nelder-Mead",
                                      options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
                best = max(best, -res.fun)
            assert best == pytest.approx(quantum.horodecki_chsh_max(rho), abs=1e-6)
