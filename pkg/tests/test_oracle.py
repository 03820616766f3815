"""Tests of the knob-in/statistics-out oracle, exact and noisy."""

import math

import numpy as np
import pytest

from bellbox import quantum
from bellbox.inequalities import chsh_value
from bellbox.oracle import (
    BlackBoxOracle,
    OracleConfig,
    apply_response,
    default_knob_box,
    knobs_to_directions,
    measured_pairs,
)
from bellbox.quantum import TSIRELSON, make_pure_state

RNG = np.random.default_rng(99)

SINGLET_CLASS = make_pure_state(math.pi / 4)

# planar angles whose exact correlators are (r, r, r, -r) with r = 1/sqrt(2)
OPTIMAL_CHSH_KNOBS = np.array([
    3 * math.pi / 8, 0.0, 7 * math.pi / 8, 0.0,   # Alice: (theta, phi) x 2
    3 * math.pi / 8, 0.0, 7 * math.pi / 8, 0.0,   # Bob
])


class TestResponses:
    def test_values_at_zero(self):
        assert apply_response(0.0, "logi") == pytest.approx(math.pi / 2)
        assert apply_response(0.0, "osc") == pytest.approx(0.0)
        assert apply_response(0.0, "sinh") == pytest.approx(0.0)
        assert apply_response(1.234, "identity") == pytest.approx(1.234)

    def test_osc_formula(self):
        x = 0.2
        assert apply_response(x, "osc") == pytest.approx(5 * math.exp(-x) * math.sin(200 * x))

    def test_logi_is_bounded_in_zero_pi(self):
        values = [apply_response(x, "logi") for x in np.linspace(-20, 20, 101)]
        assert all(0 < v < math.pi for v in values)


class TestKnobMapping:
    def test_chsh_full_mode_dimensions(self):
        cfg = OracleConfig(state=SINGLET_CLASS)
        assert cfg.knob_dim == 8
        dirs_a, dirs_b = knobs_to_directions(np.zeros(8), cfg)
        assert dirs_a.shape == (2, 2) and dirs_b.shape == (2, 2)

    def test_chained_dimensions_scale_as_4k(self):
        for k in (3, 5, 8):
            cfg = OracleConfig(state=SINGLET_CLASS, settings_per_party=k)
            assert cfg.knob_dim == 4 * k
            dirs_a, dirs_b = knobs_to_directions(np.zeros(4 * k), cfg)
            assert dirs_a.shape == (k, 2) and dirs_b.shape == (k, 2)

    def test_theta_only_mode_halves_the_knobs(self):
        cfg = OracleConfig(state=SINGLET_CLASS, theta_only=True)
        assert cfg.knob_dim == 4
        dirs_a, dirs_b = knobs_to_directions(np.array([0.3, 1.0, 2.0, 0.5]), cfg)
        assert np.all(dirs_a[:, 1] == 0.0) and np.all(dirs_b[:, 1] == 0.0)

    def test_zero_knobs_identity_gives_poles(self):
        cfg = OracleConfig(state=SINGLET_CLASS)
        dirs_a, dirs_b = knobs_to_directions(np.zeros(8), cfg)
        assert np.all(dirs_a == 0.0) and np.all(dirs_b == 0.0)

    def test_angle_reduction(self):
        cfg = OracleConfig(state=SINGLET_CLASS)
        knobs = np.array([math.pi + 0.25, 2 * math.pi + 0.5, -0.25, -0.5, 0, 0, 0, 0])
        dirs_a, _ = knobs_to_directions(knobs, cfg)
        assert dirs_a[0, 0] == pytest.approx(0.25)          # theta mod pi
        assert dirs_a[0, 1] == pytest.approx(0.5)           # phi mod 2 pi
        assert dirs_a[1, 0] == pytest.approx(math.pi - 0.25)
        assert dirs_a[1, 1] == pytest.approx(2 * math.pi - 0.5)

    def test_length_mismatch_rejected(self):
        cfg = OracleConfig(state=SINGLET_CLASS)
        with pytest.raises(ValueError):
            knobs_to_directions(np.zeros(6), cfg)

    def test_default_boxes(self):
        box = default_knob_box("identity", 2)
        assert box.shape == (8, 2)
        np.testing.assert_allclose(box[0::2], [[0, math.pi]] * 4)
        np.testing.assert_allclose(box[1::2], [[0, 2 * math.pi]] * 4)
        assert default_knob_box("osc", 2).shape == (8, 2)
        assert default_knob_box("identity", 3, theta_only=True).shape == (6, 2)


class TestExactEvaluation:
    def test_optimal_knobs_reach_tsirelson(self):
        oracle = BlackBoxOracle(OracleConfig(state=SINGLET_CLASS))
        table = oracle.evaluate(OPTIMAL_CHSH_KNOBS)
        r = 1 / math.sqrt(2)
        np.testing.assert_allclose(table.correlators, [[r, r], [r, -r]], atol=1e-12)
        assert chsh_value(table.correlators) == pytest.approx(TSIRELSON, abs=1e-12)

    def test_maximally_mixed_gives_zero_correlators(self):
        oracle = BlackBoxOracle(OracleConfig(state=np.eye(4) / 4))
        table = oracle.evaluate(RNG.uniform(0, math.pi, 8))
        np.testing.assert_allclose(table.correlators, 0.0, atol=1e-12)

    def test_deterministic(self):
        oracle = BlackBoxOracle(OracleConfig(state=SINGLET_CLASS))
        knobs = RNG.uniform(0, math.pi, 8)
        t1 = oracle.evaluate(knobs)
        t2 = oracle.evaluate(knobs)
        np.testing.assert_array_equal(t1.correlators, t2.correlators)

    def test_matches_correlator_function(self):
        oracle = BlackBoxOracle(OracleConfig(state=SINGLET_CLASS))
        knobs = RNG.uniform(0, math.pi, 8)
        table = oracle.evaluate(knobs)
        dirs_a, dirs_b = knobs_to_directions(knobs, oracle.cfg)
        for x in range(2):
            for y in range(2):
                expected = quantum.correlator(SINGLET_CLASS, tuple(dirs_a[x]), tuple(dirs_b[y]))
                assert table.correlators[x, y] == pytest.approx(expected, abs=1e-12)

    def test_marginals_match_state(self):
        rho = make_pure_state(0.3)
        oracle = BlackBoxOracle(OracleConfig(state=rho))
        table = oracle.evaluate(np.zeros(8))
        # reduced state of Alice has Bloch z component cos(2 gamma)
        assert table.marginals_a[0] == pytest.approx(math.cos(0.6), abs=1e-12)
        assert table.marginals_b[0] == pytest.approx(-math.cos(0.6), abs=1e-12)


def _poisson_oracle(events, seed=0, sigma=None, state=None, measure="all", k=2):
    noise = "poisson" if sigma is None else "poisson_gaussian"
    cfg = OracleConfig(
        state=SINGLET_CLASS if state is None else state,
        settings_per_party=k,
        noise=noise,
        events=events,
        sigma=sigma or 0.0,
        rng_seed=seed,
        measure=measure,
    )
    return BlackBoxOracle(cfg)


class TestNoisyEvaluation:
    def test_seeded_reproducibility_across_instances(self):
        knobs = [RNG.uniform(0, math.pi, 8) for _ in range(5)]
        t1 = [_poisson_oracle(1e4, seed=7).evaluate(k_) for k_ in knobs]
        t2 = [_poisson_oracle(1e4, seed=7).evaluate(k_) for k_ in knobs]
        for a, b in zip(t1, t2):
            np.testing.assert_array_equal(a.correlators, b.correlators)
            np.testing.assert_array_equal(a.counts, b.counts)

    def test_different_seeds_differ(self):
        knobs = RNG.uniform(0, math.pi, 8)
        a = _poisson_oracle(1e4, seed=1).evaluate(knobs)
        b = _poisson_oracle(1e4, seed=2).evaluate(knobs)
        assert not np.array_equal(a.correlators, b.correlators)

    def test_counts_reproduce_correlators(self):
        oracle = _poisson_oracle(1e3, seed=3)
        table = oracle.evaluate(RNG.uniform(0, math.pi, 8))
        for i, (x, y) in enumerate(table.pairs):
            n = table.counts[i].astype(float)
            total = n.sum()
            expected = (n[0] - n[1] - n[2] + n[3]) / total if total else 0.0
            assert table.correlators[x, y] == pytest.approx(expected, abs=1e-12)

    def test_deterministic_outcome_concentrates_counts(self):
        # |01> measured in z on both sides: outcome (+1, -1) with certainty
        rho = make_pure_state(0.0)
        oracle = _poisson_oracle(500, seed=4, state=rho)
        table = oracle.evaluate(np.zeros(8))
        assert table.correlators[0, 0] == -1.0

    def test_three_sigma_concentration_at_1e5(self):
        # |E_noisy - E_exact| <= 3/sqrt(N) for ~99.7% of draws (binomial std-error)
        exact_oracle = BlackBoxOracle(OracleConfig(state=SINGLET_CLASS))
        knobs = OPTIMAL_CHSH_KNOBS
        e_exact = exact_oracle.evaluate(knobs).correlators
        oracle = _poisson_oracle(1e5, seed=5)
        n_draws = 10_000
        hits = 0
        for _ in range(n_draws):
            e = oracle.evaluate(knobs).correlators
            if abs(e[0, 0] - e_exact[0, 0]) <= 3 / math.sqrt(1e5):
                hits += 1
        assert hits / n_draws >= 0.995

    def test_mean_matches_exact_within_five_standard_errors(self):
        exact_oracle = BlackBoxOracle(OracleConfig(state=SINGLET_CLASS))
        n_draws = 10_000
        events = 1e4
        for trial in range(20):
            knobs = RNG.uniform(-math.pi, math.pi, 8)
            e_exact = exact_oracle.evaluate(knobs).correlators
            oracle = _poisson_oracle(events, seed=100 + trial)
            draws = np.stack([oracle.evaluate(knobs).correlators for _ in range(n_draws)])
            mean = draws.mean(axis=0)
            # standard error of the mean of one correlator estimate
            se = np.sqrt(np.clip(1 - e_exact**2, 1e-3, None) / events / n_draws)
            assert np.all(np.abs(mean - e_exact) <= 5 * se)

    def test_correlators_always_clamped(self):
        oracle = _poisson_oracle(50, seed=6, sigma=0.3)
        for _ in range(500):
            table = oracle.evaluate(RNG.uniform(0, math.pi, 8))
            assert np.all(table.correlators >= -1.0) and np.all(table.correlators <= 1.0)
            assert np.all(table.marginals_a >= -1.0) and np.all(table.marginals_a <= 1.0)

    def test_gaussian_mode_drops_counts(self):
        table = _poisson_oracle(1e3, seed=8, sigma=0.05).evaluate(np.zeros(8))
        assert table.counts is None

    def test_chained_measure_skips_unused_pairs(self):
        cfg = OracleConfig(state=SINGLET_CLASS, settings_per_party=4, measure="chained")
        assert len(measured_pairs(cfg)) == 8
        oracle = BlackBoxOracle(cfg)
        table = oracle.evaluate(RNG.uniform(0, math.pi, 16))
        measured = set(table.pairs)
        for x in range(4):
            for y in range(4):
                if (x, y) not in measured:
                    assert table.correlators[x, y] == 0.0

    def test_low_event_zero_total_rule(self):
        # with sub-unit mean events some pairs draw zero counts and report E = 0
        oracle = _poisson_oracle(1.0, seed=9)
        saw_zero = False
        for _ in range(200):
            table = oracle.evaluate(RNG.uniform(0, math.pi, 8))
            totals = table.counts.sum(axis=1)
            for i, (x, y) in enumerate(table.pairs):
                if totals[i] == 0:
                    saw_zero = True
                    assert table.correlators[x, y] == 0.0
        assert saw_zero

    def test_config_validation(self):
        with pytest.raises(ValueError):
            OracleConfig(state=SINGLET_CLASS, noise="poisson")  # missing events
        with pytest.raises(ValueError):
            OracleConfig(state=SINGLET_CLASS, noise="poisson", events=0.5)
        with pytest.raises(ValueError):
            OracleConfig(state=SINGLET_CLASS, response="cubic")
        with pytest.raises(ValueError):
            OracleConfig(state=np.eye(4))  # trace 4
