from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfsim import ewfs, qsim
from lfsim.behavior import chsh_value, max_chsh
from lfsim.ewfs import ScenarioConfig

TSIRELSON = 2 * np.sqrt(2)


def test_default_reaches_tsirelson_bound():
    bh = ewfs.behavior(ScenarioConfig())
    assert chsh_value(bh, 4) == pytest.approx(TSIRELSON, abs=1e-12)
    assert max_chsh(bh) == (4, pytest.approx(TSIRELSON, abs=1e-12))


def test_x1_branch_copies_friend_outcome():
    # a = c: Alice's x=1 outcome is perfectly correlated with a Z measurement on QB for |Phi+>
    config = replace(ScenarioConfig(), bob_angles=(0.0, np.pi / 2))
    bh = ewfs.behavior(config)
    assert bh.correlator(1, 1) == pytest.approx(1.0, abs=1e-12)
    assert bh.correlator(1, 2) == pytest.approx(0.0, abs=1e-12)


def test_run_branch_matches_full_behavior():
    config = ScenarioConfig(n_friend=2, scramble_seed=11)
    bh = ewfs.behavior(config)
    for x in (1, 2):
        for y in (1, 2):
            assert np.allclose(ewfs.run_branch(config, x, y), bh.setting_table(x, y), atol=1e-12)
    with pytest.raises(ValueError):
        ewfs.run_branch(config, 3, 1)


def test_correlators_match_analytic_formula():
    # |Phi+>: E(x-angle, y-angle) = cos(alpha - beta)
    config = ScenarioConfig(alice_x2_angle=0.7, bob_angles=(0.3, -1.1))
    E = ewfs.behavior(config).correlators()
    alphas = (0.0, 0.7)
    for i, a in enumerate(alphas):
        for j, b in enumerate(config.bob_angles):
            assert E[i, j] == pytest.approx(np.cos(a - b), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10**6), st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi))
def test_reversal_reproduces_direct_measurement(n_friend, seed, alpha, beta):
    config = ScenarioConfig(n_friend=n_friend, scramble_seed=seed, alice_x2_angle=alpha, bob_angles=(beta, 0.4))
    bh = ewfs.behavior(config)
    direct = ewfs.direct_behavior(config)
    assert np.max(np.abs(bh.p[..., 1, :] - direct.p[..., 1, :])) <= 1e-10
    assert ewfs.restoration_fidelity(config) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_reversal_with_random_initial_state(seed):
    rng = np.random.default_rng(seed)
    config = ScenarioConfig(initial_state=qsim.random_state(("QA", "QB"), rng), n_friend=3, scramble_seed=seed)
    assert ewfs.behavior(config).allclose(ewfs.direct_behavior(config), 1e-10)


def test_behavior_is_no_signalling():
    from lfsim.lfpoly import no_signaling_check

    for seed in range(5):
        config = ScenarioConfig(n_friend=2, scramble_seed=seed, noise_p=0.1, noise_point="friend")
        assert no_signaling_check(ewfs.behavior(config))


def test_initial_noise_scales_chsh():
    for p in (0.0, 0.1, 0.2, 0.5):
        bh = ewfs.behavior(ScenarioConfig(noise_p=p))
        assert chsh_value(bh) == pytest.approx(TSIRELSON * (1 - p), abs=1e-12)


def test_friend_noise_only_touches_x2():
    clean = ewfs.behavior(ScenarioConfig())
    noisy = ewfs.behavior(ScenarioConfig(noise_p=0.3, noise_point="friend"))
    assert np.allclose(noisy.p[..., 0, :], clean.p[..., 0, :], atol=1e-12)
    assert not np.allclose(noisy.p[..., 1, :], clean.p[..., 1, :], atol=1e-3)


def test_noise_threshold_is_one_minus_inverse_root_two():
    p_star = ewfs.noise_threshold(ScenarioConfig())
    assert p_star == pytest.approx(1 - 1 / np.sqrt(2), abs=1e-9)


def test_noise_sweep_rows():
    rows = ewfs.noise_sweep(ScenarioConfig(), np.linspace(0, 0.4, 9))
    assert len(rows) == 9
    assert all(not r.lf_feasible for r in rows if r.p_dep <= 0.2 + 1e-12)
    assert all(r.lf_feasible for r in rows if r.p_dep >= 0.3)
    chsh = [r.chsh for r in rows]
    assert all(a > b for a, b in zip(chsh, chsh[1:]))


def test_config_validation():
    with pytest.raises(ValueError):
        ScenarioConfig(n_friend=0)
    with pytest.raises(ValueError):
        ScenarioConfig(noise_p=1.5)
    with pytest.raises(ValueError):
        ScenarioConfig(noise_point="nowhere")
    with pytest.raises(ValueError):
        ScenarioConfig(initial_state=qsim.bell_state(("A", "B")))


def test_friend_unitary_is_cached_and_seeded():
    a = ewfs.build_friend_unitary(ScenarioConfig(n_friend=3, scramble_seed=4)).matrix
    b = ewfs.build_friend_unitary(ScenarioConfig(n_friend=3, scramble_seed=4)).matrix
    c = ewfs.build_friend_unitary(ScenarioConfig(n_friend=3, scramble_seed=5)).matrix
    assert np.array_equal(a, b)
    assert not np.allclose(a, c)


def test_friend_observation_copies_value_into_message():
    # |1> on QA must produce m = 1 whatever the scramble
    config = ScenarioConfig(initial_state=ewfs.product_state(np.pi, 0.0), n_friend=2, scramble_seed=9)
    observed = ewfs._after_observation(config)
    probs = qsim.outcome_probabilities(observed, qsim.UnitaryOp(qsim.I2, ("m",)))
    assert probs[1] == pytest.approx(1.0, abs=1e-12)


# ------------------------------------------------------------------ Monte Carlo


def test_monte_carlo_is_reproducible():
    config = ScenarioConfig()
    a = ewfs.monte_carlo(config, 200_000, seed=42)
    b = ewfs.monte_carlo(config, 200_000, seed=42)
    c = ewfs.monte_carlo(config, 200_000, seed=43)
    assert np.array_equal(a.counts, b.counts)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.a, b.a)
    assert not np.array_equal(a.counts, c.counts)


def test_monte_carlo_prefix_is_stable():
    # blocks have independent substreams, so a longer run extends a shorter one
    config = ScenarioConfig()
    short = ewfs.monte_carlo(config, ewfs.MC_BLOCK, seed=1)
    long = ewfs.monte_carlo(config, 3 * ewfs.MC_BLOCK, seed=1)
    n = short.n_kept
    assert np.array_equal(short.a, long.a[:n]) and np.array_equal(short.y, long.y[:n])


def test_monte_carlo_close_to_exact():
    config = ScenarioConfig()
    res = ewfs.monte_carlo(config, 400_000, seed=3)
    s, se = res.chsh(4)
    assert abs(s - TSIRELSON) < 5 * se
    exact = ewfs.behavior(config).p
    assert np.all(np.abs(res.behavior.p - exact) < 6 * res.standard_errors + 1e-12)


def test_pullout_discards_trials():
    config = ScenarioConfig(pullout_fraction=0.25)
    res = ewfs.monte_carlo(config, 100_000, seed=0)
    assert res.n_kept == pytest.approx(75_000, rel=0.02)
    assert len(list(res.records())) == res.n_kept


def test_monte_carlo_rejects_empty_run():
    with pytest.raises(ValueError):
        ewfs.monte_carlo(ScenarioConfig(), 0, seed=0)


# ------------------------------------------------------------------ flag register


def test_independent_flag_keeps_violation():
    res = ewfs.deutsch_flag_demo(ScenarioConfig(), "independent")
    assert res.p_flag_knew == pytest.approx(1.0, abs=1e-12)
    assert res.restoration_fidelity == pytest.approx(1.0, abs=1e-10)
    assert res.chsh == pytest.approx(TSIRELSON, abs=1e-9)
    assert res.optimal_chsh == pytest.approx(TSIRELSON, abs=1e-9)


def test_value_dependent_flag_kills_violation():
    res = ewfs.deutsch_flag_demo(ScenarioConfig(), "value-dependent")
    assert res.chsh <= 2 + 1e-9
    assert res.optimal_chsh == pytest.approx(2.0, abs=1e-9)
    assert res.restoration_fidelity == pytest.approx(0.5, abs=1e-10)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6), st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi))
def test_value_dependent_flag_never_violates(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    config = ScenarioConfig(
        initial_state=qsim.random_state(("QA", "QB"), rng), n_friend=2, scramble_seed=seed,
        alice_x2_angle=alpha, bob_angles=(beta, -beta),
    )
    res = ewfs.deutsch_flag_demo(config, "value-dependent")
    assert res.chsh <= 2 + 1e-9
    assert res.optimal_chsh <= 2 + 1e-7


def test_optimal_chsh_matches_configured_optimum():
    assert ewfs.optimal_chsh(ScenarioConfig()) == pytest.approx(TSIRELSON, abs=1e-9)
    product = ScenarioConfig(initial_state=ewfs.product_state(0.3, 1.2))
    assert ewfs.optimal_chsh(product) <= 2 + 1e-9


def test_flag_mode_validation():
    with pytest.raises(ValueError):
        ewfs.deutsch_flag_demo(ScenarioConfig(), "sometimes")
