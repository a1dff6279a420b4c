import numpy as np
import pytest

from lfsim.behavior import (
    Behavior,
    chsh_signs,
    chsh_value,
    chsh_values,
    max_chsh,
    pr_box,
)


def test_shape_and_finite_checks():
    with pytest.raises(ValueError):
        Behavior(np.zeros((2, 2, 2)))
    p = np.full((2, 2, 2, 2), 0.25)
    p[0, 0, 0, 0] = np.nan
    with pytest.raises(ValueError):
        Behavior(p)


def test_table_is_read_only():
    bh = Behavior(np.full((2, 2, 2, 2), 0.25))
    with pytest.raises(ValueError):
        bh.p[0, 0, 0, 0] = 1.0


def test_rows_roundtrip():
    rng = np.random.default_rng(0)
    p = rng.random((2, 2, 2, 2))
    p /= p.sum(axis=(0, 1))
    bh = Behavior(p)
    assert Behavior.from_rows(bh.rows()).allclose(bh, 0.0)


def test_from_rows_rejects_wrong_count_and_duplicates():
    rows = Behavior(np.full((2, 2, 2, 2), 0.25)).rows()
    with pytest.raises(ValueError, match="16"):
        Behavior.from_rows(rows[:15])
    with pytest.raises(ValueError, match="duplicate"):
        Behavior.from_rows(rows[:15] + rows[:1])
    with pytest.raises(ValueError):
        Behavior.from_rows([(3, 1, 1, 1, 0.25)] + rows[1:])


def test_prob_lookup_uses_signed_outcomes():
    bh = Behavior.deterministic((1, -1), (-1, 1))
    assert bh.prob(1, -1, 1, 1) == 1.0
    assert bh.prob(-1, 1, 2, 2) == 1.0
    assert bh.prob(1, 1, 1, 1) == 0.0


def test_chsh_sign_patterns():
    # every variant has exactly one (or three) negative terms
    for v in range(1, 9):
        s = chsh_signs(v)
        assert np.sum(s < 0) in (1, 3)
        assert np.array_equal(chsh_signs(v + 4 if v <= 4 else v - 4), -s)
    assert np.array_equal(chsh_signs(4), [[1, 1], [1, -1]])
    with pytest.raises(ValueError):
        chsh_signs(9)


def test_pr_box_saturates_its_variant():
    for v in range(1, 9):
        box = pr_box(v)
        assert chsh_value(box, v) == pytest.approx(4.0)
        assert box.is_normalized()


def test_deterministic_behaviors_reach_two():
    for a1 in (1, -1):
        for b2 in (1, -1):
            bh = Behavior.deterministic((a1, 1), (1, b2))
            assert max_chsh(bh)[1] == pytest.approx(2.0)


def test_chsh_requires_normalised_input():
    with pytest.raises(ValueError):
        chsh_value(Behavior(np.full((2, 2, 2, 2), 0.3)))


def test_from_correlators_marginals():
    bh = Behavior.from_correlators(np.zeros((2, 2)), alice=[0.2, -0.4], bob=[0.6, 0.0])
    assert bh.alice_marginal(1, 2) == pytest.approx([0.6, 0.4])
    assert bh.alice_marginal(2, 1) == pytest.approx([0.3, 0.7])
    assert bh.bob_marginal(1, 1) == pytest.approx([0.8, 0.2])


def test_chsh_values_sum_to_zero_over_sign_pairs():
    bh = pr_box(2).mix(Behavior.deterministic((1, 1), (1, -1)), 0.3)
    vals = chsh_values(bh)
    for v in range(1, 5):
        assert vals[v] == pytest.approx(-vals[v + 4])
