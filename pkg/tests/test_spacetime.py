import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lfsim.spacetime import (
    CONDITIONS,
    Event,
    InfeasibleScheduleError,
    ProtocolSchedule,
    Timings,
    canonical_schedule,
    in_future_lightcone,
    min_bob_separation,
    outside_future_lightcone,
    validate_schedule,
)

coords = st.floats(-50, 50, allow_nan=False)
durations = st.floats(0, 5, allow_nan=False)
events = st.builds(Event, st.just("e"), coords, coords, durations)


def _move(s: ProtocolSchedule, label: str, **kw) -> ProtocolSchedule:
    from dataclasses import replace

    return ProtocolSchedule(tuple(replace(e, **kw) if e.label == label else e for e in s.events), s.T, s.bob_offset)


def test_lightcone_examples():
    origin = Event("o", 0.0, 0.0)
    assert in_future_lightcone(origin, Event("p", 1.0, 1.0))  # on the cone
    assert in_future_lightcone(origin, Event("p", 2.0, -1.0))
    assert not in_future_lightcone(origin, Event("p", 1.0, 2.0))
    assert outside_future_lightcone(origin, Event("p", 1.0, 2.0))
    assert not outside_future_lightcone(origin, Event("p", 1.0, 1.0))
    assert outside_future_lightcone(origin, Event("p", -1.0, 0.0))
    # an extended source pushes its cone later
    long = Event("o", 0.0, 0.0, 1.0)
    assert not in_future_lightcone(long, Event("p", 1.5, 1.0))


def test_canonical_schedule_passes():
    rep = validate_schedule(canonical_schedule())
    assert rep.passed
    assert rep.failed() == []
    assert "schedule valid" in rep.text()


def test_zero_offset_fails_spacelike_conditions():
    rep = validate_schedule(canonical_schedule(bob_offset=0.0))
    assert not rep.passed
    assert "i" in rep.failed() and "ii" in rep.failed()


def test_y_moved_into_x_cone_fails_i():
    # y waits until after x's signal reaches Bob, so b lands inside x's cone
    s = canonical_schedule()
    late = s["x"].t + s.bob_offset + 0.5
    s = _move(_move(s, "y", t=late), "b", t=late)
    assert "i" in validate_schedule(s).failed()


def test_alice_moved_into_y_cone_fails_ii():
    s = canonical_schedule()
    late = s["y"].t + s.bob_offset + 0.2
    s = _move(s, "a1", t=late)
    rep = validate_schedule(s)
    assert rep.failed() == ["ii"]
    assert any("a1" in why for why in rep.failures["ii"])


def test_window_violation_is_condition_vi():
    s = _move(canonical_schedule(), "R", duration=0.5)
    assert "vi" in validate_schedule(s).failed()


def test_missing_events_raise():
    s = canonical_schedule()
    short = ProtocolSchedule(tuple(e for e in s.events if e.label != "d-msg"), s.T, s.bob_offset)
    assert short.missing() == ["d-msg"]
    with pytest.raises(ValueError, match="d-msg"):
        validate_schedule(short)


def test_schedule_construction_checks():
    with pytest.raises(ValueError):
        ProtocolSchedule((), 0.0, 1.0)
    with pytest.raises(ValueError):
        ProtocolSchedule((Event("x", 0, 0), Event("x", 1, 0)), 1.0, 1.0)
    with pytest.raises(ValueError):
        Event("x", 0, 0, -1)
    with pytest.raises(ValueError):
        Timings(observe=0.5, message=0.5, gap=0.5)


def _bisect_min_offset(T: float = 1.0) -> float:
    # independent route: search the boundary of validate_schedule directly
    lo, hi = 0.0, 100.0 * T
    assert validate_schedule(canonical_schedule(T, hi)).passed
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if validate_schedule(canonical_schedule(T, mid)).passed:
            hi = mid
        else:
            lo = mid
    return hi


def test_min_separation_matches_bisection():
    res = min_bob_separation()
    assert res.overall == pytest.approx(1.1, abs=1e-12)
    assert res.branches["x=1"] == pytest.approx(0.1, abs=1e-12)
    assert res.branches["x=2"] == pytest.approx(1.1, abs=1e-12)
    assert res.overall == pytest.approx(_bisect_min_offset(), abs=1e-9)


def test_min_separation_is_an_infimum():
    L = min_bob_separation().overall
    assert not validate_schedule(canonical_schedule(1.0, L)).passed
    assert validate_schedule(canonical_schedule(1.0, L + 1e-9)).passed


@pytest.mark.parametrize("T", [1e-6, 0.5, 1.0, 7.0, 1e4])
def test_min_separation_scales_with_T(T):
    assert min_bob_separation(T).overall == pytest.approx(1.1 * T, rel=1e-12)


def test_min_separation_with_other_timings():
    tm = Timings(observe=0.3, message=0.3, gap=0.4, choice_at=0.25, a2_duration=0.2)
    res = min_bob_separation(2.0, tm)
    assert res.overall == pytest.approx(_bisect_min_offset_for(2.0, tm), abs=1e-9)


def _bisect_min_offset_for(T: float, tm: Timings) -> float:
    lo, hi = 0.0, 100.0 * T
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if validate_schedule(canonical_schedule(T, mid, tm)).passed:
            hi = mid
        else:
            lo = mid
    return hi


def test_negative_direction_is_symmetric():
    s = canonical_schedule(bob_offset=-2.0)
    assert validate_schedule(s).passed
    assert min_bob_separation(schedule=s).overall == pytest.approx(1.1)


def test_infeasible_timing_raises():
    s = _move(canonical_schedule(), "m", t=-0.5)  # m before c, breaks (v)
    with pytest.raises(InfeasibleScheduleError):
        min_bob_separation(schedule=s)
    with pytest.raises(ValueError):
        min_bob_separation(T=0.0)


@settings(max_examples=80, deadline=None)
@given(st.floats(0, 10), coords, coords, st.booleans())
def test_validation_invariant_under_translation_and_reflection(offset, dt, dx, reflect):
    s = canonical_schedule(1.0, offset)
    base = validate_schedule(s).conditions
    moved = validate_schedule(s.transformed(dt, dx, reflect), tol=1e-9).conditions
    # away from the boundary the verdicts agree exactly
    if abs(offset - 1.1) > 1e-6 and abs(offset - 0.1) > 1e-6:
        assert moved == base


@settings(max_examples=200, deadline=None)
@given(events, events)
def test_inside_and_outside_are_exclusive(e1, e2):
    assert not (in_future_lightcone(e1, e2, 0.0) and outside_future_lightcone(e1, e2, 0.0))


@settings(max_examples=200, deadline=None)
@given(events, events, events)
def test_future_cone_is_transitive(e1, e2, e3):
    if in_future_lightcone(e1, e2, 0.0) and in_future_lightcone(e2, e3, 0.0):
        assert in_future_lightcone(e1, e3, 1e-9)


@settings(max_examples=200, deadline=None)
@given(events, events)
def test_future_cone_is_antisymmetric(e1, e2):
    if in_future_lightcone(e1, e2, 0.0) and in_future_lightcone(e2, e1, 0.0):
        assert e1.t == e2.t == e1.end == e2.end and e1.pos == e2.pos


def test_report_covers_every_condition():
    rep = validate_schedule(canonical_schedule(bob_offset=0.5))
    assert set(rep.conditions) == set(CONDITIONS)
    assert "INVALID" in rep.text()
