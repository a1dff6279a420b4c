"""1+1-D event layout of the friend experiment and its light-cone checks.

Units: seconds and light-seconds (c = 1). Events are bounded intervals at a
fixed position; "e2 in the future light-cone of e1" means every point of e2
is reachable from every point of e1.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from lfsim import tolerances

MANDATORY = ("x", "y", "c", "m", "a1", "a2", "b", "R", "q-return", "d-msg")
BOB_SIDE = ("y", "b")
CONDITIONS = ("i", "ii", "iii", "iv", "v", "vi")

CONDITION_TEXT = {
    "i": "c, m, b outside the future light-cone of x",
    "ii": "c, m, a1, a2 outside the future light-cone of y",
    "iii": "a1, a2 inside the future light-cone of x",
    "iv": "b inside the future light-cone of y",
    "v": "m inside the future light-cone of c",
    "vi": "reversal R and qubit return fit the 2T window",
}

# events each measurement branch actually uses
BRANCH_EVENTS = {
    "x=1": frozenset({"x", "y", "c", "m", "a1", "b"}),
    "x=2": frozenset({"x", "y", "c", "m", "a2", "b", "R", "q-return", "d-msg"}),
}


class InfeasibleScheduleError(ValueError):
    """No Bob separation can make the schedule valid."""


@dataclass(frozen=True)
class Event:
    label: str
    t: float
    pos: float
    duration: float = 0.0

    def __post_init__(self) -> None:
        if self.duration < 0:
            raise ValueError(f"event {self.label!r} has negative duration")

    @property
    def end(self) -> float:
        return self.t + self.duration


def in_future_lightcone(e1: Event, e2: Event, tol: float = tolerances.ARITH) -> bool:
    """Whole of e2 lies in the causal future of the whole of e1."""
    return e2.t - e1.end >= abs(e2.pos - e1.pos) - tol


def outside_future_lightcone(e1: Event, e2: Event, tol: float = tolerances.ARITH) -> bool:
    """No point of e2 can be reached from any point of e1."""
    return e2.end - e1.t < abs(e2.pos - e1.pos) - tol


@dataclass(frozen=True)
class Timings:
    """Split of T = tau + tau' + tau'' as fractions of T."""

    observe: float = 0.4  # tau: friend observes the qubit
    message: float = 0.4  # tau': friend writes and sends m
    gap: float = 0.2  # tau'': m sent until the reversal instruction lands
    choice_at: float = 0.5  # x sits this far into the tau'' gap
    a2_duration: float = 0.1  # Alice's final measurement, after the qubit returns

    def __post_init__(self) -> None:
        for name in ("observe", "message", "gap", "a2_duration"):
            if getattr(self, name) < 0:
                raise ValueError(f"timing {name} must be non-negative")
        if abs(self.observe + self.message + self.gap - 1.0) > tolerances.ARITH:
            raise ValueError("observe + message + gap must equal 1 (fractions of T)")
        if not 0.0 < self.choice_at < 1.0:
            raise ValueError("choice_at must lie strictly inside (0, 1)")


@dataclass(frozen=True)
class ProtocolSchedule:
    events: tuple[Event, ...]
    T: float
    bob_offset: float

    def __post_init__(self) -> None:
        if not self.T > 0:
            raise ValueError("segment duration T must be positive")
        labels = [e.label for e in self.events]
        if len(set(labels)) != len(labels):
            raise ValueError("event labels must be unique")
        object.__setattr__(self, "events", tuple(self.events))

    def __getitem__(self, label: str) -> Event:
        for e in self.events:
            if e.label == label:
                return e
        raise KeyError(label)

    def labels(self) -> set[str]:
        return {e.label for e in self.events}

    def missing(self) -> list[str]:
        have = self.labels()
        return [lab for lab in MANDATORY if lab not in have]

    def with_bob_offset(self, offset: float) -> "ProtocolSchedule":
        """Move Bob's events to ``offset`` from Alice's choice, keeping direction."""
        origin = self["x"].pos
        direction = -1.0 if self.bob_offset < 0 else 1.0
        events = tuple(
            replace(e, pos=origin + direction * offset) if e.label in BOB_SIDE else e
            for e in self.events
        )
        return ProtocolSchedule(events, self.T, direction * offset)

    def transformed(self, dt: float = 0.0, dx: float = 0.0, reflect: bool = False) -> "ProtocolSchedule":
        sign = -1.0 if reflect else 1.0
        events = tuple(replace(e, t=e.t + dt, pos=sign * e.pos + dx) for e in self.events)
        return ProtocolSchedule(events, self.T, sign * self.bob_offset)


def canonical_schedule(T: float = 1.0, bob_offset: float = 2.0, timings: Timings | None = None) -> ProtocolSchedule:
    """Alice and the friend at pos 0, Bob at ``bob_offset``; all times scale with T."""
    tm = timings or Timings()
    tau, tau1, tau2 = tm.observe * T, tm.message * T, tm.gap * T
    t_x = tau + tau1 + tm.choice_at * tau2
    events = (
        Event("c", 0.0, 0.0, tau),
        Event("m", tau, 0.0, tau1),
        Event("x", t_x, 0.0),
        Event("a1", t_x, 0.0),
        Event("R", T, 0.0, T),
        Event("d-msg", 2 * T, 0.0),
        Event("q-return", 2 * T, 0.0),
        Event("a2", 2 * T, 0.0, tm.a2_duration * T),
        Event("y", T, bob_offset),
        Event("b", T, bob_offset),
    )
    return ProtocolSchedule(events, T, bob_offset)


@dataclass(frozen=True)
class ValidationReport:
    conditions: dict[str, bool]
    failures: dict[str, list[str]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.conditions.values())

    def failed(self) -> list[str]:
        return [k for k in CONDITIONS if not self.conditions[k]]

    def text(self) -> str:
        lines = []
        for k in CONDITIONS:
            status = "pass" if self.conditions[k] else "FAIL"
            lines.append(f"({k}) {status}: {CONDITION_TEXT[k]}")
            for why in self.failures.get(k, []):
                lines.append(f"      {why}")
        lines.append("schedule valid" if self.passed else "schedule INVALID: " + ", ".join(self.failed()))
        return "\n".join(lines)


def _window_checks(s: ProtocolSchedule, tol: float) -> list[str]:
    c, m, x, R = s["c"], s["m"], s["x"], s["R"]
    q, d = s["q-return"], s["d-msg"]
    bad = []
    if R.t < m.end - tol:
        bad.append("R starts before m has been sent")
    if not in_future_lightcone(x, R, tol):
        bad.append("R is not in the future light-cone of x")
    if abs(R.duration - s.T) > tol * max(1.0, s.T):
        bad.append(f"R lasts {R.duration:g} s, not T = {s.T:g} s")
    if R.t - c.t > s.T + tol:
        bad.append("R starts more than T after the observation began")
    if q.t < R.end - tol:
        bad.append("qubit returned before the reversal finished")
    if q.end > c.t + 2 * s.T + tol:
        bad.append("qubit returned after the 2T isolation window")
    if abs(d.t - R.end) > tol * max(1.0, s.T):
        bad.append("d-msg does not arrive at the end of R")
    return bad


def _cone_pairs() -> dict[str, list[tuple[str, str, bool]]]:
    """(source, target, must_be_inside) per light-cone condition."""
    return {
        "i": [("x", e, False) for e in ("c", "m", "b")],
        "ii": [("y", e, False) for e in ("c", "m", "a1", "a2")],
        "iii": [("x", e, True) for e in ("a1", "a2")],
        "iv": [("y", "b", True)],
        "v": [("c", "m", True)],
    }


def validate_schedule(s: ProtocolSchedule, tol: float = tolerances.ARITH) -> ValidationReport:
    missing = s.missing()
    if missing:
        raise ValueError(f"schedule is missing mandatory events: {', '.join(missing)}")
    failures: dict[str, list[str]] = {}
    for cond, pairs in _cone_pairs().items():
        for src, dst, inside in pairs:
            ok = in_future_lightcone(s[src], s[dst], tol) if inside else outside_future_lightcone(s[src], s[dst], tol)
            if not ok:
                where = "outside" if inside else "inside"
                failures.setdefault(cond, []).append(f"{dst} is {where} the future light-cone of {src}")
    window = _window_checks(s, tol)
    if window:
        failures["vi"] = window
    return ValidationReport({k: k not in failures for k in CONDITIONS}, failures)


@dataclass(frozen=True)
class SeparationResult:
    """Infimum of valid Bob offsets (light-seconds); valid offsets are strictly larger."""

    overall: float
    branches: dict[str, float]
    binding: dict[str, str]  # branch -> the event pair that sets its bound


def _branch_bound(s: ProtocolSchedule, branch: str | None, tol: float) -> tuple[float, str]:
    allowed = BRANCH_EVENTS[branch] if branch else frozenset(MANDATORY)
    fixed = s.with_bob_offset(0.0)
    origin = fixed["x"].pos
    direction = -1.0 if s.bob_offset < 0 else 1.0
    bound, binding = 0.0, "none"
    problems = []
    for cond, pairs in _cone_pairs().items():
        for src, dst, inside in pairs:
            if src not in allowed or dst not in allowed:
                continue
            e1, e2 = fixed[src], fixed[dst]
            crosses = (src in BOB_SIDE) != (dst in BOB_SIDE)
            if not crosses:
                ok = in_future_lightcone(e1, e2, tol) if inside else outside_future_lightcone(e1, e2, tol)
                if not ok:
                    problems.append(f"({cond}) {src}->{dst}")
                continue
            if inside:
                # would need a small separation; none of the listed conditions do this
                raise InfeasibleScheduleError(f"condition ({cond}) needs {dst} inside the cone of {src} across labs")
            # separation |origin + dir*L - pos_alice| must exceed e2.end - e1.t
            alice = e1 if src not in BOB_SIDE else e2
            need = (e2.end - e1.t) + direction * (alice.pos - origin)
            if need > bound:
                bound, binding = need, f"{src}->{dst}"
    if branch is None or branch == "x=2":
        problems += [f"(vi) {w}" for w in _window_checks(fixed, tol)]
    if problems:
        raise InfeasibleScheduleError("separation-independent conditions fail: " + "; ".join(problems))
    return bound, binding


def min_bob_separation(
    T: float = 1.0, timings: Timings | None = None, schedule: ProtocolSchedule | None = None
) -> SeparationResult:
    """Smallest Bob offset (as an infimum) for which every condition holds.

    Reported for each measurement branch and for the full schedule.
    """
    if not T > 0:
        raise ValueError("segment duration T must be positive")
    s = schedule if schedule is not None else canonical_schedule(T, 1.0, timings)
    branches, binding = {}, {}
    for br in BRANCH_EVENTS:
        branches[br], binding[br] = _branch_bound(s, br, tolerances.ARITH)
    overall, binding["overall"] = _branch_bound(s, None, tolerances.ARITH)
    return SeparationResult(overall, branches, binding)


__all__ = [
    "CONDITIONS",
    "Event",
    "InfeasibleScheduleError",
    "MANDATORY",
    "ProtocolSchedule",
    "SeparationResult",
    "Timings",
    "ValidationReport",
    "canonical_schedule",
    "in_future_lightcone",
    "min_bob_separation",
    "outside_future_lightcone",
    "validate_schedule",
]
