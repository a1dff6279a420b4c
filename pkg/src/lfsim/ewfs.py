"""Minimal one-friend extended Wigner's friend protocol.

Register layout: ``QA`` (the friend's input qubit), ``F1..Fn`` (the friend),
``m`` (the message), optionally ``flag``, and ``QB`` (Bob's qubit).

The friend's observation is a controlled fan-out from ``QA`` onto every friend
qubit and the message, followed by a fixed value-independent "thinking"
unitary on the friend register. Setting ``x=1`` reads the message; ``x=2``
runs the inverse observation and measures ``QA`` directly.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy import optimize

from lfsim import qsim
from lfsim.behavior import (  # noqa: F401  (re-exported)
    Behavior,
    OUTCOMES,
    SETTINGS,
    chsh_value,
    chsh_values,
    max_chsh,
    setting_index,
)
from lfsim.qsim import QuantumState, UnitaryOp

QA, QB, MSG, FLAG = "QA", "QB", "m", "flag"
NOISE_POINTS = ("initial", "friend")
FLAG_MODES = ("independent", "value-dependent")


def friend_labels(n_friend: int) -> tuple[str, ...]:
    return tuple(f"F{i + 1}" for i in range(n_friend))


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything that fixes the exact behavior of one protocol instance.

    Angles are Bloch angles in the x-z plane: angle t measures
    cos(t) Z + sin(t) X. Alice's ``x=1`` is always the friend's Z basis.
    ``noise_p`` is a depolarizing strength applied at ``noise_point``:
    two-qubit depolarizing on (QA, QB) before the observation (``"initial"``),
    or single-qubit depolarizing on every friend qubit between the observation
    and its reversal (``"friend"``, affects ``x=2`` only).
    """

    initial_state: QuantumState = field(default_factory=lambda: qsim.bell_state((QA, QB)))
    n_friend: int = 1
    scramble_seed: int | None = None
    alice_x2_angle: float = np.pi / 2
    bob_angles: tuple[float, float] = (np.pi / 4, -np.pi / 4)
    noise_p: float = 0.0
    noise_point: str = "initial"
    pullout_fraction: float = 0.0

    def __post_init__(self) -> None:
        if sorted(self.initial_state.labels) != [QA, QB]:
            raise ValueError(f"initial state must live on ({QA}, {QB}), got {self.initial_state.labels}")
        object.__setattr__(self, "initial_state", self.initial_state.reorder((QA, QB)))
        if self.n_friend < 1:
            raise ValueError("the friend register needs at least one qubit")
        if self.n_friend > qsim.MAX_QUBITS - 4:
            raise ValueError(f"n_friend={self.n_friend} exceeds the dense register cap")
        if len(self.bob_angles) != 2:
            raise ValueError("bob_angles needs one angle per setting y=1,2")
        object.__setattr__(self, "bob_angles", tuple(float(b) for b in self.bob_angles))
        if not 0.0 <= self.noise_p <= 1.0:
            raise ValueError(f"noise_p must lie in [0, 1], got {self.noise_p}")
        if self.noise_point not in NOISE_POINTS:
            raise ValueError(f"noise_point must be one of {NOISE_POINTS}")
        if not 0.0 <= self.pullout_fraction < 1.0:
            raise ValueError("pullout_fraction must lie in [0, 1)")

    @property
    def friend(self) -> tuple[str, ...]:
        return friend_labels(self.n_friend)

    @property
    def lab(self) -> tuple[str, ...]:
        """Everything the friend unitary touches: (QA, F1..Fn, m)."""
        return (QA,) + self.friend + (MSG,)


def product_state(theta_a: float = 0.0, theta_b: float = 0.0) -> QuantumState:
    """cos/sin product state with Bloch angles in the x-z plane."""
    a = np.array([np.cos(theta_a / 2), np.sin(theta_a / 2)], dtype=complex)
    b = np.array([np.cos(theta_b / 2), np.sin(theta_b / 2)], dtype=complex)
    return QuantumState(np.kron(a, b), (QA, QB))


@functools.lru_cache(maxsize=64)
def _friend_matrix(n_friend: int, scramble_seed: int | None) -> np.ndarray:
    n = n_friend + 2
    dim = 2**n
    fanout = np.zeros((dim, dim), dtype=complex)
    for idx in range(dim):
        bits = [(idx >> (n - 1 - i)) & 1 for i in range(n)]
        q = bits[0]
        out = [bits[0]] + [b ^ q for b in bits[1:]]
        fanout[int("".join(map(str, out)), 2), idx] = 1.0
    if scramble_seed is None:
        return fanout
    v = qsim.random_unitary(2**n_friend, np.random.default_rng(scramble_seed))
    scramble = np.kron(np.kron(qsim.I2, v), qsim.I2)
    return scramble @ fanout


def build_friend_unitary(config: ScenarioConfig) -> UnitaryOp:
    """The observation U on (QA, F, m): |q>|ready>|blank> -> |q>|Q'_q>|m_q>."""
    return UnitaryOp(_friend_matrix(config.n_friend, config.scramble_seed), config.lab)


def basis_for_angle(theta: float, target: str) -> UnitaryOp:
    return UnitaryOp(qsim.ry(theta), (target,))


def _joint_basis(theta_1: float, theta_2: float, targets: tuple[str, str]) -> UnitaryOp:
    return UnitaryOp(np.kron(qsim.ry(theta_1), qsim.ry(theta_2)), targets)


def _register(config: ScenarioConfig, flag: bool) -> QuantumState:
    initial = config.initial_state
    if config.noise_p > 0 and config.noise_point == "initial":
        initial = qsim.apply_channel(initial, qsim.depolarizing(config.noise_p, (QA, QB)))
    initial = initial.reorder((QA, QB))
    extra = config.friend + (MSG,) + ((FLAG,) if flag else ())
    blank = qsim.basis_state(extra)
    state = qsim.tensor(initial, blank)
    return state.reorder((QA,) + extra + (QB,))


def _apply_flag(state: QuantumState, flag_mode: str | None) -> QuantumState:
    if flag_mode is None:
        return state
    if flag_mode == "independent":
        return qsim.apply_unitary(state, UnitaryOp(qsim.X, (FLAG,)))
    if flag_mode == "value-dependent":
        return qsim.apply_unitary(state, UnitaryOp(qsim.CNOT, (QA, FLAG)))
    raise ValueError(f"flag_mode must be one of {FLAG_MODES}, got {flag_mode!r}")


def _after_observation(config: ScenarioConfig, flag_mode: str | None = None) -> QuantumState:
    state = _register(config, flag_mode is not None)
    state = qsim.apply_unitary(state, build_friend_unitary(config))
    return _apply_flag(state, flag_mode)


def _after_reversal(config: ScenarioConfig, observed: QuantumState) -> QuantumState:
    state = observed
    if config.noise_p > 0 and config.noise_point == "friend":
        for f in config.friend:
            state = qsim.apply_channel(state, qsim.depolarizing(config.noise_p, f))
    return qsim.apply_unitary(state, build_friend_unitary(config).dagger())


def _branch_from_states(config: ScenarioConfig, x: int, y: int, observed, reversed_) -> np.ndarray:
    beta = config.bob_angles[setting_index(y)]
    if x == 1:
        basis = _joint_basis(0.0, beta, (MSG, QB))
        probs = qsim.outcome_probabilities(observed, basis)
    elif x == 2:
        basis = _joint_basis(config.alice_x2_angle, beta, (QA, QB))
        probs = qsim.outcome_probabilities(reversed_, basis)
    else:
        raise ValueError(f"x must be 1 or 2, got {x!r}")
    return probs.reshape(2, 2)


def run_branch(config: ScenarioConfig, x: int, y: int) -> np.ndarray:
    """Joint distribution ``d[ia, ib]`` of Alice's and Bob's outcomes.

    x=1: apply U, read the message in its logical basis (a = c).
    x=2: apply U, then U^-1, then measure QA at ``alice_x2_angle``.
    Bob measures QB at ``bob_angles[y-1]`` in both cases.
    """
    setting_index(y)
    observed = _after_observation(config)
    reversed_ = _after_reversal(config, observed) if x == 2 else None
    return _branch_from_states(config, x, y, observed, reversed_)


def _behavior(config: ScenarioConfig, flag_mode: str | None = None) -> Behavior:
    observed = _after_observation(config, flag_mode)
    reversed_ = _after_reversal(config, observed)
    p = np.empty((2, 2, 2, 2))
    for x, y in itertools.product(SETTINGS, SETTINGS):
        p[:, :, x - 1, y - 1] = _branch_from_states(config, x, y, observed, reversed_)
    return Behavior(p)


def behavior(config: ScenarioConfig) -> Behavior:
    """Exact p(a, b | x, y) over all four setting pairs."""
    return _behavior(config)


def direct_behavior(config: ScenarioConfig) -> Behavior:
    """Behavior of measuring the initial two-qubit state with no friend at all.

    x=1 is Z on QA, x=2 is ``alice_x2_angle``; noise at the initial point is
    included. This is the reference the x=2 reversal must reproduce.
    """
    rho = config.initial_state
    if config.noise_p > 0 and config.noise_point == "initial":
        rho = qsim.apply_channel(rho, qsim.depolarizing(config.noise_p, (QA, QB)))
    p = np.empty((2, 2, 2, 2))
    alice = (0.0, config.alice_x2_angle)
    for ix, iy in itertools.product(range(2), range(2)):
        basis = _joint_basis(alice[ix], config.bob_angles[iy], (QA, QB))
        p[:, :, ix, iy] = qsim.outcome_probabilities(rho, basis).reshape(2, 2)
    return Behavior(p)


def restoration_fidelity(config: ScenarioConfig) -> float:
    """Fidelity of the (QA, F, m, QB) state after U then U^-1 with the initial one."""
    initial = _register(config, flag=False)
    restored = _after_reversal(config, _after_observation(config))
    return qsim.fidelity(initial, restored)


def tsirelson_config(**overrides) -> ScenarioConfig:
    """|Phi+>, Alice Z/X, Bob (Z +- X)/sqrt2: the CHSH-maximising default."""
    return replace(ScenarioConfig(), **overrides)


# --------------------------------------------------------------------------- noise


@dataclass(frozen=True)
class NoiseSweepRow:
    p_dep: float
    chsh: float
    lf_feasible: bool


def noise_sweep(config: ScenarioConfig, p_grid: Sequence[float]) -> list[NoiseSweepRow]:
    """CHSH (largest variant) and LF feasibility versus depolarizing strength.

    Noise is applied at ``config.noise_point``.
    """
    from lfsim.lfpoly import lf_feasible

    rows = []
    for p in p_grid:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"grid value {p} outside [0, 1]")
        bh = behavior(replace(config, noise_p=float(p)))
        rows.append(NoiseSweepRow(float(p), max_chsh(bh)[1], lf_feasible(bh).feasible))
    return rows


def noise_threshold(config: ScenarioConfig, bound: float = 2.0, xtol: float = 1e-13) -> float:
    """Depolarizing strength at which the largest CHSH value falls to ``bound``."""

    def excess(p: float) -> float:
        return max_chsh(behavior(replace(config, noise_p=p)))[1] - bound

    lo, hi = 0.0, 1.0
    if excess(lo) <= 0:
        raise ValueError("the noiseless behavior does not exceed the bound")
    if excess(hi) > 0:
        raise ValueError("the bound is exceeded even at full depolarization")
    return float(optimize.brentq(excess, lo, hi, xtol=xtol))


# --------------------------------------------------------------------- Monte Carlo


@dataclass(frozen=True)
class TrialRecord:
    index: int
    x: int
    y: int
    a: int
    b: int


@dataclass(frozen=True)
class MonteCarloResult:
    """Raw trials plus the empirical behavior and its standard errors."""

    seed: int
    n_trials: int
    x: np.ndarray
    y: np.ndarray
    a: np.ndarray
    b: np.ndarray
    index: np.ndarray
    counts: np.ndarray  # counts[ia, ib, ix, iy]

    @property
    def n_kept(self) -> int:
        return int(self.x.size)

    def setting_counts(self) -> np.ndarray:
        return self.counts.sum(axis=(0, 1))

    def _require_all_settings(self) -> np.ndarray:
        n = self.setting_counts()
        if np.any(n == 0):
            raise ValueError("some setting pair received no trials; increase n_trials")
        return n

    @property
    def behavior(self) -> Behavior:
        return Behavior(self.counts / self._require_all_settings())

    @property
    def standard_errors(self) -> np.ndarray:
        n = self._require_all_settings()
        p = self.counts / n
        return np.sqrt(p * (1 - p) / n)

    def chsh(self, variant: int = 4) -> tuple[float, float]:
        """Empirical CHSH value and its standard error."""
        from lfsim.behavior import chsh_signs

        n = self._require_all_settings()
        E = self.behavior.correlators()
        var = (1 - E**2) / n
        s = float(np.sum(chsh_signs(variant) * E))
        return s, float(np.sqrt(var.sum()))

    def records(self):
        for i, x, y, a, b in zip(self.index, self.x, self.y, self.a, self.b):
            yield TrialRecord(int(i), int(x), int(y), int(a), int(b))


MC_BLOCK = 1 << 16


def _mc_block(seed: int, block: int, start: int, size: int, cdf: np.ndarray, pullout: float):
    # each block has its own substream, so results do not depend on evaluation order
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    ix = rng.integers(0, 2, size)
    iy = rng.integers(0, 2, size)
    u = rng.random(size)
    keep = rng.random(size) >= pullout
    outcome = (u[:, None] >= cdf[ix, iy][:, :3]).sum(axis=1)
    idx = np.arange(start, start + size)
    return ix[keep], iy[keep], outcome[keep], idx[keep]


def monte_carlo(config: ScenarioConfig, n_trials: int, seed: int) -> MonteCarloResult:
    """Sample trials with settings drawn uniformly and i.i.d.

    A ``pullout_fraction`` of trials (chosen at random) is discarded, modelling
    runs in which the friend declines the reversal.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    exact = behavior(config).p
    # outcomes flattened as (ia, ib) -> 2*ia + ib
    cdf = np.cumsum(exact.transpose(2, 3, 0, 1).reshape(2, 2, 4), axis=2)
    parts = []
    for block, start in enumerate(range(0, n_trials, MC_BLOCK)):
        size = min(MC_BLOCK, n_trials - start)
        parts.append(_mc_block(seed, block, start, size, cdf, config.pullout_fraction))
    ix = np.concatenate([p[0] for p in parts])
    iy = np.concatenate([p[1] for p in parts])
    out = np.concatenate([p[2] for p in parts])
    idx = np.concatenate([p[3] for p in parts])
    ia, ib = out // 2, out % 2
    counts = np.zeros((2, 2, 2, 2), dtype=np.int64)
    np.add.at(counts, (ia, ib, ix, iy), 1)
    signs = np.array(OUTCOMES)
    return MonteCarloResult(
        seed=seed,
        n_trials=n_trials,
        x=ix + 1,
        y=iy + 1,
        a=signs[ia],
        b=signs[ib],
        index=idx,
        counts=counts,
    )


# ------------------------------------------------------------------ Deutsch flag


def _correlation_data(rho_1: QuantumState, rho_2: QuantumState) -> tuple[np.ndarray, np.ndarray]:
    """u_j = <Z (x) s_j> on the x=1 pair, T_ij = <s_i (x) s_j> on the x=2 pair."""
    paulis = (qsim.X, qsim.Y, qsim.Z)
    d1, d2 = rho_1.density_matrix(), rho_2.density_matrix()
    u = np.array([np.real(np.trace(d1 @ np.kron(qsim.Z, s))) for s in paulis])
    t = np.array([[np.real(np.trace(d2 @ np.kron(si, sj))) for sj in paulis] for si in paulis])
    return u, t


def _optimal_chsh_from(u: np.ndarray, t: np.ndarray) -> float:
    # with Bob free: S = |u + T^T a| + |u - T^T a|, maximised over Alice's x=2 direction a
    def neg(angles):
        th, ph = angles
        a = np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
        v = t.T @ a
        return -(np.linalg.norm(u + v) + np.linalg.norm(u - v))

    grid = [(th, ph) for th in np.linspace(0, np.pi, 13) for ph in np.linspace(0, 2 * np.pi, 24, endpoint=False)]
    starts = sorted(grid, key=neg)[:4]
    best = max(-neg(s) for s in starts)
    for s in starts:
        res = optimize.minimize(neg, s, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
        best = max(best, -res.fun)
    return float(best)


def optimal_chsh(config: ScenarioConfig, flag_mode: str | None = None) -> float:
    """Largest CHSH value over Bob's bases and Alice's x=2 basis.

    Alice's x=1 stays the friend's Z basis. This measures how much violation
    the post-protocol states can still support, independently of the
    configured angles.
    """
    observed = _after_observation(config, flag_mode)
    reversed_ = _after_reversal(config, observed)
    u, t = _correlation_data(qsim.partial_trace(observed, (MSG, QB)), qsim.partial_trace(reversed_, (QA, QB)))
    return _optimal_chsh_from(u, t)


@dataclass(frozen=True)
class FlagDemoResult:
    flag_mode: str
    p_flag_knew: float
    restoration_fidelity: float
    chsh: float
    optimal_chsh: float
    alice_x2_marginal: np.ndarray


def deutsch_flag_demo(config: ScenarioConfig, flag_mode: str) -> FlagDemoResult:
    """Run the protocol with a flag qubit written during the observation.

    ``independent``: the flag flips |blank> -> |knew> regardless of the
    observed value. ``value-dependent``: the flag is CNOT-copied from QA, so
    it keeps a which-value record the reversal cannot erase.
    """
    if flag_mode not in FLAG_MODES:
        raise ValueError(f"flag_mode must be one of {FLAG_MODES}, got {flag_mode!r}")
    observed = _after_observation(config, flag_mode)
    reversed_ = _after_reversal(config, observed)
    flag_probs = qsim.outcome_probabilities(reversed_, UnitaryOp(qsim.I2, (FLAG,)))
    initial = _register(config, flag=False)
    keep = initial.labels
    fid = qsim.fidelity(initial, qsim.partial_trace(reversed_, keep))
    bh = _behavior(config, flag_mode)
    u, t = _correlation_data(qsim.partial_trace(observed, (MSG, QB)), qsim.partial_trace(reversed_, (QA, QB)))
    return FlagDemoResult(
        flag_mode=flag_mode,
        p_flag_knew=float(flag_probs[1]),
        restoration_fidelity=fid,
        chsh=max_chsh(bh)[1],
        optimal_chsh=_optimal_chsh_from(u, t),
        alice_x2_marginal=bh.alice_marginal(2, 1).copy(),
    )


__all__ = [
    "Behavior",
    "FlagDemoResult",
    "MonteCarloResult",
    "NoiseSweepRow",
    "ScenarioConfig",
    "TrialRecord",
    "behavior",
    "build_friend_unitary",
    "chsh_value",
    "deutsch_flag_demo",
    "direct_behavior",
    "monte_carlo",
    "noise_sweep",
    "noise_threshold",
    "optimal_chsh",
    "product_state",
    "restoration_fidelity",
    "run_branch",
]
