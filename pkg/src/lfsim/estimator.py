"""Fault-tolerant resource estimate for running a human-speed classical AI reversibly.

Chain: classical throughput -> reversible segment -> logical circuit with routing
and synthesis overhead -> surface-code distance -> Toffoli time and qubit counts.

Symbol map (report field: meaning)
    gamma: Boolean operations per second, F * flop_to_bool
    delta: circuit depth per second, gamma / (k * bool_parallel)
    t_seg, g_seg, s_seg: depth, gates and bits of one duration-T segment
    g_R, s_R, t_R: the same after making the segment reversible
    s_I, t_I: logical qubits and depth on an ideal device
    q_route: routing-and-synthesis depth overhead
    s_L, t_L: logical qubits (u per chip) and logical depth
    err_locations: 2 * t_L * s_L (or s_I, see ``ell_qubits``)
    r_exponent, code_distance: surface-code suppression exponent and distance d
    tau_ltof: logical Toffoli time; T_Q = t_L * tau_ltof
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace

from lfsim.pebble import pebble_closed_form

ROUTING_MODELS = ("alon", "beals", "brierley", "herbert")
TOFFOLI_SCHEMES = ("factory_5p5d", "brown_3d")
REVERSIBILITY = ("naive", "bennett")
Q_MODES = ("override", "formula", "closed_form")
ELL_QUBITS = ("s_L", "s_I")
ROUNDINGS = ("exact", "decade")

# surface-code logical error model: p_L = A * p_ratio ** ((d + 1) / 2)
LOGICAL_ERROR_PREFACTOR = 0.03
FACTORY_QUBITS_PER_D2 = 144
TOFFOLI_CYCLES_PER_D = {"factory_5p5d": 5.5, "brown_3d": 3.0}


class EstimatorError(ValueError):
    """Inputs outside the regime where the estimate is defined."""


@dataclass(frozen=True)
class EstimatorInputs:
    flops: float = 1e15  # F, FLOP/s
    bits: float = 1e15  # S
    flop_to_bool: float = 1e4  # a
    bool_parallel: float = 10.0  # b
    c_synth: float = 3.96  # c
    parallelism: float = 1e7  # k
    segment_T: float = 1.0  # seconds
    eps: float = 1e-2
    p_ratio: float = 0.01  # p / p_th
    qubits_per_chip: float = 3.0  # u
    tau_qec: float = 1e-6  # seconds
    routing_model: str = "herbert"
    toffoli_scheme: str = "factory_5p5d"
    reversibility: str = "naive"
    bennett_levels: int = 0
    q_mode: str = "override"
    q_override: float = 1e3
    ell_qubits: str = "s_L"
    n_factories: float | None = None  # defaults to k
    data_qubits_per_d2: float = 2.0

    def __post_init__(self) -> None:
        for name in ("flops", "bits", "flop_to_bool", "bool_parallel", "c_synth", "parallelism",
                     "segment_T", "qubits_per_chip", "q_override", "data_qubits_per_d2"):
            if not getattr(self, name) > 0:
                raise EstimatorError(f"{name} must be positive")
        if self.tau_qec < 0:
            raise EstimatorError("tau_qec must be non-negative")
        if not 0 < self.eps < 1:
            raise EstimatorError("eps must lie in (0, 1)")
        if not self.p_ratio > 0:
            raise EstimatorError("p_ratio must be positive")
        choices = {
            "routing_model": ROUTING_MODELS,
            "toffoli_scheme": TOFFOLI_SCHEMES,
            "reversibility": REVERSIBILITY,
            "q_mode": Q_MODES,
            "ell_qubits": ELL_QUBITS,
        }
        for name, allowed in choices.items():
            if getattr(self, name) not in allowed:
                raise EstimatorError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")
        if self.bennett_levels < 0:
            raise EstimatorError("bennett_levels must be non-negative")
        if self.n_factories is not None and self.n_factories < 0:
            raise EstimatorError("n_factories must be non-negative")

    @property
    def factories(self) -> float:
        return self.parallelism if self.n_factories is None else self.n_factories

    def updated(self, **changes) -> "EstimatorInputs":
        return replace(self, **changes)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def derive_classical(inp: EstimatorInputs) -> tuple[float, float, float, float, float]:
    """(gamma, delta, t_seg, g_seg, s_seg)."""
    gamma = inp.flops * inp.flop_to_bool
    delta = gamma / (inp.parallelism * inp.bool_parallel)
    t_seg = delta * inp.segment_T
    g_seg = t_seg * inp.parallelism * inp.bool_parallel
    return gamma, delta, t_seg, g_seg, inp.bits


def reversible_overhead(inp: EstimatorInputs, g: float, s: float, t: float) -> tuple[float, float, float]:
    """(g_R, s_R, t_R) for the chosen reversibility scheme."""
    if g <= 0 or s <= 0:
        raise EstimatorError("gate and bit counts must be positive")
    if inp.reversibility == "naive":
        return g, g + s, t
    executions, pebbles = pebble_closed_form(inp.bennett_levels)
    scale = executions / 2**inp.bennett_levels
    return g * scale, s * pebbles, t * scale


def routing_factor(model: str, n: float) -> float:
    """Depth (or gate) multiplier for routing on ``n`` chips."""
    if n < 2:
        raise EstimatorError("routing needs at least 2 qubits")
    if model == "alon":
        return 3.0 * n
    if model == "beals":
        D = math.ceil(math.log2(n))
        return D * (D + 1) / 2
    if model == "brierley":
        return 6.0 * math.log2(n)
    if model == "herbert":
        return 4.0 * math.log2(n)
    raise EstimatorError(f"unknown routing model {model!r}; choose from {ROUTING_MODELS}")


def route_overhead(inp: EstimatorInputs, s_I: float, g: float) -> float:
    if inp.q_mode == "override":
        return inp.q_override
    if inp.q_mode == "closed_form":
        return 4.0 * inp.c_synth * math.log2(g)
    if inp.routing_model == "herbert":
        # 4 log2 n with log10(2) taken as 3/10
        return 40.0 / 3.0 * inp.c_synth * math.log10(s_I)
    return inp.c_synth * routing_factor(inp.routing_model, s_I)


def snap_decade(value: float) -> float:
    """Nearest power of ten in log space."""
    return 10.0 ** round(math.log10(value))


def logical_resources(
    inp: EstimatorInputs, g_R: float, s_R: float, t_R: float, rounding: str = "exact"
) -> tuple[float, float, float, float]:
    """(s_I, s_L, q_route, t_L); s_I = s_R, which is g + s for the naive scheme."""
    s_I = s_R
    if rounding == "decade":
        s_I = snap_decade(s_I)
    q = route_overhead(inp, s_I, g_R)
    return s_I, inp.qubits_per_chip * s_I, q, q * t_R


def code_distance(
    inp: EstimatorInputs, t_L: float, qubits: float, rounding: str = "exact", ell: float | None = None
) -> tuple[float, float, float, int]:
    """(ell, p_L_target, r, d) for a depth-2t_L run over ``qubits`` logical qubits."""
    if not 0 < inp.p_ratio < 1:
        raise EstimatorError(
            f"p_ratio = {inp.p_ratio:g} is not below threshold; no code distance suppresses errors"
        )
    if ell is None:
        ell = 2.0 * t_L * qubits
        if rounding == "decade":
            ell = snap_decade(ell)
    p_L = inp.eps / ell
    # 100 eps / (6 t_L s_L) written in terms of ell
    r = math.log(100.0 * inp.eps / (3.0 * ell)) / math.log(inp.p_ratio)
    if r <= 0:
        raise EstimatorError(f"suppression exponent r = {r:.3g} is not positive; the error budget is already met")
    d = max(3, math.ceil(2.0 * r - 1.0 - 1e-12))
    return ell, p_L, r, d


def logical_error_bound(p_ratio: float, d: int, ell: float) -> float:
    """Probability bound A p_ratio^((d+1)/2) * ell on any logical error in a run."""
    return LOGICAL_ERROR_PREFACTOR * p_ratio ** ((d + 1) / 2) * ell


def toffoli_time(d: int, tau_qec: float, scheme: str = "factory_5p5d") -> float:
    if d < 1:
        raise EstimatorError("code distance must be positive")
    if scheme not in TOFFOLI_CYCLES_PER_D:
        raise EstimatorError(f"unknown Toffoli scheme {scheme!r}")
    return TOFFOLI_CYCLES_PER_D[scheme] * d * tau_qec


def factory_cost(d: int, n_factories: float) -> tuple[float, float]:
    per = float(FACTORY_QUBITS_PER_D2 * d * d)
    return per, per * n_factories


def closed_form_time_ratio(inp: EstimatorInputs, extra_T: bool = False) -> tuple[float, int]:
    """(T_Q / T, d) from input parameters alone.

    Uses q = 4 c log2(g) and the factory Toffoli time. With ``extra_T`` the
    depth inside the distance formula carries an additional factor of T.
    """
    a, F, T = inp.flop_to_bool, inp.flops, inp.segment_T
    depth_rate = a * F / (inp.parallelism * inp.bool_parallel)
    t = depth_rate * T * (T if extra_T else 1.0)
    log_g = math.log2(a * F * T)
    arg = 25.0 * inp.eps / (6.0 * inp.qubits_per_chip * inp.c_synth * t * (a * F * T + inp.bits) * log_g)
    if not 0 < inp.p_ratio < 1:
        raise EstimatorError("p_ratio must lie in (0, 1)")
    d = max(3, math.ceil(2.0 * math.log(arg) / math.log(inp.p_ratio) - 1.0 - 1e-12))
    ratio = 22.0 * inp.c_synth * depth_rate * log_g * d * inp.tau_qec
    return ratio, d


UNITS = {
    "gamma": "per_second",
    "delta": "per_second",
    "tau_ltof": "seconds",
    "T_Q": "seconds",
    "segment_T": "seconds",
    "tau_qec": "seconds",
}


@dataclass(frozen=True)
class EstimatorReport:
    rounding: str
    gamma: float
    delta: float
    t_seg: float
    g_seg: float
    s_seg: float
    g_R: float
    s_R: float
    t_R: float
    s_I: float
    t_I: float
    q_route: float
    s_L: float
    t_L: float
    err_locations: float
    p_L_target: float
    r_exponent: float
    code_distance: int
    tau_ltof: float
    T_Q: float
    time_ratio: float
    factory_qubits_each: float
    factory_qubits_total: float
    data_physical_qubits: float
    logical_error_bound: float
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        """Flat dict; time-valued keys carry unit suffixes."""
        out = {}
        for k, v in asdict(self).items():
            key = f"{k}_{UNITS[k]}" if k in UNITS else k
            out[key] = list(v) if isinstance(v, tuple) else v
        return out


@dataclass(frozen=True)
class FullReport:
    inputs: EstimatorInputs
    exact: EstimatorReport
    decade: EstimatorReport
    closed_form_time_ratio: float
    closed_form_distance: int
    closed_form_delta: float  # closed form minus the exact chain's T_Q / T
    closed_form_extra_T_delta: float  # alternate reading minus the documented one
    warnings: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "inputs": asdict(self.inputs),
            "exact": self.exact.to_dict(),
            "decade_rounded": self.decade.to_dict(),
            "closed_form_time_ratio": self.closed_form_time_ratio,
            "closed_form_distance": self.closed_form_distance,
            "closed_form_delta": self.closed_form_delta,
            "closed_form_extra_T_delta": self.closed_form_extra_T_delta,
            "warnings": list(self.warnings),
        }


def run_chain(inp: EstimatorInputs, rounding: str = "exact") -> EstimatorReport:
    if rounding not in ROUNDINGS:
        raise EstimatorError(f"rounding must be one of {ROUNDINGS}")
    warnings: list[str] = []
    gamma, delta, t, g, s = derive_classical(inp)
    g_R, s_R, t_R = reversible_overhead(inp, g, s, t)
    s_I, s_L, q, t_L = logical_resources(inp, g_R, s_R, t_R, rounding)
    qubits = s_L if inp.ell_qubits == "s_L" else s_I
    ell, p_L, r, d = code_distance(inp, t_L, qubits, rounding)
    if d == 3 and 2.0 * r - 1.0 < 3:
        warnings.append(f"code distance floored at 3 (2r - 1 = {2 * r - 1:.3g})")
    bound = logical_error_bound(inp.p_ratio, d, ell)
    if bound > inp.eps * (1 + 1e-9):
        raise EstimatorError(f"distance {d} misses the error budget: {bound:.3g} > {inp.eps:.3g}")
    if inp.q_mode == "override":
        formula_q = 40.0 / 3.0 * inp.c_synth * math.log10(s_I)
        if abs(formula_q / q - 1) > 0.25:
            warnings.append(f"q override {q:g} differs from the synthesis-and-routing estimate {formula_q:.4g}")
    tau = toffoli_time(d, inp.tau_qec, inp.toffoli_scheme)
    T_Q = t_L * tau
    each, total = factory_cost(d, inp.factories)
    return EstimatorReport(
        rounding=rounding,
        gamma=gamma,
        delta=delta,
        t_seg=t,
        g_seg=g,
        s_seg=s,
        g_R=g_R,
        s_R=s_R,
        t_R=t_R,
        s_I=s_I,
        t_I=t_R,
        q_route=q,
        s_L=s_L,
        t_L=t_L,
        err_locations=ell,
        p_L_target=p_L,
        r_exponent=r,
        code_distance=d,
        tau_ltof=tau,
        T_Q=T_Q,
        time_ratio=T_Q / inp.segment_T,
        factory_qubits_each=each,
        factory_qubits_total=total,
        data_physical_qubits=s_L * inp.data_qubits_per_d2 * d * d,
        logical_error_bound=bound,
        warnings=tuple(warnings),
    )


def full_report(inp: EstimatorInputs) -> FullReport:
    exact = run_chain(inp, "exact")
    decade = run_chain(inp, "decade")
    cf_ratio, cf_d = closed_form_time_ratio(inp)
    alt_ratio, _ = closed_form_time_ratio(inp, extra_T=True)
    warnings = list(dict.fromkeys(exact.warnings + decade.warnings))
    delta = cf_ratio - exact.time_ratio
    if abs(delta) > 1e-2 * abs(exact.time_ratio):
        warnings.append(
            f"closed-form T_Q/T {cf_ratio:.4g} differs from the stepwise chain {exact.time_ratio:.4g}"
            " (closed form fixes q = 4 c log2 g and the factory Toffoli time)"
        )
    return FullReport(
        inputs=inp,
        exact=exact,
        decade=decade,
        closed_form_time_ratio=cf_ratio,
        closed_form_distance=cf_d,
        closed_form_delta=delta,
        closed_form_extra_T_delta=alt_ratio - cf_ratio,
        warnings=tuple(warnings),
    )


# T_Q should not decrease as these grow (k: should not increase)
NONDECREASING = {"flops", "tau_qec", "c_synth", "bits", "flop_to_bool"}
NONINCREASING = {"parallelism", "bool_parallel"}


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    grid: tuple[float, ...]
    reports: tuple[FullReport, ...]
    monotone: bool | None  # None when no monotonicity is expected for the parameter

    def rows(self, rounding: str = "exact") -> list[dict]:
        out = []
        for value, rep in zip(self.grid, self.reports):
            chain = rep.exact if rounding == "exact" else rep.decade
            row = {self.parameter: value}
            row.update({k: v for k, v in chain.to_dict().items() if k not in ("warnings", "rounding")})
            out.append(row)
        return out


def sweep(inp: EstimatorInputs, parameter: str, grid) -> SweepResult:
    grid = tuple(grid)
    if not grid:
        raise EstimatorError("sweep grid is empty")
    if parameter not in EstimatorInputs.field_names():
        raise EstimatorError(f"unknown sweep parameter {parameter!r}")
    reports = tuple(full_report(inp.updated(**{parameter: v})) for v in grid)
    monotone = None
    order = sorted(range(len(grid)), key=lambda i: grid[i])
    tq = [reports[i].exact.T_Q for i in order]
    if parameter in NONDECREASING:
        monotone = all(b >= a * (1 - 1e-12) for a, b in zip(tq, tq[1:]))
    elif parameter in NONINCREASING:
        monotone = all(b <= a * (1 + 1e-12) for a, b in zip(tq, tq[1:]))
    return SweepResult(parameter, grid, reports, monotone)


__all__ = [
    "EstimatorError",
    "EstimatorInputs",
    "EstimatorReport",
    "FullReport",
    "SweepResult",
    "closed_form_time_ratio",
    "code_distance",
    "derive_classical",
    "factory_cost",
    "full_report",
    "logical_error_bound",
    "logical_resources",
    "reversible_overhead",
    "route_overhead",
    "routing_factor",
    "run_chain",
    "snap_decade",
    "sweep",
    "toffoli_time",
]
