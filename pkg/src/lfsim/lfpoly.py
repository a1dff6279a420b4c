"""Local Friendliness feasibility for the 2-setting/2-outcome scenario.

A behavior admits an LF model when it decomposes as

    p(a,b|1,y) = w_a P(b|a,y)
    p(a,b|2,y) = sum_c w_c P(a,b|c,2,y)

where c is the friend's outcome (Alice's x=1 answer is pinned to c), every
per-c table is no-signalling, and Bob's per-c marginal does not depend on x.
The LP works with the products w_c P(.|c,.) so every constraint is linear.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from lfsim import tolerances
from lfsim.behavior import (
    CHSH_BOUND,
    CHSH_VARIANTS,
    Behavior,
    chsh_signs,
    chsh_values,
)
from lfsim.simplex import LinearProgram, simplex_feasibility

N_B = 8  # B[c, b, y] = w_c P(b|c,y)
N_Q = 16  # Q[c, a, b, y] = w_c P(a,b|c,x=2,y)
N_VARS = N_B + N_Q


def _b_index(c: int, b: int, y: int) -> int:
    return (c * 2 + b) * 2 + y


def _q_index(c: int, a: int, b: int, y: int) -> int:
    return N_B + ((c * 2 + a) * 2 + b) * 2 + y


@dataclass(frozen=True, eq=False)
class LFCertificate:
    feasible: bool
    weights: np.ndarray | None = None  # w[c]
    bob_given_c: np.ndarray | None = None  # P(b|c,y) as [c, b, y]
    joint_given_c: np.ndarray | None = None  # P(a,b|c,x=2,y) as [c, a, b, y]
    violated_facet: tuple[int, float] | None = None  # (variant, S) of the largest CHSH
    gap: float = 0.0  # phase-1 optimum; zero up to tolerance when feasible
    facet_signs: np.ndarray | None = field(default=None, repr=False)

    def reconstruct(self) -> Behavior:
        if not self.feasible:
            raise ValueError("an infeasible certificate carries no decomposition")
        w, pb, pq = self.weights, self.bob_given_c, self.joint_given_c
        p = np.zeros((2, 2, 2, 2))
        for a, b, y in itertools.product(range(2), repeat=3):
            p[a, b, 0, y] = w[a] * pb[a, b, y]
            p[a, b, 1, y] = float(np.sum(w * pq[:, a, b, y]))
        return Behavior(p)


def no_signaling_check(bh: Behavior, tol: float = tolerances.BEHAVIOR) -> bool:
    """Alice's marginal is independent of y and Bob's of x."""
    p = bh.p
    alice = p.sum(axis=1)  # [a, x, y]
    bob = p.sum(axis=0)  # [b, x, y]
    return bool(
        np.max(np.abs(alice[:, :, 0] - alice[:, :, 1])) <= tol
        and np.max(np.abs(bob[:, 0, :] - bob[:, 1, :])) <= tol
    )


def _require_valid(bh: Behavior, tol: float) -> None:
    bh.check_normalized(tol)
    if not no_signaling_check(bh, tol):
        raise ValueError("behavior is signalling; no LF model can reproduce it")


def build_lf_program(bh: Behavior) -> LinearProgram:
    p = bh.p
    rows: list[np.ndarray] = []
    rhs: list[float] = []

    def row(entries: dict[int, float], value: float) -> None:
        r = np.zeros(N_VARS)
        for j, coeff in entries.items():
            r[j] += coeff
        rows.append(r)
        rhs.append(value)

    # x = 1: a equals c, so B reproduces the x=1 table directly
    for c, b, y in itertools.product(range(2), repeat=3):
        row({_b_index(c, b, y): 1.0}, p[c, b, 0, y])
    # x = 2: mixture over c
    for a, b, y in itertools.product(range(2), repeat=3):
        row({_q_index(c, a, b, y): 1.0 for c in range(2)}, p[a, b, 1, y])
    # Bob's per-c marginal is the same for both x
    for c, b, y in itertools.product(range(2), repeat=3):
        entries = {_q_index(c, a, b, y): 1.0 for a in range(2)}
        entries[_b_index(c, b, y)] = -1.0
        row(entries, 0.0)
    # Alice's per-c marginal at x = 2 does not depend on y
    for c, a in itertools.product(range(2), repeat=2):
        entries: dict[int, float] = {}
        for b in range(2):
            entries[_q_index(c, a, b, 0)] = 1.0
            entries[_q_index(c, a, b, 1)] = -1.0
        row(entries, 0.0)
    # the weight w_c does not depend on which y is used to read it off
    for c in range(2):
        entries = {}
        for b in range(2):
            entries[_b_index(c, b, 0)] = 1.0
            entries[_b_index(c, b, 1)] = -1.0
        row(entries, 0.0)
    row({_b_index(c, b, 0): 1.0 for c in range(2) for b in range(2)}, 1.0)
    return LinearProgram.build(N_VARS, A_eq=np.array(rows), b_eq=np.array(rhs))


def _certificate_from_witness(x: np.ndarray, gap: float) -> LFCertificate:
    B = x[:N_B].reshape(2, 2, 2)
    Q = x[N_B:].reshape(2, 2, 2, 2)
    w = B[:, :, 0].sum(axis=1)
    pb = np.full((2, 2, 2), 0.5)
    pq = np.full((2, 2, 2, 2), 0.25)
    for c in range(2):
        if w[c] > 0:
            pb[c] = B[c] / w[c]
            pq[c] = Q[c] / w[c]
    return LFCertificate(True, weights=w, bob_given_c=pb, joint_given_c=pq, gap=gap)


def _most_violated(bh: Behavior) -> tuple[int, float]:
    vals = chsh_values(bh)
    v = max(vals, key=lambda k: (vals[k], -k))
    return v, vals[v]


def lf_feasible(bh: Behavior, tol: float = tolerances.LP) -> LFCertificate:
    """Decide whether ``bh`` admits an LF decomposition."""
    _require_valid(bh, max(tol, tolerances.BEHAVIOR))
    result = simplex_feasibility(build_lf_program(bh), tol)
    if result.feasible:
        return _certificate_from_witness(result.witness, result.infeasibility)
    variant, value = _most_violated(bh)
    return LFCertificate(
        False,
        violated_facet=(variant, value),
        gap=result.infeasibility,
        facet_signs=chsh_signs(variant),
    )


def enumerate_lf_vertices() -> list[Behavior]:
    """The 16 local-deterministic behaviors a(x), b(y)."""
    return [
        Behavior.deterministic((a1, a2), (b1, b2))
        for a1, a2, b1, b2 in itertools.product((1, -1), repeat=4)
    ]


def hull_membership(bh: Behavior, vertices: list[Behavior], tol: float = tolerances.LF_DECISION) -> bool:
    """Is ``bh`` a convex combination of ``vertices``? Decided by HiGHS.

    Minimises the L1 residual of sum_k lam_k V_k - p with lam on the simplex.
    """
    if not vertices:
        raise ValueError("vertex list is empty")
    V = np.stack([v.p.ravel() for v in vertices], axis=1)
    n_v = V.shape[1]
    n_p = V.shape[0]
    # variables: lam (n_v), s_plus (n_p), s_minus (n_p)
    A_eq = np.zeros((n_p + 1, n_v + 2 * n_p))
    A_eq[:n_p, :n_v] = V
    A_eq[:n_p, n_v:n_v + n_p] = np.eye(n_p)
    A_eq[:n_p, n_v + n_p:] = -np.eye(n_p)
    A_eq[n_p, :n_v] = 1.0
    b_eq = np.append(bh.p.ravel(), 1.0)
    cost = np.concatenate([np.zeros(n_v), np.ones(2 * n_p)])
    res = linprog(cost, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"hull LP failed: {res.message}")
    return bool(res.fun <= tol)


def chsh_facets_check(bh: Behavior, tol: float = tolerances.LF_DECISION) -> list[tuple[int, float, bool]]:
    """(variant, S, violated) for all 8 CHSH sign patterns against the bound 2."""
    vals = chsh_values(bh)
    return [(v, vals[v], vals[v] > CHSH_BOUND + tol) for v in CHSH_VARIANTS]


def chsh_local(bh: Behavior, tol: float = tolerances.LF_DECISION) -> bool:
    """All 8 CHSH + positivity + normalisation + no-signalling."""
    if not bh.is_normalized(tol) or not no_signaling_check(bh, tol):
        return False
    return not any(violated for _, _, violated in chsh_facets_check(bh, tol))


__all__ = [
    "LFCertificate",
    "build_lf_program",
    "chsh_facets_check",
    "chsh_local",
    "enumerate_lf_vertices",
    "hull_membership",
    "lf_feasible",
    "no_signaling_check",
]
