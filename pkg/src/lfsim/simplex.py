"""Dense phase-1 simplex for small feasibility problems.

Solves: does there exist x >= 0 with A_ub x <= b_ub and A_eq x = b_eq?
Pivoting follows Bland's rule, so the run is deterministic and terminates on
degenerate programs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lfsim import tolerances

# coefficient dynamic range above which answers are refused
MAX_DYNAMIC_RANGE = 1e12


class IllConditionedError(ArithmeticError):
    """The program is too badly scaled to answer reliably in floating point."""


@dataclass(frozen=True, eq=False)
class LinearProgram:
    n_vars: int
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray

    def __post_init__(self) -> None:
        n = int(self.n_vars)
        if n < 0:
            raise ValueError("n_vars must be non-negative")
        for a_name, b_name in (("A_ub", "b_ub"), ("A_eq", "b_eq")):
            b = np.asarray(getattr(self, b_name), dtype=float).reshape(-1)
            A = np.asarray(getattr(self, a_name), dtype=float).reshape(b.size, n)
            if A.shape[0] != b.shape[0]:
                raise ValueError(f"{a_name} has {A.shape[0]} rows but {b_name} has {b.shape[0]} entries")
            object.__setattr__(self, a_name, A)
            object.__setattr__(self, b_name, b)

    @classmethod
    def build(cls, n_vars: int, A_ub=None, b_ub=None, A_eq=None, b_eq=None) -> "LinearProgram":
        empty_A = np.zeros((0, n_vars))
        empty_b = np.zeros(0)
        return cls(
            n_vars,
            empty_A if A_ub is None else A_ub,
            empty_b if b_ub is None else b_ub,
            empty_A if A_eq is None else A_eq,
            empty_b if b_eq is None else b_eq,
        )

    def residual(self, x: np.ndarray) -> float:
        """Largest violation of any constraint (including x >= 0) at ``x``."""
        worst = max(0.0, float(-x.min())) if x.size else 0.0
        if self.b_ub.size:
            worst = max(worst, float(np.max(self.A_ub @ x - self.b_ub)))
        if self.b_eq.size:
            worst = max(worst, float(np.max(np.abs(self.A_eq @ x - self.b_eq))))
        return worst


@dataclass(frozen=True, eq=False)
class FeasibilityResult:
    feasible: bool
    witness: np.ndarray | None
    infeasibility: float  # phase-1 optimum: sum of artificial variables
    pivots: int


def _check_conditioning(lp: LinearProgram, tol: float) -> None:
    coeffs = np.abs(np.concatenate([lp.A_ub.ravel(), lp.A_eq.ravel()]))
    rhs = np.abs(np.concatenate([lp.b_ub, lp.b_eq]))
    if not (np.all(np.isfinite(coeffs)) and np.all(np.isfinite(rhs))):
        raise IllConditionedError("program contains non-finite coefficients")
    # right-hand sides below the feasibility tolerance are indistinguishable from zero
    vals = np.concatenate([coeffs, rhs[rhs > tol]])
    nz = vals[vals > 0]
    if nz.size and nz.max() / nz.min() > MAX_DYNAMIC_RANGE:
        raise IllConditionedError(
            f"coefficient dynamic range {nz.max() / nz.min():.2e} exceeds {MAX_DYNAMIC_RANGE:.0e}"
        )


def simplex_feasibility(lp: LinearProgram, tol: float = tolerances.LP) -> FeasibilityResult:
    """Phase-1 simplex with one artificial variable per row."""
    _check_conditioning(lp, tol)
    n = lp.n_vars
    m_ub, m_eq = lp.b_ub.size, lp.b_eq.size
    m = m_ub + m_eq
    if m == 0:
        return FeasibilityResult(True, np.zeros(n), 0.0, 0)

    # columns: [x (n) | slacks (m_ub) | artificials (m)] then rhs
    n_cols = n + m_ub + m
    T = np.zeros((m + 1, n_cols + 1))
    T[:m_ub, :n] = lp.A_ub
    T[:m_ub, n:n + m_ub] = np.eye(m_ub)
    T[:m_ub, -1] = lp.b_ub
    T[m_ub:m, :n] = lp.A_eq
    T[m_ub:m, -1] = lp.b_eq
    neg = T[:m, -1] < 0
    T[:m][neg] *= -1
    T[:m, n + m_ub:n_cols] = np.eye(m)
    basis = list(range(n + m_ub, n_cols))
    # reduced costs of min sum(artificials) with the artificial basis
    T[m, : n + m_ub] = -T[:m, : n + m_ub].sum(axis=0)
    T[m, -1] = -T[:m, -1].sum()

    pivots = 0
    max_pivots = 50 * (m + n_cols)
    while True:
        entering = next((j for j in range(n_cols) if T[m, j] < -tol), None)
        if entering is None:
            break
        col = T[:m, entering]
        rows = np.flatnonzero(col > tol)
        if rows.size == 0:
            # unbounded direction cannot occur: the phase-1 objective is bounded below by 0
            raise IllConditionedError("phase-1 objective reported unbounded")
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        leave = min(ties, key=lambda r: basis[r])
        T[leave] /= T[leave, entering]
        others = np.arange(m + 1) != leave
        T[others] -= np.outer(T[others, entering], T[leave])
        basis[leave] = entering
        pivots += 1
        if pivots > max_pivots:
            raise IllConditionedError("pivot limit reached; program is likely cycling numerically")

    infeasibility = max(0.0, float(-T[m, -1]))
    scale = 1.0 + float(np.max(np.abs(np.concatenate([lp.b_ub, lp.b_eq]))))
    if infeasibility > tol * scale:
        return FeasibilityResult(False, None, infeasibility, pivots)
    x = np.zeros(n_cols)
    for r, j in enumerate(basis):
        x[j] = T[r, -1]
    witness = np.clip(x[:n], 0.0, None)
    if lp.residual(witness) > 100 * tol * scale:
        raise IllConditionedError(
            f"phase-1 reported feasible but the witness violates constraints by {lp.residual(witness):.2e}"
        )
    return FeasibilityResult(True, witness, infeasibility, pivots)
