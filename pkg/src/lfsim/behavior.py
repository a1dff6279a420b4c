"""The 2-setting/2-outcome behavior table p(a, b | x, y) and CHSH expressions.

Storage is ``p[ia, ib, ix, iy]`` with outcome index 0 <-> +1, 1 <-> -1 and
setting index 0 <-> 1, 1 <-> 2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from lfsim import tolerances

OUTCOMES = (1, -1)
SETTINGS = (1, 2)
CHSH_BOUND = 2.0
CHSH_VARIANTS = tuple(range(1, 9))
# order of the correlator terms in every CHSH variant
TERM_ORDER = ((1, 1), (1, 2), (2, 1), (2, 2))


def outcome_index(value: int) -> int:
    if value not in OUTCOMES:
        raise ValueError(f"outcome must be +1 or -1, got {value!r}")
    return 0 if value == 1 else 1


def setting_index(value: int) -> int:
    if value not in SETTINGS:
        raise ValueError(f"setting must be 1 or 2, got {value!r}")
    return value - 1


@dataclass(frozen=True, eq=False)
class Behavior:
    p: np.ndarray

    def __post_init__(self) -> None:
        p = np.array(self.p, dtype=float)
        if p.shape != (2, 2, 2, 2):
            raise ValueError(f"behavior table must have shape (2, 2, 2, 2), got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise ValueError("behavior table contains non-finite entries")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def prob(self, a: int, b: int, x: int, y: int) -> float:
        return float(self.p[outcome_index(a), outcome_index(b), setting_index(x), setting_index(y)])

    def setting_table(self, x: int, y: int) -> np.ndarray:
        """2x2 joint distribution over (a, b) for one setting pair."""
        return self.p[:, :, setting_index(x), setting_index(y)]

    def correlator(self, x: int, y: int) -> float:
        t = self.setting_table(x, y)
        return float(t[0, 0] + t[1, 1] - t[0, 1] - t[1, 0])

    def correlators(self) -> np.ndarray:
        """E[x-1, y-1] = <ab>_{xy}."""
        return np.array([[self.correlator(x, y) for y in SETTINGS] for x in SETTINGS])

    def alice_marginal(self, x: int, y: int) -> np.ndarray:
        return self.setting_table(x, y).sum(axis=1)

    def bob_marginal(self, x: int, y: int) -> np.ndarray:
        return self.setting_table(x, y).sum(axis=0)

    def normalization_error(self) -> float:
        sums = self.p.sum(axis=(0, 1))
        return float(np.max(np.abs(sums - 1.0)))

    def is_normalized(self, tol: float = tolerances.BEHAVIOR) -> bool:
        return self.normalization_error() <= tol and float(self.p.min()) >= -tol

    def check_normalized(self, tol: float = tolerances.BEHAVIOR) -> None:
        if float(self.p.min()) < -tol:
            raise ValueError(f"behavior has negative entry {self.p.min():.3g}")
        err = self.normalization_error()
        if err > tol:
            raise ValueError(f"behavior is not normalised (max deviation {err:.3g})")

    def rows(self) -> list[tuple[int, int, int, int, float]]:
        """16 rows ``(x, y, a, b, p)`` in a fixed order."""
        return [
            (x, y, a, b, self.prob(a, b, x, y))
            for x, y, a, b in itertools.product(SETTINGS, SETTINGS, OUTCOMES, OUTCOMES)
        ]

    @classmethod
    def from_rows(cls, rows) -> "Behavior":
        rows = list(rows)
        if len(rows) != 16:
            raise ValueError(f"a behavior needs exactly 16 rows, got {len(rows)}")
        p = np.full((2, 2, 2, 2), np.nan)
        for x, y, a, b, val in rows:
            idx = (outcome_index(int(a)), outcome_index(int(b)), setting_index(int(x)), setting_index(int(y)))
            if not np.isnan(p[idx]):
                raise ValueError(f"duplicate row for x={x}, y={y}, a={a}, b={b}")
            p[idx] = float(val)
        return cls(p)

    @classmethod
    def from_correlators(cls, E, alice=None, bob=None) -> "Behavior":
        """Behavior from correlators and (setting-independent) marginal means.

        p(a,b|x,y) = (1 + a<A_x> + b<B_y> + ab E_xy) / 4.
        """
        E = np.asarray(E, dtype=float)
        alice = np.zeros(2) if alice is None else np.asarray(alice, dtype=float)
        bob = np.zeros(2) if bob is None else np.asarray(bob, dtype=float)
        p = np.empty((2, 2, 2, 2))
        for (ia, a), (ib, b), ix, iy in itertools.product(
            enumerate(OUTCOMES), enumerate(OUTCOMES), range(2), range(2)
        ):
            p[ia, ib, ix, iy] = (1 + a * alice[ix] + b * bob[iy] + a * b * E[ix, iy]) / 4
        return cls(p)

    @classmethod
    def deterministic(cls, a_of_x, b_of_y) -> "Behavior":
        """Point-mass behavior with outcomes a(x), b(y) (indexable by setting-1)."""
        p = np.zeros((2, 2, 2, 2))
        for ix, iy in itertools.product(range(2), range(2)):
            p[outcome_index(a_of_x[ix]), outcome_index(b_of_y[iy]), ix, iy] = 1.0
        return cls(p)

    def mix(self, other: "Behavior", weight: float) -> "Behavior":
        """(1 - weight) * self + weight * other."""
        return Behavior((1 - weight) * self.p + weight * other.p)

    def allclose(self, other: "Behavior", atol: float = tolerances.ARITH) -> bool:
        return bool(np.max(np.abs(self.p - other.p)) <= atol)


def pr_box(variant: int = 4) -> Behavior:
    """Popescu-Rohrlich box saturating the given CHSH variant at 4."""
    signs = chsh_signs(variant)
    return Behavior.from_correlators(signs)


def chsh_signs(variant: int) -> np.ndarray:
    """Coefficient matrix s[x-1, y-1] of the CHSH variant.

    Variants 1-4 negate the term TERM_ORDER[variant-1]; 5-8 are the negatives
    of 1-4. Variant 4 is the textbook E11 + E12 + E21 - E22.
    """
    if variant not in CHSH_VARIANTS:
        raise ValueError(f"CHSH variant must be in 1..8, got {variant!r}")
    s = np.ones((2, 2))
    x, y = TERM_ORDER[(variant - 1) % 4]
    s[x - 1, y - 1] = -1.0
    return s if variant <= 4 else -s


def chsh_value(bh: Behavior, variant: int = 4) -> float:
    bh.check_normalized()
    return float(np.sum(chsh_signs(variant) * bh.correlators()))


def chsh_values(bh: Behavior) -> dict[int, float]:
    bh.check_normalized()
    E = bh.correlators()
    return {v: float(np.sum(chsh_signs(v) * E)) for v in CHSH_VARIANTS}


def max_chsh(bh: Behavior) -> tuple[int, float]:
    """(variant, value) of the largest CHSH expression."""
    vals = chsh_values(bh)
    best = max(vals, key=lambda v: (vals[v], -v))
    return best, vals[best]
