"""Shared generators for randomized behaviors."""

from __future__ import annotations

import numpy as np

from lfsim import qsim
from lfsim.behavior import Behavior, pr_box
from lfsim.lfpoly import enumerate_lf_vertices

VERTICES = enumerate_lf_vertices()
UNIFORM = Behavior(np.full((2, 2, 2, 2), 0.25))


def local_mixture(rng: np.random.Generator, n_vertices: int | None = None) -> Behavior:
    k = int(rng.integers(1, 17)) if n_vertices is None else n_vertices
    idx = rng.choice(16, size=k, replace=False)
    w = rng.dirichlet(np.ones(k))
    return Behavior(sum(wi * VERTICES[i].p for wi, i in zip(w, idx)))


def quantum_behavior(rng: np.random.Generator, mixed: bool = False) -> Behavior:
    state = qsim.random_state(("A", "B"), rng)
    if mixed:
        other = qsim.random_state(("A", "B"), rng)
        lam = rng.random()
        state = qsim.QuantumState(lam * state.density_matrix() + (1 - lam) * other.density_matrix(), ("A", "B"))
    alice = [qsim.random_unitary(2, rng) for _ in range(2)]
    bob = [qsim.random_unitary(2, rng) for _ in range(2)]
    p = np.empty((2, 2, 2, 2))
    for ix in range(2):
        for iy in range(2):
            basis = qsim.UnitaryOp(np.kron(alice[ix], bob[iy]), ("A", "B"))
            p[:, :, ix, iy] = qsim.outcome_probabilities(state, basis).reshape(2, 2)
    return Behavior(p)


def isotropic(v: float, variant: int = 4) -> Behavior:
    """v * Tsirelson-optimal correlators for ``variant`` plus white noise."""
    from lfsim.behavior import chsh_signs

    return Behavior.from_correlators(v * chsh_signs(variant) / np.sqrt(2))


def random_behavior(rng: np.random.Generator) -> Behavior:
    """Mixtures of local deterministic, PR and quantum behaviors."""
    kind = int(rng.integers(0, 5))
    if kind == 0:
        return local_mixture(rng)
    if kind == 1:
        return pr_box(int(rng.integers(1, 9))).mix(local_mixture(rng), float(rng.random()))
    if kind == 2:
        return quantum_behavior(rng, mixed=bool(rng.integers(0, 2)))
    if kind == 3:
        return quantum_behavior(rng).mix(UNIFORM, float(rng.random()))
    w = rng.dirichlet(np.ones(3))
    parts = (local_mixture(rng), pr_box(int(rng.integers(1, 9))), quantum_behavior(rng))
    return Behavior(sum(wi * b.p for wi, b in zip(w, parts)))
