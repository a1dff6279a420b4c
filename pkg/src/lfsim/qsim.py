"""Dense statevector / density-matrix simulator addressed by qubit labels.

Register order is the order of ``labels``; the first label is the most
significant bit of a computational-basis index. Computational basis state
``|0>`` is read as outcome ``+1`` and ``|1>`` as ``-1`` by the callers that
need signed outcomes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from lfsim import tolerances

MAX_QUBITS = 16

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
PAULIS = (I2, X, Y, Z)


def ry(theta: float) -> np.ndarray:
    """Y rotation; its columns are the +1/-1 eigenvectors of cos(t) Z + sin(t) X."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


class DimensionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QuantumState:
    """A pure (vector) or mixed (matrix) state over labelled qubits."""

    data: np.ndarray
    labels: tuple[str, ...]
    _checked: bool = field(default=True, repr=False)

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=complex)
        labels = tuple(self.labels)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "labels", labels)
        n = len(labels)
        if n == 0:
            raise DimensionError("a register needs at least one qubit")
        if len(set(labels)) != n:
            raise ValueError(f"duplicate register labels: {labels}")
        if n > MAX_QUBITS:
            raise DimensionError(f"{n} qubits exceeds the dense cap of {MAX_QUBITS}")
        dim = 2**n
        if data.shape not in ((dim,), (dim, dim)):
            raise DimensionError(f"data of shape {data.shape} does not fit {n} qubits")
        if self._checked:
            self._validate()

    def _validate(self) -> None:
        if self.data.ndim == 1:
            norm = np.vdot(self.data, self.data).real
            if abs(norm - 1.0) > tolerances.ARITH * 10:
                raise ValueError(f"state vector has squared norm {norm!r}, expected 1")
            return
        rho = self.data
        tr = np.trace(rho)
        if abs(tr - 1.0) > tolerances.ARITH * 10:
            raise ValueError(f"density operator has trace {tr!r}, expected 1")
        if np.max(np.abs(rho - rho.conj().T)) > tolerances.ARITH * 10:
            raise ValueError("density operator is not Hermitian")
        if np.linalg.eigvalsh(rho).min() < -tolerances.STRUCT:
            raise ValueError("density operator is not positive semidefinite")

    @classmethod
    def _unchecked(cls, data: np.ndarray, labels: Sequence[str]) -> "QuantumState":
        # results of trace/positivity-preserving maps; invariants hold by construction
        return cls(data, tuple(labels), _checked=False)

    @property
    def mode(self) -> str:
        return "pure" if self.data.ndim == 1 else "mixed"

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    def density_matrix(self) -> np.ndarray:
        if self.mode == "mixed":
            return self.data
        return np.outer(self.data, self.data.conj())

    def to_mixed(self) -> "QuantumState":
        if self.mode == "mixed":
            return self
        return QuantumState._unchecked(self.density_matrix(), self.labels)

    def axes(self, targets: Sequence[str]) -> list[int]:
        missing = [t for t in targets if t not in self.labels]
        if missing:
            raise KeyError(f"labels {missing} not in register {self.labels}")
        return [self.labels.index(t) for t in targets]

    def reorder(self, labels: Sequence[str]) -> "QuantumState":
        """Same state with the register permuted into ``labels`` order."""
        labels = tuple(labels)
        if labels == self.labels:
            return self
        if sorted(labels) != sorted(self.labels):
            raise ValueError(f"cannot reorder {self.labels} into {labels}")
        perm = self.axes(labels)
        n = self.n_qubits
        if self.mode == "pure":
            t = self.data.reshape((2,) * n).transpose(perm)
            return QuantumState._unchecked(t.reshape(-1), labels)
        t = self.data.reshape((2,) * (2 * n)).transpose(perm + [p + n for p in perm])
        return QuantumState._unchecked(t.reshape(2**n, 2**n), labels)


@dataclass(frozen=True, eq=False)
class UnitaryOp:
    matrix: np.ndarray
    targets: tuple[str, ...]

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        targets = (self.targets,) if isinstance(self.targets, str) else tuple(self.targets)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "targets", targets)
        k = len(targets)
        if len(set(targets)) != k:
            raise ValueError(f"duplicate targets {targets}")
        if m.shape != (2**k, 2**k):
            raise DimensionError(f"matrix of shape {m.shape} does not act on {k} qubits")
        if np.max(np.abs(m.conj().T @ m - np.eye(2**k))) > tolerances.STRUCT:
            raise ValueError("matrix is not unitary")

    def dagger(self) -> "UnitaryOp":
        return UnitaryOp(self.matrix.conj().T, self.targets)


@dataclass(frozen=True, eq=False)
class NoiseChannel:
    kraus_operators: tuple[np.ndarray, ...]
    targets: tuple[str, ...]

    def __post_init__(self) -> None:
        targets = (self.targets,) if isinstance(self.targets, str) else tuple(self.targets)
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus_operators)
        object.__setattr__(self, "kraus_operators", ops)
        object.__setattr__(self, "targets", targets)
        dim = 2 ** len(targets)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        for k in ops:
            if k.shape != (dim, dim):
                raise DimensionError(f"Kraus operator of shape {k.shape} on {len(targets)} qubits")
        total = sum(k.conj().T @ k for k in ops)
        if np.max(np.abs(total - np.eye(dim))) > tolerances.STRUCT:
            raise ValueError("Kraus operators are not trace preserving (sum K^dag K != I)")


def depolarizing(p: float, targets: Sequence[str] | str) -> NoiseChannel:
    """rho -> (1-p) rho + p (I/2^k) (x) Tr_targets(rho) on the k targeted qubits.

    Uses the Pauli twirl identity 4^-k sum_P P rho P^dag = (I/2^k) (x) Tr_targets rho.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing parameter must lie in [0, 1], got {p}")
    targets = (targets,) if isinstance(targets, str) else tuple(targets)
    k = len(targets)
    if k not in (1, 2, 3):
        raise ValueError("depolarizing channel is provided on 1 to 3 qubits")
    weight = p / 4**k
    ops = []
    for idx, paulis in enumerate(itertools.product(PAULIS, repeat=k)):
        mat = paulis[0]
        for q in paulis[1:]:
            mat = np.kron(mat, q)
        coeff = 1.0 - p + weight if idx == 0 else weight
        if coeff > 0:
            ops.append(np.sqrt(coeff) * mat)
    return NoiseChannel(tuple(ops), targets)


def basis_state(labels: Sequence[str], bits: Sequence[int] | None = None) -> QuantumState:
    labels = tuple(labels)
    bits = [0] * len(labels) if bits is None else list(bits)
    if len(bits) != len(labels):
        raise DimensionError("one bit per label is required")
    vec = np.zeros(2 ** len(labels), dtype=complex)
    vec[int("".join(str(int(b)) for b in bits), 2)] = 1.0
    return QuantumState(vec, labels)


def bell_state(labels: Sequence[str] = ("QA", "QB"), kind: str = "phi+") -> QuantumState:
    s = 1 / np.sqrt(2)
    vecs = {
        "phi+": [s, 0, 0, s],
        "phi-": [s, 0, 0, -s],
        "psi+": [0, s, s, 0],
        "psi-": [0, s, -s, 0],
    }
    if kind not in vecs:
        raise ValueError(f"unknown Bell state {kind!r}; choose from {sorted(vecs)}")
    return QuantumState(np.array(vecs[kind], dtype=complex), tuple(labels))


def tensor(*states: QuantumState) -> QuantumState:
    """Tensor product; the result is mixed if any factor is mixed."""
    labels: tuple[str, ...] = ()
    for s in states:
        labels += s.labels
    if any(s.mode == "mixed" for s in states):
        data = states[0].density_matrix()
        for s in states[1:]:
            data = np.kron(data, s.density_matrix())
    else:
        data = states[0].data
        for s in states[1:]:
            data = np.kron(data, s.data)
    return QuantumState._unchecked(data, labels)


def _apply_on_axes(tensor_: np.ndarray, mat: np.ndarray, axes: list[int]) -> np.ndarray:
    k = len(axes)
    m = mat.reshape((2,) * (2 * k))
    out = np.tensordot(m, tensor_, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def _apply_matrix(state: QuantumState, mat: np.ndarray, targets: Sequence[str]) -> np.ndarray:
    """Return K rho K^dag (or K psi) with K embedded on ``targets``."""
    axes = state.axes(targets)
    n = state.n_qubits
    if state.mode == "pure":
        t = _apply_on_axes(state.data.reshape((2,) * n), mat, axes)
        return t.reshape(-1)
    t = state.data.reshape((2,) * (2 * n))
    t = _apply_on_axes(t, mat, axes)
    t = _apply_on_axes(t, mat.conj(), [a + n for a in axes])
    return t.reshape(2**n, 2**n)


def apply_unitary(state: QuantumState, op: UnitaryOp) -> QuantumState:
    return QuantumState._unchecked(_apply_matrix(state, op.matrix, op.targets), state.labels)


def apply_channel(state: QuantumState, ch: NoiseChannel) -> QuantumState:
    """rho -> sum_k K rho K^dag; pure inputs are promoted to density operators."""
    mixed = state.to_mixed()
    out = sum(_apply_matrix(mixed, k, ch.targets) for k in ch.kraus_operators)
    # symmetrise away round-off so downstream Hermiticity checks stay tight
    out = 0.5 * (out + out.conj().T)
    return QuantumState._unchecked(out, state.labels)


def partial_trace(state: QuantumState, keep_labels: Sequence[str]) -> QuantumState:
    """Reduced state on ``keep_labels`` (returned in that order)."""
    keep = tuple(keep_labels)
    if not keep:
        raise ValueError("keep set must be non-empty")
    if len(set(keep)) != len(keep):
        raise ValueError(f"duplicate labels in keep set {keep}")
    if keep == state.labels:
        return state
    keep_axes = state.axes(keep)
    n = state.n_qubits
    k = len(keep)
    drop_axes = [i for i in range(n) if i not in keep_axes]
    if state.mode == "pure":
        t = state.data.reshape((2,) * n).transpose(keep_axes + drop_axes)
        t = t.reshape(2**k, -1)
        rho = t @ t.conj().T
    else:
        t = state.data.reshape((2,) * (2 * n))
        t = t.transpose(keep_axes + drop_axes + [a + n for a in keep_axes] + [a + n for a in drop_axes])
        t = t.reshape(2**k, 2 ** (n - k), 2**k, 2 ** (n - k))
        rho = np.einsum("ajbj->ab", t)
    return QuantumState._unchecked(rho, keep)


def outcome_probabilities(state: QuantumState, basis: UnitaryOp) -> np.ndarray:
    """Distribution over the basis given by the columns of ``basis.matrix``.

    Index ``i`` is the bit string of the outcome, first target most significant.
    """
    rotated = _apply_matrix(state, basis.matrix.conj().T, basis.targets)
    rotated_state = QuantumState._unchecked(rotated, state.labels)
    reduced = partial_trace(rotated_state, basis.targets)
    if reduced.mode == "pure":
        probs = np.abs(reduced.data) ** 2
    else:
        probs = np.real(np.diag(reduced.data)).copy()
    probs[probs < 0] = 0.0
    return probs / probs.sum()


@dataclass(frozen=True)
class MeasurementResult:
    probabilities: np.ndarray
    post_states: tuple[QuantumState | None, ...]


def measure(state: QuantumState, basis: UnitaryOp) -> MeasurementResult:
    """Projective measurement of ``basis.targets`` in the basis ``basis.matrix``.

    Post-measurement states are normalised; outcomes of zero probability get
    ``None``.
    """
    probs = outcome_probabilities(state, basis)
    k = len(basis.targets)
    post: list[QuantumState | None] = []
    for i in range(2**k):
        if probs[i] <= tolerances.ARITH:
            post.append(None)
            continue
        vec = basis.matrix[:, i]
        projector = np.outer(vec, vec.conj())
        data = _apply_matrix(state, projector, basis.targets)
        if state.mode == "pure":
            data = data / np.linalg.norm(data)
        else:
            data = data / np.trace(data).real
        post.append(QuantumState._unchecked(data, state.labels))
    return MeasurementResult(probs, tuple(post))


def expectation(state: QuantumState, observable: np.ndarray, targets: Sequence[str]) -> float:
    """<O> for a Hermitian ``observable`` acting on ``targets``."""
    reduced = partial_trace(state, tuple(targets))
    rho = reduced.density_matrix()
    return float(np.real(np.trace(rho @ observable)))


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(s1: QuantumState, s2: QuantumState) -> float:
    """Uhlmann fidelity (squared convention): |<a|b>|^2 for pure states."""
    if sorted(s1.labels) != sorted(s2.labels):
        raise DimensionError(f"registers differ: {s1.labels} vs {s2.labels}")
    s2 = s2.reorder(s1.labels)
    if s1.mode == "pure" and s2.mode == "pure":
        f = abs(np.vdot(s1.data, s2.data)) ** 2
    elif s1.mode == "pure":
        f = np.real(np.vdot(s1.data, s2.data @ s1.data))
    elif s2.mode == "pure":
        f = np.real(np.vdot(s2.data, s1.data @ s2.data))
    else:
        r = _psd_sqrt(s1.data)
        f = np.sum(np.sqrt(np.clip(np.linalg.eigvalsh(r @ s2.data @ r), 0.0, None))) ** 2
    return float(min(max(f, 0.0), 1.0))


def random_state(labels: Sequence[str], rng: np.random.Generator) -> QuantumState:
    n = len(labels)
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return QuantumState(v / np.linalg.norm(v), tuple(labels))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
