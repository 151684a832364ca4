"""Tensor-product Hilbert spaces, reduced states and unitary evolution.

Index convention: the leftmost factor of a layout is the most significant
digit of the joint index (row-major Kronecker order), everywhere in the
package.

Qubit basis convention: index 0 is the ground state ``|g>`` and index 1 the
excited state ``|e>``. The spin observables are the spin-1/2 operators
``sigma_x = (|e><g| + |g><e|)/2`` etc., so ``sigma_z = diag(-1/2, +1/2)``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .validation import (
    HERMITIAN_ATOL,
    check_density_matrix,
    check_hermitian,
    check_statevector,
)

EIGEN_CUTOFF = 1e-14

SIGMA_X = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = 0.5 * np.array([[0, 1j], [-1j, 0]], dtype=complex)
SIGMA_Z = 0.5 * np.array([[-1, 0], [0, 1]], dtype=complex)
# sigma_+ = sigma_x + i sigma_y = |e><g|
SIGMA_PLUS = SIGMA_X + 1j * SIGMA_Y
SIGMA_MINUS = SIGMA_X - 1j * SIGMA_Y
SPIN_OPERATORS = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

GROUND = np.array([1, 0], dtype=complex)
EXCITED = np.array([0, 1], dtype=complex)


def annihilation(dim: int) -> np.ndarray:
    """Truncated bosonic annihilation operator on photon numbers 0..dim-1."""
    return np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)


def number_operator(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim)).astype(complex)


@dataclass(frozen=True)
class Factor:
    label: str
    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in ("field", "qubit"):
            raise ValueError(f"factor kind must be 'field' or 'qubit', got {self.kind!r}")
        if self.dim < 1:
            raise ValueError(f"factor {self.label!r} has non-positive dimension {self.dim}")
        if self.kind == "qubit" and self.dim != 2:
            raise ValueError(f"qubit factor {self.label!r} must have dim 2, got {self.dim}")


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered tensor-factor structure of a joint Hilbert space."""

    factors: tuple[Factor, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        object.__setattr__(self, "factors", factors)
        if not factors:
            raise ValueError("a layout needs at least one factor")
        labels = [f.label for f in factors]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate factor labels in {labels}")

    @classmethod
    def build(cls, *specs: tuple[str, str, int] | tuple[str, str]) -> "SubsystemLayout":
        """``SubsystemLayout.build(("A", "field", 3), ("C", "qubit"))``."""
        factors = []
        for spec in specs:
            label, kind, *rest = spec
            dim = rest[0] if rest else 2
            factors.append(Factor(label, kind, dim))
        return cls(tuple(factors))

    @classmethod
    def qubits(cls, n: int, prefix: str = "q") -> "SubsystemLayout":
        return cls(tuple(Factor(f"{prefix}{i}", "qubit", 2) for i in range(n)))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(f.label for f in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.dim for f in self.factors)

    @property
    def kinds(self) -> tuple[str, ...]:
        return tuple(f.kind for f in self.factors)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown subsystem label {label!r}; layout has {self.labels}") from None

    def factor(self, label: str) -> Factor:
        return self.factors[self.index(label)]

    def subset(self, labels: Iterable[str]) -> "SubsystemLayout":
        """Layout of the given factors, kept in their original order."""
        wanted = set(labels)
        for label in wanted:
            self.index(label)
        return SubsystemLayout(tuple(f for f in self.factors if f.label in wanted))

    def __len__(self) -> int:
        return len(self.factors)


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    layout: SubsystemLayout

    def __post_init__(self):
        amps = check_statevector(self.amplitudes, self.layout.total_dim)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def density(self) -> "DensityOperator":
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()), self.layout)

    def expectation(self, op: "HermitianOperator | np.ndarray") -> float:
        matrix = op.matrix if isinstance(op, HermitianOperator) else np.asarray(op)
        return float(np.real(np.vdot(self.amplitudes, matrix @ self.amplitudes)))

    def fidelity(self, other: "PureState") -> float:
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: np.ndarray
    layout: SubsystemLayout

    def __post_init__(self):
        rho = check_density_matrix(self.matrix, self.layout.total_dim)
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True)
class EigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def propagator(self, t: float) -> np.ndarray:
        v = self.eigenvectors
        return (v * np.exp(-1j * self.eigenvalues * t)) @ v.conj().T


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    matrix: np.ndarray
    layout: SubsystemLayout

    def __post_init__(self):
        m = check_hermitian(self.matrix, self.layout.total_dim, atol=HERMITIAN_ATOL)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @functools.cached_property
    def eigensystem(self) -> EigenSystem:
        # one eigendecomposition per Hamiltonian, reused across the time grid
        values, vectors = np.linalg.eigh(self.matrix)
        return EigenSystem(values, vectors)

    def commutator_norm(self, other: "HermitianOperator | np.ndarray") -> float:
        b = other.matrix if isinstance(other, HermitianOperator) else np.asarray(other)
        return float(np.linalg.norm(self.matrix @ b - b @ self.matrix))


def tensor_product(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product of vectors or of square matrices, in the given order."""
    factors = [np.asarray(f) for f in factors]
    if not factors:
        raise ValueError("tensor_product needs at least one factor")
    ranks = {f.ndim for f in factors}
    if len(ranks) != 1:
        raise ValueError("cannot mix vectors and matrices in a tensor product")
    rank = ranks.pop()
    if rank not in (1, 2):
        raise ValueError(f"factors must be vectors or matrices, got rank {rank}")
    if rank == 2 and any(f.shape[0] != f.shape[1] for f in factors):
        raise ValueError("matrix factors must be square")
    return functools.reduce(np.kron, factors)


def embed(op: np.ndarray, slot: str, layout: SubsystemLayout) -> np.ndarray:
    """Place a single-factor operator (not necessarily Hermitian) on ``slot``."""
    op = np.asarray(op, dtype=complex)
    k = layout.index(slot)
    dim = layout.dims[k]
    if op.shape != (dim, dim):
        raise ValueError(f"operator shape {op.shape} does not match factor {slot!r} of dim {dim}")
    return tensor_product([op if i == k else np.eye(d) for i, d in enumerate(layout.dims)])


def embed_operator(
    op: "HermitianOperator | np.ndarray", slot: str, layout: SubsystemLayout
) -> HermitianOperator:
    matrix = op.matrix if isinstance(op, HermitianOperator) else op
    return HermitianOperator(embed(matrix, slot, layout), layout)


def as_density(state: "PureState | DensityOperator") -> DensityOperator:
    if isinstance(state, PureState):
        return state.density()
    if isinstance(state, DensityOperator):
        return state
    raise TypeError(f"expected PureState or DensityOperator, got {type(state).__name__}")


def partial_trace(rho: "DensityOperator | PureState", keep: Iterable[str]) -> DensityOperator:
    """Reduced density operator on ``keep``; factor order follows the layout."""
    keep = set(keep)
    if not keep:
        raise ValueError("partial_trace needs a non-empty set of labels to keep")
    layout = rho.layout
    for label in keep:
        layout.index(label)
    kept = [i for i, lab in enumerate(layout.labels) if lab in keep]
    traced = [i for i in range(len(layout)) if i not in kept]
    sub = layout.subset(keep)
    d_keep = sub.total_dim

    if isinstance(rho, PureState):
        psi = rho.amplitudes.reshape(layout.dims)
        psi = np.transpose(psi, kept + traced).reshape(d_keep, -1)
        return DensityOperator(psi @ psi.conj().T, sub)

    rho = as_density(rho)
    if not traced:
        return rho
    n = len(layout)
    t = rho.matrix.reshape(layout.dims * 2)
    t = np.transpose(t, kept + traced + [n + i for i in kept] + [n + i for i in traced])
    d_tr = int(np.prod([layout.dims[i] for i in traced]))
    t = t.reshape(d_keep, d_tr, d_keep, d_tr)
    return DensityOperator(np.einsum("ajbj->ab", t), sub)


def svne(rho: "DensityOperator | PureState", log_base: float = 2) -> float:
    """Von Neumann entropy ``-Tr(rho log rho)``."""
    if isinstance(rho, PureState):
        return 0.0
    lam = np.linalg.eigvalsh(rho.matrix)
    lam = lam[lam > EIGEN_CUTOFF]
    s = -float(np.sum(lam * np.log(lam)))
    if log_base == 2:
        s /= np.log(2)
    elif log_base != np.e:
        raise ValueError(f"log_base must be 2 or e, got {log_base}")
    return max(s, 0.0)


def sle(rho: "DensityOperator | PureState") -> float:
    """Linear entropy ``1 - Tr(rho^2)``."""
    return 1.0 - as_density(rho).purity()


def evolve(H: HermitianOperator, psi0: PureState, t: float) -> PureState:
    """``exp(-i H t) psi0`` with hbar = 1, via the cached eigensystem of ``H``."""
    if psi0.layout != H.layout:
        raise ValueError("Hamiltonian and state live on different layouts")
    if t == 0:
        return psi0
    es = H.eigensystem
    v = es.eigenvectors
    coeffs = v.conj().T @ psi0.amplitudes
    amps = v @ (np.exp(-1j * es.eigenvalues * t) * coeffs)
    return PureState(amps, psi0.layout)


def evolve_many(H: HermitianOperator, psi0: PureState, times: Sequence[float]) -> list[PureState]:
    es = H.eigensystem
    v = es.eigenvectors
    coeffs = v.conj().T @ psi0.amplitudes
    times = np.asarray(times, dtype=float)
    amps = (np.exp(-1j * np.outer(times, es.eigenvalues)) * coeffs) @ v.T
    return [psi0 if t == 0 else PureState(a, psi0.layout) for t, a in zip(times, amps)]


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary (QR of a complex Ginibre matrix)."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_pure_state(layout: SubsystemLayout, rng: np.random.Generator) -> PureState:
    z = rng.standard_normal(layout.total_dim) + 1j * rng.standard_normal(layout.total_dim)
    return PureState(z / np.linalg.norm(z), layout)


def random_density(layout: SubsystemLayout, rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    d = layout.total_dim
    rank = d if rank is None else rank
    z = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = z @ z.conj().T
    return DensityOperator(rho / np.trace(rho).real, layout)
