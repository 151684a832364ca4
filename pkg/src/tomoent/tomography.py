"""Optical and spin tomograms computed from density operators.

Quadrature convention: ``X_theta = (a^dag e^{i theta} + a e^{-i theta}) / sqrt(2)``,
whose eigenstates satisfy ``<X, theta | n> = exp(-i n theta) psi_n(X)`` with
``psi_n`` the oscillator eigenfunctions.

Spin outcomes are ordered ``m = +1/2`` first, then ``m = -1/2``, for every axis.
"""
from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .hilbert import SPIN_OPERATORS, DensityOperator, PureState, as_density
from .validation import InvariantViolation, clamp_negative

TOMOGRAM_NORM_ATOL = 1e-6
SPIN_NORM_ATOL = 1e-10
AXES = ("x", "y", "z")


@dataclass(frozen=True)
class QuadratureGrid:
    """Symmetric quadrature grid ``[-x_max, x_max]`` and a set of phases in ``[0, pi)``."""

    x_max: float = 8.0
    n_points: int = 321
    thetas: tuple[float, ...] = tuple(np.arange(16) * np.pi / 16)

    def __post_init__(self):
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        if self.x_max <= 0:
            raise ValueError("x_max must be positive")
        if self.n_points < 64:
            raise ValueError(f"n_points must be at least 64, got {self.n_points}")
        th = np.asarray(self.thetas)
        if th.size == 0 or np.any(th < 0) or np.any(th >= np.pi):
            raise ValueError("theta values must lie in [0, pi)")
        if len(np.unique(th)) != th.size:
            raise ValueError("theta values must be distinct")

    @classmethod
    def uniform(cls, x_max: float = 8.0, n_points: int = 321, n_theta: int = 16) -> "QuadratureGrid":
        return cls(x_max, n_points, tuple(np.arange(n_theta) * np.pi / n_theta))

    @property
    def x_min(self) -> float:
        return -self.x_max

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.x_max, self.x_max, self.n_points)

    @property
    def dx(self) -> float:
        return 2 * self.x_max / (self.n_points - 1)

    @property
    def theta_values(self) -> np.ndarray:
        return np.asarray(self.thetas)

    def refined(self) -> "QuadratureGrid":
        """Same extent and phases with the spacing halved."""
        return QuadratureGrid(self.x_max, 2 * self.n_points - 1, self.thetas)


def hermite_functions(n_max: int, x) -> np.ndarray:
    """``psi_0(x) .. psi_{n_max}(x)`` stacked along the first axis.

    Uses the normalized three-term recurrence, which stays finite where the
    explicit ``H_n(x) exp(-x^2/2)`` form over/underflows.
    """
    if n_max < 0:
        raise ValueError(f"photon number must be non-negative, got {n_max}")
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = np.pi ** -0.25 * np.exp(-x * x / 2)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = x * np.sqrt(2.0 / (n + 1)) * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_psi(n: int, x):
    """Oscillator eigenfunction ``psi_n(x) = (2^n n! sqrt(pi))^{-1/2} H_n(x) exp(-x^2/2)``."""
    vals = hermite_functions(n, x)[n]
    return float(vals) if np.ndim(vals) == 0 else vals


def quadrature_overlap(n: int, x, theta: float):
    """``<X_theta, theta | n>``."""
    if not 0 <= theta < np.pi:
        raise ValueError("theta must lie in [0, pi)")
    return np.exp(-1j * n * theta) * hermite_psi(n, x)


@dataclass(frozen=True, eq=False)
class OpticalTomogram:
    grid: QuadratureGrid
    values: np.ndarray  # [theta, x]
    label: str = "A"

    def normalization(self) -> np.ndarray:
        return self.values.sum(axis=-1) * self.grid.dx


@dataclass(frozen=True, eq=False)
class JointFieldTomogram:
    grid: QuadratureGrid
    values: np.ndarray  # [theta_A, theta_B, x_A, x_B]
    labels: tuple[str, str] = ("A", "B")

    def normalization(self) -> np.ndarray:
        return self.values.sum(axis=(-2, -1)) * self.grid.dx ** 2


@dataclass(frozen=True, eq=False)
class SpinTomogram:
    """Outcome probabilities for every combination of per-qubit axes.

    ``values`` has shape ``(n_axes,) * k + (2,) * k``: the first ``k`` indices
    pick an axis per qubit, the last ``k`` the outcome (0 for ``m=+1/2``).
    ``shots`` is set when the table was estimated from finite samples.
    """

    labels: tuple[str, ...]
    axes: tuple[str, ...]
    values: np.ndarray
    shots: int | None = None

    def __post_init__(self):
        k = len(self.labels)
        expected = (len(self.axes),) * k + (2,) * k
        if self.values.shape != expected:
            raise ValueError(f"spin tomogram values have shape {self.values.shape}, expected {expected}")
        sums = self.values.reshape((len(self.axes),) * k + (-1,)).sum(axis=-1)
        if np.max(np.abs(sums - 1)) > SPIN_NORM_ATOL:
            raise InvariantViolation("spin tomogram setting probabilities do not sum to 1")

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    def settings(self) -> Iterator[tuple[tuple[str, ...], np.ndarray]]:
        """Yield ``(axis labels, outcome table)`` in lexicographic axis order."""
        for idx in np.ndindex(*(len(self.axes),) * self.n_qubits):
            yield tuple(self.axes[i] for i in idx), self.values[idx]

    def probabilities(self, setting: Sequence[str]) -> np.ndarray:
        idx = tuple(self.axes.index(a) for a in setting)
        return self.values[idx]


def _check_field(rho: DensityOperator, n_fields: int):
    kinds = rho.layout.kinds
    if len(kinds) != n_fields or any(k != "field" for k in kinds):
        raise ValueError(f"expected a layout of {n_fields} field factor(s), got {rho.layout.labels} ({kinds})")


def _check_norms(norms: np.ndarray, what: str) -> None:
    bad = np.max(np.abs(norms - 1))
    if bad > TOMOGRAM_NORM_ATOL:
        raise InvariantViolation(f"{what} slices integrate to 1 only within {bad:.2e}; widen the quadrature grid")


def optical_tomogram(rho_field: DensityOperator | PureState, grid: QuadratureGrid | None = None) -> OpticalTomogram:
    """``w(X, theta) = <X, theta| rho |X, theta>`` on the grid."""
    grid = grid or QuadratureGrid()
    rho = as_density(rho_field)
    _check_field(rho, 1)
    d = rho.layout.dims[0]
    psi = hermite_functions(d - 1, grid.x)
    n = np.arange(d)
    phase = np.exp(-1j * np.subtract.outer(n, n)[None] * grid.theta_values[:, None, None])
    rho_t = rho.matrix[None] * phase
    w = np.einsum("tmn,mx,nx->tx", rho_t, psi, psi).real
    w = clamp_negative(w)
    _check_norms(w.sum(axis=-1) * grid.dx, "optical tomogram")
    return OpticalTomogram(grid, w, rho.layout.labels[0])


class JointKernel:
    """Precomputed pieces of ``w(X_A, theta_A; X_B, theta_B)`` for one two-field state."""

    def __init__(self, rho: DensityOperator, grid: QuadratureGrid):
        _check_field(rho, 2)
        dA, dB = rho.layout.dims
        x = grid.x
        psiA = hermite_functions(dA - 1, x)
        psiB = hermite_functions(dB - 1, x)
        # products psi_m psi_n, indexed by the pair (m, n)
        self.pA = np.einsum("mx,nx->mnx", psiA, psiA).reshape(dA * dA, -1)
        self.pB = np.einsum("mx,nx->mnx", psiB, psiB).reshape(dB * dB, -1)
        r = rho.matrix.reshape(dA, dB, dA, dB)  # [m, m', n, n']
        self.r = np.transpose(r, (0, 2, 1, 3)).reshape(dA * dA, dB * dB)  # [(m n), (m' n')]
        self.diffA = np.subtract.outer(np.arange(dA), np.arange(dA)).reshape(-1)
        self.diffB = np.subtract.outer(np.arange(dB), np.arange(dB)).reshape(-1)

    def phase_orders(self) -> np.ndarray:
        """Distinct ``(m - n, m' - n')`` pairs carried by nonzero coherences."""
        nz = np.argwhere(np.abs(self.r) > 1e-14)
        return np.unique(np.stack([self.diffA[nz[:, 0]], self.diffB[nz[:, 1]]], axis=1), axis=0)

    def slices(self, theta_a: np.ndarray, theta_b: np.ndarray) -> np.ndarray:
        """``w[k, x_A, x_B]`` for the phase pairs ``(theta_a[k], theta_b[k])``."""
        phase = np.exp(-1j * (self.diffA[None, :, None] * theta_a[:, None, None]
                              + self.diffB[None, None, :] * theta_b[:, None, None]))
        # only the real part survives because the psi products are real
        k = (self.r[None] * phase).real
        return np.matmul(self.pA.T, k @ self.pB)


def joint_slices(rho_ab: DensityOperator | PureState, grid: QuadratureGrid) -> Iterator[np.ndarray]:
    """For each ``theta_A`` yield ``w[theta_B, x_A, x_B]`` without holding the whole table."""
    kernel = JointKernel(as_density(rho_ab), grid)
    th = grid.theta_values
    for tA in th:
        yield kernel.slices(np.full_like(th, tA), th)


def joint_optical_tomogram(rho_ab: DensityOperator | PureState, grid: QuadratureGrid | None = None) -> JointFieldTomogram:
    """Two-mode tomogram ``w(X_A, theta_A; X_B, theta_B)``.

    The full table has ``n_theta^2 * n_points^2`` entries; use
    :func:`joint_slices` when only a streaming pass is needed.
    """
    grid = grid or QuadratureGrid()
    rho = as_density(rho_ab)
    w = np.stack([clamp_negative(s) for s in joint_slices(rho, grid)])
    _check_norms(w.sum(axis=(-2, -1)) * grid.dx ** 2, "joint tomogram")
    return JointFieldTomogram(grid, w, tuple(rho.layout.labels))


def _spin_bases(axes: Sequence[str]) -> np.ndarray:
    """Rows ``<n, m|`` for each axis, ``m = +1/2`` first: shape ``(n_axes, 2, 2)``."""
    out = []
    for a in axes:
        vals, vecs = np.linalg.eigh(SPIN_OPERATORS[a])
        order = np.argsort(vals)[::-1]
        out.append(vecs[:, order].conj().T)
    return np.array(out)


SPIN_BASES = {a: _spin_bases([a])[0] for a in AXES}


def spin_tomogram(rho: DensityOperator | PureState, axes: Sequence[str] = AXES) -> SpinTomogram:
    """``w(n, m) = <n, m| rho |n, m>`` for all per-qubit axis combinations."""
    rho = as_density(rho)
    if any(k != "qubit" for k in rho.layout.kinds):
        raise ValueError(f"spin tomograms need qubit factors only, got {rho.layout.kinds}")
    axes = tuple(axes)
    for a in axes:
        if a not in SPIN_OPERATORS:
            raise ValueError(f"unknown spin axis {a!r}")
    k = len(rho.layout)
    B = _spin_bases(axes)
    letters = iter(string.ascii_letters)
    row = [next(letters) for _ in range(k)]
    col = [next(letters) for _ in range(k)]
    sett = [next(letters) for _ in range(k)]
    outc = [next(letters) for _ in range(k)]
    operands = [rho.matrix.reshape((2,) * (2 * k))]
    terms = ["".join(row + col)]
    for q in range(k):
        operands += [B, B.conj()]
        terms += [sett[q] + outc[q] + row[q], sett[q] + outc[q] + col[q]]
    spec = ",".join(terms) + "->" + "".join(sett + outc)
    w = np.einsum(spec, *operands, optimize="greedy").real
    w = clamp_negative(w)
    return SpinTomogram(tuple(rho.layout.labels), axes, w)


def reduce_tomogram(tomogram, keep: Sequence[str]):
    """Marginal tomogram of the subsystems in ``keep``.

    Discarded outcomes are summed (spins) or integrated (fields). The
    marginal does not depend on the discarded subsystems' settings for a
    physical state; for shot-estimated tables it is averaged over them.
    """
    keep = tuple(keep)
    if not keep:
        raise ValueError("reduce_tomogram needs a non-empty set of subsystems to keep")
    if isinstance(tomogram, SpinTomogram):
        labels = tomogram.labels
        for lab in keep:
            if lab not in labels:
                raise KeyError(f"unknown subsystem {lab!r}; tomogram has {labels}")
        k = len(labels)
        drop = [i for i, lab in enumerate(labels) if lab not in keep]
        w = tomogram.values.sum(axis=tuple(k + i for i in drop))
        w = w.mean(axis=tuple(drop)) if drop else w
        kept = tuple(lab for lab in labels if lab in keep)
        return SpinTomogram(kept, tomogram.axes, w, tomogram.shots)
    if isinstance(tomogram, JointFieldTomogram):
        for lab in keep:
            if lab not in tomogram.labels:
                raise KeyError(f"unknown subsystem {lab!r}; tomogram has {tomogram.labels}")
        if set(keep) == set(tomogram.labels):
            return tomogram
        dx = tomogram.grid.dx
        if keep[0] == tomogram.labels[0]:
            w = tomogram.values.sum(axis=3).mean(axis=1) * dx
        else:
            w = tomogram.values.sum(axis=2).mean(axis=0) * dx
        return OpticalTomogram(tomogram.grid, w, keep[0])
    if isinstance(tomogram, OpticalTomogram):
        if tuple(keep) != (tomogram.label,):
            raise KeyError(f"an optical tomogram of {tomogram.label!r} cannot be reduced to {keep}")
        return tomogram
    raise TypeError(f"cannot reduce a {type(tomogram).__name__}")
