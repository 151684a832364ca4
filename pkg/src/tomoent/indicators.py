"""Tomographic entropies, mutual information and entanglement indicators.

Tomographic entropies use natural logarithms; the quantum mutual
information uses base 2 (bits). The mutual information of two tomogram
blocks is ``S(A) + S(B) - S(A, B)``, which is non-negative.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .hilbert import DensityOperator, HermitianOperator, PureState, as_density, evolve_many, partial_trace, svne
from .tomography import AXES, JointFieldTomogram, JointKernel, QuadratureGrid, SpinTomogram, reduce_tomogram, spin_tomogram
from .validation import InvariantViolation, check_probabilities, clamp_negative

GRID_NORM_ATOL = 1e-6
MARGINAL_ATOL = 1e-8


@dataclass(frozen=True)
class BasisSettingValue:
    """Mutual information (nats) of one basis setting: spin axes or a ``(theta_A, theta_B)`` pair."""

    setting: tuple
    mi: float

    def __post_init__(self):
        if self.mi < -1e-10:
            raise InvariantViolation(f"negative mutual information {self.mi} at setting {self.setting}")


@dataclass(frozen=True)
class IndicatorSample:
    gt: float
    partition: tuple[tuple[str, ...], tuple[str, ...]]
    xi_tei: float
    xi_tei_prime: float
    xi_qmi: float


def _neg_xlogx_sum(p: np.ndarray, axis=None) -> np.ndarray:
    safe = np.where(p > 0, p, 1.0)
    return -np.sum(p * np.log(safe), axis=axis)


def _slice_entropies(w: np.ndarray) -> np.ndarray:
    """``-sum w log w`` over the last two axes of a non-negative stack."""
    logw = np.zeros_like(w)
    np.log(w, out=logw, where=w > 0)
    return -np.einsum("txy,txy->t", w, logw)


def entropy_discrete(p) -> float:
    """Shannon entropy in nats; zero-probability terms are skipped."""
    p = check_probabilities(p)
    return float(_neg_xlogx_sum(p))


def entropy_grid(w, dx: float) -> float:
    """Differential entropy ``-sum w log w dx^d`` of a density sampled on a regular grid."""
    w = np.asarray(w, dtype=float)
    cell = dx ** w.ndim
    if w.size and w.min() < -1e-10:
        raise InvariantViolation(f"negative density value {w.min():.3e}")
    w = np.clip(w, 0, None)
    total = w.sum() * cell
    if abs(total - 1) > GRID_NORM_ATOL:
        raise InvariantViolation(f"density integrates to {total!r}, not 1")
    return float(_neg_xlogx_sum(w) * cell + 0.0)


def mutual_information(joint, marginal_a=None, marginal_b=None, *, dx: float | None = None) -> float:
    """``S(A) + S(B) - S(A, B)`` in nats.

    ``joint`` is a 2-D table with A outcomes along rows. Without ``dx`` it is a
    probability table; with ``dx`` it is a density sampled on a grid of that
    spacing in both directions. Missing marginals are taken from the joint.
    """
    joint = np.asarray(joint, dtype=float)
    if joint.ndim != 2:
        raise ValueError(f"joint table must be 2-D, got shape {joint.shape}")
    step = 1.0 if dx is None else dx
    derived_a = joint.sum(axis=1) * step
    derived_b = joint.sum(axis=0) * step
    for given, derived, name in ((marginal_a, derived_a, "A"), (marginal_b, derived_b, "B")):
        if given is not None and np.max(np.abs(np.asarray(given) - derived)) * step > MARGINAL_ATOL:
            raise ValueError(f"marginal {name} is inconsistent with the joint table")
    a = derived_a if marginal_a is None else np.asarray(marginal_a, dtype=float)
    b = derived_b if marginal_b is None else np.asarray(marginal_b, dtype=float)
    if dx is None:
        s_a, s_b, s_ab = entropy_discrete(a), entropy_discrete(b), entropy_discrete(joint)
    else:
        s_a, s_b, s_ab = entropy_grid(a, dx), entropy_grid(b, dx), entropy_grid(joint, dx)
    return s_a + s_b - s_ab


def _blocks_for(labels: Sequence[str], block_a, block_b) -> tuple[tuple[str, ...], tuple[str, ...]]:
    if block_a is None and block_b is None:
        half = len(labels) // 2
        block_a, block_b = labels[:half], labels[half:]
    block_a, block_b = tuple(block_a), tuple(block_b)
    if set(block_a) & set(block_b):
        raise ValueError(f"blocks {block_a} and {block_b} overlap")
    for lab in block_a + block_b:
        if lab not in labels:
            raise KeyError(f"unknown subsystem {lab!r}; have {tuple(labels)}")
    for block in (block_a, block_b):
        if len(block) not in (1, 2):
            raise ValueError(f"spin blocks must hold 1 or 2 qubits, got {block}")
    return block_a, block_b


def spin_setting_values(tomogram: SpinTomogram, block_a=None, block_b=None) -> list[BasisSettingValue]:
    """Mutual information between two qubit blocks for every per-qubit axis combination."""
    labels = tomogram.labels
    block_a, block_b = _blocks_for(labels, block_a, block_b)
    used = [lab for lab in labels if lab in block_a or lab in block_b]
    if len(used) < len(labels):
        tomogram = reduce_tomogram(tomogram, used)
        labels = tomogram.labels
    k = len(labels)
    n_ax = len(tomogram.axes)
    order = [labels.index(q) for q in block_a + block_b]
    w = tomogram.values.reshape((n_ax ** k,) + (2,) * k)
    w = np.transpose(w, [0] + [1 + i for i in order]).reshape(n_ax ** k, 2 ** len(block_a), 2 ** len(block_b))
    s_ab = _neg_xlogx_sum(w, axis=(1, 2))
    s_a = _neg_xlogx_sum(w.sum(axis=2), axis=1)
    s_b = _neg_xlogx_sum(w.sum(axis=1), axis=1)
    mi = s_a + s_b - s_ab
    settings = list(np.ndindex(*(n_ax,) * k))
    out = []
    for idx, value in zip(settings, mi):
        # report the setting in block order, matching the A/B split
        axes = {labels[q]: tomogram.axes[i] for q, i in enumerate(idx)}
        out.append(BasisSettingValue(tuple(axes[q] for q in block_a + block_b), float(value)))
    return out


def _spin_pair_tomogram(state, block_a, block_b, axes) -> tuple[SpinTomogram, tuple, tuple]:
    if isinstance(state, SpinTomogram):
        a, b = _blocks_for(state.labels, block_a, block_b)
        return state, a, b
    layout = state.layout
    a, b = _blocks_for(layout.labels, block_a, block_b)
    rho = partial_trace(state, a + b) if set(a + b) != set(layout.labels) else as_density(state)
    return spin_tomogram(rho, axes), a, b


def xi_tei_spins(state, block_a=None, block_b=None, axes: Sequence[str] = AXES) -> float:
    """Tomographic entanglement indicator between two qubit blocks, in nats.

    ``state`` may be a state, a density operator or a ready spin tomogram.
    Blocks default to the first and second half of the qubits.
    """
    tomo, a, b = _spin_pair_tomogram(state, block_a, block_b, axes)
    return float(np.mean([v.mi for v in spin_setting_values(tomo, a, b)]))


def field_setting_values(rho_ab, grid: QuadratureGrid | None = None, chunk: int = 16) -> list[BasisSettingValue]:
    """Mutual information of the joint quadrature distribution for every ``(theta_A, theta_B)``.

    Settings whose phase factors coincide on every nonzero coherence of
    ``rho_ab`` give the same distribution; each distinct one is evaluated once.
    """
    grid = grid or QuadratureGrid()
    kernel = JointKernel(as_density(rho_ab), grid)
    dx = grid.dx
    th = grid.theta_values
    t_a, t_b = (m.ravel() for m in np.meshgrid(th, th, indexing="ij"))
    orders = kernel.phase_orders()
    phases = np.exp(-1j * (t_a[:, None] * orders[:, 0] + t_b[:, None] * orders[:, 1]))
    key = np.round(np.concatenate([phases.real, phases.imag], axis=1), 11)
    _, first, inverse = np.unique(key, axis=0, return_index=True, return_inverse=True)

    mi_distinct = np.empty(len(first))
    for start in range(0, len(first), chunk):
        sel = first[start:start + chunk]
        w = clamp_negative(kernel.slices(t_a[sel], t_b[sel]))
        w_a = w.sum(axis=2) * dx
        w_b = w.sum(axis=1) * dx
        norm = w_a.sum(axis=1) * dx
        if np.max(np.abs(norm - 1)) > GRID_NORM_ATOL:
            raise InvariantViolation("joint tomogram slice is not normalized; widen the quadrature grid")
        s_ab = _slice_entropies(w) * dx * dx
        s_a = _neg_xlogx_sum(w_a, axis=1) * dx
        s_b = _neg_xlogx_sum(w_b, axis=1) * dx
        mi_distinct[start:start + chunk] = s_a + s_b - s_ab
    mi = mi_distinct[np.ravel(inverse)]
    return [BasisSettingValue((float(a), float(b)), float(m)) for a, b, m in zip(t_a, t_b, mi)]


def xi_tei_fields(rho_ab, grid: QuadratureGrid | None = None) -> float:
    """Mean quadrature mutual information over the grid's ``theta_A x theta_B`` product, in nats."""
    return float(np.mean([v.mi for v in field_setting_values(rho_ab, grid)]))


def xi_tei_prime(values: Iterable[BasisSettingValue | float]) -> float:
    """Mean over the dominant settings: those exceeding the mean by more than one
    (population) standard deviation. Falls back to the plain mean when none do."""
    mis = np.array([v.mi if isinstance(v, BasisSettingValue) else float(v) for v in values])
    if mis.size == 0:
        raise ValueError("xi_tei_prime needs at least one value")
    mean, std = mis.mean(), mis.std()
    dominant = mis[mis > mean + std]
    return float(dominant.mean()) if dominant.size else float(mean)


def xi_qmi(state: PureState | DensityOperator, partition) -> float:
    """Quantum mutual information ``S(A) + S(B) - S(AB)`` in bits."""
    labels_a, labels_b = (tuple(p) for p in partition)
    if set(labels_a) & set(labels_b):
        raise ValueError(f"partition blocks {labels_a} and {labels_b} overlap")
    if not labels_a or not labels_b:
        raise ValueError("partition blocks must be non-empty")
    rho_ab = partial_trace(state, labels_a + labels_b)
    s_a = svne(partial_trace(rho_ab, labels_a), 2)
    s_b = svne(partial_trace(rho_ab, labels_b), 2)
    s_ab = 0.0 if isinstance(state, PureState) and set(labels_a + labels_b) == set(state.layout.labels) else svne(rho_ab, 2)
    return max(s_a + s_b - s_ab, 0.0)


def pair_indicators(state, partition, grid: QuadratureGrid | None = None) -> tuple[float, float, float]:
    """``(xi_tei, xi_tei_prime, xi_qmi)`` for one bipartition of a state."""
    labels_a, labels_b = (tuple(p) for p in partition)
    rho_ab = partial_trace(state, labels_a + labels_b)
    kinds = {rho_ab.layout.factor(lab).kind for lab in labels_a + labels_b}
    if kinds == {"qubit"}:
        values = spin_setting_values(spin_tomogram(rho_ab), labels_a, labels_b)
    elif kinds == {"field"} and len(labels_a) == len(labels_b) == 1:
        if rho_ab.layout.labels != labels_a + labels_b:
            raise ValueError("field blocks must be given in layout order")
        values = field_setting_values(rho_ab, grid)
    else:
        raise ValueError(f"partition {partition} must be all qubits or a single field per side")
    mis = [v.mi for v in values]
    return float(np.mean(mis)), xi_tei_prime(mis), float(xi_qmi(state, (labels_a, labels_b)))


def indicator_time_series(
    H: HermitianOperator,
    psi0: PureState,
    times: Sequence[float],
    partitions: Mapping[str, tuple] | Sequence[tuple],
    grid: QuadratureGrid | None = None,
    g: float = 1.0,
) -> list[IndicatorSample]:
    """Evolve ``psi0`` and evaluate every partition at every time, in time order."""
    if isinstance(partitions, Mapping):
        partitions = list(partitions.values())
    partitions = [(tuple(a), tuple(b)) for a, b in partitions]
    rows = []
    for t, state in zip(times, evolve_many(H, psi0, times)):
        for part in partitions:
            tei, tei_p, qmi = pair_indicators(state, part, grid)
            rows.append(IndicatorSample(float(g * t), part, tei, tei_p, qmi))
    return rows


def joint_tomogram_setting_values(tomogram: JointFieldTomogram) -> list[BasisSettingValue]:
    """Per-setting mutual information of a stored joint quadrature tomogram."""
    grid, dx = tomogram.grid, tomogram.grid.dx
    w = clamp_negative(tomogram.values)
    n_a, n_b = w.shape[:2]
    w = w.reshape(n_a * n_b, *w.shape[2:])
    w_a = w.sum(axis=2) * dx
    w_b = w.sum(axis=1) * dx
    if np.max(np.abs(w_a.sum(axis=1) * dx - 1)) > GRID_NORM_ATOL:
        raise InvariantViolation("joint tomogram slice is not normalized")
    mi = _neg_xlogx_sum(w_a, axis=1) * dx + _neg_xlogx_sum(w_b, axis=1) * dx - _slice_entropies(w) * dx * dx
    th = grid.theta_values
    return [BasisSettingValue((float(th[i // n_b]), float(th[i % n_b])), float(m)) for i, m in enumerate(mi)]
