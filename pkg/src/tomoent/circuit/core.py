"""Gate-level statevector simulation, shot sampling and spin tomography from counts.

Qubit ``0`` is the most significant digit of the statevector index, matching
the layout convention of :mod:`tomoent.hilbert`. A counts bitstring lists
classical bits left to right: character ``j`` is ``c[j]``.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..hilbert import SPIN_OPERATORS, PureState, SubsystemLayout
from ..tomography import AXES, SpinTomogram

DEFAULT_SHOTS = 8192
_TWO_PI = 2 * np.pi
_ANGLE_EPS = 1e-12


def _wrap(angle: float) -> float:
    # x % 2pi rounds up to exactly 2pi for tiny negative x
    a = float(angle % _TWO_PI)
    return 0.0 if a == _TWO_PI else a


class GateKind(str, enum.Enum):
    H = "h"
    X = "x"
    S = "s"
    SDG = "sdg"
    U3 = "u3"
    CNOT = "cx"
    SWAP = "swap"
    MEASURE = "measure"
    BARRIER = "barrier"


_ARITY = {
    GateKind.H: 1, GateKind.X: 1, GateKind.S: 1, GateKind.SDG: 1, GateKind.U3: 1,
    GateKind.CNOT: 2, GateKind.SWAP: 2, GateKind.MEASURE: 1,
}


def _normalize_u3(theta: float, phi: float, chi: float) -> tuple[float, float, float]:
    # U3(-t, p, c) equals U3(t, p + pi, c + pi)
    if theta < 0:
        theta, phi, chi = -theta, phi + np.pi, chi + np.pi
    if theta > np.pi + _ANGLE_EPS:
        raise ValueError(f"U3 polar angle {theta} lies outside [0, pi]")
    return float(theta), _wrap(phi), _wrap(chi)


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    targets: tuple[int, ...]
    params: tuple[float, ...] = ()
    clbit: int | None = None

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        targets = tuple(int(q) for q in self.targets)
        object.__setattr__(self, "targets", targets)
        if kind in _ARITY and len(targets) != _ARITY[kind]:
            raise ValueError(f"{kind.value} acts on {_ARITY[kind]} qubit(s), got {targets}")
        if kind is GateKind.BARRIER and not targets:
            raise ValueError("barrier needs at least one qubit")
        if len(set(targets)) != len(targets):
            raise ValueError(f"{kind.value} targets must be distinct, got {targets}")
        if any(q < 0 for q in targets):
            raise ValueError(f"negative qubit index in {targets}")
        if kind is GateKind.U3:
            if len(self.params) != 3:
                raise ValueError(f"u3 takes exactly 3 angles, got {len(self.params)}")
            object.__setattr__(self, "params", _normalize_u3(*self.params))
        elif self.params:
            raise ValueError(f"{kind.value} takes no parameters")
        if kind is GateKind.MEASURE:
            if self.clbit is None or self.clbit < 0:
                raise ValueError("measure needs a non-negative classical bit")
        elif self.clbit is not None:
            raise ValueError(f"{kind.value} does not write a classical bit")

    @property
    def is_unitary(self) -> bool:
        return self.kind not in (GateKind.MEASURE, GateKind.BARRIER)


@dataclass
class Circuit:
    """Ordered gate list. Nothing may act on a qubit after it is measured."""

    num_qubits: int
    num_clbits: int = 0
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("a circuit needs at least one qubit")
        gates, self.gates = list(self.gates), []
        for g in gates:
            self.append(g)

    def append(self, gate: Gate) -> "Circuit":
        for q in gate.targets:
            if q >= self.num_qubits:
                raise IndexError(f"qubit {q} out of range for {self.num_qubits} qubits")
        if gate.clbit is not None and gate.clbit >= self.num_clbits:
            raise IndexError(f"classical bit {gate.clbit} out of range for {self.num_clbits} bits")
        measured = self.measured_qubits()
        if gate.kind is not GateKind.BARRIER and any(q in measured for q in gate.targets):
            raise ValueError(f"{gate.kind.value} on {gate.targets} follows a measurement of that qubit")
        if gate.kind is GateKind.MEASURE and gate.clbit in measured.values():
            raise ValueError(f"classical bit {gate.clbit} is written twice")
        self.gates.append(gate)
        return self

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        for g in gates:
            self.append(g)
        return self

    def copy(self) -> "Circuit":
        return Circuit(self.num_qubits, self.num_clbits, list(self.gates))

    def measured_qubits(self) -> dict[int, int]:
        """``qubit -> clbit`` for every measurement, in circuit order."""
        return {g.targets[0]: g.clbit for g in self.gates if g.kind is GateKind.MEASURE}

    def unitary_part(self) -> list[Gate]:
        return [g for g in self.gates if g.is_unitary]

    # builder shorthands
    def h(self, q): return self.append(Gate(GateKind.H, (q,)))
    def x(self, q): return self.append(Gate(GateKind.X, (q,)))
    def s(self, q): return self.append(Gate(GateKind.S, (q,)))
    def sdg(self, q): return self.append(Gate(GateKind.SDG, (q,)))
    def u3(self, theta, phi, chi, q): return self.append(Gate(GateKind.U3, (q,), (theta, phi, chi)))
    def cx(self, control, target): return self.append(Gate(GateKind.CNOT, (control, target)))
    def swap(self, a, b): return self.append(Gate(GateKind.SWAP, (a, b)))
    def measure(self, q, c): return self.append(Gate(GateKind.MEASURE, (q,), clbit=c))
    def barrier(self, *qs): return self.append(Gate(GateKind.BARRIER, tuple(qs or range(self.num_qubits))))


def u3_matrix(theta: float, phi: float, chi: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * chi) * s], [np.exp(1j * phi) * s, np.exp(1j * (phi + chi)) * c]], dtype=complex
    )


_FIXED = {
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.S: np.diag([1, 1j]).astype(complex),
    GateKind.SDG: np.diag([1, -1j]).astype(complex),
    # control is the first target, the more significant index
    GateKind.CNOT: np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    GateKind.SWAP: np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}


def gate_matrix(gate: Gate) -> np.ndarray:
    if gate.kind is GateKind.U3:
        return u3_matrix(*gate.params)
    try:
        return _FIXED[gate.kind].copy()
    except KeyError:
        raise ValueError(f"{gate.kind.value} has no unitary matrix") from None


def _apply(state: np.ndarray, matrix: np.ndarray, targets: tuple[int, ...], n: int) -> np.ndarray:
    k = len(targets)
    psi = state.reshape((2,) * n)
    psi = np.moveaxis(psi, targets, range(k)).reshape(2 ** k, -1)
    psi = (matrix @ psi).reshape((2,) * n)
    return np.moveaxis(psi, range(k), targets).reshape(-1)


def final_amplitudes(circuit: Circuit) -> np.ndarray:
    n = circuit.num_qubits
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = 1
    for g in circuit.unitary_part():
        psi = _apply(psi, gate_matrix(g), g.targets, n)
    return psi


def run_statevector(circuit: Circuit) -> PureState:
    """Apply the unitary gates to ``|0...0>``; measurements and barriers are skipped."""
    return PureState(final_amplitudes(circuit), SubsystemLayout.qubits(circuit.num_qubits))


def outcome_probabilities(circuit: Circuit) -> dict[str, float]:
    """Exact distribution of the classical register after the final measurements."""
    measured = circuit.measured_qubits()
    if not measured:
        raise ValueError("circuit has no measurements")
    n = circuit.num_qubits
    p = np.abs(final_amplitudes(circuit).reshape((2,) * n)) ** 2
    others = tuple(q for q in range(n) if q not in measured)
    if others:
        p = p.sum(axis=others)
    # remaining axes follow increasing qubit index; map each to its clbit
    order = sorted(measured)
    out: dict[str, float] = {}
    for idx in np.ndindex(*p.shape):
        bits = ["0"] * circuit.num_clbits
        for q, b in zip(order, idx):
            bits[measured[q]] = str(b)
        key = "".join(bits)
        out[key] = out.get(key, 0.0) + float(p[idx])
    return out


@dataclass(frozen=True)
class CountsTable:
    setting: tuple[str, ...]
    counts: dict[str, int]
    shots: int
    qubits: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "setting", tuple(self.setting))
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if any(v < 0 for v in self.counts.values()):
            raise ValueError("counts must be non-negative")
        if sum(self.counts.values()) != self.shots:
            raise ValueError(f"counts sum to {sum(self.counts.values())}, expected {self.shots} shots")

    def frequencies(self) -> dict[str, float]:
        return {k: v / self.shots for k, v in self.counts.items()}

    def merge(self, other: "CountsTable") -> "CountsTable":
        if (self.setting, self.qubits) != (other.setting, other.qubits):
            raise ValueError("only tables of the same setting can be merged")
        counts = dict(self.counts)
        for k, v in other.counts.items():
            counts[k] = counts.get(k, 0) + v
        return CountsTable(self.setting, dict(sorted(counts.items())), self.shots + other.shots, self.qubits)


def sample_counts(circuit: Circuit, shots: int = DEFAULT_SHOTS, seed: int = 0,
                  setting: Sequence[str] = ()) -> CountsTable:
    """Multinomial sample of the measured register (PCG64 seeded with ``seed``)."""
    if shots <= 0:
        raise ValueError(f"shots must be positive, got {shots}")
    probs = outcome_probabilities(circuit)
    keys = sorted(probs)
    p = np.array([probs[k] for k in keys])
    p = np.clip(p, 0, None)
    p /= p.sum()
    rng = np.random.default_rng(seed)
    drawn = rng.multinomial(shots, p)
    counts = {k: int(c) for k, c in zip(keys, drawn) if c}
    return CountsTable(tuple(setting), counts, shots, tuple(circuit.measured_qubits()))


def basis_change(axis: str, qubit: int = 0) -> list[Gate]:
    """Gates that rotate the ``axis`` eigenbasis onto the computational basis."""
    if axis == "x":
        return [Gate(GateKind.H, (qubit,))]
    if axis == "y":
        return [Gate(GateKind.SDG, (qubit,)), Gate(GateKind.H, (qubit,))]
    if axis == "z":
        return []
    raise ValueError(f"unknown measurement axis {axis!r}")


def _bit_to_outcome(axis: str) -> tuple[int, int]:
    """Tomogram outcome index (0 for m=+1/2) read off each measured bit value."""
    u = np.eye(2, dtype=complex)
    for g in basis_change(axis):
        u = gate_matrix(g) @ u
    out = []
    for b in (0, 1):
        v = u.conj().T[:, b]
        m = np.real(np.vdot(v, SPIN_OPERATORS[axis] @ v))
        out.append(0 if m > 0 else 1)
    return tuple(out)


BIT_TO_OUTCOME = {a: _bit_to_outcome(a) for a in AXES}


def settings_for(n_qubits: int, axes: Sequence[str] = AXES) -> list[tuple[str, ...]]:
    """Per-qubit axis combinations in lexicographic order."""
    return list(itertools.product(axes, repeat=n_qubits))


def tomography_circuits(prep: Circuit, qubits: Sequence[int], axes: Sequence[str] = AXES) -> dict[tuple[str, ...], Circuit]:
    """One measurement circuit per setting; ``qubits[j]`` is read into ``c[j]``."""
    prep_gates = prep.unitary_part()
    out = {}
    for setting in settings_for(len(qubits), axes):
        c = Circuit(prep.num_qubits, len(qubits), list(prep_gates))
        for q, a in zip(qubits, setting):
            c.extend(basis_change(a, q))
        for j, q in enumerate(qubits):
            c.measure(q, j)
        out[setting] = c
    return out


def setting_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def run_tomography(prep: Circuit, qubits: Sequence[int], shots: int = DEFAULT_SHOTS, seed: int = 0,
                   axes: Sequence[str] = AXES) -> list[CountsTable]:
    tables = []
    for i, (setting, c) in enumerate(tomography_circuits(prep, qubits, axes).items()):
        tables.append(sample_counts(c, shots, setting_seed(seed, i), setting))
    return tables


def _table_from_distribution(dist: dict[str, float], setting: Sequence[str]) -> np.ndarray:
    k = len(setting)
    w = np.zeros((2,) * k)
    for bits, p in dist.items():
        idx = tuple(BIT_TO_OUTCOME[a][int(b)] for a, b in zip(setting, bits))
        w[idx] += p
    return w


def _assemble(tables: dict[tuple[str, ...], np.ndarray], k: int, labels, axes, shots) -> SpinTomogram:
    axes = tuple(axes)
    missing = [s for s in settings_for(k, axes) if s not in tables]
    if missing:
        raise ValueError(f"missing measurement settings: {missing}")
    values = np.zeros((len(axes),) * k + (2,) * k)
    for setting, w in tables.items():
        values[tuple(axes.index(a) for a in setting)] = w
    return SpinTomogram(tuple(labels), axes, values, shots)


def tomogram_from_counts(tables: Sequence[CountsTable], labels: Sequence[str] | None = None,
                         axes: Sequence[str] = AXES) -> SpinTomogram:
    """Empirical spin tomogram; every setting must be present with equal shots."""
    if not tables:
        raise ValueError("no counts tables given")
    k = len(tables[0].setting)
    shots = {t.shots for t in tables}
    if len(shots) != 1:
        raise ValueError(f"settings were run with different shot counts: {sorted(shots)}")
    by_setting = {}
    for t in tables:
        if len(t.setting) != k:
            raise ValueError("tables measure different numbers of qubits")
        if t.setting in by_setting:
            raise ValueError(f"setting {t.setting} appears twice")
        by_setting[t.setting] = _table_from_distribution(t.frequencies(), t.setting)
    if labels is None:
        labels = tuple(f"q{q}" for q in tables[0].qubits) if tables[0].qubits else tuple(f"q{j}" for j in range(k))
    return _assemble(by_setting, k, labels, axes, shots.pop())


def exact_tomogram(prep: Circuit, qubits: Sequence[int], labels: Sequence[str] | None = None,
                   axes: Sequence[str] = AXES) -> SpinTomogram:
    """Infinite-shot tomogram: the exact outcome distribution of every measurement circuit."""
    tables = {s: _table_from_distribution(outcome_probabilities(c), s)
              for s, c in tomography_circuits(prep, qubits, axes).items()}
    labels = tuple(f"q{q}" for q in qubits) if labels is None else labels
    return _assemble(tables, len(qubits), labels, axes, None)
