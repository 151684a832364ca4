"""Double Jaynes-Cummings and double Tavis-Cummings Hamiltonians.

Layouts:

* DJC: ``[A, B, C, D]``, atom ``C`` couples to field ``A`` and ``D`` to ``B``.
* DTC: ``[A, B, C1, C2, D1, D2]``, atoms ``C1, C2`` couple to ``A`` and
  ``D1, D2`` to ``B``.

The free atomic term is ``omega0 * sigma_z`` with the spin-1/2 ``sigma_z``,
so the level splitting ``E_e - E_g`` is ``omega0``. Both Hamiltonians commute
with ``omega * (n_A + n_B + sum sigma_z)``; the interaction frame drops that
term, leaving ``-delta * sum sigma_z`` plus the couplings.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hilbert import (
    EXCITED,
    GROUND,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_Z,
    HermitianOperator,
    PureState,
    SubsystemLayout,
    annihilation,
    embed,
    number_operator,
    tensor_product,
)

FRAMES = ("interaction", "lab")

# two-atom blocks in the (atom 1, atom 2) basis; g = index 0, e = index 1
ATOM_BLOCKS = {
    "psi0": (np.kron(GROUND, GROUND) + np.kron(EXCITED, EXCITED)) / np.sqrt(2),
    "phi0": (np.kron(GROUND, EXCITED) + np.kron(EXCITED, GROUND)) / np.sqrt(2),
}

DJC_WIRING = {"A": ("C",), "B": ("D",)}
DTC_WIRING = {"A": ("C1", "C2"), "B": ("D1", "D2")}


@dataclass(frozen=True)
class ModelParams:
    """Model constants in units of the coupling ``g``.

    Only ``delta = omega - omega0`` enters interaction-frame dynamics; the
    absolute frequencies matter for the lab frame alone.
    """

    omega: float = 1.0
    omega0: float = 1.0
    g: float = 1.0
    n_max: int = 1

    def __post_init__(self):
        if self.g <= 0:
            raise ValueError(f"coupling g must be positive, got {self.g}")
        if self.n_max < 0:
            raise ValueError(f"n_max must be non-negative, got {self.n_max}")

    @classmethod
    def from_detuning(cls, delta: float, n_max: int = 1, g: float = 1.0, omega0: float = 1.0) -> "ModelParams":
        return cls(omega=omega0 + delta, omega0=omega0, g=g, n_max=n_max)

    @property
    def delta(self) -> float:
        return self.omega - self.omega0


@dataclass(frozen=True)
class InitialStateSpec:
    """Fields in Fock states, atoms in entangled two-atom blocks.

    ``atom_blocks`` has one entry for DJC (the ``(C, D)`` pair) and two for
    DTC (pairs ``(C1, D1)`` and ``(C2, D2)``), each ``"psi0"`` or ``"phi0"``.
    """

    atom_blocks: tuple[str, ...] = ("psi0",)
    field_states: tuple[int, int] = (0, 0)

    def __post_init__(self):
        object.__setattr__(self, "atom_blocks", tuple(self.atom_blocks))
        object.__setattr__(self, "field_states", tuple(self.field_states))
        for name in self.atom_blocks:
            if name not in ATOM_BLOCKS:
                raise ValueError(f"unknown atomic block {name!r}; expected one of {sorted(ATOM_BLOCKS)}")
        if len(self.atom_blocks) not in (1, 2):
            raise ValueError("one atomic block (DJC) or two (DTC) are supported")

    @classmethod
    def parse(cls, name: str) -> "InitialStateSpec":
        """``"psi0"``, ``"phi0"``, ``"psi0_phi0"`` ... as used on the command line."""
        return cls(tuple(name.split("_")))

    @property
    def name(self) -> str:
        return "_".join(self.atom_blocks)


def djc_layout(n_max: int) -> SubsystemLayout:
    d = n_max + 1
    return SubsystemLayout.build(("A", "field", d), ("B", "field", d), ("C", "qubit"), ("D", "qubit"))


def dtc_layout(n_max: int) -> SubsystemLayout:
    d = n_max + 1
    return SubsystemLayout.build(
        ("A", "field", d), ("B", "field", d),
        ("C1", "qubit"), ("C2", "qubit"), ("D1", "qubit"), ("D2", "qubit"),
    )


def _build(params: ModelParams, layout: SubsystemLayout, wiring: dict, frame: str) -> HermitianOperator:
    if frame not in FRAMES:
        raise ValueError(f"frame must be one of {FRAMES}, got {frame!r}")
    if frame == "interaction":
        field_freq, atom_freq = 0.0, -params.delta
    else:
        field_freq, atom_freq = params.omega, params.omega0
    d = params.n_max + 1
    a = annihilation(d)
    H = np.zeros((layout.total_dim,) * 2, dtype=complex)
    for fld, atoms in wiring.items():
        H += field_freq * embed(number_operator(d), fld, layout)
        a_f = embed(a, fld, layout)
        for atom in atoms:
            H += atom_freq * embed(SIGMA_Z, atom, layout)
            coupling = a_f.conj().T @ embed(SIGMA_MINUS, atom, layout) + a_f @ embed(SIGMA_PLUS, atom, layout)
            H += params.g * coupling
    return HermitianOperator(H, layout)


def build_hdjc(params: ModelParams, frame: str = "interaction") -> HermitianOperator:
    """Double JC Hamiltonian on ``[A, B, C, D]``."""
    if params.n_max < 1:
        raise ValueError("the double JC model needs n_max >= 1")
    return _build(params, djc_layout(params.n_max), DJC_WIRING, frame)


def build_hdtc(params: ModelParams, frame: str = "interaction") -> HermitianOperator:
    """Double TC Hamiltonian on ``[A, B, C1, C2, D1, D2]``."""
    if params.n_max < 1:
        raise ValueError("the double TC model needs n_max >= 1")
    return _build(params, dtc_layout(params.n_max), DTC_WIRING, frame)


def wiring_for(layout: SubsystemLayout) -> dict:
    if layout.labels == ("A", "B", "C", "D"):
        return DJC_WIRING
    if layout.labels == ("A", "B", "C1", "C2", "D1", "D2"):
        return DTC_WIRING
    raise ValueError(f"layout {layout.labels} is neither the DJC nor the DTC layout")


def _fock(n: int, dim: int) -> np.ndarray:
    if not 0 <= n < dim:
        raise ValueError(f"Fock state |{n}> does not fit a field truncated at n_max={dim - 1}")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1
    return v


def initial_state(spec: InitialStateSpec, layout: SubsystemLayout) -> PureState:
    """``|nA; nB; blocks>`` on a DJC or DTC layout."""
    wiring = wiring_for(layout)
    dA, dB = layout.factor("A").dim, layout.factor("B").dim
    fields = tensor_product([_fock(spec.field_states[0], dA), _fock(spec.field_states[1], dB)])
    if wiring is DJC_WIRING:
        if len(spec.atom_blocks) != 1:
            raise ValueError("the DJC layout takes exactly one atomic block")
        atoms = ATOM_BLOCKS[spec.atom_blocks[0]]
    else:
        if len(spec.atom_blocks) != 2:
            raise ValueError("the DTC layout takes two atomic blocks, for (C1,D1) and (C2,D2)")
        b1 = ATOM_BLOCKS[spec.atom_blocks[0]].reshape(2, 2)  # (C1, D1)
        b2 = ATOM_BLOCKS[spec.atom_blocks[1]].reshape(2, 2)  # (C2, D2)
        # reorder into the layout order C1, C2, D1, D2
        atoms = np.einsum("ac,bd->abcd", b1, b2).reshape(-1)
    state = PureState(np.kron(fields, atoms), layout)
    check_truncation(state)
    return state


def excitation_operator(layout: SubsystemLayout, field_label: str, qubits: tuple[str, ...] | None = None) -> HermitianOperator:
    """``a^dag a + sum sigma_z`` over a field and the atoms coupled to it."""
    wiring = wiring_for(layout)
    if field_label not in wiring:
        raise KeyError(f"{field_label!r} is not a field of this model")
    coupled = wiring[field_label]
    qubits = coupled if qubits is None else tuple(qubits)
    if set(qubits) != set(coupled):
        raise ValueError(f"qubits {sorted(qubits)} do not match the atoms coupled to {field_label!r}: {list(coupled)}")
    d = layout.factor(field_label).dim
    N = embed(number_operator(d), field_label, layout)
    for q in qubits:
        N = N + embed(SIGMA_Z, q, layout)
    return HermitianOperator(N, layout)


def max_cavity_excitations(state: PureState) -> int:
    """Largest photon-plus-excited-atom count in any cavity with nonzero amplitude."""
    layout = state.layout
    wiring = wiring_for(layout)
    amps = state.amplitudes.reshape(layout.dims)
    occupied = np.argwhere(np.abs(amps) > 1e-12)
    worst = 0
    for idx in occupied:
        for fld, atoms in wiring.items():
            n = idx[layout.index(fld)] + sum(idx[layout.index(q)] for q in atoms)
            worst = max(worst, int(n))
    return worst


def check_truncation(state: PureState) -> None:
    """Fock truncation is exact only if each cavity can hold all its excitations."""
    n_max = state.layout.factor("A").dim - 1
    need = max_cavity_excitations(state)
    if need > n_max:
        raise ValueError(
            f"n_max={n_max} is below the {need} excitations the initial state puts in one cavity"
        )


def tail_mass(state: PureState) -> float:
    """Probability in the highest retained Fock level of either field."""
    layout = state.layout
    p = np.abs(state.amplitudes.reshape(layout.dims)) ** 2
    mass = 0.0
    for fld in ("A", "B"):
        k = layout.index(fld)
        top = np.take(p, layout.dims[k] - 1, axis=k)
        mass = max(mass, float(top.sum()))
    return mass


@dataclass(frozen=True)
class Model:
    """A ready-to-evolve model: Hamiltonian, initial state and the bipartitions of interest."""

    name: str
    hamiltonian: HermitianOperator
    psi0: PureState
    params: ModelParams
    partitions: dict = field(default_factory=dict)


def djc_model(delta: float = 0.0, initial: str = "psi0", n_max: int = 1, frame: str = "interaction") -> Model:
    params = ModelParams.from_detuning(delta, n_max=n_max)
    H = build_hdjc(params, frame)
    psi0 = initial_state(InitialStateSpec.parse(initial), H.layout)
    partitions = {"field": (("A",), ("B",)), "atom": (("C",), ("D",))}
    return Model("djc", H, psi0, params, partitions)


def dtc_model(delta: float = 0.0, initial: str = "psi0_psi0", n_max: int = 2, frame: str = "interaction") -> Model:
    params = ModelParams.from_detuning(delta, n_max=n_max)
    H = build_hdtc(params, frame)
    psi0 = initial_state(InitialStateSpec.parse(initial), H.layout)
    partitions = {"field": (("A",), ("B",)), "atom": (("C1", "C2"), ("D1", "D2"))}
    return Model("dtc", H, psi0, params, partitions)
