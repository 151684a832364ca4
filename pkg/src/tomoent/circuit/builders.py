"""Preparation circuits for the hardware experiments.

Qubits are numbered contiguously. In the DJC-equivalent circuit qubits 0 and 3
carry the entangled pair and qubits 1 and 2 are the auxiliary "field" qubits;
in the DTC preparation the blocks ``C = (1, 2)`` and ``D = (0, 3)`` are read out.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import Circuit, Gate, GateKind

DTC_BLOCKS = ((1, 2), (0, 3))


def build_bell_prep() -> Circuit:
    """``(|00> + |11>)/sqrt(2)`` on two qubits."""
    return Circuit(2).h(0).cx(0, 1)


def build_dtc_prep() -> Circuit:
    """Two Bell pairs ``(0, 1)`` and ``(2, 3)``, measured across the pairs."""
    return Circuit(4).h(1).cx(1, 0).h(2).cx(2, 3)


def exchange_block(theta: float, system: int, aux: int) -> list[Gate]:
    """Excitation exchange between ``system`` and ``aux``.

    On ``span{|10>, |01>}`` (system first) this is the resonant
    Jaynes-Cummings propagator at ``gt = theta``: ``cos(theta) 1 - i sin(theta) X``.
    ``|00>`` is left alone. The trailing ``s``/``sdg`` pair cancels the local
    phase ``S^dag (x) S`` left by the CNOT/U3 core.
    """
    if not 0 <= theta <= np.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    return [
        Gate(GateKind.CNOT, (system, aux)),
        Gate(GateKind.CNOT, (aux, system)),
        Gate(GateKind.U3, (system,), (theta, 0.0, np.pi / 2)),
        Gate(GateKind.CNOT, (aux, system)),
        Gate(GateKind.U3, (system,), (theta, np.pi / 2, np.pi)),
        Gate(GateKind.CNOT, (system, aux)),
        Gate(GateKind.S, (system,)),
        Gate(GateKind.SDG, (aux,)),
    ]


def build_djc_equiv(theta: float = np.pi) -> Circuit:
    """Bell pair on qubits 0 and 3, each exchanging with an empty auxiliary qubit."""
    c = Circuit(4).h(3).cx(3, 1).swap(1, 0)
    c.extend(exchange_block(theta, 0, 1))
    c.extend(exchange_block(theta, 3, 2))
    return c


@dataclass(frozen=True)
class Recipe:
    """A preparation circuit with the qubits to read out and how they split into blocks."""

    build: Callable[..., Circuit]
    blocks: tuple[tuple[int, ...], tuple[int, ...]]
    parametrized: bool = False

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.blocks[0] + self.blocks[1]

    def labels(self, block: tuple[int, ...] | None = None) -> tuple[str, ...]:
        return tuple(f"q{q}" for q in (self.qubits if block is None else block))


RECIPES = {
    "bell": Recipe(build_bell_prep, ((0,), (1,))),
    "dtc": Recipe(build_dtc_prep, DTC_BLOCKS),
    "djc_equiv": Recipe(build_djc_equiv, ((0,), (3,)), parametrized=True),
}
