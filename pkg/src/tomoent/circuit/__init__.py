from .builders import RECIPES, build_bell_prep, build_djc_equiv, build_dtc_prep, exchange_block
from .core import (
    BIT_TO_OUTCOME,
    DEFAULT_SHOTS,
    Circuit,
    CountsTable,
    Gate,
    GateKind,
    basis_change,
    exact_tomogram,
    gate_matrix,
    outcome_probabilities,
    run_statevector,
    run_tomography,
    sample_counts,
    settings_for,
    tomogram_from_counts,
    tomography_circuits,
)
from .qasm import QasmError, emit_qasm, emit_suite, parse_qasm

__all__ = [
    "BIT_TO_OUTCOME", "DEFAULT_SHOTS", "RECIPES", "Circuit", "CountsTable", "Gate", "GateKind",
    "QasmError", "basis_change", "build_bell_prep", "build_djc_equiv", "build_dtc_prep",
    "emit_qasm", "emit_suite", "exact_tomogram", "exchange_block", "gate_matrix", "outcome_probabilities",
    "parse_qasm", "run_statevector", "run_tomography", "sample_counts", "settings_for",
    "tomogram_from_counts", "tomography_circuits",
]
