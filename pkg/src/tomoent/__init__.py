"""Tomographic entanglement indicators for cavity QED models and qubit circuits."""
from .hilbert import (
    DensityOperator,
    HermitianOperator,
    PureState,
    SubsystemLayout,
    evolve,
    evolve_many,
    partial_trace,
    sle,
    svne,
)
from .indicators import (
    indicator_time_series,
    mutual_information,
    pair_indicators,
    xi_qmi,
    xi_tei_fields,
    xi_tei_prime,
    xi_tei_spins,
)
from .models import build_hdjc, build_hdtc, djc_model, dtc_model, ModelParams
from .tomography import QuadratureGrid, joint_optical_tomogram, optical_tomogram, reduce_tomogram, spin_tomogram
from .validation import InvariantViolation

__all__ = [
    "DensityOperator", "HermitianOperator", "PureState", "SubsystemLayout", "evolve", "evolve_many",
    "partial_trace", "sle", "svne", "indicator_time_series", "mutual_information", "pair_indicators",
    "xi_qmi", "xi_tei_fields", "xi_tei_prime", "xi_tei_spins", "build_hdjc", "build_hdtc", "djc_model",
    "dtc_model", "ModelParams", "QuadratureGrid", "joint_optical_tomogram", "optical_tomogram",
    "reduce_tomogram", "spin_tomogram", "InvariantViolation",
]
