"""Input validation helpers shared by the library and the estimators."""
from __future__ import annotations

import numpy as np

NORM_ATOL = 1e-10
HERMITIAN_ATOL = 1e-12
DENSITY_ATOL = 1e-10
PROBABILITY_ATOL = 1e-8
NEGATIVE_CLAMP = 1e-12


class InvariantViolation(ValueError):
    """A numerical invariant (norm, trace, positivity, ...) does not hold."""


def check_statevector(amplitudes, dim: int | None = None, atol: float = NORM_ATOL) -> np.ndarray:
    psi = np.array(amplitudes, dtype=complex)
    if psi.ndim != 1:
        raise ValueError(f"state vector must be 1-D, got shape {psi.shape}")
    if dim is not None and psi.shape[0] != dim:
        raise ValueError(f"state vector has length {psi.shape[0]}, layout needs {dim}")
    if not np.all(np.isfinite(psi)):
        raise InvariantViolation("state vector has non-finite entries")
    norm = np.linalg.norm(psi)
    if abs(norm - 1) > atol:
        raise InvariantViolation(f"state vector norm {norm!r} differs from 1 by more than {atol}")
    return psi


def _check_square(matrix, dim: int | None) -> np.ndarray:
    m = np.array(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise ValueError(f"matrix has dimension {m.shape[0]}, layout needs {dim}")
    if not np.all(np.isfinite(m)):
        raise InvariantViolation("matrix has non-finite entries")
    return m


def check_hermitian(matrix, dim: int | None = None, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    m = _check_square(matrix, dim)
    residual = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if residual > atol:
        raise InvariantViolation(f"matrix is not Hermitian (max residual {residual:.3e})")
    return m


def check_density_matrix(matrix, dim: int | None = None, atol: float = DENSITY_ATOL) -> np.ndarray:
    rho = check_hermitian(matrix, dim, atol=atol)
    tr = np.trace(rho).real
    if abs(tr - 1) > atol:
        raise InvariantViolation(f"density matrix trace {tr!r} differs from 1")
    lam_min = np.linalg.eigvalsh(rho).min()
    if lam_min < -atol:
        raise InvariantViolation(f"density matrix has negative eigenvalue {lam_min:.3e}")
    return rho


def check_probabilities(p, atol: float = PROBABILITY_ATOL, neg_atol: float = 1e-10) -> np.ndarray:
    """Validate a (possibly multi-dimensional) probability table summing to 1."""
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise InvariantViolation("probabilities contain non-finite entries")
    if p.size and p.min() < -neg_atol:
        raise InvariantViolation(f"negative probability {p.min():.3e}")
    total = p.sum()
    if abs(total - 1) > atol:
        raise InvariantViolation(f"probabilities sum to {total!r}, not 1")
    return np.clip(p, 0.0, None)


def clamp_negative(values: np.ndarray, tol: float = NEGATIVE_CLAMP) -> np.ndarray:
    """Zero out round-off negatives; anything below ``-tol`` signals an invalid state."""
    values = np.asarray(values, dtype=float)
    if values.size and values.min() < -tol:
        raise InvariantViolation(f"tomogram value {values.min():.3e} is negative beyond round-off")
    return np.maximum(values, 0.0)
