import logging

import numpy as np

from app.utils.exceptions import DimensionMismatchError, InvalidDimensionError, InvalidStateError

logger = logging.getLogger(__name__)

KET_NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-12
TRACE_TOL = 1e-12


def validate_dimension(d: int, name: str = "d") -> int:
    """
    Check that a dimension is a positive integer.

    Returns:
        int: The dimension as a Python int.

    Raises:
        InvalidDimensionError: If `d` is not a positive integer.
    """
    if isinstance(d, bool) or int(d) != d or d < 1:
        logger.error(f"Invalid dimension {name}={d}")
        raise InvalidDimensionError(f"{name} must be a positive integer, got {d}")
    return int(d)


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return a.ndim == 2 and a.shape[0] == a.shape[1] and bool(np.allclose(a, a.conj().T, atol=tol, rtol=0.0))


def validate_ket(x: np.ndarray, dim: int = None, tol: float = KET_NORM_TOL) -> np.ndarray:
    """
    Check that `x` is a unit vector (optionally of dimension `dim`).

    Raises:
        DimensionMismatchError: If the dimension differs from `dim`.
        InvalidStateError: If the Euclidean norm differs from 1 by more than `tol`.
    """
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 1:
        raise DimensionMismatchError(f"a ket must be one-dimensional, got shape {x.shape}")
    if dim is not None and x.shape[0] != dim:
        raise DimensionMismatchError(f"expected a ket of dimension {dim}, got {x.shape[0]}")
    norm = np.linalg.norm(x)
    if abs(norm - 1.0) > tol:
        raise InvalidStateError(f"ket norm {norm!r} differs from 1")
    return x


def validate_density_matrix(rho: np.ndarray, dim: int = None, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """
    Check Hermiticity, positivity and unit trace.

    Raises:
        DimensionMismatchError: If `rho` is not square or not `dim`-dimensional.
        InvalidStateError: If any of the three state conditions fails.
    """
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatchError(f"a density matrix must be square, got shape {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise DimensionMismatchError(f"expected a {dim}-dimensional state, got {rho.shape[0]}")
    if not is_hermitian(rho, tol):
        raise InvalidStateError("matrix is not Hermitian")
    trace = np.trace(rho).real
    if abs(trace - 1.0) > max(tol, TRACE_TOL):
        raise InvalidStateError(f"trace {trace!r} differs from 1")
    smallest = np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]
    if smallest < -max(tol, PSD_TOL):
        raise InvalidStateError(f"negative eigenvalue {smallest!r}")
    return rho
