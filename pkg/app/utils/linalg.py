"""Complex dense linear algebra and Haar sampling.

Conventions used throughout the package:

* a vector x in C^k (x) C^n is identified with the k x n matrix X through
  ``X[i, j] = x[i * n + j]`` (row-major), so that Tr_n[x x*] = X X*;
* composite tensor legs are ordered (output, environment);
* random numbers always come from an explicit ``numpy.random.Generator``.
"""
from typing import Sequence

import numpy as np
import numpy.typing as npt
import scipy.linalg

from app.utils.exceptions import DimensionMismatchError, InvalidStateError
from app.utils.validators import HERMITIAN_TOL, is_hermitian, validate_dimension

ComplexMatrix = npt.NDArray[np.complex128]
Ket = npt.NDArray[np.complex128]
DensityMatrix = npt.NDArray[np.complex128]


def standard_complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    """Entries with E|z|^2 = 1."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def haar_unitary(d: int, rng: np.random.Generator) -> ComplexMatrix:
    """Haar-distributed element of U(d): QR of a Ginibre matrix with the R-diagonal phases moved into Q."""
    d = validate_dimension(d)
    z = standard_complex_normal(rng, (d, d))
    q, r = scipy.linalg.qr(z)
    diag = np.diagonal(r)
    q *= diag / np.abs(diag)
    return q


def random_unit_vector(d: int, rng: np.random.Generator) -> Ket:
    d = validate_dimension(d)
    x = standard_complex_normal(rng, d)
    return x / np.linalg.norm(x)


def random_unit_vectors(count: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """`count` independent uniform unit vectors as the rows of a (count, d) array."""
    d = validate_dimension(d)
    x = standard_complex_normal(rng, (count, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def random_density_matrix(d: int, rng: np.random.Generator, rank: int = None) -> DensityMatrix:
    """Density matrix G G* / Tr[G G*] for a d x rank Ginibre G (full rank by default)."""
    d = validate_dimension(d)
    rank = d if rank is None else validate_dimension(rank, "rank")
    g = standard_complex_normal(rng, (d, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def maximally_mixed(k: int) -> DensityMatrix:
    k = validate_dimension(k, "k")
    return np.eye(k, dtype=np.complex128) / k


def basis_ket(i: int, d: int) -> Ket:
    e = np.zeros(d, dtype=np.complex128)
    e[i] = 1.0
    return e


def ket_to_matrix(x: Ket, k: int, n: int) -> ComplexMatrix:
    k = validate_dimension(k, "k")
    n = validate_dimension(n, "n")
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 1 or x.shape[0] != k * n:
        raise DimensionMismatchError(f"ket of dimension {x.shape} cannot be viewed as a {k}x{n} matrix")
    return x.reshape(k, n)


def matrix_to_ket(X: ComplexMatrix) -> Ket:
    return np.asarray(X, dtype=np.complex128).reshape(-1)


def partial_trace_env(x: Ket, k: int, n: int) -> DensityMatrix:
    """Tr over C^n of x x*, i.e. X X*."""
    X = ket_to_matrix(x, k, n)
    rho = X @ X.conj().T
    return (rho + rho.conj().T) / 2


def partial_trace_out(x: Ket, k: int, n: int) -> DensityMatrix:
    """Tr over C^k of x x*, i.e. X^T conj(X)."""
    X = ket_to_matrix(x, k, n)
    rho = X.T @ X.conj()
    return (rho + rho.conj().T) / 2


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: int = 0) -> np.ndarray:
    """
    Trace out one side of a bipartite operator on C^dims[0] (x) C^dims[1].

    `keep=0` returns the operator on the first factor, `keep=1` on the second.
    """
    d0, d1 = dims
    rho = np.asarray(rho)
    if rho.shape != (d0 * d1, d0 * d1):
        raise DimensionMismatchError(f"operator of shape {rho.shape} does not act on C^{d0} (x) C^{d1}")
    t = rho.reshape(d0, d1, d0, d1)
    if keep == 0:
        return np.einsum("ajbj->ab", t)
    return np.einsum("iaib->ab", t)


def hermitian_eigvals(A: ComplexMatrix) -> np.ndarray:
    """Real eigenvalues in descending order."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"matrix of shape {A.shape} is not square")
    if not is_hermitian(A, HERMITIAN_TOL):
        raise InvalidStateError("matrix is not Hermitian")
    return scipy.linalg.eigvalsh((A + A.conj().T) / 2)[::-1]


def hs_norm(A: ComplexMatrix) -> float:
    return float(np.linalg.norm(A, "fro"))


def op_norm(A: ComplexMatrix) -> float:
    return float(np.linalg.norm(A, 2))
