from dataclasses import dataclass, field
from typing import Protocol, Tuple, runtime_checkable

import numpy as np

from app.utils.exceptions import DimensionMismatchError, InvalidStateError
from app.utils.linalg import ComplexMatrix, DensityMatrix, Ket
from app.utils.validators import validate_dimension

ISOMETRY_TOL = 1e-10


@runtime_checkable
class Channel(Protocol):
    """What the entropy search and the capacity checks need from a channel."""

    @property
    def input_dim(self) -> int: ...

    @property
    def output_dim(self) -> int: ...

    def apply(self, rho: np.ndarray) -> DensityMatrix: ...

    def apply_to_ket(self, x: Ket) -> DensityMatrix: ...

    def apply_to_kets(self, xs: np.ndarray) -> np.ndarray: ...

    def adjoint(self, g: np.ndarray) -> np.ndarray: ...


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


def check_square_input(rho: np.ndarray, dim: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (dim, dim):
        raise DimensionMismatchError(f"channel expects a {dim}x{dim} input, got {rho.shape}")
    return rho


@dataclass(frozen=True, eq=False)
class StinespringChannel:
    """
    Channel rho -> Tr_n[V rho V*] for an isometry V: C^l -> C^k (x) C^n.

    The column span of V is the subspace E of the subspace picture. The rows of
    V are indexed by (output, environment) in row-major order.
    """
    l: int
    k: int
    n: int
    V: ComplexMatrix = field(repr=False)

    def __post_init__(self):
        for name in ("l", "k", "n"):
            object.__setattr__(self, name, validate_dimension(getattr(self, name), name))
        V = _frozen(self.V)
        if V.shape != (self.k * self.n, self.l):
            raise DimensionMismatchError(f"isometry must have shape {(self.k * self.n, self.l)}, got {V.shape}")
        gram = V.conj().T @ V
        if not np.allclose(gram, np.eye(self.l), atol=ISOMETRY_TOL, rtol=0.0):
            raise InvalidStateError("V is not an isometry")
        object.__setattr__(self, "V", V)

    def __repr__(self) -> str:
        return f"<StinespringChannel l={self.l} k={self.k} n={self.n}>"

    @property
    def input_dim(self) -> int:
        return self.l

    @property
    def output_dim(self) -> int:
        return self.k

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.l, self.k, self.n

    def embed(self, xs: np.ndarray) -> np.ndarray:
        """Push input kets (last axis l) into the subspace E."""
        return np.asarray(xs) @ self.V.T

    def apply(self, rho: np.ndarray) -> DensityMatrix:
        rho = check_square_input(rho, self.l)
        big = (self.V @ rho @ self.V.conj().T).reshape(self.k, self.n, self.k, self.n)
        out = np.einsum("ajbj->ab", big)
        return (out + out.conj().T) / 2

    def apply_to_ket(self, x: Ket) -> DensityMatrix:
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.l,):
            raise DimensionMismatchError(f"channel expects a ket of dimension {self.l}, got {x.shape}")
        return self.apply_to_kets(x[None, :])[0]

    def apply_to_kets(self, xs: np.ndarray) -> np.ndarray:
        """Outputs X X* for a batch of input kets of shape (m, l); returns (m, k, k)."""
        X = self.embed(xs).reshape(-1, self.k, self.n)
        out = X @ np.conj(np.swapaxes(X, 1, 2))
        return (out + np.conj(np.swapaxes(out, 1, 2))) / 2

    def adjoint(self, g: np.ndarray) -> np.ndarray:
        """Dual map G -> V* (G (x) I_n) V."""
        lifted = np.kron(np.asarray(g, dtype=np.complex128), np.eye(self.n))
        return self.V.conj().T @ lifted @ self.V


@dataclass(frozen=True, eq=False)
class RandomUnitaryChannel:
    """Uniform mixture rho -> (1/k) sum_i U_i rho U_i* of k unitary conjugations on C^n."""
    k: int
    n: int
    unitaries: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "k", validate_dimension(self.k, "k"))
        object.__setattr__(self, "n", validate_dimension(self.n, "n"))
        us = _frozen(self.unitaries)
        if us.shape != (self.k, self.n, self.n):
            raise DimensionMismatchError(f"expected {self.k} unitaries of size {self.n}, got {us.shape}")
        eye = np.eye(self.n)
        for u in us:
            if not np.allclose(u.conj().T @ u, eye, atol=ISOMETRY_TOL, rtol=0.0):
                raise InvalidStateError("mixture component is not unitary")
        object.__setattr__(self, "unitaries", us)

    def __repr__(self) -> str:
        return f"<RandomUnitaryChannel k={self.k} n={self.n}>"

    @property
    def input_dim(self) -> int:
        return self.n

    @property
    def output_dim(self) -> int:
        return self.n

    def apply(self, rho: np.ndarray) -> DensityMatrix:
        rho = check_square_input(rho, self.n)
        out = np.einsum("iab,bc,idc->ad", self.unitaries, rho, self.unitaries.conj()) / self.k
        return (out + out.conj().T) / 2

    def apply_to_ket(self, x: Ket) -> DensityMatrix:
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.n,):
            raise DimensionMismatchError(f"channel expects a ket of dimension {self.n}, got {x.shape}")
        return self.apply_to_kets(x[None, :])[0]

    def apply_to_kets(self, xs: np.ndarray) -> np.ndarray:
        ys = np.einsum("iab,mb->mia", self.unitaries, np.asarray(xs))
        out = np.einsum("mia,mib->mab", ys, ys.conj()) / self.k
        return (out + np.conj(np.swapaxes(out, 1, 2))) / 2

    def adjoint(self, g: np.ndarray) -> np.ndarray:
        return np.einsum("iba,bc,icd->ad", self.unitaries.conj(), np.asarray(g), self.unitaries) / self.k
