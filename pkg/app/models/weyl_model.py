import math
from dataclasses import dataclass, field
from functools import reduce
from typing import List, Tuple

import numpy as np

from app.models.channel_model import Channel, check_square_input
from app.utils.exceptions import DimensionMismatchError, InvalidStateError, PreconditionError
from app.utils.linalg import ComplexMatrix, DensityMatrix, Ket
from app.utils.validators import validate_density_matrix, validate_dimension

PROBABILITY_TOL = 1e-12


@dataclass(frozen=True)
class WeylLabel:
    """Label z = (x, y) in Z_k x Z_k of the Weyl operator U^x V^y."""
    x: int
    y: int
    k: int

    def __post_init__(self):
        validate_dimension(self.k, "k")
        if not (0 <= self.x < self.k and 0 <= self.y < self.k):
            raise PreconditionError(f"label ({self.x}, {self.y}) is outside Z_{self.k} x Z_{self.k}")

    @property
    def index(self) -> int:
        return self.x * self.k + self.y

    @classmethod
    def from_index(cls, index: int, k: int) -> "WeylLabel":
        return cls(index // k, index % k, k)


def shift_and_clock(k: int) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """U e_r = e_{r+1} and V e_r = exp(2 pi i r / k) e_r."""
    shift = np.roll(np.eye(k, dtype=np.complex128), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(k) / k))
    return shift, clock


def weyl_matrix(label: WeylLabel) -> ComplexMatrix:
    shift, clock = shift_and_clock(label.k)
    return np.linalg.matrix_power(shift, label.x) @ np.linalg.matrix_power(clock, label.y)


def weyl_basis(k: int) -> np.ndarray:
    """All k^2 Weyl operators on C^k, stacked in label order z = x k + y."""
    k = validate_dimension(k, "k")
    return np.stack([weyl_matrix(WeylLabel.from_index(z, k)) for z in range(k * k)])


def joint_weyl_basis(moduli: Tuple[int, ...]) -> np.ndarray:
    """Tensor products W_{z_1} (x) ... (x) W_{z_r} over all label strings, first register slowest."""
    bases = [weyl_basis(k) for k in moduli]
    return reduce(lambda acc, ops: np.einsum("iab,jcd->ijacbd", acc, ops).reshape(
        acc.shape[0] * ops.shape[0], acc.shape[1] * ops.shape[1], acc.shape[2] * ops.shape[2]), bases)


@dataclass(frozen=True)
class Ensemble:
    """Finite ensemble {p_i, rho_i} of states of one common dimension."""
    probabilities: Tuple[float, ...]
    states: Tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        probabilities = tuple(float(p) for p in self.probabilities)
        if len(probabilities) != len(self.states) or not probabilities:
            raise DimensionMismatchError("an ensemble needs one probability per state")
        if min(probabilities) < 0 or abs(sum(probabilities) - 1.0) > PROBABILITY_TOL:
            raise InvalidStateError("ensemble probabilities must be nonnegative and sum to 1")
        dim = np.asarray(self.states[0]).shape[0]
        states = tuple(validate_density_matrix(rho, dim) for rho in self.states)
        object.__setattr__(self, "probabilities", probabilities)
        object.__setattr__(self, "states", states)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def average(self) -> DensityMatrix:
        return sum(p * rho for p, rho in zip(self.probabilities, self.states))


@dataclass(frozen=True, eq=False)
class WeylExtendedChannel:
    """
    Extension rho -> sum_z W_z Phi((e_z* (x) I) rho (e_z (x) I)) W_z* of a base channel.

    The input is C^L (x) C^l with one label register of dimension k_j^2 per
    modulus (label registers first, then the base input); W_z is the tensor
    product of the per-register Weyl operators, so prod k_j must equal the base
    output dimension. Evaluated by formula, never as an isometry.
    """
    base: Channel
    moduli: Tuple[int, ...]
    operators: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        moduli = tuple(validate_dimension(k, "modulus") for k in self.moduli)
        if math.prod(moduli) != self.base.output_dim:
            raise DimensionMismatchError(
                f"moduli {moduli} do not factor the base output dimension {self.base.output_dim}")
        operators = joint_weyl_basis(moduli)
        operators.setflags(write=False)
        object.__setattr__(self, "moduli", moduli)
        object.__setattr__(self, "operators", operators)

    def __repr__(self) -> str:
        return f"<WeylExtendedChannel moduli={self.moduli} base={self.base!r}>"

    @property
    def labels(self) -> int:
        return self.operators.shape[0]

    @property
    def input_dim(self) -> int:
        return self.labels * self.base.input_dim

    @property
    def output_dim(self) -> int:
        return self.base.output_dim

    def _twist(self, blocks: np.ndarray) -> np.ndarray:
        """sum_z W_z B_z W_z* for blocks of shape (..., L, k, k)."""
        out = np.einsum("zab,...zbc,zdc->...ad", self.operators, blocks, self.operators.conj())
        return (out + np.conj(np.swapaxes(out, -1, -2))) / 2

    def apply(self, rho: np.ndarray) -> DensityMatrix:
        rho = check_square_input(rho, self.input_dim)
        l = self.base.input_dim
        diagonal = np.einsum("zazb->zab", rho.reshape(self.labels, l, self.labels, l))
        return self._twist(np.stack([self.base.apply(block) for block in diagonal]))

    def apply_to_ket(self, x: Ket) -> DensityMatrix:
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.input_dim,):
            raise DimensionMismatchError(f"channel expects a ket of dimension {self.input_dim}, got {x.shape}")
        return self.apply_to_kets(x[None, :])[0]

    def apply_to_kets(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.complex128)
        l, k = self.base.input_dim, self.output_dim
        outputs = self.base.apply_to_kets(xs.reshape(-1, l)).reshape(xs.shape[0], self.labels, k, k)
        return self._twist(outputs)

    def adjoint(self, g: np.ndarray) -> np.ndarray:
        """Block diagonal with blocks Phi^dagger(W_z* G W_z)."""
        g = np.asarray(g, dtype=np.complex128)
        l = self.base.input_dim
        out = np.zeros((self.input_dim, self.input_dim), dtype=np.complex128)
        for z, w in enumerate(self.operators):
            out[z * l:(z + 1) * l, z * l:(z + 1) * l] = self.base.adjoint(w.conj().T @ g @ w)
        return out

    def label_states(self, rho0: DensityMatrix) -> List[DensityMatrix]:
        """e_z e_z* (x) rho0 for every label string z."""
        rho0 = validate_density_matrix(rho0, self.base.input_dim)
        states = []
        for z in range(self.labels):
            projector = np.zeros((self.labels, self.labels), dtype=np.complex128)
            projector[z, z] = 1.0
            states.append(np.kron(projector, rho0))
        return states
