# app/services/channel_service.py
import logging
from pathlib import Path
from typing import Union

import numpy as np

from app.models.channel_model import Channel, RandomUnitaryChannel, StinespringChannel
from app.schemas.channel_schema import ChannelRecord
from app.utils.exceptions import DimensionMismatchError, InvalidDimensionError
from app.utils.linalg import DensityMatrix, Ket, haar_unitary, partial_trace_env
from app.utils.validators import validate_dimension, validate_ket

logger = logging.getLogger(__name__)


class ChannelService:
    """Random subspace channels and the constructions built from them."""

    @classmethod
    def random_subspace_channel(cls, l: int, k: int, n: int, rng: np.random.Generator) -> StinespringChannel:
        """Channel whose subspace is U E_0 for Haar U on C^{kn}: the first l columns of U."""
        l, k, n = validate_dimension(l, "l"), validate_dimension(k, "k"), validate_dimension(n, "n")
        if l > k * n:
            logger.error(f"Cannot embed C^{l} into C^{k} (x) C^{n}")
            raise InvalidDimensionError(f"l={l} exceeds k*n={k * n}")
        U = haar_unitary(k * n, rng)
        return StinespringChannel(l, k, n, U[:, :l])

    @classmethod
    def identity_channel(cls, l: int) -> StinespringChannel:
        l = validate_dimension(l, "l")
        return StinespringChannel(l, l, 1, np.eye(l))

    @classmethod
    def constant_channel(cls, l: int, k: int) -> StinespringChannel:
        """
        Channel sending every input to I_k / k.

        V x = k^{-1/2} sum_i e_i (x) (e_i (x) x), with environment C^k (x) C^l.
        """
        l, k = validate_dimension(l, "l"), validate_dimension(k, "k")
        n = k * l
        V = np.zeros((k * n, l), dtype=np.complex128)
        for i in range(k):
            for j in range(l):
                V[i * n + i * l + j, j] = 1.0 / np.sqrt(k)
        return StinespringChannel(l, k, n, V)

    @classmethod
    def apply(cls, channel: Channel, rho: np.ndarray) -> DensityMatrix:
        return channel.apply(rho)

    @classmethod
    def apply_to_ket(cls, channel: Channel, x: Ket) -> DensityMatrix:
        x = validate_ket(x, channel.input_dim)
        return channel.apply_to_ket(x)

    @classmethod
    def conjugate_channel(cls, channel: StinespringChannel) -> StinespringChannel:
        """The complex-conjugate channel, represented by the entrywise conjugate isometry."""
        return StinespringChannel(channel.l, channel.k, channel.n, channel.V.conj())

    @classmethod
    def complementary_channel(cls, channel: StinespringChannel) -> StinespringChannel:
        """Same isometry with output and environment swapped: rho -> Tr_k[V rho V*]."""
        l, k, n = channel.dims
        V = channel.V.reshape(k, n, l).transpose(1, 0, 2).reshape(n * k, l)
        return StinespringChannel(l, n, k, V)

    @classmethod
    def tensor_channels(cls, phi: StinespringChannel, omega: StinespringChannel) -> StinespringChannel:
        """
        Product channel with isometry V_phi (x) V_omega.

        The rows of the Kronecker product come out as (k1, n1, k2, n2); they are
        permuted to (k1, k2, n1, n2) so the joint environment is one contiguous leg.
        """
        l1, k1, n1 = phi.dims
        l2, k2, n2 = omega.dims
        big = np.kron(phi.V, omega.V).reshape(k1, n1, k2, n2, l1 * l2)
        V = big.transpose(0, 2, 1, 3, 4).reshape(k1 * k2 * n1 * n2, l1 * l2)
        return StinespringChannel(l1 * l2, k1 * k2, n1 * n2, V)

    @classmethod
    def bell_state(cls, d: int) -> Ket:
        """b_d = d^{-1/2} sum_i e_i (x) e_i."""
        d = validate_dimension(d)
        return np.eye(d, dtype=np.complex128).reshape(-1) / np.sqrt(d)

    @classmethod
    def choi_matrix(cls, channel: StinespringChannel) -> np.ndarray:
        """
        l * (Phi (x) id)(b_l b_l*), an operator on C^k (x) C^l.

        Positive semidefinite exactly when the map is completely positive.
        """
        l, k, n = channel.dims
        # (V (x) I) b_l as a tensor over (k, n, l), then trace out n.
        t = channel.V.reshape(k, n, l) / np.sqrt(l)
        rho = np.einsum("anb,cnd->abcd", t, t.conj()).reshape(k * l, k * l)
        return l * (rho + rho.conj().T) / 2

    @classmethod
    def random_unitary_channel(cls, k: int, n: int, rng: np.random.Generator) -> RandomUnitaryChannel:
        k, n = validate_dimension(k, "k"), validate_dimension(n, "n")
        unitaries = np.stack([haar_unitary(n, rng) for _ in range(k)])
        return RandomUnitaryChannel(k, n, unitaries)

    @classmethod
    def apply_ru(cls, channel: RandomUnitaryChannel, rho: np.ndarray) -> DensityMatrix:
        return channel.apply(rho)

    @classmethod
    def pure_output_via_environment_trace(cls, channel: StinespringChannel, x: Ket) -> DensityMatrix:
        """Phi(x x*) computed as Tr_n of the embedded vector V x."""
        x = validate_ket(x, channel.l)
        return partial_trace_env(channel.V @ x, channel.k, channel.n)

    @classmethod
    def to_record(cls, channel: StinespringChannel) -> ChannelRecord:
        entries = [[float(z.real), float(z.imag)] for z in channel.V.reshape(-1)]
        return ChannelRecord(l=channel.l, k=channel.k, n=channel.n, entries=entries)

    @classmethod
    def from_record(cls, record: ChannelRecord) -> StinespringChannel:
        values = np.array(record.entries, dtype=np.float64)
        expected = record.k * record.n * record.l
        if values.shape != (expected, 2):
            raise DimensionMismatchError(f"record holds {values.shape[0]} entries, expected {expected}")
        V = (values[:, 0] + 1j * values[:, 1]).reshape(record.k * record.n, record.l)
        return StinespringChannel(record.l, record.k, record.n, V)

    @classmethod
    def save_channel(cls, channel: StinespringChannel, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(cls.to_record(channel).model_dump_json(indent=2), encoding="utf-8")
        logger.info(f"Saved channel {channel} to {path}")
        return path

    @classmethod
    def load_channel(cls, path: Union[str, Path]) -> StinespringChannel:
        return cls.from_record(ChannelRecord.model_validate_json(Path(path).read_text(encoding="utf-8")))
