# app/services/capacity_service.py
"""Discrete Weyl operators, the Weyl channel extension and ensemble Holevo values."""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from app.dependencies import get_settings
from app.models.channel_model import Channel, RandomUnitaryChannel, StinespringChannel
from app.models.weyl_model import Ensemble, WeylExtendedChannel, WeylLabel, weyl_basis, weyl_matrix
from app.schemas.check_schema import CheckResult, identity, inequality
from app.schemas.report_schemas import ExtensionReport
from app.services.channel_service import ChannelService
from app.services.entropy_service import EntropyService
from app.utils.exceptions import DimensionMismatchError, PreconditionError, UnsupportedDimensionError
from app.utils.linalg import ComplexMatrix, DensityMatrix
from app.utils.worker_pool import run_ordered

settings = get_settings()
logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-9
SUBADDITIVITY_TOL = 1e-3
ORACLE_MAX_L = 3
DEFAULT_RESTARTS = 8


class CapacityService:
    @classmethod
    def weyl_operator(cls, z: WeylLabel) -> ComplexMatrix:
        """W_z = U^x V^y."""
        return weyl_matrix(z)

    @classmethod
    def weyl_twirl(cls, A: np.ndarray) -> ComplexMatrix:
        """(1/k^2) sum_z W_z A W_z*, which equals (Tr A / k) I_k."""
        A = np.asarray(A, dtype=np.complex128)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionMismatchError(f"twirl needs a square matrix, got shape {A.shape}")
        ops = weyl_basis(A.shape[0])
        return np.einsum("zab,bc,zdc->ad", ops, A, ops.conj()) / ops.shape[0]

    @classmethod
    def weyl_extend(cls, channel: Channel, moduli: Optional[Sequence[int]] = None) -> WeylExtendedChannel:
        """Weyl extension with one label register (the default) or one register per modulus."""
        moduli = (channel.output_dim,) if moduli is None else tuple(moduli)
        return WeylExtendedChannel(channel, moduli)

    @classmethod
    def depolarizing_weyl_channel(cls, k: int) -> RandomUnitaryChannel:
        """Uniform mixture of all k^2 Weyl conjugations: the completely depolarizing channel on C^k."""
        ops = weyl_basis(k)
        return RandomUnitaryChannel(ops.shape[0], k, ops)

    @classmethod
    def ensemble_holevo_value(cls, channel: Channel, ensemble: Ensemble, workers: Optional[int] = None) -> float:
        """S(Phi(sum_i p_i rho_i)) - sum_i p_i S(Phi(rho_i)) for this ensemble."""
        if ensemble.dim != channel.input_dim:
            raise DimensionMismatchError(f"ensemble states live in dimension {ensemble.dim}, "
                                         f"the channel input is {channel.input_dim}")
        entropies = run_ordered(lambda rho: EntropyService.von_neumann_entropy(channel.apply(rho)),
                                list(ensemble.states), workers)
        average = EntropyService.von_neumann_entropy(channel.apply(ensemble.average()))
        return average - float(np.dot(ensemble.probabilities, entropies))

    @classmethod
    def weyl_capacity_ensemble(cls, channel: Channel, rho0: DensityMatrix,
                               moduli: Optional[Sequence[int]] = None) -> Ensemble:
        """Equal-weight ensemble of e_z e_z* (x) rho0 over every label string z of the Weyl extension of `channel`."""
        states = cls.weyl_extend(channel, moduli).label_states(rho0)
        return Ensemble(tuple([1.0 / len(states)] * len(states)), tuple(states))

    @classmethod
    def _minimizer(cls, channel: StinespringChannel, rng: np.random.Generator,
                   restarts: int) -> Tuple[float, np.ndarray]:
        if channel.l <= ORACLE_MAX_L:
            return EntropyService.min_output_entropy_minimizer(channel)
        estimate = EntropyService.min_output_entropy_estimate(channel, restarts, rng)
        return estimate.value, estimate.minimizer

    @classmethod
    def verify_extension_identity(cls, phi: StinespringChannel, omega: StinespringChannel, m: int, n: int,
                                  rng: np.random.Generator, restarts: int = DEFAULT_RESTARTS) -> ExtensionReport:
        """
        Check chi of the Weyl ensemble on the extension of Phi^(x m) (x) Omega^(x n).

        With rho0 the minimizing input of the base product, the ensemble's average
        output must be maximally mixed, every member must have output entropy
        S_min of the base, and hence chi_ens = ln(k^m k'^n) - S_min.
        """
        if m not in (0, 1) or n not in (0, 1) or m + n == 0:
            raise PreconditionError(f"(m, n) must be (1, 0), (0, 1) or (1, 1), got ({m}, {n})")
        factors = [phi] * m + [omega] * n
        base = factors[0] if len(factors) == 1 else ChannelService.tensor_channels(*factors)
        max_dim = settings.max_product_dim
        if base.l > max_dim or base.k > max_dim:
            raise UnsupportedDimensionError(f"base channel {base} exceeds max_product_dim={max_dim}")
        moduli = [channel.k for channel in factors]
        extension = cls.weyl_extend(base, moduli)
        smin, x0 = cls._minimizer(base, rng, restarts)
        rho0 = np.outer(x0, x0.conj())
        ensemble = cls.weyl_capacity_ensemble(base, rho0, moduli)
        chi = cls.ensemble_holevo_value(extension, ensemble)
        avg_entropy = EntropyService.von_neumann_entropy(extension.apply(ensemble.average()))
        member_entropies = [EntropyService.von_neumann_entropy(extension.apply(rho)) for rho in ensemble.states]
        ln_dim = math.log(base.k)
        residual = abs(chi - (ln_dim - smin))
        checks = [
            identity("average output is maximally mixed", "weyl-average-output", avg_entropy, ln_dim, IDENTITY_TOL),
            identity("every member has the base S_min", "weyl-member-entropy",
                     max(member_entropies, key=lambda s: abs(s - smin)), smin, IDENTITY_TOL),
            identity("chi_ens = ln dim - S_min", "weyl-capacity-identity", chi, ln_dim - smin, IDENTITY_TOL),
        ]
        for check in checks:
            if not check.passed:
                logger.warning(f"Extension check {check.tag} failed: {check.lhs} vs {check.rhs}")
        return ExtensionReport(
            m=m, n=n, dims=[list(channel.dims) for channel in factors], chi_ens_nats=chi,
            avg_output_entropy_nats=avg_entropy, per_string_entropy_nats=member_entropies[0], smin_estimate_nats=smin,
            identity_residual=residual, checks=checks,
        )

    @classmethod
    def subadditivity_check(cls, channel: StinespringChannel, rng: np.random.Generator,
                            restarts: int = DEFAULT_RESTARTS) -> CheckResult:
        """Advisory: heuristic S_min(Phi (x) Phi) <= 2 heuristic S_min(Phi) + 1e-3."""
        single = EntropyService.min_output_entropy_estimate(channel, restarts, rng).value
        square = ChannelService.tensor_channels(channel, channel)
        double = EntropyService.min_output_entropy_estimate(square, restarts, rng).value
        check = inequality("S_min of the square below twice S_min", "smin-subadditivity", double, 2.0 * single,
                           SUBADDITIVITY_TOL, advisory=True)
        if not check.passed:
            logger.warning(f"Subadditivity estimate off by {double - 2.0 * single:.2e} for {channel}")
        return check
