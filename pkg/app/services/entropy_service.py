# app/services/entropy_service.py
"""Entropy functionals, Bell-input bounds and minimum output entropy search.

All entropies are in nats.
"""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from app.dependencies import get_settings
from app.models.channel_model import Channel, StinespringChannel
from app.schemas.check_schema import inequality
from app.schemas.entropy_schema import MoeEstimate
from app.schemas.report_schemas import BellReport, BellRow
from app.services.channel_service import ChannelService
from app.utils.exceptions import InvalidStateError, PreconditionError, UnsupportedDimensionError
from app.utils.linalg import DensityMatrix, Ket, hermitian_eigvals, hs_norm, maximally_mixed, random_unit_vector
from app.utils.seeding import spawn_generators
from app.utils.validators import validate_density_matrix, validate_dimension
from app.utils.worker_pool import run_ordered

settings = get_settings()
logger = logging.getLogger(__name__)

NEGATIVE_EIGVAL_TOL = 1e-9
# Eigenvalues are floored here before taking logs in the gradient weights.
LOG_FLOOR = 1e-300
ARMIJO_C = 1e-4
MAX_HALVINGS = 40
BELL_TOL = 1e-9
DEGENERACY_GAP = 1e-10
START_PERTURBATION = 1e-8

ORACLE_CANDIDATES = 5
ORACLE_MAX_ITER = 2000
ORACLE_GRAD_TOL = 1e-10
ORACLE_BATCH = 50_000


class EntropyService:
    """Entropy functionals and the minimum output entropy search."""

    @classmethod
    def entropy_from_eigvals(cls, eigvals: np.ndarray) -> float:
        eigvals = np.asarray(eigvals, dtype=np.float64)
        if eigvals.size and eigvals.min() < -NEGATIVE_EIGVAL_TOL:
            logger.error(f"Eigenvalue {eigvals.min()} is too negative for a state")
            raise InvalidStateError(f"eigenvalue {eigvals.min()!r} below -{NEGATIVE_EIGVAL_TOL}")
        positive = eigvals[eigvals > 0.0]
        return float(max(0.0, -np.sum(positive * np.log(positive))))

    @classmethod
    def batch_entropies(cls, rhos: np.ndarray) -> np.ndarray:
        """Entropies of a stack of density matrices of shape (m, d, d)."""
        eigvals = np.clip(np.linalg.eigvalsh(rhos), 0.0, None)
        logs = np.log(np.where(eigvals > 0.0, eigvals, 1.0))
        return np.maximum(0.0, -np.sum(eigvals * logs, axis=-1))

    @classmethod
    def von_neumann_entropy(cls, rho: DensityMatrix) -> float:
        """-sum lambda ln lambda over the spectrum, with 0 ln 0 = 0."""
        rho = validate_density_matrix(rho, tol=NEGATIVE_EIGVAL_TOL)
        return cls.entropy_from_eigvals(hermitian_eigvals(rho))

    @classmethod
    def entropy_gap_bound(cls, rho: DensityMatrix, k: int) -> Tuple[float, float]:
        """
        (ln k - S(rho), k * ||rho - I/k||_2^2).

        The first never exceeds the second.
        """
        k = validate_dimension(k, "k")
        rho = validate_density_matrix(rho, k)
        gap = math.log(k) - cls.von_neumann_entropy(rho)
        bound = k * hs_norm(rho - maximally_mixed(k)) ** 2
        return gap, bound

    @classmethod
    def bell_output(cls, channel: StinespringChannel) -> DensityMatrix:
        """(Phi (x) conj Phi)(b_l b_l*), a state on C^k (x) C^k."""
        product = ChannelService.tensor_channels(channel, ChannelService.conjugate_channel(channel))
        return product.apply_to_ket(ChannelService.bell_state(channel.l))

    @classmethod
    def bell_upper_bound_exact(cls, channel: StinespringChannel) -> float:
        return cls.von_neumann_entropy(cls.bell_output(channel))

    @classmethod
    def max_entropy_given_lambda(cls, p: float, d: int) -> float:
        """
        Largest entropy of a d-dimensional state whose top eigenvalue is at least p.

        The maximizer is (p, (1-p)/(d-1), ..., (1-p)/(d-1)).
        """
        d = validate_dimension(d, "d")
        if not 0.0 < p <= 1.0 + 1e-12:
            raise PreconditionError(f"p must lie in (0, 1], got {p}")
        if p < 1.0 / d - 1e-12:
            raise PreconditionError(f"p={p} is below 1/d={1.0 / d}")
        p = min(p, 1.0)
        value = -p * math.log(p) if p < 1.0 else 0.0
        if p < 1.0:
            value -= (1.0 - p) * math.log((1.0 - p) / (d - 1))
        return max(0.0, value)

    @classmethod
    def closed_form_bell_bound(cls, k: int, a: float) -> float:
        """
        Closed-form upper bound 2 ln k - a ln k / k + 2a / k on S_min(Phi (x) conj Phi) for l = a n.

        Only valid for k large enough that ln(1 - a/k) >= -2a/k; certification paths
        use max_entropy_given_lambda instead.
        """
        k = validate_dimension(k, "k")
        if k < 2:
            raise PreconditionError("k must be at least 2")
        if not 0.0 < a <= k:
            raise PreconditionError(f"a must lie in (0, k], got {a}")
        return 2.0 * math.log(k) - a * math.log(k) / k + 2.0 * a / k

    @classmethod
    def output_entropy(cls, channel: Channel, x: Ket) -> float:
        return cls.entropy_from_eigvals(np.linalg.eigvalsh(channel.apply_to_ket(x)))

    @classmethod
    def _value_and_gradient(cls, channel: Channel, x: Ket) -> Tuple[float, np.ndarray, np.ndarray]:
        rho = channel.apply_to_ket(x)
        eigvals, eigvecs = np.linalg.eigh(rho)
        value = cls.entropy_from_eigvals(eigvals)
        weights = -np.log(np.maximum(eigvals, LOG_FLOOR)) - 1.0
        g_out = (eigvecs * weights) @ eigvecs.conj().T
        grad = 2.0 * channel.adjoint(g_out) @ x
        riemannian = grad - np.real(np.vdot(x, grad)) * x
        return value, riemannian, eigvals

    @classmethod
    def _is_degenerate(cls, eigvals: np.ndarray) -> bool:
        return eigvals.size > 1 and float(np.min(np.diff(np.sort(eigvals)))) < DEGENERACY_GAP

    @classmethod
    def descend(cls, channel: Channel, x0: Ket, max_iter: int, grad_tol: float,
                rng: Optional[np.random.Generator] = None) -> Tuple[float, Ket, bool]:
        """
        Riemannian gradient descent of x -> S(Phi(x x*)) on the unit sphere.

        Armijo backtracking by step halving; the step doubles after every accepted move.
        Returns (value, minimizer, converged).
        """
        x = np.asarray(x0, dtype=np.complex128)
        x = x / np.linalg.norm(x)
        value, grad, eigvals = cls._value_and_gradient(channel, x)
        if rng is not None and cls._is_degenerate(eigvals):
            x = x + START_PERTURBATION * random_unit_vector(x.shape[0], rng)
            x = x / np.linalg.norm(x)
            value, grad, eigvals = cls._value_and_gradient(channel, x)
        step = 1.0
        for iteration in range(max_iter):
            grad_norm2 = float(np.real(np.vdot(grad, grad)))
            if math.sqrt(grad_norm2) < grad_tol:
                return value, x, True
            for _ in range(MAX_HALVINGS):
                candidate = x - step * grad
                candidate = candidate / np.linalg.norm(candidate)
                candidate_value = cls.output_entropy(channel, candidate)
                if candidate_value <= value - ARMIJO_C * step * grad_norm2:
                    break
                step /= 2.0
            else:
                logger.debug(f"Line search stalled at iteration {iteration}, value {value:.12f}")
                break
            x = candidate
            value, grad, eigvals = cls._value_and_gradient(channel, x)
            step = min(2.0 * step, 16.0)
        converged = math.sqrt(float(np.real(np.vdot(grad, grad)))) < grad_tol
        return value, x, converged

    @classmethod
    def min_output_entropy_estimate(cls, channel: Channel, restarts: int, rng: np.random.Generator,
                                    max_iter: Optional[int] = None, grad_tol: Optional[float] = None,
                                    workers: Optional[int] = None) -> MoeEstimate:
        """
        Multi-start estimate of S_min(Phi) over pure inputs; an upper bound on the true value.

        Restart i always sees the same substream, so more restarts never give a worse value.
        """
        if restarts < 1:
            raise PreconditionError("restarts must be at least 1")
        max_iter = settings.moe_max_iter if max_iter is None else max_iter
        grad_tol = settings.moe_grad_tol if grad_tol is None else grad_tol
        generators = spawn_generators(rng, restarts)

        def run_restart(gen: np.random.Generator) -> Tuple[float, Ket, bool]:
            start = random_unit_vector(channel.input_dim, gen)
            return cls.descend(channel, start, max_iter, grad_tol, gen)

        results = run_ordered(run_restart, generators, workers)
        best = min(range(restarts), key=lambda i: (results[i][0], i))
        value, minimizer, converged = results[best]
        logger.debug(f"S_min estimate {value:.10f} from {restarts} restarts (best restart {best})")
        return MoeEstimate(value=cls.output_entropy(channel, minimizer), minimizer=minimizer,
                           restarts=restarts, converged=converged)

    @classmethod
    def _projective_grid(cls, l: int, resolution: int) -> np.ndarray:
        """Grid of unit vectors covering CP^{l-1} (first coordinate real and nonnegative)."""
        if l == 1:
            return np.ones((1, 1), dtype=np.complex128)
        polar = np.linspace(0.0, np.pi / 2, resolution)
        phase = np.linspace(0.0, 2 * np.pi, resolution, endpoint=False)
        if l == 2:
            a, p = np.meshgrid(polar, phase, indexing="ij")
            a, p = a.ravel(), p.ravel()
            return np.stack([np.cos(a), np.exp(1j * p) * np.sin(a)], axis=1).astype(np.complex128)
        a, b, p1, p2 = (g.ravel() for g in np.meshgrid(polar, polar, phase, phase, indexing="ij"))
        return np.stack([np.cos(a),
                         np.exp(1j * p1) * np.sin(a) * np.cos(b),
                         np.exp(1j * p2) * np.sin(a) * np.sin(b)], axis=1).astype(np.complex128)

    @classmethod
    def min_output_entropy_minimizer(cls, channel: Channel, grid_resolution: Optional[int] = None) -> Tuple[float, Ket]:
        """
        Brute-force reference: exhaustive projective grid, then local refinement of the best few points.

        Deterministic; limited to input dimension at most 3.
        """
        l = channel.input_dim
        if l > 3:
            raise UnsupportedDimensionError(f"grid oracle supports l <= 3, got l={l}")
        resolution = settings.oracle_resolution if grid_resolution is None else grid_resolution
        grid = cls._projective_grid(l, resolution)
        values: List[np.ndarray] = []
        for start in range(0, grid.shape[0], ORACLE_BATCH):
            values.append(cls.batch_entropies(channel.apply_to_kets(grid[start:start + ORACLE_BATCH])))
        values = np.concatenate(values)
        order = np.argsort(values, kind="stable")[:ORACLE_CANDIDATES]
        best_value, best_x = float(values[order[0]]), grid[order[0]]
        for index in order:
            value, x, _ = cls.descend(channel, grid[index], ORACLE_MAX_ITER, ORACLE_GRAD_TOL)
            if value < best_value:
                best_value, best_x = value, x
        logger.debug(f"Oracle minimum {best_value:.12f} over {grid.shape[0]} grid points")
        return best_value, best_x

    @classmethod
    def min_output_entropy_oracle(cls, channel: Channel, grid_resolution: Optional[int] = None) -> float:
        return cls.min_output_entropy_minimizer(channel, grid_resolution)[0]

    @classmethod
    def bell_eigenvalue_experiment(cls, l: int, k: int, n: int, channels: int, rng: np.random.Generator,
                                   workers: Optional[int] = None) -> BellReport:
        """
        Top eigenvalue and entropy of the Bell-input output for `channels` random subspace channels.

        Each draw must have lambda_max >= l/(kn) and, when l/(kn) >= 1/k^2, entropy at most
        max_entropy_given_lambda(l/(kn), k^2).
        """
        lambda_bound = l / (k * n)
        use_profile = lambda_bound >= 1.0 / k ** 2

        def draw(task: Tuple[int, np.random.Generator]) -> BellRow:
            index, gen = task
            rho = cls.bell_output(ChannelService.random_subspace_channel(l, k, n, gen))
            eigvals = hermitian_eigvals(rho)
            return BellRow(seed_index=index, lambda_max=float(eigvals[0]), lambda_bound=lambda_bound,
                           bell_entropy=cls.entropy_from_eigvals(eigvals),
                           max_entropy_bound=cls.max_entropy_given_lambda(lambda_bound, k * k) if use_profile else None)

        rows = run_ordered(draw, list(enumerate(spawn_generators(rng, channels))), workers)
        min_lambda = min(row.lambda_max for row in rows)
        checks = [inequality("top Bell-output eigenvalue", "bell-eigenvalue-bound", lambda_bound, min_lambda,
                             BELL_TOL)]
        if use_profile:
            worst = max(row.bell_entropy - row.max_entropy_bound for row in rows)
            checks.append(inequality("Bell-output entropy below the max-entropy profile", "bell-max-entropy-profile",
                                     worst, 0.0, BELL_TOL))
        closed_form = cls.closed_form_bell_bound(k, l / n) if k >= 2 and l / n <= k else None
        for check in checks:
            if not check.passed:
                logger.warning(f"Check {check.tag} failed at (l={l}, k={k}, n={n})")
        return BellReport(l=l, k=k, n=n, channels=channels, min_lambda_max=min_lambda, lambda_bound=lambda_bound,
                          max_bell_entropy=max(row.bell_entropy for row in rows), bell_closed_form=closed_form,
                          rows=rows, checks=checks)
