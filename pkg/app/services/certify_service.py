# app/services/certify_service.py
"""Certified bounds on the additivity gap S_min(Phi) + S_min(conj Phi) - S_min(Phi (x) conj Phi)."""
import logging
import math
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from app.dependencies import get_settings
from app.models.channel_model import StinespringChannel
from app.models.net_model import ThetaNet
from app.schemas.check_schema import identity, inequality
from app.schemas.report_schemas import (
    CrossoverReport,
    GapReport,
    GapScanReport,
    SubspaceSearchReport,
    TypicalBoundReport,
)
from app.services.channel_service import ChannelService
from app.services.concentration_service import ConcentrationService
from app.services.entropy_service import EntropyService
from app.services.net_service import NetService
from app.utils.exceptions import DimensionMismatchError, LabError, PreconditionError, UnsupportedDimensionError
from app.utils.linalg import random_unit_vectors
from app.utils.seeding import row_generator, spawn_generators
from app.utils.validators import validate_dimension
from app.utils.worker_pool import run_ordered

settings = get_settings()
logger = logging.getLogger(__name__)

SOUNDNESS_TOL = 1e-6
DIMENSION_CAP_TOL = 1e-9
CONDITION_RTOL = 1e-12
CERTIFIED_MAX_L = 3
DEFAULT_RESTARTS = 8
ROOT_XTOL = 1e-15


class CertifyService:
    @classmethod
    def _check_net(cls, channel: StinespringChannel, theta: float, net: ThetaNet) -> None:
        if net.l != channel.l:
            raise DimensionMismatchError(f"net lives in C^{net.l} but the channel input is C^{channel.l}")
        if net.theta > theta:
            raise PreconditionError(f"a net of radius {net.theta} is not a {theta}-net")

    @classmethod
    def lower_from_net_max(cls, k: int, theta: float, net_max: float) -> float:
        """max(0, ln k - k (c_theta M)^2)."""
        return max(0.0, math.log(k) - k * (NetService.correction_factor(theta) * net_max) ** 2)

    @classmethod
    def certified_smin_lower(cls, channel: StinespringChannel, theta: float, net: ThetaNet) -> float:
        """Lower bound on S_min(Phi) from the net maximum of f and ln k - S(rho) <= k ||rho - I/k||_2^2."""
        cls._check_net(channel, theta, net)
        net_max, _ = NetService.net_max_f(channel, net)
        return cls.lower_from_net_max(channel.k, theta, net_max)

    @classmethod
    def certified_product_upper(cls, channel: StinespringChannel) -> float:
        """Exact Bell-input output entropy of Phi (x) conj Phi, an upper bound on its S_min."""
        if channel.k ** 2 > settings.max_product_dim or channel.l ** 2 > settings.max_product_dim:
            raise UnsupportedDimensionError(
                f"product of {channel} exceeds max_product_dim={settings.max_product_dim}")
        return EntropyService.bell_upper_bound_exact(channel)

    @classmethod
    def violation_gap(cls, channel: StinespringChannel, theta: float, net: ThetaNet, rng: np.random.Generator,
                      restarts: int = DEFAULT_RESTARTS, seed: Optional[int] = None) -> GapReport:
        cls._check_net(channel, theta, net)
        net_max, _ = NetService.net_max_f(channel, net)
        lower = cls.lower_from_net_max(channel.k, theta, net_max)
        upper = cls.certified_product_upper(channel)
        gap = 2.0 * lower - upper
        estimate = EntropyService.min_output_entropy_estimate(channel, restarts, rng)
        if lower > estimate.value + SOUNDNESS_TOL:
            logger.warning(f"Certified lower bound {lower:.8f} is above the heuristic S_min "
                           f"{estimate.value:.8f} for {channel}")
        return GapReport(
            l=channel.l, k=channel.k, n=channel.n, theta=theta, seed=seed, net_size=len(net), net_max_f=net_max,
            c_theta=NetService.correction_factor(theta), lower_nats=lower, bell_upper_nats=upper, gap_nats=gap,
            certified=gap > 0.0, heuristic_smin_nats=estimate.value, heuristic_converged=estimate.converged,
        )

    @classmethod
    def exist_subspace_condition(cls, l: int, n: int, theta: float, epsilon: float) -> bool:
        """l/n <= epsilon^2 / (4 ln(1 + 2/theta)), with relative tolerance 1e-12 for the equality case."""
        l, n = validate_dimension(l, "l"), validate_dimension(n, "n")
        NetService.correction_factor(theta)
        rhs = epsilon ** 2 / (4.0 * math.log(1.0 + 2.0 / theta))
        return l / n <= rhs * (1.0 + CONDITION_RTOL)

    @classmethod
    def thebound_rhs(cls, k: int, alpha: float, theta: float, epsilon: float) -> Tuple[float, float]:
        """(c_theta (h(k, alpha, epsilon) + 4 alpha / k), C) with C = k times the bound."""
        h = ConcentrationService.h_bound(k, alpha, epsilon)
        value = NetService.correction_factor(theta) * (h + 4.0 * alpha / k)
        return value, k * value

    @classmethod
    def typical_bound_rhs(cls, l: int, k: int, n: int) -> Tuple[float, bool]:
        """Typical-subspace bound on max f and whether it exceeds the global maximum sqrt((k-1)/k)."""
        if min(l, k, n) < 2:
            raise PreconditionError(f"l, k and n must all be at least 2, got ({l}, {k}, {n})")
        value = (15.0 / k * math.sqrt(l / n) + 30.0 * math.sqrt(l) / n + 36.0 * l / (k * n) + 10.0 / math.sqrt(n))
        return value, value > ConcentrationService.f_max(k)

    @classmethod
    def crossover_constant(cls, a: float, theta: float, beta_zero: bool,
                           beta: Optional[float] = None) -> Tuple[float, float, float]:
        """(C, alpha, epsilon) with epsilon = 2 sqrt(a ln(1 + 2/theta)) and alpha = 0 or sqrt(beta)."""
        if a <= 0:
            raise PreconditionError(f"a must be positive, got {a}")
        if beta_zero:
            alpha = 0.0
        elif beta is None or beta <= 0:
            raise PreconditionError("beta must be given and positive unless beta_zero is set")
        else:
            alpha = math.sqrt(beta)
        epsilon = 2.0 * math.sqrt(a * math.log(1.0 + 2.0 / theta))
        C = NetService.correction_factor(theta) * (2.0 * epsilon * (1.0 + 2.0 * alpha + epsilon) + 4.0 * alpha)
        return C, alpha, epsilon

    @classmethod
    def crossover_ln_k(cls, a: float, C: float) -> float:
        """Closed-form boundary ln k = 2 + 2C^2/a of a ln k - 2a > 2C^2."""
        if a <= 0:
            raise PreconditionError(f"a must be positive, got {a}")
        return 2.0 + 2.0 * C ** 2 / a

    @classmethod
    def _violation_holds(cls, a: float, C: float, ln_k: float) -> bool:
        return a * ln_k - 2.0 * a > 2.0 * C ** 2

    @classmethod
    def solve_crossover_ln_k(cls, a: float, C: float, cap: Optional[float] = None) -> float:
        """
        ln of the smallest integer k with a ln k - 2a > 2C^2.

        The root of a t - 2a - 2C^2 is bracketed by doubling t and then located by
        Brent's method. Returns inf when no k with ln k <= cap qualifies.
        """
        cap = settings.ln_k_cap if cap is None else cap
        high = 1.0
        while not cls._violation_holds(a, C, high):
            if high >= cap:
                return math.inf
            high = min(2.0 * high, cap)
        low = high / 2.0 if high > 1.0 else 0.0
        root = brentq(lambda t: a * t - 2.0 * a - 2.0 * C ** 2, low, high, xtol=ROOT_XTOL)
        while not cls._violation_holds(a, C, root):
            root = math.nextafter(root, math.inf)
        if root < 700.0:
            return math.log(math.floor(math.exp(root)) + 1)
        return root

    @classmethod
    def analytic_crossover(cls, a: float, theta: float, beta_zero: bool,
                           beta: Optional[float] = None) -> Tuple[float, float]:
        """(k*, C); k* is inf when it is out of reach or overflows a double."""
        C, _, _ = cls.crossover_constant(a, theta, beta_zero, beta)
        ln_k = cls.solve_crossover_ln_k(a, C)
        k_star = math.exp(ln_k) if ln_k < 709.0 else math.inf
        return k_star, C

    @classmethod
    def crossover_report(cls, a: float, theta: float, beta_zero: bool, beta: Optional[float] = None) -> CrossoverReport:
        C, alpha, epsilon = cls.crossover_constant(a, theta, beta_zero, beta)
        ln_k = cls.solve_crossover_ln_k(a, C)
        infinite = math.isinf(ln_k)
        checks = []
        if not infinite:
            closed = cls.crossover_ln_k(a, C)
            checks.append(identity("root against closed form", "crossover-closed-form", ln_k, closed,
                                   1e-9 * closed + (math.log1p(math.exp(-closed)) if closed < 700.0 else 0.0)))
            checks.append(inequality("violation holds at k*", "crossover-at-k-star",
                                     2.0 * C ** 2 - a * (ln_k - 2.0), 0.0))
            checks.append(inequality("violation fails at k*/2", "crossover-below-k-star",
                                     a * (ln_k - math.log(2.0) - 2.0) - 2.0 * C ** 2, 0.0))
        logger.info(f"Crossover at a={a}, theta={theta}: C={C:.4f}, ln k*={ln_k}")
        return CrossoverReport(
            a=a, theta=theta, beta_zero=beta_zero, alpha=alpha, epsilon=epsilon, C=C, ln_k_star=ln_k,
            k_star=math.exp(ln_k) if ln_k < 709.0 else math.inf, infinite=infinite, checks=checks,
        )

    @classmethod
    def gap_scan(cls, grid: Sequence[Tuple[int, int, int]], seeds: Sequence[int], theta: float,
                 restarts: int = DEFAULT_RESTARTS, workers: Optional[int] = None,
                 phase_quotient: Optional[bool] = None) -> GapScanReport:
        """
        One GapReport per (k, n, l) in `grid` and per seed, in grid order.

        Row (dims index i, seed s) draws its channel from substream (s, i), so a row is
        reproducible on its own. Rows whose net or channel cannot be built are kept as
        failure records and the scan goes on.
        """
        if phase_quotient is None:
            phase_quotient = settings.net_phase_quotient
        nets: Dict[int, ThetaNet] = {}
        tasks = [(index, dims, seed) for index, dims in enumerate(grid) for seed in seeds]

        def net_for(l: int) -> ThetaNet:
            if l > CERTIFIED_MAX_L:
                raise UnsupportedDimensionError(f"certified scans support l <= {CERTIFIED_MAX_L}, got l={l}")
            if l not in nets:
                nets[l] = NetService.build_theta_net(l, theta, phase_quotient=phase_quotient)
            return nets[l]

        for l in sorted({dims[2] for dims in grid}):
            try:
                net_for(l)
            except LabError as e:
                logger.error(f"No net for l={l}: {e}")

        def run_row(task) -> GapReport:
            index, (k, n, l), seed = task
            try:
                rng = row_generator(seed, index)
                channel = ChannelService.random_subspace_channel(l, k, n, rng)
                report = cls.violation_gap(channel, theta, net_for(l), rng, restarts, seed)
                logger.debug(f"Row (k={k}, n={n}, l={l}, seed={seed}): gap {report.gap_nats:.6f}")
                return report
            except LabError as e:
                logger.error(f"Scan row (k={k}, n={n}, l={l}, seed={seed}) failed: {e}")
                return GapReport(l=l, k=k, n=n, theta=theta, seed=seed, net_size=0, net_max_f=0.0, c_theta=0.0,
                                 lower_nats=0.0, bell_upper_nats=0.0, gap_nats=0.0, certified=False,
                                 heuristic_smin_nats=0.0, heuristic_converged=False, error=str(e))

        results = run_ordered(run_row, tasks, workers)
        rows = [row for row in results if row.error is None]
        failed = [{"k": row.k, "n": row.n, "l": row.l, "seed": row.seed, "error": row.error}
                  for row in results if row.error is not None]
        checks = []
        for row in rows:
            label = f"(k={row.k}, n={row.n}, l={row.l}, seed={row.seed})"
            checks.append(inequality(f"lower bound below heuristic S_min {label}", "net-lower-soundness",
                                     row.lower_nats, row.heuristic_smin_nats, SOUNDNESS_TOL))
            checks.append(inequality(f"Bell upper bound below 2 ln k {label}", "bell-upper-dimension-cap",
                                     row.bell_upper_nats, 2.0 * math.log(row.k), DIMENSION_CAP_TOL))
        logger.info(f"Gap scan finished: {len(rows)} rows, {len(failed)} failed, "
                    f"{sum(row.certified for row in rows)} certified")
        return GapScanReport(rows=rows, failed_rows=failed, checks=checks)

    @classmethod
    def find_good_subspace(cls, l: int, k: int, n: int, theta: float, epsilon: float, rng: np.random.Generator,
                           net: Optional[ThetaNet] = None, max_tries: Optional[int] = None,
                           stop_at_first: bool = True) -> SubspaceSearchReport:
        """
        Sample random subspaces until c_theta times the net max of f is at most c_theta (h + 4 alpha / k).

        With `stop_at_first=False` every one of `max_tries` subspaces is tried and the
        empirical success rate is reported.
        """
        max_tries = settings.subspace_retry_cap if max_tries is None else max_tries
        alpha = k / math.sqrt(n)
        target, _ = cls.thebound_rhs(k, alpha, theta, epsilon)
        if net is None:
            net = NetService.build_theta_net(l, theta, phase_quotient=settings.net_phase_quotient)
        c_theta = NetService.correction_factor(theta)
        tries = successes = 0
        best = math.inf
        for gen in spawn_generators(rng, max_tries):
            tries += 1
            net_max, _ = NetService.net_max_f(ChannelService.random_subspace_channel(l, k, n, gen), net)
            best = min(best, c_theta * net_max)
            if c_theta * net_max <= target:
                successes += 1
                if stop_at_first:
                    break
        condition = cls.exist_subspace_condition(l, n, theta, epsilon)
        found = successes > 0
        check = inequality("subspace found when the dimension condition holds", "subspace-existence",
                           0.0 if found or not condition else 1.0, 0.0, advisory=True)
        if not check.passed:
            logger.warning(f"No subspace met the bound {target:.4f} in {tries} tries at (l={l}, k={k}, n={n})")
        return SubspaceSearchReport(
            l=l, k=k, n=n, theta=theta, epsilon=epsilon, target=target, condition_holds=condition, tries=tries,
            successes=successes, success_rate=successes / tries, found=found, best_bound=best, checks=[check],
        )

    @classmethod
    def typical_subspace_comparison(cls, l: int, k: int, n: int, theta: float,
                                    rng: Optional[np.random.Generator] = None,
                                    samples: int = 10_000) -> TypicalBoundReport:
        """
        Typical-subspace bound on max f, compared with what one sampled subspace shows.

        For l <= 3 a random subspace is drawn and both its net bound c_theta M and the
        largest f seen at `samples` random points of it are reported.
        """
        bound, vacuous = cls.typical_bound_rhs(l, k, n)
        sampled = None
        checks = []
        if rng is not None and l <= CERTIFIED_MAX_L:
            channel = ChannelService.random_subspace_channel(l, k, n, rng)
            net = NetService.build_theta_net(l, theta, phase_quotient=settings.net_phase_quotient)
            net_max, _ = NetService.net_max_f(channel, net)
            sampled = NetService.correction_factor(theta) * net_max
            points = channel.embed(random_unit_vectors(samples, l, rng))
            observed = float(ConcentrationService.f_values(points, k, n).max())
            checks.append(inequality("sampled max of f below the net bound", "net-bound-soundness", observed, sampled))
            checks.append(inequality("sampled max of f below the typical bound", "typical-subspace-bound",
                                     observed, bound, advisory=True))
        return TypicalBoundReport(l=l, k=k, n=n, bound=bound, f_max=ConcentrationService.f_max(k),
                                  vacuous=vacuous, sampled_net_bound=sampled, checks=checks)
