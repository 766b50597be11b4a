# app/services/concentration_service.py
"""The deviation function f(x) = ||X X* - Tr[X X*] I/k||_2 and its concentration bounds.

Monte Carlo work is split into chunks of ``settings.chunk_size`` samples, each on
its own substream, so estimates depend only on the seed and never on the number
of workers.
"""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from app.schemas.check_schema import identity, inequality
from app.schemas.report_schemas import MomentReport, OpNormReport, TailReport, TailRow
from app.utils.exceptions import DimensionMismatchError, PreconditionError
from app.utils.linalg import Ket, ket_to_matrix, op_norm, random_unit_vectors
from app.utils.validators import validate_dimension
from app.utils.worker_pool import run_chunked

logger = logging.getLogger(__name__)

# Normal Levy family constants of the unit sphere.
C1 = math.sqrt(math.pi / 8)
C2 = 0.5

LIPSCHITZ_TOL = 1e-12
MEDIAN_SLACK_WIDTH = 1.5


class ConcentrationService:
    @classmethod
    def f_value(cls, x: Ket, k: int, n: int) -> float:
        X = ket_to_matrix(x, k, n)
        A = X @ X.conj().T
        return float(np.linalg.norm(A - np.trace(A).real * np.eye(k) / k, "fro"))

    @classmethod
    def f_values(cls, xs: np.ndarray, k: int, n: int) -> np.ndarray:
        """f on every row of an (m, k*n) array."""
        xs = np.asarray(xs, dtype=np.complex128)
        if xs.ndim != 2 or xs.shape[1] != k * n:
            raise DimensionMismatchError(f"rows of shape {xs.shape} are not vectors of C^{k} (x) C^{n}")
        X = xs.reshape(-1, k, n)
        A = X @ X.conj().transpose(0, 2, 1)
        trace = np.trace(A, axis1=1, axis2=2).real
        # ||A - t I/k||_2^2 = ||A||_2^2 - t^2/k
        squared = np.sum(np.abs(A) ** 2, axis=(1, 2)) - trace ** 2 / k
        return np.sqrt(np.clip(squared, 0.0, None))

    @classmethod
    def f_max(cls, k: int) -> float:
        """Largest value of f on the unit sphere, reached at rank-one X."""
        return math.sqrt((k - 1) / k)

    @classmethod
    def exact_second_moment(cls, k: int, n: int) -> float:
        """E f^2 = (k+n)/(kn+1) - 1/k for x uniform on the unit sphere."""
        k = validate_dimension(k, "k")
        n = validate_dimension(n, "n")
        return max(0.0, (k + n) / (k * n + 1) - 1.0 / k)

    @classmethod
    def h_bound(cls, k: int, alpha: float, epsilon: float) -> float:
        k = validate_dimension(k, "k")
        if alpha < 0 or epsilon < 0:
            raise PreconditionError(f"alpha and epsilon must be nonnegative, got alpha={alpha}, epsilon={epsilon}")
        return 2.0 * epsilon * (1.0 + 2.0 * alpha + epsilon) / k

    @classmethod
    def deviation_bound_rhs(cls, k: int, n: int, epsilon: float) -> float:
        """c1 exp{-epsilon^2 (n - 1/k)}, the Levy tail of f above median + h."""
        k = validate_dimension(k, "k")
        n = validate_dimension(n, "n")
        if epsilon < 0:
            raise PreconditionError(f"epsilon must be nonnegative, got {epsilon}")
        # Levy on the real sphere of dimension 2kn - 1, at distance epsilon / sqrt(k)
        return C1 * math.exp(-C2 * (2 * k * n - 2) * epsilon ** 2 / k)

    @classmethod
    def mean_median_gap_bound(cls, k: int, n: int) -> float:
        """Levy-type bound c1 sqrt(4 pi / (kn - 1)) on |E f - med f|."""
        k = validate_dimension(k, "k")
        n = validate_dimension(n, "n")
        if k * n == 1:
            return 0.0
        return C1 * math.sqrt(4.0 * math.pi / (k * n - 1))

    @classmethod
    def lower_median(cls, values: np.ndarray) -> float:
        ordered = np.sort(values)
        return float(ordered[(ordered.shape[0] - 1) // 2])

    @classmethod
    def median_lower_confidence(cls, values: np.ndarray) -> float:
        """Order statistic below the median by 1.5 sqrt(N) ranks; a conservative lower bound on the true median."""
        ordered = np.sort(values)
        count = ordered.shape[0]
        rank = max(0, int(math.floor(count / 2 - MEDIAN_SLACK_WIDTH * math.sqrt(count))))
        return float(ordered[rank])

    @classmethod
    def sample_f(cls, k: int, n: int, trials: int, rng: np.random.Generator,
                 chunk_size: Optional[int] = None, workers: Optional[int] = None) -> np.ndarray:
        """f at `trials` uniform points of the unit sphere of C^k (x) C^n."""
        chunks = run_chunked(lambda size, gen: cls.f_values(random_unit_vectors(size, k * n, gen), k, n),
                             trials, rng, chunk_size, workers)
        return np.concatenate(chunks)

    @classmethod
    def estimate_moments(cls, k: int, n: int, trials: int, rng: np.random.Generator,
                         chunk_size: Optional[int] = None, workers: Optional[int] = None) -> MomentReport:
        k = validate_dimension(k, "k")
        n = validate_dimension(n, "n")
        if trials < 100:
            raise PreconditionError(f"at least 100 trials are needed, got {trials}")
        logger.info(f"Estimating moments of f at k={k}, n={n} over {trials} trials")
        f = cls.sample_f(k, n, trials, rng, chunk_size, workers)
        f2 = f ** 2
        root = math.sqrt(trials)
        mean_f, mean_f2 = float(f.mean()), float(f2.mean())
        stderr_mean = float(f.std(ddof=1)) / root
        stderr_f2 = float(f2.std(ddof=1)) / root
        median_f = cls.lower_median(f)
        median_slack = median_f - cls.median_lower_confidence(f)
        exact_f2 = cls.exact_second_moment(k, n)
        bound_mean = 1.0 / math.sqrt(n)
        bound_median = (1.0 + 3.0 / math.sqrt(k)) / math.sqrt(n)
        gap_bound = cls.mean_median_gap_bound(k, n)
        checks = [
            inequality("mean of f", "mean-bound", mean_f, bound_mean, 2.0 * stderr_mean),
            inequality("median of f", "median-bound", median_f, bound_median, median_slack),
            identity("second moment of f", "second-moment-identity", mean_f2, exact_f2,
                     3.0 * stderr_f2 + LIPSCHITZ_TOL),
            inequality("mean-median gap", "levy-mean-median-gap", abs(mean_f - median_f), gap_bound, advisory=True),
        ]
        for check in checks:
            if not check.passed:
                logger.warning(f"Check {check.tag} failed at k={k}, n={n}: {check.lhs} vs {check.rhs}")
        return MomentReport(
            k=k, n=n, trials=trials, mean_f=mean_f, stderr_mean=stderr_mean, median_f=median_f, mean_f2=mean_f2,
            stderr_f2=stderr_f2, exact_f2=exact_f2, bound_mean=bound_mean, bound_median=bound_median,
            median_slack=median_slack, bound_mean_median_gap=gap_bound, checks=checks,
        )

    @classmethod
    def empirical_tail(cls, k: int, n: int, epsilon_grid: Sequence[float], trials: int, rng: np.random.Generator,
                       chunk_size: Optional[int] = None, workers: Optional[int] = None) -> TailReport:
        """
        Exceedance frequency of f above (empirical median + h) for each epsilon.

        alpha is fixed by k^2 = alpha^2 n. The fully analytic threshold, with the
        median replaced by its analytic bound, is reported alongside.
        """
        k = validate_dimension(k, "k")
        n = validate_dimension(n, "n")
        if trials < 1000:
            raise PreconditionError(f"at least 1000 trials are needed, got {trials}")
        alpha = k / math.sqrt(n)
        logger.info(f"Tail experiment at k={k}, n={n}, alpha={alpha:.4f} over {trials} trials")
        f = cls.sample_f(k, n, trials, rng, chunk_size, workers)
        median_f = cls.lower_median(f)
        bound_median = (1.0 + 3.0 / math.sqrt(k)) / math.sqrt(n)
        rows, checks = [], []
        for epsilon in epsilon_grid:
            h = cls.h_bound(k, alpha, epsilon)
            bound = cls.deviation_bound_rhs(k, n, epsilon)
            stderr = math.sqrt(bound * max(0.0, 1.0 - bound) / trials)
            row = TailRow(
                epsilon=float(epsilon), threshold_used=median_f + h, h=h,
                empirical_tail=float(np.mean(f > median_f + h)), analytic_bound=bound, binomial_stderr=stderr,
                analytic_threshold=bound_median + h, empirical_tail_analytic=float(np.mean(f > bound_median + h)),
            )
            rows.append(row)
            if bound <= 1.0:
                checks.append(inequality(f"tail at epsilon={epsilon:g}", "deviation-tail", row.empirical_tail, bound,
                                         3.0 * stderr))
            logger.debug(f"epsilon={epsilon:g}: frequency {row.empirical_tail:.3e}, bound {bound:.3e}")
        return TailReport(k=k, n=n, trials=trials, alpha=alpha, median_f=median_f, rows=rows, checks=checks)

    @classmethod
    def lipschitz_bound_check(cls, x: Ket, y: Ket, k: int, n: int) -> Tuple[float, float]:
        """(|f(x) - f(y)|, (||X||_inf + ||Y||_inf) ||X - Y||_2)."""
        X, Y = ket_to_matrix(x, k, n), ket_to_matrix(y, k, n)
        lhs = abs(cls.f_value(x, k, n) - cls.f_value(y, k, n))
        rhs = (op_norm(X) + op_norm(Y)) * float(np.linalg.norm(X - Y, "fro"))
        return lhs, rhs

    @classmethod
    def opnorm_bound_check(cls, k: int, n: int, trials: int, rng: np.random.Generator,
                           chunk_size: Optional[int] = None, workers: Optional[int] = None) -> OpNormReport:
        """Operator norm of X on samples with f(x) at most the empirical median, against 1/sqrt(k) + 2 sqrt(k/n)."""
        k = validate_dimension(k, "k")
        n = validate_dimension(n, "n")
        if trials < 1000:
            raise PreconditionError(f"at least 1000 trials are needed, got {trials}")

        def chunk(size: int, gen: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
            xs = random_unit_vectors(size, k * n, gen)
            return cls.f_values(xs, k, n), np.linalg.norm(xs.reshape(-1, k, n), 2, axis=(1, 2))

        chunks = run_chunked(chunk, trials, rng, chunk_size, workers)
        f = np.concatenate([c[0] for c in chunks])
        norms = np.concatenate([c[1] for c in chunks])
        median_f = cls.lower_median(f)
        bound = 1.0 / math.sqrt(k) + 2.0 * math.sqrt(k / n)
        conditioned = norms[f <= median_f]
        violations = int(np.sum(conditioned > bound + LIPSCHITZ_TOL))
        fraction = violations / conditioned.shape[0]
        check = inequality("operator norm below the median", "opnorm-bound", fraction, 0.0,
                           MEDIAN_SLACK_WIDTH / math.sqrt(trials))
        if not check.passed:
            logger.warning(f"{violations} conditioned samples exceed the operator-norm bound {bound:.4f}")
        return OpNormReport(
            k=k, n=n, trials=trials, median_f=median_f, bound=bound, vacuous=bound >= 1.0,
            conditioned_samples=int(conditioned.shape[0]), violations=violations, violation_fraction=fraction,
            max_op_norm=float(conditioned.max()), checks=[check],
        )
