from typing import ClassVar, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, SerializeAsAny

from app.schemas.check_schema import CheckResult


class Report(BaseModel):
    """Base for every pipeline output: a data payload plus the checks it verified."""
    checks: List[CheckResult] = Field(default_factory=list)

    csv_columns: ClassVar[Tuple[str, ...]] = ()

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks if not check.advisory)

    def columns(self) -> Tuple[str, ...]:
        return self.csv_columns

    def all_checks(self) -> List[CheckResult]:
        return list(self.checks)

    def csv_rows(self) -> List[Dict[str, object]]:
        data = self.model_dump()
        return [{column: data.get(column) for column in self.csv_columns}]


class MomentReport(Report):
    k: int
    n: int
    trials: int = Field(..., ge=2)
    mean_f: float
    stderr_mean: float
    median_f: float
    mean_f2: float
    stderr_f2: float
    exact_f2: float = Field(..., ge=0.0)
    bound_mean: float = Field(..., description="1/sqrt(n)")
    bound_median: float = Field(..., description="(1 + 3/sqrt(k))/sqrt(n)")
    median_slack: float = Field(..., ge=0.0, description="Distribution-free order-statistic slack on the median")
    bound_mean_median_gap: float = Field(..., description="Concentration bound on |mean - median|")

    csv_columns: ClassVar[Tuple[str, ...]] = (
        "k", "n", "trials", "mean_f", "stderr_mean", "median_f", "mean_f2", "stderr_f2",
        "exact_f2", "bound_mean", "bound_median",
    )


class TailRow(BaseModel):
    epsilon: float
    threshold_used: float
    h: float
    empirical_tail: float = Field(..., ge=0.0, le=1.0)
    analytic_bound: float = Field(..., gt=0.0)
    binomial_stderr: float
    analytic_threshold: float = Field(..., description="bound_median + h, the fully analytic threshold")
    empirical_tail_analytic: float = Field(..., ge=0.0, le=1.0)


class TailReport(Report):
    k: int
    n: int
    trials: int
    alpha: float = Field(..., description="k / sqrt(n)")
    median_f: float
    rows: List[TailRow]

    csv_columns: ClassVar[Tuple[str, ...]] = (
        "k", "n", "trials", "alpha", "epsilon", "h", "threshold_used", "empirical_tail", "analytic_bound",
        "binomial_stderr", "analytic_threshold", "empirical_tail_analytic",
    )

    @property
    def epsilon_grid(self) -> List[float]:
        return [row.epsilon for row in self.rows]

    @property
    def empirical_tail(self) -> List[float]:
        return [row.empirical_tail for row in self.rows]

    @property
    def analytic_bound(self) -> List[float]:
        return [row.analytic_bound for row in self.rows]

    def csv_rows(self) -> List[Dict[str, object]]:
        head = {"k": self.k, "n": self.n, "trials": self.trials, "alpha": self.alpha}
        return [{column: {**head, **row.model_dump()}.get(column) for column in self.csv_columns} for row in self.rows]


class OpNormReport(Report):
    k: int
    n: int
    trials: int
    median_f: float
    bound: float = Field(..., description="1/sqrt(k) + 2 sqrt(k/n)")
    vacuous: bool = Field(..., description="True when the bound is at least 1, the trivial operator-norm bound")
    conditioned_samples: int
    violations: int
    violation_fraction: float
    max_op_norm: float

    csv_columns: ClassVar[Tuple[str, ...]] = (
        "k", "n", "trials", "median_f", "bound", "vacuous", "conditioned_samples", "violations",
        "violation_fraction", "max_op_norm",
    )


class BellRow(BaseModel):
    seed_index: int
    lambda_max: float
    lambda_bound: float
    bell_entropy: float
    max_entropy_bound: Optional[float] = None


class BellReport(Report):
    l: int
    k: int
    n: int
    channels: int
    min_lambda_max: float
    lambda_bound: float = Field(..., description="l / (k n)")
    max_bell_entropy: float
    bell_closed_form: Optional[float] = Field(None, description="Asymptotic closed form, for comparison only")
    rows: List[BellRow]

    csv_columns: ClassVar[Tuple[str, ...]] = ("l", "k", "n", "seed_index", "lambda_max", "lambda_bound",
                                              "bell_entropy", "max_entropy_bound")

    def csv_rows(self) -> List[Dict[str, object]]:
        head = {"l": self.l, "k": self.k, "n": self.n}
        return [{column: {**head, **row.model_dump()}.get(column) for column in self.csv_columns} for row in self.rows]


class GapReport(BaseModel):
    l: int
    k: int
    n: int
    theta: float
    seed: Optional[int] = None
    net_size: int
    net_max_f: float = Field(..., description="Largest f over the pushed-forward net")
    c_theta: float
    lower_nats: float = Field(..., ge=0.0, description="Certified lower bound on S_min(Phi)")
    bell_upper_nats: float = Field(..., ge=0.0, description="Certified upper bound on S_min(Phi (x) conj Phi)")
    gap_nats: float = Field(..., description="2 * lower - upper")
    certified: bool
    heuristic_smin_nats: float = Field(..., description="Multi-start estimate of S_min(Phi), context only")
    heuristic_converged: bool = True
    error: Optional[str] = None

    csv_columns: ClassVar[Tuple[str, ...]] = (
        "k", "n", "l", "theta", "seed", "net_size", "net_max_f", "c_theta", "lower_nats", "bell_upper_nats",
        "gap_nats", "certified", "heuristic_smin_nats",
    )


class GapScanReport(Report):
    rows: List[GapReport] = Field(default_factory=list)
    failed_rows: List[Dict[str, object]] = Field(default_factory=list)

    csv_columns: ClassVar[Tuple[str, ...]] = GapReport.csv_columns

    @property
    def passed(self) -> bool:
        return super().passed and not self.failed_rows

    def csv_rows(self) -> List[Dict[str, object]]:
        return [{column: row.model_dump().get(column) for column in self.csv_columns} for row in self.rows]


class CrossoverReport(Report):
    a: float
    theta: float
    beta_zero: bool
    alpha: float
    epsilon: float
    C: float
    ln_k_star: float = Field(..., description="ln of the smallest k meeting the strict inequality; inf if none")
    k_star: float = Field(..., description="k* itself, inf when it overflows a double")
    infinite: bool

    csv_columns: ClassVar[Tuple[str, ...]] = ("a", "theta", "beta_zero", "alpha", "epsilon", "C", "ln_k_star",
                                              "k_star", "infinite")


class NetCertifyReport(Report):
    l: int
    theta: float
    construction: str
    phase_quotient: bool
    net_size: int
    cardinality_bound: int
    covering_samples: int
    max_gap: float
    covering_pass: bool
    channels: int
    c_theta: float
    min_soundness_margin: float = Field(..., description="min over channels of c_theta * net max - sampled max of f")
    soundness_failures: int

    csv_columns: ClassVar[Tuple[str, ...]] = ("l", "theta", "construction", "phase_quotient", "net_size",
                                              "cardinality_bound", "covering_samples", "max_gap", "covering_pass",
                                              "channels", "c_theta", "min_soundness_margin", "soundness_failures")


class ExtensionReport(Report):
    m: int
    n: int
    dims: List[List[int]] = Field(..., description="(l, k, n) of each base channel")
    chi_ens_nats: float
    avg_output_entropy_nats: float
    per_string_entropy_nats: float
    smin_estimate_nats: float
    identity_residual: float

    csv_columns: ClassVar[Tuple[str, ...]] = ("m", "n", "chi_ens_nats", "avg_output_entropy_nats",
                                              "per_string_entropy_nats", "smin_estimate_nats", "identity_residual")


class TypicalBoundReport(Report):
    l: int
    k: int
    n: int
    bound: float
    f_max: float = Field(..., description="sqrt((k-1)/k), the largest value f can take")
    vacuous: bool
    sampled_net_bound: Optional[float] = Field(None, description="c_theta * net max on one random subspace")

    csv_columns: ClassVar[Tuple[str, ...]] = ("l", "k", "n", "bound", "f_max", "vacuous", "sampled_net_bound")


class SubspaceSearchReport(Report):
    l: int
    k: int
    n: int
    theta: float
    epsilon: float
    target: float = Field(..., description="Right-hand side of the existence bound")
    condition_holds: bool
    tries: int
    successes: int
    success_rate: float
    found: bool
    best_bound: float = Field(..., description="Smallest c_theta * net max seen")

    csv_columns: ClassVar[Tuple[str, ...]] = ("l", "k", "n", "theta", "epsilon", "target", "condition_holds",
                                              "tries", "successes", "success_rate", "found", "best_bound")


class MultiReport(Report):
    """Several reports of one kind produced by a grid run."""
    items: List[SerializeAsAny[Report]] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return super().passed and all(item.passed for item in self.items)

    def columns(self) -> Tuple[str, ...]:
        return self.items[0].columns() if self.items else self.csv_columns

    def all_checks(self) -> List[CheckResult]:
        checks = list(self.checks)
        for item in self.items:
            checks.extend(item.all_checks())
        return checks

    def csv_rows(self) -> List[Dict[str, object]]:
        rows: List[Dict[str, object]] = []
        for item in self.items:
            rows.extend(item.csv_rows())
        return rows
