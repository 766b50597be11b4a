from typing import Dict, Optional

from pydantic import BaseModel, Field, computed_field, field_validator

# Every tag a pipeline may attach to a check, with the inequality it stands for.
INEQUALITIES: Dict[str, str] = {
    "second-moment-identity": "E f^2 = (k + n) / (kn + 1) - 1/k for x uniform on the unit sphere",
    "mean-bound": "E f <= 1 / sqrt(n)",
    "median-bound": "median f <= (1 + 3 / sqrt(k)) / sqrt(n)",
    "levy-mean-median-gap": "|E f - median f| <= c1 sqrt(4 pi / (kn - 1))",
    "deviation-tail": "P(f >= median f + h) <= c1 exp(-c2 (2kn - 2) eps^2 / k)",
    "opnorm-bound": "f(x) <= median f implies ||X||_op <= 1 / sqrt(k) + 2 sqrt(k / n)",
    "bell-eigenvalue-bound": "lambda_max((Phi x Phi-bar)(Bell)) >= l / (kn)",
    "bell-max-entropy-profile": "S((Phi x Phi-bar)(Bell)) <= max entropy of a k^2 spectrum with top eigenvalue l/(kn)",
    "bell-upper-dimension-cap": "S((Phi x Phi-bar)(Bell)) <= 2 ln k",
    "net-cardinality": "|N_theta| <= ceil((1 + 2/theta)^(2l))",
    "net-covering": "every unit vector of C^l lies within theta of N_theta",
    "net-bound-soundness": "max f over the subspace <= max f over N_theta / (1 - theta^2 - 2 theta)",
    "net-lower-soundness": "certified S_min lower bound <= heuristic S_min",
    "subspace-existence": "a subspace is found whenever the dimension condition holds",
    "typical-subspace-bound": "max f over a random l-subspace <= the typical-subspace bound",
    "crossover-closed-form": "the crossover root agrees with its closed form",
    "crossover-at-k-star": "the additivity violation holds at k*",
    "crossover-below-k-star": "the additivity violation fails below k*",
    "smin-subadditivity": "S_min(Phi x Phi) <= 2 S_min(Phi)",
    "weyl-average-output": "the Weyl-twirled average output is maximally mixed",
    "weyl-member-entropy": "every Weyl-rotated input has output entropy S_min(Phi)",
    "weyl-capacity-identity": "chi of the Weyl ensemble = ln dim - S_min(Phi)",
}


class CheckResult(BaseModel):
    """One inequality or identity verified by a pipeline."""
    name: str = Field(..., description="What is being checked", json_schema_extra={"example": "moment-identity"})
    tag: str = Field(..., description="Stable tag of the inequality", json_schema_extra={"example": "second-moment-identity"})
    passed: bool
    lhs: Optional[float] = Field(None, description="Measured side")
    rhs: Optional[float] = Field(None, description="Bound or target side")
    slack: Optional[float] = Field(None, description="Statistical or numerical slack granted")
    advisory: bool = Field(default=False, description="Advisory checks never change the exit status")

    @field_validator("tag")
    @classmethod
    def tag_is_known(cls, value: str) -> str:
        if value not in INEQUALITIES:
            raise ValueError(f"unknown inequality tag {value!r}")
        return value

    @computed_field
    @property
    def statement(self) -> str:
        return INEQUALITIES[self.tag]


def inequality(name: str, tag: str, lhs: float, rhs: float, slack: float = 0.0, advisory: bool = False) -> CheckResult:
    """lhs <= rhs + slack."""
    return CheckResult(name=name, tag=tag, passed=bool(lhs <= rhs + slack), lhs=float(lhs), rhs=float(rhs),
                       slack=float(slack), advisory=advisory)


def identity(name: str, tag: str, lhs: float, rhs: float, tol: float, advisory: bool = False) -> CheckResult:
    """|lhs - rhs| <= tol."""
    return CheckResult(name=name, tag=tag, passed=bool(abs(lhs - rhs) <= tol), lhs=float(lhs), rhs=float(rhs),
                       slack=float(tol), advisory=advisory)
