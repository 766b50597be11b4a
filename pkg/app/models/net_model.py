import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from app.schemas.net_schema import CONSTRUCTIONS, CoveringCertificate
from app.utils.exceptions import ConstructionError, DimensionMismatchError, InvalidStateError, PreconditionError
from app.utils.validators import KET_NORM_TOL, validate_dimension

# Rows closer than this are the same net point.
DEDUP_DECIMALS = 12


def net_cardinality_bound(l: int, theta: float) -> int:
    """Ceiling of (1 + 2/theta)^(2l), the volumetric size bound of a theta-net of the unit sphere of C^l."""
    l = validate_dimension(l, "l")
    if theta <= 0:
        raise PreconditionError(f"theta must be positive, got {theta}")
    return math.ceil((1.0 + 2.0 / theta) ** (2 * l) - 1e-9)


def chord_distances(samples: np.ndarray, points: np.ndarray, phase_quotient: bool) -> np.ndarray:
    """
    Matrix of Euclidean distances between rows of `samples` and rows of `points`.

    With the phase quotient the distance is minimized over a global phase of the sample.
    """
    overlaps = samples.conj() @ points.T
    similarity = np.abs(overlaps) if phase_quotient else overlaps.real
    return np.sqrt(np.clip(2.0 - 2.0 * similarity, 0.0, None))


@dataclass(frozen=True, eq=False)
class ThetaNet:
    """
    Finite set of unit vectors in C^l within chord distance theta of every point of the unit sphere.

    With `phase_quotient` the covering holds modulo a global phase, which is all
    that phase-invariant functions such as f need.
    """
    l: int
    theta: float
    points: np.ndarray = field(repr=False)
    construction: str = "deterministic-grid"
    phase_quotient: bool = False
    certificate: Optional[CoveringCertificate] = None

    def __post_init__(self):
        object.__setattr__(self, "l", validate_dimension(self.l, "l"))
        if not 0.0 < self.theta <= 0.25:
            raise PreconditionError(f"theta must lie in (0, 1/4], got {self.theta}")
        if self.construction not in CONSTRUCTIONS:
            raise PreconditionError(f"unknown construction {self.construction!r}")
        points = np.array(self.points, dtype=np.complex128, copy=True)
        if points.ndim != 2 or points.shape[1] != self.l or points.shape[0] == 0:
            raise DimensionMismatchError(f"net points must form an (m, {self.l}) array, got {points.shape}")
        if not np.allclose(np.linalg.norm(points, axis=1), 1.0, atol=1e-10, rtol=0.0):
            raise InvalidStateError("every net point must be a unit vector")
        if points.shape[0] > net_cardinality_bound(self.l, self.theta):
            raise ConstructionError(f"{points.shape[0]} points exceed the bound {net_cardinality_bound(self.l, self.theta)}")
        if self.certificate is not None and self.certificate.max_observed_gap > self.theta + KET_NORM_TOL:
            raise ConstructionError(f"certificate gap {self.certificate.max_observed_gap} exceeds theta={self.theta}")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    def __len__(self) -> int:
        return self.points.shape[0]

    def __repr__(self) -> str:
        return (f"<ThetaNet l={self.l} theta={self.theta} size={len(self)} "
                f"construction={self.construction} phase_quotient={self.phase_quotient}>")
