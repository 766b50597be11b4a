from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator

CONSTRUCTIONS = ("deterministic-grid", "greedy-verified")


class CoveringCertificate(BaseModel):
    """How the covering radius of a net was established."""
    method: Literal["construction", "monte-carlo"] = Field(
        ..., description="'construction' when the grid geometry proves the radius, 'monte-carlo' for a sampled check")
    samples: int = Field(0, ge=0, description="Sphere samples behind a monte-carlo certificate")
    max_observed_gap: float = Field(..., ge=0.0, description="Proven or largest observed distance to the net")
    phase_quotient: bool = Field(False, description="Distances were measured modulo global phase")


class NetRecord(BaseModel):
    """Serialized theta-net with its certificate and a SHA-256 digest of the content."""
    l: int = Field(..., ge=1, json_schema_extra={"example": 2})
    theta: float = Field(..., gt=0.0, le=0.25, json_schema_extra={"example": 0.25})
    construction: Literal["deterministic-grid", "greedy-verified"]
    phase_quotient: bool = False
    points: List[List[List[float]]] = Field(..., description="Each point as l [re, im] pairs")
    certificate: Optional[CoveringCertificate] = None
    sha256: str = Field("", description="Digest of every other field, checked on load")

    @field_validator("points")
    @classmethod
    def check_pairs(cls, value):
        if any(len(pair) != 2 for point in value for pair in point):
            raise ValueError("every amplitude must be a [re, im] pair")
        return value
