from typing import List

from pydantic import BaseModel, Field, field_validator


class ChannelRecord(BaseModel):
    """Serialized Stinespring channel: dimensions and isometry entries as [re, im] pairs, row-major."""
    l: int = Field(..., ge=1, description="Input dimension", json_schema_extra={"example": 2})
    k: int = Field(..., ge=1, description="Output dimension", json_schema_extra={"example": 2})
    n: int = Field(..., ge=1, description="Environment dimension", json_schema_extra={"example": 2})
    entries: List[List[float]] = Field(..., description="Entries of V, shape (k*n) x l, as [re, im] pairs")

    @field_validator("entries")
    @classmethod
    def check_pairs(cls, value):
        if any(len(pair) != 2 for pair in value):
            raise ValueError("every entry must be a [re, im] pair")
        return value
