from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer


class MoeEstimate(BaseModel):
    """Best value found by the multi-start minimum-output-entropy search (an upper bound on S_min)."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    value: float = Field(..., ge=0.0, description="Output entropy at the minimizer, in nats")
    minimizer: np.ndarray = Field(..., description="Unit input ket reaching `value`")
    restarts: int = Field(..., ge=1)
    converged: bool = Field(..., description="Whether the winning restart met the gradient tolerance")

    @field_serializer("minimizer")
    def serialize_minimizer(self, minimizer: np.ndarray) -> List[List[float]]:
        return [[float(z.real), float(z.imag)] for z in minimizer]
