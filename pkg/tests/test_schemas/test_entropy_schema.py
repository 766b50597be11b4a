import numpy as np
import pytest
from pydantic import ValidationError

from app.schemas.entropy_schema import MoeEstimate


def test_moe_estimate_serializes_minimizer():
    estimate = MoeEstimate(value=0.5, minimizer=np.array([1.0, 1j]) / np.sqrt(2), restarts=1, converged=True)
    assert np.allclose(estimate.model_dump()["minimizer"], [[2 ** -0.5, 0.0], [0.0, 2 ** -0.5]])


def test_moe_estimate_needs_a_restart():
    with pytest.raises(ValidationError):
        MoeEstimate(value=0.5, minimizer=np.array([1.0 + 0j]), restarts=0, converged=True)
    with pytest.raises(ValidationError):
        MoeEstimate(value=-0.1, minimizer=np.array([1.0 + 0j]), restarts=1, converged=True)
