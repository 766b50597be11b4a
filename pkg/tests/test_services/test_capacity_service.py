import math

import numpy as np
import pytest

from app.models.weyl_model import Ensemble, WeylLabel
from app.services.capacity_service import CapacityService
from app.services.channel_service import ChannelService
from app.services.entropy_service import EntropyService
from app.utils.exceptions import DimensionMismatchError, PreconditionError
from app.utils.linalg import random_density_matrix, standard_complex_normal


def test_weyl_operator():
    assert np.allclose(CapacityService.weyl_operator(WeylLabel(1, 1, 2)), np.array([[0, -1], [1, 0]]))
    assert np.allclose(CapacityService.weyl_operator(WeylLabel(0, 0, 3)), np.eye(3))


# Twirling over all Weyl operators keeps only the trace
@pytest.mark.parametrize("k", [2, 3, 5])
def test_weyl_twirl(k, rng):
    A = standard_complex_normal(rng, (k, k))
    assert np.allclose(CapacityService.weyl_twirl(A), np.trace(A) / k * np.eye(k), atol=1e-12)


def test_weyl_twirl_needs_square_input():
    with pytest.raises(DimensionMismatchError):
        CapacityService.weyl_twirl(np.ones((2, 3)))


def test_depolarizing_weyl_channel(random_state):
    channel = CapacityService.depolarizing_weyl_channel(3)
    assert np.allclose(channel.apply(random_state(3)), np.eye(3) / 3, atol=1e-12)


def test_ensemble_holevo_value(qubit_identity, qubit_constant):
    basis = Ensemble((0.5, 0.5), (np.diag([1.0, 0.0]), np.diag([0.0, 1.0])))
    assert CapacityService.ensemble_holevo_value(qubit_identity, basis) == pytest.approx(math.log(2), abs=1e-12)
    assert CapacityService.ensemble_holevo_value(qubit_constant, basis) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DimensionMismatchError):
        CapacityService.ensemble_holevo_value(qubit_identity, Ensemble((1.0,), (np.eye(3) / 3,)))


def test_weyl_capacity_ensemble(channel_222):
    ensemble = CapacityService.weyl_capacity_ensemble(channel_222, np.diag([1.0, 0.0]))
    assert len(ensemble.states) == 4
    assert ensemble.dim == CapacityService.weyl_extend(channel_222).input_dim
    assert sum(ensemble.probabilities) == pytest.approx(1.0)


# Holds for any rho0, not only the minimizing input
def test_capacity_ensemble_value_for_mixed_input(channel_222, random_state):
    rho0 = random_state(2)
    ensemble = CapacityService.weyl_capacity_ensemble(channel_222, rho0)
    chi = CapacityService.ensemble_holevo_value(CapacityService.weyl_extend(channel_222), ensemble)
    expected = math.log(2) - EntropyService.von_neumann_entropy(channel_222.apply(rho0))
    assert chi == pytest.approx(expected, abs=1e-12)


def test_extension_keeps_the_minimum_output_entropy(channel_222, seeded):
    smin, _ = EntropyService.min_output_entropy_minimizer(channel_222)
    extension = CapacityService.weyl_extend(channel_222)
    estimate = EntropyService.min_output_entropy_estimate(extension, 16, seeded(41), max_iter=3000)
    assert estimate.value == pytest.approx(smin, abs=1e-4)


# No ensemble beats ln k - S_min on the extension
def test_random_ensembles_stay_below_capacity(channel_222, seeded):
    smin, _ = EntropyService.min_output_entropy_minimizer(channel_222)
    extension = CapacityService.weyl_extend(channel_222)
    gen = seeded(42)
    for _ in range(100):
        size = int(gen.integers(1, 6))
        ensemble = Ensemble(tuple(gen.dirichlet(np.ones(size))),
                            tuple(random_density_matrix(extension.input_dim, gen) for _ in range(size)))
        assert CapacityService.ensemble_holevo_value(extension, ensemble) <= math.log(2) - smin + 1e-6


def test_verify_extension_identity_single(channel_222, rng):
    conjugate = ChannelService.conjugate_channel(channel_222)
    report = CapacityService.verify_extension_identity(channel_222, conjugate, 1, 0, rng)
    assert report.passed
    assert report.identity_residual <= 1e-9
    assert report.avg_output_entropy_nats == pytest.approx(math.log(2), abs=1e-9)
    assert report.chi_ens_nats == pytest.approx(math.log(2) - report.smin_estimate_nats, abs=1e-9)


def test_verify_extension_identity_product(channel_222, rng):
    conjugate = ChannelService.conjugate_channel(channel_222)
    report = CapacityService.verify_extension_identity(channel_222, conjugate, 1, 1, rng, restarts=4)
    assert report.passed
    assert report.dims == [[2, 2, 2], [2, 2, 2]]
    assert report.avg_output_entropy_nats == pytest.approx(math.log(4), abs=1e-9)


@pytest.mark.parametrize("m, n", [(0, 0), (2, 0), (1, 2)])
def test_verify_extension_identity_rejects_copies(channel_222, rng, m, n):
    with pytest.raises(PreconditionError):
        CapacityService.verify_extension_identity(channel_222, channel_222, m, n, rng)


def test_subadditivity_check(channel_222, rng):
    check = CapacityService.subadditivity_check(channel_222, rng, restarts=4)
    assert check.tag == "smin-subadditivity"
    assert check.advisory
