import math

import numpy as np
import pytest

from app.services.channel_service import ChannelService
from app.services.concentration_service import ConcentrationService
from app.utils.exceptions import DimensionMismatchError, PreconditionError
from app.utils.linalg import basis_ket, haar_unitary, random_unit_vector, random_unit_vectors


def test_closed_forms():
    assert ConcentrationService.h_bound(10, 1, 0.5) == pytest.approx(0.35)
    assert ConcentrationService.deviation_bound_rhs(10, 100, 0.3) == pytest.approx(7.80e-5, rel=1e-2)
    assert ConcentrationService.exact_second_moment(2, 4) == pytest.approx(1 / 6)
    assert ConcentrationService.exact_second_moment(1, 5) == 0.0
    assert ConcentrationService.f_max(4) == pytest.approx(math.sqrt(3) / 2)
    assert ConcentrationService.mean_median_gap_bound(1, 1) == 0.0


def test_bounds_reject_negative_inputs():
    with pytest.raises(PreconditionError):
        ConcentrationService.h_bound(2, -1.0, 0.1)
    with pytest.raises(PreconditionError):
        ConcentrationService.deviation_bound_rhs(2, 2, -0.1)


# Product and maximally entangled vectors sit at the two ends of f
def test_f_extremes():
    product = basis_ket(0, 4)
    assert ConcentrationService.f_value(product, 2, 2) == pytest.approx(ConcentrationService.f_max(2))
    assert ConcentrationService.f_value(ChannelService.bell_state(2), 2, 2) == pytest.approx(0.0, abs=1e-12)


def test_f_values_match_scalar(rng):
    xs = random_unit_vectors(50, 6, rng)
    expected = [ConcentrationService.f_value(x, 2, 3) for x in xs]
    values = ConcentrationService.f_values(xs, 2, 3)
    assert np.allclose(values, expected, atol=1e-12)
    assert np.all(values <= ConcentrationService.f_max(2) + 1e-12)
    with pytest.raises(DimensionMismatchError):
        ConcentrationService.f_values(xs, 3, 3)


# f only sees the output marginal, so environment unitaries leave it fixed
def test_f_is_invariant_under_environment_unitaries(rng):
    k, n = 2, 3
    W = haar_unitary(n, rng)
    xs = random_unit_vectors(20, k * n, rng)
    rotated = xs @ np.kron(np.eye(k), W).T
    expected = ConcentrationService.f_values(xs, k, n)
    assert np.allclose(ConcentrationService.f_values(rotated, k, n), expected, atol=1e-12)
    assert ConcentrationService.f_value(random_unit_vector(3, rng), 1, 3) == pytest.approx(0.0, abs=1e-12)


def test_lipschitz_example():
    lhs, rhs = ConcentrationService.lipschitz_bound_check(basis_ket(0, 4), ChannelService.bell_state(2), 2, 2)
    assert lhs == pytest.approx(0.7071, abs=1e-4)
    assert rhs == pytest.approx(1.3066, abs=1e-4)


def test_lipschitz_on_random_pairs(seeded):
    gen = seeded(17)
    for _ in range(1000):
        x, y = random_unit_vector(12, gen), random_unit_vector(12, gen)
        lhs, rhs = ConcentrationService.lipschitz_bound_check(x, y, 3, 4)
        assert lhs <= rhs + 1e-12


def test_medians():
    values = np.arange(10.0)
    assert ConcentrationService.lower_median(values) == 4.0
    assert ConcentrationService.median_lower_confidence(np.arange(100.0)) == 35.0


# Chunked sampling does not depend on the worker count
def test_sample_f_independent_of_workers(seeded):
    serial = ConcentrationService.sample_f(2, 3, 1000, seeded(3), chunk_size=128, workers=1)
    threaded = ConcentrationService.sample_f(2, 3, 1000, seeded(3), chunk_size=128, workers=4)
    assert serial.shape == (1000,)
    assert np.array_equal(serial, threaded)


def test_estimate_moments(seeded):
    report = ConcentrationService.estimate_moments(2, 4, 20000, seeded(42))
    checks = {check.tag: check for check in report.checks}
    assert checks["mean-bound"].passed
    assert checks["median-bound"].passed
    assert checks["levy-mean-median-gap"].advisory
    assert report.exact_f2 == pytest.approx(1 / 6)
    assert abs(report.mean_f2 - report.exact_f2) <= 5 * report.stderr_f2
    assert report.bound_mean == pytest.approx(0.5)


def test_estimate_moments_needs_trials(rng):
    with pytest.raises(PreconditionError):
        ConcentrationService.estimate_moments(2, 2, 99, rng)


def test_empirical_tail(seeded):
    report = ConcentrationService.empirical_tail(2, 100, [0.1, 0.2, 0.3], 5000, seeded(7))
    assert report.passed
    assert report.epsilon_grid == [0.1, 0.2, 0.3]
    assert report.alpha == pytest.approx(0.2)
    assert all(check.tag == "deviation-tail" for check in report.checks)
    assert report.analytic_bound == sorted(report.analytic_bound, reverse=True)


def test_empirical_tail_needs_trials(rng):
    with pytest.raises(PreconditionError):
        ConcentrationService.empirical_tail(2, 2, [0.1], 999, rng)


def test_opnorm_bound(seeded):
    report = ConcentrationService.opnorm_bound_check(4, 400, 2000, seeded(12))
    assert not report.vacuous
    assert report.bound == pytest.approx(0.7)
    assert report.violations == 0
    assert report.passed
    assert report.conditioned_samples >= 1000


def test_opnorm_bound_vacuous(rng):
    report = ConcentrationService.opnorm_bound_check(2, 8, 1000, rng)
    assert report.vacuous
    assert report.max_op_norm <= 1.0 + 1e-12
