import json

import numpy as np
import pytest

from app.models.net_model import net_cardinality_bound
from app.services.concentration_service import ConcentrationService
from app.services.net_service import NetService
from app.utils.exceptions import (
    ConstructionError,
    DimensionMismatchError,
    PreconditionError,
    UnsupportedDimensionError,
)
from app.utils.linalg import random_unit_vectors


def test_correction_factor():
    assert NetService.correction_factor(0.25) == pytest.approx(16 / 7)
    with pytest.raises(PreconditionError):
        NetService.correction_factor(0.3)
    with pytest.raises(PreconditionError):
        NetService.correction_factor(0.0)


def test_phase_net_on_the_circle(net_l1):
    assert len(net_l1) == 26
    assert net_l1.certificate.method == "construction"
    assert net_l1.certificate.max_observed_gap <= 0.25
    assert np.allclose(np.abs(net_l1.points), 1.0)


def test_quotient_net_for_l1_is_a_single_point():
    net = NetService.build_theta_net(1, 0.25, phase_quotient=True)
    assert len(net) == 1
    assert net.phase_quotient


def test_grid_nets_respect_the_cardinality_bound(net_l2, net_l2_quotient):
    bound = net_cardinality_bound(2, 0.25)
    assert len(net_l2_quotient) < len(net_l2) <= bound
    assert net_l2.construction == "deterministic-grid"


# Sampled sphere points are never farther than theta from the net
@pytest.mark.parametrize("fixture", ["net_l1", "net_l2", "net_l2_quotient"])
def test_grid_nets_cover_the_sphere(fixture, request, rng):
    net = request.getfixturevalue(fixture)
    gap, passed = NetService.covering_check(net, 10_000, rng)
    assert passed
    assert gap <= 0.25


def test_covering_check_needs_samples(net_l1, rng):
    with pytest.raises(PreconditionError):
        NetService.covering_check(net_l1, 9_999, rng)


def test_covering_check_independent_of_workers(net_l2_quotient, seeded):
    serial = NetService.covering_check(net_l2_quotient, 10_000, seeded(6), chunk_size=1000, workers=1)
    threaded = NetService.covering_check(net_l2_quotient, 10_000, seeded(6), chunk_size=1000, workers=4)
    assert serial == threaded


def test_build_limits(rng):
    with pytest.raises(ConstructionError):
        NetService.build_theta_net(4, 0.25)
    with pytest.raises(UnsupportedDimensionError):
        NetService.build_theta_net(5, 0.25, construction="deterministic-grid")
    with pytest.raises(UnsupportedDimensionError):
        NetService.build_theta_net(7, 0.25, rng, construction="greedy-verified")
    with pytest.raises(PreconditionError):
        NetService.build_theta_net(1, 0.25, construction="greedy-verified")
    with pytest.raises(PreconditionError):
        NetService.build_theta_net(1, 0.25, construction="random")


def test_greedy_net_on_the_circle(seeded):
    net = NetService.build_theta_net(1, 0.25, seeded(31), construction="greedy-verified")
    assert net.construction == "greedy-verified"
    assert net.certificate.method == "monte-carlo"
    assert net.certificate.samples >= 10_000
    assert net.certificate.max_observed_gap <= 0.25
    assert len(net) <= net_cardinality_bound(1, 0.25)


def test_greedy_net_modulo_phase(seeded):
    net = NetService.build_theta_net(2, 0.25, seeded(32), construction="greedy-verified", phase_quotient=True)
    assert net.phase_quotient
    assert net.certificate.max_observed_gap <= 0.25
    assert len(net) <= net_cardinality_bound(2, 0.25)


@pytest.mark.slow
def test_greedy_net_in_three_dimensions(seeded):
    net = NetService.build_theta_net(3, 0.25, seeded(33), construction="greedy-verified", phase_quotient=True)
    assert net.certificate.method == "monte-carlo"
    assert net.certificate.max_observed_gap <= 0.25
    assert len(net) <= net_cardinality_bound(3, 0.25)


# The full-phase grid at l = 3 is larger than the volumetric bound
def test_grid_range_in_three_dimensions():
    with pytest.raises(ConstructionError):
        NetService.build_theta_net(3, 0.25, construction="deterministic-grid")


@pytest.mark.slow
def test_quotient_grid_in_three_dimensions(seeded):
    net = NetService.build_theta_net(3, 0.25, phase_quotient=True)
    assert net.construction == "deterministic-grid"
    assert len(net) <= net_cardinality_bound(3, 0.25)
    gap, covered = NetService.covering_check(net, 10_000, seeded(34))
    assert covered
    assert gap <= 0.25


def test_oversized_grid_falls_back_to_greedy(mocker, seeded):
    mocker.patch.object(NetService, "_grid_points", side_effect=ConstructionError("grid too large"))
    net = NetService.build_theta_net(2, 0.25, seeded(35), phase_quotient=True)
    assert net.construction == "greedy-verified"
    with pytest.raises(ConstructionError):
        NetService.build_theta_net(2, 0.25, phase_quotient=True)


def test_net_max_f(channel_222, net_l2_quotient):
    value, point = NetService.net_max_f(channel_222, net_l2_quotient)
    assert 0.0 <= value <= ConcentrationService.f_max(2) + 1e-12
    assert value == pytest.approx(ConcentrationService.f_value(channel_222.embed(point), 2, 2), abs=1e-12)


# c_theta times the net max dominates f over the whole subspace sphere
def test_net_max_f_is_sound(channel_222, net_l2_quotient, rng):
    value, _ = NetService.net_max_f(channel_222, net_l2_quotient)
    sampled = ConcentrationService.f_values(channel_222.embed(random_unit_vectors(20_000, 2, rng)), 2, 2)
    assert sampled.max() <= NetService.correction_factor(0.25) * value


def test_net_max_f_dimension_mismatch(net_l1, channel_222):
    with pytest.raises(DimensionMismatchError):
        NetService.net_max_f(channel_222, net_l1)


def test_save_and_load_net(tmp_path, net_l2_quotient):
    path = NetService.save_net(net_l2_quotient, tmp_path / "nets" / "l2.json")
    loaded = NetService.load_net(path)
    assert np.array_equal(loaded.points, net_l2_quotient.points)
    assert loaded.phase_quotient
    assert loaded.certificate == net_l2_quotient.certificate


def test_load_net_detects_tampering(tmp_path, net_l1):
    path = NetService.save_net(net_l1, tmp_path / "l1.json")
    raw = json.loads(path.read_text())
    raw["points"][0][0] = [0.0, 1.0]
    path.write_text(json.dumps(raw))
    with pytest.raises(ConstructionError):
        NetService.load_net(path)


def test_net_certify(seeded):
    report = NetService.net_certify(1, 0.25, 2, 2, 3, 10_000, seeded(77))
    assert report.passed
    assert report.net_size == 26
    assert report.cardinality_bound == 81
    assert report.soundness_failures == 0
    assert {check.tag for check in report.checks} == {"net-cardinality", "net-covering", "net-bound-soundness"}


@pytest.mark.slow
def test_net_certify_l2_quotient(seeded):
    report = NetService.net_certify(2, 0.25, 2, 2, 5, 10_000, seeded(78), phase_quotient=True)
    assert report.passed
    assert report.min_soundness_margin >= 0.0

