import json

import pytest

from app.schemas.check_schema import inequality
from app.schemas.config_schema import ExperimentConfig
from app.schemas.report_schemas import TypicalBoundReport
from app.services.certify_service import CertifyService
from app.services.experiment_service import (
    EXIT_CHECK_FAILED,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    ExperimentService,
    PIPELINES,
)
from app.services.report_service import ReportWriter


def test_every_command_has_a_pipeline():
    assert set(PIPELINES) == {"moments", "tail", "bell", "net-certify", "gap-scan", "crossover", "weyl",
                              "typical-bound"}


def test_moments_pipeline_covers_the_grid():
    config = ExperimentConfig(command="moments", seed=3, k=[2, 3], n=[4], trials=2000)
    report = ExperimentService.run_pipeline(config)
    assert [(item.k, item.n) for item in report.items] == [(2, 4), (3, 4)]


# Same seed, same numbers
def test_pipelines_are_reproducible():
    config = ExperimentConfig(command="bell", seed=11, k=[2], n=[2], l=[2], channels=4)
    assert ExperimentService.run_pipeline(config) == ExperimentService.run_pipeline(config)


def test_gap_scan_seeds_default_to_master_seed():
    config = ExperimentConfig(command="gap-scan", seed=42, k=[2], n=[2], l=[1], restarts=2)
    report = ExperimentService.run_pipeline(config)
    assert [row.seed for row in report.rows] == [42]


def test_run_writes_report(tmp_path):
    config = ExperimentConfig(command="crossover", seed=0, beta_zero=True, format="json")
    status = ExperimentService.run(config, ReportWriter(tmp_path))
    assert status == EXIT_OK
    payload = json.loads((tmp_path / "crossover-seed0.json").read_text())
    assert payload["passed"] is True


def test_run_reports_unsupported_dimensions(tmp_path):
    config = ExperimentConfig(command="net-certify", seed=0, l=[7], k=[4], n=[4], channels=1)
    assert ExperimentService.run(config, ReportWriter(tmp_path)) == EXIT_CONFIG_ERROR


def test_run_reports_failed_checks(tmp_path, mocker):
    config = ExperimentConfig(command="typical-bound", seed=0, l=[4], k=[4], n=[16])
    mocker.patch.object(CertifyService, "typical_subspace_comparison", side_effect=lambda *args: _failing_report())
    assert ExperimentService.run(config, ReportWriter(tmp_path)) == EXIT_CHECK_FAILED
    assert (tmp_path / "typical-bound-seed0.csv").exists()


def _failing_report():
    return TypicalBoundReport(l=4, k=4, n=16, bound=10.375, f_max=0.866, vacuous=True,
                              checks=[inequality("forced", "net-bound-soundness", 1.0, 0.0)])


def test_typical_bound_without_sampling_for_large_l():
    config = ExperimentConfig(command="typical-bound", seed=0, l=[4], k=[4], n=[16])
    report = ExperimentService.run_pipeline(config)
    assert report.items[0].bound == pytest.approx(10.375)
    assert report.items[0].sampled_net_bound is None
