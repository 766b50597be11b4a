import csv
import json

import pytest

from app import __version__
from app.schemas.check_schema import INEQUALITIES, identity, inequality
from app.schemas.config_schema import ExperimentConfig
from app.schemas.report_schemas import MultiReport, TypicalBoundReport
from app.services.certify_service import CertifyService
from app.services.report_service import ReportService, ReportWriter


@pytest.fixture
def config():
    return ExperimentConfig(command="typical-bound", seed=7)


@pytest.fixture
def report():
    item = TypicalBoundReport(l=2, k=2, n=100, bound=1.8, f_max=0.7071, vacuous=True,
                              checks=[inequality("soundness", "net-bound-soundness", 0.5, 0.6),
                                      inequality("typical", "typical-subspace-bound", 2.0, 1.8, advisory=True)])
    return MultiReport(items=[item])


def test_default_path(tmp_path, config):
    writer = ReportWriter(tmp_path)
    assert writer.resolve(config) == tmp_path / "typical-bound-seed7.csv"
    explicit = config.model_copy(update={"output_path": str(tmp_path / "x.csv")})
    assert writer.resolve(explicit) == tmp_path / "x.csv"


def test_provenance(config):
    meta = ReportService.provenance(config)
    assert meta["version"] == __version__
    assert meta["config"]["seed"] == 7


# The CSV carries a commented header and then plain rows
def test_render_csv(config, report):
    text = ReportService.render_csv(report, config)
    header = [line for line in text.splitlines() if line.startswith("#")]
    assert header[0] == f"# moe-lab {__version__}"
    assert any("net-bound-soundness: pass" in line for line in header)
    assert any("typical-subspace-bound advisory: FAIL" in line for line in header)
    assert any(INEQUALITIES["net-bound-soundness"] in line for line in header)
    assert header[-1] == "# passed: true"
    body = [line for line in text.splitlines() if not line.startswith("#")]
    rows = list(csv.DictReader(body))
    assert rows[0]["bound"] == "1.8"
    assert rows[0]["sampled_net_bound"] == ""


def test_render_json(config, report):
    payload = json.loads(ReportService.render_json(report, config))
    assert payload["passed"] is True
    assert [check["tag"] for check in payload["checks"]] == ["net-bound-soundness", "typical-subspace-bound"]
    assert all(check["statement"] == INEQUALITIES[check["tag"]] for check in payload["checks"])
    assert payload["data"]["items"][0]["l"] == 2
    assert payload["meta"]["program"] == "moe-lab"


def test_render_json_handles_infinite_k_star():
    config = ExperimentConfig(command="crossover", seed=1, beta_zero=True, format="json")
    payload = json.loads(ReportService.render_json(CertifyService.crossover_report(1.0, 0.25, beta_zero=True), config))
    assert payload["data"]["ln_k_star"] == pytest.approx(5776, rel=1e-2)


# Reports are byte-identical across runs
def test_write_report_is_deterministic(output_dir, config, report):
    first = ReportService.write_report(report, config).read_bytes()
    second = ReportService.write_report(report, config).read_bytes()
    assert first == second
    assert (output_dir / "typical-bound-seed7.csv").exists()


def test_failed_checks_are_marked(config):
    failing = TypicalBoundReport(l=2, k=2, n=4, bound=1.0, f_max=0.7071, vacuous=True,
                                 checks=[identity("residual", "weyl-capacity-identity", 1.0, 0.0, 1e-9)])
    text = ReportService.render_csv(failing, config)
    assert "# passed: false" in text
    assert "weyl-capacity-identity: FAIL" in text
