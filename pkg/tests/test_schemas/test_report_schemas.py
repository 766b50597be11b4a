import pytest
from pydantic import ValidationError

from app.schemas.check_schema import INEQUALITIES, identity, inequality
from app.schemas.net_schema import CoveringCertificate, NetRecord
from app.schemas.report_schemas import BellReport, BellRow, GapScanReport, MultiReport, Report


def test_inequality_and_identity():
    assert inequality("a", "mean-bound", 1.0, 1.0).passed
    assert inequality("a", "mean-bound", 1.1, 1.0, slack=0.2).passed
    assert not inequality("a", "mean-bound", 1.1, 1.0).passed
    assert identity("b", "second-moment-identity", 1.0, 1.0 + 1e-10, 1e-9).passed
    assert not identity("b", "second-moment-identity", 1.0, 1.1, 1e-9).passed


def test_checks_carry_the_inequality_they_verify():
    check = inequality("mean of f", "mean-bound", 0.4, 0.5)
    assert check.statement == INEQUALITIES["mean-bound"]
    assert check.model_dump()["statement"] == "E f <= 1 / sqrt(n)"


def test_unknown_tags_are_rejected():
    with pytest.raises(ValidationError):
        inequality("a", "mean", 1.0, 1.0)


# Advisory checks never fail a report
def test_advisory_checks_do_not_fail_reports():
    report = Report(checks=[inequality("a", "mean-bound", 2.0, 1.0, advisory=True),
                            inequality("b", "median-bound", 0.0, 1.0)])
    assert report.passed


def test_multi_report_collects_item_checks():
    failing = Report(checks=[inequality("a", "mean-bound", 2.0, 1.0)])
    passing = Report(checks=[inequality("b", "median-bound", 0.0, 1.0)])
    multi = MultiReport(items=[passing, failing])
    assert not multi.passed
    assert [check.tag for check in multi.all_checks()] == ["median-bound", "mean-bound"]


def test_multi_report_uses_item_columns():
    row = BellRow(seed_index=0, lambda_max=0.6, lambda_bound=0.5, bell_entropy=1.0)
    item = BellReport(l=2, k=2, n=2, channels=1, min_lambda_max=0.6, lambda_bound=0.5, max_bell_entropy=1.0,
                      rows=[row])
    multi = MultiReport(items=[item, item])
    assert multi.columns() == BellReport.csv_columns
    assert len(multi.csv_rows()) == 2
    assert MultiReport().columns() == ()


def test_gap_scan_report_fails_on_failed_rows():
    assert GapScanReport().passed
    assert not GapScanReport(failed_rows=[{"l": 4, "error": "unsupported"}]).passed


def test_bell_report_rows():
    row = BellRow(seed_index=0, lambda_max=0.6, lambda_bound=0.5, bell_entropy=1.0, max_entropy_bound=1.2)
    report = BellReport(l=2, k=2, n=2, channels=1, min_lambda_max=0.6, lambda_bound=0.5, max_bell_entropy=1.0,
                        rows=[row])
    rows = report.csv_rows()
    assert rows == [{"l": 2, "k": 2, "n": 2, "seed_index": 0, "lambda_max": 0.6, "lambda_bound": 0.5,
                     "bell_entropy": 1.0, "max_entropy_bound": 1.2}]


def test_net_record_validation():
    with pytest.raises(ValidationError):
        NetRecord(l=1, theta=0.3, construction="deterministic-grid", points=[[[1.0, 0.0]]])
    with pytest.raises(ValidationError):
        NetRecord(l=1, theta=0.25, construction="deterministic-grid", points=[[[1.0]]])
    with pytest.raises(ValidationError):
        NetRecord(l=1, theta=0.25, construction="lattice", points=[[[1.0, 0.0]]])
    with pytest.raises(ValidationError):
        CoveringCertificate(method="guess", max_observed_gap=0.1)
