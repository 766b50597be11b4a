# app/services/report_service.py
"""Writes reports as CSV (with a commented provenance header) or JSON.

Files carry no timestamps, so one configuration always produces the same bytes.
"""
import csv
import json
import logging
from io import StringIO
from pathlib import Path
from typing import Any, Dict, Optional, Union

from app import __version__
from app.dependencies import get_settings
from app.schemas.config_schema import ExperimentConfig
from app.schemas.report_schemas import Report

logger = logging.getLogger(__name__)

PROGRAM = "moe-lab"


class ReportWriter:
    """Thin wrapper that resolves the output location and serializes reports."""

    def __init__(self, output_dir: Optional[Union[str, Path]] = None) -> None:
        self.output_dir = Path(output_dir or get_settings().output_dir)

    def default_path(self, config: ExperimentConfig) -> Path:
        return self.output_dir / f"{config.command}-seed{config.seed}.{config.format}"

    def resolve(self, config: ExperimentConfig) -> Path:
        return Path(config.output_path) if config.output_path else self.default_path(config)

    def write(self, report: Report, config: ExperimentConfig, path: Optional[Union[str, Path]] = None) -> Path:
        path = Path(path) if path else self.resolve(config)
        path.parent.mkdir(parents=True, exist_ok=True)
        if config.format == "json":
            text = ReportService.render_json(report, config)
        else:
            text = ReportService.render_csv(report, config)
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        logger.info(f"Wrote {config.command} report to {path}")
        return path


class ReportService:
    @classmethod
    def provenance(cls, config: ExperimentConfig) -> Dict[str, Any]:
        return {"program": PROGRAM, "version": __version__, "config": config.model_dump()}

    @classmethod
    def render_csv(cls, report: Report, config: ExperimentConfig) -> str:
        lines = [f"# {PROGRAM} {__version__}",
                 f"# config: {json.dumps(config.model_dump(), sort_keys=True)}"]
        for check in report.all_checks():
            status = "pass" if check.passed else "FAIL"
            advisory = " advisory" if check.advisory else ""
            lines.append(f"# check {check.tag}{advisory}: {status} lhs={check.lhs} rhs={check.rhs} slack={check.slack}"
                         f" ({check.statement})")
        lines.append(f"# passed: {str(report.passed).lower()}")
        columns = list(report.columns())
        buffer = StringIO()
        writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(report.csv_rows())
        return "\n".join(lines) + "\n" + buffer.getvalue()

    @classmethod
    def render_json(cls, report: Report, config: ExperimentConfig) -> str:
        payload = {
            "meta": cls.provenance(config),
            "passed": report.passed,
            "checks": [check.model_dump() for check in report.all_checks()],
            "data": report.model_dump(exclude={"checks"}),
        }
        return json.dumps(payload, indent=2) + "\n"

    @classmethod
    def write_report(cls, report: Report, config: ExperimentConfig, path: Optional[Union[str, Path]] = None) -> Path:
        return ReportWriter().write(report, config, path)
