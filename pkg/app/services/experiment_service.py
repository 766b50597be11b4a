# app/services/experiment_service.py
"""Runs one configured pipeline and writes its report.

Exit codes: 0 when every non-advisory check passed, 1 when a check failed, 2 for bad input.
"""
import logging
from itertools import product
from typing import Dict, List, Optional, Tuple

from app.dependencies import get_settings
from app.schemas.config_schema import ExperimentConfig
from app.schemas.report_schemas import MultiReport, Report
from app.services.capacity_service import CapacityService
from app.services.certify_service import CERTIFIED_MAX_L, CertifyService
from app.services.channel_service import ChannelService
from app.services.concentration_service import ConcentrationService
from app.services.entropy_service import EntropyService
from app.services.net_service import NetService
from app.services.report_service import ReportWriter
from app.utils.exceptions import LabError
from app.utils.seeding import row_generator

settings = get_settings()
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2

# Command name to the ExperimentService method that runs it.
PIPELINES: Dict[str, str] = {
    "moments": "run_moments",
    "tail": "run_tail",
    "bell": "run_bell",
    "net-certify": "run_net_certify",
    "gap-scan": "run_gap_scan",
    "crossover": "run_crossover",
    "weyl": "run_weyl",
    "typical-bound": "run_typical_bound",
}


class ExperimentService:
    @classmethod
    def _pairs(cls, config: ExperimentConfig) -> List[Tuple[int, int]]:
        return list(product(config.k, config.n))

    @classmethod
    def _triples(cls, config: ExperimentConfig) -> List[Tuple[int, int, int]]:
        return [(l, k, n) for k, n, l in product(config.k, config.n, config.l)]

    @classmethod
    def _phase_quotient(cls, config: ExperimentConfig) -> bool:
        return settings.net_phase_quotient if config.phase_quotient is None else config.phase_quotient

    @classmethod
    def run_moments(cls, config: ExperimentConfig) -> Report:
        return MultiReport(items=[
            ConcentrationService.estimate_moments(k, n, config.trials, row_generator(config.seed, i),
                                                  workers=config.workers)
            for i, (k, n) in enumerate(cls._pairs(config))
        ])

    @classmethod
    def run_tail(cls, config: ExperimentConfig) -> Report:
        return MultiReport(items=[
            ConcentrationService.empirical_tail(k, n, config.epsilon, config.trials, row_generator(config.seed, i),
                                                workers=config.workers)
            for i, (k, n) in enumerate(cls._pairs(config))
        ])

    @classmethod
    def run_bell(cls, config: ExperimentConfig) -> Report:
        return MultiReport(items=[
            EntropyService.bell_eigenvalue_experiment(l, k, n, config.channels, row_generator(config.seed, i),
                                                      config.workers)
            for i, (l, k, n) in enumerate(cls._triples(config))
        ])

    @classmethod
    def run_net_certify(cls, config: ExperimentConfig) -> Report:
        return MultiReport(items=[
            NetService.net_certify(l, config.theta, k, n, config.channels, config.samples,
                                   row_generator(config.seed, i), phase_quotient=cls._phase_quotient(config),
                                   workers=config.workers)
            for i, (l, k, n) in enumerate(cls._triples(config))
        ])

    @classmethod
    def run_gap_scan(cls, config: ExperimentConfig) -> Report:
        grid = [(k, n, l) for k, n, l in product(config.k, config.n, config.l)]
        seeds = config.seeds if config.seeds is not None else [config.seed]
        return CertifyService.gap_scan(grid, seeds, config.theta, config.restarts, config.workers,
                                       cls._phase_quotient(config))

    @classmethod
    def run_crossover(cls, config: ExperimentConfig) -> Report:
        return CertifyService.crossover_report(config.a, config.theta, config.beta_zero, config.beta)

    @classmethod
    def run_weyl(cls, config: ExperimentConfig) -> Report:
        items = []
        for i, (l, k, n) in enumerate(cls._triples(config)):
            rng = row_generator(config.seed, i)
            phi = ChannelService.random_subspace_channel(l, k, n, rng)
            omega = ChannelService.random_subspace_channel(l, k, n, rng)
            items.append(CapacityService.verify_extension_identity(phi, omega, config.phi_copies,
                                                                   config.omega_copies, rng, config.restarts))
        return MultiReport(items=items)

    @classmethod
    def run_typical_bound(cls, config: ExperimentConfig) -> Report:
        items = []
        for i, (l, k, n) in enumerate(cls._triples(config)):
            rng = row_generator(config.seed, i) if l <= CERTIFIED_MAX_L else None
            items.append(CertifyService.typical_subspace_comparison(l, k, n, config.theta, rng, config.samples))
        return MultiReport(items=items)

    @classmethod
    def run_pipeline(cls, config: ExperimentConfig) -> Report:
        try:
            pipeline = getattr(cls, PIPELINES[config.command])
        except KeyError:
            raise LabError(f"unknown command {config.command!r}") from None
        logger.info(f"Running {config.command} with seed {config.seed}")
        return pipeline(config)

    @classmethod
    def run(cls, config: ExperimentConfig, writer: Optional[ReportWriter] = None) -> int:
        """Execute the configured pipeline, write the report and return the exit status."""
        try:
            report = cls.run_pipeline(config)
        except LabError as e:
            logger.error(f"{config.command} cannot run: {e}")
            return EXIT_CONFIG_ERROR
        (writer or ReportWriter()).write(report, config)
        if not report.passed:
            failed = [check.tag for check in report.all_checks() if not check.passed and not check.advisory]
            logger.warning(f"{config.command}: {len(failed)} checks failed: {sorted(set(failed))}")
            return EXIT_CHECK_FAILED
        return EXIT_OK
