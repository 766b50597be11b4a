# app/services/net_service.py
"""Constructive theta-nets on the unit sphere of C^l and the net-to-sphere correction factor."""
import hashlib
import itertools
import logging
import math
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from app.dependencies import get_settings
from app.models.channel_model import StinespringChannel
from app.models.net_model import DEDUP_DECIMALS, ThetaNet, chord_distances, net_cardinality_bound
from app.schemas.check_schema import inequality
from app.schemas.net_schema import CoveringCertificate, NetRecord
from app.schemas.report_schemas import NetCertifyReport
from app.services.channel_service import ChannelService
from app.services.concentration_service import ConcentrationService
from app.utils.exceptions import (
    ConstructionError,
    DimensionMismatchError,
    PreconditionError,
    UnsupportedDimensionError,
)
from app.utils.linalg import Ket, random_unit_vectors
from app.utils.seeding import spawn_generators
from app.utils.validators import validate_dimension
from app.utils.worker_pool import run_chunked, run_ordered

settings = get_settings()
logger = logging.getLogger(__name__)

GRID_MAX_L = 4
GREEDY_MAX_L = 6
# Each candidate batch is covered at this fraction of theta.
GREEDY_POOL_RADIUS = 0.75
GREEDY_MAX_BATCHES = 128
# Upper bound on entries of one distance block.
DISTANCE_BLOCK = 1 << 21
MIN_COVERING_SAMPLES = 10_000


class NetService:
    @classmethod
    def correction_factor(cls, theta: float) -> float:
        """c_theta = 1 / (1 - theta^2 - 2 theta); max f on the subspace sphere is at most c_theta times the net max."""
        if not 0.0 < theta <= 0.25:
            raise PreconditionError(f"theta must lie in (0, 1/4], got {theta}")
        return 1.0 / (1.0 - theta ** 2 - 2.0 * theta)

    @classmethod
    def _orthant_grid(cls, d: int, budget: float) -> np.ndarray:
        """
        Points of the nonnegative orthant of the real sphere S^{d-1} within distance `budget` of every orthant point.

        Recurses on hyperspherical coordinates r = (cos eta, sin eta r'): the first angle
        is gridded at half-spacing b and r' is covered at (budget - b) / sin(eta).
        """
        if d == 1:
            return np.ones((1, 1))
        if budget >= math.sqrt(2.0):
            point = np.zeros((1, d))
            point[0, 0] = 1.0
            return point
        half = budget if d == 2 else budget / 2.0
        cells = math.ceil(math.pi / (4.0 * half))
        blocks: List[np.ndarray] = []
        for j in range(cells):
            eta = (j + 0.5) * (math.pi / 2.0) / cells
            tail = np.ones((1, 1)) if d == 2 else cls._orthant_grid(d - 1, (budget - half) / math.sin(eta))
            head = np.full((tail.shape[0], 1), math.cos(eta))
            blocks.append(np.hstack([head, math.sin(eta) * tail]))
        return np.vstack(blocks)

    @classmethod
    def _phase_counts(cls, radii: np.ndarray, free: List[int], phase_budget: float) -> np.ndarray:
        counts = np.ones(radii.shape, dtype=np.int64)
        scale = math.pi * math.sqrt(len(free)) / phase_budget
        counts[:, free] = np.maximum(1, np.ceil(scale * radii[:, free] - 1e-12)).astype(np.int64)
        return counts

    @classmethod
    def _dedup(cls, points: np.ndarray) -> np.ndarray:
        key = np.round(np.hstack([points.real, points.imag]), DEDUP_DECIMALS)
        _, first = np.unique(key, axis=0, return_index=True)
        return points[np.sort(first)]

    @classmethod
    def _grid_points(cls, l: int, theta: float, phase_quotient: bool, cap: int) -> Tuple[np.ndarray, float]:
        if l == 1:
            if phase_quotient:
                return np.ones((1, 1), dtype=np.complex128), 0.0
            count = math.ceil(math.pi / math.asin(theta / 2.0))
            phases = 2.0 * math.pi * np.arange(count) / count
            return np.exp(1j * phases)[:, None], 2.0 * math.sin(math.pi / (2 * count))
        free = list(range(1, l)) if phase_quotient else list(range(l))
        radial_budget = theta * (l - 1) / (l - 1 + len(free))
        phase_budget = theta - radial_budget
        radii = cls._orthant_grid(l, radial_budget)
        counts = cls._phase_counts(radii, free, phase_budget)
        total = int(np.sum(np.prod(counts, axis=1)))
        if total > cap:
            logger.error(f"Grid net for l={l}, theta={theta} needs {total} points, cap is {cap}")
            raise ConstructionError(f"grid net would hold {total} points, more than the allowed {cap}")
        rows: List[np.ndarray] = []
        for radius, count in zip(radii, counts):
            grids = [2.0 * math.pi * np.arange(c) / c for c in count]
            phases = np.array(list(itertools.product(*grids)))
            rows.append(radius * np.exp(1j * phases))
        return cls._dedup(np.vstack(rows)), theta

    @classmethod
    def _nearest_to(cls, samples: np.ndarray, points: np.ndarray, phase_quotient: bool) -> np.ndarray:
        block = max(1, DISTANCE_BLOCK // points.shape[0])
        parts = [chord_distances(samples[i:i + block], points, phase_quotient).min(axis=1)
                 for i in range(0, samples.shape[0], block)]
        return np.concatenate(parts)

    @classmethod
    def _greedy_points(cls, l: int, theta: float, phase_quotient: bool, cap: int,
                       rng: np.random.Generator) -> np.ndarray:
        """
        Farthest-point insertion over fresh batches of random candidates.

        Points of each batch are inserted until the batch lies within
        GREEDY_POOL_RADIUS * theta of the net; a batch that already does ends the run.
        """
        batch_size = settings.greedy_pool_size
        radius = GREEDY_POOL_RADIUS * theta
        points = random_unit_vectors(1, l, rng)
        for batch_index in range(GREEDY_MAX_BATCHES):
            batch = random_unit_vectors(batch_size, l, rng)
            nearest = cls._nearest_to(batch, points, phase_quotient)
            if nearest.max() <= radius:
                logger.debug(f"Greedy net for l={l} settled after {batch_index} batches at {points.shape[0]} points")
                return points
            added: List[int] = []
            while nearest.max() > radius:
                if points.shape[0] + len(added) >= cap:
                    raise ConstructionError(f"greedy net exceeded {cap} points before covering its candidates")
                index = int(np.argmax(nearest))
                added.append(index)
                nearest = np.minimum(nearest, chord_distances(batch, batch[index:index + 1], phase_quotient)[:, 0])
            points = np.vstack([points, batch[added]])
        raise ConstructionError(f"greedy net did not settle within {GREEDY_MAX_BATCHES} batches")

    @classmethod
    def build_theta_net(cls, l: int, theta: float, rng: Optional[np.random.Generator] = None,
                        construction: Optional[str] = None, phase_quotient: bool = False) -> ThetaNet:
        """
        Build a theta-net on the unit sphere of C^l in chord distance.

        The deterministic grid splits theta between a recursive grid of the radii
        (r_1, ..., r_l) and per-coordinate phase grids whose resolution scales with
        r_i. It fits the cardinality bound for l <= 2, and for l = 3 only modulo phase.
        The greedy construction (l <= 6) runs farthest-point insertion over random
        candidates and is certified by Monte Carlo, so it needs `rng`. Without an
        explicit construction a grid that outgrows its cap falls back to greedy when
        `rng` is given.
        """
        l = validate_dimension(l, "l")
        cls.correction_factor(theta)
        cap = min(net_cardinality_bound(l, theta), settings.max_net_points)
        if construction is None:
            construction = "deterministic-grid" if l <= GRID_MAX_L else "greedy-verified"
            if construction == "deterministic-grid" and rng is not None:
                try:
                    return cls.build_theta_net(l, theta, rng, construction, phase_quotient)
                except ConstructionError as error:
                    logger.warning(f"Grid net for l={l} unavailable ({error}), falling back to greedy insertion")
                    construction = "greedy-verified"
        if construction == "deterministic-grid":
            if l > GRID_MAX_L:
                raise UnsupportedDimensionError(f"grid nets support l <= {GRID_MAX_L}, got l={l}")
            points, radius = cls._grid_points(l, theta, phase_quotient, cap)
            certificate = CoveringCertificate(method="construction", max_observed_gap=radius,
                                              phase_quotient=phase_quotient)
            net = ThetaNet(l, theta, points, construction, phase_quotient, certificate)
        elif construction == "greedy-verified":
            if l > GREEDY_MAX_L:
                raise UnsupportedDimensionError(f"greedy nets support l <= {GREEDY_MAX_L}, got l={l}")
            if rng is None:
                raise PreconditionError("greedy nets need a random generator")
            points = cls._greedy_points(l, theta, phase_quotient, cap, rng)
            net = ThetaNet(l, theta, points, construction, phase_quotient)
            gap, passed = cls.covering_check(net, settings.covering_samples, rng)
            if not passed:
                logger.error(f"Greedy net of {len(net)} points leaves a gap of {gap:.4f} > theta={theta}")
                raise ConstructionError(f"greedy net failed its covering check (gap {gap:.4f})")
            certificate = CoveringCertificate(method="monte-carlo", samples=settings.covering_samples,
                                              max_observed_gap=gap, phase_quotient=phase_quotient)
            net = replace(net, certificate=certificate)
        else:
            raise PreconditionError(f"unknown construction {construction!r}")
        logger.info(f"Built {net}")
        return net

    @classmethod
    def covering_check(cls, net: ThetaNet, samples: int, rng: np.random.Generator,
                       chunk_size: Optional[int] = None, workers: Optional[int] = None) -> Tuple[float, bool]:
        """Largest distance from `samples` uniform sphere points to the net, and whether it is at most theta."""
        if samples < MIN_COVERING_SAMPLES:
            raise PreconditionError(f"at least {MIN_COVERING_SAMPLES} samples are needed, got {samples}")
        def chunk_gap(size: int, gen: np.random.Generator) -> float:
            samples_chunk = random_unit_vectors(size, net.l, gen)
            return float(cls._nearest_to(samples_chunk, net.points, net.phase_quotient).max())

        gaps = run_chunked(chunk_gap, samples, rng, chunk_size, workers)
        max_gap = max(gaps)
        passed = max_gap <= net.theta
        logger.debug(f"Covering check of {net}: max gap {max_gap:.5f} over {samples} samples")
        return max_gap, passed

    @classmethod
    def net_max_f(cls, channel: StinespringChannel, net: ThetaNet, workers: Optional[int] = None) -> Tuple[float, Ket]:
        """
        Largest f over the net pushed into the subspace by V, with the net point attaining it.

        max of f over the whole subspace sphere is then at most correction_factor(theta) times this.
        """
        if net.l != channel.l:
            raise DimensionMismatchError(f"net lives in C^{net.l} but the channel input is C^{channel.l}")
        block = max(1, DISTANCE_BLOCK // (channel.k * channel.n))
        starts = list(range(0, len(net), block))
        values = np.concatenate(run_ordered(
            lambda start: ConcentrationService.f_values(channel.embed(net.points[start:start + block]), channel.k,
                                                        channel.n),
            starts, workers))
        index = int(np.argmax(values))
        return float(values[index]), net.points[index].copy()

    @classmethod
    def _digest(cls, record: NetRecord) -> str:
        payload = record.model_dump_json(exclude={"sha256"})
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    @classmethod
    def to_record(cls, net: ThetaNet) -> NetRecord:
        points = [[[float(z.real), float(z.imag)] for z in point] for point in net.points]
        record = NetRecord(l=net.l, theta=net.theta, construction=net.construction,
                           phase_quotient=net.phase_quotient, points=points, certificate=net.certificate)
        return record.model_copy(update={"sha256": cls._digest(record)})

    @classmethod
    def from_record(cls, record: NetRecord) -> ThetaNet:
        if record.sha256 != cls._digest(record):
            logger.error("Net record content does not match its SHA-256 digest")
            raise ConstructionError("net record failed its content hash check")
        values = np.array(record.points, dtype=np.float64)
        if values.ndim != 3 or values.shape[1:] != (record.l, 2):
            raise DimensionMismatchError(f"net record points have shape {values.shape}, expected (m, {record.l}, 2)")
        points = values[..., 0] + 1j * values[..., 1]
        return ThetaNet(record.l, record.theta, points, record.construction, record.phase_quotient, record.certificate)

    @classmethod
    def save_net(cls, net: ThetaNet, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(cls.to_record(net).model_dump_json(), encoding="utf-8")
        logger.info(f"Saved {net} to {path}")
        return path

    @classmethod
    def load_net(cls, path: Union[str, Path]) -> ThetaNet:
        return cls.from_record(NetRecord.model_validate_json(Path(path).read_text(encoding="utf-8")))

    @classmethod
    def net_certify(cls, l: int, theta: float, k: int, n: int, channels: int, samples: int, rng: np.random.Generator,
                    phase_quotient: bool = False, construction: Optional[str] = None,
                    workers: Optional[int] = None) -> NetCertifyReport:
        """
        Build a net, check its size and covering radius, then test c_theta * net max against sampled f.

        Soundness is tested on `channels` random (l, k, n) subspace channels, each with
        `samples` uniform points of its subspace sphere.
        """
        net = cls.build_theta_net(l, theta, rng, construction, phase_quotient)
        bound = net_cardinality_bound(l, theta)
        max_gap, covered = cls.covering_check(net, max(samples, MIN_COVERING_SAMPLES), rng, workers=workers)
        c_theta = cls.correction_factor(theta)

        def soundness_margin(gen: np.random.Generator) -> float:
            channel = ChannelService.random_subspace_channel(l, k, n, gen)
            net_max, _ = cls.net_max_f(channel, net)
            sampled = ConcentrationService.f_values(channel.embed(random_unit_vectors(samples, l, gen)), k, n).max()
            return c_theta * net_max - float(sampled)

        margins = run_ordered(soundness_margin, spawn_generators(rng, channels), workers)
        failures = sum(margin < 0.0 for margin in margins)
        checks = [
            inequality("net size below the volumetric bound", "net-cardinality", len(net), bound),
            inequality("covering radius", "net-covering", max_gap, theta),
            inequality("net-max correction is sound", "net-bound-soundness", failures, 0),
        ]
        for check in checks:
            if not check.passed:
                logger.warning(f"Net check {check.tag} failed for {net}: {check.lhs} vs {check.rhs}")
        return NetCertifyReport(
            l=l, theta=theta, construction=net.construction, phase_quotient=net.phase_quotient, net_size=len(net),
            cardinality_bound=bound, covering_samples=max(samples, MIN_COVERING_SAMPLES), max_gap=max_gap,
            covering_pass=covered, channels=channels, c_theta=c_theta, min_soundness_margin=min(margins),
            soundness_failures=failures, checks=checks,
        )
