#!/usr/bin/env python3
"""
Gated threshold detection

Exact click distributions, Monte-Carlo sampling of count records, accidental
estimation and fringe-visibility fitting.
"""

import itertools
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

try:
    from .config import DegeneratePhases, InsufficientPoints, InvariantViolation, ZeroStarts
    from .fock_core import PureState
except ImportError:
    from config import DegeneratePhases, InsufficientPoints, InvariantViolation, ZeroStarts
    from fock_core import PureState

logger = logging.getLogger(__name__)

SAMPLE_CHUNK = 250_000
MIN_PHASE_SPAN = 1.5 * math.pi
VISIBILITY_FLOOR = 1e-6
# (amplitude, visibility, offset)
FIT_BOUNDS = ([0.0, -1.0, -np.inf], [np.inf, 1.0, np.inf])

SeedLike = Union[int, Sequence[int]]


# =============================================================================
# DETECTOR AND LOSS RECORDS
# =============================================================================

@dataclass(frozen=True)
class DetectorConfig:
    port: str
    gate_bin: int
    efficiency: float = 0.08
    dark_prob_per_gate: float = 2e-6

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(f"efficiency must lie in [0, 1], got {self.efficiency}")
        if not 0.0 <= self.dark_prob_per_gate < 1.0:
            raise ValueError(f"dark probability must lie in [0, 1), got {self.dark_prob_per_gate}")
        if self.gate_bin < 1:
            raise ValueError(f"gate_bin must be >= 1, got {self.gate_bin}")


@dataclass(frozen=True)
class LossBudget:
    """Per-port amplitude-squared transmission applied at detection"""
    factors: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for port, factor in self.factors.items():
            if not 0.0 < factor <= 1.0:
                raise ValueError(f"transmission for port {port} must lie in (0, 1], got {factor}")

    @classmethod
    def from_state(cls, state: PureState) -> "LossBudget":
        return cls(dict(state.transmission))

    @classmethod
    def unit(cls) -> "LossBudget":
        return cls({})

    def transmission(self, port: str) -> float:
        return self.factors.get(port, 1.0)


@dataclass(frozen=True)
class CountRecord:
    starts: int
    singles_c: int
    singles_d: int
    coincidences: int
    accidentals_estimate: float = 0.0

    def __post_init__(self):
        if self.coincidences > min(self.singles_c, self.singles_d):
            raise InvariantViolation(f"coincidences exceed singles in {self}")
        if max(self.singles_c, self.singles_d, self.coincidences) > self.starts:
            raise InvariantViolation(f"counts exceed start pulses in {self}")

    @property
    def rate(self) -> float:
        return self.coincidences / self.starts if self.starts else 0.0

    @property
    def rate_stderr(self) -> float:
        if not self.starts:
            return 0.0
        p = self.rate
        return math.sqrt(p * (1.0 - p) / self.starts)


@dataclass(frozen=True)
class ClickDistribution:
    """Joint probability of every click/no-click pattern over the detectors"""
    ports: Tuple[str, ...]
    patterns: Mapping[Tuple[bool, ...], float]

    def probability(self, pattern: Sequence[bool]) -> float:
        return self.patterns.get(tuple(bool(x) for x in pattern), 0.0)

    def click_probability(self, index: int) -> float:
        return sum(p for pattern, p in self.patterns.items() if pattern[index])

    @property
    def coincidence(self) -> float:
        return self.probability((True,) * len(self.ports))


# =============================================================================
# EXACT CLICK PROBABILITIES
# =============================================================================

def _count_classes(state: PureState, detectors: Sequence[DetectorConfig]) -> Tuple[np.ndarray, np.ndarray]:
    """Group outcome weights by the photon count each detector's gate sees"""
    ports = [(d.port, d.gate_bin) for d in detectors]
    if len(set(d.port for d in detectors)) != len(detectors):
        raise ValueError(f"detectors must sit on distinct ports, got {ports}")
    grouped: Dict[Tuple[int, ...], float] = {}
    for occ, amp in state.items():
        key = tuple(occ.port_count(port, gate) for port, gate in ports)
        grouped[key] = grouped.get(key, 0.0) + abs(amp) ** 2
    remainder = 1.0 - state.norm_squared
    if remainder > 0.0:
        vacuum = (0,) * len(detectors)
        grouped[vacuum] = grouped.get(vacuum, 0.0) + remainder
    keys = sorted(grouped)
    return np.array(keys, dtype=np.int64).reshape(len(keys), len(detectors)), np.array([grouped[k] for k in keys])


def _survival(detectors: Sequence[DetectorConfig], budget: LossBudget) -> np.ndarray:
    return np.array([budget.transmission(d.port) * d.efficiency for d in detectors])


def click_probabilities(state: PureState, detectors: Sequence[DetectorConfig],
                        budget: LossBudget = None) -> ClickDistribution:
    budget = budget if budget is not None else LossBudget.from_state(state)
    counts, weights = _count_classes(state, detectors)
    survive = _survival(detectors, budget)
    dark = np.array([d.dark_prob_per_gate for d in detectors])
    # P(no click | n photons) = (1 - dark) (1 - p_surv)^n
    silent = (1.0 - dark)[None, :] * (1.0 - survive)[None, :] ** counts

    patterns: Dict[Tuple[bool, ...], float] = {}
    for pattern in itertools.product((False, True), repeat=len(detectors)):
        mask = np.array(pattern)
        per_class = np.where(mask[None, :], 1.0 - silent, silent).prod(axis=1)
        patterns[pattern] = float(np.dot(weights, per_class))
    return ClickDistribution(tuple(d.port for d in detectors), patterns)


# =============================================================================
# MONTE-CARLO SAMPLING
# =============================================================================

def _sample_block(counts: np.ndarray, weights: np.ndarray, survive: np.ndarray, dark: np.ndarray,
                  pulses: int, seed_seq: np.random.SeedSequence) -> Tuple[np.ndarray, int]:
    rng = np.random.default_rng(seed_seq)
    singles = np.zeros(counts.shape[1], dtype=np.int64)
    coincidences = 0
    remaining = pulses
    while remaining > 0:
        size = min(SAMPLE_CHUNK, remaining)
        outcome = rng.choice(len(weights), size=size, p=weights)
        photons = counts[outcome]
        surviving = rng.binomial(photons, survive)
        clicks = (surviving > 0) | (rng.random(photons.shape) < dark)
        singles += clicks.sum(axis=0)
        coincidences += int(clicks.all(axis=1).sum())
        remaining -= size
    return singles, coincidences


def split_pulses(pulses: int, workers: int) -> List[int]:
    base, extra = divmod(pulses, workers)
    return [base + (1 if k < extra else 0) for k in range(workers)]


def run_monte_carlo(state: PureState, detectors: Sequence[DetectorConfig], budget: LossBudget,
                    pulses: int, seed: SeedLike, workers: int = 1) -> CountRecord:
    """Sample `pulses` gated detections of two detectors.

    Worker k draws from SeedSequence(seed).spawn(workers)[k]; results are
    reproducible for a fixed (seed, workers).
    """
    if pulses < 1:
        raise ValueError(f"pulses must be >= 1, got {pulses}")
    if len(detectors) != 2:
        raise ValueError("count records need exactly two detectors")
    counts, weights = _count_classes(state, detectors)
    weights = weights / weights.sum()
    survive = _survival(detectors, budget)
    dark = np.array([d.dark_prob_per_gate for d in detectors])

    streams = np.random.SeedSequence(seed).spawn(workers)
    shares = split_pulses(pulses, workers)
    jobs = [(counts, weights, survive, dark, share, stream)
            for share, stream in zip(shares, streams) if share > 0]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=len(jobs)) as pool:
            results = list(pool.map(_sample_block, *zip(*jobs)))
    else:
        results = [_sample_block(*job) for job in jobs]

    singles = sum(r[0] for r in results)
    coincidences = sum(r[1] for r in results)
    record = CountRecord(pulses, int(singles[0]), int(singles[1]), int(coincidences))
    return CountRecord(record.starts, record.singles_c, record.singles_d, record.coincidences,
                       estimate_accidentals(record))


# =============================================================================
# ACCIDENTALS
# =============================================================================

def estimate_accidentals(record: CountRecord) -> float:
    """Uncorrelated-coincidence estimate singles_C * singles_D / starts"""
    if record.starts <= 0:
        raise ZeroStarts("accidental estimate needs at least one start pulse")
    return record.singles_c * record.singles_d / record.starts


def subtract_accidentals(record: CountRecord) -> float:
    return max(0.0, record.coincidences - estimate_accidentals(record))


# =============================================================================
# FRINGE FITTING
# =============================================================================

@dataclass(frozen=True)
class FringeFit:
    """Fitted A (1 - V cos(phi - offset))"""
    visibility: float
    amplitude: float
    phase_offset: float
    residual: float
    visibility_stderr: float = 0.0
    minmax_visibility: float = 0.0

    def curve(self, phases) -> np.ndarray:
        return fringe_model(np.asarray(phases, dtype=float), self.amplitude, self.visibility, self.phase_offset)


def fringe_model(phi, amplitude, visibility, offset):
    return amplitude * (1.0 - visibility * np.cos(phi - offset))


def minmax_visibility(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    high, low = counts.max(), counts.min()
    return float((high - low) / (high + low)) if high + low > 0 else 0.0


def fit_visibility(points: Sequence[Tuple[float, float]]) -> FringeFit:
    if len(points) < 5:
        raise InsufficientPoints(f"fringe fit needs >= 5 points, got {len(points)}")
    phases = np.array([p for p, _ in points], dtype=float)
    counts = np.array([c for _, c in points], dtype=float)
    if phases.max() - phases.min() < MIN_PHASE_SPAN - 1e-9:
        raise DegeneratePhases(f"phases span {phases.max() - phases.min():.3f} rad < 1.5 pi")
    design = np.column_stack([np.ones_like(phases), np.cos(phases), np.sin(phases)])
    if np.linalg.matrix_rank(design) < 3:
        raise DegeneratePhases("phases do not resolve a cosine fringe")

    # linear seed: counts = b0 + b1 cos + b2 sin
    coef, *_ = np.linalg.lstsq(design, counts, rcond=None)
    b0, b1, b2 = coef
    if b0 <= 0.0:
        raise InsufficientPoints("fringe carries no counts")
    visibility = math.hypot(b1, b2) / b0
    offset = math.atan2(-b2, -b1)
    dof = len(points) - 3
    rss = float(np.sum((counts - design @ coef) ** 2))
    cov = (rss / dof if dof > 0 else 0.0) * np.linalg.inv(design.T @ design)
    if visibility > VISIBILITY_FLOOR:
        grad = np.array([-visibility / b0, b1 / (b0 * b0 * visibility), b2 / (b0 * b0 * visibility)])
    else:
        grad = np.array([0.0, 1.0 / b0, 1.0 / b0]) / math.sqrt(2.0)
    stderr = math.sqrt(max(0.0, float(grad @ cov @ grad)))
    amplitude = b0

    if visibility > VISIBILITY_FLOOR and rss > 0.0:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", OptimizeWarning)
                popt, pcov = curve_fit(fringe_model, phases, counts,
                                       p0=[b0, min(visibility, 0.999), offset], bounds=FIT_BOUNDS)
            amplitude, visibility, offset = (float(x) for x in popt)
            if np.isfinite(pcov[1, 1]):
                stderr = math.sqrt(max(0.0, float(pcov[1, 1])))
        except (RuntimeError, ValueError) as exc:
            logger.warning("Fringe refinement failed (%s); keeping the linear solution", exc)
        if visibility < 0.0:
            visibility, offset = -visibility, offset + math.pi
    # floored (accidental-subtracted) fringes overshoot a free cosine
    visibility = min(visibility, 1.0)

    residual = float(np.sum((counts - fringe_model(phases, amplitude, visibility, offset)) ** 2))
    return FringeFit(
        visibility=float(visibility),
        amplitude=float(amplitude),
        phase_offset=math.remainder(offset, 2.0 * math.pi),
        residual=residual,
        visibility_stderr=stderr,
        minmax_visibility=minmax_visibility(counts),
    )
