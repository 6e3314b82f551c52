#!/usr/bin/env python3
"""
End-to-end experiment pipelines

source -> distinguishability (Bob) -> preparation interferometers ->
switch -> analysis interferometers -> gated detectors

Contains:
- ExperimentConfig, ScanPoint, ScanResult
- run_entangler, analytic_coincidence, werner_witness
- hom_scan, fringe_scan, delay_scan, mu_sweep and their summaries
- two-qubit helpers: density matrix, concurrence, Schmidt coefficients

Every scan point carries the exact (analytic) click probabilities and, when
sampled, a Monte-Carlo CountRecord drawn from them.
"""

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

try:
    from .config import (
        Branch, DEFAULT_TOLERANCE, EmptyProjection, InsufficientPoints, InterferometerRole, InvariantViolation,
        SourceConfig, TimebinConfig, TIMEBIN_VERSION,
    )
    from .fock_core import ModeLabel, OccupationVector, PureState, project
    from .elements import (
        InterferometerSetting, SwitchSchedule, apply_delay_interferometer, apply_switch,
        entangler_schedule, hom_schedule,
    )
    from .source import (
        OverlapModel, apply_distinguishability, prepare_timebin_qubit, single_pair_state, spdc_state,
    )
    from .detection import (
        CountRecord, DetectorConfig, FringeFit, LossBudget, click_probabilities, fit_visibility,
        run_monte_carlo, subtract_accidentals,
    )
except ImportError:
    from config import (
        Branch, DEFAULT_TOLERANCE, EmptyProjection, InsufficientPoints, InterferometerRole, InvariantViolation,
        SourceConfig, TimebinConfig, TIMEBIN_VERSION,
    )
    from fock_core import ModeLabel, OccupationVector, PureState, project
    from elements import (
        InterferometerSetting, SwitchSchedule, apply_delay_interferometer, apply_switch,
        entangler_schedule, hom_schedule,
    )
    from source import (
        OverlapModel, apply_distinguishability, prepare_timebin_qubit, single_pair_state, spdc_state,
    )
    from detection import (
        CountRecord, DetectorConfig, FringeFit, LossBudget, click_probabilities, fit_visibility,
        run_monte_carlo, subtract_accidentals,
    )

logger = logging.getLogger(__name__)

WERNER_THRESHOLD = 1.0 / 3.0
PLATEAU_FWHM_MULTIPLE = 3.0
# two-qubit basis order {t2t2, t2t1, t1t2, t1t1}
QUBIT_INDEX = {(2, 2): 0, (2, 1): 1, (1, 2): 2, (1, 1): 3}


def _jsonable(value):
    if isinstance(value, Enum):
        return value.value
    raise TypeError(f"cannot serialize {type(value).__name__}")


# =============================================================================
# CONFIGURATION
# =============================================================================

def _default_detectors() -> Tuple[DetectorConfig, DetectorConfig]:
    return (DetectorConfig("C", 2), DetectorConfig("D", 2))


@dataclass(frozen=True)
class ExperimentConfig:
    source: SourceConfig = field(default_factory=SourceConfig)
    schedule: SwitchSchedule = field(default_factory=lambda: entangler_schedule(20.0, 4.0))
    phases: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)   # (phi_A, phi_B, phi_C, phi_D)
    detectors: Tuple[DetectorConfig, ...] = field(default_factory=_default_detectors)
    pulses: int = 1_000_000
    seed: int = 20250601
    ideal: bool = False
    delay_ps: float = 0.0
    analysis: bool = True
    workers: int = 1
    n_max: int = 4
    tolerance: float = DEFAULT_TOLERANCE

    @classmethod
    def from_settings(cls, settings: TimebinConfig, **overrides) -> "ExperimentConfig":
        switch, det, run = settings.switch, settings.detectors, settings.run
        config = cls(
            source=settings.source,
            schedule=entangler_schedule(switch.extinction_db, switch.insertion_loss_db, run.t_max),
            detectors=(
                DetectorConfig("C", 2, det.efficiency, det.dark_prob_per_gate),
                DetectorConfig("D", 2, det.efficiency, det.dark_prob_per_gate),
            ),
            pulses=run.pulses,
            seed=run.seed,
            ideal=run.ideal,
            workers=run.workers,
            n_max=run.n_max,
            tolerance=run.tolerance,
        )
        return replace(config, **overrides)

    def effective(self) -> "ExperimentConfig":
        """Ideal mode: single pair, perfect switch, unit efficiency, no darks, full overlap"""
        if not self.ideal:
            return self
        return replace(
            self,
            source=replace(self.source, spectral_overlap=1.0),
            schedule=self.schedule.ideal(),
            detectors=tuple(replace(d, efficiency=1.0, dark_prob_per_gate=0.0) for d in self.detectors),
        )

    def gated(self, time_bin: int) -> "ExperimentConfig":
        return replace(self, detectors=tuple(replace(d, gate_bin=time_bin) for d in self.detectors))

    def config_hash(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True, default=_jsonable)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


# =============================================================================
# PIPELINE
# =============================================================================

def build_pipeline_state(config: ExperimentConfig) -> PureState:
    cfg = config.effective()
    phi_a, phi_b, phi_c, phi_d = cfg.phases
    if cfg.ideal:
        state = single_pair_state(n_max=cfg.n_max, tolerance=cfg.tolerance)
    else:
        state = spdc_state(cfg.source, n_max=cfg.n_max, tolerance=cfg.tolerance)
    overlap = OverlapModel(cfg.delay_ps, cfg.source.pulse_fwhm_ps)
    state = apply_distinguishability(state, "B", overlap, static_overlap=cfg.source.spectral_overlap)
    state = prepare_timebin_qubit(state, "A", phi_a, record_discard=not cfg.ideal)
    state = prepare_timebin_qubit(state, "B", phi_b, record_discard=not cfg.ideal)
    state = apply_switch(state, cfg.schedule, ("A", "B"), ("C", "D"))
    if cfg.analysis:
        for port, phase in (("C", phi_c), ("D", phi_d)):
            setting = InterferometerSetting(phase, port, InterferometerRole.ANALYSIS, keep_exit_port=True)
            state = apply_delay_interferometer(state, setting, t_max=cfg.schedule.t_max)
    return state


def _is_entangler(schedule: SwitchSchedule) -> bool:
    return (abs(schedule.theta_for(1) - math.pi) < 1e-12) and abs(schedule.theta_for(2)) < 1e-12


def coincidence_predicate(occupation: OccupationVector) -> bool:
    return occupation.port_count("C") >= 1 and occupation.port_count("D") >= 1


def run_entangler(config: ExperimentConfig) -> Tuple[PureState, float]:
    """Post-select >= 1 photon at C and at D behind the entangler switch"""
    if not _is_entangler(config.schedule):
        raise ValueError("run_entangler needs theta(t1) = pi, theta(t2) = 0")
    state = build_pipeline_state(replace(config, analysis=False))
    return project(state, coincidence_predicate)


def entangled_target(phi_a: float, phi_b: float) -> PureState:
    """(-|t1>_C|t1>_D + e^{i(phi_A + phi_B)} |t2>_C|t2>_D) / sqrt(2)"""
    return PureState({
        OccupationVector.from_mapping({ModeLabel("C", 1): 1, ModeLabel("D", 1): 1}): -1.0 / math.sqrt(2.0),
        OccupationVector.from_mapping({ModeLabel("C", 2): 1, ModeLabel("D", 2): 1}):
            np.exp(1j * (phi_a + phi_b)) / math.sqrt(2.0),
    })


def analytic_coincidence(phi_a: float, phi_b: float, phi_c: float, phi_d: float, visibility: float) -> float:
    """1 - V cos(phi_A + phi_B - phi_C - phi_D)"""
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility}")
    return 1.0 - visibility * math.cos(phi_a + phi_b - phi_c - phi_d)


def werner_witness(visibility: float) -> bool:
    """Fringe visibility above 1/3 certifies entanglement of a Werner state"""
    if not -1.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [-1, 1], got {visibility}")
    return visibility > WERNER_THRESHOLD


# =============================================================================
# SCANS
# =============================================================================

@dataclass(frozen=True)
class ScanPoint:
    setting: float
    coincidence_probability: float
    singles_probability: Tuple[float, float]
    record: Optional[CountRecord] = None

    @property
    def accidental_probability(self) -> float:
        return self.singles_probability[0] * self.singles_probability[1]

    @property
    def subtracted_probability(self) -> float:
        return max(0.0, self.coincidence_probability - self.accidental_probability)

    @property
    def rate(self) -> float:
        return self.record.rate if self.record else self.coincidence_probability

    @property
    def rate_stderr(self) -> float:
        return self.record.rate_stderr if self.record else 0.0


@dataclass
class ScanResult:
    kind: str
    variable: str
    points: List[ScanPoint]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        steps = np.diff(self.settings())
        if len(steps) and not (np.all(steps > 0) or np.all(steps < 0)):
            raise InvariantViolation(f"{self.kind} settings are not strictly monotone")

    @property
    def sampled(self) -> bool:
        return all(p.record is not None for p in self.points)

    def settings(self) -> np.ndarray:
        return np.array([p.setting for p in self.points], dtype=float)

    def rates(self) -> np.ndarray:
        return np.array([p.rate for p in self.points])

    def rate_errors(self) -> np.ndarray:
        return np.array([p.rate_stderr for p in self.points])

    def analytic_rates(self) -> np.ndarray:
        return np.array([p.coincidence_probability for p in self.points])


def _evaluate_point(config: ExperimentConfig, index: int, sampled: bool) -> ScanPoint:
    cfg = config.effective()
    state = build_pipeline_state(cfg)
    budget = LossBudget.from_state(state)
    dist = click_probabilities(state, cfg.detectors, budget)
    record = None
    if sampled:
        record = run_monte_carlo(state, cfg.detectors, budget, cfg.pulses, (cfg.seed, index), cfg.workers)
    return ScanPoint(
        setting=0.0,
        coincidence_probability=dist.coincidence,
        singles_probability=(dist.click_probability(0), dist.click_probability(1)),
        record=record,
    )


def _run_scan(kind: str, variable: str, configs: Sequence[Tuple[float, ExperimentConfig]],
              base: ExperimentConfig, sampled: bool) -> ScanResult:
    if not configs:
        raise ValueError(f"{kind} needs at least one setting")
    points = []
    for index, (setting, cfg) in enumerate(configs):
        point = replace(_evaluate_point(cfg, index, sampled), setting=float(setting))
        logger.info("%s %d/%d %s=%.4g P=%.4e%s", kind, index + 1, len(configs), variable, setting,
                    point.coincidence_probability,
                    f" counts={point.record.coincidences}" if point.record else "")
        points.append(point)
    metadata = {
        "config_hash": base.config_hash(),
        "seed": base.seed,
        "pulses": base.pulses if sampled else 0,
        "workers": base.workers,
        "ideal": base.ideal,
        "version": TIMEBIN_VERSION,
    }
    return ScanResult(kind, variable, points, metadata)


def _rebased(config: ExperimentConfig, schedule_factory) -> ExperimentConfig:
    s = config.schedule
    return replace(config, schedule=schedule_factory(s.extinction_db, s.insertion_loss_db, s.t_max))


def hom_scan(delays: Sequence[float], config: ExperimentConfig, sampled: bool = True) -> ScanResult:
    """Coincidences vs delay with theta = pi/2, no analysis interferometers, gate on t1"""
    base = replace(_rebased(config, hom_schedule), analysis=False).gated(1)
    return _run_scan("hom_scan", "delay_ps", [(d, replace(base, delay_ps=d)) for d in delays], base, sampled)


def fringe_scan(phi_c_values: Sequence[float], phi_d: float, config: ExperimentConfig,
                sampled: bool = True) -> ScanResult:
    """Coincidence fringe vs Charlie's phase, entangler switch, gate on t2"""
    base = replace(_rebased(config, entangler_schedule), analysis=True).gated(2)
    phi_a, phi_b = base.phases[0], base.phases[1]
    configs = [(c, replace(base, phases=(phi_a, phi_b, c, phi_d))) for c in phi_c_values]
    result = _run_scan("fringe_scan", "phi_c", configs, base, sampled)
    result.metadata["phi_d"] = phi_d
    return result


def delay_scan(delays: Sequence[float], charlie_phase: float, config: ExperimentConfig,
               david_phase: float = 0.0, sampled: bool = True) -> ScanResult:
    """Bunching (Charlie 2 pi) / anti-bunching (Charlie pi) vs relative delay"""
    base = replace(_rebased(config, entangler_schedule), analysis=True).gated(2)
    base = replace(base, phases=(base.phases[0], base.phases[1], charlie_phase, david_phase))
    result = _run_scan("delay_scan", "delay_ps", [(d, replace(base, delay_ps=d)) for d in delays],
                       base, sampled)
    result.metadata.update(charlie_phase=charlie_phase, david_phase=david_phase)
    return result


# =============================================================================
# SCAN SUMMARIES
# =============================================================================

def plateau_indices(settings: np.ndarray, pulse_fwhm_ps: float) -> List[int]:
    """Points with |delay| >= 3 FWHM, or the two outermost points when none are that far"""
    far = [i for i, s in enumerate(settings) if abs(s) >= PLATEAU_FWHM_MULTIPLE * pulse_fwhm_ps]
    if far:
        return far
    return sorted({int(np.argmin(settings)), int(np.argmax(settings))})


def _plateau(result: ScanResult, pulse_fwhm_ps: float, sampled: bool) -> Tuple[float, float]:
    rates = result.rates() if sampled else result.analytic_rates()
    errors = result.rate_errors() if sampled else np.zeros(len(rates))
    far = plateau_indices(result.settings(), pulse_fwhm_ps)
    plateau = float(np.mean(rates[far]))
    if plateau <= 0.0:
        raise InsufficientPoints(f"{result.kind} plateau carries no coincidences")
    return plateau, float(math.sqrt(np.sum(errors[far] ** 2)) / len(far))


def hom_dip_visibility(result: ScanResult, pulse_fwhm_ps: float = 60.0,
                       sampled: bool = False) -> Tuple[float, float]:
    """(plateau - minimum) / plateau with its propagated statistical error"""
    rates = result.rates() if sampled else result.analytic_rates()
    errors = result.rate_errors() if sampled else np.zeros(len(rates))
    plateau, plateau_err = _plateau(result, pulse_fwhm_ps, sampled)
    k = int(np.argmin(rates))
    visibility = (plateau - rates[k]) / plateau
    stderr = math.hypot(errors[k] / plateau, rates[k] * plateau_err / plateau ** 2)
    return float(visibility), float(stderr)


def delay_contrast(result: ScanResult, pulse_fwhm_ps: float = 60.0,
                   sampled: bool = False) -> Tuple[float, float]:
    """Rate at the delay closest to zero over the plateau, with its statistical error"""
    rates = result.rates() if sampled else result.analytic_rates()
    errors = result.rate_errors() if sampled else np.zeros(len(rates))
    plateau, plateau_err = _plateau(result, pulse_fwhm_ps, sampled)
    k = int(np.argmin(np.abs(result.settings())))
    ratio = rates[k] / plateau
    stderr = math.hypot(errors[k] / plateau, rates[k] * plateau_err / plateau ** 2)
    return float(ratio), float(stderr)


@dataclass(frozen=True)
class FringeSummary:
    raw: FringeFit
    subtracted: FringeFit
    singles_flatness: float   # max |singles - mean|, in sigma (sampled) or relative units (analytic)
    raw_witness: bool
    subtracted_witness: bool


def analyze_fringe(result: ScanResult, sampled: bool = False) -> FringeSummary:
    phases = result.settings()
    if sampled:
        raw = [float(p.record.coincidences) for p in result.points]
        subtracted = [subtract_accidentals(p.record) for p in result.points]
        singles = np.array([p.record.singles_c for p in result.points], dtype=float)
        scale = math.sqrt(singles.mean()) if singles.mean() > 0 else 1.0
    else:
        raw = [p.coincidence_probability for p in result.points]
        subtracted = [p.subtracted_probability for p in result.points]
        singles = np.array([p.singles_probability[0] for p in result.points])
        scale = singles.mean() if singles.mean() > 0 else 1.0
    raw_fit = fit_visibility(list(zip(phases, raw)))
    sub_fit = fit_visibility(list(zip(phases, subtracted)))
    return FringeSummary(
        raw=raw_fit,
        subtracted=sub_fit,
        singles_flatness=float(np.max(np.abs(singles - singles.mean())) / scale),
        raw_witness=werner_witness(max(-1.0, min(1.0, raw_fit.visibility))),
        subtracted_witness=werner_witness(max(-1.0, min(1.0, sub_fit.visibility))),
    )


def mu_sweep(mus: Sequence[float], config: ExperimentConfig) -> List[Tuple[float, float]]:
    """Analytic HOM dip visibility for each mean pair number"""
    far = 5.0 * config.source.pulse_fwhm_ps
    sweep = []
    for mu in mus:
        cfg = replace(config, source=replace(config.source, mu=mu))
        result = hom_scan([-far, 0.0, far], cfg, sampled=False)
        visibility, _ = hom_dip_visibility(result, config.source.pulse_fwhm_ps)
        logger.info("mu=%.3f dip visibility %.4f", mu, visibility)
        sweep.append((mu, visibility))
    return sweep


# =============================================================================
# TWO-QUBIT HELPERS
# =============================================================================

def _qubit_vectors(state: PureState, ports: Tuple[str, str]) -> Dict[Tuple[Branch, Branch], np.ndarray]:
    """Amplitudes of the one-photon-per-port sector, keyed by the branch pair"""
    first, second = ports
    vectors: Dict[Tuple[Branch, Branch], np.ndarray] = {}
    for occ, amp in state.items():
        if occ.total != 2 or occ.port_count(first) != 1 or occ.port_count(second) != 1:
            continue
        a = next(label for label, _ in occ if label.port == first)
        b = next(label for label, _ in occ if label.port == second)
        key = (a.time_bin, b.time_bin)
        if key not in QUBIT_INDEX:
            continue
        vectors.setdefault((a.branch, b.branch), np.zeros(4, dtype=complex))[QUBIT_INDEX[key]] += amp
    if not vectors:
        raise EmptyProjection(f"no two-qubit amplitude on ports {ports}")
    return vectors


def two_qubit_density_matrix(state: PureState, ports: Tuple[str, str] = ("C", "D")) -> np.ndarray:
    """Normalized 4x4 density matrix on {t2t2, t2t1, t1t2, t1t1}, branches traced out"""
    rho = sum(np.outer(v, v.conj()) for v in _qubit_vectors(state, ports).values())
    trace = float(np.real(np.trace(rho)))
    if trace <= 0.0:
        raise EmptyProjection("two-qubit sector has zero weight")
    return rho / trace


def concurrence(rho: np.ndarray) -> float:
    rho = np.asarray(rho, dtype=complex)
    eigvals, eigvecs = np.linalg.eigh(rho)
    if eigvals[-1] > 1.0 - 1e-12:
        psi = eigvecs[:, -1]
        return float(2.0 * abs(psi[0] * psi[3] - psi[1] * psi[2]))
    sigma_yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
    spin_flipped = sigma_yy @ rho.conj() @ sigma_yy
    lam = np.sort(np.sqrt(np.abs(np.linalg.eigvals(rho @ spin_flipped).real)))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def schmidt_coefficients(state: PureState, ports: Tuple[str, str] = ("C", "D")) -> np.ndarray:
    vectors = _qubit_vectors(state, ports)
    if len(vectors) != 1:
        raise ValueError("Schmidt decomposition needs a pure two-qubit state (single branch pair)")
    (vector,) = vectors.values()
    matrix = vector.reshape(2, 2) / np.linalg.norm(vector)
    return np.linalg.svd(matrix, compute_uv=False)
