#!/usr/bin/env python3
"""
SPDC photon-pair source and time-bin qubit preparation

Pairs are emitted into (A, t1) and (B, t1) with thermal or Poissonian
pair-number statistics. Partial distinguishability of Bob's photon is modeled
by splitting it between the parallel and orthogonal branches.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict

import numpy as np

try:
    from .config import (
        Branch, DEFAULT_N_MAX, DEFAULT_TOLERANCE, InterferometerRole, SourceConfig,
        TruncationOverflow,
    )
    from .fock_core import ModeLabel, OccupationVector, PureState, apply_linear_map
    from .elements import InterferometerSetting, apply_delay_interferometer
except ImportError:
    from config import (
        Branch, DEFAULT_N_MAX, DEFAULT_TOLERANCE, InterferometerRole, SourceConfig,
        TruncationOverflow,
    )
    from fock_core import ModeLabel, OccupationVector, PureState, apply_linear_map
    from elements import InterferometerSetting, apply_delay_interferometer

logger = logging.getLogger(__name__)

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


def pair_probabilities(config: SourceConfig) -> np.ndarray:
    """p(n) for n = 0 .. pair_truncation"""
    return np.array([config.pair_probability(n) for n in range(config.pair_truncation + 1)])


def tail_mass(config: SourceConfig) -> float:
    return config.tail_mass()


def spdc_state(config: SourceConfig, signal_port: str = "A", idler_port: str = "B",
               n_max: int = DEFAULT_N_MAX, tolerance: float = DEFAULT_TOLERANCE) -> PureState:
    """sum_n sqrt(p(n)) |n>_signal,t1 |n>_idler,t1 up to the pair truncation"""
    if 2 * config.pair_truncation > n_max:
        raise TruncationOverflow(
            f"{config.pair_truncation} pairs need {2 * config.pair_truncation} photons > n_max={n_max}"
        )
    signal, idler = ModeLabel(signal_port, 1), ModeLabel(idler_port, 1)
    terms: Dict[OccupationVector, complex] = {}
    for n, p in enumerate(pair_probabilities(config)):
        terms[OccupationVector.from_mapping({signal: n, idler: n})] = math.sqrt(p)
    logger.debug("SPDC state mu=%.3f %s, tail mass %.2e", config.mu, config.statistics.value,
                 config.tail_mass())
    return PureState(terms, tolerance=tolerance, n_max=n_max)


def single_pair_state(signal_port: str = "A", idler_port: str = "B",
                      n_max: int = DEFAULT_N_MAX, tolerance: float = DEFAULT_TOLERANCE) -> PureState:
    """Exactly one pair: |1>_signal,t1 |1>_idler,t1"""
    return PureState.basis({ModeLabel(signal_port, 1): 1, ModeLabel(idler_port, 1): 1},
                           tolerance=tolerance, n_max=n_max)


def prepare_timebin_qubit(state: PureState, port: str, phase: float,
                          record_discard: bool = False) -> PureState:
    """a+_t1 -> (a+_t1 + e^{i phase} a+_t2)/sqrt(2) at `port`"""
    setting = InterferometerSetting(phase, port, InterferometerRole.PREPARATION)
    return apply_delay_interferometer(state, setting, record_discard=record_discard)


# =============================================================================
# DISTINGUISHABILITY
# =============================================================================

@dataclass(frozen=True)
class OverlapModel:
    """Temporal amplitude overlap of Alice's and Bob's photons at relative delay `delay_ps`.

    Gaussian pulses give exp(-dt^2 / (4 sigma^2)), so zeta(0) = 1.
    """
    delay_ps: float = 0.0
    pulse_fwhm_ps: float = 60.0

    def __post_init__(self):
        if not self.pulse_fwhm_ps > 0.0:
            raise ValueError(f"pulse_fwhm_ps must be > 0, got {self.pulse_fwhm_ps}")

    @property
    def sigma_ps(self) -> float:
        return self.pulse_fwhm_ps * FWHM_TO_SIGMA

    @property
    def temporal_overlap(self) -> float:
        return math.exp(-self.delay_ps ** 2 / (4.0 * self.sigma_ps ** 2))

    @property
    def zeta(self) -> float:
        return self.temporal_overlap


def apply_distinguishability(state: PureState, port: str, model: OverlapModel,
                             static_overlap: float = 1.0) -> PureState:
    """a+_parallel -> zeta a+_parallel + sqrt(1 - zeta^2) a+_orthogonal at `port`

    zeta = static_overlap * model.zeta. `static_overlap` is a delay-independent
    mode mismatch (spectral or spatial) between the two photons. Both overlaps
    enter one split: a second split would need a second orthogonal mode.
    """
    if not 0.0 <= static_overlap <= 1.0:
        raise ValueError(f"static_overlap must lie in [0, 1], got {static_overlap}")
    zeta = static_overlap * model.zeta
    occupied = [label for label in state.modes() if label.port == port]
    if any(label.branch is Branch.ORTHOGONAL for label in occupied):
        raise ValueError(f"port {port} already carries orthogonal-branch photons")
    if zeta >= 1.0:
        return state
    matrix = np.array([[zeta], [math.sqrt(1.0 - zeta * zeta)]], dtype=complex)
    for time_bin in sorted({label.time_bin for label in occupied}):
        parallel = ModeLabel(port, time_bin, Branch.PARALLEL)
        state = apply_linear_map(state, [parallel], matrix,
                                 modes_out=[parallel, parallel.moved(branch=Branch.ORTHOGONAL)],
                                 check_unitary=True)
    return state
