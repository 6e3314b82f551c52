#!/usr/bin/env python3
"""
Optical elements as state transformers

- SwitchSchedule / apply_switch: the time-dependent 2x2 switch
- InterferometerSetting / apply_delay_interferometer: 1-bit delay
  interferometer in preparation and analysis roles
- attenuator, apply_phase_shift

Every element acts separately on each time bin and on each distinguishability
branch, so parallel and orthogonal branches never interfere.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

try:
    from .config import (
        Branch, DEFAULT_T_MAX, ConfigError, InterferometerRole,
        TimeBinOverflow, UnknownTimeBin,
    )
    from .fock_core import ModeLabel, PureState, ancilla_port, apply_linear_map, apply_mode_pair_unitary
except ImportError:
    from config import (
        Branch, DEFAULT_T_MAX, ConfigError, InterferometerRole,
        TimeBinOverflow, UnknownTimeBin,
    )
    from fock_core import ModeLabel, PureState, ancilla_port, apply_linear_map, apply_mode_pair_unitary

logger = logging.getLogger(__name__)

NOMINAL_ANGLE_TOLERANCE = 1e-9
EXIT_SUFFIX = "_exit"


# =============================================================================
# 2x2 SWITCH
# =============================================================================

def switch_matrix(theta: float) -> np.ndarray:
    """Column 0 is the image of the first input port, column 1 of the second"""
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, s], [-s, c]], dtype=complex)


def extinction_offset(extinction_db: float) -> float:
    """Coherent angle error whose wrong-port power leakage is 10^(-dB/10)"""
    if math.isinf(extinction_db):
        return 0.0
    leakage = 10.0 ** (-extinction_db / 10.0)
    return 2.0 * math.asin(math.sqrt(min(1.0, leakage)))


def _is_nominal(theta: float) -> bool:
    r = theta % math.pi
    return min(r, math.pi - r) < NOMINAL_ANGLE_TOLERANCE


@dataclass(frozen=True)
class SwitchSchedule:
    """Per-bin switch phase theta(t_k) plus the switch imperfections"""

    theta: Mapping[int, float] = field(default_factory=dict)
    extinction_db: float = 20.0
    insertion_loss_db: float = 4.0
    t_max: int = DEFAULT_T_MAX
    default_identity: bool = True   # missing bins act as theta = 0

    def __post_init__(self):
        object.__setattr__(self, "theta", {int(k): float(v) for k, v in self.theta.items()})
        if math.isnan(self.extinction_db) or self.extinction_db < 0.0:
            raise ConfigError(f"extinction_db must be >= 0, got {self.extinction_db}")
        if not (math.isfinite(self.insertion_loss_db) and self.insertion_loss_db >= 0.0):
            raise ConfigError(f"insertion_loss_db must be finite and >= 0, got {self.insertion_loss_db}")
        for time_bin, angle in self.theta.items():
            if not 1 <= time_bin <= self.t_max:
                raise ConfigError(f"theta given for bin {time_bin} outside [1, {self.t_max}]")
            if not math.isfinite(angle):
                raise ConfigError(f"theta(t{time_bin}) must be finite")

    def theta_for(self, time_bin: int) -> float:
        if time_bin in self.theta:
            return self.theta[time_bin]
        if self.default_identity:
            return 0.0
        raise UnknownTimeBin(f"no switch phase for bin t{time_bin}")

    def effective_theta(self, time_bin: int) -> float:
        """Nominal bar/cross angles (0 or pi) carry the finite-extinction bias"""
        nominal = self.theta_for(time_bin)
        if _is_nominal(nominal):
            return nominal + extinction_offset(self.extinction_db)
        return nominal

    @property
    def insertion_transmission(self) -> float:
        return 10.0 ** (-self.insertion_loss_db / 10.0)

    def ideal(self) -> "SwitchSchedule":
        return replace(self, extinction_db=math.inf, insertion_loss_db=0.0)


def entangler_schedule(extinction_db: float = math.inf, insertion_loss_db: float = 0.0,
                       t_max: int = DEFAULT_T_MAX) -> SwitchSchedule:
    """theta(t1) = pi (exchange), theta(t2) = 0 (transmit)"""
    return SwitchSchedule({1: math.pi, 2: 0.0}, extinction_db, insertion_loss_db, t_max)


def hom_schedule(extinction_db: float = math.inf, insertion_loss_db: float = 0.0,
                 t_max: int = DEFAULT_T_MAX) -> SwitchSchedule:
    """theta = pi/2 in both bins: a 50% beamsplitter"""
    return SwitchSchedule({1: math.pi / 2, 2: math.pi / 2}, extinction_db, insertion_loss_db, t_max)


def identity_schedule(t_max: int = DEFAULT_T_MAX) -> SwitchSchedule:
    return SwitchSchedule({}, math.inf, 0.0, t_max)


def apply_switch(state: PureState, schedule: SwitchSchedule,
                 in_ports: Tuple[str, str] = ("A", "B"),
                 out_ports: Tuple[str, str] = ("C", "D")) -> PureState:
    """Rotate each (bin, branch) mode pair of `in_ports` onto `out_ports`.

    The first input port maps to (cos, -sin) and the second to (sin, cos) over
    the output ports. Insertion loss is recorded on the transmission record,
    never applied to amplitudes.
    """
    first, second = in_ports
    if first == second or out_ports[0] == out_ports[1]:
        raise ValueError(f"switch ports must be distinct, got {in_ports} -> {out_ports}")
    blocked = [label for label in state.modes()
               if label.port in out_ports and label.port not in in_ports]
    if blocked:
        raise ValueError(f"switch output modes already occupied: {blocked}")

    occupied = [label for label in state.modes() if label.port in in_ports]
    groups = sorted({(label.time_bin, label.branch) for label in occupied},
                    key=lambda g: (g[0], g[1].value))
    lit_ports = {label.port for label in occupied}

    for time_bin, branch in groups:
        if time_bin > schedule.t_max:
            raise TimeBinOverflow(f"photon in bin t{time_bin} beyond t_max={schedule.t_max}")
        matrix = switch_matrix(schedule.effective_theta(time_bin))
        state = apply_mode_pair_unitary(
            state,
            ModeLabel(first, time_bin, branch),
            ModeLabel(second, time_bin, branch),
            matrix,
            out=(ModeLabel(out_ports[0], time_bin, branch), ModeLabel(out_ports[1], time_bin, branch)),
        )

    factors = [state.port_transmission(port) for port in in_ports if port in lit_ports]
    if len(factors) == 2 and abs(factors[0] - factors[1]) > 1e-12:
        logger.warning("Switch inputs carry unequal transmissions %s; using their mean", factors)
    mean = sum(factors) / len(factors) if factors else 1.0
    record = {port: t for port, t in state.transmission.items() if port not in in_ports}
    for port in out_ports:
        record[port] = mean * schedule.insertion_transmission
    return state.with_terms(state.terms, transmission=record)


# =============================================================================
# DELAY INTERFEROMETER
# =============================================================================

def exit_port(port: str) -> str:
    return f"{port}{EXIT_SUFFIX}"


@dataclass(frozen=True)
class InterferometerSetting:
    phase: float
    port: str
    role: InterferometerRole = InterferometerRole.ANALYSIS
    # Route the discarded analysis amplitude to `<port>_exit` instead of dropping it.
    keep_exit_port: bool = False

    def __post_init__(self):
        if not math.isfinite(self.phase):
            raise ConfigError(f"interferometer phase must be finite, got {self.phase}")


def _branches_at(state: PureState, port: str) -> Dict[Branch, set]:
    found: Dict[Branch, set] = {}
    for label in state.modes():
        if label.port == port:
            found.setdefault(label.branch, set()).add(label.time_bin)
    return found


def preparation_matrix(phase: float) -> np.ndarray:
    """(t1, t2) unitary sending a t1 photon to (|t1> + e^{i phase}|t2>)/sqrt(2)"""
    e = np.exp(1j * phase)
    return np.array([[1.0, -np.conj(e)], [e, 1.0]], dtype=complex) / math.sqrt(2.0)


def analysis_matrix(phase: float, t_max: int, keep_exit_port: bool) -> np.ndarray:
    """Rows: bins 1..t_max (then exit bins 1..t_max); columns: input bins 1..t_max-1"""
    e = np.exp(1j * phase)
    rows = 2 * t_max if keep_exit_port else t_max
    matrix = np.zeros((rows, t_max - 1), dtype=complex)
    for j in range(t_max - 1):
        matrix[j, j] = 0.5
        matrix[j + 1, j] = 0.5 * e
        if keep_exit_port:
            matrix[t_max + j, j] = 0.5
            matrix[t_max + j + 1, j] = -0.5 * e
    return matrix


def apply_delay_interferometer(state: PureState, setting: InterferometerSetting,
                               t_max: int = DEFAULT_T_MAX,
                               record_discard: bool = False) -> PureState:
    port = setting.port
    branches = _branches_at(state, port)

    if setting.role is InterferometerRole.PREPARATION:
        if t_max < 2:
            raise TimeBinOverflow("preparation needs at least two time bins")
        for bins in branches.values():
            if bins - {1}:
                raise ValueError(f"preparation at {port} expects photons in t1 only, found bins {sorted(bins)}")
        matrix = preparation_matrix(setting.phase)
        for branch in sorted(branches, key=lambda b: b.value):
            state = apply_linear_map(
                state, [ModeLabel(port, 1, branch), ModeLabel(port, 2, branch)], matrix,
                check_unitary=True,
            )
        if record_discard:
            # the two unused preparation exits cost half of every photon
            state = state.with_transmission(port, 0.5)
        return state

    for bins in branches.values():
        if max(bins) >= t_max:
            raise TimeBinOverflow(f"analysis at {port} would shift bin t{max(bins)} past t_max={t_max}")
    matrix = analysis_matrix(setting.phase, t_max, setting.keep_exit_port)
    for branch in sorted(branches, key=lambda b: b.value):
        modes_in = [ModeLabel(port, k, branch) for k in range(1, t_max)]
        modes_out = [ModeLabel(port, k, branch) for k in range(1, t_max + 1)]
        if setting.keep_exit_port:
            modes_out += [ModeLabel(exit_port(port), k, branch) for k in range(1, t_max + 1)]
        state = apply_linear_map(state, modes_in, matrix, modes_out=modes_out,
                                 check_unitary=setting.keep_exit_port)
    return state


# =============================================================================
# ATTENUATOR AND PHASE SHIFTER
# =============================================================================

def fresh_ancilla(state: PureState) -> str:
    used = {label.port for label in state.modes()}
    k = 0
    while ancilla_port(k) in used:
        k += 1
    return ancilla_port(k)


def attenuator(state: PureState, port: str, time_bin: int, amplitude_transmission: float,
               ancilla: Optional[str] = None) -> PureState:
    """a+ -> tau a+ + sqrt(1 - tau^2) anc+ on (port, time_bin), every branch"""
    tau = amplitude_transmission
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"amplitude transmission must lie in [0, 1], got {tau}")
    ancilla = ancilla or fresh_ancilla(state)
    matrix = np.array([[tau], [math.sqrt(1.0 - tau * tau)]], dtype=complex)
    for branch in sorted(_branches_at(state, port), key=lambda b: b.value):
        target = ModeLabel(port, time_bin, branch)
        state = apply_linear_map(state, [target], matrix,
                                 modes_out=[target, ModeLabel(ancilla, time_bin, branch)],
                                 check_unitary=True)
    return state


def apply_phase_shift(state: PureState, port: str, time_bin: int, phase: float) -> PureState:
    """a+ -> e^{i phase} a+ on (port, time_bin)"""
    factor = np.exp(1j * phase)
    return state.with_terms({
        occ: amp * factor ** occ.port_count(port, time_bin) for occ, amp in state.items()
    })
