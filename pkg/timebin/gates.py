#!/usr/bin/env python3
"""
Time-bin gate constructions

- partial_pbs_schedule: theta(t1) = 2 acos(1/sqrt(3)), theta(t2) = 0
- cz_gate: central partial PBS between ports A and B, then a compensation
  switch on each output (C, D) that keeps amplitude 1/sqrt(3) of bin t2
- entangler_as_pbs_check: the theta(t1) = pi, theta(t2) = 0 routing table

Qubit basis: |0> = t2, |1> = t1, two-qubit order {t2t2, t2t1, t1t2, t1t1}.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

try:
    from .config import (
        CompensationStyle, GateContractViolation, NotSinglePhotonInput, EmptyProjection,
    )
    from .fock_core import ModeLabel, OccupationVector, PureState, ancilla_port, tensor
    from .elements import SwitchSchedule, apply_switch, attenuator, entangler_schedule
    from .experiments import QUBIT_INDEX, concurrence, two_qubit_density_matrix
except ImportError:
    from config import (
        CompensationStyle, GateContractViolation, NotSinglePhotonInput, EmptyProjection,
    )
    from fock_core import ModeLabel, OccupationVector, PureState, ancilla_port, tensor
    from elements import SwitchSchedule, apply_switch, attenuator, entangler_schedule
    from experiments import QUBIT_INDEX, concurrence, two_qubit_density_matrix

logger = logging.getLogger(__name__)

PARTIAL_PBS_THETA = 2.0 * math.acos(1.0 / math.sqrt(3.0))
CZ_TARGET = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
CZ_SUCCESS = 1.0 / 9.0
BASIS_LABELS = ("t2t2", "t2t1", "t1t2", "t1t1")
QUBIT_BINS = (2, 1)   # qubit index 0 -> t2, 1 -> t1

QubitInput = Union[Sequence[complex], np.ndarray, PureState]


def partial_pbs_schedule(extinction_db: float = math.inf) -> SwitchSchedule:
    """Keeps t2 fully, couples t1 with amplitude cos(theta/2) = 1/sqrt(3)"""
    return SwitchSchedule({1: PARTIAL_PBS_THETA, 2: 0.0}, extinction_db=extinction_db, insertion_loss_db=0.0)


def compensation_schedule(extinction_db: float = math.inf) -> SwitchSchedule:
    """In-place switch keeping amplitude 1/sqrt(3) of t2 and all of t1"""
    return SwitchSchedule({1: 0.0, 2: PARTIAL_PBS_THETA}, extinction_db=extinction_db, insertion_loss_db=0.0)


# =============================================================================
# INPUT ENCODING
# =============================================================================

def encode_qubit(qubit: QubitInput, port: str) -> PureState:
    """Single photon at `port` in amplitudes (t2, t1); PureState inputs are validated"""
    if isinstance(qubit, PureState):
        for occ in qubit.terms:
            if occ.total != 1 or occ.port_count(port) != 1 or occ.modes()[0].time_bin not in QUBIT_BINS:
                raise NotSinglePhotonInput(f"qubit at {port} must be one photon in t1/t2, found {occ!r}")
        return qubit
    amps = np.asarray(qubit, dtype=complex).ravel()
    if amps.shape != (2,) or np.linalg.norm(amps) == 0.0:
        raise NotSinglePhotonInput(f"qubit amplitudes must be a non-zero 2-vector, got {qubit!r}")
    amps = amps / np.linalg.norm(amps)
    return PureState({
        OccupationVector.from_mapping({ModeLabel(port, time_bin): 1}): a
        for time_bin, a in zip(QUBIT_BINS, amps)
    })


def _output_predicate(occ: OccupationVector) -> bool:
    return occ.total == 2 and occ.port_count("C") == 1 and occ.port_count("D") == 1


def output_amplitudes(state: PureState) -> np.ndarray:
    """Post-selected (C, D) amplitudes in the {t2t2, t2t1, t1t2, t1t1} order"""
    vector = np.zeros(4, dtype=complex)
    for occ, amp in state.items():
        if not _output_predicate(occ):
            continue
        c = next(label for label, _ in occ if label.port == "C")
        d = next(label for label, _ in occ if label.port == "D")
        key = (c.time_bin, d.time_bin)
        if key in QUBIT_INDEX:
            vector[QUBIT_INDEX[key]] += amp
    return vector


# =============================================================================
# CZ GATE
# =============================================================================

@dataclass
class GateReport:
    """Post-selected operator on {t2t2, t2t1, t1t2, t1t1}"""
    operator: np.ndarray
    success_probabilities: np.ndarray
    fidelity: float
    compensation: CompensationStyle = CompensationStyle.SWITCH
    extinction_db: float = math.inf
    swap_asymmetry: float = 0.0
    linearity_residual: float = 0.0
    plus_plus_concurrence: float = 0.0
    basis: Tuple[str, ...] = BASIS_LABELS
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "basis": list(self.basis),
            "operator_real": np.real(self.operator).tolist(),
            "operator_imag": np.imag(self.operator).tolist(),
            "success_probabilities": [float(p) for p in self.success_probabilities],
            "fidelity": float(self.fidelity),
            "compensation": self.compensation.value,
            "extinction_db": self.extinction_db,
            "swap_asymmetry": float(self.swap_asymmetry),
            "linearity_residual": float(self.linearity_residual),
            "plus_plus_concurrence": float(self.plus_plus_concurrence),
            "notes": list(self.notes),
        }

    def check_contract(self, tolerance: float = 1e-9) -> None:
        """Raise GateContractViolation unless fidelity ~ 1 and every success ~ 1/9"""
        if self.fidelity <= 1.0 - tolerance:
            raise GateContractViolation(f"process fidelity {self.fidelity:.12f} <= 1 - {tolerance}")
        worst = float(np.max(np.abs(self.success_probabilities - CZ_SUCCESS)))
        if worst > tolerance:
            raise GateContractViolation(f"success probability off 1/9 by {worst:.3e}")


def process_fidelity(operator: np.ndarray, target: np.ndarray = CZ_TARGET) -> float:
    """|Tr(U^dagger M)|^2 / (d Tr(M^dagger M)); invariant under scaling of M"""
    norm = float(np.real(np.trace(operator.conj().T @ operator)))
    if norm == 0.0:
        return 0.0
    return float(abs(np.trace(target.conj().T @ operator)) ** 2 / (target.shape[0] * norm))


def cz_circuit(state: PureState, compensation: CompensationStyle = CompensationStyle.SWITCH,
               extinction_db: float = math.inf) -> PureState:
    """Partial PBS on (A, B) -> (C, D), then the 1/sqrt(3) compensation on t2 of C and D"""
    state = apply_switch(state, partial_pbs_schedule(extinction_db), ("A", "B"), ("C", "D"))
    if compensation is CompensationStyle.SWITCH:
        schedule = compensation_schedule(extinction_db)
        state = apply_switch(state, schedule, ("C", ancilla_port(0)), ("C", ancilla_port(0)))
        state = apply_switch(state, schedule, ("D", ancilla_port(1)), ("D", ancilla_port(1)))
    else:
        state = attenuator(state, "C", 2, 1.0 / math.sqrt(3.0), ancilla=ancilla_port(0))
        state = attenuator(state, "D", 2, 1.0 / math.sqrt(3.0), ancilla=ancilla_port(1))
    return state


def _basis_input(index: int) -> Tuple[np.ndarray, np.ndarray]:
    qa, qb = divmod(index, 2)
    return np.eye(2)[qa], np.eye(2)[qb]


def cz_gate_report(compensation: CompensationStyle = CompensationStyle.SWITCH,
                   extinction_db: float = math.inf) -> GateReport:
    """Reconstruct the post-selected operator from the four basis inputs and check it"""
    columns, success = [], []
    for index in range(4):
        qa, qb = _basis_input(index)
        state = cz_circuit(tensor(encode_qubit(qa, "A"), encode_qubit(qb, "B")), compensation, extinction_db)
        out = output_amplitudes(state)
        columns.append(out)
        success.append(float(np.sum(np.abs(out) ** 2)))
    operator = np.column_stack(columns)

    swap = np.eye(4)[[0, 2, 1, 3]]
    plus = np.array([1.0, 1.0]) / math.sqrt(2.0)
    plus_state = cz_circuit(tensor(encode_qubit(plus, "A"), encode_qubit(plus, "B")), compensation, extinction_db)
    predicted = operator @ np.full(4, 0.5)
    measured = output_amplitudes(plus_state)

    report = GateReport(
        operator=operator,
        success_probabilities=np.array(success),
        fidelity=process_fidelity(operator),
        compensation=compensation,
        extinction_db=extinction_db,
        swap_asymmetry=float(np.max(np.abs(swap @ operator @ swap - operator))),
        linearity_residual=float(np.max(np.abs(predicted - measured))),
        plus_plus_concurrence=concurrence(two_qubit_density_matrix(
            plus_state.filter(_output_predicate), ("C", "D"))),
    )
    off_diagonal = float(np.max(np.abs(operator - np.diag(np.diag(operator)))))
    report.notes.append(f"max off-diagonal leakage {off_diagonal:.3e}")
    logger.info("CZ report (%s, %s dB): fidelity %.12f, success %s", compensation.value, extinction_db,
                report.fidelity, np.round(report.success_probabilities, 12))
    return report


def cz_gate(qubit_a: QubitInput, qubit_b: QubitInput, report: bool = True,
            compensation: CompensationStyle = CompensationStyle.SWITCH,
            extinction_db: float = math.inf) -> Tuple[PureState, Optional[GateReport]]:
    """Run the CZ circuit and post-select one photon at C and one at D (not renormalized)"""
    state = tensor(encode_qubit(qubit_a, "A"), encode_qubit(qubit_b, "B"))
    if state.norm_squared == 0.0:
        raise NotSinglePhotonInput("empty qubit input")
    output = cz_circuit(state, compensation, extinction_db)
    try:
        selected = output.filter(_output_predicate)
    except EmptyProjection:
        raise NotSinglePhotonInput("no one-photon-per-port outcome survives") from None
    return selected, (cz_gate_report(compensation, extinction_db) if report else None)


# =============================================================================
# ENTANGLER ROUTING
# =============================================================================

ENTANGLER_ROUTES = {
    ("A", 1): "D",   # exchanged at t1
    ("A", 2): "C",   # transmitted at t2
    ("B", 1): "C",
    ("B", 2): "D",
}


def entangler_as_pbs_check(qubits: Optional[Sequence[Tuple[str, int]]] = None) -> bool:
    """Every single-photon basis input leaves through its PBS-like port with probability 1"""
    schedule = entangler_schedule()
    for port, time_bin in (qubits or list(ENTANGLER_ROUTES)):
        out = apply_switch(PureState.basis({ModeLabel(port, time_bin): 1}), schedule)
        expected = OccupationVector.from_mapping({ModeLabel(ENTANGLER_ROUTES[(port, time_bin)], time_bin): 1})
        if abs(abs(out.amplitude(expected)) ** 2 - 1.0) > 1e-12:
            logger.warning("Photon %s@t%d is not routed to %s", port, time_bin, ENTANGLER_ROUTES[(port, time_bin)])
            return False
    return True
