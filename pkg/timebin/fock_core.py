#!/usr/bin/env python3
"""
Sparse Fock-state core

Bosonic states over labeled (port, time-bin, branch) modes stored as a sparse
map from occupation vectors to complex amplitudes. Every optical element in
the simulator reduces to `apply_linear_map`, the creation-operator
substitution a+_j -> sum_i M[i, j] a+_i.

Contains:
- ModeLabel, OccupationVector, PureState
- apply_linear_map / apply_mode_pair_unitary / apply_mode_pair_isometry
- tensor, project, fidelity
- dense_oracle_apply and permanent_amplitude, brute-force oracles for testing
"""

import itertools
import math
from dataclasses import dataclass
from functools import total_ordering
from types import MappingProxyType
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import comb

try:
    from .config import (
        Branch, DEFAULT_N_MAX, DEFAULT_TOLERANCE, NORM_SLACK, UNITARITY_TOLERANCE,
        DimensionTooLarge, EmptyProjection, InvariantViolation, ModeCollision,
        NonUnitaryMatrix, TruncationOverflow,
    )
except ImportError:
    from config import (
        Branch, DEFAULT_N_MAX, DEFAULT_TOLERANCE, NORM_SLACK, UNITARITY_TOLERANCE,
        DimensionTooLarge, EmptyProjection, InvariantViolation, ModeCollision,
        NonUnitaryMatrix, TruncationOverflow,
    )


PORT_RANK = {"A": 0, "B": 1, "C": 2, "D": 3}
ANCILLA_PREFIX = "ANC"

# Dense oracle limits
ORACLE_MAX_MODES = 8
ORACLE_MAX_PHOTONS = 4


def port_rank(port: str) -> Tuple[int, int, str]:
    """Total order over port names: A < B < C < D < ANC0 < ANC1 < ... < others"""
    if port in PORT_RANK:
        return (PORT_RANK[port], 0, "")
    if port.startswith(ANCILLA_PREFIX) and port[len(ANCILLA_PREFIX):].isdigit():
        return (4, int(port[len(ANCILLA_PREFIX):]), "")
    return (5, 0, port)


def ancilla_port(index: int) -> str:
    return f"{ANCILLA_PREFIX}{index}"


# =============================================================================
# MODES AND OCCUPATIONS
# =============================================================================

@total_ordering
@dataclass(frozen=True)
class ModeLabel:
    """A (port, time bin, distinguishability branch) mode"""
    port: str
    time_bin: int = 1
    branch: Branch = Branch.PARALLEL

    def __post_init__(self):
        if self.time_bin < 1:
            raise ValueError(f"time_bin must be >= 1, got {self.time_bin}")

    def sort_key(self):
        return (port_rank(self.port), self.time_bin, 0 if self.branch is Branch.PARALLEL else 1)

    def __lt__(self, other: "ModeLabel") -> bool:
        if not isinstance(other, ModeLabel):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    def moved(self, port: Optional[str] = None, time_bin: Optional[int] = None,
              branch: Optional[Branch] = None) -> "ModeLabel":
        return ModeLabel(
            port if port is not None else self.port,
            time_bin if time_bin is not None else self.time_bin,
            branch if branch is not None else self.branch,
        )

    def __repr__(self) -> str:
        suffix = "" if self.branch is Branch.PARALLEL else "⊥"
        return f"{self.port}{suffix}@t{self.time_bin}"


def mode(port: str, time_bin: int = 1, branch: Branch = Branch.PARALLEL) -> ModeLabel:
    return ModeLabel(port, time_bin, branch)


@dataclass(frozen=True)
class OccupationVector:
    """Canonically ordered sparse occupation numbers; zero entries are absent"""
    occupations: Tuple[Tuple[ModeLabel, int], ...] = ()

    @classmethod
    def from_mapping(cls, counts: Mapping[ModeLabel, int]) -> "OccupationVector":
        items = []
        for label, n in counts.items():
            if n < 0:
                raise ValueError(f"negative occupation {n} for {label}")
            if n > 0:
                items.append((label, int(n)))
        items.sort(key=lambda item: item[0].sort_key())
        return cls(tuple(items))

    @property
    def total(self) -> int:
        return sum(n for _, n in self.occupations)

    def count(self, label: ModeLabel) -> int:
        for key, n in self.occupations:
            if key == label:
                return n
        return 0

    def port_count(self, port: str, time_bin: Optional[int] = None) -> int:
        return sum(
            n for key, n in self.occupations
            if key.port == port and (time_bin is None or key.time_bin == time_bin)
        )

    def modes(self) -> Tuple[ModeLabel, ...]:
        return tuple(key for key, _ in self.occupations)

    def as_dict(self) -> Dict[ModeLabel, int]:
        return dict(self.occupations)

    def __iter__(self) -> Iterator[Tuple[ModeLabel, int]]:
        return iter(self.occupations)

    def __repr__(self) -> str:
        if not self.occupations:
            return "|vac>"
        return "|" + ", ".join(f"{n}:{key!r}" for key, n in self.occupations) + ">"


OccupationLike = Union[OccupationVector, Mapping[ModeLabel, int]]


def _as_occupation(value: OccupationLike) -> OccupationVector:
    if isinstance(value, OccupationVector):
        return value
    return OccupationVector.from_mapping(value)


# =============================================================================
# PURE STATE
# =============================================================================

class PureState:
    """Immutable sparse pure state (subnormalized states allowed).

    `transmission` is the per-port record of uniform amplitude-squared losses
    (insertion loss, preparation discards) consumed by the detection layer.
    """

    __slots__ = ("_terms", "tolerance", "n_max", "_transmission")

    def __init__(self, terms: Mapping[OccupationLike, complex],
                 tolerance: float = DEFAULT_TOLERANCE,
                 n_max: int = DEFAULT_N_MAX,
                 transmission: Optional[Mapping[str, float]] = None):
        kept: Dict[OccupationVector, complex] = {}
        for occ, amp in terms.items():
            occ = _as_occupation(occ)
            amp = complex(amp)
            if abs(amp) < tolerance:
                continue
            if occ.total > n_max:
                raise TruncationOverflow(f"term {occ!r} holds {occ.total} photons > n_max={n_max}")
            kept[occ] = kept.get(occ, 0j) + amp
        norm2 = sum(abs(a) ** 2 for a in kept.values())
        if norm2 > 1.0 + NORM_SLACK:
            raise InvariantViolation(f"state norm^2 {norm2:.12g} exceeds 1")
        self._terms = MappingProxyType(kept)
        self.tolerance = tolerance
        self.n_max = n_max
        self._transmission = MappingProxyType(dict(transmission or {}))

    # ---- constructors -------------------------------------------------------

    @classmethod
    def vacuum(cls, **kwargs) -> "PureState":
        return cls({OccupationVector(): 1.0}, **kwargs)

    @classmethod
    def basis(cls, counts: Mapping[ModeLabel, int], amplitude: complex = 1.0, **kwargs) -> "PureState":
        return cls({OccupationVector.from_mapping(counts): amplitude}, **kwargs)

    def with_terms(self, terms: Mapping[OccupationLike, complex],
                   transmission: Optional[Mapping[str, float]] = None) -> "PureState":
        """New state with the same settings (and transmission record unless given)"""
        return PureState(terms, tolerance=self.tolerance, n_max=self.n_max,
                         transmission=self._transmission if transmission is None else transmission)

    # ---- accessors ----------------------------------------------------------

    @property
    def terms(self) -> Mapping[OccupationVector, complex]:
        return self._terms

    @property
    def transmission(self) -> Mapping[str, float]:
        return self._transmission

    def port_transmission(self, port: str) -> float:
        return self._transmission.get(port, 1.0)

    def with_transmission(self, port: str, factor: float) -> "PureState":
        """Multiply the recorded amplitude-squared transmission of `port` by `factor`"""
        if not 0.0 < factor <= 1.0:
            raise ValueError(f"transmission factor must lie in (0, 1], got {factor}")
        record = dict(self._transmission)
        record[port] = record.get(port, 1.0) * factor
        return PureState(self._terms, self.tolerance, self.n_max, record)

    @property
    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self._terms.values()))

    def amplitude(self, occupation: OccupationLike) -> complex:
        return self._terms.get(_as_occupation(occupation), 0j)

    def modes(self) -> Tuple[ModeLabel, ...]:
        found = {label for occ in self._terms for label in occ.modes()}
        return tuple(sorted(found))

    def ports(self) -> Tuple[str, ...]:
        return tuple(sorted({label.port for label in self.modes()}, key=port_rank))

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __repr__(self) -> str:
        shown = sorted(self._terms.items(), key=lambda kv: -abs(kv[1]))[:6]
        body = " + ".join(f"({a.real:+.4f}{a.imag:+.4f}j){occ!r}" for occ, a in shown)
        more = f" + ... ({len(self._terms) - 6} more)" if len(self._terms) > 6 else ""
        return f"PureState({body}{more})"

    # ---- algebra ------------------------------------------------------------

    def filter(self, predicate: Callable[[OccupationVector], bool]) -> "PureState":
        """Keep the terms satisfying `predicate` without renormalizing"""
        kept = {occ: a for occ, a in self._terms.items() if predicate(occ)}
        if not kept:
            raise EmptyProjection("no term satisfies the post-selection predicate")
        return self.with_terms(kept)

    def scaled(self, factor: complex) -> "PureState":
        return self.with_terms({occ: a * factor for occ, a in self._terms.items()})

    def renormalized(self) -> "PureState":
        norm2 = self.norm_squared
        if norm2 <= 0.0:
            raise EmptyProjection("cannot renormalize an empty state")
        return self.scaled(1.0 / math.sqrt(norm2))

    def inner(self, other: "PureState") -> complex:
        """<self|other>"""
        if len(self) <= len(other):
            total = sum(a.conjugate() * other._terms.get(occ, 0j) for occ, a in self._terms.items())
        else:
            total = sum(self._terms.get(occ, 0j).conjugate() * b for occ, b in other._terms.items())
        return complex(total)

    def max_abs_difference(self, other: "PureState") -> float:
        keys = set(self._terms) | set(other._terms)
        if not keys:
            return 0.0
        return max(abs(self._terms.get(k, 0j) - other._terms.get(k, 0j)) for k in keys)

    def photon_number_distribution(self, ports: Optional[Iterable[str]] = None) -> Dict[int, float]:
        """P(n) of the total photon number, or of the photons on `ports` only"""
        selected = None if ports is None else set(ports)
        dist: Dict[int, float] = {}
        for occ, a in self._terms.items():
            n = occ.total if selected is None else sum(occ.port_count(p) for p in selected)
            dist[n] = dist.get(n, 0.0) + abs(a) ** 2
        return dict(sorted(dist.items()))


def superpose(weighted: Iterable[Tuple[complex, PureState]]) -> PureState:
    """Linear combination sum_k c_k |psi_k>; settings are taken from the first state"""
    weighted = list(weighted)
    if not weighted:
        raise ValueError("superpose needs at least one state")
    terms: Dict[OccupationVector, complex] = {}
    for coeff, state in weighted:
        for occ, a in state.items():
            terms[occ] = terms.get(occ, 0j) + coeff * a
    return weighted[0][1].with_terms(terms)


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2 / (<a|a><b|b>)"""
    denom = a.norm_squared * b.norm_squared
    if denom == 0.0:
        raise EmptyProjection("fidelity of an empty state")
    return abs(a.inner(b)) ** 2 / denom


# =============================================================================
# LINEAR MODE MAPS
# =============================================================================

def check_isometry(matrix: np.ndarray, atol: float = UNITARITY_TOLERANCE) -> bool:
    """True when the columns of `matrix` are orthonormal (unitary if square)"""
    gram = matrix.conj().T @ matrix
    return bool(np.allclose(gram, np.eye(matrix.shape[1]), rtol=0.0, atol=atol))


def _expand_products(matrix: np.ndarray, exponents: Tuple[int, ...]) -> Dict[Tuple[int, ...], complex]:
    """Expand prod_j (sum_i M[i, j] x_i)^{n_j} into monomials over the output modes"""
    n_out = matrix.shape[0]
    poly: Dict[Tuple[int, ...], complex] = {(0,) * n_out: 1.0 + 0j}
    for j, n_j in enumerate(exponents):
        column = matrix[:, j]
        support = [i for i in range(n_out) if column[i] != 0]
        for _ in range(n_j):
            grown: Dict[Tuple[int, ...], complex] = {}
            for monomial, coeff in poly.items():
                for i in support:
                    bumped = list(monomial)
                    bumped[i] += 1
                    key = tuple(bumped)
                    grown[key] = grown.get(key, 0j) + coeff * column[i]
            poly = grown
    return poly


def apply_linear_map(state: PureState, modes_in: Sequence[ModeLabel], matrix,
                     modes_out: Optional[Sequence[ModeLabel]] = None,
                     check_unitary: bool = False) -> PureState:
    """Substitute a+_{in_j} -> sum_i matrix[i, j] a+_{out_i} in every term.

    `modes_out` defaults to `modes_in` (an in-place map). Photons already
    sitting in output modes that are not inputs are kept and the bosonic
    normalization sqrt((m + r)! / r!) is applied to them.
    """
    matrix = np.asarray(matrix, dtype=complex)
    modes_in = list(modes_in)
    modes_out = list(modes_in if modes_out is None else modes_out)
    if matrix.shape != (len(modes_out), len(modes_in)):
        raise ValueError(f"matrix shape {matrix.shape} does not match {len(modes_out)}x{len(modes_in)} modes")
    if len(set(modes_in)) != len(modes_in) or len(set(modes_out)) != len(modes_out):
        raise ValueError("mode lists must not repeat a mode")
    if check_unitary and not check_isometry(matrix):
        raise NonUnitaryMatrix(f"matrix is not an isometry within {UNITARITY_TOLERANCE}:\n{matrix}")

    in_index = {label: j for j, label in enumerate(modes_in)}
    cache: Dict[Tuple[int, ...], Dict[Tuple[int, ...], complex]] = {}
    out_terms: Dict[OccupationVector, complex] = {}

    for occ, amp in state.items():
        exponents = [0] * len(modes_in)
        rest: Dict[ModeLabel, int] = {}
        for label, n in occ:
            if label in in_index:
                exponents[in_index[label]] = n
            else:
                rest[label] = n
        key = tuple(exponents)
        if key not in cache:
            cache[key] = _expand_products(matrix, key)
        norm_in = math.prod(math.factorial(n) for n in key)
        for monomial, coeff in cache[key].items():
            counts = dict(rest)
            weight = 1.0
            for i, m in enumerate(monomial):
                if m == 0:
                    continue
                label = modes_out[i]
                r = counts.get(label, 0)
                counts[label] = r + m
                weight *= math.factorial(r + m) / math.factorial(r)
            target = OccupationVector.from_mapping(counts)
            out_terms[target] = out_terms.get(target, 0j) + amp * coeff * math.sqrt(weight / norm_in)

    return state.with_terms(out_terms)


def apply_mode_pair_unitary(state: PureState, u: ModeLabel, v: ModeLabel, m,
                            out: Optional[Tuple[ModeLabel, ModeLabel]] = None,
                            check_unitary: bool = True) -> PureState:
    """a+_u -> m00 a+_u' + m10 a+_v',  a+_v -> m01 a+_u' + m11 a+_v'"""
    if u == v:
        raise ValueError(f"mode pair must be two distinct modes, got {u!r} twice")
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"mode-pair matrix must be 2x2, got {m.shape}")
    before = state.norm_squared
    result = apply_linear_map(state, [u, v], m, modes_out=list(out) if out else None,
                              check_unitary=check_unitary)
    if check_unitary and abs(result.norm_squared - before) > 1e-9:
        raise InvariantViolation(f"unitary map changed norm^2 from {before} to {result.norm_squared}")
    return result


def apply_mode_pair_isometry(state: PureState, u: ModeLabel, v: ModeLabel, m,
                             out: Optional[Tuple[ModeLabel, ModeLabel]] = None) -> PureState:
    """Same substitution as apply_mode_pair_unitary without the unitarity check"""
    return apply_mode_pair_unitary(state, u, v, m, out=out, check_unitary=False)


def tensor(a: PureState, b: PureState) -> PureState:
    overlap = set(a.modes()) & set(b.modes())
    if overlap:
        raise ModeCollision(f"states share modes {sorted(overlap)}")
    terms: Dict[OccupationVector, complex] = {}
    for occ_a, amp_a in a.items():
        for occ_b, amp_b in b.items():
            merged = occ_a.as_dict()
            merged.update(occ_b.as_dict())
            terms[OccupationVector.from_mapping(merged)] = amp_a * amp_b
    record = dict(a.transmission)
    for port, factor in b.transmission.items():
        record[port] = record.get(port, 1.0) * factor
    return PureState(terms, tolerance=min(a.tolerance, b.tolerance),
                     n_max=max(a.n_max, b.n_max), transmission=record)


def project(state: PureState, predicate: Callable[[OccupationVector], bool]) -> Tuple[PureState, float]:
    """Post-select on `predicate`; returns the renormalized state and its probability"""
    total = state.norm_squared
    if total <= 0.0:
        raise EmptyProjection("cannot project an empty state")
    kept = state.filter(predicate)
    probability = min(1.0, kept.norm_squared / total)
    return kept.renormalized(), probability


# =============================================================================
# ORACLES
# =============================================================================

def _fock_basis(n_modes: int, max_photons: int) -> List[Tuple[int, ...]]:
    basis = []
    for total in range(max_photons + 1):
        for combo in itertools.combinations_with_replacement(range(n_modes), total):
            counts = [0] * n_modes
            for i in combo:
                counts[i] += 1
            basis.append(tuple(counts))
    return basis


def dense_oracle_apply(state: PureState, u: ModeLabel, v: ModeLabel, m) -> PureState:
    """Brute-force reference for apply_mode_pair_unitary.

    Enumerates the whole Fock basis of the involved modes and builds the
    explicit matrix of the pair map from binomial expansions.
    """
    m = np.asarray(m, dtype=complex)
    labels = sorted(set(state.modes()) | {u, v})
    max_photons = max((occ.total for occ in state.terms), default=0)
    if len(labels) > ORACLE_MAX_MODES or max_photons > ORACLE_MAX_PHOTONS:
        raise DimensionTooLarge(
            f"{len(labels)} modes / {max_photons} photons exceeds {ORACLE_MAX_MODES} modes / "
            f"{ORACLE_MAX_PHOTONS} photons"
        )
    basis = _fock_basis(len(labels), max_photons)
    index = {occ: k for k, occ in enumerate(basis)}
    iu, iv = labels.index(u), labels.index(v)

    dense = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, occ in enumerate(basis):
        j, k = occ[iu], occ[iv]
        for p in range(j + 1):
            for q in range(k + 1):
                coeff = (comb(j, p, exact=True) * comb(k, q, exact=True)
                         * m[0, 0] ** p * m[1, 0] ** (j - p) * m[0, 1] ** q * m[1, 1] ** (k - q))
                n_u, n_v = p + q, j + k - p - q
                norm = math.sqrt(math.factorial(n_u) * math.factorial(n_v)
                                 / (math.factorial(j) * math.factorial(k)))
                target = list(occ)
                target[iu], target[iv] = n_u, n_v
                dense[index[tuple(target)], col] += coeff * norm

    vector = np.zeros(len(basis), dtype=complex)
    for occ, amp in state.items():
        vector[index[tuple(occ.count(label) for label in labels)]] = amp
    result = dense @ vector
    terms = {
        OccupationVector.from_mapping(dict(zip(labels, basis[k]))): result[k]
        for k in np.flatnonzero(np.abs(result) >= state.tolerance)
    }
    return state.with_terms(terms)


def permanent(matrix) -> complex:
    """Permanent by Ryser's inclusion-exclusion formula"""
    a = np.asarray(matrix, dtype=complex)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    total = 0j
    for size in range(1, n + 1):
        sign = (-1) ** size
        for cols in itertools.combinations(range(n), size):
            total += sign * np.prod(a[:, list(cols)].sum(axis=1))
    return complex((-1) ** n * total)


def permanent_amplitude(unitary, input_counts: Sequence[int], output_counts: Sequence[int]) -> complex:
    """<out| U |in> for a linear map whose column j is the image of input mode j"""
    u = np.asarray(unitary, dtype=complex)
    if sum(input_counts) != sum(output_counts):
        return 0j
    cols = [j for j, n in enumerate(input_counts) for _ in range(n)]
    rows = [i for i, n in enumerate(output_counts) for _ in range(n)]
    sub = u[np.ix_(rows, cols)]
    norm = math.sqrt(math.prod(math.factorial(n) for n in input_counts)
                     * math.prod(math.factorial(n) for n in output_counts))
    return permanent(sub) / norm
