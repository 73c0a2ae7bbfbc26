"""Exact simulation of the equal-magnitude signed states the protocols use.

A :class:`SparseState` is ``sum_t sign_t |x_t> / sqrt(k)`` over at most
``max_terms`` distinct basis strings. That form is closed under everything the
schemes do (basis-string projectors, Z phases, measurement collapse), so no
floating point enters the protocol path. :class:`DenseState` is the
brute-force state vector, kept only as an oracle for small registers.

Qubit 0 is the leftmost ket symbol, i.e. the most significant bit of the
basis index.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .bits import BitString
from .errors import (
    DimensionMismatch, EqualBasisStrings, FormatError, IndexOutOfRange,
    TooManyQubits, UnsupportedTermCount,
)
from .primitives import RngStream

DEFAULT_MAX_TERMS = 2
N_DENSE_MAX = 20


@dataclass(frozen=True)
class SparseState:
    n_qubits: int
    terms: tuple[tuple[BitString, int], ...]
    max_terms: int = field(default=DEFAULT_MAX_TERMS, compare=False, repr=False)

    def __post_init__(self):
        if not 1 <= len(self.terms) <= self.max_terms:
            raise UnsupportedTermCount(
                f"{len(self.terms)} terms, allowed 1..{self.max_terms}"
            )
        seen = set()
        for basis, sign in self.terms:
            if basis.length != self.n_qubits:
                raise DimensionMismatch(
                    f"basis string of {basis.length} bits in a {self.n_qubits}-qubit state"
                )
            if sign not in (1, -1):
                raise ValueError(f"sign must be +1 or -1, got {sign!r}")
            if basis.value in seen:
                raise EqualBasisStrings(f"repeated basis string {basis}")
            seen.add(basis.value)

    @property
    def k(self) -> int:
        return len(self.terms)

    def support(self) -> frozenset[BitString]:
        return frozenset(b for b, _ in self.terms)

    def amplitude(self, x: BitString) -> float:
        for b, s in self.terms:
            if b == x:
                return s / np.sqrt(self.k)
        return 0.0

    def to_text(self) -> str:
        lines = [f"n={self.n_qubits} k={self.k}"]
        lines += [f"{'+' if s > 0 else '-'} {b}" for b, s in self.terms]
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str, max_terms: int = DEFAULT_MAX_TERMS) -> SparseState:
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines:
            raise FormatError("empty state block", "line 1")
        head = lines[0].split()
        try:
            if len(head) != 2 or not head[0].startswith("n=") or not head[1].startswith("k="):
                raise ValueError
            n, k = int(head[0][2:]), int(head[1][2:])
        except ValueError:
            raise FormatError(f"bad state header {lines[0]!r}", "line 1") from None
        if len(lines) != k + 1:
            raise FormatError(f"header announces {k} terms, found {len(lines) - 1}", "line 1")
        terms = []
        for lineno, line in enumerate(lines[1:], start=2):
            parts = line.split()
            if len(parts) != 2 or parts[0] not in "+-" or len(parts[1]) != n:
                raise FormatError(f"bad term {line!r}", f"line {lineno}")
            terms.append((BitString.from_str(parts[1]), 1 if parts[0] == "+" else -1))
        return cls(n, tuple(terms), max_terms=max(max_terms, k))


@dataclass(frozen=True)
class DenseState:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_qubits > N_DENSE_MAX:
            raise TooManyQubits(f"{self.n_qubits} > {N_DENSE_MAX}")
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise DimensionMismatch("amplitude vector has the wrong length")
        norm = float(np.dot(self.amplitudes, self.amplitudes))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state is not normalised (norm^2 = {norm})")

    def probabilities(self) -> np.ndarray:
        return self.amplitudes ** 2


@dataclass(frozen=True)
class BasisPredicate:
    """A deterministic yes/no test on basis strings of a fixed length."""

    length: int
    fn: Callable[[BitString], bool]

    def __call__(self, x: BitString) -> bool:
        if x.length != self.length:
            raise DimensionMismatch(f"predicate on {self.length} bits given {x.length}")
        return bool(self.fn(x))


class Outcome(enum.Enum):
    ACCEPT = "accept"
    REJECT = "reject"


# ---------------------------------------------------------------------------
# state preparation and unitaries
# ---------------------------------------------------------------------------

def make_basis(x: BitString) -> SparseState:
    return SparseState(x.length, ((x, 1),))


def superpose2(x0: BitString, x1: BitString, d0: int) -> SparseState:
    """``(|x0> + (-1)^d0 |x1>) / sqrt(2)``."""
    if x0.length != x1.length:
        raise DimensionMismatch("basis strings have different lengths")
    if x0 == x1:
        raise EqualBasisStrings(f"cannot superpose {x0} with itself")
    return SparseState(x0.length, ((x0, 1), (x1, -1 if d0 else 1)))


def apply_z_phase(state: SparseState, qubit_index: int, m: int) -> SparseState:
    """Apply ``Z^m`` to one qubit."""
    if not 0 <= qubit_index < state.n_qubits:
        raise IndexOutOfRange(f"qubit {qubit_index} of {state.n_qubits}")
    if not m:
        return state
    terms = tuple((b, -s if b[qubit_index] else s) for b, s in state.terms)
    return SparseState(state.n_qubits, terms, state.max_terms)


def apply_x(state: SparseState, qubit_index: int) -> SparseState:
    """Bit flip on one qubit."""
    if not 0 <= qubit_index < state.n_qubits:
        raise IndexOutOfRange(f"qubit {qubit_index} of {state.n_qubits}")
    terms = tuple((b.flip(qubit_index), s) for b, s in state.terms)
    return SparseState(state.n_qubits, terms, state.max_terms)


# ---------------------------------------------------------------------------
# measurements
# ---------------------------------------------------------------------------

def project(state: SparseState, pred: BasisPredicate, rng: RngStream):
    """Two-outcome measurement ``{Pi, Id - Pi}`` with ``Pi`` diagonal on ``pred``.

    Returns ``(Outcome.ACCEPT, post_state)`` or ``(Outcome.REJECT, None)``.
    The random stream is only consumed when both outcomes are possible.
    """
    if pred.length != state.n_qubits:
        raise DimensionMismatch(f"predicate on {pred.length} bits, state on {state.n_qubits}")
    kept = tuple(t for t in state.terms if pred(t[0]))
    if not kept:
        return Outcome.REJECT, None
    if len(kept) == state.k:
        return Outcome.ACCEPT, state
    if rng.below(state.k) >= len(kept):
        return Outcome.REJECT, None
    return Outcome.ACCEPT, SparseState(state.n_qubits, kept, state.max_terms)


def measure_computational(state: SparseState, rng: RngStream) -> BitString:
    if state.k == 1:
        return state.terms[0][0]
    return state.terms[rng.below(state.k)][0]


def _relative_phase(state: SparseState) -> int:
    (_, s0), (_, s1) = state.terms
    return 0 if s0 == s1 else 1


def measure_hadamard_all(state: SparseState, rng: RngStream) -> BitString:
    """Apply ``H`` to every qubit and measure in the computational basis.

    One term: the outcome is uniform. Two terms ``|x0> + (-1)^d0 |x1>``: the
    outcome is uniform on ``{d : <d, x0 ^ x1> = d0}``. It is sampled by
    drawing all bits uniformly and then fixing the leftmost coordinate where
    ``x0`` and ``x1`` differ.
    """
    n = state.n_qubits
    if state.k == 1:
        return rng.bits(n)
    if state.k != 2:
        raise UnsupportedTermCount(f"{state.k}-term state; use the dense backend")
    delta = state.terms[0][0].value ^ state.terms[1][0].value
    d = rng.randbits(n)
    if ((d & delta).bit_count() & 1) != _relative_phase(state):
        d ^= 1 << (delta.bit_length() - 1)
    return BitString(d, n)


def _parity_table(n: int, mask: int) -> np.ndarray:
    """Parity of ``d & mask`` for every ``d`` in ``[0, 2^n)``."""
    d = np.arange(1 << n, dtype=np.uint32) & np.uint32(mask)
    parity = np.zeros(1 << n, dtype=np.uint8)
    while d.any():
        parity ^= (d & 1).astype(np.uint8)
        d >>= 1
    return parity


def hadamard_law(state: SparseState) -> np.ndarray:
    """Exact outcome distribution of :func:`measure_hadamard_all` as a ``2^n`` table."""
    n = state.n_qubits
    if n > N_DENSE_MAX:
        raise TooManyQubits(f"{n} > {N_DENSE_MAX}")
    if state.k == 1:
        return np.full(1 << n, 2.0 ** -n)
    if state.k != 2:
        raise UnsupportedTermCount(f"{state.k}-term state; use the dense backend")
    delta = state.terms[0][0].value ^ state.terms[1][0].value
    hit = _parity_table(n, delta) == _relative_phase(state)
    return np.where(hit, 2.0 ** -(n - 1), 0.0)


# ---------------------------------------------------------------------------
# dense oracle
# ---------------------------------------------------------------------------

def dense_from_sparse(state: SparseState) -> DenseState:
    n = state.n_qubits
    if n > N_DENSE_MAX:
        raise TooManyQubits(f"{n} > {N_DENSE_MAX}")
    amps = np.zeros(1 << n)
    norm = 1.0 / np.sqrt(state.k)
    for b, s in state.terms:
        amps[b.value] = s * norm
    return DenseState(n, amps)


def walsh_hadamard(vec: np.ndarray) -> np.ndarray:
    """Normalised fast Walsh-Hadamard transform, i.e. ``H^{(x) n} vec``."""
    a = np.array(vec, dtype=float)
    n = a.size.bit_length() - 1
    h = 1
    while h < a.size:
        a = a.reshape(-1, 2, h)
        a = np.stack((a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]), axis=1).reshape(-1)
        h *= 2
    return a / np.sqrt(2.0) ** n


def dense_hadamard_distribution(state: DenseState) -> np.ndarray:
    if state.n_qubits > N_DENSE_MAX:
        raise TooManyQubits(f"{state.n_qubits} > {N_DENSE_MAX}")
    return walsh_hadamard(state.amplitudes) ** 2


def dense_project(state: DenseState, pred: BasisPredicate) -> tuple[float, DenseState | None]:
    """Born-rule accept probability of ``{Pi, Id - Pi}`` and the normalised post-state."""
    n = state.n_qubits
    mask = np.array([pred(BitString(x, n)) for x in range(1 << n)], dtype=bool)
    kept = np.where(mask, state.amplitudes, 0.0)
    p = float(np.dot(kept, kept))
    if p == 0.0:
        return 0.0, None
    return p, DenseState(n, kept / np.sqrt(p))
