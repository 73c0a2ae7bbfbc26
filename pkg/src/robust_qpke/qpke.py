"""Quantum public-key encryption robust to tampering with the quantum key.

Two one-bit schemes share the same public-key state
``(|0, sigma0> + (-1)^d0 |1, sigma1>) / sqrt(2)``, where ``sigma_b`` is a
one-time signature on ``b`` under ``vk_b``:

* the everlasting scheme encrypts by a Hadamard measurement of the verified
  register and a classical one-time pad;
* the computational scheme derives its signing keys from a PRF and encrypts
  by a ``Z^m`` phase on qubit 0, so its ciphertext is a quantum state.

Both encryptors first project onto valid message/signature strings and return
:data:`ABORT` when that check fails.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .bits import BitString, bit
from .errors import (
    ABORT, AbortCiphertext, Bottom, DimensionMismatch, FormatError, SupportMismatch,
)
from .ots import OtsParams, OtsSignature, OtsVerifyKey, accepts_pred, sgen, sign
from .primitives import DEFAULT_ROUNDS, PrfKey, RngStream, prf_eval
from .qsim import (
    Outcome, SparseState, apply_z_phase, hadamard_law, measure_hadamard_all,
    project, superpose2,
)
from .stats import DistTable


@dataclass(frozen=True)
class QpkeParams:
    """``lam`` is the coin length of each OTS key (and the PRF key length)."""

    lam: int = 32
    preimage_bits: int = 8
    owf_rounds: int = DEFAULT_ROUNDS

    @cached_property
    def ots(self) -> OtsParams:
        return OtsParams(1, self.preimage_bits, self.lam, self.owf_rounds)

    @property
    def s1(self) -> int:
        return self.preimage_bits

    @property
    def n_qubits(self) -> int:
        return 1 + self.preimage_bits


def _check_register(rho: SparseState, params: QpkeParams):
    if rho.n_qubits != params.n_qubits:
        raise DimensionMismatch(f"public-key register has {rho.n_qubits} qubits, "
                                f"expected {params.n_qubits}")


def _signed_strings(sigma0: OtsSignature, sigma1: OtsSignature) -> tuple[BitString, BitString]:
    return bit(0).concat(sigma0.bits), bit(1).concat(sigma1.bits)


# ---------------------------------------------------------------------------
# everlasting scheme
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvSecretKey:
    vk0: OtsVerifyKey
    vk1: OtsVerifyKey
    sigma0: OtsSignature
    sigma1: OtsSignature
    d0: int

    @cached_property
    def sigma_xor(self) -> BitString:
        return self.sigma0.bits ^ self.sigma1.bits


@dataclass(frozen=True)
class EvPk:
    """Classical part of an everlasting public key."""

    vk0: OtsVerifyKey
    vk1: OtsVerifyKey

    @cached_property
    def predicate(self):
        return accepts_pred(self.vk0, self.vk1)

    def to_text(self) -> str:
        return f"{self.vk0.to_hex()}|{self.vk1.to_hex()}"

    @classmethod
    def from_text(cls, text: str) -> EvPk:
        a, sep, b = text.partition("|")
        if not sep:
            raise FormatError(f"not an everlasting public key: {text[:40]!r}")
        return cls(OtsVerifyKey.from_hex(a), OtsVerifyKey.from_hex(b))


@dataclass(frozen=True)
class EvPublicKey:
    rho: SparseState
    pk: EvPk


@dataclass(frozen=True)
class EvCiphertext:
    ct1: int
    ct2: BitString

    def to_text(self) -> str:
        return f"EV {self.ct1} {self.ct2.to_hex()}"

    @classmethod
    def from_text(cls, text: str, s1: int):
        parts = text.split()
        if parts == ["ABORT"]:
            return ABORT
        if len(parts) != 3 or parts[0] != "EV" or parts[1] not in ("0", "1"):
            raise FormatError(f"not an everlasting ciphertext: {text!r}")
        return cls(int(parts[1]), BitString.from_hex(parts[2], s1))


def ev_skgen_from_coins(params: QpkeParams, c0: BitString, c1: BitString, d0: int) -> EvSecretKey:
    vk0, sk0 = sgen(params.ots, c0)
    vk1, sk1 = sgen(params.ots, c1)
    return EvSecretKey(vk0, vk1, sign(sk0, bit(0)), sign(sk1, bit(1)), d0)


def ev_skgen(params: QpkeParams, rng: RngStream) -> EvSecretKey:
    """Draws coins for ``vk0``, coins for ``vk1``, then ``d0``, in that order."""
    c0 = rng.bits(params.lam)
    c1 = rng.bits(params.lam)
    return ev_skgen_from_coins(params, c0, c1, rng.bit())


def ev_pkgen(sk: EvSecretKey) -> EvPublicKey:
    x0, x1 = _signed_strings(sk.sigma0, sk.sigma1)
    return EvPublicKey(superpose2(x0, x1, sk.d0), EvPk(sk.vk0, sk.vk1))


def ev_enc(rho: SparseState, pk: EvPk, m: int, rng: RngStream, params: QpkeParams | None = None):
    if params is not None:
        _check_register(rho, params)
    pred = pk.predicate
    if rho.n_qubits != pred.length:
        raise DimensionMismatch(f"register of {rho.n_qubits} qubits for a {pred.length}-qubit key")
    outcome, post = project(rho, pred, rng)
    if outcome is Outcome.REJECT:
        return ABORT
    d = measure_hadamard_all(post, rng)
    s1 = d.length - 1
    return EvCiphertext(m ^ (d.value >> s1), BitString(d.value & ((1 << s1) - 1), s1))


def ev_dec(sk: EvSecretKey, ct) -> int:
    if isinstance(ct, Bottom):
        raise AbortCiphertext("cannot decrypt an aborted ciphertext")
    return sk.d0 ^ ct.ct1 ^ ct.ct2.dot(sk.sigma_xor)


def parity_holds(sk: EvSecretKey, ct: EvCiphertext, m: int) -> bool:
    """The Hadamard outcome of an honest key satisfies ``d1 ^ <d2, sigma0 ^ sigma1> = d0``."""
    return (ct.ct1 ^ m ^ ct.ct2.dot(sk.sigma_xor)) == sk.d0


def ev_ciphertext_law(rho: SparseState, pk: EvPk, m: int) -> DistTable:
    """Exact distribution of :func:`ev_enc` output on ``rho``.

    Labels are ``"ABORT"`` and ``(ct1, ct2_int)`` for every ciphertext.
    """
    pred = pk.predicate
    n = rho.n_qubits
    s1 = n - 1
    kept = tuple(t for t in rho.terms if pred(t[0]))
    p_acc = len(kept) / rho.k
    probs = np.zeros(1 << n)
    if kept:
        post = SparseState(n, kept, rho.max_terms)
        law = hadamard_law(post)
        # relabel d -> (m ^ d1, d2): flipping the top bit when m = 1
        idx = np.arange(1 << n) ^ (m << s1)
        probs[idx] = p_acc * law
    labels = [(x >> s1, x & ((1 << s1) - 1)) for x in range(1 << n)] + ["ABORT"]
    return DistTable.from_probs(dict(zip(labels, list(probs) + [1.0 - p_acc])))


# ---------------------------------------------------------------------------
# computational scheme
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompSecretKey:
    k: PrfKey


@dataclass(frozen=True)
class CompPk:
    vk0: OtsVerifyKey
    vk1: OtsVerifyKey
    r0: BitString
    r1: BitString

    @cached_property
    def predicate(self):
        return accepts_pred(self.vk0, self.vk1)

    def to_text(self) -> str:
        return f"{self.vk0.to_hex()}|{self.vk1.to_hex()}|{self.r0.to_hex()}|{self.r1.to_hex()}"


@dataclass(frozen=True)
class CompPublicKey:
    rho: SparseState
    pk: CompPk


@dataclass(frozen=True)
class CompCiphertext:
    quantum: SparseState
    r0: BitString
    r1: BitString

    def to_text(self) -> str:
        return f"COMP\n{self.quantum.to_text()}\n{self.r0.to_hex()} {self.r1.to_hex()}"

    @classmethod
    def from_text(cls, text: str, lam: int):
        lines = text.strip().splitlines()
        if lines == ["ABORT"]:
            return ABORT
        if len(lines) < 3 or lines[0] != "COMP":
            raise FormatError("not a computational ciphertext")
        tail = lines[-1].split()
        if len(tail) != 2:
            raise FormatError("missing r0/r1 line", f"line {len(lines)}")
        state = SparseState.from_text("\n".join(lines[1:-1]))
        return cls(state, BitString.from_hex(tail[0], lam), BitString.from_hex(tail[1], lam))


def comp_skgen(params: QpkeParams, rng: RngStream) -> CompSecretKey:
    return CompSecretKey(PrfKey(rng.bits(params.lam)))


def _comp_signatures(sk: CompSecretKey, r0: BitString, r1: BitString, params: QpkeParams):
    rounds = params.owf_rounds
    vk0, sk0 = sgen(params.ots, prf_eval(sk.k, r0, rounds))
    vk1, sk1 = sgen(params.ots, prf_eval(sk.k, r1, rounds))
    return vk0, vk1, sign(sk0, bit(0)), sign(sk1, bit(1))


def comp_pkgen_from_coins(sk: CompSecretKey, r0: BitString, r1: BitString,
                          params: QpkeParams) -> CompPublicKey:
    vk0, vk1, sigma0, sigma1 = _comp_signatures(sk, r0, r1, params)
    x0, x1 = _signed_strings(sigma0, sigma1)
    return CompPublicKey(superpose2(x0, x1, 0), CompPk(vk0, vk1, r0, r1))


def comp_pkgen(sk: CompSecretKey, rng: RngStream, params: QpkeParams) -> CompPublicKey:
    """Fresh ``(r0, r1)`` per call, so one secret key yields many public keys."""
    r0 = rng.bits(params.lam)
    r1 = rng.bits(params.lam)
    return comp_pkgen_from_coins(sk, r0, r1, params)


def comp_enc(rho: SparseState, pk: CompPk, m: int, rng: RngStream):
    pred = pk.predicate
    if rho.n_qubits != pred.length:
        raise DimensionMismatch(f"register of {rho.n_qubits} qubits for a {pred.length}-qubit key")
    outcome, post = project(rho, pred, rng)
    if outcome is Outcome.REJECT:
        return ABORT
    return CompCiphertext(apply_z_phase(post, 0, m), pk.r0, pk.r1)


def comp_plus_probability(sk: CompSecretKey, ct: CompCiphertext, params: QpkeParams) -> float:
    """Probability that decryption returns 0 (the ``+`` outcome).

    Raises :class:`SupportMismatch` if the state has weight outside
    ``{|0, sigma0>, |1, sigma1>}``, the third outcome of the decryption
    measurement.
    """
    _, _, sigma0, sigma1 = _comp_signatures(sk, ct.r0, ct.r1, params)
    x0, x1 = _signed_strings(sigma0, sigma1)
    state = ct.quantum
    signs = {}
    for b, s in state.terms:
        if b != x0 and b != x1:
            raise SupportMismatch(f"basis string {b} lies outside the signature span")
        signs[b] = s
    # <+|psi> = (s_x0 + s_x1) / sqrt(2 k)
    overlap = (signs.get(x0, 0) + signs.get(x1, 0)) ** 2 / (2 * state.k)
    return overlap


def comp_dec(sk: CompSecretKey, ct, params: QpkeParams, rng: RngStream | None = None) -> int:
    """Measure in ``{(|0,sigma0> +- |1,sigma1>)/sqrt 2}``; ``+`` decodes to 0.

    ``rng`` is needed only when the outcome is not deterministic.
    """
    if isinstance(ct, Bottom):
        raise AbortCiphertext("cannot decrypt an aborted ciphertext")
    p_plus = comp_plus_probability(sk, ct, params)
    if p_plus == 1.0:
        return 0
    if p_plus == 0.0:
        return 1
    if rng is None:
        raise ValueError("a random stream is required for a non-deterministic outcome")
    return 0 if rng.uniform() < p_plus else 1


# ---------------------------------------------------------------------------
# bit-by-bit extension
# ---------------------------------------------------------------------------

def multibit_enc(public_keys, m: BitString, rng: RngStream):
    """Encrypt bit ``i`` of ``m`` under ``public_keys[i]``; any abort aborts the whole."""
    if len(public_keys) != m.length:
        raise DimensionMismatch(f"{len(public_keys)} keys for a {m.length}-bit message")
    cts = []
    for key, b in zip(public_keys, m):
        if isinstance(key, EvPublicKey):
            ct = ev_enc(key.rho, key.pk, b, rng)
        else:
            ct = comp_enc(key.rho, key.pk, b, rng)
        if ct is ABORT:
            return ABORT
        cts.append(ct)
    return cts


def multibit_dec(secret_keys, cts, params: QpkeParams | None = None,
                 rng: RngStream | None = None) -> BitString:
    if cts is ABORT:
        raise AbortCiphertext("cannot decrypt an aborted ciphertext")
    if len(secret_keys) != len(cts):
        raise DimensionMismatch("one secret key per ciphertext is required")
    out = []
    for sk, ct in zip(secret_keys, cts):
        if isinstance(sk, EvSecretKey):
            out.append(ev_dec(sk, ct))
        else:
            out.append(comp_dec(sk, ct, params, rng))
    return BitString.from_bits(out)
