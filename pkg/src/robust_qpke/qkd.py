"""Two-message key distribution built on the everlasting QPKE.

Alice sends ``N = 4 lam + s(4 lam)`` public keys. Bob picks a ``4 lam``-bit
string ``k``, signs it with a fresh one-time key, and encrypts the bits of
``k`` followed by the bits of the signature, one bit per public key. His
reply is purely classical. Both sides output ``Hash(k)`` for a Toeplitz hash
that Bob samples and sends along.

Bob's random stream is consumed in this order: ``k``, the hash seed, the OTS
coins, then the encryptions in instance order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .bits import BitString
from .errors import (
    ABORT, BLOCKED, REJECT, AbortCiphertext, Bottom, DimensionMismatch,
)
from .ots import OtsParams, OtsSignature, OtsVerifyKey, sgen, sign, ver
from .primitives import DEFAULT_ROUNDS, RngStream, ToeplitzHash, hash_eval, hash_sample
from .qpke import (
    EvCiphertext, EvPk, EvSecretKey, QpkeParams, ev_dec, ev_enc, ev_pkgen, ev_skgen,
)
from .qsim import SparseState


@dataclass(frozen=True)
class QkdParams:
    lam: int
    preimage_bits: int = 8
    owf_rounds: int = DEFAULT_ROUNDS
    coin_bits: int = 32

    @property
    def key_bits(self) -> int:
        return 4 * self.lam

    @cached_property
    def ots_key_params(self) -> OtsParams:
        return OtsParams(self.key_bits, self.preimage_bits, self.coin_bits, self.owf_rounds)

    @property
    def signature_bits(self) -> int:
        return self.ots_key_params.signature_bits

    @property
    def n_instances(self) -> int:
        return self.key_bits + self.signature_bits

    @cached_property
    def instance_params(self) -> QpkeParams:
        return QpkeParams(self.coin_bits, self.preimage_bits, self.owf_rounds)

    def signature_index(self, j: int) -> int:
        """Instance carrying signature bit ``j`` (0-based)."""
        return self.key_bits + j


@dataclass(frozen=True)
class FirstMessage:
    msg: tuple[EvPk, ...]
    mu: tuple[SparseState, ...]

    def __post_init__(self):
        if len(self.msg) != len(self.mu):
            raise DimensionMismatch("one quantum register per public key is required")


@dataclass(frozen=True)
class AliceState:
    st: tuple[EvSecretKey, ...]


@dataclass(frozen=True)
class Response:
    hash: ToeplitzHash
    vk: OtsVerifyKey
    cts: tuple[EvCiphertext, ...]


def qkd_first(params: QkdParams, rng: RngStream) -> tuple[FirstMessage, AliceState]:
    iparams = params.instance_params
    sks = [ev_skgen(iparams, rng) for _ in range(params.n_instances)]
    pks = [ev_pkgen(sk) for sk in sks]
    return FirstMessage(tuple(p.pk for p in pks), tuple(p.rho for p in pks)), AliceState(tuple(sks))


def qkd_second(msg, mu, params: QkdParams, rng: RngStream):
    """Bob's step. Returns ``(Response, K)`` or :data:`REJECT` if any encryption aborts."""
    n = params.n_instances
    if len(msg) != n or len(mu) != n:
        raise DimensionMismatch(f"expected {n} public keys and registers")
    k = rng.bits(params.key_bits)
    h = hash_sample(rng, params.lam)
    vk, zk = sgen(params.ots_key_params, rng.bits(params.coin_bits))
    sigma = sign(zk, k)
    payload = k.concat(sigma.bits)
    cts = []
    for i, b in enumerate(payload):
        ct = ev_enc(mu[i], msg[i], b, rng)
        if ct is ABORT:
            return REJECT
        cts.append(ct)
    return Response(h, vk, tuple(cts)), hash_eval(h, k)


def qkd_decode(st: AliceState, resp, params: QkdParams):
    """Alice's step. A blocked or missing response decodes to :data:`REJECT`."""
    if resp is None or resp is BLOCKED or isinstance(resp, Bottom):
        return REJECT
    n = params.n_instances
    if len(resp.cts) != n or len(st.st) != n:
        raise DimensionMismatch(f"expected {n} ciphertexts and secret keys")
    try:
        bits = [ev_dec(sk, ct) for sk, ct in zip(st.st, resp.cts)]
    except AbortCiphertext:
        return REJECT
    kb = params.key_bits
    k = BitString.from_bits(bits[:kb])
    sigma = OtsSignature.from_bits(params.ots_key_params, BitString.from_bits(bits[kb:]))
    if resp.vk.params != params.ots_key_params or not ver(resp.vk, k, sigma):
        return REJECT
    return hash_eval(resp.hash, k)


def run_session(params: QkdParams, rng: RngStream):
    """One honest session; returns ``(K_alice, K_bob)``."""
    first, st = qkd_first(params, rng)
    out = qkd_second(first.msg, first.mu, params, rng)
    if out is REJECT:
        return REJECT, REJECT
    resp, k_bob = out
    return qkd_decode(st, resp, params), k_bob
