"""Lamport one-time signatures over the toy one-way function.

Keys are derived deterministically from a short coin string, so the same
coins always give the same key pair. The computational QPKE scheme relies on
this to re-derive signing keys from a PRF output at decryption time.

Plain Lamport is strongly unforgeable only while the one-way function has no
second preimages on the searched space. The OWF here maps ``preimage_bits``
to ``preimage_bits`` bits, so second preimages exist but are rare, and the
forgery experiments measure that rate rather than assume it away.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

from .bits import BitString, concat_all
from .errors import CoinLengthMismatch, FormatError, LengthMismatch
from .primitives import DEFAULT_ROUNDS, OwfParams, expand, owf_int
from .qsim import BasisPredicate


@lru_cache(maxsize=None)
def _shared_owf(preimage_bits: int, rounds: int) -> OwfParams:
    # one instance per width so the evaluation cache is shared between keys
    return OwfParams(preimage_bits, preimage_bits, round_count=rounds)


@dataclass(frozen=True)
class OtsParams:
    message_bits: int
    preimage_bits: int
    coin_bits: int = 32
    owf_rounds: int = DEFAULT_ROUNDS

    def __post_init__(self):
        if min(self.message_bits, self.preimage_bits, self.coin_bits) < 1:
            raise ValueError("OTS dimensions must be positive")

    @cached_property
    def owf(self) -> OwfParams:
        return _shared_owf(self.preimage_bits, self.owf_rounds)

    @property
    def signature_bits(self) -> int:
        """``s(message_bits)``: the length of a concatenated signature."""
        return self.message_bits * self.preimage_bits

    def header(self) -> str:
        return f"ots m={self.message_bits} p={self.preimage_bits} c={self.coin_bits} r={self.owf_rounds}"

    @classmethod
    def from_header(cls, text: str) -> OtsParams:
        parts = text.split()
        try:
            if parts[0] != "ots":
                raise ValueError
            f = dict(p.split("=", 1) for p in parts[1:])
            return cls(int(f["m"]), int(f["p"]), int(f["c"]), int(f["r"]))
        except (ValueError, KeyError, IndexError):
            raise FormatError(f"bad OTS header {text!r}") from None


@dataclass(frozen=True)
class OtsSigningKey:
    params: OtsParams
    preimages: tuple[tuple[BitString, ...], tuple[BitString, ...]]


@dataclass(frozen=True)
class OtsVerifyKey:
    params: OtsParams
    images: tuple[tuple[BitString, ...], tuple[BitString, ...]]

    def to_hex(self) -> str:
        """Params header, then all images (message-0 slots first) as one hex string."""
        flat = concat_all(self.images[0] + self.images[1])
        return f"{self.params.header()} {flat.to_hex()}"

    @classmethod
    def from_hex(cls, text: str) -> OtsVerifyKey:
        head, _, body = text.rpartition(" ")
        params = OtsParams.from_header(head)
        m, p = params.message_bits, params.preimage_bits
        flat = BitString.from_hex(body, 2 * m * p).split(p)
        return cls(params, (tuple(flat[:m]), tuple(flat[m:])))


@dataclass(frozen=True)
class OtsSignature:
    revealed: tuple[BitString, ...]

    @cached_property
    def bits(self) -> BitString:
        """Revealed preimages concatenated, slot 0 leftmost."""
        return concat_all(self.revealed)

    @classmethod
    def from_bits(cls, params: OtsParams, bits: BitString) -> OtsSignature:
        if bits.length != params.signature_bits:
            raise LengthMismatch(f"signature must have {params.signature_bits} bits")
        return cls(tuple(bits.split(params.preimage_bits)))

    def to_hex(self) -> str:
        return self.bits.to_hex()


def sgen(params: OtsParams, coins: BitString) -> tuple[OtsVerifyKey, OtsSigningKey]:
    """Derandomised key generation.

    The coins are stretched to ``2 * message_bits`` preimages; preimage
    ``(b, i)`` is the ``(2 i + b)``-th ``preimage_bits``-wide block.
    """
    if coins.length != params.coin_bits:
        raise CoinLengthMismatch(f"expected {params.coin_bits} coin bits, got {coins.length}")
    p = params.preimage_bits
    m = params.message_bits
    stream = expand(coins, 2 * m * p, params.owf_rounds).value
    mask = (1 << p) - 1
    owf = params.owf
    raw = BitString.raw
    pre0, pre1, img0, img1 = [], [], [], []
    shift = 2 * m * p
    for i in range(m):
        shift -= p
        x0 = (stream >> shift) & mask
        shift -= p
        x1 = (stream >> shift) & mask
        pre0.append(raw(x0, p))
        pre1.append(raw(x1, p))
        img0.append(raw(owf_int(owf, x0), p))
        img1.append(raw(owf_int(owf, x1), p))
    pre = (tuple(pre0), tuple(pre1))
    img = (tuple(img0), tuple(img1))
    return OtsVerifyKey(params, img), OtsSigningKey(params, pre)


def sign(sk: OtsSigningKey, m: BitString) -> OtsSignature:
    if m.length != sk.params.message_bits:
        raise LengthMismatch(f"message must have {sk.params.message_bits} bits")
    return OtsSignature(tuple(sk.preimages[b][i] for i, b in enumerate(m)))


def ver(vk: OtsVerifyKey, m: BitString, sig: OtsSignature) -> int:
    params = vk.params
    if m.length != params.message_bits or len(sig.revealed) != params.message_bits:
        raise LengthMismatch("message or signature length does not match the key")
    owf = params.owf
    for i, b in enumerate(m):
        x = sig.revealed[i]
        if x.length != params.preimage_bits:
            raise LengthMismatch("revealed preimage has the wrong width")
        if owf_int(owf, x.value) != vk.images[b][i].value:
            return 0
    return 1


def accepts_pred(vk0: OtsVerifyKey, vk1: OtsVerifyKey) -> BasisPredicate:
    """Membership test for the span of valid ``|b, sigma>`` with ``sigma`` signing ``b`` under ``vk_b``."""
    params = vk0.params
    if params != vk1.params or params.message_bits != 1:
        raise ValueError("accepts_pred needs two single-bit keys with equal params")
    p = params.preimage_bits
    owf = params.owf
    targets = (vk0.images[0][0].value, vk1.images[1][0].value)
    low = (1 << p) - 1

    def accepts(x: BitString) -> bool:
        return owf_int(owf, x.value & low) == targets[x.value >> p]

    return BasisPredicate(1 + p, accepts)


def brute_force_forge(vk: OtsVerifyKey, m: BitString, budget: int,
                      avoid: OtsSignature | None = None) -> OtsSignature | None:
    """Search preimages ``0 .. budget-1`` of every slot for a signature on ``m``.

    With ``avoid`` set, the result must differ from that signature (a strong
    forgery on an already-signed message). Returns ``None`` when the budget
    runs out.
    """
    params = vk.params
    if m.length != params.message_bits:
        raise LengthMismatch(f"message must have {params.message_bits} bits")
    p = params.preimage_bits
    owf = params.owf
    limit = min(budget, 1 << p)
    found: list[list[int]] = []
    for i, b in enumerate(m):
        target = vk.images[b][i].value
        hits = []
        for x in range(limit):
            if owf_int(owf, x) == target:
                hits.append(x)
                if avoid is None or x != avoid.revealed[i].value:
                    break
        if not hits:
            return None
        found.append(hits)
    slots = [BitString(h[-1], p) for h in found]
    sig = OtsSignature(tuple(slots))
    if avoid is not None and sig.bits == avoid.bits:
        return None
    return sig


def forgery_trial(params: OtsParams, coins: BitString, m: BitString, budget: int) -> bool:
    """One fixed-message strong-unforgeability game against the brute-force forger.

    The forger sees ``(vk, m, sign(sk, m))`` and first tries the message with
    bit 0 flipped, then a different signature on ``m`` itself. Returns whether
    it produced a valid pair different from the honest one.
    """
    vk, sk = sgen(params, coins)
    sig = sign(sk, m)
    other = m.flip(0)
    forged = brute_force_forge(vk, other, budget)
    if forged is not None and ver(vk, other, forged):
        return True
    forged = brute_force_forge(vk, m, budget, avoid=sig)
    return forged is not None and forged.bits != sig.bits and bool(ver(vk, m, forged))
