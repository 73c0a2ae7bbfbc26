"""Classical building blocks: seeded random streams, a toy one-way function,
a PRF built from the same mixing core, and a Toeplitz universal hash.

The one-way function here is a *toy*. It is a 64-bit rotate/xor/S-box
permutation with pinned round constants and no security claim whatsoever;
its only job is to make forgery and key-search cost tunable (through the
input width and ``round_count``) while staying bit-for-bit reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bits import BitString
from .errors import FormatError, LengthMismatch

MASK64 = (1 << 64) - 1
DEFAULT_ROUNDS = 6
FAMILY_RXS64 = "rxs64"

# splitmix64 outputs for seed 0, frozen as literals
_RC = (
    0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F, 0xF88BB8A8724C81EC,
    0x1B39896A51A8749B, 0x53CB9F0C747EA2EA, 0x2C829ABE1F4532E1, 0xC584133AC916AB3C,
    0x3EE5789041C98AC3, 0xF3B8488C368CB0A6, 0x657EECDD3CB13D09, 0xC2D326E0055BDEF6,
    0x8621A03FE0BBDB7B, 0x8E1F7555983AA92F, 0xB54E0F1600CC4D19, 0x84BB3F97971D80AB,
)
_SBOX4 = (0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD, 0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2)
_SBOX8 = bytes((_SBOX4[b >> 4] << 4) | _SBOX4[b & 0xF] for b in range(256))

# domain separation tags xored into the initial state
_IV_OWF = 0x243F6A8885A308D3
_IV_PRF = 0x13198A2E03707344
_IV_KEY = 0xA4093822299F31D0
_IV_EXPAND = 0x082EFA98EC4E6C89


def _rotl(x: int, r: int) -> int:
    return ((x << r) | (x >> (64 - r))) & MASK64


def mix(state: int, rounds: int, key: int = 0) -> int:
    """The pinned 64-bit round function applied ``rounds`` times.

    Each round: xor in ``key`` and a round constant, substitute every nibble
    through a 4-bit S-box, then ``x ^= rotl(x, 19) ^ rotl(x, 43)``.
    """
    for r in range(rounds):
        state ^= key ^ _RC[r & 15]
        state = int.from_bytes(state.to_bytes(8, "big").translate(_SBOX8), "big")
        state ^= (((state << 19) | (state >> 45)) ^ ((state << 43) | (state >> 21))) & MASK64
    return state


def _absorb(state: int, x: BitString, rounds: int, key: int) -> int:
    pad = -x.length % 32
    v = x.value << pad
    nblocks = (x.length + pad) // 32
    for i in range(nblocks - 1, -1, -1):
        state = mix(state ^ ((v >> (32 * i)) & 0xFFFFFFFF), rounds, key)
    return state


def _squeeze(state: int, nbits: int, rounds: int, key: int) -> int:
    out = state >> 32
    produced = 32
    counter = 1
    while produced < nbits:
        state = mix(state ^ counter, rounds, key)
        out = (out << 32) | (state >> 32)
        produced += 32
        counter += 1
    return out >> (produced - nbits)


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------

def _splitmix(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


class RngStream:
    """Counter-based random stream keyed by ``(seed, stream_id)``.

    Backed by the Philox counter generator, so the n-th 64-bit word drawn is a
    pure function of ``(seed, stream_id, n)``. Words are fetched in blocks
    and served from a local buffer; the buffer does not change which word is
    served at which index.
    """

    _BLOCK = 256

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = seed & MASK64
        self.stream_id = stream_id & MASK64
        self._gen = np.random.Philox(key=self.seed | (self.stream_id << 64))
        self._buf: list[int] = []
        self._pos = 0
        self.draws = 0

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, draws={self.draws})"

    def split(self, index: int) -> RngStream:
        """An independent child stream; deterministic in ``(seed, stream_id, index)``."""
        return RngStream(self.seed, _splitmix(self.stream_id ^ _splitmix(index + 1)))

    def word(self) -> int:
        if self._pos == len(self._buf):
            self._buf = self._gen.random_raw(self._BLOCK).tolist()
            self._pos = 0
        w = self._buf[self._pos]
        self._pos += 1
        self.draws += 1
        return w

    def randbits(self, n: int) -> int:
        if n <= 64:
            return self.word() >> (64 - n)
        out = 0
        got = 0
        while got < n:
            out = (out << 64) | self.word()
            got += 64
        return out >> (got - n)

    def bits(self, n: int) -> BitString:
        return BitString.raw(self.randbits(n), n)

    def bit(self) -> int:
        return self.word() >> 63

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection."""
        if n <= 0:
            raise ValueError("n must be positive")
        if n == 1:
            return 0
        k = (n - 1).bit_length()
        while True:
            r = self.randbits(k)
            if r < n:
                return r

    def uniform(self) -> float:
        return (self.word() >> 11) * (1.0 / (1 << 53))


# ---------------------------------------------------------------------------
# One-way function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OwfParams:
    input_bits: int
    output_bits: int
    family_id: str = FAMILY_RXS64
    round_count: int = DEFAULT_ROUNDS
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.input_bits < 1 or self.output_bits < 1:
            raise ValueError("OWF widths must be positive")
        if self.family_id != FAMILY_RXS64:
            raise ValueError(f"unknown OWF family {self.family_id!r}")
        if self.round_count < 1:
            raise ValueError("round_count must be positive")

    def _iv(self) -> int:
        return _IV_OWF ^ (self.input_bits << 40) ^ (self.output_bits << 52) ^ self.round_count


# inputs up to this width are memoised per parameter set
_CACHE_MAX_BITS = 24


def owf_eval(params: OwfParams, x: BitString) -> BitString:
    if x.length != params.input_bits:
        raise LengthMismatch(f"OWF expects {params.input_bits} bits, got {x.length}")
    return BitString.raw(owf_int(params, x.value), params.output_bits)


def owf_int(params: OwfParams, x: int) -> int:
    """:func:`owf_eval` on raw integers; the hot path for verification and search."""
    cache = params._cache
    y = cache.get(x)
    if y is None:
        y = _owf_uncached(params, x)
        if params.input_bits <= _CACHE_MAX_BITS:
            cache[x] = y
    return y


def _owf_uncached(params: OwfParams, x: int) -> int:
    rounds = params.round_count
    state = params._iv()
    if params.input_bits <= 32:
        state = mix(state ^ (x << (32 - params.input_bits)), rounds)
    else:
        state = _absorb(state, BitString(x, params.input_bits), rounds, 0)
    if params.output_bits <= 32:
        return state >> (64 - params.output_bits)
    return _squeeze(state, params.output_bits, rounds, 0)


def write_golden(path, params: OwfParams, inputs) -> None:
    """Write ``<hex input> <hex output>`` lines for ``inputs``."""
    lines = [
        f"# family={params.family_id} input_bits={params.input_bits} "
        f"output_bits={params.output_bits} rounds={params.round_count}"
    ]
    for x in inputs:
        lines.append(f"{x.to_hex()} {owf_eval(params, x).to_hex()}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_golden(path) -> tuple[OwfParams, list[tuple[BitString, BitString]]]:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("#"):
        raise FormatError("missing parameter header", "line 1")
    fields = dict(kv.split("=", 1) for kv in text[0][1:].split())
    params = OwfParams(
        int(fields["input_bits"]), int(fields["output_bits"]),
        fields["family"], int(fields["rounds"]),
    )
    pairs = []
    for lineno, line in enumerate(text[1:], start=2):
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"expected two hex fields, got {line!r}", f"line {lineno}")
        pairs.append((
            BitString.from_hex(parts[0], params.input_bits),
            BitString.from_hex(parts[1], params.output_bits),
        ))
    return params, pairs


# ---------------------------------------------------------------------------
# PRF and keyed expansion
# ---------------------------------------------------------------------------

def key_schedule(key: BitString, rounds: int = DEFAULT_ROUNDS) -> int:
    """Compress a key of any length to the 64-bit word xored into each round."""
    return _absorb(_IV_KEY ^ key.length, key, rounds, 0)


@dataclass(frozen=True)
class PrfKey:
    key: BitString

    @property
    def lam(self) -> int:
        return self.key.length


def prf_eval(key: PrfKey, x: BitString, rounds: int = DEFAULT_ROUNDS) -> BitString:
    """Keyed mixing: ``{0,1}^lam x {0,1}^lam -> {0,1}^lam``."""
    lam = key.lam
    if x.length != lam:
        raise LengthMismatch(f"PRF input must have {lam} bits, got {x.length}")
    kw = key_schedule(key.key, rounds)
    state = _absorb(_IV_PRF ^ lam, x, rounds, kw)
    return BitString(_squeeze(state, lam, rounds, kw), lam)


def expand(seed: BitString, nbits: int, rounds: int = DEFAULT_ROUNDS) -> BitString:
    """Stretch ``seed`` to ``nbits`` pseudorandom bits (unkeyed sponge: absorb, then squeeze)."""
    state = _absorb(_IV_EXPAND ^ seed.length ^ (nbits << 32), seed, rounds, 0)
    return BitString.raw(_squeeze(state, nbits, rounds, 0), nbits)


# ---------------------------------------------------------------------------
# Toeplitz universal hash
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ToeplitzHash:
    """GF(2) Toeplitz matrix from ``{0,1}^(4 lam)`` to ``{0,1}^lam``.

    Entry ``(i, j)`` is ``diagonal_seed[input_bits - 1 + i - j]``, so the seed
    lists the matrix diagonals from the top-right corner to the bottom-left.
    """

    lam: int
    diagonal_seed: BitString
    _rows: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.lam < 1:
            raise ValueError("lam must be positive")
        if self.diagonal_seed.length != self.input_bits + self.lam - 1:
            raise LengthMismatch(
                f"Toeplitz seed must have {self.input_bits + self.lam - 1} bits, "
                f"got {self.diagonal_seed.length}"
            )
        n = self.input_bits
        seed = str(self.diagonal_seed)
        # row i, column j (column 0 = most significant bit of the input)
        rows = tuple(int(seed[i:i + n][::-1], 2) for i in range(self.lam))
        object.__setattr__(self, "_rows", rows)

    @property
    def input_bits(self) -> int:
        return 4 * self.lam

    @property
    def output_bits(self) -> int:
        return self.lam

    def matrix(self) -> np.ndarray:
        n = self.input_bits
        return np.array(
            [[(row >> (n - 1 - j)) & 1 for j in range(n)] for row in self._rows],
            dtype=np.uint8,
        )

    def to_text(self) -> str:
        return f"toeplitz l={self.lam} {self.diagonal_seed.to_hex()}"

    @classmethod
    def from_text(cls, text: str) -> ToeplitzHash:
        parts = text.split()
        if len(parts) != 3 or parts[0] != "toeplitz" or not parts[1].startswith("l="):
            raise FormatError(f"not a Toeplitz hash descriptor: {text!r}")
        lam = int(parts[1][2:])
        return cls(lam, BitString.from_hex(parts[2], 5 * lam - 1))


def hash_sample(rng: RngStream, lam: int) -> ToeplitzHash:
    return ToeplitzHash(lam, rng.bits(5 * lam - 1))


def hash_eval(h: ToeplitzHash, x: BitString) -> BitString:
    if x.length != h.input_bits:
        raise LengthMismatch(f"hash input must have {h.input_bits} bits, got {x.length}")
    v = x.value
    out = 0
    for row in h._rows:
        out = (out << 1) | ((row & v).bit_count() & 1)
    return BitString(out, h.lam)


def hash_eval_many(seeds: np.ndarray, xs: np.ndarray, lam: int) -> np.ndarray:
    """Vectorised Toeplitz hashing, one seed per input row.

    ``seeds`` is a ``(T, 5 lam - 1)`` 0/1 array of diagonal seeds, ``xs`` a
    ``(T, 4 lam)`` 0/1 array of inputs; returns the ``(T, lam)`` outputs.
    Agrees with :func:`hash_eval` row by row.
    """
    n = 4 * lam
    seeds = np.asarray(seeds, dtype=np.uint8)
    xs = np.asarray(xs, dtype=np.uint8)
    if seeds.shape[1] != n + lam - 1 or xs.shape[1] != n:
        raise LengthMismatch("seed/input widths do not match lam")
    windows = np.lib.stride_tricks.sliding_window_view(seeds, n, axis=1)  # (T, lam, n)
    # entry (i, j) = seed[n - 1 + i - j] = windows[i][n - 1 - j]
    mats = windows[:, :, ::-1]
    return (np.einsum("tij,tj->ti", mats, xs, dtype=np.int64) & 1).astype(np.uint8)
