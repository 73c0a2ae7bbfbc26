"""Fixed-length bit strings over GF(2).

Bit 0 is the leftmost symbol as written in a ket, which is also the most
significant bit of the integer ``value``. So ``BitString.from_str("100")`` has
``value == 4`` and ``bs[0] == 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import FormatError, LengthMismatch

_set = object.__setattr__


@dataclass(frozen=True, slots=True)
class BitString:
    """Immutable GF(2) vector of ``length`` bits packed into an int."""

    value: int
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("a BitString needs at least one bit")
        if not 0 <= self.value < (1 << self.length):
            raise ValueError(f"value {self.value} does not fit in {self.length} bits")

    # -- constructors ---------------------------------------------------
    @classmethod
    def raw(cls, value: int, length: int) -> BitString:
        """Unchecked constructor for internal hot paths; the caller guarantees the invariants."""
        obj = object.__new__(cls)
        _set(obj, "value", value)
        _set(obj, "length", length)
        return obj

    @classmethod
    def from_str(cls, text: str) -> BitString:
        if not text or any(c not in "01" for c in text):
            raise FormatError(f"not a bit string: {text!r}")
        return cls(int(text, 2), len(text))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> BitString:
        value = 0
        n = 0
        for b in bits:
            if b not in (0, 1):
                raise ValueError(f"bit values must be 0 or 1, got {b!r}")
            value = (value << 1) | b
            n += 1
        return cls(value, n)

    @classmethod
    def zeros(cls, length: int) -> BitString:
        return cls(0, length)

    @classmethod
    def from_hex(cls, text: str, length: int) -> BitString:
        try:
            value = int(text, 16)
        except ValueError:
            raise FormatError(f"not a hex string: {text!r}") from None
        if value >> length:
            raise FormatError(f"hex {text!r} does not fit in {length} bits")
        return cls(value, length)

    # -- access ---------------------------------------------------------
    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if not -self.length <= i < self.length:
            raise IndexError(i)
        if i < 0:
            i += self.length
        return (self.value >> (self.length - 1 - i)) & 1

    def __iter__(self) -> Iterator[int]:
        n = self.length
        v = self.value
        return ((v >> (n - 1 - i)) & 1 for i in range(n))

    def __str__(self) -> str:
        return format(self.value, f"0{self.length}b")

    def to_hex(self) -> str:
        return format(self.value, f"0{(self.length + 3) // 4}x")

    def weight(self) -> int:
        return self.value.bit_count()

    # -- algebra --------------------------------------------------------
    def _check(self, other: BitString):
        if self.length != other.length:
            raise LengthMismatch(f"lengths differ: {self.length} vs {other.length}")

    def __xor__(self, other: BitString) -> BitString:
        self._check(other)
        return BitString.raw(self.value ^ other.value, self.length)

    def __and__(self, other: BitString) -> BitString:
        self._check(other)
        return BitString.raw(self.value & other.value, self.length)

    def dot(self, other: BitString) -> int:
        """Inner product mod 2."""
        self._check(other)
        return (self.value & other.value).bit_count() & 1

    def flip(self, i: int) -> BitString:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return BitString(self.value ^ (1 << (self.length - 1 - i)), self.length)

    def concat(self, other: BitString) -> BitString:
        return BitString.raw((self.value << other.length) | other.value, self.length + other.length)

    def __add__(self, other: BitString) -> BitString:
        return self.concat(other)

    def slice(self, start: int, stop: int) -> BitString:
        if not 0 <= start < stop <= self.length:
            raise IndexError((start, stop))
        width = stop - start
        return BitString.raw((self.value >> (self.length - stop)) & ((1 << width) - 1), width)

    def split(self, width: int) -> list[BitString]:
        """Cut into consecutive chunks of ``width`` bits, leftmost first."""
        if self.length % width:
            raise LengthMismatch(f"{self.length} bits do not split into {width}-bit chunks")
        return [self.slice(i, i + width) for i in range(0, self.length, width)]


def concat_all(parts: Iterable[BitString]) -> BitString:
    value = 0
    n = 0
    for p in parts:
        value = (value << p.length) | p.value
        n += p.length
    return BitString.raw(value, n)


def bit(b: int, length: int = 1) -> BitString:
    """Shorthand for a short literal, e.g. ``bit(1)`` is the one-bit string ``1``."""
    return BitString(b, length)
