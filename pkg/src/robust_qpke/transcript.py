"""Length-prefixed wire frames for QKD messages and experiment records.

Every frame is a 4-byte big-endian payload length followed by the UTF-8
payload. A protocol message is a header frame and its body frames:

* first message: ``FIRST <N>``, then ``N`` public-key frames, then ``N``
  state frames;
* response: ``RESPONSE <N>``, hash seed, verification key, ``N`` ciphertext
  frames, then an empty frame reserved for a quantum response (always empty
  here);
* a dropped response is the single frame ``BLOCKED``.

Parse errors carry the index and role of the frame where parsing stopped.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

from .errors import BLOCKED, REJECT, Bottom, FormatError
from .ots import OtsVerifyKey
from .primitives import RngStream, ToeplitzHash
from .qkd import FirstMessage, QkdParams, Response, qkd_decode, qkd_first, qkd_second
from .qpke import EvCiphertext, EvPk
from .qsim import SparseState

_LEN = struct.Struct(">I")


def pack_frames(payloads) -> bytes:
    out = bytearray()
    for p in payloads:
        data = p.encode() if isinstance(p, str) else bytes(p)
        out += _LEN.pack(len(data))
        out += data
    return bytes(out)


class FrameReader:
    """Sequential frame cursor that names frames in its errors."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0
        self.index = 0

    def at_end(self) -> bool:
        return self.pos == len(self.data)

    def next(self, role: str) -> str:
        where = f"frame {self.index} ({role})"
        if self.pos + _LEN.size > len(self.data):
            raise FormatError("truncated length prefix", where)
        (n,) = _LEN.unpack_from(self.data, self.pos)
        start = self.pos + _LEN.size
        if start + n > len(self.data):
            raise FormatError(f"payload of {n} bytes truncated to {len(self.data) - start}", where)
        self.pos = start + n
        self.index += 1
        try:
            return self.data[start:self.pos].decode()
        except UnicodeDecodeError:
            raise FormatError("payload is not UTF-8", where) from None

    def parse(self, role: str, fn):
        """Read one frame and convert it, re-raising errors with the frame position."""
        index = self.index
        text = self.next(role)
        try:
            return fn(text)
        except FormatError as exc:
            raise FormatError(str(exc), f"frame {index} ({role})") from None
        except (ValueError, KeyError, IndexError) as exc:
            raise FormatError(f"cannot parse: {exc}", f"frame {index} ({role})") from None


def _count(header: str, tag: str) -> int:
    parts = header.split()
    if len(parts) != 2 or parts[0] != tag or not parts[1].isdigit():
        raise FormatError(f"expected '{tag} <N>', got {header[:40]!r}")
    return int(parts[1])


# -- first message ----------------------------------------------------------

def encode_first(first: FirstMessage) -> bytes:
    n = len(first.msg)
    return pack_frames([f"FIRST {n}"] + [pk.to_text() for pk in first.msg]
                       + [s.to_text() for s in first.mu])


def read_first(reader: FrameReader) -> FirstMessage:
    n = reader.parse("first-message header", lambda t: _count(t, "FIRST"))
    pks = tuple(reader.parse(f"pk {i}", EvPk.from_text) for i in range(n))
    mu = tuple(reader.parse(f"state {i}", SparseState.from_text) for i in range(n))
    return FirstMessage(pks, mu)


def decode_first(data: bytes) -> FirstMessage:
    reader = FrameReader(data)
    first = read_first(reader)
    if not reader.at_end():
        raise FormatError("trailing bytes after the first message", f"frame {reader.index}")
    return first


# -- response -----------------------------------------------------------------

def encode_response(resp) -> bytes:
    if resp is BLOCKED:
        return pack_frames(["BLOCKED"])
    n = len(resp.cts)
    return pack_frames([f"RESPONSE {n}", resp.hash.to_text(), resp.vk.to_hex()]
                       + [ct.to_text() for ct in resp.cts] + [""])


def read_response(reader: FrameReader, s1: int):
    head = reader.next("response header")
    if head == "BLOCKED":
        return BLOCKED
    try:
        n = _count(head, "RESPONSE")
    except FormatError as exc:
        raise FormatError(str(exc), f"frame {reader.index - 1} (response header)") from None
    h = reader.parse("hash seed", ToeplitzHash.from_text)
    vk = reader.parse("verification key", OtsVerifyKey.from_hex)
    cts = tuple(reader.parse(f"ct {i}", lambda t: _ev_ct(t, s1)) for i in range(n))
    eta = reader.next("quantum response")
    if eta:
        raise FormatError("quantum response frame must be empty", f"frame {reader.index - 1}")
    return Response(h, vk, cts)


def _ev_ct(text: str, s1: int) -> EvCiphertext:
    ct = EvCiphertext.from_text(text, s1)
    if not isinstance(ct, EvCiphertext):
        raise FormatError("aborted ciphertexts are never sent")
    return ct


def decode_response(data: bytes, s1: int):
    reader = FrameReader(data)
    resp = read_response(reader, s1)
    if not reader.at_end():
        raise FormatError("trailing bytes after the response", f"frame {reader.index}")
    return resp


# -- files ----------------------------------------------------------------------

def write_frames(path, payloads) -> None:
    Path(path).write_bytes(pack_frames(payloads))


def read_frames(path) -> list[str]:
    reader = FrameReader(Path(path).read_bytes())
    out = []
    while not reader.at_end():
        out.append(reader.next(f"record {len(out)}"))
    return out


def write_records(path, records) -> None:
    """One frame per :class:`~robust_qpke.adversary.ExperimentRecord`."""
    write_frames(path, [r.to_text() for r in records])


def read_records(path) -> list:
    from .adversary import ExperimentRecord

    out = []
    reader = FrameReader(Path(path).read_bytes())
    while not reader.at_end():
        out.append(reader.parse(f"record {len(out)}", ExperimentRecord.from_text))
    return out


# -- whole QKD sessions -----------------------------------------------------------

@dataclass(frozen=True)
class SessionTranscript:
    """Wire bytes of one session plus both parties' keys.

    Alice's secret state is not stored; :func:`replay_session` regenerates
    it from the seed, which is the first thing the session stream produces.
    """

    params: QkdParams
    seed: int
    first: bytes
    response: bytes
    k_bob: str
    k_alice: str


def _params_header(params: QkdParams, seed: int) -> str:
    return (f"SESSION lam={params.lam} p={params.preimage_bits} r={params.owf_rounds} "
            f"c={params.coin_bits} seed={seed}")


def record_session(params: QkdParams, seed: int) -> SessionTranscript:
    """Run one honest session from ``seed`` and keep its wire bytes."""
    rng = RngStream(seed)
    first, st = qkd_first(params, rng)
    out = qkd_second(first.msg, first.mu, params, rng)
    if out is REJECT:
        return SessionTranscript(params, seed, encode_first(first), b"", "REJECT", "REJECT")
    resp, k_bob = out
    k_alice = qkd_decode(st, resp, params)
    return SessionTranscript(params, seed, encode_first(first), encode_response(resp),
                             str(k_bob), "REJECT" if isinstance(k_alice, Bottom) else str(k_alice))


def write_session(path, tr: SessionTranscript) -> None:
    data = (pack_frames([_params_header(tr.params, tr.seed)]) + tr.first + tr.response
            + pack_frames([f"KEYS {tr.k_bob} {tr.k_alice}"]))
    Path(path).write_bytes(data)


def read_session(path) -> SessionTranscript:
    reader = FrameReader(Path(path).read_bytes())

    def header(text):
        parts = text.split()
        if not parts or parts[0] != "SESSION":
            raise FormatError(f"not a session header: {text[:40]!r}")
        f = dict(p.split("=", 1) for p in parts[1:])
        return (QkdParams(int(f["lam"]), int(f["p"]), int(f["r"]), int(f["c"])), int(f["seed"]))

    params, seed = reader.parse("session header", header)
    start = reader.pos
    read_first(reader)
    mid = reader.pos
    read_response(reader, params.preimage_bits)
    end = reader.pos
    keys = reader.parse("keys", lambda t: t.split())
    if len(keys) != 3 or keys[0] != "KEYS":
        raise FormatError("bad keys frame", f"frame {reader.index - 1} (keys)")
    if not reader.at_end():
        raise FormatError("trailing bytes after the keys frame", f"frame {reader.index}")
    data = reader.data
    return SessionTranscript(params, seed, data[start:mid], data[mid:end], keys[1], keys[2])


def replay_session(tr: SessionTranscript):
    """Alice's key recomputed from the stored response and her regenerated state."""
    _, st = qkd_first(tr.params, RngStream(tr.seed))
    resp = decode_response(tr.response, tr.params.preimage_bits)
    k = qkd_decode(st, resp, tr.params)
    return "REJECT" if isinstance(k, Bottom) else str(k)
