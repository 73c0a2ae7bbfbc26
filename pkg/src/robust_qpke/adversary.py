"""Security experiments and a catalog of adversarial channels.

An :class:`AdversaryChannel` sits between the honest parties. It sees every
classical field but can only change quantum registers and, on the second
flow, decide whether the response is delivered at all. Classical fields are
forwarded by the experiment itself, so a channel has no way to alter them.

The adversary's internal register is a flat ``str -> str`` dict so that a
record of it can be dumped and compared byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .bits import BitString
from .errors import (
    ABORT, BLOCKED, REJECT, Bottom, FormatError, SupportMismatch,
)
from .primitives import PrfKey, RngStream
from .qkd import QkdParams, qkd_decode, qkd_first, qkd_second
from .qpke import (
    CompPk, CompSecretKey, QpkeParams, comp_dec, comp_enc, comp_pkgen,
    comp_pkgen_from_coins, comp_skgen, ev_dec, ev_enc, ev_pkgen, ev_skgen,
    ev_skgen_from_coins,
)
from .ots import sgen
from .qsim import SparseState, apply_z_phase, make_basis, measure_computational

Internal = dict


# ---------------------------------------------------------------------------
# channels
# ---------------------------------------------------------------------------

def _pass_first(view, registers, internal, rng):
    return registers, internal


def _pass_second(view, internal, rng):
    return True, internal


def _no_guess(internal, ct, rng):
    return None


@dataclass(frozen=True)
class AdversaryChannel:
    """A named tampering strategy.

    ``tamper_first(view, registers, internal, rng) -> (registers, internal)``
    acts on the public-key flow; ``tamper_second(view, internal, rng) ->
    (deliver, internal)`` on the response flow. ``guess(internal, ct, rng)``
    is the adversary's final answer about the encrypted bit, or ``None``.
    """

    name: str
    tamper_first: Callable = _pass_first
    tamper_second: Callable = _pass_second
    guess: Callable = _no_guess


def _measure_all(view, registers, internal, rng):
    out = tuple(make_basis(measure_computational(r, rng)) for r in registers)
    return out, internal


def _substitute_basis(view, registers, internal, rng):
    x = measure_computational(registers[0], rng)
    internal = dict(internal, measured=str(x))
    return (make_basis(x),) + tuple(registers[1:]), internal


def _substitute_garbage(view, registers, internal, rng):
    r = registers[0]
    junk = rng.bits(r.n_qubits)
    return (make_basis(junk),) + tuple(registers[1:]), dict(internal, garbage=str(junk))


def _flip_phase(view, registers, internal, rng):
    # Z on the message qubit: the decrypted bit of this instance flips
    return (apply_z_phase(registers[0], 0, 1),) + tuple(registers[1:]), internal


def _block(view, internal, rng):
    return False, internal


def keysearch_wrapper(budget: int | None) -> AdversaryChannel:
    """Run :func:`keysearch_attack` on instance 0 and plant the matching state.

    ``budget=None`` means the whole keyspace. When the search fails the
    register is forwarded untouched.
    """

    def tamper_first(view, registers, internal, rng):
        pk = view[0]
        params = params_from_pk(pk)
        found = keysearch_attack(pk, params, budget)
        internal = dict(internal, iterations=str(found.iterations))
        if not found.found:
            return registers, dict(internal, found="0")
        return (found.public.rho,) + tuple(registers[1:]), dict(
            internal, found="1", coins=found.coins_text())

    def guess(internal, ct, rng):
        if internal.get("found") != "1" or isinstance(ct, Bottom):
            return None
        sk, params = _sk_from_coins(internal["coins"])
        try:
            if isinstance(sk, CompSecretKey):
                return comp_dec(sk, ct, params, rng)
            return ev_dec(sk, ct)
        except SupportMismatch:
            return None

    return AdversaryChannel("keysearch_wrapper", tamper_first, _pass_second, guess)


CATALOG_NAMES = (
    "identity", "measure_resend", "substitute_basis_state", "substitute_garbage",
    "flip_ciphertext_bit", "block_second_message", "keysearch_wrapper",
)


def catalog(keysearch_budget: int | None = 16) -> list[AdversaryChannel]:
    return [
        AdversaryChannel("identity"),
        AdversaryChannel("measure_resend", _measure_all),
        AdversaryChannel("substitute_basis_state", _substitute_basis),
        AdversaryChannel("substitute_garbage", _substitute_garbage),
        AdversaryChannel("flip_ciphertext_bit", _flip_phase),
        AdversaryChannel("block_second_message", tamper_second=_block),
        keysearch_wrapper(keysearch_budget),
    ]


def get_channel(name: str, keysearch_budget: int | None = 16) -> AdversaryChannel:
    for ch in catalog(keysearch_budget):
        if ch.name == name:
            return ch
    raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(CATALOG_NAMES)}")


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

def _dump(fields: dict) -> str:
    for k, v in fields.items():
        if any(c in str(v) for c in " =\n") or any(c in k for c in " =\n"):
            raise ValueError(f"field {k}={v!r} is not a single token")
    return " ".join(f"{k}={v}" for k, v in fields.items())


def _load(text: str) -> dict:
    out = {}
    for tok in text.split():
        k, sep, v = tok.partition("=")
        if not sep:
            raise FormatError(f"token {tok!r} is not key=value")
        out[k] = v
    return out


@dataclass(frozen=True)
class ExperimentRecord:
    """Everything one experiment run produced, reproducible from ``(scenario, seed)``.

    ``outputs[i]`` holds the observable results of trial ``i`` and
    ``internal[i]`` the adversary's internal register after that trial.
    """

    experiment: str
    scenario: str
    seed: int
    stream_id: int
    outputs: tuple[dict, ...] = field(default=())
    internal: tuple[dict, ...] = field(default=())

    @property
    def trials(self) -> int:
        return len(self.outputs)

    def column(self, key: str) -> list[str]:
        return [o[key] for o in self.outputs]

    def count(self, key: str, value: str) -> int:
        return sum(1 for o in self.outputs if o.get(key) == value)

    def to_text(self) -> str:
        lines = [f"record {self.experiment} {self.scenario} seed={self.seed} "
                 f"stream={self.stream_id} trials={self.trials}"]
        for i, o in enumerate(self.outputs):
            lines.append(f"out {i} {_dump(o)}".rstrip())
        for i, d in enumerate(self.internal):
            lines.append(f"internal {i} {_dump(d)}".rstrip())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> ExperimentRecord:
        lines = text.splitlines()
        if not lines:
            raise FormatError("empty record", "line 1")
        head = lines[0].split()
        try:
            if len(head) != 6 or head[0] != "record":
                raise ValueError
            meta = _load(" ".join(head[3:]))
            seed, stream, n = int(meta["seed"]), int(meta["stream"]), int(meta["trials"])
        except (ValueError, KeyError):
            raise FormatError(f"bad record header {lines[0]!r}", "line 1") from None
        outs, internal = [], []
        for lineno, line in enumerate(lines[1:], start=2):
            kind, _, rest = line.partition(" ")
            idx, _, body = rest.partition(" ")
            target = {"out": outs, "internal": internal}.get(kind)
            if target is None or idx != str(len(target)):
                raise FormatError(f"unexpected line {line[:40]!r}", f"line {lineno}")
            try:
                target.append(_load(body))
            except FormatError as exc:
                raise FormatError(str(exc), f"line {lineno}") from None
        if len(outs) != n:
            raise FormatError(f"header announces {n} trials, found {len(outs)}", "line 1")
        return cls(head[1], head[2], seed, stream, tuple(outs), tuple(internal))


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def _guess_token(g) -> str:
    return "-" if g is None else str(g)


def run_exp_everlasting(adv: AdversaryChannel, m: int, params: QpkeParams,
                        rng: RngStream, trials: int = 1) -> ExperimentRecord:
    """Everlasting-security game: fresh key, one tampered copy, one encryption.

    Per trial: ``ct`` (or ``ABORT``), ``dec`` (honest decryption, ``-`` on
    abort), ``guess`` (the adversary's answer) and ``parity`` (whether the
    honest parity law holds for the challenger's key; ``-`` on abort).
    """
    outs, internals = [], []
    for t in range(trials):
        r = rng.split(t)
        sk = ev_skgen(params, r)
        pub = ev_pkgen(sk)
        regs, internal = adv.tamper_first((pub.pk,), (pub.rho,), {}, r)
        ct = ev_enc(regs[0], pub.pk, m, r, params)
        if ct is ABORT:
            outs.append({"ct": "ABORT", "dec": "-", "guess": "-", "parity": "-"})
        else:
            dec = ev_dec(sk, ct)
            outs.append({
                "ct": f"{ct.ct1}:{ct.ct2.to_hex()}",
                "dec": str(dec),
                "guess": _guess_token(adv.guess(internal, ct, r)),
                "parity": str(int(dec == m)),
            })
        internals.append(internal)
    return ExperimentRecord("ev-qpke", adv.name, rng.seed, rng.stream_id,
                            tuple(outs), tuple(internals))


def _state_token(s: SparseState) -> str:
    return ",".join(f"{'+' if sign > 0 else '-'}{b}" for b, sign in s.terms)


def run_exp_computational(adv: AdversaryChannel, m: int, n: int, params: QpkeParams,
                          rng: RngStream, trials: int = 1) -> ExperimentRecord:
    """Computational-security game: ``n`` public keys from one secret key, encrypt under the first.

    Per trial: ``ct`` (state token or ``ABORT``), ``dec`` (``0``/``1``, ``X`` for
    the support-mismatch outcome, ``-`` on abort), ``distinct`` (whether all
    ``n`` copies have pairwise different ``(r0, r1)``) and ``guess``.
    """
    if n < 1:
        raise ValueError("at least one public-key copy is required")
    outs, internals = [], []
    for t in range(trials):
        r = rng.split(t)
        sk = comp_skgen(params, r)
        keys = [comp_pkgen(sk, r, params) for _ in range(n)]
        distinct = len({(k.pk.r0, k.pk.r1) for k in keys}) == n
        regs, internal = adv.tamper_first(tuple(k.pk for k in keys),
                                          tuple(k.rho for k in keys), {}, r)
        ct = comp_enc(regs[0], keys[0].pk, m, r)
        row = {"ct": "ABORT", "dec": "-", "distinct": str(int(distinct)), "guess": "-"}
        if ct is not ABORT:
            row["ct"] = _state_token(ct.quantum)
            try:
                row["dec"] = str(comp_dec(sk, ct, params, r))
            except SupportMismatch:
                row["dec"] = "X"
            row["guess"] = _guess_token(adv.guess(internal, ct, r))
        outs.append(row)
        internals.append(internal)
    return ExperimentRecord("comp-qpke", adv.name, rng.seed, rng.stream_id,
                            tuple(outs), tuple(internals))


def _key_token(k) -> str:
    return "REJECT" if isinstance(k, Bottom) else str(k)


def qkdsec_trial(adv: AdversaryChannel, params: QkdParams, rng: RngStream,
                 wire: bool = True) -> tuple[dict, dict]:
    """One verifiability game; returns ``(outputs, internal)``.

    ``k0`` is Bob's key, ``k1`` Alice's. With ``wire`` set, both flows pass
    through the byte encoding and ``classical_intact`` records whether the
    classical fields arrived byte-identical.
    """
    from .transcript import decode_first, decode_response, encode_first, encode_response

    first, st = qkd_first(params, rng)
    intact = True
    msg = first.msg
    if wire:
        sent = encode_first(first)
        msg = decode_first(sent).msg
        intact = msg == first.msg
    mu, internal = adv.tamper_first(msg, first.mu, {}, rng)
    out = qkd_second(msg, mu, params, rng)
    if out is REJECT:
        k0 = k1 = REJECT
    else:
        resp, k0 = out
        deliver, internal = adv.tamper_second(resp, internal, rng)
        received = resp if deliver else BLOCKED
        if wire:
            sent = encode_response(received)
            got = decode_response(sent, params.preimage_bits)
            intact = intact and (got is BLOCKED if received is BLOCKED
                                 else encode_response(got) == sent)
            received = got
        k1 = qkd_decode(st, received, params)
    row = {"k0": _key_token(k0), "k1": _key_token(k1), "classical_intact": str(int(intact))}
    return row, internal


def run_qkdsec(adv: AdversaryChannel, params: QkdParams, rng: RngStream,
               trials: int = 1, wire: bool = True) -> ExperimentRecord:
    outs, internals = [], []
    for t in range(trials):
        row, internal = qkdsec_trial(adv, params, rng.split(t), wire)
        outs.append(row)
        internals.append(internal)
    return ExperimentRecord("qkd", adv.name, rng.seed, rng.stream_id,
                            tuple(outs), tuple(internals))


def silent_mismatch(row: dict) -> bool:
    """Alice accepted a key that differs from Bob's."""
    return row["k1"] != "REJECT" and row["k1"] != row["k0"]


# ---------------------------------------------------------------------------
# unbounded key search
# ---------------------------------------------------------------------------

def params_from_pk(pk) -> QpkeParams:
    """Scheme parameters implied by the verification keys in a classical public key."""
    ots = pk.vk0.params
    return QpkeParams(ots.coin_bits, ots.preimage_bits, ots.owf_rounds)


def keyspace_size(pk, params: QpkeParams) -> int:
    """``2^(2 lam + 1)`` coin choices for the everlasting scheme, ``2^(3 lam)`` for the computational one."""
    lam = params.lam
    return 1 << (3 * lam if isinstance(pk, CompPk) else 2 * lam + 1)


def _split_index(idx: int, lam: int, comp: bool):
    mask = (1 << lam) - 1
    if comp:
        return (idx >> (2 * lam)) & mask, (idx >> lam) & mask, idx & mask
    return idx >> (lam + 1), (idx >> 1) & mask, idx & 1


@dataclass(frozen=True)
class KeysearchResult:
    found: bool
    iterations: int
    sk: object = None
    public: object = None
    params: QpkeParams | None = None
    coins: tuple | None = field(default=None, repr=False)

    def coins_text(self) -> str:
        """Serialized secret key: scheme tag, parameters and coins."""
        p = self.params
        head = f"{p.lam}/{p.preimage_bits}/{p.owf_rounds}"
        if isinstance(self.sk, CompSecretKey):
            return f"comp/{head}/{self.sk.k.key.to_hex()}"
        c0, c1 = self.coins
        return f"ev/{head}/{c0.to_hex()}/{c1.to_hex()}/{self.sk.d0}"


def _sk_from_coins(text: str):
    parts = text.split("/")
    lam, p, rounds = int(parts[1]), int(parts[2]), int(parts[3])
    params = QpkeParams(lam, p, rounds)
    if parts[0] == "comp":
        return CompSecretKey(PrfKey(BitString.from_hex(parts[4], lam))), params
    c0 = BitString.from_hex(parts[4], lam)
    c1 = BitString.from_hex(parts[5], lam)
    return ev_skgen_from_coins(params, c0, c1, int(parts[6])), params


def _candidate(pk, params: QpkeParams, idx: int | None, rng: RngStream | None):
    """One iteration of the search loop: ``(sk*, public*, coins)``."""
    lam = params.lam
    if isinstance(pk, CompPk):
        if idx is None:
            sk = comp_skgen(params, rng)
            pub = comp_pkgen(sk, rng, params)
        else:
            k, r0, r1 = _split_index(idx, lam, True)
            if r0 != pk.r0.value or r1 != pk.r1.value:
                # pk* would differ in (r0, r1); skip computing the signatures
                return None, None, None
            sk = CompSecretKey(PrfKey(BitString.raw(k, lam)))
            pub = comp_pkgen_from_coins(sk, BitString.raw(r0, lam), BitString.raw(r1, lam), params)
        return sk, pub, None
    if idx is None:
        c0, c1, d0 = rng.bits(lam), rng.bits(lam), rng.bit()
    else:
        a, b, d0 = _split_index(idx, lam, False)
        c0, c1 = BitString.raw(a, lam), BitString.raw(b, lam)
    sk = ev_skgen_from_coins(params, c0, c1, d0)
    return sk, ev_pkgen(sk), (c0, c1)


def keysearch_attack(pk, params: QpkeParams, budget: int | None,
                     rng: RngStream | None = None) -> KeysearchResult:
    """Resample key generation until the classical public key matches.

    Without ``rng`` the candidates are enumerated in coin order, so
    ``budget=None`` (the whole keyspace) always succeeds. With ``rng`` each
    candidate is a fresh run of key generation, as in the unbounded attack.
    """
    size = keyspace_size(pk, params)
    limit = size if budget is None else budget
    if rng is None:
        limit = min(limit, size)
    for it in range(limit):
        sk, pub, coins = _candidate(pk, params, it if rng is None else None, rng)
        if pub is not None and pub.pk == pk:
            return KeysearchResult(True, it + 1, sk, pub, params, coins)
    return KeysearchResult(False, limit)


def count_matching_keys(pk, params: QpkeParams) -> int:
    """Number of coin choices whose public key equals ``pk``.

    Uses that ``vk0`` and ``vk1`` depend on disjoint coins, so the count
    factors into two ``2^lam`` scans instead of one scan of the full space.
    """
    lam = params.lam
    if isinstance(pk, CompPk):
        from .primitives import prf_eval

        hits = 0
        for k in range(1 << lam):
            key = PrfKey(BitString.raw(k, lam))
            vk0, _ = sgen(params.ots, prf_eval(key, pk.r0, params.owf_rounds))
            if vk0 != pk.vk0:
                continue
            vk1, _ = sgen(params.ots, prf_eval(key, pk.r1, params.owf_rounds))
            hits += vk1 == pk.vk1
        return hits
    n0 = sum(sgen(params.ots, BitString.raw(c, lam))[0] == pk.vk0 for c in range(1 << lam))
    n1 = sum(sgen(params.ots, BitString.raw(c, lam))[0] == pk.vk1 for c in range(1 << lam))
    return 2 * n0 * n1
