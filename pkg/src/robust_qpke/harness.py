"""Experiment dispatch behind the command line.

Each experiment returns a :class:`Report`: ordered ``name value`` metrics,
the named in-run checks and the :class:`ExperimentRecord` objects it
produced. A run passes iff every check holds.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .adversary import (
    CATALOG_NAMES, ExperimentRecord, get_channel, keysearch_attack, run_exp_computational,
    run_exp_everlasting, run_qkdsec, silent_mismatch,
)
from .bits import BitString
from .errors import ABORT, REJECT
from .ots import OtsParams, forgery_trial
from .primitives import DEFAULT_ROUNDS, RngStream, ToeplitzHash
from .qkd import QkdParams, run_session
from .qpke import QpkeParams, ev_dec, ev_enc, ev_pkgen, ev_skgen
from .stats import DistTable, chi_square_uniform, estimate_tv
from .transcript import read_records, write_records

__all__ = [
    "EXPERIMENTS", "SEED_ENV", "DistTable", "Report", "RunConfig", "appendix_attack",
    "chi_square_uniform", "default_seed", "estimate_tv", "key_uniformity", "load_config_file",
    "read_records", "run_cli", "run_experiment", "toeplitz_collision_counts", "write_records",
]

EXPERIMENTS = ("ev-qpke", "comp-qpke", "qkd", "appendix-attack", "extractor", "ots-forgery")
SEED_ENV = "ROBUST_QPKE_SEED"

# per-experiment defaults for lam / preimage_bits / trials
_DEFAULTS = {
    "ev-qpke": (32, 8, 1000),
    "comp-qpke": (32, 8, 1000),
    "qkd": (2, 8, 100),
    "appendix-attack": (5, 8, 100),
    "extractor": (2, 1, 2000),
    "ots-forgery": (32, 6, 100),
}


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    scenario: str = "identity"
    lam: int | None = None
    preimage_bits: int | None = None
    owf_rounds: int = DEFAULT_ROUNDS
    trials: int | None = None
    budget: int | None = None  # None: the full keyspace / preimage space
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.scenario not in CATALOG_NAMES:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        for name in ("lam", "preimage_bits", "trials"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be positive")
        if self.owf_rounds < 1:
            raise ValueError("owf_rounds must be positive")
        if self.budget is not None and self.budget < 0:
            raise ValueError("budget must be non-negative")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def resolved(self) -> RunConfig:
        lam, p, trials = _DEFAULTS[self.experiment]
        return replace(self, lam=self.lam or lam, preimage_bits=self.preimage_bits or p,
                       trials=self.trials or trials)


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def load_config_file(path) -> dict:
    """``key=value`` lines; ``#`` starts a comment. Keys are RunConfig field names."""
    known = {f.name for f in fields(RunConfig)}
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key == "lambda":
            key = "lam"
        if not sep or key not in known:
            raise ValueError(f"{path}:{lineno}: bad config line {line!r}")
        out[key] = value.strip()
    return out


@dataclass
class Report:
    metrics: list[tuple[str, object]] = field(default_factory=list)
    checks: list[tuple[str, bool]] = field(default_factory=list)
    records: list[ExperimentRecord] = field(default_factory=list)

    def add(self, name: str, value) -> None:
        self.metrics.append((name, value))

    def check(self, name: str, ok: bool) -> None:
        self.checks.append((name, bool(ok)))

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks)

    def to_text(self) -> str:
        lines = [f"{k} {_fmt(v)}" for k, v in self.metrics]
        lines += [f"check.{k} {'pass' if ok else 'FAIL'}" for k, ok in self.checks]
        lines.append(f"status {'pass' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def _qpke_exp(cfg: RunConfig, rng: RngStream, computational: bool) -> Report:
    params = QpkeParams(cfg.lam, cfg.preimage_bits, cfg.owf_rounds)
    adv = get_channel(cfg.scenario, cfg.budget if cfg.budget is not None else 16)
    rep = Report()
    rep.add("scenario", cfg.scenario)
    for m in (0, 1):
        r = rng.split(m)
        if computational:
            rec = run_exp_computational(adv, m, 3, params, r, cfg.trials)
        else:
            rec = run_exp_everlasting(adv, m, params, r, cfg.trials)
        rep.records.append(rec)
        aborts = rec.count("ct", "ABORT")
        correct = rec.count("dec", str(m))
        other = rec.trials - aborts - correct
        rep.add(f"m{m}.trials", rec.trials)
        rep.add(f"m{m}.aborts", aborts)
        rep.add(f"m{m}.decrypt_m", correct)
        rep.add(f"m{m}.decrypt_other", other)
        if computational:
            rep.add(f"m{m}.copies_distinct", rec.count("distinct", "1"))
        rep.check(f"m{m}.totals_conserved", aborts + correct + other == cfg.trials)
        if cfg.scenario in ("identity", "block_second_message"):
            rep.check(f"m{m}.honest_correct", correct == cfg.trials)
        if cfg.scenario == "flip_ciphertext_bit":
            rep.check(f"m{m}.phase_flip_inverts", rec.count("dec", str(1 - m)) == cfg.trials)
        if not computational and cfg.scenario in ("identity", "block_second_message"):
            rep.check(f"m{m}.parity_law", rec.count("parity", "1") == cfg.trials - aborts)
    return rep


def _qkd_exp(cfg: RunConfig, rng: RngStream) -> Report:
    params = QkdParams(cfg.lam, cfg.preimage_bits, cfg.owf_rounds)
    adv = get_channel(cfg.scenario, cfg.budget if cfg.budget is not None else 16)
    rec = run_qkdsec(adv, params, rng, cfg.trials)
    rep = Report(records=[rec])
    agree = sum(1 for o in rec.outputs if o["k0"] != "REJECT" and o["k0"] == o["k1"])
    both_reject = sum(1 for o in rec.outputs if o["k0"] == o["k1"] == "REJECT")
    alice_reject = sum(1 for o in rec.outputs if o["k0"] != "REJECT" and o["k1"] == "REJECT")
    silent = sum(1 for o in rec.outputs if silent_mismatch(o))
    rep.add("scenario", cfg.scenario)
    rep.add("instances", params.n_instances)
    rep.add("trials", rec.trials)
    rep.add("agree", agree)
    rep.add("reject_both", both_reject)
    rep.add("reject_alice", alice_reject)
    rep.add("silent_mismatch", silent)
    rep.check("totals_conserved", agree + both_reject + alice_reject + silent == rec.trials)
    rep.check("classical_intact", rec.count("classical_intact", "1") == rec.trials)
    rep.check("silent_mismatch_le_1pct", silent <= 0.01 * rec.trials)
    if cfg.scenario == "identity":
        rep.check("honest_agreement", agree == rec.trials)
    if cfg.scenario == "block_second_message":
        rep.check("blocked_alice_rejects", alice_reject == rec.trials)
    return rep


def appendix_attack(params: QpkeParams, runs: int, budget: int | None, rng: RngStream):
    """Honest key, key search on its classical part, planted state, decryption by the attacker.

    Returns ``(successes, found, iterations)`` where success means the
    attacker's decryption equals the encrypted bit.
    """
    successes = found = 0
    iterations = []
    for t in range(runs):
        r = rng.split(t)
        sk = ev_skgen(params, r)
        pub = ev_pkgen(sk)
        res = keysearch_attack(pub.pk, params, budget)
        iterations.append(res.iterations)
        if not res.found:
            continue
        found += 1
        m = r.bit()
        ct = ev_enc(res.public.rho, pub.pk, m, r)
        if ct is not ABORT and ev_dec(res.sk, ct) == m:
            successes += 1
    return successes, found, iterations


def _attack_exp(cfg: RunConfig, rng: RngStream) -> Report:
    params = QpkeParams(cfg.lam, cfg.preimage_bits, cfg.owf_rounds)
    succ, found, its = appendix_attack(params, cfg.trials, cfg.budget, rng)
    rep = Report()
    rep.add("keyspace", 1 << (2 * cfg.lam + 1))
    rep.add("budget", "full" if cfg.budget is None else cfg.budget)
    rep.add("found", f"{found}/{cfg.trials}")
    rep.add("success", f"{succ}/{cfg.trials}")
    rep.add("mean_iterations", float(np.mean(its)))
    rep.check("found_implies_success", succ == found)
    if cfg.budget is None:
        rep.check("full_budget_always_succeeds", succ == cfg.trials)
    return rep


def toeplitz_collision_counts(lam: int) -> np.ndarray:
    """For every nonzero difference ``delta``, the number of seeds with ``H(delta) = 0``.

    By linearity ``H(x) = H(x')`` iff ``H(x ^ x') = 0``, so this covers every
    input pair. Entry ``delta - 1`` of the result belongs to ``delta``.
    """
    n = 4 * lam
    seed_bits = 5 * lam - 1
    rows = np.array([ToeplitzHash(lam, BitString(s, seed_bits))._rows
                     for s in range(1 << seed_bits)], dtype=np.uint64)  # (S, lam)
    deltas = np.arange(1, 1 << n, dtype=np.uint64)
    counts = np.zeros(deltas.size, dtype=np.int64)
    for chunk in np.array_split(np.arange(deltas.size), max(1, deltas.size // 4096)):
        d = deltas[chunk]
        par = np.bitwise_count(rows[:, :, None] & d[None, None, :]) & 1  # (S, lam, D)
        counts[chunk] = (~par.any(axis=1)).sum(axis=0)
    return counts


def key_uniformity(params: QkdParams, sessions: int, rng: RngStream):
    """Empirical law of the session key over honest sessions, conditioned on no abort.

    Returns ``(counts DistTable, aborted_sessions)``.
    """
    labels = [str(BitString(v, params.lam)) for v in range(1 << params.lam)]
    tally = dict.fromkeys(labels, 0)
    aborted = 0
    for t in range(sessions):
        k_alice, k_bob = run_session(params, rng.split(t))
        if k_bob is REJECT or k_alice != k_bob:
            aborted += 1
            continue
        tally[str(k_bob)] += 1
    return DistTable.from_counts(tally), aborted


def _extractor_exp(cfg: RunConfig, rng: RngStream) -> Report:
    rep = Report()
    counts = toeplitz_collision_counts(cfg.lam)
    seeds = 1 << (5 * cfg.lam - 1)
    worst = counts.max() / seeds
    rep.add("seeds", seeds)
    rep.add("pairs_checked_by_difference", counts.size)
    rep.add("max_collision_probability", float(worst))
    rep.check("universal", worst <= 2.0 ** -cfg.lam)
    params = QkdParams(cfg.lam, cfg.preimage_bits, cfg.owf_rounds)
    table, aborted = key_uniformity(params, cfg.trials, rng)
    p_value = chi_square_uniform(table)
    rep.add("sessions", cfg.trials)
    rep.add("aborted", aborted)
    rep.add("chi_square_p", p_value)
    rep.check("key_uniform_p_gt_0.001", p_value > 0.001)
    return rep


def _forgery_exp(cfg: RunConfig, rng: RngStream) -> Report:
    params = OtsParams(4, cfg.preimage_bits, cfg.lam, cfg.owf_rounds)
    budget = (1 << cfg.preimage_bits) if cfg.budget is None else cfg.budget
    wins = 0
    for t in range(cfg.trials):
        r = rng.split(t)
        wins += forgery_trial(params, r.bits(params.coin_bits), r.bits(params.message_bits), budget)
    rep = Report()
    rep.add("budget", budget)
    rep.add("forgeries", f"{wins}/{cfg.trials}")
    rep.add("forgery_rate", wins / cfg.trials)
    if budget >= 1 << cfg.preimage_bits:
        rep.check("full_budget_always_forges", wins == cfg.trials)
    return rep


def run_experiment(cfg: RunConfig) -> Report:
    cfg = cfg.resolved()
    rng = RngStream(cfg.seed)
    if cfg.experiment == "ev-qpke":
        rep = _qpke_exp(cfg, rng, computational=False)
    elif cfg.experiment == "comp-qpke":
        rep = _qpke_exp(cfg, rng, computational=True)
    elif cfg.experiment == "qkd":
        rep = _qkd_exp(cfg, rng)
    elif cfg.experiment == "appendix-attack":
        rep = _attack_exp(cfg, rng)
    elif cfg.experiment == "extractor":
        rep = _extractor_exp(cfg, rng)
    else:
        rep = _forgery_exp(cfg, rng)
    rep.metrics[:0] = [("experiment", cfg.experiment), ("lambda", cfg.lam),
                       ("preimage_bits", cfg.preimage_bits), ("seed", cfg.seed)]
    return rep


def run_cli(cfg: RunConfig) -> tuple[int, str]:
    """Run one configuration; returns ``(exit code, report text)``.

    With ``cfg.out`` set, the report is written to ``<out>`` and the records
    to ``<out>.records`` as length-prefixed frames.
    """
    rep = run_experiment(cfg)
    text = rep.to_text()
    if cfg.out:
        Path(cfg.out).write_text(text)
        write_records(f"{cfg.out}.records", rep.records)
    return (0 if rep.passed else 1), text
