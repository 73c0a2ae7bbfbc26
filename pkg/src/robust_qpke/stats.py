"""Distribution tables and the few statistics the experiments report."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping

import numpy as np
from scipy.special import gammaincc

from .errors import InsufficientCounts, LabelMismatch

PROB_TOL = 1e-9


@dataclass(frozen=True)
class DistTable:
    """Outcome label -> probability (``kind="prob"``) or count (``kind="count"``)."""

    entries: Mapping[Hashable, float]
    kind: str = "prob"

    def __post_init__(self):
        if self.kind not in ("prob", "count"):
            raise ValueError(f"unknown table kind {self.kind!r}")
        if self.kind == "prob":
            total = sum(self.entries.values())
            if abs(total - 1.0) > PROB_TOL:
                raise ValueError(f"probabilities sum to {total}")

    @classmethod
    def from_probs(cls, probs: Mapping) -> DistTable:
        return cls(dict(probs), "prob")

    @classmethod
    def from_counts(cls, counts: Mapping, labels: Iterable | None = None) -> DistTable:
        entries = dict.fromkeys(labels, 0) if labels is not None else {}
        entries.update(counts)
        return cls(entries, "count")

    @classmethod
    def from_samples(cls, samples: Iterable, labels: Iterable | None = None) -> DistTable:
        return cls.from_counts(Counter(samples), labels)

    @property
    def total(self) -> float:
        return sum(self.entries.values())

    def labels(self) -> tuple:
        """Outcome labels in insertion order."""
        return tuple(self.entries)

    def normalized(self) -> dict:
        if self.kind == "prob":
            return dict(self.entries)
        t = self.total
        return {k: v / t for k, v in self.entries.items()}

    def __getitem__(self, label):
        return self.entries.get(label, 0)


def estimate_tv(a: DistTable, b: DistTable) -> float:
    """Total variation distance ``1/2 sum |p_a - p_b|`` over a shared label set."""
    if set(a.entries) != set(b.entries):
        raise LabelMismatch("tables are defined on different outcome sets")
    pa, pb = a.normalized(), b.normalized()
    return 0.5 * math.fsum(abs(pa[k] - pb[k]) for k in pa)


def chi_square_uniform(counts: DistTable) -> float:
    """p-value of Pearson's chi-square test of ``counts`` against the uniform law."""
    obs = np.array(list(counts.entries.values()), dtype=float)
    cells = obs.size
    if cells < 2:
        raise InsufficientCounts("need at least two cells")
    expected = obs.sum() / cells
    if expected < 5:
        raise InsufficientCounts(f"expected count per cell is {expected:.2f} < 5")
    stat = float(((obs - expected) ** 2).sum() / expected)
    return float(gammaincc((cells - 1) / 2.0, stat / 2.0))


def binomial_sigma(n: int, p: float) -> float:
    """Standard deviation of a binomial frequency (not count)."""
    return math.sqrt(p * (1 - p) / n)


def within_sigma(successes: int, n: int, p: float, z: float = 3.0) -> bool:
    return abs(successes / n - p) <= z * binomial_sigma(n, p)


def tv_sampling_bound(probs: Mapping, n_a: int, n_b: int | None = None, z: float = 3.0) -> float:
    """A ``z``-sigma envelope for the TV between empirical tables of a law ``probs``.

    Cell-wise: the difference of two independent frequencies has standard
    deviation ``sqrt(p (1 - p) (1/n_a + 1/n_b))``; the bound is half the sum of
    ``z`` such deviations. With ``n_b`` omitted, the second table is the exact
    law itself.
    """
    inv = 1.0 / n_a + (1.0 / n_b if n_b else 0.0)
    return 0.5 * z * math.fsum(math.sqrt(p * (1 - p) * inv) for p in probs.values())
