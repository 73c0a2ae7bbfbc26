"""Toeplitz hashing: exact universality and the law of the final key.

Run: python3 demos/extractor.py
"""

from robust_qpke.harness import key_uniformity, toeplitz_collision_counts
from robust_qpke.primitives import RngStream
from robust_qpke.qkd import QkdParams
from robust_qpke.stats import chi_square_uniform


def main():
    lam = 2
    counts = toeplitz_collision_counts(lam)
    seeds = 1 << (5 * lam - 1)
    print(f"lambda={lam}: {seeds} seeds, {counts.size} nonzero input differences")
    print(f"worst collision probability {counts.max() / seeds} (bound {2.0 ** -lam})")

    table, aborted = key_uniformity(QkdParams(4, 1), 5000, RngStream(3))
    print(f"key counts over 5000 sessions: {sorted(table.entries.values())}")
    print(f"chi-square p = {chi_square_uniform(table):.3f}, aborted {aborted}")


if __name__ == "__main__":
    main()
