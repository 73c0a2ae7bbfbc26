"""Brute-force forgery against Lamport signatures at two preimage widths.

Run: python3 demos/ots_forgery.py
"""

from robust_qpke.ots import OtsParams, forgery_trial
from robust_qpke.primitives import RngStream


def main():
    rng = RngStream(4)
    for p, budget in ((6, 1 << 6), (12, 1 << 10), (24, 1 << 10)):
        params = OtsParams(4, p)
        trials = 200
        wins = sum(forgery_trial(params, rng.bits(32), rng.bits(4), budget) for _ in range(trials))
        print(f"preimage bits {p:2d}, budget {budget:5d}: forged {wins}/{trials}")


if __name__ == "__main__":
    main()
