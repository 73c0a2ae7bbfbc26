"""One PRF key, many public-key copies, and a measure-and-resend attacker.

Run: python3 demos/computational_qpke.py
"""

from robust_qpke import QpkeParams, RngStream, comp_dec, comp_enc, comp_pkgen, comp_skgen
from robust_qpke.qsim import make_basis, measure_computational


def main():
    params = QpkeParams(lam=16, preimage_bits=8)
    rng = RngStream(7)
    sk = comp_skgen(params, rng)
    keys = [comp_pkgen(sk, rng, params) for _ in range(4)]
    for i, key in enumerate(keys):
        ct = comp_enc(key.rho, key.pk, i & 1, rng)
        print(f"copy {i}: r0={key.pk.r0.to_hex()} r1={key.pk.r1.to_hex()} "
              f"m={i & 1} -> {comp_dec(sk, ct, params)}")

    trials = 2000
    ones = 0
    for _ in range(trials):
        key = comp_pkgen(sk, rng, params)
        collapsed = make_basis(measure_computational(key.rho, rng))
        ones += comp_dec(sk, comp_enc(collapsed, key.pk, 0, rng), params, rng)
    print(f"after measure-and-resend, m=0 decrypts to 1 in {ones}/{trials} trials")


if __name__ == "__main__":
    main()
