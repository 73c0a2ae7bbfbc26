"""Encrypt one bit under the everlasting scheme and watch what tampering does.

Run: python3 demos/everlasting_qpke.py
"""

from robust_qpke import QpkeParams, RngStream, ev_dec, ev_enc, ev_pkgen, ev_skgen
from robust_qpke.bits import BitString
from robust_qpke.qpke import ev_ciphertext_law, parity_holds
from robust_qpke.qsim import apply_z_phase, make_basis, superpose2


def main():
    params = QpkeParams(lam=8, preimage_bits=3)
    rng = RngStream(2026)
    sk = ev_skgen(params, rng)
    pub = ev_pkgen(sk)
    print("public-key state:")
    print(pub.rho.to_text())
    print(f"hidden phase bit d0 = {sk.d0}")

    for m in (0, 1):
        ct = ev_enc(pub.rho, pub.pk, m, rng)
        print(f"m={m}: ct={ct.to_text()!r} -> decrypts to {ev_dec(sk, ct)}, "
              f"parity law holds: {parity_holds(sk, ct, m)}")

    # Without d0 the two messages give the same ciphertext law.
    (x0, _), (x1, _) = pub.rho.terms
    for m in (0, 1):
        law = [ev_ciphertext_law(superpose2(x0, x1, d), pub.pk, m) for d in (0, 1)]
        mixed = sorted({round((law[0][l] + law[1][l]) / 2, 12) for l in law[0].labels() if l != "ABORT"})
        print(f"m={m}: ciphertext probabilities with d0 hidden: {mixed}")

    # Tampering: a phase flip inverts the bit, a garbage register is caught.
    flipped = apply_z_phase(pub.rho, 0, 1)
    print("phase-flipped key, m=0 decrypts to", ev_dec(sk, ev_enc(flipped, pub.pk, 0, rng)))
    junk = make_basis(BitString(0, params.n_qubits))
    print("garbage register gives", ev_enc(junk, pub.pk, 0, rng))


if __name__ == "__main__":
    main()
