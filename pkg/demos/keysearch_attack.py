"""An unbounded attacker recovers a working secret key at toy size.

The classical key alone fixes a set of consistent coin choices. Trying all of
them yields a key whose state the attacker plants in place of the honest one,
after which the attacker reads every encrypted bit.

Run: python3 demos/keysearch_attack.py
"""

from robust_qpke import QpkeParams, RngStream, ev_dec, ev_enc, ev_pkgen, ev_skgen
from robust_qpke.adversary import count_matching_keys, keysearch_attack, keyspace_size


def main():
    params = QpkeParams(lam=5, preimage_bits=8)
    rng = RngStream(11)
    pub = ev_pkgen(ev_skgen(params, rng))
    print(f"keyspace {keyspace_size(pub.pk, params)}, "
          f"consistent keys {count_matching_keys(pub.pk, params)}")
    res = keysearch_attack(pub.pk, params, budget=None)
    print(f"found after {res.iterations} candidates: {res.coins_text()}")
    for m in (0, 1):
        ct = ev_enc(res.public.rho, pub.pk, m, rng)
        print(f"encrypted {m}, attacker reads {ev_dec(res.sk, ct)}")
    short = keysearch_attack(pub.pk, params, budget=8)
    print(f"with a budget of 8 candidates: found={short.found}")


if __name__ == "__main__":
    main()
