"""Complete random F1 to automorphisms of the C.1 quadric and check the group laws."""
import random
import time

from leviflat.automorphism import (F1_SPACE, automorphisms_equal, complete_automorphism, compose,
                                   identity_automorphism, invert, verify_automorphism)
from leviflat.config import AutomorphismConfig, from_args
from leviflat.quadric import SMALL_ENTRIES
from leviflat.series import Series


def main(cfg: AutomorphismConfig) -> None:
    rng = random.Random(cfg.seed)
    nonzero = [x for x in SMALL_ENTRIES if x]
    D = cfg.degree
    t0 = time.perf_counter()
    prev = None
    for k in range(cfg.cases):
        F1 = Series.var(F1_SPACE, "z1") * rng.choice(nonzero)
        for _ in range(rng.randint(1, 3)):
            F1 = F1 + Series.monomial(F1_SPACE, {"z1": rng.randint(2, D)}, rng.choice(nonzero))
        A = complete_automorphism(F1.truncate(D), 2, D)
        line = f"case {k:3d} verified={verify_automorphism(A, D).verified}"
        if prev is not None:
            AB = compose(A, prev, D)
            back = automorphisms_equal(compose(AB, invert(AB, D), D), identity_automorphism(2, D), D)
            line += f" composed+inverted={back}"
        prev = A
        print(line)
    sign = verify_automorphism(complete_automorphism(Series.var(F1_SPACE, "z1", D), 2, D, sign=+1), D)
    print(f"opposite F2 sign verified={sign.verified} violation={sign.violation and sign.violation['monomial']}")
    print(f"done in {time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main(from_args(AutomorphismConfig))
