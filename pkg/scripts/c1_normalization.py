"""Normalize random mixed-holomorphic C.1 perturbations and verify each result."""
import random
import time

from leviflat.c1 import mixed_space, normalize_mixed_c1, verify_transformation
from leviflat.config import C1Config, from_args
from leviflat.levi import GraphSubmanifold
from leviflat.quadric import SMALL_ENTRIES
from leviflat.series import Series, VarSpace


def random_remainder(rng, n, max_deg):
    sp = mixed_space(n)
    terms = {}
    for _ in range(rng.randint(1, 4)):
        e = [0] * sp.nvars
        for _ in range(rng.randint(3, max_deg)):
            e[rng.randrange(sp.nvars)] += 1
        terms[tuple(e)] = rng.choice([x for x in SMALL_ENTRIES if x])
    return Series.from_dict(sp, terms)


def main(cfg: C1Config) -> None:
    rng = random.Random(cfg.seed)
    t0 = time.perf_counter()
    ok = 0
    for k in range(cfg.cases):
        n = 2 + k % 2
        r = random_remainder(rng, n, cfg.max_data_degree)
        sp = VarSpace.complexified(n)
        M = GraphSubmanifold(n, Series.var(sp, "zb1") * Series.var(sp, "z2") + Series.var(sp, "zb1") ** 2
                             + r.to_space(sp))
        t = normalize_mixed_c1(M, cfg.degree)
        v = verify_transformation(t, M, cfg.degree)
        ok += v.verified
        print(f"case {k:3d} n={n} steps={len(t.steps):3d} verified={v.verified}")
    print(f"{ok}/{cfg.cases} verified in {time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main(from_args(C1Config))
