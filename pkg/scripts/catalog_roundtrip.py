"""Classify each catalog quadric and many random linear conjugates of it."""
import random
import time
from collections import Counter

from leviflat.config import CatalogConfig, from_args
from leviflat.quadric import catalog_pairs, check_witness, classify_quadric, random_conjugate


def main(cfg: CatalogConfig) -> None:
    rng = random.Random(cfg.seed)
    for tag, p in catalog_pairs(cfg.n).items():
        t0 = time.perf_counter()
        t, _ = classify_quadric(p)
        seen = Counter()
        notes = Counter()
        for _ in range(cfg.conjugates):
            q, _, _ = random_conjugate(p, rng)
            tq, wit = classify_quadric(q)
            seen[str(tq)] += 1
            notes[wit.field_note.split(":")[0]] += int(check_witness(q, tq, wit))
        dt = time.perf_counter() - t0
        print(f"{tag:8s} -> {str(t):28s} conjugates {dict(seen)} witnesses {dict(notes)} {dt:.2f}s")


if __name__ == "__main__":
    main(from_args(CatalogConfig))
