"""Run the parametrized normal form on the seed inputs and print invariants and A."""
import time

from leviflat.config import PipelineConfig, from_args
from leviflat.normal_form import X, CRParametrization, normal_form, stabilizer
from leviflat.parse import parse_series
from leviflat.series import Series


def main(cfg: PipelineConfig) -> None:
    D = cfg.weight
    for a in cfg.seeds:
        for r in ("0", "zb^3"):
            t0 = time.perf_counter()
            p = CRParametrization(parse_series(a, X), Series.zero(X), parse_series(r, X))
            res = normal_form(p, D)
            inv = res.invariants.to_json() if res.invariants else "quadric"
            stab = stabilizer(res.A).to_json() if not res.A.is_zero() else None
            print(f"a = {a}, r = {r}")
            print(f"  invariants {inv}  rounds {len(res.rounds)}  verified {res.verdict.verified}"
                  f"  normalized {res.normalized}  stabilizer {stab}  {time.perf_counter() - t0:.2f}s")
            print(f"  A = {res.A}")


if __name__ == "__main__":
    main(from_args(PipelineConfig))
