"""Run the bundled fixture corpus and print one line per fixture."""
import argparse
import json

from leviflat.fixtures import run_all


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--verbose", action="store_true")
    args = ap.parse_args()
    for res in run_all(args.jobs):
        print(f"{'PASS' if res['passed'] else 'FAIL'}  {res['name']}")
        if args.verbose:
            print(json.dumps(res, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
