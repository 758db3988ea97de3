"""Worst-case distance estimates against Monte Carlo and the grid oracle.

For each bundled single-spec design with at most three statistical
parameters, prints beta from the one-shot and relinearized solvers, the
brute-force grid value, and the implied yields next to a Monte Carlo run.

    python scripts/wcd_vs_mc.py --samples 200000
"""
import argparse
from pathlib import Path

from samyield import load, run_monte_carlo
from samyield.sensitivity import linearize
from samyield.worstcase import (
    WorstCaseError, grid_error, wcd_brute_oracle, wcd_linear, wcd_relinearized, yield_from_beta,
)

DESIGNS = Path(__file__).resolve().parent.parent / "designs"
STEMS = ("linear", "cantilever", "cantilever_uniform", "cantilever_2param", "pressure_sensor")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--grid-radius", type=float, default=3.5)
    ap.add_argument("--grid-points", type=int, default=501)
    args = ap.parse_args()

    head = f"{'design':<20}{'b_lin':>8}{'b_relin':>9}{'b_grid':>8}{'+-':>7}{'Y_lin':>8}{'Y_relin':>9}{'Y_mc':>8}"
    print(head)
    for stem in STEMS:
        p = load(DESIGNS / f"{stem}.sam")
        s = p.specs[0]
        lin = wcd_linear(linearize(p, s.metric), p, s)
        try:
            rel = wcd_relinearized(p, s).beta
        except WorstCaseError:
            rel = float("nan")
        grid = wcd_brute_oracle(p, s, args.grid_radius, args.grid_points)
        err = grid_error(args.grid_radius, args.grid_points, len(p.statistical))
        mc = run_monte_carlo(p, args.samples, args.seed).yield_estimate
        print(f"{stem:<20}{lin.beta:>8.4f}{rel:>9.4f}{grid:>8.4f}{err:>7.3f}"
              f"{lin.linear_yield:>8.4f}{yield_from_beta(rel):>9.4f}{mc:>8.4f}")


if __name__ == "__main__":
    main()
