"""Monte Carlo yield of the calibrated cantilever against a 49 kHz floor.

Runs the three bundled beam designs (no width variation, a narrow uniform
width spread, and the same spread on a beam twice as wide) and prints the
estimated yield next to the closed-form answer.

    python scripts/cantilever_yield.py --samples 1000000 --seed 7
"""
import argparse
from pathlib import Path

from samyield import load, run_monte_carlo
from samyield.montecarlo import wilson_interval

DESIGNS = Path(__file__).resolve().parent.parent / "designs"
F_MIN = 49e3


def exact_yield(problem):
    w = problem.parameters[0]
    if w.dist.is_fixed:
        return float(problem.passes())
    c_f = problem.options["calib_f"]
    l = problem.field_values()["l"]
    w_min = (F_MIN / c_f) ** (2 / 3) * l
    return 1.0 - float(w.dist.cdf(w_min)) if w_min > w.dist.support[0] else 1.0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    print(f"{'design':<22}{'f_r nominal':>14}{'MC yield':>11}{'95% CI':>22}{'exact':>10}")
    for stem in ("cantilever_fixed", "cantilever_uniform", "cantilever_wide"):
        p = load(DESIGNS / f"{stem}.sam")
        res = run_monte_carlo(p, args.samples, args.seed)
        lo, hi = wilson_interval(res.n_pass, res.n_samples)
        f0 = p.evaluate()["resonant_frequency"]
        print(f"{stem:<22}{f0:>12.1f}Hz{res.yield_estimate:>11.4f}   [{lo:.4f}, {hi:.4f}]{exact_yield(p):>10.4f}")


if __name__ == "__main__":
    main()
