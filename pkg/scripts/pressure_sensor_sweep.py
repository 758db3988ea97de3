"""Width/length design-space map of the pressure sensor.

Prints the pass/fail grid (``*`` pass, ``o`` fail, ``@`` nominal, length
growing upward) and the grid yield, and optionally writes the CSV for
external plotting.

    python scripts/pressure_sensor_sweep.py --n 31 --csv sweep.csv
"""
import argparse
from pathlib import Path

from samyield import load
from samyield.sweep import Axis, run_sweep

DESIGNS = Path(__file__).resolve().parent.parent / "designs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--design", default=str(DESIGNS / "pressure_sensor.sam"))
    ap.add_argument("--w", default="80e-6:120e-6", help="width range min:max")
    ap.add_argument("--l", default="290e-6:350e-6", help="length range min:max")
    ap.add_argument("--n", type=int, default=25, help="points per axis")
    ap.add_argument("--csv", default=None, help="write x,y,pass rows here")
    args = ap.parse_args()

    p = load(args.design)
    ax = Axis.parse(f"w:{args.w}:{args.n}")
    ay = Axis.parse(f"l:{args.l}:{args.n}")
    m = run_sweep(p, ax, ay)
    print(m.render())
    print(f"\nw: {ax.lo:g} .. {ax.hi:g} (left to right), l: {ay.lo:g} .. {ay.hi:g} (bottom to top)")
    print(f"grid yield {m.yield_fraction:.3f}, {len(m.boundary_cells)} boundary cells, "
          f"{m.n_eval_failed} invalid points")
    if args.csv:
        Path(args.csv).write_text(m.to_csv())
        print(f"wrote {args.csv}")


if __name__ == "__main__":
    main()
