"""Two-parameter design-space sweeps.

Every point of an evenly spaced grid over two parameters is checked
against all specs, the other parameters held at nominal.  The yield of a
sweep is the passing fraction of the grid, i.e. the yield under a uniform
spread over the rectangle; it is not weighted by the process
distributions the way the Monte Carlo estimate is.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .problem import DesignProblem


class SweepError(ValueError):
    pass


class Axis(NamedTuple):
    name: str
    lo: float
    hi: float
    n: int

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)

    @classmethod
    def parse(cls, text: str) -> "Axis":
        """``name:min:max:n``, e.g. ``w:80e-6:120e-6:41``."""
        parts = text.split(":")
        if len(parts) != 4:
            raise SweepError(f"axis spec must be name:min:max:n, got {text!r}")
        name, lo, hi, n = parts
        try:
            return cls(name, float(lo), float(hi), int(n))
        except ValueError:
            raise SweepError(f"malformed axis spec {text!r}") from None


@dataclass
class YieldMap:
    axis_x: Axis
    axis_y: Axis
    passed: np.ndarray  # bool, shape (n_x, n_y); passed[i, j] at (x_i, y_j)
    nominal_index: Optional[tuple] = None
    n_eval_failed: int = 0
    boundary_cells: list = field(default_factory=list)

    @property
    def yield_fraction(self) -> float:
        return float(self.passed.mean())

    @property
    def x(self) -> np.ndarray:
        return self.axis_x.values

    @property
    def y(self) -> np.ndarray:
        return self.axis_y.values

    def to_dict(self) -> dict:
        return {
            "axis_x": self.axis_x._asdict(),
            "axis_y": self.axis_y._asdict(),
            "x": self.x.tolist(),
            "y": self.y.tolist(),
            "classification": self.passed.astype(int).tolist(),
            "yield_fraction": self.yield_fraction,
            "nominal_index": list(self.nominal_index) if self.nominal_index is not None else None,
            "boundary_cells": [list(c) for c in self.boundary_cells],
            "n_eval_failed": self.n_eval_failed,
        }

    def to_csv(self) -> str:
        """``x,y,pass`` rows, y in the outer loop."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "pass"])
        xs, ys = self.x, self.y
        for j, yv in enumerate(ys):
            for i, xv in enumerate(xs):
                w.writerow([repr(float(xv)), repr(float(yv)), int(self.passed[i, j])])
        return buf.getvalue()

    def render(self) -> str:
        """Text plot: ``*`` pass, ``o`` fail, ``@`` the nominal point; y grows upward."""
        rows = []
        for j in reversed(range(self.passed.shape[1])):
            row = []
            for i in range(self.passed.shape[0]):
                if self.nominal_index == (i, j):
                    row.append("@")
                else:
                    row.append("*" if self.passed[i, j] else "o")
            rows.append(" ".join(row))
        return "\n".join(rows)


def boundary_cells(passed: np.ndarray) -> list:
    """Cells ``(i, j)`` whose four corners are not all in the same class."""
    p = passed.astype(np.int8)
    corners = p[:-1, :-1] + p[1:, :-1] + p[:-1, 1:] + p[1:, 1:]
    ii, jj = np.nonzero((corners > 0) & (corners < 4))
    return [(int(i), int(j)) for i, j in zip(ii, jj)]


def _nearest(values: np.ndarray, v: float) -> Optional[int]:
    if not values[0] <= v <= values[-1]:
        return None
    return int(np.argmin(np.abs(values - v)))


def run_sweep(problem: DesignProblem, axis_x: Axis, axis_y: Axis, threads: int = 1) -> YieldMap:
    if axis_x.name == axis_y.name:
        raise SweepError("sweep axes must name distinct parameters")
    for ax in (axis_x, axis_y):
        if ax.name not in problem.param_names:
            raise SweepError(f"axis parameter {ax.name!r} not in problem")
        if ax.n < 2:
            raise SweepError(f"axis {ax.name!r} needs n >= 2")
        if not ax.lo < ax.hi:
            raise SweepError(f"axis {ax.name!r} needs min < max")
    if not problem.specs:
        raise SweepError("problem declares no specs to check")
    kx, ky = problem.index_of(axis_x.name), problem.index_of(axis_y.name)
    xs, ys = axis_x.values, axis_y.values

    def column(i):
        X = np.tile(problem.nominal_values(), (len(ys), 1))
        X[:, kx] = xs[i]
        X[:, ky] = ys
        joint, _, valid = problem.check_batch(X)
        return joint, int((~valid).sum())

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cols = list(pool.map(column, range(len(xs))))
    else:
        cols = [column(i) for i in range(len(xs))]
    passed = np.stack([c[0] for c in cols])
    failed = sum(c[1] for c in cols)

    nom = problem.nominal_values()
    ix, iy = _nearest(xs, nom[kx]), _nearest(ys, nom[ky])
    nominal_index = (ix, iy) if ix is not None and iy is not None else None
    return YieldMap(axis_x, axis_y, passed, nominal_index, failed, boundary_cells(passed))
