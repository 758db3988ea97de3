"""Worst-case distance (WCD) yield analysis.

Statistical parameters are mapped to u-space, where each is an
independent standard normal variate.  The worst-case point of a spec is
the point of its boundary closest to the origin; its signed distance
``beta`` converts to a yield estimate through ``Phi(beta)``.  ``beta`` is
positive when the origin (the design's median point) meets the spec and
negative when it violates it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .devices import DeviceError
from .distributions import std_normal_cdf
from .problem import DesignProblem, Specification
from .sensitivity import LinearModel, linearize

BOUNDARY_RTOL = 1e-6


class WorstCaseError(RuntimeError):
    pass


class DegenerateGradientError(WorstCaseError):
    pass


class ConvergenceError(WorstCaseError):
    def __init__(self, message, last_u=None, last_x=None):
        super().__init__(message)
        self.last_u = last_u
        self.last_x = last_x


class NoBoundaryError(WorstCaseError):
    pass


@dataclass
class WorstCaseResult:
    spec: Specification
    beta: float
    worst_case_u: np.ndarray
    worst_case_x: np.ndarray
    parameters: list
    iterations: int = 1
    method: str = "linear"

    @property
    def linear_yield(self) -> float:
        return yield_from_beta(self.beta)

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.label,
            "method": self.method,
            "beta": self.beta,
            "linear_yield": self.linear_yield,
            "iterations": self.iterations,
            "parameters": list(self.parameters),
            "worst_case_u": [float(v) for v in self.worst_case_u],
            "worst_case_x": [float(v) for v in self.worst_case_x],
        }


def yield_from_beta(beta: float) -> float:
    """Linearized yield for worst-case distance ``beta``: ``(1 + erf(beta/sqrt 2)) / 2``."""
    return float(std_normal_cdf(beta))


class USpace:
    """Coordinate map between u-space and full parameter vectors."""

    def __init__(self, problem: DesignProblem):
        self.problem = problem
        self.idx = problem.statistical_indices
        self.params = [problem.parameters[k] for k in self.idx]
        self.x_nominal = problem.nominal_values()
        if not self.params:
            raise DegenerateGradientError("problem has no statistical parameters")

    @property
    def names(self):
        return [p.name for p in self.params]

    def to_x(self, u) -> np.ndarray:
        """Full parameter vector(s); ``u`` may be (d,) or (n, d)."""
        u = np.asarray(u, dtype=float)
        x = np.broadcast_to(self.x_nominal, u.shape[:-1] + self.x_nominal.shape).copy()
        for j, (k, p) in enumerate(zip(self.idx, self.params)):
            x[..., k] = p.dist.from_u(u[..., j])
        return x

    def stat_x(self, u) -> np.ndarray:
        return self.to_x(u)[..., self.idx]

    def to_u(self, x_stat) -> np.ndarray:
        return np.array([p.dist.to_u(v) for p, v in zip(self.params, x_stat)], dtype=float)

    @property
    def u_nominal(self) -> np.ndarray:
        return self.to_u(self.x_nominal[self.idx])

    def jacobian_diag(self, u) -> np.ndarray:
        return np.array([p.dist.dx_du(v) for p, v in zip(self.params, u)], dtype=float)

    def gradient(self, metric: str, u) -> np.ndarray:
        """d(metric)/du by the chain rule through ``from_u``."""
        g = self.problem.gradient(metric, self.to_x(u))[self.idx]
        return g * self.jacobian_diag(u)


def _project_origin(c: float, gamma: np.ndarray, bound: float):
    """Closest point to the origin on the hyperplane ``c + gamma.u = bound``."""
    norm2 = float(gamma @ gamma)
    if not norm2 > 0 or not math.isfinite(norm2):
        raise DegenerateGradientError("u-space gradient vanishes; no finite worst-case distance")
    return (bound - c) / norm2 * gamma, math.sqrt(norm2)


def wcd_linear(lin: LinearModel, problem: DesignProblem, spec: Specification) -> WorstCaseResult:
    """One-shot WCD on the linearization ``lin`` of the spec's metric."""
    if lin.metric != spec.metric:
        raise ValueError(f"linear model is for {lin.metric!r}, spec is on {spec.metric!r}")
    space = USpace(problem)
    u0 = space.u_nominal
    gamma = np.asarray(lin.gradient, dtype=float) * space.jacobian_diag(u0)
    # the linear model expressed about the u-space origin
    c = lin.value_at_nominal - float(gamma @ u0)
    u_star, norm = _project_origin(c, gamma, spec.bound)
    beta = spec.margin(c) / norm
    return WorstCaseResult(
        spec=spec,
        beta=float(beta),
        worst_case_u=u_star,
        worst_case_x=space.stat_x(u_star),
        parameters=space.names,
        iterations=1,
        method="linear",
    )


def _metric_at(space: USpace, metric: str, u) -> float:
    x = space.to_x(u)
    values, valid = space.problem.evaluate_batch(x[None, :], [metric])
    return float(values[metric][0]) if valid[0] else math.nan


def wcd_relinearized(
    problem: DesignProblem,
    spec: Specification,
    max_iter: int = 50,
    tol: float = 1e-9,
) -> WorstCaseResult:
    """WCD on the nonlinear metric by repeated linearization.

    Each step linearizes the metric at the current candidate and jumps to
    the origin's projection onto that linearized boundary.  Stops once the
    candidate moves less than ``tol`` (in u-space) and the metric there is
    within ``1e-6`` relative of the bound.  ``iterations`` counts the
    moves made; a metric that is linear in u-space converges in one.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be > 0")
    space = USpace(problem)
    metric, bound = spec.metric, spec.bound
    origin = np.zeros(len(space.params))
    f_origin = _metric_at(space, metric, origin)
    if math.isnan(f_origin):
        raise WorstCaseError("metric cannot be evaluated at the u-space origin")
    scale = max(abs(bound), abs(f_origin)) or 1.0

    u = space.u_nominal
    f = _metric_at(space, metric, u)
    moves = 0
    while True:
        gamma = space.gradient(metric, u)
        u_new, _ = _project_origin(f - float(gamma @ u), gamma, bound)
        if np.linalg.norm(u_new - u) <= tol and abs(f - bound) <= BOUNDARY_RTOL * scale:
            break
        if moves >= max_iter:
            raise ConvergenceError(
                f"no convergence after {max_iter} relinearizations "
                f"(last step {np.linalg.norm(u_new - u):.3g}, residual {f - bound:.3g})",
                last_u=u,
                last_x=space.stat_x(u),
            )
        # halve the step while the candidate leaves the device domain
        step = u_new - u
        for _ in range(60):
            f_new = _metric_at(space, metric, u + step)
            if not math.isnan(f_new):
                break
            step = step / 2
        else:
            raise ConvergenceError("relinearization left the device domain", last_u=u, last_x=space.stat_x(u))
        u = u + step
        f = f_new
        moves += 1

    margin = spec.margin(f_origin)
    beta = math.copysign(float(np.linalg.norm(u)), margin) if margin != 0 else 0.0
    return WorstCaseResult(
        spec=spec,
        beta=beta,
        worst_case_u=u,
        worst_case_x=space.stat_x(u),
        parameters=space.names,
        iterations=moves,
        method="relinearized",
    )


def wcd_brute_oracle(
    problem: DesignProblem,
    spec: Specification,
    grid_radius: float = 5.0,
    grid_points_per_axis: int = 501,
) -> float:
    """Smallest ``|u|`` on a u-space grid at which the spec fails.

    Independent check on the solvers; accurate to one grid diagonal.
    Returns 0 when the origin itself fails.  Failed evaluations count as
    violations.
    """
    space = USpace(problem)
    d = len(space.params)
    if d > 3:
        raise ValueError(f"grid oracle supports at most 3 statistical parameters, got {d}")
    if grid_points_per_axis < 11:
        raise ValueError("grid_points_per_axis must be >= 11")
    if not grid_radius > 0:
        raise ValueError("grid_radius must be > 0")

    def violates(U):
        values, _ = problem.evaluate_batch(space.to_x(U), [spec.metric])
        return ~spec.holds(values[spec.metric])

    if violates(np.zeros((1, d)))[0]:
        return 0.0
    axis = np.linspace(-grid_radius, grid_radius, grid_points_per_axis)
    best = math.inf
    # one slab per value of the first coordinate keeps memory bounded
    rest = np.stack(np.meshgrid(*([axis] * (d - 1)), indexing="ij"), axis=-1).reshape(-1, d - 1) if d > 1 else np.zeros((1, 0))
    for a in axis:
        U = np.column_stack([np.full(len(rest), a), rest])
        bad = violates(U)
        if bad.any():
            best = min(best, float(np.sqrt((U[bad] ** 2).sum(axis=1)).min()))
    if not math.isfinite(best):
        raise NoBoundaryError(f"no violating point within radius {grid_radius}")
    return best


def grid_error(grid_radius: float, grid_points_per_axis: int, dims: int) -> float:
    """Diagonal spacing of the oracle grid, its error bound."""
    return 2 * grid_radius / (grid_points_per_axis - 1) * math.sqrt(dims)


@dataclass
class WorstCaseSummary:
    results: list
    joint_linear_yield: float

    def to_dict(self) -> dict:
        return {
            "specs": [r.to_dict() for r in self.results],
            "joint_linear_yield": self.joint_linear_yield,
        }


def analyze(
    problem: DesignProblem,
    method: str = "relinearized",
    max_iter: int = 50,
    tol: float = 1e-9,
) -> WorstCaseSummary:
    """Per-spec WCD; the joint figure is the minimum of per-spec yields.

    The minimum is an optimistic bound on the true joint yield, not an
    estimate of it.
    """
    results = []
    for spec in problem.specs:
        if method == "linear":
            results.append(wcd_linear(linearize(problem, spec.metric), problem, spec))
        elif method == "relinearized":
            results.append(wcd_relinearized(problem, spec, max_iter, tol))
        else:
            raise ValueError(f"unknown WCD method {method!r}")
    joint = min((r.linear_yield for r in results), default=1.0)
    return WorstCaseSummary(results, joint)
