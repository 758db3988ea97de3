"""First-order sensitivity analysis at the nominal point.

The Jacobian is taken with respect to the statistical (non-Fixed)
parameters only.  Columns are also scaled by each parameter's dispersion
(its standard deviation) so that influences of parameters with different
units and distribution kinds can be ranked against each other.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .devices import DeviceError
from .problem import DesignProblem

TINY_FLOOR = 1e-30
DEFAULT_REL_STEP = 1e-6


class SensitivityError(RuntimeError):
    pass


class Scheme(str, enum.Enum):
    CENTRAL = "central"
    FORWARD = "forward"
    ANALYTIC = "analytic"


@dataclass
class SensitivityReport:
    metrics: list
    parameters: list
    nominal_metrics: dict
    jacobian: np.ndarray  # (metric, parameter)
    scaled: np.ndarray
    ranking: dict = field(default_factory=dict)
    scheme: Scheme = Scheme.CENTRAL

    def entry(self, metric: str, parameter: str) -> float:
        return float(self.jacobian[self.metrics.index(metric), self.parameters.index(parameter)])

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "metrics": list(self.metrics),
            "parameters": list(self.parameters),
            "nominal_metrics": dict(self.nominal_metrics),
            "jacobian": self.jacobian.tolist(),
            "scaled": self.scaled.tolist(),
            "ranking": {k: list(v) for k, v in self.ranking.items()},
        }


@dataclass
class LinearModel:
    """First-order model of one metric about the nominal point."""

    metric: str
    value_at_nominal: float
    parameters: list
    gradient: np.ndarray
    nominal: np.ndarray = None

    def __call__(self, x_stat) -> float:
        """Linear prediction at values of the statistical parameters."""
        return self.value_at_nominal + float(np.dot(self.gradient, np.asarray(x_stat) - self.nominal))


def _step(x: float, rel_step: float) -> float:
    return rel_step * max(abs(x), TINY_FLOOR)


def _eval(problem, x, metrics, name, value):
    try:
        return problem.evaluate(x, metrics)
    except DeviceError as exc:
        raise SensitivityError(
            f"metric evaluation failed with {name} = {float(value)!r}: {exc}"
        ) from exc


def jacobian(problem: DesignProblem, scheme=Scheme.CENTRAL, rel_step: float = DEFAULT_REL_STEP) -> SensitivityReport:
    """Jacobian of every declared metric w.r.t. the statistical parameters."""
    scheme = Scheme(scheme)
    if not 0 < rel_step <= 0.1:
        raise ValueError(f"rel_step must lie in (0, 0.1], got {rel_step!r}")
    metrics = list(problem.metrics)
    stat = problem.statistical
    idx = problem.statistical_indices
    x0 = problem.nominal_values()
    nominal_metrics = problem.evaluate(x0, metrics)
    J = np.zeros((len(metrics), len(stat)))

    if scheme is Scheme.ANALYTIC:
        for i, m in enumerate(metrics):
            J[i] = problem.gradient(m, x0)[idx]
    else:
        for j, (k, p) in enumerate(zip(idx, stat)):
            h = _step(x0[k], rel_step)
            hi = x0.copy()
            hi[k] += h
            f_hi = _eval(problem, hi, metrics, p.name, hi[k])
            if scheme is Scheme.CENTRAL:
                lo = x0.copy()
                lo[k] -= h
                f_lo = _eval(problem, lo, metrics, p.name, lo[k])
            else:
                lo, f_lo = x0, nominal_metrics
            # divide by the representable step actually taken
            dx = hi[k] - lo[k]
            for i, m in enumerate(metrics):
                J[i, j] = (f_hi[m] - f_lo[m]) / dx

    scale = np.array([p.dist.std for p in stat])
    scaled = J * scale
    names = [p.name for p in stat]
    ranking = {}
    for i, m in enumerate(metrics):
        order = sorted(range(len(names)), key=lambda j: -abs(scaled[i, j]))
        ranking[m] = [names[j] for j in order]
    return SensitivityReport(metrics, names, nominal_metrics, J, scaled, ranking, scheme)


def most_sensitive(report: SensitivityReport, metric: str, k: int) -> list:
    if metric not in report.ranking:
        raise KeyError(f"metric {metric!r} not in report")
    if not 1 <= k <= len(report.parameters):
        raise ValueError(f"k must lie in [1, {len(report.parameters)}], got {k}")
    return report.ranking[metric][:k]


def linearize(problem: DesignProblem, metric: str) -> LinearModel:
    """Analytic first-order model of ``metric`` about the nominal point."""
    if metric not in problem.metrics:
        raise KeyError(f"metric {metric!r} not declared in the problem")
    x0 = problem.nominal_values()
    idx = problem.statistical_indices
    value = problem.evaluate(x0, [metric])[metric]
    grad = problem.gradient(metric, x0)[idx]
    return LinearModel(metric, value, [problem.parameters[k].name for k in idx], grad, x0[idx])
