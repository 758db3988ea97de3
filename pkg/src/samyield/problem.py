"""The unit of analysis: a device binding, statistical parameters and specs."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .devices import DEVICE_KINDS, DeviceKind, UnknownMetricError, evaluate_gradient
from .distributions import Distribution, Fixed, Gaussian


class ProblemError(ValueError):
    pass


class Relation(str, enum.Enum):
    GE = "ge"
    LE = "le"


@dataclass(frozen=True)
class Specification:
    metric: str
    relation: Relation
    bound: float

    def __post_init__(self):
        if not math.isfinite(self.bound):
            raise ProblemError(f"spec bound must be finite, got {self.bound!r}")
        object.__setattr__(self, "relation", Relation(self.relation))

    def holds(self, value):
        """Elementwise pass test; NaN (a failed evaluation) never passes."""
        if self.relation is Relation.GE:
            return np.asarray(value) >= self.bound
        return np.asarray(value) <= self.bound

    def margin(self, value):
        """Signed distance to the bound, positive on the passing side."""
        if self.relation is Relation.GE:
            return value - self.bound
        return self.bound - value

    @property
    def label(self) -> str:
        return f"{self.metric} {self.relation.value} {self.bound!r}"


@dataclass(frozen=True)
class StatisticalParameter:
    name: str
    nominal: float
    dist: Distribution

    def __post_init__(self):
        if not math.isfinite(self.nominal):
            raise ProblemError(f"parameter {self.name!r}: nominal must be finite")
        if isinstance(self.dist, Gaussian) and self.dist.mu != self.nominal:
            raise ProblemError(f"parameter {self.name!r}: gaussian mean must equal the nominal")
        if isinstance(self.dist, Fixed) and self.dist.value != self.nominal:
            raise ProblemError(f"parameter {self.name!r}: fixed value must equal the nominal")
        if not self.dist.contains(self.nominal):
            raise ProblemError(
                f"parameter {self.name!r}: nominal {self.nominal!r} outside the "
                f"distribution support {self.dist.support}"
            )

    @property
    def is_fixed(self) -> bool:
        return self.dist.is_fixed


Binding = Union[str, float]


@dataclass
class DesignProblem:
    device: str
    parameters: list = field(default_factory=list)
    bindings: dict = field(default_factory=dict)
    metrics: list = field(default_factory=list)
    specs: list = field(default_factory=list)
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.device not in DEVICE_KINDS:
            raise ProblemError(f"unknown device kind {self.device!r}")
        kind = self.kind
        for key in self.options:
            if not kind.has_option(key):
                raise ProblemError(f"device {self.device!r} has no option {key!r}")
        names = [p.name for p in self.parameters]
        if len(set(names)) != len(names):
            raise ProblemError("parameter names must be unique")
        for fld, target in self.bindings.items():
            if not kind.has_field(fld):
                raise ProblemError(f"device {self.device!r} has no field {fld!r}")
            if isinstance(target, str) and target not in names:
                raise ProblemError(f"binding {fld!r} references undeclared parameter {target!r}")
        for m in self.metrics:
            if m not in kind.metrics:
                raise ProblemError(f"device {self.device!r} has no metric {m!r}")
        for s in self.specs:
            if s.metric not in self.metrics:
                raise ProblemError(f"spec references undeclared metric {s.metric!r}")

    # -- structure ----------------------------------------------------------

    @property
    def kind(self) -> DeviceKind:
        return DEVICE_KINDS[self.device]

    @property
    def param_names(self) -> list:
        return [p.name for p in self.parameters]

    @property
    def statistical(self) -> list:
        """Parameters that actually vary (everything except Fixed)."""
        return [p for p in self.parameters if not p.is_fixed]

    @property
    def statistical_indices(self) -> list:
        return [i for i, p in enumerate(self.parameters) if not p.is_fixed]

    def parameter(self, name: str) -> StatisticalParameter:
        for p in self.parameters:
            if p.name == name:
                return p
        raise ProblemError(f"no parameter named {name!r}")

    def index_of(self, name: str) -> int:
        names = self.param_names
        if name not in names:
            raise ProblemError(f"no parameter named {name!r}")
        return names.index(name)

    def nominal_values(self) -> np.ndarray:
        return np.array([p.nominal for p in self.parameters], dtype=float)

    def field_values(self, x: Optional[np.ndarray] = None) -> dict:
        """Device field values for parameter vector(s) ``x`` (last axis = parameters)."""
        if x is None:
            x = self.nominal_values()
        x = np.asarray(x, dtype=float)
        index = {name: i for i, name in enumerate(self.param_names)}
        values = {}
        for fld in self.kind.field_names(self.bindings):
            target = self.bindings.get(fld)
            if target is None:
                values[fld] = self.kind.default(fld)
            elif isinstance(target, str):
                values[fld] = x[..., index[target]]
            else:
                values[fld] = float(target)
        return values

    def model_at(self, x: Optional[np.ndarray] = None):
        return self.kind.build(self.field_values(x), self.options)

    def _check_metric(self, metric):
        if metric not in self.metrics:
            raise UnknownMetricError(f"metric {metric!r} not declared in the problem")

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, x: Optional[np.ndarray] = None, metrics: Optional[Sequence[str]] = None) -> dict:
        """Metric values at a single parameter vector (nominal by default).

        Raises the device's domain error if the point is not physical.
        """
        metrics = list(self.metrics if metrics is None else metrics)
        model = self.model_at(x)
        out = {}
        for m in metrics:
            self._check_metric(m)
            out[m] = float(getattr(model, m)())
        return out

    def evaluate_batch(self, X: np.ndarray, metrics: Optional[Sequence[str]] = None):
        """Vectorized evaluation over rows of ``X``.

        Returns ``(values, valid)`` where ``values`` maps metric name to an
        array with NaN on rows that fell outside the device domain or
        produced a non-finite result.
        """
        metrics = list(self.metrics if metrics is None else metrics)
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n = X.shape[0]
        values = {k: np.broadcast_to(v, (n,)).astype(float) for k, v in self.field_values(X).items()}
        valid = np.broadcast_to(self.kind.valid_mask(values), (n,)).copy()
        safe = {k: np.where(valid, v, 1.0) for k, v in values.items()}
        model = self.kind.build(safe, self.options)
        out = {}
        for m in metrics:
            self._check_metric(m)
            y = np.broadcast_to(np.asarray(getattr(model, m)(), dtype=float), (n,)).copy()
            valid &= np.isfinite(y)
            out[m] = y
        for m in metrics:
            out[m][~valid] = np.nan
        return out, valid

    def gradient(self, metric: str, x: Optional[np.ndarray] = None) -> np.ndarray:
        """Analytical d(metric)/d(parameter) for every parameter (chain rule over bindings)."""
        self._check_metric(metric)
        partials = evaluate_gradient(self.model_at(x), metric)
        grad = np.zeros(len(self.parameters))
        index = {name: i for i, name in enumerate(self.param_names)}
        for fld, target in self.bindings.items():
            if isinstance(target, str):
                grad[index[target]] += float(partials[fld])
        return grad

    def check_batch(self, X: np.ndarray):
        """Per-spec and joint pass masks over rows of ``X``.

        Returns ``(joint, per_spec, valid)``; ``per_spec`` is a list in spec order.
        """
        needed = list(dict.fromkeys(s.metric for s in self.specs))
        values, valid = self.evaluate_batch(X, needed)
        per_spec = [s.holds(values[s.metric]) for s in self.specs]
        joint = np.ones(valid.shape, dtype=bool)
        for mask in per_spec:
            joint &= mask
        return joint, per_spec, valid

    def passes(self, x: Optional[np.ndarray] = None) -> bool:
        joint, _, _ = self.check_batch(self.nominal_values() if x is None else x)
        return bool(joint[0])
