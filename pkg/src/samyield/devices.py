"""Closed-form lumped device models.

Two physical devices are provided:

* ``CantileverModel``: beam spring constant ``K = E t w^3 / l^3`` and a
  resonant frequency ``f_r = c_f * sqrt(w^3 / l^3)``.  The frequency law is
  a proportionality, so its level ``c_f`` has to be calibrated
  (see :func:`calibrate_frequency_constant`).
* ``PressureSensorModel``: touchdown force of a membrane over a chamber of
  gap ``g0``, modelled as a clamped-clamped strip under a centre load,
  ``F_td = k * g0`` with ``k = 192 E I / l^3`` and ``I = w t^3 / 12``.

A third, ``LinearResponseModel``, is a synthetic affine metric used to
exercise the statistical machinery against closed-form answers.

Model fields may be numpy arrays; everything broadcasts.  All units SI.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

MetricSet = Dict[str, float]

FOUR_PI_SQ = 4.0 * math.pi**2


class DeviceError(ValueError):
    pass


class DeviceDomainError(DeviceError):
    """Model input outside its physical domain (e.g. a nonpositive length)."""


class UnknownMetricError(DeviceError):
    pass


class UncalibratedModelError(DeviceError):
    pass


def _require_positive(**kwargs):
    for name, value in kwargs.items():
        value = np.asarray(value)
        if not np.all(value > 0):
            shown = float(value) if value.ndim == 0 else "a nonpositive entry"
            raise DeviceDomainError(f"{name} must be strictly positive, got {shown}")


# -- formulas ------------------------------------------------------------


def spring_constant(E, t, w, l):
    """Beam spring constant ``E t w^3 / l^3`` in N/m."""
    _require_positive(E=E, t=t, w=w, l=l)
    return E * t * w**3 / l**3


def spring_constant_partials(E, t, w, l) -> dict:
    k = spring_constant(E, t, w, l)
    return {"E": k / E, "t": k / t, "w": 3.0 * k / w, "l": -3.0 * k / l}


def mass_change(k, f0, f1):
    """End mass change implied by a resonance shift from ``f0`` to ``f1``.

    ``dm = k / (4 pi^2) * (1/f1^2 - 1/f0^2)``; positive when ``f1 < f0``.
    """
    _require_positive(k=k, f0=f0, f1=f1)
    return k / FOUR_PI_SQ * (1.0 / f1**2 - 1.0 / f0**2)


def calibrate_frequency_constant(w0, l0, f_target):
    """Return ``c_f`` such that the cantilever at ``(w0, l0)`` resonates at ``f_target``."""
    _require_positive(w0=w0, l0=l0, f_target=f_target)
    return f_target / math.sqrt(w0**3 / l0**3)


# -- models ----------------------------------------------------------------


@dataclass(frozen=True)
class CantileverModel:
    E: float
    t: float
    w: float
    l: float
    c_f: float = 0.0

    FIELDS = ("E", "t", "w", "l")
    METRICS = ("spring_constant", "resonant_frequency")

    def __post_init__(self):
        _require_positive(E=self.E, t=self.t, w=self.w, l=self.l)
        if not self.c_f >= 0:
            raise DeviceDomainError(f"c_f must be >= 0, got {self.c_f!r}")

    def spring_constant(self):
        return spring_constant(self.E, self.t, self.w, self.l)

    def resonant_frequency(self):
        if self.c_f == 0:
            raise UncalibratedModelError(
                "resonant_frequency needs a calibrated frequency constant (calib_f > 0)"
            )
        return self.c_f * np.sqrt(self.w**3 / self.l**3)

    def gradient(self, metric: str) -> dict:
        if metric == "spring_constant":
            return spring_constant_partials(self.E, self.t, self.w, self.l)
        if metric == "resonant_frequency":
            f = self.resonant_frequency()
            zero = 0.0 * f
            return {"E": zero, "t": zero, "w": 1.5 * f / self.w, "l": -1.5 * f / self.l}
        raise UnknownMetricError(f"cantilever has no metric {metric!r}")


@dataclass(frozen=True)
class PressureSensorModel:
    E: float
    t: float
    w: float
    l: float
    g0: float

    FIELDS = ("E", "t", "w", "l", "g0")
    METRICS = ("touchdown_force",)

    def __post_init__(self):
        _require_positive(E=self.E, t=self.t, w=self.w, l=self.l, g0=self.g0)

    def touchdown_force(self):
        # 192 E I / l^3 with I = w t^3 / 12, times the gap
        return 16.0 * self.E * self.w * self.t**3 * self.g0 / self.l**3

    def gradient(self, metric: str) -> dict:
        if metric != "touchdown_force":
            raise UnknownMetricError(f"pressure_sensor has no metric {metric!r}")
        f = self.touchdown_force()
        return {
            "E": f / self.E,
            "t": 3.0 * f / self.t,
            "w": f / self.w,
            "l": -3.0 * f / self.l,
            "g0": f / self.g0,
        }


@dataclass(frozen=True)
class LinearResponseModel:
    """``offset + sum_k c_k x_k`` over named inputs."""

    values: dict = field(default_factory=dict)
    coeffs: dict = field(default_factory=dict)
    offset: float = 0.0

    METRICS = ("linear_response",)

    def linear_response(self):
        total = self.offset
        for name, x in self.values.items():
            total = total + self.coeffs.get(name, 1.0) * x
        return total

    def gradient(self, metric: str) -> dict:
        if metric != "linear_response":
            raise UnknownMetricError(f"linear device has no metric {metric!r}")
        return {name: self.coeffs.get(name, 1.0) + 0.0 * np.asarray(x)
                for name, x in self.values.items()}


def evaluate(model, metric_names) -> MetricSet:
    """Evaluate the named metrics of ``model``; one entry per name."""
    out = {}
    for name in metric_names:
        if name not in model.METRICS:
            raise UnknownMetricError(f"{type(model).__name__} has no metric {name!r}")
        out[name] = getattr(model, name)()
    return out


def evaluate_gradient(model, metric: str) -> dict:
    """Analytical partials of ``metric`` keyed by model field name."""
    if metric not in model.METRICS:
        raise UnknownMetricError(f"{type(model).__name__} has no metric {metric!r}")
    return model.gradient(metric)


# -- device kinds, as named in design files ----------------------------------


class DeviceKind:
    """Binds a device keyword to its model, its bindable fields and options."""

    name: str
    metrics: tuple
    options: dict

    def has_field(self, name: str) -> bool:
        raise NotImplementedError

    def has_option(self, name: str) -> bool:
        return name in self.options

    def field_names(self, bindings) -> tuple:
        raise NotImplementedError

    def default(self, name: str) -> float:
        raise NotImplementedError

    def valid_mask(self, values: dict) -> np.ndarray:
        """Rows where every field lies in the model's domain."""
        mask = True
        for v in values.values():
            mask = mask & (np.asarray(v) > 0) & np.isfinite(v)
        return np.asarray(mask)

    def build(self, values: dict, options: dict):
        raise NotImplementedError


class _PhysicalKind(DeviceKind):
    def __init__(self, name, model_cls, defaults, options):
        self.name = name
        self.model_cls = model_cls
        self.defaults = defaults
        self.options = options
        self.metrics = model_cls.METRICS

    def has_field(self, name):
        return name in self.defaults

    def field_names(self, bindings=None):
        return tuple(self.defaults)

    def default(self, name):
        return self.defaults[name]

    def build(self, values, options):
        kwargs = dict(values)
        if self.name == "cantilever":
            kwargs["c_f"] = options.get("calib_f", 0.0)
        return self.model_cls(**kwargs)


class _LinearKind(DeviceKind):
    name = "linear"
    metrics = LinearResponseModel.METRICS
    options = {"offset": 0.0}
    _field_re = re.compile(r"x[0-9]+")
    _coef_re = re.compile(r"c[0-9]+")

    def has_field(self, name):
        return bool(self._field_re.fullmatch(name))

    def has_option(self, name):
        return name == "offset" or bool(self._coef_re.fullmatch(name))

    def field_names(self, bindings=None):
        return tuple(sorted(bindings or (), key=lambda s: int(s[1:])))

    def default(self, name):
        return 0.0

    def valid_mask(self, values):
        mask = True
        for v in values.values():
            mask = mask & np.isfinite(v)
        return np.asarray(mask)

    def build(self, values, options):
        coeffs = {f"x{k[1:]}": v for k, v in options.items() if k != "offset"}
        return LinearResponseModel(dict(values), coeffs, options.get("offset", 0.0))


# Default geometry: single-crystal silicon, desk-scale MEMS dimensions.
SILICON_E = 169e9

DEVICE_KINDS: dict[str, DeviceKind] = {
    "cantilever": _PhysicalKind(
        "cantilever",
        CantileverModel,
        {"E": SILICON_E, "t": 2e-6, "w": 2e-6, "l": 100e-6},
        {"calib_f": 0.0},
    ),
    "pressure_sensor": _PhysicalKind(
        "pressure_sensor",
        PressureSensorModel,
        {"E": SILICON_E, "t": 1e-6, "w": 100e-6, "l": 300e-6, "g0": 2e-6},
        {},
    ),
    "linear": _LinearKind(),
}
