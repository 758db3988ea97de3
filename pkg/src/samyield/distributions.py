"""Process-variation models and the standard-normal ("u-space") map.

Every statistical parameter is described by one of four distributions.
Besides sampling, each non-degenerate distribution provides its CDF and
quantile and a monotone bijection to a standard normal variate::

    u = Phi^-1(F(x))        x = F^-1(Phi(u))

Gaussian parameters map affinely, so ``to_u(x) == (x - mu) / sigma``.
The other kinds are mapped by CDF matching.  Parameters are treated as
independent; there is no correlation model.

All methods accept scalars or numpy arrays and return the same shape.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special

ArrayLike = Union[float, np.ndarray]

SQRT2 = math.sqrt(2.0)
SQRT12 = math.sqrt(12.0)


class DistributionError(ValueError):
    """Invalid distribution parameters or an argument outside the domain."""


class UnsupportedOperation(DistributionError):
    """Operation not defined for the distribution (e.g. the CDF of Fixed)."""


def _ret(a):
    a = np.asarray(a, dtype=float)
    return float(a) if a.ndim == 0 else a


def _finite(name, value):
    if not math.isfinite(value):
        raise DistributionError(f"{name} must be finite, got {value!r}")


def std_normal_cdf(u: ArrayLike) -> ArrayLike:
    """Phi(u), the standard normal CDF, computed as erfc(-u/sqrt(2))/2.

    The erfc form keeps full relative precision in the lower tail, where
    ``0.5 * (1 + erf(...))`` would cancel.
    """
    return _ret(0.5 * special.erfc(-np.asarray(u, dtype=float) / SQRT2))


def std_normal_quantile(p: ArrayLike) -> ArrayLike:
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0.0) & (p < 1.0))):
        raise DistributionError("probability must lie in the open interval (0, 1)")
    return _ret(special.ndtri(p))


def std_normal_pdf(u: ArrayLike) -> ArrayLike:
    u = np.asarray(u, dtype=float)
    return _ret(np.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi))


def _check_p(p):
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0.0) & (p < 1.0))):
        raise DistributionError("probability must lie in the open interval (0, 1)")
    return p


class Distribution:
    """Common interface; concrete kinds are the dataclasses below."""

    kind: str = ""

    def sample(self, rng: np.random.Generator, size=None) -> ArrayLike:
        raise NotImplementedError

    def cdf(self, x: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def quantile(self, p: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def to_u(self, x: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def from_u(self, u: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def dx_du(self, u: ArrayLike) -> ArrayLike:
        """Derivative of ``from_u`` at ``u`` (used for u-space gradients)."""
        raise NotImplementedError

    @property
    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    @property
    def std(self) -> float:
        """Dispersion scale used to rank sensitivities."""
        raise NotImplementedError

    @property
    def is_fixed(self) -> bool:
        return False

    def contains(self, x: float) -> bool:
        lo, hi = self.support
        return lo <= x <= hi

    def _check_support(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        if np.any(~((x >= lo) & (x <= hi))):
            raise DistributionError(
                f"value outside the support [{lo}, {hi}] of {self.kind} distribution"
            )
        return x


@dataclass(frozen=True)
class Gaussian(Distribution):
    mu: float
    sigma: float
    kind = "gaussian"

    def __post_init__(self):
        _finite("mu", self.mu)
        _finite("sigma", self.sigma)
        if not self.sigma > 0:
            raise DistributionError(f"sigma must be > 0, got {self.sigma!r}")

    def sample(self, rng, size=None):
        return rng.normal(self.mu, self.sigma, size)

    def cdf(self, x):
        return std_normal_cdf((np.asarray(x, dtype=float) - self.mu) / self.sigma)

    def quantile(self, p):
        return _ret(self.mu + self.sigma * special.ndtri(_check_p(p)))

    def to_u(self, x):
        x = self._check_support(x)
        return _ret((x - self.mu) / self.sigma)

    def from_u(self, u):
        return _ret(self.mu + self.sigma * np.asarray(u, dtype=float))

    def dx_du(self, u):
        return _ret(np.full_like(np.asarray(u, dtype=float), self.sigma))

    @property
    def support(self):
        return (-math.inf, math.inf)

    @property
    def std(self):
        return self.sigma


@dataclass(frozen=True)
class Uniform(Distribution):
    lo: float
    hi: float
    kind = "uniform"

    def __post_init__(self):
        _finite("lo", self.lo)
        _finite("hi", self.hi)
        if not self.lo < self.hi:
            raise DistributionError(f"uniform needs lo < hi, got lo={self.lo!r} hi={self.hi!r}")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def sample(self, rng, size=None):
        return rng.uniform(self.lo, self.hi, size)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return _ret(np.clip((x - self.lo) / self.width, 0.0, 1.0))

    def quantile(self, p):
        return _ret(self.lo + self.width * _check_p(p))

    def to_u(self, x):
        x = self._check_support(x)
        # Work from whichever end is closer so tail probabilities keep precision.
        p_lo = (x - self.lo) / self.width
        p_hi = (self.hi - x) / self.width
        with np.errstate(divide="ignore"):
            u = np.where(p_lo <= 0.5, special.ndtri(p_lo), -special.ndtri(p_hi))
        return _ret(u)

    def from_u(self, u):
        u = np.asarray(u, dtype=float)
        x = np.where(
            u <= 0.0,
            self.lo + self.width * special.ndtr(u),
            self.hi - self.width * special.ndtr(-u),
        )
        return _ret(x)

    def dx_du(self, u):
        return _ret(self.width * np.asarray(std_normal_pdf(u)))

    @property
    def support(self):
        return (self.lo, self.hi)

    @property
    def std(self):
        return self.width / SQRT12


@dataclass(frozen=True)
class Exponential(Distribution):
    """Shifted exponential: ``offset + Exp(rate)``.

    The offset lets a physical dimension carry a hard minimum.
    """

    rate: float
    offset: float = 0.0
    kind = "exponential"

    def __post_init__(self):
        _finite("rate", self.rate)
        _finite("offset", self.offset)
        if not self.rate > 0:
            raise DistributionError(f"rate must be > 0, got {self.rate!r}")

    def sample(self, rng, size=None):
        return self.offset + rng.exponential(1.0 / self.rate, size)

    def cdf(self, x):
        z = self.rate * (np.asarray(x, dtype=float) - self.offset)
        return _ret(np.where(z <= 0.0, 0.0, -np.expm1(-np.maximum(z, 0.0))))

    def quantile(self, p):
        return _ret(self.offset - np.log1p(-_check_p(p)) / self.rate)

    def to_u(self, x):
        x = self._check_support(x)
        z = self.rate * (x - self.offset)
        p = -np.expm1(-z)
        with np.errstate(divide="ignore"):
            # Upper tail through the survival function exp(-z).
            u = np.where(p <= 0.5, special.ndtri(p), -special.ndtri(np.exp(-z)))
        return _ret(u)

    def from_u(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            z = np.where(
                u <= 0.0,
                -np.log1p(-special.ndtr(u)),
                -special.log_ndtr(-u),
            )
        return _ret(self.offset + z / self.rate)

    def dx_du(self, u):
        u = np.asarray(u, dtype=float)
        # phi(u) / (rate * Phi(-u)), evaluated in log space for large u
        log_ratio = -0.5 * u * u - 0.5 * math.log(2.0 * math.pi) - special.log_ndtr(-u)
        return _ret(np.exp(log_ratio) / self.rate)

    @property
    def support(self):
        return (self.offset, math.inf)

    @property
    def std(self):
        return 1.0 / self.rate


@dataclass(frozen=True)
class Fixed(Distribution):
    """Degenerate distribution of an unannotated parameter."""

    value: float
    kind = "none"

    def __post_init__(self):
        _finite("value", self.value)

    def sample(self, rng, size=None):
        if size is None:
            return float(self.value)
        return np.full(size, float(self.value))

    def _unsupported(self, *_):
        raise UnsupportedOperation("operation undefined for a Fixed (zero-variance) parameter")

    cdf = quantile = to_u = from_u = dx_du = _unsupported

    @property
    def support(self):
        return (self.value, self.value)

    @property
    def std(self):
        return 0.0

    @property
    def is_fixed(self):
        return True


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for ``stream`` under a 64-bit ``seed``.

    Philox is keyed by the seed; each stream starts at its own block of the
    256-bit counter, so streams never overlap and any stream can be rebuilt
    from ``(seed, stream)`` alone.
    """
    if not 0 <= seed < 2**64:
        raise DistributionError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if stream < 0:
        raise DistributionError("stream index must be non-negative")
    bitgen = np.random.Philox(key=seed, counter=[0, stream, 0, 0])
    return np.random.Generator(bitgen)
