"""Strictly positive step-length laws.

Each law is an immutable dataclass with a vectorised inverse CDF, so one
uniform draw yields one length on both the scalar and the batch paths. The
canonical text forms are::

    constant:1.0  uniform:0.5,1.5  exp:1.0  lognormal:0.0,0.5  twopoint:1.0,3.0,0.25
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import ndtri

from .errors import DomainError, UsageError
from .streams import RandomStream


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class Constant:
    value: float

    def __post_init__(self) -> None:
        if not (_finite(self.value) and self.value > 0):
            raise DomainError(f"constant step must be positive, got {self.value!r}")

    def ppf(self, u):
        return np.full(np.shape(u), self.value, dtype=np.float64)

    @property
    def mean(self) -> float:
        return self.value

    def __str__(self) -> str:
        return f"constant:{_fmt(self.value)}"


@dataclass(frozen=True)
class UniformInterval:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (_finite(self.lo, self.hi) and 0 < self.lo < self.hi):
            raise DomainError(f"uniform needs 0 < lo < hi, got ({self.lo!r}, {self.hi!r})")

    def ppf(self, u):
        return self.lo + np.asarray(u, dtype=np.float64) * (self.hi - self.lo)

    @property
    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def __str__(self) -> str:
        return f"uniform:{_fmt(self.lo)},{_fmt(self.hi)}"


@dataclass(frozen=True)
class Exponential:
    rate: float

    def __post_init__(self) -> None:
        if not (_finite(self.rate) and self.rate > 0):
            raise DomainError(f"exponential rate must be positive, got {self.rate!r}")

    def ppf(self, u):
        return -np.log1p(-np.asarray(u, dtype=np.float64)) / self.rate

    @property
    def mean(self) -> float:
        return 1.0 / self.rate

    def __str__(self) -> str:
        return f"exp:{_fmt(self.rate)}"


@dataclass(frozen=True)
class LogNormal:
    """exp(mu + sigma * Z); the normal quantile is Cephes ``ndtri``."""

    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not (_finite(self.mu, self.sigma) and self.sigma > 0):
            raise DomainError(f"lognormal needs finite mu and sigma > 0, got ({self.mu!r}, {self.sigma!r})")

    def ppf(self, u):
        return np.exp(self.mu + self.sigma * ndtri(np.asarray(u, dtype=np.float64)))

    @property
    def mean(self) -> float:
        return math.exp(self.mu + 0.5 * self.sigma**2)

    def __str__(self) -> str:
        return f"lognormal:{_fmt(self.mu)},{_fmt(self.sigma)}"


@dataclass(frozen=True)
class TwoPoint:
    """``v1`` with probability ``p``, otherwise ``v2``."""

    v1: float
    v2: float
    p: float

    def __post_init__(self) -> None:
        if not (_finite(self.v1, self.v2, self.p) and self.v1 > 0 and self.v2 > 0):
            raise DomainError(f"two-point values must be positive, got ({self.v1!r}, {self.v2!r})")
        if not 0 < self.p < 1:
            raise DomainError(f"two-point mass must lie in (0, 1), got {self.p!r}")

    def ppf(self, u):
        # atoms sorted by value so the quantile is nondecreasing
        if self.v1 <= self.v2:
            low, high, mass_low = self.v1, self.v2, self.p
        else:
            low, high, mass_low = self.v2, self.v1, 1.0 - self.p
        return np.where(np.asarray(u) <= mass_low, low, high).astype(np.float64)

    @property
    def mean(self) -> float:
        return self.p * self.v1 + (1.0 - self.p) * self.v2

    def __str__(self) -> str:
        return f"twopoint:{_fmt(self.v1)},{_fmt(self.v2)},{_fmt(self.p)}"


StepDistribution = Union[Constant, UniformInterval, Exponential, LogNormal, TwoPoint]

_PARSERS = {
    "constant": (Constant, 1),
    "uniform": (UniformInterval, 2),
    "exp": (Exponential, 1),
    "lognormal": (LogNormal, 2),
    "twopoint": (TwoPoint, 3),
}


def parse_distribution(text: str) -> StepDistribution:
    """Parse the canonical text form, e.g. ``uniform:0.5,1.5``."""
    name, sep, args = str(text).strip().partition(":")
    if not sep or name not in _PARSERS:
        raise UsageError(f"unknown distribution {text!r}; expected one of {sorted(_PARSERS)}")
    cls, arity = _PARSERS[name]
    try:
        params = [float(a) for a in args.split(",")]
    except ValueError:
        raise UsageError(f"bad parameters in {text!r}") from None
    if len(params) != arity:
        raise UsageError(f"{name} takes {arity} parameter(s), got {len(params)} in {text!r}")
    try:
        return cls(*params)
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def quantile(dist: StepDistribution, u: float) -> float:
    if not 0.0 < u < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {u!r}")
    return float(dist.ppf(u))


def sample_length(dist: StepDistribution, stream: RandomStream) -> float:
    """One draw of ``dist``; always consumes exactly one stream output."""
    return float(dist.ppf(stream.next_uniform()))
