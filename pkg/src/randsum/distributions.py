"""Summand families with closed-form moments, characteristic functions and
truncated second moments.

Every family is a location-scale family, so a row of a double array is built
by rescaling one template to the per-summand mean and standard deviation
(see :meth:`SummandFamily.rescaled`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import ndtr

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Normal:
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"Normal.sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class Uniform:
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"Uniform needs lo < hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class TwoPoint:
    """Mass ``p`` at ``x1`` and ``1 - p`` at ``x2``."""

    x1: float = -1.0
    x2: float = 1.0
    p: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"TwoPoint.p must lie in (0, 1), got {self.p}")
        if self.x1 == self.x2:
            raise ValueError("TwoPoint atoms must differ (variance would be zero)")


@dataclass(frozen=True)
class ShiftedExponential:
    """``shift + E / rate`` with ``E`` standard exponential."""

    rate: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"ShiftedExponential.rate must be positive, got {self.rate}")


SummandFamily = Union[Normal, Uniform, TwoPoint, ShiftedExponential]

FAMILY_NAMES = {
    "normal": Normal,
    "uniform": Uniform,
    "two_point": TwoPoint,
    "shifted_exponential": ShiftedExponential,
}


def mean(fam: SummandFamily) -> float:
    if isinstance(fam, Normal):
        return fam.mu
    if isinstance(fam, Uniform):
        return 0.5 * (fam.lo + fam.hi)
    if isinstance(fam, TwoPoint):
        return fam.p * fam.x1 + (1.0 - fam.p) * fam.x2
    if isinstance(fam, ShiftedExponential):
        return fam.shift + 1.0 / fam.rate
    raise TypeError(f"unknown summand family {fam!r}")


def variance(fam: SummandFamily) -> float:
    if isinstance(fam, Normal):
        return fam.sigma ** 2
    if isinstance(fam, Uniform):
        return (fam.hi - fam.lo) ** 2 / 12.0
    if isinstance(fam, TwoPoint):
        return fam.p * (1.0 - fam.p) * (fam.x2 - fam.x1) ** 2
    if isinstance(fam, ShiftedExponential):
        return 1.0 / fam.rate ** 2
    raise TypeError(f"unknown summand family {fam!r}")


def sd(fam: SummandFamily) -> float:
    return math.sqrt(variance(fam))


def cf(fam: SummandFamily, t):
    """Characteristic function ``E exp(itX)``; ``t`` may be an array."""
    t = np.asarray(t, dtype=float)
    if isinstance(fam, Normal):
        return np.exp(1j * fam.mu * t - 0.5 * fam.sigma ** 2 * t ** 2)
    if isinstance(fam, Uniform):
        half = 0.5 * (fam.hi - fam.lo)
        # np.sinc(x) = sin(pi x)/(pi x)
        return np.exp(1j * mean(fam) * t) * np.sinc(half * t / np.pi)
    if isinstance(fam, TwoPoint):
        return fam.p * np.exp(1j * fam.x1 * t) + (1.0 - fam.p) * np.exp(1j * fam.x2 * t)
    if isinstance(fam, ShiftedExponential):
        return np.exp(1j * fam.shift * t) / (1.0 - 1j * t / fam.rate)
    raise TypeError(f"unknown summand family {fam!r}")


def truncated_second_moment(fam: SummandFamily, c):
    """``E[(X - mu)^2; |X - mu| > c]`` in closed form; ``c`` may be an array."""
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise ValueError("truncation level must be nonnegative")
    if isinstance(fam, Normal):
        z = c / fam.sigma
        phi = np.exp(-0.5 * z * z) / _SQRT_2PI
        out = 2.0 * fam.sigma ** 2 * (z * phi + ndtr(-z))
    elif isinstance(fam, Uniform):
        h = 0.5 * (fam.hi - fam.lo)
        cc = np.minimum(c, h)
        out = (h ** 3 - cc ** 3) / (3.0 * h)
    elif isinstance(fam, TwoPoint):
        m = mean(fam)
        d1, d2 = fam.x1 - m, fam.x2 - m
        out = (fam.p * d1 * d1 * (abs(d1) > c)
               + (1.0 - fam.p) * d2 * d2 * (abs(d2) > c))
    elif isinstance(fam, ShiftedExponential):
        # standardized E - 1 with E ~ Exp(1): upper tail beyond 1+u, lower below 1-u
        u = c * fam.rate
        a = 1.0 + u
        upper = np.exp(-a) * (a * a + 1.0)
        b = np.clip(1.0 - u, 0.0, None)
        lower = np.where(u < 1.0, 1.0 - np.exp(-b) * (b * b + 1.0), 0.0)
        out = (upper + lower) / fam.rate ** 2
    else:
        raise TypeError(f"unknown summand family {fam!r}")
    out = np.clip(out, 0.0, variance(fam))
    return float(out) if out.ndim == 0 else out


def third_abs_central_moment(fam: SummandFamily) -> float:
    """``E|X - mu|^3``."""
    if isinstance(fam, Normal):
        return 2.0 * math.sqrt(2.0 / math.pi) * fam.sigma ** 3
    if isinstance(fam, Uniform):
        return (0.5 * (fam.hi - fam.lo)) ** 3 / 4.0
    if isinstance(fam, TwoPoint):
        m = mean(fam)
        return fam.p * abs(fam.x1 - m) ** 3 + (1.0 - fam.p) * abs(fam.x2 - m) ** 3
    if isinstance(fam, ShiftedExponential):
        return (12.0 / math.e - 2.0) / fam.rate ** 3
    raise TypeError(f"unknown summand family {fam!r}")


def sample(fam: SummandFamily, rng: np.random.Generator, size=None):
    """Draw from ``fam``; one float when ``size`` is None."""
    if isinstance(fam, Normal):
        out = rng.normal(fam.mu, fam.sigma, size)
    elif isinstance(fam, Uniform):
        out = rng.uniform(fam.lo, fam.hi, size)
    elif isinstance(fam, TwoPoint):
        out = np.where(rng.random(size) < fam.p, fam.x1, fam.x2)
    elif isinstance(fam, ShiftedExponential):
        out = fam.shift + rng.exponential(1.0 / fam.rate, size)
    else:
        raise TypeError(f"unknown summand family {fam!r}")
    return float(out) if size is None else out


def rescaled(fam: SummandFamily, new_mean: float, new_sd: float) -> SummandFamily:
    """Same family shape moved to the given mean and standard deviation."""
    if not new_sd > 0:
        raise ValueError(f"standard deviation must be positive, got {new_sd}")
    if isinstance(fam, Normal):
        return Normal(new_mean, new_sd)
    if isinstance(fam, Uniform):
        half = new_sd * math.sqrt(3.0)
        return Uniform(new_mean - half, new_mean + half)
    if isinstance(fam, TwoPoint):
        m, s = mean(fam), sd(fam)
        scale = new_sd / s
        return TwoPoint(new_mean + (fam.x1 - m) * scale,
                        new_mean + (fam.x2 - m) * scale, fam.p)
    if isinstance(fam, ShiftedExponential):
        return ShiftedExponential(1.0 / new_sd, new_mean - new_sd)
    raise TypeError(f"unknown summand family {fam!r}")


def from_config(cfg: dict) -> SummandFamily:
    """Build a family from ``{"family": "normal", "mu": 0.0, "sigma": 1.0}``."""
    cfg = dict(cfg)
    name = cfg.pop("family", None)
    if name not in FAMILY_NAMES:
        raise ValueError(f"family: expected one of {sorted(FAMILY_NAMES)}, got {name!r}")
    try:
        return FAMILY_NAMES[name](**{k: float(v) for k, v in cfg.items()})
    except TypeError as exc:
        raise ValueError(f"family {name}: {exc}") from None


def to_config(fam: SummandFamily) -> dict:
    for name, cls in FAMILY_NAMES.items():
        if isinstance(fam, cls):
            return {"family": name, **{k: float(v) for k, v in vars(fam).items()}}
    raise TypeError(f"unknown summand family {fam!r}")
