"""Normal variance-mean mixtures ``Z = beta + alpha*W + sqrt(W)*G``.

``W >= 0`` is the mixing (variance) variable and ``G`` is standard normal,
independent of ``W``. The pair form ``(U, V) = (sqrt(W), alpha*W + beta)``
gives ``Z = G*U + V``.

CDF and density are expectations over ``W`` evaluated by composite
Gauss-Legendre quadrature in the quantile variable ``u = F_W(w)``; panels are
refined geometrically toward both ends of ``[1e-10, 1 - 1e-10]`` so that light
and heavy tails get the same treatment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy import stats
from scipy.special import ndtr

from .metrics import AnalyticCdf, EmpiricalDistribution

QUAD_NODES = 256
TAIL_CUT = 1e-10


@dataclass(frozen=True)
class Dirac:
    w: float = 1.0

    def __post_init__(self):
        if self.w < 0:
            raise ValueError("Dirac mixing mass must sit on [0, inf)")


@dataclass(frozen=True)
class Exponential:
    rate: float = 1.0


@dataclass(frozen=True)
class Gamma:
    shape: float
    rate: float


@dataclass(frozen=True)
class InverseGamma:
    shape: float
    scale: float


@dataclass(frozen=True)
class InverseGaussian:
    mean: float
    shape: float


MixingLaw = Union[Dirac, Exponential, Gamma, InverseGamma, InverseGaussian]

MIXING_NAMES = {
    "dirac": Dirac,
    "exponential": Exponential,
    "gamma": Gamma,
    "inverse_gamma": InverseGamma,
    "inverse_gaussian": InverseGaussian,
}


def _frozen(law: MixingLaw):
    if isinstance(law, Exponential):
        return stats.expon(scale=1.0 / law.rate)
    if isinstance(law, Gamma):
        return stats.gamma(law.shape, scale=1.0 / law.rate)
    if isinstance(law, InverseGamma):
        return stats.invgamma(law.shape, scale=law.scale)
    if isinstance(law, InverseGaussian):
        return stats.invgauss(law.mean / law.shape, scale=law.shape)
    raise TypeError(f"no continuous distribution for {law!r}")


def mixing_quantile(law: MixingLaw, q):
    q = np.asarray(q, dtype=float)
    if isinstance(law, Dirac):
        return np.full(q.shape, law.w) if q.ndim else law.w
    # isf keeps relative accuracy for q near 1 where 1 - q would cancel
    upper = q > 0.5
    out = np.where(upper, _frozen(law).isf(np.where(upper, 1.0 - q, 0.5)),
                   _frozen(law).ppf(np.where(upper, 0.5, q)))
    return float(out) if out.ndim == 0 else out


def mixing_cdf(law: MixingLaw, w):
    w = np.asarray(w, dtype=float)
    if isinstance(law, Dirac):
        return (w >= law.w).astype(float)
    return _frozen(law).cdf(w)


def mixing_mean(law: MixingLaw) -> float:
    if isinstance(law, Dirac):
        return law.w
    return float(_frozen(law).mean())


def mixing_sample(law: MixingLaw, rng: np.random.Generator, size=None):
    if isinstance(law, Dirac):
        out = np.full(() if size is None else size, law.w)
    elif isinstance(law, Exponential):
        out = rng.exponential(1.0 / law.rate, size)
    elif isinstance(law, Gamma):
        out = rng.gamma(law.shape, 1.0 / law.rate, size)
    elif isinstance(law, InverseGamma):
        out = law.scale / rng.gamma(law.shape, 1.0, size)
    elif isinstance(law, InverseGaussian):
        out = rng.wald(law.mean, law.shape, size)
    else:
        raise TypeError(f"unknown mixing law {law!r}")
    return float(out) if size is None else np.asarray(out)


@lru_cache(maxsize=8)
def _quantile_nodes(nodes: int):
    """Nodes and weights in the u variable over the refined panels."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    lower = [10.0 ** -e for e in range(10, 0, -1)]          # 1e-10 .. 1e-1
    edges = lower + [0.5] + [1.0 - e for e in reversed(lower)]
    us, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        us.append(0.5 * (b - a) * x + 0.5 * (a + b))
        ws.append(0.5 * (b - a) * w)
    return np.concatenate(us), np.concatenate(ws), np.array(edges)


@lru_cache(maxsize=64)
def _mixing_nodes(law: MixingLaw, nodes: int):
    us, ws, _ = _quantile_nodes(nodes)
    return np.asarray(mixing_quantile(law, us), dtype=float), ws


@dataclass(frozen=True)
class NVMixture:
    """Law of ``beta + alpha * W**((rho+1)/2) + sqrt(W) * G``.

    ``rho = 1`` (the default) is the normal variance-mean mixture; other
    values cover the proportional-constants limits ``G*U + alpha*U**(rho+1) + beta``
    with ``U = sqrt(W)``.
    """

    mixing: MixingLaw
    alpha: float = 0.0
    beta: float = 0.0
    rho: float = 1.0

    def _drift(self, w):
        return self.beta + self.alpha * np.power(w, 0.5 * (self.rho + 1.0))

    @property
    def degenerate(self) -> bool:
        return isinstance(self.mixing, Dirac) and self.mixing.w == 0.0

    def cdf(self, x, nodes: int = QUAD_NODES):
        """``P(Z < x)``."""
        x = np.asarray(x, dtype=float)
        if self.degenerate:
            out = (x > self.beta).astype(float)
        elif isinstance(self.mixing, Dirac):
            w = self.mixing.w
            out = ndtr((x - self._drift(w)) / math.sqrt(w))
        else:
            w, q = _mixing_nodes(self.mixing, nodes)
            z = (x[..., None] - self._drift(w)) / np.sqrt(w)
            # mass beyond the cut tails: W->0 gives a step at beta, W->inf drifts away
            out = ndtr(z) @ q + TAIL_CUT * (x > self.beta) + TAIL_CUT * _far_tail(self, x)
        out = np.clip(out, 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def pdf(self, x, nodes: int = QUAD_NODES):
        x = np.asarray(x, dtype=float)
        if self.degenerate:
            raise ValueError("point mass has no density")
        if isinstance(self.mixing, Dirac):
            w = self.mixing.w
            z = (x - self._drift(w)) / math.sqrt(w)
            out = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi * w)
        else:
            w, q = _mixing_nodes(self.mixing, nodes)
            z = (x[..., None] - self._drift(w)) / np.sqrt(w)
            out = (np.exp(-0.5 * z * z) / np.sqrt(2.0 * math.pi * w)) @ q
        return float(out) if out.ndim == 0 else out

    def sample(self, rng: np.random.Generator, size=None):
        w = mixing_sample(self.mixing, rng, size)
        g = rng.standard_normal(size)
        out = self._drift(w) + np.sqrt(w) * g
        return float(out) if size is None else out

    def mean(self) -> float:
        if self.rho != 1.0:
            raise NotImplementedError("closed-form mean only for rho = 1")
        return self.beta + self.alpha * mixing_mean(self.mixing)

    def support_bracket(self, mass: float = 1e-9) -> tuple[float, float]:
        """An interval outside which the CDF is within ``mass`` of 0 or 1."""
        if self.degenerate:
            return self.beta - 1.0, self.beta + 1.0
        lo, hi = -1.0 + self.beta, 1.0 + self.beta
        while self.cdf(lo) > mass:
            lo = self.beta + 2.0 * (lo - self.beta)
        while self.cdf(hi) < 1.0 - mass:
            hi = self.beta + 2.0 * (hi - self.beta)
        return lo, hi

    def cdf_handle(self, points: int = 16_001):
        """An evaluable CDF for the metrics module (step CDF if degenerate).

        The table is uniform across the central mass and geometric in the
        tails, so heavy-tailed mixtures keep a fine core resolution.
        """
        if self.degenerate:
            return EmpiricalDistribution(np.array([self.beta]))
        lo, hi = self.support_bracket()
        clo, chi = self.support_bracket(mass=1e-4)
        core = np.linspace(clo, chi, points)
        step = core[1] - core[0]
        left = clo - np.geomspace(step, max(clo - lo, 2 * step), 400)
        right = chi + np.geomspace(step, max(hi - chi, 2 * step), 400)
        table = np.unique(np.concatenate([left, core, right]))
        return AnalyticCdf(self.cdf, lo, hi, table=table)

    def pair_joint_cdf(self, u, v):
        """``P(sqrt(W) < u, alpha*W**((rho+1)/2) + beta < v)``, the law of ``(U, V)``."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        wu = np.where(u > 0, u * u, -np.inf)
        p = (self.rho + 1.0) / 2.0
        if self.alpha == 0.0:
            wv = np.where(v > self.beta, np.inf, -np.inf)
        else:
            ratio = (v - self.beta) / self.alpha
            root = np.power(np.abs(ratio), 1.0 / p)
            if self.alpha > 0:
                wv = np.where(ratio > 0, root, -np.inf)
                bound = np.minimum(wu, wv)
                return _strict_cdf(self.mixing, bound)
            # alpha < 0: V < v  <=>  W > root (when ratio > 0), always when ratio <= 0
            lower = np.where(ratio > 0, root, 0.0)
            upper = wu
            lower_mass = np.where(ratio > 0, mixing_cdf(self.mixing, lower), 0.0)
            return np.clip(_strict_cdf(self.mixing, upper) - lower_mass, 0.0, 1.0)
        return _strict_cdf(self.mixing, np.minimum(wu, wv))


def _strict_cdf(law: MixingLaw, w):
    """``P(W < w)``, with ``w = -inf`` giving 0 and ``inf`` giving 1."""
    w = np.asarray(w, dtype=float)
    if isinstance(law, Dirac):
        return (w > law.w).astype(float)
    return np.where(np.isfinite(w), mixing_cdf(law, np.where(np.isfinite(w), w, 0.0)),
                    np.where(w > 0, 1.0, 0.0))


def _far_tail(m: NVMixture, x):
    # W beyond its upper cut: Z sits near -inf or +inf depending on drift sign
    if m.alpha > 0:
        return np.zeros_like(x)
    if m.alpha < 0:
        return np.ones_like(x)
    return np.full_like(x, 0.5)


def mixing_from_config(cfg: dict) -> MixingLaw:
    cfg = dict(cfg)
    name = cfg.pop("law", None)
    if name not in MIXING_NAMES:
        raise ValueError(f"mixing.law: expected one of {sorted(MIXING_NAMES)}, got {name!r}")
    try:
        return MIXING_NAMES[name](**{k: float(v) for k, v in cfg.items()})
    except TypeError as exc:
        raise ValueError(f"mixing {name}: {exc}") from None


def mixing_to_config(law: MixingLaw) -> dict:
    for name, cls in MIXING_NAMES.items():
        if isinstance(law, cls):
            return {"law": name, **{k: float(v) for k, v in vars(law).items()}}
    raise TypeError(f"unknown mixing law {law!r}")


def from_config(cfg: dict) -> NVMixture:
    """``{"mixing": {"law": "exponential", "rate": 1.0}, "alpha": 1.0, "beta": 0.0}``."""
    if "mixing" not in cfg:
        raise ValueError("mixture: missing field 'mixing'")
    unknown = set(cfg) - {"mixing", "alpha", "beta", "rho"}
    if unknown:
        raise ValueError(f"mixture: unknown fields {sorted(unknown)}")
    return NVMixture(mixing_from_config(cfg["mixing"]), float(cfg.get("alpha", 0.0)),
                     float(cfg.get("beta", 0.0)), float(cfg.get("rho", 1.0)))


def to_config(m: NVMixture) -> dict:
    out = {"mixing": mixing_to_config(m.mixing), "alpha": m.alpha, "beta": m.beta}
    if m.rho != 1.0:
        out["rho"] = m.rho
    return out
