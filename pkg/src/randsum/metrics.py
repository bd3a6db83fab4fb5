"""Distances metrizing weak convergence, and empirical CDF machinery.

All CDFs follow the left-continuous convention ``F(x) = P(Z < x)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

LEVY_TOL = 1e-6
STEP_NUDGE = 1e-9
ANALYTIC_GRID = 10_000


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted atoms with probability weights (uniform when built from draws)."""

    values: np.ndarray
    weights: Optional[np.ndarray] = None
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if values.size == 0:
            raise ValueError("empirical distribution needs at least one value")
        if self.weights is None:
            order = np.argsort(values, kind="stable")
            values = values[order]
            weights = None
            cum = np.arange(values.size + 1) / values.size
        else:
            weights = np.asarray(self.weights, dtype=float).ravel()
            if weights.shape != values.shape:
                raise ValueError("weights and values differ in length")
            if np.any(weights < 0) or abs(math.fsum(weights.tolist()) - 1.0) > 1e-12:
                raise ValueError("weights must be nonnegative and sum to 1")
            order = np.argsort(values, kind="stable")
            values, weights = values[order], weights[order]
            cum = np.concatenate([[0.0], np.cumsum(weights)])
            cum[-1] = 1.0
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "_cum", cum)

    @classmethod
    def from_sample(cls, draws) -> "EmpiricalDistribution":
        return cls(np.asarray(draws, dtype=float))

    def __len__(self) -> int:
        return self.values.size

    @property
    def breakpoints(self) -> np.ndarray:
        return self.values

    def __call__(self, x):
        return ecdf(self, x)

    def mean(self) -> float:
        if self.weights is None:
            return float(np.mean(self.values))
        return float(np.dot(self.weights, self.values))


class AnalyticCdf:
    """A continuous CDF given by a vectorized callable.

    ``lo``/``hi`` bracket the bulk of the mass and anchor evaluation grids.
    When ``table`` (sorted abscissae) is given, evaluation goes through linear
    interpolation on it, 0 below and 1 above; repeated evaluation stays cheap.
    """

    breakpoints = None

    def __init__(self, func: Callable, lo: float, hi: float, table=None):
        self.func = func
        self.lo, self.hi = float(lo), float(hi)
        self._table = None
        if table is not None:
            xs = np.asarray(table, dtype=float)
            ys = np.maximum.accumulate(np.clip(func(xs), 0.0, 1.0))
            self._table = (xs, ys)

    def grid(self, pad: float = 0.0) -> np.ndarray:
        if self._table is not None:
            xs = self._table[0]
            return np.concatenate([[xs[0] - pad], xs, [xs[-1] + pad]])
        return np.linspace(self.lo - pad, self.hi + pad, ANALYTIC_GRID)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self._table is None:
            return np.clip(self.func(x), 0.0, 1.0)
        xs, ys = self._table
        return np.interp(x, xs, ys, left=0.0, right=1.0)


def ecdf(sample: EmpiricalDistribution, x):
    """Weighted fraction of the sample strictly below ``x``."""
    idx = np.searchsorted(sample.values, np.asarray(x, dtype=float), side="left")
    out = sample._cum[idx]
    return float(out) if np.ndim(out) == 0 else out


def _candidates(F1, F2, y: float) -> np.ndarray:
    """Points where the Levy feasibility inequalities can first fail."""
    parts = []
    for F, shifts in ((F1, (0.0,)), (F2, (-y, y))):
        if F.breakpoints is not None:
            for s in shifts:
                parts.append(F.breakpoints + s)
    for F in (F1, F2):
        if F.breakpoints is None:
            parts.append(F.grid(pad=y))
    pts = np.concatenate(parts)
    return np.concatenate([pts, pts + STEP_NUDGE])


def _levy_feasible(F1, F2, y: float) -> bool:
    x = _candidates(F1, F2, y)
    f1 = F1(x)
    if np.any(F2(x - y) - y > f1 + 1e-15):
        return False
    return not np.any(f1 > F2(x + y) + y + 1e-15)


def levy(F1, F2, tol: float = LEVY_TOL) -> float:
    """Levy distance ``inf{y >= 0: F2(x-y)-y <= F1(x) <= F2(x+y)+y for all x}``.

    Exact (up to ``tol``) for two step CDFs; a step CDF against a continuous
    one is also exact since the extremes sit at the jumps. Two analytic CDFs
    are compared on a uniform grid.
    """
    if _levy_feasible(F1, F2, 0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol / 4:
        mid = 0.5 * (lo + hi)
        if _levy_feasible(F1, F2, mid):
            hi = mid
        else:
            lo = mid
    return hi


def ks(F1, F2) -> float:
    """Kolmogorov distance ``sup_x |F1(x) - F2(x)|`` over the merged grid."""
    x = _candidates(F1, F2, 0.0)
    return float(np.max(np.abs(F1(x) - F2(x))))


# ----------------------------------------------------------------------------
# two-dimensional metric


@dataclass(frozen=True)
class PairLaw:
    """Analytic bivariate law given by its joint CDF ``P(U < u, V < v)``."""

    joint_cdf: Callable


def _grid_axis(x: np.ndarray, size: int) -> np.ndarray:
    qs = np.quantile(x, np.linspace(0.0, 1.0, size))
    # the right end must sit above the max so the ECDF reaches 1 there
    qs[-1] = np.nextafter(qs[-1], np.inf)
    return qs


def _joint_ecdf(u: np.ndarray, v: np.ndarray, gu: np.ndarray, gv: np.ndarray) -> np.ndarray:
    # point (u, v) counts at grid (a, b) iff u < gu[a] and v < gv[b]
    iu = np.searchsorted(gu, u, side="right")
    iv = np.searchsorted(gv, v, side="right")
    m1, m2 = gu.size, gv.size
    keep = (iu < m1) & (iv < m2)
    hist = np.zeros((m1, m2))
    np.add.at(hist, (iu[keep], iv[keep]), 1.0)
    return hist.cumsum(axis=0).cumsum(axis=1) / u.size


def weak2d(A, B, grid: int = 100) -> float:
    """Bivariate Kolmogorov distance on a quantile-anchored ``grid x grid`` lattice.

    ``A`` is an ``(N, 2)`` array of pairs; ``B`` is another array of pairs or
    a :class:`PairLaw`. Grid lines sit at marginal quantiles of ``A``.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[1] != 2 or A.shape[0] == 0:
        raise ValueError("weak2d needs a nonempty (N, 2) array of pairs")
    gu = _grid_axis(A[:, 0], grid)
    gv = _grid_axis(A[:, 1], grid)
    fa = _joint_ecdf(A[:, 0], A[:, 1], gu, gv)
    if isinstance(B, PairLaw):
        U, V = np.meshgrid(gu, gv, indexing="ij")
        fb = np.asarray(B.joint_cdf(U, V), dtype=float)
    else:
        B = np.asarray(B, dtype=float)
        if B.ndim != 2 or B.shape[1] != 2 or B.shape[0] == 0:
            raise ValueError("weak2d needs a nonempty (N, 2) array of pairs")
        fb = _joint_ecdf(B[:, 0], B[:, 1], gu, gv)
    return float(np.max(np.abs(fa - fb)))
