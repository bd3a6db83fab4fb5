"""Exact characteristic functions of row sums, random sums and their mixtures.

Products of summand CFs are accumulated in log-polar form: for integer
multiplicity ``m``, ``exp(m * log f) == f**m`` on the principal branch, and
sums of logs do not underflow for long rows.

Sup-norms over ``|t| <= T`` use conjugate symmetry and evaluate ``t >= 0``
only, on a 2047-point grid that nests the 1024-point one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr

from . import distributions as dist
from .metrics import EmpiricalDistribution
from .scheme import DoubleArrayScheme, Row

COARSE_POINTS = 1024
DEFAULT_T = 5.0
CHUNK_ELEMENTS = 1 << 21
MAX_HETEROGENEOUS_TERMS = 2 * 10 ** 8


class WorkCapError(RuntimeError):
    """An exact CF computation would exceed the configured work cap."""


@dataclass(frozen=True)
class LimitLaw:
    """Law of the limit ``Y`` of the non-random normalized sums."""

    h: Callable
    H: Callable


STANDARD_NORMAL = LimitLaw(h=lambda t: np.exp(-0.5 * np.asarray(t, dtype=float) ** 2),
                           H=ndtr)


@dataclass(frozen=True)
class SupGrid:
    """Half-grid ``0 <= t <= T``; ``coarse`` marks the points of the coarse grid."""

    t: np.ndarray
    coarse: np.ndarray

    @classmethod
    def build(cls, T: float, points: int = COARSE_POINTS) -> "SupGrid":
        if not T > 0:
            raise ValueError("T must be positive")
        full = np.linspace(-T, T, 2 * points - 1)
        half = full[points - 1:]
        half[0] = 0.0
        # coarse grid points are the even indices of the full refined grid
        coarse = ((np.arange(half.size) + points - 1) % 2) == 0
        return cls(half, coarse)

    @property
    def points(self) -> int:
        return 2 * self.t.size - 1


@dataclass(frozen=True)
class SupValue:
    value: float
    coarse: float
    refined: float
    grid_points: int


def _log_cf(fam: dist.SummandFamily, s) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(dist.cf(fam, s).astype(complex))


def _row_chunks(nk: int, nt: int):
    step = max(1, CHUNK_ELEMENTS // max(nt, 1))
    for lo in range(0, nk, step):
        yield slice(lo, min(nk, lo + step))


def _log_hnk_block(row: Row, ks: np.ndarray, t: np.ndarray) -> np.ndarray:
    """``log h_{n,k}(t)`` for every ``k`` in ``ks`` (rows) and ``t`` (columns)."""
    std = row.scheme.standard_shape
    b = np.sqrt(np.asarray(row.B2(ks), dtype=float))
    groups = row.scheme.variances.groups(ks)
    if groups is not None:
        sig, counts = groups
        out = np.zeros((ks.size, t.size), dtype=complex)
        for g, s in enumerate(sig):
            out += counts[:, g, None] * _log_cf(std, s * t[None, :] / b[:, None])
        return out
    work = int(np.sum(ks)) * t.size
    if work > MAX_HETEROGENEOUS_TERMS:
        raise WorkCapError(f"heterogeneous row needs {work:.3g} CF terms; cap is "
                           f"{MAX_HETEROGENEOUS_TERMS:.3g}")
    out = np.empty((ks.size, t.size), dtype=complex)
    for i, (k, bk) in enumerate(zip(ks, b)):
        sig = row.sigma(np.arange(1, k + 1))
        out[i] = _log_cf(std, sig[:, None] * t[None, :] / bk).sum(axis=0)
    return out


def hnk(scheme: DoubleArrayScheme, n: int, k: int, t):
    """CF of ``Y_{n,k} = (S_{n,k} - A_{n,k}) / B_{n,k}``."""
    t = np.asarray(t, dtype=float)
    out = np.exp(_log_hnk_block(scheme.row(n), np.array([int(k)]), t.ravel()))[0]
    return complex(out[0]) if t.ndim == 0 else out.reshape(t.shape)


def _log_partial_products(row: Row, ks: np.ndarray, t: np.ndarray) -> np.ndarray:
    """``log prod_{j<=k} phi(sigma_j t / d_n)`` for sorted ``ks`` (rows)."""
    std = row.scheme.standard_shape
    groups = row.scheme.variances.groups(ks)
    if groups is not None:
        sig, counts = groups
        logs = np.stack([_log_cf(std, s * t / row.dn) for s in sig])
        return counts @ logs
    kmax = int(ks[-1])
    sig = row.sigma(np.arange(1, kmax + 1))
    cum = np.cumsum(_log_cf(std, sig[:, None] * t[None, :] / row.dn), axis=0)
    return cum[ks - 1]


def fn_exact(scheme: DoubleArrayScheme, n: int, t):
    """CF of ``Z_n`` by total probability over the truncated index support."""
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    row = scheme.row(n)
    sup = row.support
    out = np.zeros(flat.size, dtype=complex)
    for cols in _row_chunks(flat.size, sup.ks.size):
        tc = flat[cols]
        acc = np.zeros(tc.size, dtype=complex)
        for rows in _row_chunks(sup.ks.size, tc.size):
            ks = sup.ks[rows]
            phase = 1j * tc[None, :] * ((row.A(ks) - row.cn) / row.dn)[:, None]
            acc += sup.weights[rows] @ np.exp(phase + _log_partial_products(row, ks, tc))
        out[cols] = acc
    return complex(out[0]) if t.ndim == 0 else out.reshape(t.shape)


def gn(scheme: DoubleArrayScheme, n: int, t, limit: LimitLaw = STANDARD_NORMAL):
    """``E h(t U_n) exp(i t V_n)`` over the truncated index support."""
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    row = scheme.row(n)
    sup = row.support
    u, v = row.un_vn(sup.ks)
    out = np.zeros(flat.size, dtype=complex)
    for rows in _row_chunks(sup.ks.size, flat.size):
        arg = flat[None, :] * u[rows, None]
        out += sup.weights[rows] @ (limit.h(arg) * np.exp(1j * flat[None, :] * v[rows, None]))
    return complex(out[0]) if t.ndim == 0 else out.reshape(t.shape)


def _sup(values: np.ndarray, grid: SupGrid) -> SupValue:
    refined = float(np.max(values))
    coarse = float(np.max(values[grid.coarse]))
    return SupValue(max(refined, coarse), coarse, refined, grid.points)


def lemma1_gap_detail(scheme: DoubleArrayScheme, n: int, T: float = DEFAULT_T,
                      limit: LimitLaw = STANDARD_NORMAL) -> SupValue:
    grid = SupGrid.build(T)
    diff = np.abs(fn_exact(scheme, n, grid.t) - gn(scheme, n, grid.t, limit))
    return _sup(diff, grid)


def lemma1_gap(scheme: DoubleArrayScheme, n: int, T: float = DEFAULT_T,
               limit: LimitLaw = STANDARD_NORMAL) -> float:
    """``sup_{|t| <= T} |f_n(t) - g_n(t)|``."""
    return lemma1_gap_detail(scheme, n, T, limit).value


def coherency_gap_detail(scheme: DoubleArrayScheme, n: int, T: float = DEFAULT_T,
                         limit: LimitLaw = STANDARD_NORMAL) -> SupValue:
    grid = SupGrid.build(T)
    row = scheme.row(n)
    sup = row.support
    h = limit.h(grid.t)
    fine = np.empty(sup.ks.size)
    coarse = np.empty(sup.ks.size)
    for rows in _row_chunks(sup.ks.size, grid.t.size):
        d = np.abs(np.exp(_log_hnk_block(row, sup.ks[rows], grid.t)) - h[None, :])
        fine[rows] = d.max(axis=1)
        coarse[rows] = d[:, grid.coarse].max(axis=1)
    refined_v, coarse_v = sup.expect(fine), sup.expect(coarse)
    return SupValue(min(2.0, max(refined_v, coarse_v)), coarse_v, refined_v, grid.points)


def coherency_gap(scheme: DoubleArrayScheme, n: int, T: float = DEFAULT_T,
                  limit: LimitLaw = STANDARD_NORMAL) -> float:
    """``E sup_{|t| <= T} |h_{n,N_n}(t) - h(t)|``."""
    return coherency_gap_detail(scheme, n, T, limit).value


def empirical_cf(sample: EmpiricalDistribution, t):
    """``sum_i w_i exp(i t x_i)``."""
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    x = sample.values
    w = sample.weights if sample.weights is not None else np.full(x.size, 1.0 / x.size)
    out = np.empty(flat.size, dtype=complex)
    for cols in _row_chunks(flat.size, x.size):
        out[cols] = np.exp(1j * flat[cols, None] * x[None, :]) @ w
    return complex(out[0]) if t.ndim == 0 else out.reshape(t.shape)
