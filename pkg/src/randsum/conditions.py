"""Random Lindeberg and random Lyapunov conditions.

The exact path is a weighted sum over the truncated index support of closed-form
per-row quantities; the Monte Carlo path draws the index and evaluates the same
inner quantity, and serves as a cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import distributions as dist
from . import index_laws as il
from .metrics import EmpiricalDistribution
from .scheme import TAG_LINDEBERG, DoubleArrayScheme, Row, _blocked

EPS_SWEEP = (0.01, 0.05, 0.1, 0.5)
CLAMP = 1e-14
MAX_HETEROGENEOUS_TERMS = 5 * 10 ** 7


class NotIIDError(ValueError):
    """The generating-function bound needs identically distributed rows."""


@dataclass
class ConditionReport:
    n: int
    lindeberg: dict = field(default_factory=dict)
    lyapunov: float = 0.0
    gf_bound: float | None = None
    method: str = "exact"
    truncation_slack: float = 0.0


def _lindeberg_inner(row: Row, ks: np.ndarray, eps: float) -> np.ndarray:
    """``(1/B_k^2) sum_{j<=k} tau_j(eps B_k)`` for each ``k``."""
    std = row.scheme.standard_shape
    b2 = np.asarray(row.B2(ks), dtype=float)
    c = eps * np.sqrt(b2)
    groups = row.scheme.variances.groups(ks)
    if groups is not None:
        sig, counts = groups
        # a summand with sd s truncated at c equals s**2 * tau_std(c / s)
        total = sum(counts[:, g] * s * s * dist.truncated_second_moment(std, c / s)
                    for g, s in enumerate(sig))
    else:
        if int(np.sum(ks)) > MAX_HETEROGENEOUS_TERMS:
            raise RuntimeError("heterogeneous Lindeberg sum exceeds the work cap")
        total = np.empty(ks.size)
        for i, (k, ck) in enumerate(zip(ks, c)):
            s = row.sigma(np.arange(1, k + 1))
            total[i] = math.fsum((s * s * dist.truncated_second_moment(std, ck / s)).tolist())
    out = np.clip(total / b2, 0.0, 1.0)
    return np.where(out < CLAMP, 0.0, out)


def random_lindeberg(scheme: DoubleArrayScheme, n: int, eps: float) -> float:
    """``E[(1/B^2_{n,N_n}) sum_{j<=N_n} E(X_j-mu_j)^2 1{|X_j-mu_j| > eps B_{n,N_n}}]``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    row = scheme.row(n)
    sup = row.support
    val = sup.expect(_lindeberg_inner(row, sup.ks, eps))
    return 0.0 if val < CLAMP else min(1.0, val)


def random_lindeberg_mc(scheme: DoubleArrayScheme, n: int, eps: float, replicates: int,
                        seed: int, workers: int = 1) -> EmpiricalDistribution:
    """Per-replicate inner Lindeberg quantity at a simulated index."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    row = scheme.row(n)

    def block(rng, size):
        ks = il.sample(row.law, rng, size)
        uniq, inv = np.unique(ks, return_inverse=True)
        return _lindeberg_inner(row, uniq, eps)[inv]

    return EmpiricalDistribution(_blocked(block, seed, TAG_LINDEBERG, n, replicates, workers))


def lindeberg_exceedance(scheme: DoubleArrayScheme, n: int, eps: float, delta: float) -> float:
    """``P(inner Lindeberg quantity at N_n > delta)``, exactly over the truncated support."""
    row = scheme.row(n)
    sup = row.support
    inner = _lindeberg_inner(row, sup.ks, eps)
    return sup.expect(inner > delta)


def _lyapunov_ratio(row: Row, ks: np.ndarray) -> np.ndarray:
    """``M^3_{n,k} / B^3_{n,k}``."""
    std = row.scheme.standard_shape
    nu3 = dist.third_abs_central_moment(std)
    b3 = np.asarray(row.B2(ks), dtype=float) ** 1.5
    groups = row.scheme.variances.groups(ks)
    if groups is not None:
        sig, counts = groups
        m3 = counts @ (nu3 * sig ** 3)
    else:
        kmax = int(ks.max())
        cum = np.cumsum(nu3 * row.sigma(np.arange(1, kmax + 1)) ** 3)
        m3 = cum[ks - 1]
    return m3 / b3


def random_lyapunov(scheme: DoubleArrayScheme, n: int) -> float:
    """``E L^3_{n,N_n}`` with ``L^3_{n,k} = M^3_{n,k} / B^3_{n,k}``."""
    row = scheme.row(n)
    sup = row.support
    return sup.expect(_lyapunov_ratio(row, sup.ks))


def lyapunov_gf_bound(scheme: DoubleArrayScheme, n: int) -> float:
    """``(nu^3/sigma^3) * sqrt(int_0^1 psi_n(s)/s ds)`` for i.i.d. rows.

    Dominates ``E L^3_{n,N_n} = (nu^3/sigma^3) E[N_n^{-1/2}]`` by Jensen.
    """
    if not scheme.iid:
        raise NotIIDError("generating-function bound applies to i.i.d. rows only")
    row = scheme.row(n)
    std = row.scheme.standard_shape
    ratio = dist.third_abs_central_moment(std)  # unit variance
    return ratio * math.sqrt(il.psi_integral(row.law, scheme.tail_eps))


def check(scheme: DoubleArrayScheme, n: int, eps_sweep=EPS_SWEEP) -> ConditionReport:
    row = scheme.row(n)
    report = ConditionReport(n=n, truncation_slack=row.support.tail_mass)
    report.lindeberg = {eps: random_lindeberg(scheme, n, eps) for eps in eps_sweep}
    report.lyapunov = random_lyapunov(scheme, n)
    if scheme.iid:
        report.gf_bound = lyapunov_gf_bound(scheme, n)
    return report
