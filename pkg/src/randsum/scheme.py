"""Double arrays of independent, non-identically distributed summands.

Row ``n`` holds summands ``X_{n,j} = mu_{n,j} + sigma_{n,j} * xi_j`` where the
``xi_j`` are i.i.d. copies of a standardized template shape. The variances come
from a :class:`VariancePattern`; the means are induced by the mode:

* ``Theorem4``: ``mu_{n,j} = alpha_n * sigma_{n,j}**2 / d_n``, ``c_n = 0``;
* ``General``: centering ``a_{n,k} = B_{n,k}**(rho+1) * alpha_n / d_n**rho``
  realised through ``mu_{n,j} = a_{n,j} - a_{n,j-1}``, and ``c_n = d_n * beta_n``.

In both modes ``d_n**2 = E B_{n,N_n}**2``, computed from variances alone.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Optional, Union

import numpy as np

from . import distributions as dist
from . import index_laws as il
from .metrics import EmpiricalDistribution

BLOCK = 2048

# stream tags keep the draws of different simulators independent
TAG_SUMS, TAG_INDEX, TAG_LINDEBERG, TAG_TIGHTNESS = 0, 1, 2, 3


# ----------------------------------------------------------------------------
# variance patterns


@dataclass(frozen=True)
class Constant:
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("Constant.sigma must be positive")

    def sigmas(self, j):
        return np.full(np.shape(j), self.sigma, dtype=float)

    def B2(self, k):
        return np.asarray(k, dtype=float) * self.sigma ** 2

    def groups(self, k):
        k = np.asarray(k)
        return np.array([self.sigma]), k[..., None].astype(float)


@dataclass(frozen=True)
class Alternating:
    """``sigma_j = a`` for odd ``j`` and ``b`` for even ``j``."""

    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("Alternating sigmas must be positive")

    def sigmas(self, j):
        j = np.asarray(j)
        return np.where(j % 2 == 1, self.a, self.b).astype(float)

    def B2(self, k):
        k = np.asarray(k)
        return ((k + 1) // 2) * self.a ** 2 + (k // 2) * self.b ** 2

    def groups(self, k):
        k = np.asarray(k)
        counts = np.stack([(k + 1) // 2, k // 2], axis=-1).astype(float)
        return np.array([self.a, self.b]), counts


@dataclass(frozen=True)
class PowerLaw:
    """``sigma_j = sigma * j**gamma`` with ``|gamma| <= 1/4``."""

    sigma: float
    gamma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("PowerLaw.sigma must be positive")
        if abs(self.gamma) > 0.25:
            raise ValueError("PowerLaw.gamma must satisfy |gamma| <= 1/4")

    def sigmas(self, j):
        return self.sigma * np.power(np.asarray(j, dtype=float), self.gamma)

    def B2(self, k):
        k = np.asarray(k)
        table = _powerlaw_cumsum(self.sigma, self.gamma, int(np.max(k, initial=1)))
        return table[k - 1]

    def groups(self, k):
        return None


def _powerlaw_cumsum(sigma: float, gamma: float, kmax: int) -> np.ndarray:
    j = np.arange(1, kmax + 1, dtype=float)
    return np.cumsum((sigma * j ** gamma) ** 2)


VariancePattern = Union[Constant, Alternating, PowerLaw]


# ----------------------------------------------------------------------------
# n-dependent rules


@dataclass(frozen=True)
class RateRule:
    """``value_n = const + c / sqrt(n)``."""

    const: float
    c: float = 0.0

    def __call__(self, n: int) -> float:
        return self.const + self.c / math.sqrt(n)


@dataclass(frozen=True)
class IndexRule:
    """Index law for row ``n``.

    ``fixed`` gives the same law for every row; otherwise ``kind`` with
    ``mean_per_n`` scales the mean linearly in ``n`` (``r`` is the shape of the
    mixed Poisson law).
    """

    kind: str
    fixed: Optional[il.IndexLaw] = None
    mean_per_n: Optional[float] = None
    r: Optional[float] = None

    def __call__(self, n: int) -> il.IndexLaw:
        if self.fixed is not None:
            return self.fixed
        m = self.mean_per_n * n
        if self.kind == "deterministic":
            return il.Deterministic(max(1, int(round(m))))
        if self.kind == "geometric":
            return il.Geometric(min(1.0, 1.0 / m))
        if self.kind == "mixed_poisson_gamma":
            return il.MixedPoissonGamma(self.r, m)
        raise ValueError(f"unknown index kind {self.kind!r}")


@dataclass(frozen=True)
class Theorem4:
    pass


@dataclass(frozen=True)
class General:
    rho: float = 1.0
    beta: RateRule = RateRule(0.0)

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("General.rho must be positive")


Mode = Union[Theorem4, General]


@dataclass(frozen=True)
class DoubleArrayScheme:
    shape: dist.SummandFamily
    variances: VariancePattern
    index: IndexRule
    alpha: RateRule = RateRule(0.0)
    mode: Mode = Theorem4()
    tail_eps: float = il.DEFAULT_TAIL_EPS
    max_atoms: int = il.DEFAULT_MAX_ATOMS

    @cached_property
    def standard_shape(self) -> dist.SummandFamily:
        return dist.rescaled(self.shape, 0.0, 1.0)

    def row(self, n: int) -> "Row":
        return _row(self, int(n))

    @property
    def iid(self) -> bool:
        """Rows are i.i.d. exactly when the variances are constant and means are."""
        return isinstance(self.variances, Constant) and (
            isinstance(self.mode, Theorem4) or self.mode.rho == 1.0)


@lru_cache(maxsize=64)
def _row(scheme: DoubleArrayScheme, n: int) -> "Row":
    return Row(scheme, n)


@dataclass(eq=False)
class Row:
    """All per-row constants of a scheme; build through ``scheme.row(n)``."""

    scheme: DoubleArrayScheme
    n: int
    law: il.IndexLaw = field(init=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("row index n must be a positive integer")
        self.law = self.scheme.index(self.n)

    @cached_property
    def support(self) -> il.TruncatedSupport:
        return il.truncate(self.law, self.scheme.tail_eps, self.scheme.max_atoms)

    @cached_property
    def mean_index(self) -> float:
        return il.mean_index(self.law, self.scheme.tail_eps)

    @cached_property
    def alpha(self) -> float:
        return self.scheme.alpha(self.n)

    @cached_property
    def dn(self) -> float:
        sup = self.support
        return math.sqrt(sup.expect(self.B2(sup.ks)))

    @cached_property
    def cn(self) -> float:
        mode = self.scheme.mode
        return 0.0 if isinstance(mode, Theorem4) else self.dn * mode.beta(self.n)

    @property
    def rho(self) -> float:
        mode = self.scheme.mode
        return 1.0 if isinstance(mode, Theorem4) else mode.rho

    # -- per-summand and partial-sum constants --------------------------------

    def sigma(self, j):
        return self.scheme.variances.sigmas(j)

    def B2(self, k):
        return self.scheme.variances.B2(k)

    def a(self, k):
        """Centering ``a_{n,k}`` (equals ``A_{n,k}`` in both modes)."""
        b2 = np.asarray(self.B2(k), dtype=float)
        if self.rho == 1.0:
            return self.alpha * b2 / self.dn
        return self.alpha * b2 ** ((self.rho + 1.0) / 2.0) / self.dn ** self.rho

    A = a

    def mu(self, j):
        j = np.asarray(j)
        if self.rho == 1.0:
            return self.alpha * self.sigma(j) ** 2 / self.dn
        return self.a(j) - np.where(j > 1, self.a(np.maximum(j - 1, 1)), 0.0)

    def summand(self, j: int) -> dist.SummandFamily:
        """The law of ``X_{n,j}``."""
        return dist.rescaled(self.scheme.shape, float(self.mu(j)), float(self.sigma(j)))

    def un_vn(self, k):
        """``(b_{n,k}/d_n, (a_{n,k} - c_n)/d_n)``."""
        return np.sqrt(self.B2(k)) / self.dn, (self.a(k) - self.cn) / self.dn

    # -- simulation -------------------------------------------------------------

    def _sums(self, ks: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """``S_{n,k}`` for each entry of ``ks`` (independent summands each)."""
        total = int(ks.sum())
        starts = np.concatenate([[0], np.cumsum(ks)[:-1]])
        j = np.arange(total) - np.repeat(starts, ks) + 1
        xi = dist.sample(self.scheme.standard_shape, rng, total)
        x = self.mu(j) + self.sigma(j) * xi
        return np.add.reduceat(x, starts)


def _stream(seed: int, tag: int, n: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(tag, n, block))
    return np.random.Generator(np.random.PCG64(ss))


def _blocked(fn, seed: int, tag: int, n: int, replicates: int, workers: int) -> np.ndarray:
    """Run ``fn(rng, size)`` over fixed-size replicate blocks.

    Each block owns a stream keyed by (seed, tag, n, block index), so the
    concatenated output does not depend on ``workers``.
    """
    if replicates < 1:
        raise ValueError("replicates must be at least 1")
    sizes = [min(BLOCK, replicates - s) for s in range(0, replicates, BLOCK)]
    jobs = [(_stream(seed, tag, n, b), size) for b, size in enumerate(sizes)]
    if workers <= 1 or len(jobs) == 1:
        parts = [fn(rng, size) for rng, size in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: fn(*job), jobs))
    return np.concatenate(parts)


def B2(scheme: DoubleArrayScheme, n: int, k):
    return scheme.row(n).B2(k)


def A(scheme: DoubleArrayScheme, n: int, k):
    return scheme.row(n).A(k)


def dn(scheme: DoubleArrayScheme, n: int) -> float:
    return scheme.row(n).dn


def un_vn(scheme: DoubleArrayScheme, n: int, k):
    return scheme.row(n).un_vn(k)


def sample_index(scheme: DoubleArrayScheme, n: int, replicates: int, seed: int,
                 workers: int = 1) -> np.ndarray:
    """Draws of ``N_n`` from the index stream (shared by the U/V simulators)."""
    law = scheme.row(n).law
    return _blocked(lambda rng, size: il.sample(law, rng, size), seed, TAG_INDEX, n,
                    replicates, workers)


def simulate_sample(scheme: DoubleArrayScheme, n: int, replicates: int, seed: int,
                    workers: int = 1) -> EmpiricalDistribution:
    """Replicates of ``Z_n = (S_{n,N_n} - c_n) / d_n``."""
    row = scheme.row(n)

    def block(rng, size):
        ks = il.sample(row.law, rng, size)
        return (row._sums(ks, rng) - row.cn) / row.dn

    return EmpiricalDistribution(_blocked(block, seed, TAG_SUMS, n, replicates, workers))


def simulate_u_scaled(scheme: DoubleArrayScheme, n: int, replicates: int, seed: int,
                      workers: int = 1) -> EmpiricalDistribution:
    """Replicates of ``B_{n,N_n}**2 / E B_{n,N_n}**2``."""
    row = scheme.row(n)
    ks = sample_index(scheme, n, replicates, seed, workers)
    return EmpiricalDistribution(row.B2(ks) / row.dn ** 2)


def simulate_uv(scheme: DoubleArrayScheme, n: int, replicates: int, seed: int,
                workers: int = 1) -> np.ndarray:
    """``(U_n, V_n)`` pairs as an ``(replicates, 2)`` array."""
    row = scheme.row(n)
    ks = sample_index(scheme, n, replicates, seed, workers)
    u, v = row.un_vn(ks)
    return np.column_stack([u, v])


def tightness(scheme: DoubleArrayScheme, n: int, k: int, radii=(2.0, 4.0, 8.0),
              replicates: int = 100_000, seed: int = 0, workers: int = 1) -> dict:
    """Estimate ``P(|Y_{n,k}| > R)`` with its standard error for each radius.

    ``Y_{n,k} = (S_{n,k} - A_{n,k}) / B_{n,k}`` has unit variance, so Markov's
    inequality caps each probability at ``1/R**2``.
    """
    row = scheme.row(n)
    b = math.sqrt(float(row.B2(k)))
    a = float(row.A(k))

    def block(rng, size):
        return (row._sums(np.full(size, k), rng) - a) / b

    y = np.abs(_blocked(block, seed, TAG_TIGHTNESS, n * 1_000_003 + k, replicates, workers))
    out = {}
    for R in radii:
        p = float(np.mean(y > R))
        out[R] = (p, math.sqrt(max(p * (1.0 - p), 1e-300) / replicates))
    return out
