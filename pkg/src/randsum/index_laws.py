"""Laws of the random index ``N_n`` (support on the positive integers)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate, stats

DEFAULT_TAIL_EPS = 1e-12
DEFAULT_MAX_ATOMS = 10 ** 7


class TruncationError(RuntimeError):
    """Truncated support would exceed the atom cap; use Monte Carlo instead."""


@dataclass(frozen=True)
class Deterministic:
    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"Deterministic.k must be a positive integer, got {self.k}")


@dataclass(frozen=True)
class Geometric:
    """``P(N = k) = p (1 - p)^(k-1)``, ``k >= 1``."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"Geometric.p must lie in (0, 1], got {self.p}")


@dataclass(frozen=True)
class MixedPoissonGamma:
    """Poisson with Gamma(shape r, mean m) intensity, conditioned on ``N >= 1``.

    Unconditionally this is negative binomial with ``n = r`` and
    ``p = r / (r + m)``.
    """

    r: float
    mean: float

    def __post_init__(self):
        if not (self.r > 0 and self.mean > 0):
            raise ValueError("MixedPoissonGamma needs r > 0 and mean > 0")

    @property
    def _nb(self):
        return stats.nbinom(self.r, self.r / (self.r + self.mean))

    @property
    def _p0(self) -> float:
        # P(N = 0) of the unconditioned law
        return math.exp(self.r * (math.log(self.r) - math.log(self.r + self.mean)))


IndexLaw = Union[Deterministic, Geometric, MixedPoissonGamma]


@dataclass(frozen=True)
class TruncatedSupport:
    """Atoms ``ks`` with renormalized weights; ``tail_mass`` was cut off."""

    ks: np.ndarray
    weights: np.ndarray
    tail_mass: float

    @property
    def kmax(self) -> int:
        return int(self.ks[-1])

    def expect(self, values) -> float:
        """Compensated weighted sum ``sum_k w_k values_k``."""
        return math.fsum(np.asarray(self.weights * np.asarray(values, dtype=float)).tolist())


def pmf(law: IndexLaw, k):
    k = np.asarray(k)
    if isinstance(law, Deterministic):
        out = (k == law.k).astype(float)
    elif isinstance(law, Geometric):
        with np.errstate(divide="ignore"):
            out = np.where(k >= 1, law.p * np.exp((k - 1) * np.log1p(-law.p)), 0.0)
    elif isinstance(law, MixedPoissonGamma):
        out = np.where(k >= 1, law._nb.pmf(k) / (1.0 - law._p0), 0.0)
    else:
        raise TypeError(f"unknown index law {law!r}")
    return float(out) if out.ndim == 0 else out


def _cutoff(law: IndexLaw, tail_eps: float) -> int:
    """Smallest K with ``P(N > K) <= tail_eps``."""
    if isinstance(law, Deterministic):
        return law.k
    if isinstance(law, Geometric):
        if law.p == 1.0:
            return 1
        K = max(1, math.ceil(math.log(tail_eps) / math.log1p(-law.p)))
        while K > 1 and (1.0 - law.p) ** (K - 1) <= tail_eps:
            K -= 1
        return K
    if isinstance(law, MixedPoissonGamma):
        q = tail_eps * (1.0 - law._p0)
        K = max(1, int(law._nb.isf(q)))
        nb = law._nb
        while nb.sf(K) > q:
            K += 1
        while K > 1 and nb.sf(K - 1) <= q:
            K -= 1
        return K
    raise TypeError(f"unknown index law {law!r}")


def truncate(law: IndexLaw, tail_eps: float = DEFAULT_TAIL_EPS,
             max_atoms: int = DEFAULT_MAX_ATOMS) -> TruncatedSupport:
    if not 0.0 < tail_eps <= 1e-6:
        raise ValueError(f"tail_eps must lie in (0, 1e-6], got {tail_eps}")
    if isinstance(law, Deterministic):
        if law.k > max_atoms:
            raise TruncationError(f"support point {law.k} exceeds the cap of {max_atoms} atoms")
        return TruncatedSupport(np.array([law.k]), np.array([1.0]), 0.0)
    K = _cutoff(law, tail_eps)
    if K > max_atoms:
        raise TruncationError(
            f"{law!r} needs {K} atoms for tail mass {tail_eps:g}; cap is {max_atoms}")
    ks = np.arange(1, K + 1)
    w = pmf(law, ks)
    total = math.fsum(w.tolist())
    return TruncatedSupport(ks, w / total, max(0.0, 1.0 - total))


def psi(law: IndexLaw, s, tail_eps: float = DEFAULT_TAIL_EPS):
    """Generating function ``E s^N`` over the truncated support."""
    s = np.asarray(s, dtype=float)
    if np.any((s < 0) | (s > 1)):
        raise ValueError("generating function argument must lie in [0, 1]")
    sup = truncate(law, tail_eps)
    out = _series(sup, s, shift=0)
    return float(out) if out.ndim == 0 else out


def _series(sup: TruncatedSupport, s: np.ndarray, shift: int) -> np.ndarray:
    # sum_k w_k s^(k - shift), evaluated as exp((k - shift) log s) to stay vectorized
    flat = np.atleast_1d(s).ravel()
    out = np.empty(flat.shape)
    powers = (sup.ks - shift).astype(float)
    for i, si in enumerate(flat):
        if si == 0.0:
            out[i] = float(np.sum(sup.weights[powers == 0]))
        else:
            out[i] = float(np.dot(sup.weights, np.exp(powers * math.log(si))))
    return out.reshape(s.shape)


def psi_integral(law: IndexLaw, tail_eps: float = DEFAULT_TAIL_EPS) -> float:
    """``int_0^1 psi(s)/s ds`` (``= E[1/N]``) by adaptive quadrature."""
    sup = truncate(law, tail_eps)
    integrand = lambda s: float(_series(sup, np.array(s), shift=1))
    # the integrand concentrates within ~1/E[N] of s = 1
    m = mean_index(law, tail_eps)
    breaks = sorted({b for b in (1.0 - 1.0 / m, 1.0 - 10.0 / m, 1.0 - 100.0 / m) if 0.0 < b < 1.0})
    edges = [0.0, *breaks, 1.0]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(integrand, a, b, epsabs=1e-14, epsrel=1e-12, limit=200)
        total += val
    return total


def mean_index(law: IndexLaw, tail_eps: float = DEFAULT_TAIL_EPS) -> float:
    if isinstance(law, Deterministic):
        return float(law.k)
    if isinstance(law, Geometric):
        return 1.0 / law.p
    if isinstance(law, MixedPoissonGamma):
        return law.mean / (1.0 - law._p0)
    raise TypeError(f"unknown index law {law!r}")


def sample(law: IndexLaw, rng: np.random.Generator, size=None):
    """Draw ``N``; one int when ``size`` is None."""
    if isinstance(law, Deterministic):
        out = np.full(() if size is None else size, law.k, dtype=np.int64)
    elif isinstance(law, Geometric):
        out = rng.geometric(law.p, size)
    elif isinstance(law, MixedPoissonGamma):
        p = law.r / (law.r + law.mean)
        out = np.asarray(rng.negative_binomial(law.r, p, size), dtype=np.int64)
        # condition on N >= 1 by redrawing zeros
        zeros = np.flatnonzero(np.atleast_1d(out) == 0)
        flat = np.atleast_1d(out)
        while zeros.size:
            flat[zeros] = rng.negative_binomial(law.r, p, zeros.size)
            zeros = zeros[flat[zeros] == 0]
        out = flat.reshape(np.shape(out))
    else:
        raise TypeError(f"unknown index law {law!r}")
    return int(out) if size is None else np.asarray(out, dtype=np.int64)


def expected_inverse_sqrt(law: IndexLaw, tail_eps: float = DEFAULT_TAIL_EPS) -> float:
    """``E[1/sqrt(N)]`` by truncated sum."""
    sup = truncate(law, tail_eps)
    return sup.expect(1.0 / np.sqrt(sup.ks))
