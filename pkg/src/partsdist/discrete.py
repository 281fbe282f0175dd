"""Named summation-by-parts families.

* lambda-class: ``u_i = (i+1)^lambda``
* r-class: ``u_i = r^i`` with pgf-based pmf, pgf and mean
* ``u_i = r^i - 1/r``
* product class ``u_i = prod_{s=1}^t (i+s)``
* geometric long tail (the r-class transform run in reverse)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sbp import DescendantPmf, DiscreteParent, USequence, poisson_pgf, negbin_pgf, binomial_pgf
from .specialfn import expm1mx, log1pmx

__all__ = [
    "LambdaClass",
    "RClass",
    "RMinusClass",
    "ProductU",
    "bissinger",
    "r_class_r1_limit",
    "r_class_mean_stable",
    "r_class_norm_mean",
    "geometric_longtail_pmf",
    "geometric_longtail_pgf",
    "poisson_pgf",
    "negbin_pgf",
    "binomial_pgf",
]


@dataclass(frozen=True)
class LambdaClass:
    """``q_i = ((i+1)^lambda - i^lambda) sum_{j>=i} p_j / (j+1)^lambda``."""

    parent: DiscreteParent
    lam: float
    desc: DescendantPmf = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "desc", DescendantPmf(self.parent, USequence.power(self.lam)))

    @property
    def q(self) -> np.ndarray:
        return self.desc.q

    def pmf(self, i=None):
        return self.desc.pmf(i)

    def cdf(self, k):
        return self.desc.cdf(k)

    def mean(self) -> float:
        # no closed form: cutoff summation over the truncated support
        return self.desc.mean_direct()

    def rvs(self, rng, size):
        return self.desc.rvs(rng, size)


def bissinger(parent: DiscreteParent, lam: float) -> LambdaClass:
    """Generalized Bissinger system: the lambda-class of the parent shifted
    down by one, ``q_i = ((i+1)^lambda - i^lambda) sum_{j>i} p_j / j^lambda``.

    A parent with ``p_0 > 0`` is zero-truncated first.
    """
    p = parent.pmf
    if p.size < 2:
        raise ValueError("parent needs mass above zero")
    shifted = p[1:] / (1.0 - p[0])
    return LambdaClass(DiscreteParent(shifted, name=f"{parent.name}-shifted"), lam)


def _stable_norm_mean(ls, mu, delta):
    """Normalizer ``1 - H_0(1/r)/r`` and r-class mean, cancellation-free.

    ``ls = ln H_0(1 - delta) + mu delta`` and ``delta = 1 - 1/r``.
    """
    L = ls - mu * delta
    em = np.expm1(L)
    D = -em + delta * np.exp(L)
    N = expm1mx(L) + ls - delta * em
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = N / (delta * D)
    return D, mean


def _closed_log_pgf_shift(kind, mu, delta, alpha=None, n=None):
    if kind == "poisson":
        return np.zeros_like(mu)
    if kind == "negbin":
        return -log1pmx(mu * alpha * delta) / alpha
    if kind == "binomial":
        return n * log1pmx(-(mu / n) * delta)
    raise ValueError(f"no closed-form pgf for {kind}")


def r_class_norm_mean(kind: str, mu, r: float, alpha: float | None = None, n: int | None = None):
    """Normalizer ``1 - H_0(1/r)/r`` and r-class mean for closed-form parents.

    Vectorized over the parent mean ``mu``.  ``kind`` is ``"poisson"``,
    ``"negbin"`` (dispersion ``alpha``) or ``"binomial"`` (size ``n``).
    """
    mu = np.asarray(mu, dtype=float)
    delta = 1.0 - 1.0 / r
    if not delta > 0:
        raise ValueError("r must exceed 1")
    return _stable_norm_mean(_closed_log_pgf_shift(kind, mu, delta, alpha, n), mu, delta)


def r_class_mean_stable(kind: str, mu, r, alpha: float | None = None, n: int | None = None):
    """r-class mean ``(mu+1)/(1 - H_0(1/r)/r) - r/(r-1)`` for closed-form parents.

    At ``r = 1`` the partial-sum limit mean
    ``(mu + (sigma^2 + mu^2 - mu)/2) / (1 + mu)`` is returned.
    """
    mu = np.asarray(mu, dtype=float)
    if r <= 1:
        if kind == "poisson":
            var = mu
        elif kind == "negbin":
            var = mu + alpha * mu * mu
        elif kind == "binomial":
            var = mu * (1.0 - mu / n)
        else:
            raise ValueError(f"no closed-form pgf for {kind}")
        return (mu + (var + mu * mu - mu) / 2.0) / (1.0 + mu)
    return r_class_norm_mean(kind, mu, r, alpha, n)[1]


@dataclass(frozen=True)
class RClass:
    """``u_i = r^i``: ``q_i = H_i(1/r) r^i (1 - 1/r) / (1 - H_0(1/r)/r)``.

    ``H_i(x) = sum_{j>=i} p_j x^j``.  The normalizer comes from the parent's
    closed-form pgf when available.
    """

    parent: DiscreteParent
    r: float
    desc: DescendantPmf = field(init=False, repr=False)

    def __post_init__(self):
        if not self.r > 1:
            raise ValueError("r must exceed 1")
        norm = None
        if self.parent.log_pgf_shift is not None:
            norm = float(self.normalizer_closed())
        object.__setattr__(self, "desc", DescendantPmf(self.parent, USequence.geometric(self.r), norm))

    @property
    def delta(self) -> float:
        return 1.0 - 1.0 / self.r

    def normalizer_closed(self) -> float:
        """``1 - H_0(1/r)/r`` from the parent pgf."""
        d = self.delta
        return float(_stable_norm_mean(self.parent.log_pgf_shift(d), self.parent.mean, d)[0])

    @property
    def q(self) -> np.ndarray:
        return self.desc.q

    def pmf(self, i=None):
        return self.desc.pmf(i)

    def pmf_pgf(self, i: int) -> float:
        """``q_i`` with ``H_i(1/r)`` formed as ``H_0(1/r)`` minus its leading terms."""
        x = 1.0 / self.r
        h0 = float(self.parent.pgf_value(x))
        p = self.parent.pmf
        lead = math.fsum(p[j] * x ** j for j in range(min(i, p.size)))
        hi = h0 - lead
        return hi * self.r ** i * (1.0 - x) / (1.0 - h0 * x)

    def cdf(self, k):
        return self.desc.cdf(k)

    def pgf(self, s):
        """``M(s) = (r-1)/(rs-1) (s H_0(s) - H_0(1/r)/r) / (1 - H_0(1/r)/r)``."""
        s = np.asarray(s, dtype=float)
        x = 1.0 / self.r
        h0x = float(self.parent.pgf_value(x))
        den = 1.0 - h0x * x
        hs = np.asarray(self.parent.pgf_value(s), dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            main = (self.r - 1.0) / (self.r * s - 1.0) * (s * hs - h0x * x) / den
        near = np.abs(self.r * s - 1.0) < 1e-6
        if np.any(near):
            # phi(s) = s H_0(s); (phi(s) - phi(x)) / (s - x) ~ phi'(x) + phi''(x)(s - x)/2
            p = self.parent.pmf
            j = np.arange(p.size, dtype=float)
            d1 = float(np.sum((j + 1.0) * p * x ** j))
            d2 = float(np.sum((j + 1.0) * j * p * x ** np.maximum(j - 1.0, 0.0)))
            series = self.delta / den * (d1 + 0.5 * d2 * (s - x))
            main = np.where(near, series, main)
        return main[()] if main.ndim == 0 else main

    def mean(self) -> float:
        """Closed-form mean ``(mu+1)/(1 - H_0(1/r)/r) - r/(r-1)``."""
        if self.parent.log_pgf_shift is not None:
            d = self.delta
            return float(_stable_norm_mean(self.parent.log_pgf_shift(d), self.parent.mean, d)[1])
        x = 1.0 / self.r
        h0x = float(self.parent.pgf_value(x))
        return (self.parent.mean + 1.0) / (1.0 - h0x * x) - self.r / (self.r - 1.0)

    def rvs(self, rng, size):
        """Inverse transform: ``M = floor(1 + ln((r^K - 1/r) U + 1/r) / ln r)``.

        Parent draws are kept with probability ``1 - r^-(K+1)`` first.
        """
        lr = math.log(self.r)
        k = np.empty(0, dtype=np.int64)
        while k.size < size:
            batch = int((size - k.size) / self.desc.normalizer * 1.1) + 16
            cand = self.parent.rvs(rng, batch)
            keep = rng.random(batch) >= np.exp(-lr * (cand + 1.0))
            k = np.concatenate([k, cand[keep]])
        k = k[:size]
        u = rng.random(size)
        tiny = np.exp(-lr * (k + 1.0))
        m = k + np.log(u * (1.0 - tiny) + tiny) / lr
        return np.minimum(np.floor(m + 1.0).astype(np.int64), k)


def r_class_r1_limit(parent: DiscreteParent, i=None):
    """Limit of the r-class as ``r -> 1``: ``q_i = sum_{j>=i} p_j / (1 + mu)``."""
    tail = np.cumsum(parent.pmf[::-1])[::-1]
    q = tail / (1.0 + parent.mean)
    if i is None:
        return q
    i = np.asarray(i)
    out = np.where((i >= 0) & (i <= parent.n), q[np.clip(i, 0, parent.n)], 0.0)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class RMinusClass:
    """``u_i = r^i - 1/r``: ``q_i = r^i (1 - 1/r) sum_{j>=i} p_j / (r^j - 1/r)``."""

    parent: DiscreteParent
    r: float
    desc: DescendantPmf = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "desc", DescendantPmf(self.parent, USequence.geometric_minus(self.r)))

    @property
    def q(self) -> np.ndarray:
        return self.desc.q

    def pmf(self, i=None):
        return self.desc.pmf(i)

    def mean(self) -> float:
        return self.desc.mean()

    def rvs(self, rng, size):
        return self.desc.rvs(rng, size)

    @staticmethod
    def r1_limit(parent: DiscreteParent) -> np.ndarray:
        """``q_i = sum_{j>=i} p_j / (j+1)``."""
        p = parent.pmf
        return np.cumsum((p / np.arange(1, p.size + 1))[::-1])[::-1]


@dataclass(frozen=True)
class ProductU:
    """``u_i = prod_{s=1}^t (i+s)``; mean ``t mu/(t+1)``."""

    parent: DiscreteParent
    t: int
    desc: DescendantPmf = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "desc", DescendantPmf(self.parent, USequence.product(self.t)))

    @property
    def q(self) -> np.ndarray:
        return self.desc.q

    def pmf(self, i=None):
        return self.desc.pmf(i)

    def mean(self) -> float:
        return self.t * self.parent.mean / (self.t + 1.0)

    def variance(self) -> float:
        t, mu, s2 = self.t, self.parent.mean, self.parent.variance
        return t * s2 / (t + 2.0) + t * mu * mu / ((t + 1.0) ** 2 * (t + 2.0)) + t * mu / ((t + 1.0) * (t + 2.0))

    def rvs(self, rng, size):
        return self.desc.rvs(rng, size)


def geometric_longtail_pgf(parent: DiscreteParent, r: float, s):
    """``M(s) = (r-1)/(r-s) H_0(s)``: parent plus an independent geometric."""
    if not r > 1:
        raise ValueError("r must exceed 1")
    s = np.asarray(s)
    return (r - 1.0) / (r - s) * parent.pgf_value(s)


def geometric_longtail_pmf(parent: DiscreteParent, r: float, size: int) -> np.ndarray:
    """First ``size`` probabilities of the ``v_i = r^-i`` long-tail transform.

    ``p_i = (1 - 1/r) sum_{j<=i} q_j r^(j-i)``, accumulated forward.
    """
    if not r > 1:
        raise ValueError("r must exceed 1")
    q = np.zeros(size)
    m = min(size, parent.pmf.size)
    q[:m] = parent.pmf[:m]
    out = np.empty(size)
    acc = 0.0
    x = 1.0 / r
    for i in range(size):
        acc = acc * x + q[i]
        out[i] = (1.0 - x) * acc
    return out
