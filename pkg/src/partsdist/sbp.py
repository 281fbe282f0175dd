"""Summation-by-parts transforms of discrete distributions.

A parent pmf on ``0..n`` is written as ``p_i = -u_i (v_{i+1} - v_i)`` with
``u`` nondecreasing.  Summation by parts then gives the descendant pmf
``q_i = v_i (u_i - u_{i-1}) / (1 - u_{-1} v_0)``.

Internally everything is carried in the scaled form ``w_i = u_i v_i``,
which needs only the ratios ``u_{i-1} / u_i`` and so never overflows for
fast-growing ``u`` such as ``r^i``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import stats

__all__ = [
    "DiscreteParent",
    "USequence",
    "DescendantPmf",
    "v_sequence",
    "descendant_pmf",
    "r_to_l_longtail",
    "PowerLongTail",
    "TAIL_MASS",
]

TAIL_MASS = 1e-12


@dataclass(frozen=True)
class DiscreteParent:
    """Parent pmf on ``0..N``, truncated where the tail mass is below 1e-12.

    ``log_pgf_shift(d)`` returns ``ln H_0(1 - d) + mean * d`` computed
    without cancellation; families with closed-form pgfs supply it.
    """

    pmf: np.ndarray
    name: str = "parent"
    params: dict = field(default_factory=dict)
    pgf: Optional[Callable] = None
    log_pgf_shift: Optional[Callable] = None
    exact_mean: Optional[float] = None
    exact_variance: Optional[float] = None

    def __post_init__(self):
        p = np.asarray(self.pmf, dtype=float)
        if p.ndim != 1 or p.size == 0 or np.any(p < 0):
            raise ValueError("pmf must be a nonempty nonnegative vector")
        total = p.sum()
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"pmf sums to {total}")
        object.__setattr__(self, "pmf", p / total)

    @property
    def n(self) -> int:
        return self.pmf.size - 1

    @property
    def mean(self) -> float:
        if self.exact_mean is not None:
            return self.exact_mean
        return float(np.arange(self.pmf.size) @ self.pmf)

    @property
    def variance(self) -> float:
        if self.exact_variance is not None:
            return self.exact_variance
        i = np.arange(self.pmf.size)
        return float((i * i) @ self.pmf - self.mean ** 2)

    def raw_moment(self, r: int) -> float:
        return float(np.arange(self.pmf.size, dtype=float) ** r @ self.pmf)

    def cdf(self) -> np.ndarray:
        return np.minimum(np.cumsum(self.pmf), 1.0)

    def sf_array(self) -> np.ndarray:
        """``P(X > i)`` by backward accumulation."""
        tail = np.cumsum(self.pmf[::-1])[::-1]
        return np.append(tail[1:], 0.0)

    def pgf_value(self, s) -> float:
        if self.pgf is not None:
            return self.pgf(s)
        return np.polyval(self.pmf[::-1], s)

    def rvs(self, rng: np.random.Generator, size: int) -> np.ndarray:
        cum = np.cumsum(self.pmf)
        cum[-1] = 1.0
        return np.searchsorted(cum, rng.random(size), side="right")

    # constructors --------------------------------------------------------

    @classmethod
    def from_frozen(cls, frozen, name: str, **kw) -> "DiscreteParent":
        n = int(frozen.isf(TAIL_MASS)) + 1
        lo, hi = frozen.support()
        if math.isfinite(hi):
            n = int(hi)
        p = frozen.pmf(np.arange(n + 1))
        return cls(p, name=name, **kw)

    @classmethod
    def poisson(cls, mu: float) -> "DiscreteParent":
        if not mu > 0:
            raise ValueError("mu must be positive")
        return cls.from_frozen(
            stats.poisson(mu), "poisson", params={"mu": mu},
            pgf=lambda s: poisson_pgf(mu, s),
            log_pgf_shift=lambda d: np.zeros_like(np.asarray(d, dtype=float)),
            exact_mean=mu, exact_variance=mu,
        )

    @classmethod
    def negbin(cls, mu: float, alpha: float) -> "DiscreteParent":
        """Negative binomial with mean ``mu`` and variance ``mu + alpha mu^2``."""
        if not (mu > 0 and alpha > 0):
            raise ValueError("mu and alpha must be positive")
        from .specialfn import log1pmx

        frozen = stats.nbinom(1.0 / alpha, 1.0 / (1.0 + alpha * mu))
        return cls.from_frozen(
            frozen, "negbin", params={"mu": mu, "alpha": alpha},
            pgf=lambda s: negbin_pgf(mu, alpha, s),
            log_pgf_shift=lambda d: -log1pmx(mu * alpha * np.asarray(d, dtype=float)) / alpha,
            exact_mean=mu, exact_variance=mu + alpha * mu * mu,
        )

    @classmethod
    def binomial(cls, n: int, p: float) -> "DiscreteParent":
        if not (n >= 1 and 0 < p < 1):
            raise ValueError("need n >= 1 and 0 < p < 1")
        from .specialfn import log1pmx

        return cls(
            stats.binom(n, p).pmf(np.arange(n + 1)), name="binomial", params={"n": n, "p": p},
            pgf=lambda s: binomial_pgf(n, p, s),
            log_pgf_shift=lambda d: n * log1pmx(-p * np.asarray(d, dtype=float)),
            exact_mean=n * p, exact_variance=n * p * (1 - p),
        )

    @classmethod
    def point_mass(cls, k: int) -> "DiscreteParent":
        p = np.zeros(k + 1)
        p[k] = 1.0
        return cls(p, name="point", params={"k": k}, pgf=lambda s: s ** k)


def poisson_pgf(mu, s):
    return np.exp(-mu * (1.0 - np.asarray(s)))


def negbin_pgf(mu, alpha, s):
    return (1.0 + mu * alpha * (1.0 - np.asarray(s))) ** (-1.0 / alpha)


def binomial_pgf(n, p, s):
    return (1.0 - p + p * np.asarray(s)) ** n


@dataclass(frozen=True)
class USequence:
    """Nondecreasing positive sequence ``u_i`` on ``i >= -1``.

    Specified by ``log_u(i)`` for ``i >= 0`` and ``ratio(i) = u_{i-1}/u_i``
    for ``i >= 0`` (so ``ratio(0) = u_{-1}/u_0``).  Both act on integer arrays.
    """

    log_u: Callable
    ratio: Callable
    name: str = "u"

    @property
    def u_minus_one(self) -> float:
        return float(self.ratio(np.array([0]))[0] * math.exp(self.log_u(np.array([0]))[0]))

    def values(self, n: int) -> np.ndarray:
        """``u_{-1}, u_0, ..., u_n`` (may overflow for fast growth)."""
        return np.concatenate([[self.u_minus_one], np.exp(self.log_u(np.arange(n + 1)))])

    @classmethod
    def power(cls, lam: float) -> "USequence":
        """``u_i = (i+1)^lambda``."""
        if not lam > 0:
            raise ValueError("lambda must be positive")
        return cls(
            log_u=lambda i: lam * np.log1p(np.asarray(i, dtype=float)),
            ratio=lambda i: np.exp(lam * (np.log(np.maximum(i, 1e-300)) - np.log1p(np.asarray(i, dtype=float))))
            * (np.asarray(i) > 0),
            name=f"power({lam})",
        )

    @classmethod
    def geometric(cls, r: float) -> "USequence":
        """``u_i = r^i``, so ``u_{-1} = 1/r``."""
        if not r > 1:
            raise ValueError("r must exceed 1")
        lr = math.log(r)
        return cls(
            log_u=lambda i: lr * np.asarray(i, dtype=float),
            ratio=lambda i: np.full(np.shape(i), 1.0 / r),
            name=f"geometric({r})",
        )

    @classmethod
    def geometric_minus(cls, r: float) -> "USequence":
        """``u_i = r^i - 1/r``, zero at ``i = -1``."""
        if not r > 1:
            raise ValueError("r must exceed 1")
        lr = math.log(r)
        return cls(
            log_u=lambda i: np.log(np.expm1(lr * (np.asarray(i, dtype=float) + 1.0))) - lr,
            ratio=lambda i: _expm1_ratio_seq(lr, np.asarray(i, dtype=float)),
            name=f"geometric-minus({r})",
        )

    @classmethod
    def product(cls, t: int) -> "USequence":
        """``u_i = prod_{s=1}^t (i + s)``."""
        if int(t) != t or t < 1:
            raise ValueError("t must be a positive integer")
        from scipy.special import gammaln

        return cls(
            log_u=lambda i: gammaln(np.asarray(i, dtype=float) + t + 1.0) - gammaln(np.asarray(i, dtype=float) + 1.0),
            ratio=lambda i: np.asarray(i, dtype=float) / (np.asarray(i, dtype=float) + t),
            name=f"product({t})",
        )

    @classmethod
    def constant(cls, c: float = 1.0, c_minus_one: float = 0.0) -> "USequence":
        return cls(
            log_u=lambda i: np.full(np.shape(i), math.log(c)),
            ratio=lambda i: np.where(np.asarray(i) == 0, c_minus_one / c, 1.0),
            name="constant",
        )

    @classmethod
    def from_values(cls, fn: Callable[[np.ndarray], np.ndarray], name: str = "u") -> "USequence":
        """Build from a callable giving ``u_i`` for integer arrays including -1."""
        return cls(
            log_u=lambda i: np.log(fn(np.asarray(i))),
            ratio=lambda i: fn(np.asarray(i) - 1) / fn(np.asarray(i)),
            name=name,
        )


def _expm1_ratio_seq(lr, i):
    # (r^i - 1) / (r^(i+1) - 1) written with expm1
    num = np.expm1(lr * i)
    return num / np.expm1(lr * (i + 1.0))


def _scaled_tail(pmf: np.ndarray, ratio_next: np.ndarray) -> np.ndarray:
    # w_i = p_i + (u_i/u_{i+1}) w_{i+1}; ratio_next[i] = u_i / u_{i+1}
    n = pmf.size
    w = np.empty(n + 1)
    w[n] = 0.0
    for i in range(n - 1, -1, -1):
        w[i] = pmf[i] + ratio_next[i] * w[i + 1]
    return w


def v_sequence(parent: DiscreteParent, u: USequence) -> np.ndarray:
    """``v_0 .. v_{n+1}`` with ``v_i = sum_{j>=i} p_j / u_j`` and ``v_{n+1} = 0``."""
    n = parent.n
    lu = np.asarray(u.log_u(np.arange(n + 1)), dtype=float)
    v = np.empty(n + 2)
    v[n + 1] = 0.0
    for i in range(n, -1, -1):
        v[i] = v[i + 1] + parent.pmf[i] * math.exp(-lu[i])
    return v


@dataclass(frozen=True)
class DescendantPmf:
    parent: DiscreteParent
    u: USequence
    normalizer_override: Optional[float] = None
    w: np.ndarray = field(init=False, repr=False)
    ratios: np.ndarray = field(init=False, repr=False)
    normalizer: float = field(init=False)
    q: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.parent.n
        ratios = np.asarray(self.u.ratio(np.arange(n + 2)), dtype=float)  # u_{i-1}/u_i, i = 0..n+1
        w = _scaled_tail(self.parent.pmf, ratios[1:])
        norm = 1.0 - ratios[0] * w[0] if self.normalizer_override is None else self.normalizer_override
        if not norm > 0:
            raise ValueError(f"nonpositive normalizer {norm}")
        if norm < 1e-6:
            warnings.warn(f"descendant normalizer {norm:.3g} is close to zero", RuntimeWarning, stacklevel=2)
        q = w[:-1] * (1.0 - ratios[: n + 1]) / norm
        object.__setattr__(self, "ratios", ratios)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "normalizer", norm)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.parent.n

    @property
    def v(self) -> np.ndarray:
        lu = np.asarray(self.u.log_u(np.arange(self.n + 1)), dtype=float)
        return np.append(self.w[:-1] * np.exp(-lu), 0.0)

    def pmf(self, i=None):
        if i is None:
            return self.q
        i = np.asarray(i)
        inside = (i >= 0) & (i <= self.n)
        out = np.where(inside, self.q[np.clip(i, 0, self.n)], 0.0)
        return out[()] if out.ndim == 0 else out

    def cdf_array(self) -> np.ndarray:
        """Distribution function from the boundary-term identity."""
        F = self.parent.cdf()
        uk_vk1 = self.ratios[1:] * self.w[1:]  # u_k v_{k+1}, k = 0..n
        ul_v0 = self.ratios[0] * self.w[0]
        G = (F + uk_vk1 - ul_v0) / self.normalizer
        return np.minimum(G, 1.0)

    def cdf(self, k):
        G = self.cdf_array()
        k = np.asarray(k)
        out = np.where(k < 0, 0.0, np.where(k >= self.n, 1.0, G[np.clip(k, 0, self.n)]))
        return out[()] if out.ndim == 0 else out

    def sf_array(self) -> np.ndarray:
        tail = np.cumsum(self.q[::-1])[::-1]
        return np.append(tail[1:], 0.0)

    def mean(self) -> float:
        """Mean by reversing the order of summation."""
        return self.moment(1)

    def moment(self, r: int) -> float:
        """``r``-th raw moment, ``(mu^(r) - sum_i T_i p_i) / (1 - u_{-1} v_0)``.

        ``T_i = sum_{j<i} ((j+1)^r - j^r) u_j / u_i`` is accumulated with
        ratios only.
        """
        if r < 1:
            raise ValueError("order must be >= 1")
        p = self.parent.pmf
        n = self.n
        T = np.zeros(n + 1)
        for i in range(1, n + 1):
            j = i - 1
            T[i] = (T[i - 1] + ((j + 1) ** r - j ** r)) * self.ratios[i]
        return float((self.parent.raw_moment(r) - T @ p) / self.normalizer)

    def mean_direct(self) -> float:
        return float(np.arange(self.n + 1) @ self.q)

    def rvs(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Parent draw ``K`` then table lookup on ``(u_i - u_{-1})/(u_K - u_{-1})``.

        When ``u_{-1} > 0``, ``K`` is first accepted with probability
        ``1 - u_{-1}/u_K``.
        """
        lu = np.asarray(self.u.log_u(np.arange(self.n + 1)), dtype=float)
        rel_minus = self.ratios[0]  # u_{-1}/u_0
        if rel_minus > 0:
            accept = 1.0 - rel_minus * np.exp(lu[0] - lu)
            k = np.empty(0, dtype=np.int64)
            while k.size < size:
                batch = int((size - k.size) / self.normalizer * 1.1) + 16
                cand = self.parent.rvs(rng, batch)
                k = np.concatenate([k, cand[rng.random(batch) < accept[cand]]])
            k = k[:size]
        else:
            k = self.parent.rvs(rng, size)
        unif = rng.random(size)
        out = np.empty(size, dtype=np.int64)
        for kk in np.unique(k):
            sel = k == kk
            rel = np.exp(lu[: kk + 1] - lu[kk])
            a = rel_minus * rel[0]
            cum = (rel - a) / (1.0 - a)
            cum[-1] = 1.0
            out[sel] = np.searchsorted(cum, unif[sel], side="right")
        return out


def descendant_pmf(parent: DiscreteParent, u: USequence) -> DescendantPmf:
    return DescendantPmf(parent, u)


def r_to_l_longtail(q, v) -> np.ndarray:
    """Reverse transform: ``p_i = (v_i - v_{i+1}) sum_{j<=i} q_j / v_j``.

    ``v`` must be positive and strictly decreasing.  With
    ``len(v) == len(q) + 1`` and ``v[-1] == 0`` the result is exact on
    ``0..n``.  A longer ``v`` extends the support; the mass left beyond the
    last index (``v_end`` times the running sum) must be below 1e-12.
    """
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    if v.size < q.size + 1:
        raise ValueError("v must have at least len(q) + 1 entries")
    if np.any(np.diff(v) >= 0) or np.any(v[:-1] <= 0) or v[-1] < 0:
        raise ValueError("v must be positive and strictly decreasing")
    m = v.size - 1
    qq = np.zeros(m)
    qq[: q.size] = q
    acc = np.cumsum(qq / v[:-1])
    p = (v[:-1] - v[1:]) * acc
    leftover = v[-1] * acc[-1]
    if leftover > TAIL_MASS:
        raise ArithmeticError(f"long-tail mass {leftover:.3g} remains beyond index {m - 1}")
    return p


@dataclass(frozen=True)
class PowerLongTail:
    """Long-tailed pmf from ``v_i = (i+1)^-lambda``:
    ``p_i = ((i+1)^-lambda - (i+2)^-lambda) sum_{j<=i} q_j (j+1)^lambda``.

    With ``n`` given the finite variant ``v_i = (i+1)^-lambda - (n+2)^-lambda``
    is used and the support stays ``0..n``.
    """

    q: np.ndarray
    lam: float
    n: Optional[int] = None

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))

    def _v(self, i):
        i = np.asarray(i, dtype=float)
        v = (i + 1.0) ** -self.lam
        if self.n is not None:
            v = v - (self.n + 2.0) ** -self.lam
        return v

    def pmf(self, i):
        i = np.atleast_1d(np.asarray(i, dtype=np.int64))
        top = int(i.max()) if i.size else 0
        idx = np.arange(top + 2)
        qq = np.zeros(top + 1)
        m = min(self.q.size, top + 1)
        qq[:m] = self.q[:m]
        v = self._v(idx)
        den = v[:-1]
        if self.n is not None:
            # indices past n carry no mass; keep the divisor away from zero
            v = np.where(idx > self.n + 1, 0.0, np.maximum(v, 0.0))
            den = np.where(idx[:-1] > self.n, 1.0, v[:-1])
        acc = np.cumsum(qq / den)
        p = (v[:-1] - v[1:]) * acc
        if self.n is not None:
            p[idx[:-1] > self.n] = 0.0
        out = np.where(i >= 0, p[np.clip(i, 0, top)], 0.0)
        return out

    def sf(self, i) -> float:
        """``P(X > i)`` in closed form."""
        i = int(i)
        if self.n is not None and i >= self.n:
            return 0.0
        m = min(self.q.size, i + 1)
        acc = float(np.sum(self.q[:m] / self._v(np.arange(m))))
        # q mass not yet spread below i, plus the part spread above it
        return float(np.sum(self.q[m:])) + float(self._v(i + 1)) * acc
