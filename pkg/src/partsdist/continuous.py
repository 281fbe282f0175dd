"""Named continuous families built by integration by parts.

Every family exposes vectorized ``pdf``, ``cdf`` and ``sf`` in closed form
(special functions where needed) plus ``transform()``, which returns the
equivalent generic :class:`~partsdist.ibp.TransformedContinuous` so that
closed forms can be checked against the generic construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special as sc
from scipy import stats

from .ibp import BaseDistribution, Support, TransformedContinuous, UFunction, from_scipy, integrate_over
from .specialfn import (
    expm1mx,
    incomplete_beta_complement,
    log1pmx,
    normal_cdf,
    scaled_upper_gamma,
)

__all__ = [
    "FLambda",
    "ExpLambdaF",
    "PhaseTypeExponential",
    "ExpGammaMixture",
    "StacyLShift",
    "ModifiedExponential",
    "BetaLShift",
    "SkewNormalIBP",
    "exponential_base",
    "weibull_base",
    "uniform_base",
    "normal_base",
    "flambda_sf_from_base",
]


def exponential_base(alpha: float = 1.0) -> BaseDistribution:
    return from_scipy(stats.expon(scale=1.0 / alpha), "exponential")


def weibull_base(alpha: float, gamma: float) -> BaseDistribution:
    return from_scipy(stats.weibull_min(gamma, scale=1.0 / alpha), "weibull")


def uniform_base() -> BaseDistribution:
    return from_scipy(stats.uniform(), "uniform")


def normal_base(loc: float = 0.0, scale: float = 1.0) -> BaseDistribution:
    return from_scipy(stats.norm(loc, scale), "normal")


def _expm1_ratio(eps: float, y):
    """``expm1(eps * y) / eps``, equal to ``y`` at ``eps = 0``."""
    if eps == 0.0:
        return np.asarray(y, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.expm1(eps * np.asarray(y, dtype=float)) / eps


def _out(a):
    a = np.asarray(a, dtype=float)
    return a[()] if a.ndim == 0 else a


def flambda_sf_from_base(s, lam: float):
    """Survival of the ``F^lambda`` L-shift given the base survival ``s``.

    The right tail (``s < 1/2``) is formed from ``log1p(-s) + s`` so that
    ``G_bar ~ (lambda/2) s^2`` keeps full relative accuracy.
    """
    s = np.asarray(s, dtype=float)
    eps = lam - 1.0
    m = log1pmx(-np.minimum(s, 0.5))
    if eps == 0.0:
        tail = s * s + (1.0 - s) * m
    elif abs(eps) > 1e-3:
        y = lam * (-s + m)
        tail = (-expm1mx(y) - lam * m) / (1.0 - lam)
    else:
        F = 1.0 - s
        with np.errstate(divide="ignore", invalid="ignore"):
            L = np.log(F)
            uv = np.where(F <= 0.0, 0.0, np.exp(lam * L) * _expm1_ratio(eps, -L))
        tail = s - uv
    with np.errstate(divide="ignore", invalid="ignore"):
        head = 1.0 - (1.0 - s) * (1.0 - _expm1_ratio(eps, np.log1p(-s)))
    out = np.where(s < 0.5, tail, head)
    return np.where(s >= 1.0, 1.0, np.where(s <= 0.0, 0.0, out))


# -- u = F^lambda ------------------------------------------------------------

@dataclass(frozen=True)
class FLambda:
    """L-shift with ``u = F^lambda``: a negative mixture of the base law and
    its top order statistic.  ``lambda -> inf`` recovers the base."""

    base: BaseDistribution
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")

    @property
    def _eps(self) -> float:
        return self.lam - 1.0

    def pdf(self, x):
        F = np.asarray(self.base.cdf(x), dtype=float)
        f = np.asarray(self.base.pdf(x), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            L = np.log(F)
            g = -self.lam * f * _expm1_ratio(self._eps, L)
        g = np.where(f == 0.0, 0.0, g)
        return _out(g)

    def logpdf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(x))

    def cdf(self, x):
        F = np.asarray(self.base.cdf(x), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            G = F * (1.0 - _expm1_ratio(self._eps, np.log(F)))
        return _out(np.where(F <= 0.0, 0.0, np.where(F >= 1.0, 1.0, G)))

    def sf(self, x):
        s = np.asarray(self.base.sf(x), dtype=float)
        return _out(self._sf_from_base_sf(s))

    def _sf_from_base_sf(self, s):
        return flambda_sf_from_base(s, self.lam)

    def _uv_from_F(self, F):
        with np.errstate(divide="ignore", invalid="ignore"):
            L = np.log(F)
            uv = np.exp(self.lam * L) * _expm1_ratio(self._eps, -L)
        return np.where(F <= 0.0, 0.0, uv)

    def hazard(self, x):
        return self.pdf(x) / self.sf(x)

    def tail_ratio(self, x):
        """``G_bar / F_bar^2``; tends to ``lambda / 2`` in the right tail."""
        s = np.asarray(self.base.sf(x), dtype=float)
        return _out(self._sf_from_base_sf(s) / (s * s))

    def v(self, x):
        F = np.asarray(self.base.cdf(x), dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return _out(np.where(F >= 1.0, 0.0, _expm1_ratio(self._eps, -np.log(F))))

    def u_function(self) -> UFunction:
        lam, base = self.lam, self.base
        inverse = None
        if base.ppf is not None:
            inverse = lambda y: base.ppf(np.asarray(y, dtype=float) ** (1.0 / lam))
        return UFunction(
            u=lambda x: np.asarray(base.cdf(x), dtype=float) ** lam,
            du=lambda x: lam * np.asarray(base.cdf(x), dtype=float) ** (lam - 1.0) * base.pdf(x),
            inverse=inverse,
            at_lower=0.0,
        )

    def transform(self) -> TransformedContinuous:
        return TransformedContinuous(self.base, self.u_function(), v=self.v, name="f-lambda")

    def rvs(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.base.ppf is None:
            return self.transform().rvs(rng, size)
        x = self.base.rvs(rng, size)
        w = rng.random(size)
        return self.base.ppf(self.base.cdf(x) * w ** (1.0 / self.lam))

    def mean(self) -> float:
        return integrate_over(lambda t: t * float(self.pdf(t)), self.base.support.lower, self.base.support.upper)


# -- u = exp(lambda F) ---------------------------------------------------------

@dataclass(frozen=True)
class ExpLambdaF:
    """L-shift with ``u = exp(lambda F)``; ``u(x_l) = 1`` so the boundary
    term survives and the normalizer is ``(lambda - 1 + e^-lambda)/lambda``."""

    base: BaseDistribution
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")

    @property
    def _den(self) -> float:
        # lambda - 1 + exp(-lambda)
        return float(expm1mx(-self.lam))

    def sf(self, x):
        s = np.asarray(self.base.sf(x), dtype=float)
        return _out(expm1mx(-self.lam * s) / self._den)

    def cdf(self, x):
        F = np.asarray(self.base.cdf(x), dtype=float)
        lam = self.lam
        num = lam * F * (-np.expm1(-lam)) - math.exp(-lam) * expm1mx(lam * F)
        G = num / self._den
        return _out(np.where(F < 0.5, G, 1.0 - self.sf(x)))

    def pdf(self, x):
        s = np.asarray(self.base.sf(x), dtype=float)
        f = np.asarray(self.base.pdf(x), dtype=float)
        return _out(self.lam * f * (-np.expm1(-self.lam * s)) / self._den)

    def hazard(self, x):
        return self.pdf(x) / self.sf(x)

    def left_tail_ratio(self) -> float:
        """Limit of ``G / F`` as ``F -> 0``."""
        lam = self.lam
        return lam * (-math.expm1(-lam)) / self._den

    def transform(self) -> TransformedContinuous:
        lam, base = self.lam, self.base
        inverse = None
        if base.ppf is not None:
            inverse = lambda y: base.ppf(np.log(y) / lam)
        u = UFunction(
            u=lambda x: np.exp(lam * np.asarray(base.cdf(x), dtype=float)),
            du=lambda x: lam * base.pdf(x) * np.exp(lam * np.asarray(base.cdf(x), dtype=float)),
            inverse=inverse,
            at_lower=1.0,
        )
        v = lambda x: (np.exp(-lam * np.asarray(base.cdf(x), dtype=float)) - math.exp(-lam)) / lam
        return TransformedContinuous(base, u, v=v, name="exp-lambda-f")

    def rvs(self, rng, size):
        return self.transform().rvs(rng, size)


# -- right shifts of the exponential ------------------------------------------

@dataclass(frozen=True)
class PhaseTypeExponential:
    """R-shift of Exp(1) with ``v = exp(-lambda x)``: the sum of Exp(1) and
    Exp(lambda) variables."""

    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        eps = self.lam - 1.0
        xs = np.maximum(x, 0.0)
        s = np.exp(-xs) * (1.0 - _expm1_ratio(eps, -xs))
        return _out(np.where(x <= 0, 1.0, s))

    def cdf(self, x):
        return _out(1.0 - np.asarray(self.sf(x)))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        xs = np.maximum(x, 0.0)
        d = -self.lam * np.exp(-xs) * _expm1_ratio(self.lam - 1.0, -xs)
        return _out(np.where(x < 0, 0.0, d))

    def hazard(self, x):
        return _out(np.asarray(self.pdf(x)) / np.asarray(self.sf(x)))

    def mean(self) -> float:
        return 1.0 + 1.0 / self.lam

    def rvs(self, rng, size):
        return rng.exponential(1.0, size) + rng.exponential(1.0 / self.lam, size)


@dataclass(frozen=True)
class ExpGammaMixture:
    """R-shift of Exp(1) with ``v = e^-t / t^lambda``: an exponential/gamma(2)
    mixture with weights ``lambda/(lambda+1)`` and ``1/(lambda+1)``."""

    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        return _out(np.where(t < 0, 0.0, (t + self.lam) * np.exp(-t) / (self.lam + 1.0)))

    def sf(self, t):
        t = np.asarray(t, dtype=float)
        tt = np.maximum(t, 0.0)
        return _out(np.where(t <= 0, 1.0, (1.0 + tt + self.lam) * np.exp(-tt) / (self.lam + 1.0)))

    def cdf(self, t):
        return _out(1.0 - np.asarray(self.sf(t)))

    def mean(self) -> float:
        return (2.0 + self.lam) / (1.0 + self.lam)

    def rvs(self, rng, size):
        shape = np.where(rng.random(size) < 1.0 / (self.lam + 1.0), 2.0, 1.0)
        return rng.gamma(shape)


# -- Stacy (generalized gamma) with u = (alpha t)^(beta gamma - 1 + lambda) -----

@dataclass(frozen=True)
class StacyLShift:
    """L-shifted Stacy distribution.

    The base is the generalized gamma with density
    ``alpha gamma (alpha t)^(beta gamma - 1) exp(-(alpha t)^gamma) / Gamma(beta)``
    and ``u = (alpha t)^k`` with ``k = beta gamma - 1 + lambda > 0``.  The
    reliability growth ``xi = 1/k``; ``lam = inf`` (``xi = 0``) is the base.
    """

    alpha: float
    beta: float
    gamma: float
    lam: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0 and self.gamma > 0):
            raise ValueError("alpha, beta, gamma must be positive")
        if not self.beta * self.gamma + self.lam - 1.0 > 0:
            raise ValueError("need beta*gamma + lambda - 1 > 0")

    @classmethod
    def from_xi(cls, alpha: float, beta: float, gamma: float, xi: float) -> "StacyLShift":
        if xi < 0:
            raise ValueError("xi must be nonnegative")
        lam = math.inf if xi == 0 else 1.0 / xi - beta * gamma + 1.0
        return cls(alpha, beta, gamma, lam)

    @property
    def k(self) -> float:
        return self.beta * self.gamma - 1.0 + self.lam

    @property
    def xi(self) -> float:
        return 0.0 if math.isinf(self.lam) else 1.0 / self.k

    @property
    def a(self) -> float:
        """First argument of the incomplete gamma in ``v``."""
        return (1.0 - self.lam) / self.gamma

    def mean_ratio(self) -> float:
        if math.isinf(self.lam):
            return 1.0
        return self.k / (self.k + 1.0)

    def base(self) -> BaseDistribution:
        return from_scipy(stats.gengamma(self.beta, self.gamma, scale=1.0 / self.alpha), "stacy")

    def base_mean(self) -> float:
        return math.exp(sc.gammaln(self.beta + 1.0 / self.gamma) - sc.gammaln(self.beta)) / self.alpha

    def mean(self) -> float:
        return self.mean_ratio() * self.base_mean()

    def _z(self, t):
        return (self.alpha * np.asarray(t, dtype=float)) ** self.gamma

    def logpdf(self, t):
        t = np.asarray(t, dtype=float)
        z = self._z(t)
        b, g = self.beta, self.gamma
        pos = z > 0
        zp = np.where(pos, z, 1.0)
        if math.isinf(self.lam):
            lp = math.log(self.alpha * g) + (b - 1.0 / g) * np.log(zp) - zp - sc.gammaln(b)
        else:
            lp = (math.log(self.alpha) + math.log(self.k) + (b - 1.0 - 1.0 / g) * np.log(zp) - zp
                  + np.log(scaled_upper_gamma(self.a, zp)) - sc.gammaln(b))
        return _out(np.where(pos, lp, -np.inf))

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.exp(self.logpdf(np.where(t > 0, t, 1.0)))
        limit = self._pdf_at_zero()
        return _out(np.where(t > 0, out, np.where(t == 0, limit, 0.0)))

    def _pdf_at_zero(self) -> float:
        # g ~ t^(k-1) when a > 0, t^(beta gamma - 1) when a < 0, log-divergent extra factor at a = 0
        bg = self.beta * self.gamma
        if math.isinf(self.lam):
            e, a = bg - 1.0, 1.0
        else:
            a = self.a
            e = self.k - 1.0 if a > 0 else bg - 1.0
        if e < 0 or (e == 0 and a == 0):
            return math.inf
        if e > 0:
            return 0.0
        if math.isinf(self.lam):
            return self.alpha * self.gamma / math.gamma(self.beta)
        if a > 0:
            return self.alpha * self.k * math.gamma(a) / math.gamma(self.beta)
        return self.alpha * self.k / (-a * math.gamma(self.beta))

    def base_sf(self, t):
        return sc.gammaincc(self.beta, self._z(t))

    def uv(self, t):
        """Boundary product ``u(t) v(t)``."""
        t = np.asarray(t, dtype=float)
        if math.isinf(self.lam):
            return _out(np.zeros_like(t))
        z = self._z(t)
        zp = np.where(z > 0, z, 1.0)
        val = np.exp((self.beta - 1.0) * np.log(zp) - zp - sc.gammaln(self.beta)) * scaled_upper_gamma(self.a, zp)
        return _out(np.where(z > 0, val, 0.0))

    def logsf(self, t):
        t = np.asarray(t, dtype=float)
        shape = t.shape
        tf = t.ravel()
        z = self._z(tf)
        fbar = sc.gammaincc(self.beta, z)
        if math.isinf(self.lam):
            with np.errstate(divide="ignore"):
                return _out(np.log(fbar).reshape(shape))
        out = np.zeros_like(z)
        head = fbar > 0.1
        if head.any():
            out[head] = np.log(fbar[head] - np.asarray(self.uv(tf[head])))
        tail = ~head
        if tail.any():
            zt = z[tail]
            diff = scaled_upper_gamma(self.beta, zt) - scaled_upper_gamma(self.a, zt)
            out[tail] = (self.beta - 1.0) * np.log(zt) - zt - sc.gammaln(self.beta) + np.log(diff)
        return _out(out.reshape(shape))

    def sf(self, t):
        t = np.asarray(t, dtype=float)
        return _out(np.where(t <= 0, 1.0, np.exp(self.logsf(np.where(t > 0, t, 1.0)))))

    def cdf(self, t):
        return _out(1.0 - np.asarray(self.sf(t)))

    def hazard(self, t):
        return _out(np.exp(np.asarray(self.logpdf(t)) - np.asarray(self.logsf(t))))

    def v(self, t):
        """``v(t) = Gamma(a; z) / Gamma(beta)`` via the scaled fast path."""
        t = np.asarray(t, dtype=float)
        z = self._z(t)
        zp = np.where(z > 0, z, 1.0)
        val = np.exp((self.a - 1.0) * np.log(zp) - zp - sc.gammaln(self.beta)) * scaled_upper_gamma(self.a, zp)
        return _out(np.where(z > 0, val, math.inf))

    def pdf_quadrature(self, t: float) -> float:
        """Density written with the quadrature-based incomplete gamma."""
        from .specialfn import upper_incomplete_gamma

        z = float(self._z(t))
        return (self.alpha * self.k * (self.alpha * t) ** (self.k - 1.0)
                * upper_incomplete_gamma(self.a, z) / math.gamma(self.beta))

    def transform(self) -> TransformedContinuous:
        al, k = self.alpha, self.k
        u = UFunction(
            u=lambda t: (al * np.asarray(t, dtype=float)) ** k,
            du=lambda t: al * k * (al * np.asarray(t, dtype=float)) ** (k - 1.0),
            inverse=lambda y: np.asarray(y, dtype=float) ** (1.0 / k) / al,
            at_lower=0.0,
        )
        return TransformedContinuous(self.base(), u, v=self.v, name="stacy-l")

    def rvs(self, rng, size):
        x = stats.gengamma(self.beta, self.gamma, scale=1.0 / self.alpha).rvs(size=size, random_state=rng)
        if math.isinf(self.lam):
            return x
        return x * rng.random(size) ** (1.0 / self.k)


# -- modified exponential ----------------------------------------------------------

@dataclass(frozen=True)
class ModifiedExponential:
    """Exponential base with ``u = sqrt(alpha t)``: the Stacy L-shift with
    ``beta = gamma = 1``, ``lambda = 1/2``.  Infinite density at zero and an
    exponential tail."""

    alpha: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    def as_stacy(self) -> StacyLShift:
        return StacyLShift(self.alpha, 1.0, 1.0, 0.5)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        at = self.alpha * np.where(t > 0, t, 1.0)
        g = self.alpha * math.sqrt(math.pi) * normal_cdf(-np.sqrt(2.0 * at)) / np.sqrt(at)
        return _out(np.where(t > 0, g, np.where(t == 0, math.inf, 0.0)))

    def sf(self, t):
        t = np.asarray(t, dtype=float)
        at = self.alpha * np.maximum(t, 0.0)
        closed = np.exp(-at) - 2.0 * math.sqrt(math.pi) * normal_cdf(-np.sqrt(2.0 * at)) * np.sqrt(at)
        far = at > 1.0
        if np.any(far):
            closed = np.where(far, self.as_stacy().sf(np.where(far, t, 1.0)), closed)
        return _out(np.where(t <= 0, 1.0, closed))

    def cdf(self, t):
        return _out(1.0 - np.asarray(self.sf(t)))

    def hazard(self, t):
        return self.as_stacy().hazard(t)

    def moment(self, n: int) -> float:
        return math.factorial(n) / (1.0 + 2.0 * n) / self.alpha ** n

    def mean(self) -> float:
        return self.moment(1)

    def variance(self) -> float:
        return self.moment(2) - self.moment(1) ** 2

    def cv(self) -> float:
        return math.sqrt(self.variance()) / self.mean()

    def skewness(self) -> float:
        m1, m2, m3 = (self.moment(i) for i in (1, 2, 3))
        mu3 = m3 - 3 * m1 * m2 + 2 * m1 ** 3
        return mu3 / self.variance() ** 1.5

    def excess_kurtosis(self) -> float:
        m1, m2, m3, m4 = (self.moment(i) for i in (1, 2, 3, 4))
        mu4 = m4 - 4 * m1 * m3 + 6 * m1 ** 2 * m2 - 3 * m1 ** 4
        return mu4 / self.variance() ** 2 - 3.0

    def rvs(self, rng, size):
        u = rng.random(size)
        v = rng.random(size)
        return -u * u * np.log(v) / self.alpha

    def transform(self) -> TransformedContinuous:
        al = self.alpha
        u = UFunction(
            u=lambda t: np.sqrt(al * np.asarray(t, dtype=float)),
            du=lambda t: 0.5 * np.sqrt(al / np.asarray(t, dtype=float)),
            inverse=lambda y: np.asarray(y, dtype=float) ** 2 / al,
        )
        v = lambda t: 2.0 * math.sqrt(math.pi) * normal_cdf(-np.sqrt(2.0 * al * np.asarray(t, dtype=float)))
        return TransformedContinuous(exponential_base(al), u, v=v, name="mod-exponential")


# -- beta ------------------------------------------------------------------------

@dataclass(frozen=True)
class BetaLShift:
    """Beta base with ``u = x^(alpha + lambda - 1)`` and integration constant
    ``c >= 0``, giving a 4-parameter law with ``g(1) = k c / (1 + c)``.

    ``mirror=True`` applies the transform to ``1 - X`` instead.
    """

    alpha: float
    beta: float
    lam: float
    c: float = 0.0
    mirror: bool = False

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("alpha and beta must be positive")
        if not self.alpha + self.lam - 1.0 > 0:
            raise ValueError("need alpha + lambda - 1 > 0")
        if self.c < 0:
            raise ValueError("c must be nonnegative")

    @property
    def k(self) -> float:
        return self.alpha + self.lam - 1.0

    def _flip(self, x):
        x = np.asarray(x, dtype=float)
        return 1.0 - x if self.mirror else x

    def v(self, x):
        x = np.asarray(x, dtype=float)
        a = 1.0 - self.lam
        Bab = sc.beta(self.alpha, self.beta)
        if a > 0:
            bc = sc.betainc(self.beta, a, 1.0 - x) * sc.beta(a, self.beta)
        else:
            bc = np.vectorize(lambda xi: incomplete_beta_complement(a, self.beta, xi) if xi > 0 else math.inf)(x)
        return _out(bc / Bab + self.c)

    def _pdf_unmirrored(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x <= 1)
        xs = np.where(inside, x, 0.5)
        g = self.k * xs ** (self.k - 1.0) * np.asarray(self.v(xs)) / (1.0 + self.c)
        return np.where(inside, g, 0.0)

    def _cdf_unmirrored(self, x):
        x = np.asarray(x, dtype=float)
        xs = np.clip(x, 1e-300, 1.0)
        F = sc.betainc(self.alpha, self.beta, xs)
        G = (F + xs ** self.k * np.asarray(self.v(xs))) / (1.0 + self.c)
        return np.where(x <= 0, 0.0, np.where(x >= 1, 1.0, G))

    def pdf(self, x):
        return _out(self._pdf_unmirrored(self._flip(x)))

    def cdf(self, x):
        if self.mirror:
            return _out(1.0 - self._cdf_unmirrored(self._flip(x)))
        return _out(self._cdf_unmirrored(x))

    def sf(self, x):
        return _out(1.0 - np.asarray(self.cdf(x)))

    def g_at_one(self) -> float:
        return self.k * self.c / (1.0 + self.c)

    def moment(self, n: int) -> float:
        """``E(X^n)`` of the unmirrored law."""
        k = self.k
        ef = math.exp(sc.gammaln(self.alpha + n) + sc.gammaln(self.alpha + self.beta)
                      - sc.gammaln(self.alpha) - sc.gammaln(self.alpha + self.beta + n))
        return k / (1.0 + self.c) * (self.c + ef) / (k + n)

    def mean(self) -> float:
        m = self.moment(1)
        return 1.0 - m if self.mirror else m

    def transform(self) -> TransformedContinuous:
        if self.mirror:
            raise NotImplementedError("generic transform is defined for the unmirrored law")
        k = self.k
        u = UFunction(
            u=lambda x: np.asarray(x, dtype=float) ** k,
            du=lambda x: k * np.asarray(x, dtype=float) ** (k - 1.0),
            inverse=lambda y: np.asarray(y, dtype=float) ** (1.0 / k),
        )
        return TransformedContinuous(from_scipy(stats.beta(self.alpha, self.beta), "beta"), u,
                                     v=self.v, v_upper=self.c, name="beta-l")

    def rvs(self, rng, size):
        k = self.k
        uniform_branch = rng.random(size) < self.c / (1.0 + self.c)
        z = rng.random(size) ** (1.0 / k)
        x = rng.beta(self.alpha, self.beta, size) * rng.random(size) ** (1.0 / k)
        y = np.where(uniform_branch, z, x)
        return 1.0 - y if self.mirror else y


# -- skew normal --------------------------------------------------------------------

@dataclass(frozen=True)
class SkewNormalIBP:
    """The ``u = Phi^lambda`` L-shift of a normal law."""

    lam: float
    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def family(self) -> FLambda:
        return FLambda(normal_base(self.loc, self.scale), self.lam)

    def pdf(self, x):
        return self.family.pdf(x)

    def cdf(self, x):
        return self.family.cdf(x)

    def sf(self, x):
        return self.family.sf(x)

    def mean(self) -> float:
        return integrate_over(lambda t: t * float(self.pdf(t)), -math.inf, math.inf)

    def rvs(self, rng, size):
        return self.family.rvs(rng, size)

    def transform(self) -> TransformedContinuous:
        return self.family.transform()
