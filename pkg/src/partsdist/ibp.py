"""Integration-by-parts transforms of continuous distributions.

A base density is written as ``f = -u v'`` with ``u`` increasing and ``v``
decreasing.  Integrating by parts swaps the roles and gives the shifted
density ``g = u' v`` (normalized by the surviving boundary terms).  The
derived law is stochastically dominated by the base when ``u(x_l) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from .specialfn import DEFAULT_QUAD, QuadratureConfig, integrate_finite, integrate_semi_infinite

__all__ = [
    "Support",
    "BaseDistribution",
    "UFunction",
    "TransformedContinuous",
    "RShifted",
    "from_scipy",
    "v_from_u",
    "r_shift",
    "delta_smear",
    "integrate_over",
]

Sampler = Callable[[np.random.Generator, int], np.ndarray]


@dataclass(frozen=True)
class Support:
    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"empty support ({self.lower}, {self.upper})")

    def contains(self, x) -> bool:
        return self.lower <= x <= self.upper


def integrate_over(f, lower, upper, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Integrate over any subinterval of the extended real line."""
    if lower >= upper:
        return 0.0
    if math.isinf(upper):
        return integrate_semi_infinite(f, lower, cfg)
    if math.isinf(lower):
        return integrate_semi_infinite(lambda y: f(-y), -upper, cfg)
    return integrate_finite(f, lower, upper, cfg)


@dataclass(frozen=True)
class BaseDistribution:
    """A continuous parent law: the right-shifted ('R') form."""

    pdf: Callable
    cdf: Callable
    sf: Callable
    support: Support
    sampler: Optional[Sampler] = None
    ppf: Optional[Callable] = None
    mean: Optional[float] = None
    name: str = "base"

    def expect(self, fn=lambda x: x, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
        return integrate_over(lambda x: fn(x) * self.pdf(x), self.support.lower, self.support.upper, cfg)

    def mean_value(self, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
        return self.mean if self.mean is not None else self.expect(cfg=cfg)

    def rvs(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.sampler is not None:
            return self.sampler(rng, size)
        if self.ppf is not None:
            return self.ppf(rng.random(size))
        raise NotImplementedError(f"{self.name} has no sampler")


def from_scipy(frozen, name: str | None = None) -> BaseDistribution:
    """Wrap a frozen ``scipy.stats`` continuous distribution."""
    lo, hi = frozen.support()
    return BaseDistribution(
        pdf=frozen.pdf,
        cdf=frozen.cdf,
        sf=frozen.sf,
        support=Support(float(lo), float(hi)),
        sampler=lambda rng, n: frozen.rvs(size=n, random_state=rng),
        ppf=frozen.ppf,
        mean=float(frozen.mean()),
        name=name or frozen.dist.name,
    )


@dataclass(frozen=True)
class UFunction:
    """Positive nondecreasing ``u`` with derivative and optional inverse."""

    u: Callable
    du: Callable
    inverse: Optional[Callable] = None
    at_lower: float = 0.0


def v_from_u(base: BaseDistribution, u: UFunction, x: float,
             cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """``v(x) = int_x^{x_h} f(y) / u(y) dy`` by quadrature."""
    hi = base.support.upper
    if x >= hi:
        return 0.0

    def integrand(y):
        fy = base.pdf(y)
        if fy == 0.0:
            return 0.0
        return fy / u.u(y)

    return integrate_over(integrand, x, hi, cfg)


def delta_smear(x0: float, u: UFunction, x: float) -> float:
    """Distribution function of a unit mass at ``x0`` after the L-shift."""
    if x >= x0:
        return 1.0
    return u.u(x) / u.u(x0)


@dataclass(frozen=True)
class TransformedContinuous:
    """The L-shift of ``base`` by ``u``.

    ``v`` is a closed form registered by a family, or ``None`` for the
    quadrature path.  ``v_upper`` is the integration constant ``v(x_h)``;
    it is zero except for bounded families such as the beta L-shift.
    """

    base: BaseDistribution
    u: UFunction
    v: Optional[Callable] = None
    v_upper: float = 0.0
    cfg: QuadratureConfig = DEFAULT_QUAD
    name: str = "l-shift"
    direction: str = "L"
    normalizer: float = field(init=False)
    _ul_vl: float = field(init=False, repr=False)
    _uh_vh: float = field(init=False, repr=False)

    def __post_init__(self):
        lo, hi = self.base.support.lower, self.base.support.upper
        ul = self.u.at_lower
        ul_vl = 0.0 if ul == 0.0 else ul * self.v_at(lo)
        if math.isinf(hi):
            uh_vh = 0.0
        else:
            uh_vh = 0.0 if self.v_upper == 0.0 else self.u.u(hi) * self.v_upper
        norm = 1.0 + uh_vh - ul_vl
        if not norm > 0:
            raise ValueError(f"nonpositive normalizer {norm}")
        object.__setattr__(self, "_ul_vl", ul_vl)
        object.__setattr__(self, "_uh_vh", uh_vh)
        object.__setattr__(self, "normalizer", norm)

    @property
    def support(self) -> Support:
        return self.base.support

    def v_at(self, x: float) -> float:
        if self.v is not None:
            return float(self.v(x))
        return v_from_u(self.base, self.u, x, self.cfg) + self.v_upper

    def uv(self, x: float) -> float:
        """Boundary product ``u(x) v(x)``, zero where ``u`` vanishes."""
        lo, hi = self.support.lower, self.support.upper
        if x >= hi:
            return self._uh_vh
        ux = self.u.u(x) if x > lo else self.u.at_lower
        if ux == 0.0:
            return 0.0
        return ux * self.v_at(x)

    def pdf(self, x: float) -> float:
        lo, hi = self.support.lower, self.support.upper
        if x < lo or x > hi:
            return 0.0
        d = self.u.du(x)
        if d == 0.0:
            return 0.0
        return d * self.v_at(x) / self.normalizer

    def cdf(self, x: float) -> float:
        lo, hi = self.support.lower, self.support.upper
        if x <= lo:
            return 0.0
        if x >= hi:
            return 1.0
        return (self.base.cdf(x) + self.uv(x) - self._ul_vl) / self.normalizer

    def sf(self, x: float) -> float:
        lo, hi = self.support.lower, self.support.upper
        if x <= lo:
            return 1.0
        if x >= hi:
            return 0.0
        return (self.base.sf(x) + self._uh_vh - self.uv(x)) / self.normalizer

    def hazard(self, x: float) -> float:
        return self.pdf(x) / self.sf(x)

    def integral_uv(self) -> float:
        return integrate_over(self.uv, self.support.lower, self.support.upper, self.cfg)

    def mean(self) -> float:
        """Mean via ``E_f(X) - int u v`` plus boundary corrections."""
        lo, hi = self.support.lower, self.support.upper
        m = self.base.mean_value(self.cfg) - self.integral_uv()
        if self._uh_vh:
            m += hi * self._uh_vh
        if self._ul_vl:
            m -= lo * self._ul_vl
        return m / self.normalizer

    def rvs(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw by smearing base draws toward the lower limit.

        Each base draw ``X`` is moved to ``u^-1(u_l + (u(X) - u_l) V)``.  When
        ``u_l > 0`` the draw is first kept with probability ``1 - u_l/u(X)``.
        Without an inverse, ``G`` is inverted numerically.
        """
        if self._uh_vh:
            raise NotImplementedError("smearing sampler needs v(x_h) = 0; use the family sampler")
        if self.u.inverse is None:
            return self._rvs_numeric(rng, size)
        ul = self.u.at_lower
        out = np.empty(0)
        need = size
        while need > 0:
            batch = max(need, 16) if ul == 0 else int(need / self.normalizer * 1.2) + 16
            x = np.asarray(self.base.rvs(rng, batch), dtype=float)
            ux = np.asarray([self.u.u(xi) for xi in x]) if not _vectorizes(self.u.u) else self.u.u(x)
            if ul > 0:
                keep = rng.random(batch) < 1.0 - ul / ux
                ux = ux[keep]
            w = rng.random(ux.size)
            y = self.u.inverse(ul + (ux - ul) * w)
            out = np.concatenate([out, np.asarray(y, dtype=float)])
            need = size - out.size
        return out[:size]

    def ppf_numeric(self, p: float, xtol: float = 1e-10) -> float:
        lo, hi = _finite_bracket(self)
        return optimize.brentq(lambda x: self.cdf(x) - p, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)

    def _rvs_numeric(self, rng, size):
        return np.array([self.ppf_numeric(p) for p in rng.random(size)])


def _vectorizes(fn) -> bool:
    try:
        r = fn(np.array([0.5, 0.75]))
        return np.shape(r) == (2,)
    except Exception:
        return False


def _finite_bracket(dist):
    lo, hi = dist.support.lower, dist.support.upper
    if math.isinf(lo):
        lo = -1.0
        while dist.cdf(lo) > 1e-300 and lo > -1e300:
            lo *= 2.0
    if math.isinf(hi):
        hi = 1.0
        while dist.sf(hi) > 1e-300 and hi < 1e300:
            hi *= 2.0
    return lo, hi


@dataclass(frozen=True)
class RShifted:
    """The R-shift of an L-form law ``g`` by a decreasing ``v``.

    ``u(x) = int_{x_l}^x g / v`` so that ``F = G - u v`` and the result
    dominates ``g``.
    """

    base: BaseDistribution
    v: Callable
    dv: Callable
    cfg: QuadratureConfig = DEFAULT_QUAD
    name: str = "r-shift"
    direction: str = "R"

    @property
    def support(self) -> Support:
        return self.base.support

    def u(self, x: float) -> float:
        lo = self.support.lower
        if x <= lo:
            return 0.0
        return integrate_over(lambda y: self.base.pdf(y) / self.v(y), lo, x, self.cfg)

    def uv(self, x: float) -> float:
        if x >= self.support.upper:
            return 0.0
        vx = self.v(x)
        return 0.0 if vx == 0.0 else self.u(x) * vx

    def pdf(self, x: float) -> float:
        lo, hi = self.support.lower, self.support.upper
        if x <= lo or x >= hi:
            return 0.0
        return -self.u(x) * self.dv(x)

    def cdf(self, x: float) -> float:
        if x <= self.support.lower:
            return 0.0
        if x >= self.support.upper:
            return 1.0
        return self.base.cdf(x) - self.uv(x)

    def sf(self, x: float) -> float:
        if x <= self.support.lower:
            return 1.0
        if x >= self.support.upper:
            return 0.0
        return self.base.sf(x) + self.uv(x)


def r_shift(base_l: BaseDistribution, v: Callable, dv: Callable,
            cfg: QuadratureConfig = DEFAULT_QUAD, probe: Optional[float] = None) -> RShifted:
    """Shift ``base_l`` to the right using the decreasing function ``v``.

    Raises ``ArithmeticError`` when ``u v`` does not vanish at the upper
    limit, checked at ``probe`` (by default a far quantile of ``base_l``).
    """
    out = RShifted(base_l, v, dv, cfg)
    if probe is None:
        hi = base_l.support.upper
        if math.isinf(hi):
            probe = base_l.ppf(1 - 1e-12) if base_l.ppf is not None else 1e3
        else:
            probe = hi - 1e-9 * max(1.0, abs(hi))
    tail = out.uv(probe)
    if not (math.isfinite(tail) and tail < 1e-6):
        raise ArithmeticError(f"u*v does not vanish at the upper limit (u v = {tail} at {probe})")
    return out
