"""Special functions and quadrature kernels.

The incomplete gamma and incomplete beta functions are needed with a
nonpositive first parameter, which vendor libraries do not cover.  Those
cases are evaluated by adaptive quadrature after mapping semi-infinite
ranges onto a finite interval.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.special as sc
from scipy import integrate

__all__ = [
    "QuadratureConfig",
    "ConvergenceError",
    "upper_incomplete_gamma",
    "scaled_upper_gamma",
    "incomplete_beta_complement",
    "normal_cdf",
    "integrate_semi_infinite",
    "integrate_finite",
    "expm1mx",
    "log1pmx",
]


class ConvergenceError(RuntimeError):
    """Adaptive quadrature or an iteration did not meet its tolerance.

    Attributes
    ----------
    interval : tuple of float or None
        Subinterval carrying the largest error estimate.
    error : float
        Last error estimate.
    """

    def __init__(self, message: str, interval=None, error: float = math.nan):
        super().__init__(message)
        self.interval = interval
        self.error = error


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be strictly positive")
        if int(self.max_subdivisions) < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUAD = QuadratureConfig()


def _quad(f, a, b, cfg, weight=None, wvar=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(
            f, a, b,
            epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=cfg.max_subdivisions,
            weight=weight, wvar=wvar, full_output=1,
        )
    value, err, info = out[0], out[1], out[2]
    ier = out[3] if len(out) > 3 and isinstance(out[3], str) else None
    # full_output returns a message only on failure
    failed = len(out) > 3
    tol = max(cfg.abs_tol, cfg.rel_tol * abs(value))
    if failed and not err <= 10 * tol:
        interval = None
        if isinstance(info, dict) and "elist" in info and info.get("last", 0) > 0:
            last = info["last"]
            k = int(np.argmax(info["elist"][:last]))
            interval = (float(info["alist"][k]), float(info["blist"][k]))
        raise ConvergenceError(
            f"quadrature on [{a}, {b}] did not converge: {ier}",
            interval=interval, error=float(err),
        )
    if not math.isfinite(value):
        raise ConvergenceError(f"quadrature on [{a}, {b}] gave {value}", error=float(err))
    return value


def integrate_finite(f: Callable[[float], float], lower: float, upper: float,
                     cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Adaptive Gauss-Kronrod quadrature of ``f`` over ``[lower, upper]``.

    Integrable endpoint singularities are handled by the extrapolating
    QUADPACK rule (the endpoints themselves are never evaluated).
    """
    if lower == upper:
        return 0.0
    return _quad(f, lower, upper, cfg)


def integrate_semi_infinite(f: Callable[[float], float], lower: float,
                            cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Integrate ``f`` over ``(lower, inf)``.

    The range is split at ``max(lower + 1, 1)``; the tail is mapped onto
    ``[0, 1)`` with ``x = c + s / (1 - s)`` and integrated adaptively.
    """
    if lower == math.inf:
        return 0.0
    if lower == -math.inf:
        return (integrate_semi_infinite(lambda x: f(-x), 0.0, cfg)
                + integrate_semi_infinite(f, 0.0, cfg))
    c = max(lower + 1.0, 1.0)
    head = _quad(f, lower, c, cfg)

    def mapped(s):
        one_minus = 1.0 - s
        if one_minus <= 0.0:
            return 0.0
        return f(c + s / one_minus) / (one_minus * one_minus)

    tail = _quad(mapped, 0.0, 1.0, cfg)
    return head + tail


def upper_incomplete_gamma(a: float, t: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Unregularized upper incomplete gamma function ``int_t^inf x^(a-1) e^-x dx``.

    For ``a > 0`` the regularized library routine is rescaled.  For
    ``a <= 0`` the integral is evaluated by quadrature, split at
    ``c = max(t, 1)``; the tail is mapped to ``[0, 1)`` after the factor
    ``c^(a-1) e^-c`` is taken outside.
    """
    a = float(a)
    t = float(t)
    if t < 0 or (a <= 0 and t <= 0):
        raise ValueError(f"upper incomplete gamma undefined for a={a}, t={t}")
    if a > 0:
        if t == 0:
            return math.gamma(a)
        return float(sc.gammaincc(a, t) * sc.gamma(a))

    def integrand(x):
        return math.exp((a - 1.0) * math.log(x) - x)

    c = max(t, 1.0)
    head = _quad(integrand, t, c, cfg) if c > t else 0.0

    # tail written as c^(a-1) e^-c int_0^inf (1 + s/c)^(a-1) e^-s ds so the
    # integrand stays of order one and the relative tolerance is meaningful
    def mapped(w):
        one_minus = 1.0 - w
        if one_minus <= 0.0:
            return 0.0
        s_ = w / one_minus
        return math.exp((a - 1.0) * math.log1p(s_ / c) - s_) / (one_minus * one_minus)

    scale = math.exp((a - 1.0) * math.log(c) - c)
    return head + scale * _quad(mapped, 0.0, 1.0, cfg)


def incomplete_beta_complement(a: float, b: float, x: float,
                               cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """``int_x^1 y^(a-1) (1-y)^(b-1) dy``, allowing ``a <= 0``."""
    if b <= 0:
        raise ValueError("b must be positive")
    if not 0 <= x <= 1:
        raise ValueError("x must lie in [0, 1]")
    if a <= 0 and x <= 0:
        raise ValueError(f"incomplete beta complement diverges for a={a}, x={x}")
    if x == 1:
        return 0.0
    if a > 0:
        return float(sc.betainc(b, a, 1.0 - x) * sc.beta(a, b))
    # algebraic endpoint weight (1-y)^(b-1) at y=1
    return _quad(lambda y: y ** (a - 1.0), x, 1.0, cfg, weight="alg", wvar=(0.0, b - 1.0))


def normal_cdf(x):
    """Standard normal distribution function."""
    return sc.ndtr(x)


def expm1mx(x):
    """``exp(x) - 1 - x`` without cancellation near zero."""
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.reshape(-1)
    out = np.expm1(x) - x
    small = np.abs(x) < 0.1
    if np.any(small):
        xs = x[small]
        term = xs * xs / 2.0
        acc = term.copy()
        for k in range(3, 18):
            term = term * xs / k
            acc = acc + term
        out[small] = acc
    out = out.reshape(shape)
    return out[()] if out.ndim == 0 else out


def log1pmx(x):
    """``log(1 + x) - x`` without cancellation near zero."""
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.reshape(-1)
    out = np.log1p(x) - x
    small = np.abs(x) < 0.1
    if np.any(small):
        xs = x[small]
        acc = np.zeros_like(xs)
        power = xs.copy()
        for k in range(2, 24):
            power = power * xs
            acc = acc + (-1.0) ** (k + 1) * power / k
        out[small] = acc
    out = out.reshape(shape)
    return out[()] if out.ndim == 0 else out


def _gamma_cf(a: float, z: np.ndarray, max_iter: int = 2000, eps: float = 4.0 * np.finfo(float).eps) -> np.ndarray:
    # Modified Lentz evaluation of z / (z+1-a - 1(1-a)/(z+3-a - ...)),
    # which is Gamma(a; z) z^(1-a) e^z.
    tiny = 1e-300
    b = z + 1.0 - a
    c = np.full_like(z, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    done = np.zeros(z.shape, dtype=bool)
    for i in range(1, max_iter + 1):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < eps
        if done.all():
            break
    else:
        raise ConvergenceError(f"incomplete gamma continued fraction failed for a={a}")
    return z * h


def scaled_upper_gamma(a: float, z) -> np.ndarray:
    """``Gamma(a; z) * z^(1-a) * e^z`` for any real ``a`` and ``z > 0``.

    The scaling removes the dominant ``z^(a-1) e^-z`` behaviour, so the
    result is of order one for large ``z`` or very negative ``a``.  It is a
    vectorized fast path (continued fraction, or downward recurrence for
    small ``z``) used inside likelihoods.
    """
    a = float(a)
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if np.any(z <= 0):
        raise ValueError("z must be positive")
    out = np.empty_like(z)
    if a > 0:
        lo = z < a + 1.0
    elif a > -10.0:
        lo = z <= 1.0
    else:
        # the fraction converges quickly for strongly negative a at any z,
        # and the downward recurrence would take -a steps
        lo = np.zeros(z.shape, dtype=bool)
    hi = ~lo
    if hi.any():
        out[hi] = _gamma_cf(a, z[hi])
    if lo.any():
        zl = z[lo]
        out[lo] = np.exp(np.log(_upper_gamma_small(a, zl)) + (1.0 - a) * np.log(zl) + zl)
    return out[0] if scalar else out


def _upper_gamma_small(a: float, z: np.ndarray) -> np.ndarray:
    # Gamma(a; z) for moderate z where upward cancellation is not an issue.
    if a > 0:
        return sc.gammaincc(a, z) * sc.gamma(a)
    n = -a
    if n == math.floor(n):
        n = int(n)
        # Gamma(-n; z) = z^-n E_{n+1}(z)
        return z ** (-n) * sc.expn(n + 1, z)
    m = int(math.floor(n)) + 1
    af = a + m  # in (0, 1)
    g = sc.gammaincc(af, z) * sc.gamma(af)
    cur = af
    for _ in range(m):
        cur -= 1.0
        g = (g - z ** cur * np.exp(-z)) / cur
    return g
