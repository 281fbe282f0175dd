"""Maximum-likelihood fitting and the stochastic-dominance test.

Survival models use an accelerated time axis, ``alpha_i = alpha_0 exp(eta' x_i)``,
with right censoring entering through the log survival function.  Count
models link the *descendant* mean, ``mu_g,i = mu_0 exp(beta' x_i)``, and
invert it to the parent mean row by row.

Positive parameters are searched on the log scale (``r`` through
``log(r - 1)``) with a restarted Nelder-Mead simplex; standard errors come
from a central-difference Hessian and the delta method.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.special as sc
from scipy import optimize, stats

from .continuous import StacyLShift, flambda_sf_from_base
from .discrete import LambdaClass, r_class_mean_stable, r_class_norm_mean
from .sbp import DiscreteParent

__all__ = [
    "DataError",
    "FitError",
    "SurvivalDataset",
    "CountDataset",
    "FitResult",
    "OptimResult",
    "numeric_gradient",
    "numeric_hessian",
    "minimize",
    "fit_survival",
    "fit_counts",
    "invert_r_class_mean",
    "dominance_test",
    "DominanceResult",
    "SURVIVAL_FAMILIES",
    "COUNT_FAMILIES",
    "DOMINANCE_FAMILIES",
]


class DataError(ValueError):
    """Malformed input data (bad value, missing column)."""


class FitError(RuntimeError):
    """A fit could not be completed."""


# -- datasets ----------------------------------------------------------------

def _read_csv(path, columns: Sequence[str]):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file, a header row is required")
        header = [h.strip() for h in reader.fieldnames]
        for c in columns:
            if c not in header:
                raise DataError(f"{path}: missing column '{c}' (have {', '.join(header)})")
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            row = {k.strip(): v for k, v in raw.items() if k is not None}
            vals = []
            for c in columns:
                cell = row.get(c)
                try:
                    vals.append(float(cell))
                except (TypeError, ValueError):
                    raise DataError(f"{path}: row {lineno}, column '{c}': cannot parse {cell!r}") from None
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


@dataclass(frozen=True)
class SurvivalDataset:
    """Event or censoring times with an event indicator and covariates."""

    time: np.ndarray
    event: np.ndarray
    covariates: np.ndarray
    covariate_names: tuple = ()

    def __post_init__(self):
        t = np.asarray(self.time, dtype=float).reshape(-1)
        e = np.asarray(self.event).reshape(-1)
        x = np.asarray(self.covariates, dtype=float)
        if x.size == 0:
            x = np.zeros((t.size, 0))
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if t.size == 0:
            raise DataError("survival dataset is empty")
        if not np.all(np.isfinite(t)) or np.any(t <= 0):
            raise DataError("survival times must be positive and finite")
        if e.shape != t.shape or not np.all(np.isin(e, (0, 1, True, False))):
            raise DataError("event indicator must be 0 or 1 for every row")
        if x.shape[0] != t.size:
            raise DataError("covariate rows do not match the number of times")
        names = tuple(self.covariate_names) or tuple(f"x{j}" for j in range(x.shape[1]))
        if len(names) != x.shape[1]:
            raise DataError("covariate names do not match covariate columns")
        object.__setattr__(self, "time", t)
        object.__setattr__(self, "event", e.astype(bool))
        object.__setattr__(self, "covariates", x)
        object.__setattr__(self, "covariate_names", names)

    @property
    def n(self) -> int:
        return self.time.size

    @classmethod
    def from_csv(cls, path, time_col="time", event_col="event", covariates=()):
        cols = [time_col, event_col, *covariates]
        arr = _read_csv(path, cols)
        if not np.all(np.isin(arr[:, 1], (0.0, 1.0))):
            bad = int(np.flatnonzero(~np.isin(arr[:, 1], (0.0, 1.0)))[0]) + 2
            raise DataError(f"{path}: row {bad}, column '{event_col}': event must be 0 or 1")
        bad_t = np.flatnonzero(~(arr[:, 0] > 0))
        if bad_t.size:
            raise DataError(f"{path}: row {int(bad_t[0]) + 2}, column '{time_col}': time must be positive")
        return cls(arr[:, 0], arr[:, 1].astype(bool), arr[:, 2:], tuple(covariates))


@dataclass(frozen=True)
class CountDataset:
    """Nonnegative integer responses with covariates."""

    count: np.ndarray
    covariates: np.ndarray
    covariate_names: tuple = ()

    def __post_init__(self):
        y = np.asarray(self.count, dtype=float).reshape(-1)
        x = np.asarray(self.covariates, dtype=float)
        if x.size == 0:
            x = np.zeros((y.size, 0))
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if y.size == 0:
            raise DataError("count dataset is empty")
        if np.any(y < 0) or np.any(y != np.round(y)):
            raise DataError("counts must be nonnegative integers")
        if x.shape[0] != y.size:
            raise DataError("covariate rows do not match the number of counts")
        names = tuple(self.covariate_names) or tuple(f"x{j}" for j in range(x.shape[1]))
        object.__setattr__(self, "count", y.astype(np.int64))
        object.__setattr__(self, "covariates", x)
        object.__setattr__(self, "covariate_names", names)

    @property
    def n(self) -> int:
        return self.count.size

    @classmethod
    def from_csv(cls, path, count_col="count", covariates=()):
        arr = _read_csv(path, [count_col, *covariates])
        bad = np.flatnonzero((arr[:, 0] < 0) | (arr[:, 0] != np.round(arr[:, 0])))
        if bad.size:
            raise DataError(f"{path}: row {int(bad[0]) + 2}, column '{count_col}': count must be a nonnegative integer")
        return cls(arr[:, 0], arr[:, 1:], tuple(covariates))


# -- optimizer ---------------------------------------------------------------

@dataclass(frozen=True)
class OptimResult:
    x: np.ndarray
    fun: float
    iterations: int
    evaluations: int
    converged: bool


def minimize(fn: Callable[[np.ndarray], float], start, max_iter: int = 20000,
             restarts: int = 4, xatol: float = 1e-9, fatol: float = 1e-11) -> OptimResult:
    """Restarted Nelder-Mead minimization of ``fn``.

    Non-finite objective values act as a barrier.  The simplex is rebuilt
    around the incumbent until a restart brings no improvement beyond
    ``fatol``.
    """
    x0 = np.atleast_1d(np.asarray(start, dtype=float))
    f0 = fn(x0)
    if not np.isfinite(f0):
        raise FitError(f"objective is not finite at the starting point {x0.tolist()}")

    def guarded(x):
        v = fn(x)
        return v if np.isfinite(v) else np.inf

    best_x, best_f = x0, float(f0)
    iters = evals = 0
    converged = False
    for _ in range(restarts + 1):
        res = optimize.minimize(
            guarded, best_x, method="Nelder-Mead",
            options={"xatol": xatol, "fatol": fatol, "maxiter": max_iter,
                     "maxfev": 2 * max_iter, "adaptive": x0.size > 2},
        )
        iters += int(res.nit)
        evals += int(res.nfev)
        improvement = best_f - float(res.fun)
        if float(res.fun) <= best_f:
            best_x, best_f = np.asarray(res.x, dtype=float), float(res.fun)
        converged = bool(res.success)
        if improvement <= fatol and converged:
            break
    return OptimResult(best_x, best_f, iters, evals, converged)


def numeric_gradient(fn, at, rel_step: float = 1e-5) -> np.ndarray:
    x = np.asarray(at, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fn(x + e) - fn(x - e)) / (2 * h)
    return g


def numeric_hessian(fn, at, rel_step: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian with steps ``rel_step * max(1, |x_i|)``."""
    x = np.asarray(at, dtype=float)
    k = x.size
    h = rel_step * np.maximum(1.0, np.abs(x))
    f0 = fn(x)
    H = np.empty((k, k))
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        H[i, i] = (fn(x + ei) - 2 * f0 + fn(x - ei)) / (h[i] * h[i])
        for j in range(i):
            ej = np.zeros(k)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                fn(x + ei + ej) - fn(x + ei - ej) - fn(x - ei + ej) + fn(x - ei - ej)
            ) / (4 * h[i] * h[j])
    return H


# -- parameterization ----------------------------------------------------------

@dataclass(frozen=True)
class _Param:
    name: str
    kind: str  # "log", "log1m" (r = 1 + e^theta), "square" (xi = theta^2) or "free"
    start: float

    def to_natural(self, theta):
        if self.kind == "log":
            return math.exp(theta)
        if self.kind == "log1m":
            return 1.0 + math.exp(theta)
        if self.kind == "square":
            return theta * theta
        return theta

    def to_internal(self, value):
        if self.kind == "log":
            return math.log(value)
        if self.kind == "log1m":
            return math.log(value - 1.0)
        if self.kind == "square":
            return math.sqrt(value)
        return value

    def jacobian(self, theta):
        if self.kind == "square":
            return 2.0 * abs(theta)
        return math.exp(theta) if self.kind in ("log", "log1m") else 1.0


@dataclass
class FitResult:
    """Estimates on the natural scale with delta-method standard errors.

    ``se`` holds ``nan`` where the Hessian was singular or not positive
    definite (``flags['hessian']`` says which).
    """

    family: str
    names: list
    estimates: np.ndarray
    se: np.ndarray
    loglik: float
    n_obs: int
    iterations: int
    gradient_norm: float
    converged: bool
    fixed: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    internal: np.ndarray | None = None

    @property
    def k(self) -> int:
        return len(self.names)

    @property
    def aic(self) -> float:
        return 2.0 * self.k - 2.0 * self.loglik

    def z_values(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.estimates / self.se

    def p_values(self) -> np.ndarray:
        """Two-sided normal p-values (reported for regression coefficients)."""
        return 2.0 * stats.norm.sf(np.abs(self.z_values()))

    def get(self, name: str) -> float:
        if name in self.fixed:
            return self.fixed[name]
        return float(self.estimates[self.names.index(name)])

    def to_dict(self) -> dict:
        pv = self.p_values()
        params = []
        for i, nm in enumerate(self.names):
            params.append({
                "name": nm,
                "estimate": float(self.estimates[i]),
                "se": None if not np.isfinite(self.se[i]) else float(self.se[i]),
                "p_value": (float(pv[i]) if nm.startswith("coef:") and np.isfinite(pv[i]) else None),
            })
        return {
            "family": self.family,
            "n_obs": self.n_obs,
            "parameters": params,
            "fixed": {k: float(v) for k, v in self.fixed.items()},
            "loglik": float(self.loglik),
            "aic": float(self.aic),
            "k": self.k,
            "iterations": self.iterations,
            "gradient_norm": float(self.gradient_norm),
            "converged": self.converged,
            "flags": self.flags,
        }

    def summary(self) -> str:
        lines = [f"family: {self.family}    n = {self.n_obs}"]
        lines.append(f"{'parameter':<20}{'estimate':>14}{'std.err':>14}{'p':>10}")
        pv = self.p_values()
        for i, nm in enumerate(self.names):
            se = f"{self.se[i]:14.6g}" if np.isfinite(self.se[i]) else f"{'n/a':>14}"
            p = f"{pv[i]:10.4g}" if nm.startswith("coef:") and np.isfinite(pv[i]) else f"{'':>10}"
            lines.append(f"{nm:<20}{self.estimates[i]:14.6g}{se}{p}")
        for nm, v in self.fixed.items():
            lines.append(f"{nm:<20}{v:14.6g}{'(fixed)':>14}")
        lines.append(f"log-likelihood: {self.loglik:.6f}")
        lines.append(f"AIC: {self.aic:.4f}    k = {self.k}")
        lines.append(f"iterations: {self.iterations}    gradient norm: {self.gradient_norm:.3g}"
                     f"    converged: {self.converged}")
        for k, v in self.flags.items():
            lines.append(f"note: {k}: {v}")
        return "\n".join(lines)


def _finish(family, params, negll, opt, n_obs, fixed, flags) -> FitResult:
    theta = opt.x
    loglik = -opt.fun
    grad = numeric_gradient(negll, theta)
    H = numeric_hessian(negll, theta)
    jac = np.array([p.jacobian(t) for p, t in zip(params, theta)])
    se = np.full(theta.size, np.nan)
    if np.all(np.isfinite(H)):
        try:
            np.linalg.cholesky(H)
            cov = np.linalg.inv(H)
            se = np.sqrt(np.maximum(np.diag(cov), 0.0)) * jac
        except np.linalg.LinAlgError:
            flags["hessian"] = "not positive definite; standard errors unavailable"
    else:
        flags["hessian"] = "not finite; standard errors unavailable"
    est = np.array([p.to_natural(t) for p, t in zip(params, theta)])
    return FitResult(
        family=family, names=[p.name for p in params], estimates=est, se=se,
        loglik=float(loglik), n_obs=n_obs, iterations=opt.iterations,
        gradient_norm=float(np.linalg.norm(grad)), converged=opt.converged,
        fixed=dict(fixed), flags=flags, internal=theta,
    )


def _split(params, fixed, theta):
    vals = dict(fixed)
    j = 0
    for p in params:
        vals[p.name] = p.to_natural(theta[j])
        j += 1
    return vals


def _coef_vector(vals, names):
    return np.array([vals[f"coef:{n}"] for n in names], dtype=float)


# -- survival families -----------------------------------------------------------

# (parameter, default start) in the order they are reported
SURVIVAL_FAMILIES = {
    "exponential": ("alpha",),
    "weibull": ("alpha", "gamma"),
    "mod-weibull": ("alpha", "gamma", "xi"),
    "stacy": ("alpha", "beta", "gamma", "xi"),
    "mod-exponential": ("alpha",),
}


def _survival_logs(family: str, vals: dict, x: np.ndarray):
    """``(log g, log G_bar)`` on the unit-scale time axis ``x = alpha_i t``."""
    if family == "exponential":
        return -x, -x
    if family == "weibull":
        g = vals["gamma"]
        z = x ** g
        return math.log(g) + (g - 1.0) * np.log(x) - z, -z
    if family == "mod-exponential":
        d = StacyLShift(1.0, 1.0, 1.0, 0.5)
    else:
        beta = vals.get("beta", 1.0)
        d = StacyLShift.from_xi(1.0, beta, vals["gamma"], vals["xi"])
    return np.asarray(d.logpdf(x)), np.asarray(d.logsf(x))


def survival_loglik(family: str, vals: dict, data: SurvivalDataset) -> float:
    eta = _coef_vector(vals, data.covariate_names)
    log_alpha = math.log(vals["alpha"]) + data.covariates @ eta
    x = np.exp(log_alpha) * data.time
    lg, ls = _survival_logs(family, vals, x)
    ev = data.event
    return float(np.sum(lg[ev] + log_alpha[ev]) + np.sum(ls[~ev]))


XI_STARTS = (0.25, 1.0, 2.5)


def fit_survival(family: str, data: SurvivalDataset, fixed: dict | None = None,
                 start: dict | None = None, max_iter: int = 20000) -> FitResult:
    """Fit an accelerated-time survival model by maximum likelihood.

    ``fixed`` pins parameters by name; ``xi = 0`` on ``mod-weibull`` or
    ``stacy`` gives the base (Weibull or Stacy) model.
    """
    if family not in SURVIVAL_FAMILIES:
        raise ValueError(f"unknown survival family '{family}'; choose from {sorted(SURVIVAL_FAMILIES)}")
    fixed = dict(fixed or {})
    start = dict(start or {})
    if not data.event.any():
        warnings.warn("no observed events; the likelihood is driven by censoring only", RuntimeWarning)
    known = set(SURVIVAL_FAMILIES[family]) | {f"coef:{n}" for n in data.covariate_names}
    for k in fixed:
        if k not in known:
            raise ValueError(f"cannot fix '{k}' for family {family}")
    ev_t = data.time[data.event] if data.event.any() else data.time
    defaults = {"alpha": 1.0 / float(np.mean(ev_t)), "gamma": 1.0, "beta": 1.0, "xi": 0.5}
    params = []
    for name in SURVIVAL_FAMILIES[family]:
        if name in fixed:
            continue
        # a log scale for xi stalls on the flat approach to the base law xi = 0;
        # with xi = theta^2 the base is an interior point
        params.append(_Param(name, "square" if name == "xi" else "log", 0.0))
    for n in data.covariate_names:
        if f"coef:{n}" not in fixed:
            params.append(_Param(f"coef:{n}", "free", 0.0))
    x0 = np.array([p.to_internal(start.get(p.name, defaults.get(p.name, 0.0))) for p in params])

    def negll(theta):
        try:
            vals = _split(params, fixed, theta)
            with np.errstate(all="ignore"):
                v = -survival_loglik(family, vals, data)
        except (ValueError, OverflowError, ArithmeticError):
            return np.inf
        return v if np.isfinite(v) else np.inf

    if not params:
        v = -negll(np.zeros(0))
        return FitResult(family, [], np.zeros(0), np.zeros(0), v, data.n, 0, 0.0, True, fixed)
    starts = [x0]
    names = [p.name for p in params]
    if "xi" in names and "xi" not in start:
        # the profile in xi can have a local maximum at the base law as well as
        # an interior one, and xi trades off against the shape along a narrow
        # ridge; each xi start is therefore warmed up on its profile first
        for xi in XI_STARTS:
            try:
                prof = fit_survival(family, data, fixed={**fixed, "xi": xi}, start=start, max_iter=max_iter)
            except FitError:
                continue
            warm = {**dict(zip(prof.names, prof.estimates)), "xi": xi}
            starts.append(np.array([p.to_internal(warm[p.name]) for p in params]))
    opt = None
    for x in starts:
        try:
            cand = minimize(negll, x, max_iter=max_iter)
        except FitError:
            continue
        if opt is None or cand.fun < opt.fun:
            opt = cand
    if opt is None:
        raise FitError("no finite log-likelihood at any starting point")
    flags = {}
    if not opt.converged:
        flags["optimizer"] = "iteration cap reached"
    return _finish(family, params, negll, opt, data.n, fixed, flags)


# -- count families --------------------------------------------------------------

COUNT_FAMILIES = {
    "poisson": ("mu0",),
    "negbin": ("mu0", "alpha"),
    "poisson-r": ("mu0", "r"),
    "negbin-r": ("mu0", "alpha", "r"),
    "poisson-lambda": ("mu0", "lambda"),
    "negbin-lambda": ("mu0", "alpha", "lambda"),
}

R_BOUNDARY = 1e-6
ALPHA_POISSON = 1e-8


def invert_r_class_mean(target, r: float, kind: str = "poisson", alpha: float | None = None,
                        tol: float = 1e-13, max_iter: int = 60) -> np.ndarray:
    """Parent means ``mu`` whose r-class descendant has mean ``target``.

    Vectorized Newton-Raphson on ``log mu``; rows that leave the domain or
    stall fall back to bracketing.
    """
    target = np.asarray(target, dtype=float)
    shape = target.shape
    tg = target.reshape(-1)
    if np.any(tg <= 0):
        raise ValueError("target means must be positive")
    uniq, inv = np.unique(tg, return_inverse=True)

    def mean_of(mu):
        return np.asarray(r_class_mean_stable(kind, mu, r, alpha), dtype=float)

    # the descendant mean is below the parent mean, so start above target
    y = np.log(uniq) + 0.5
    done = np.zeros(uniq.size, dtype=bool)
    for _ in range(max_iter):
        mu = np.exp(y)
        m = mean_of(mu)
        h = 1e-6
        dm = (mean_of(mu * math.exp(h)) - mean_of(mu * math.exp(-h))) / (2 * h)
        with np.errstate(all="ignore"):
            step = (np.log(m) - np.log(uniq)) / (dm / m)
        bad = ~np.isfinite(step)
        step = np.where(bad, 0.0, np.clip(step, -2.0, 2.0))
        y = y - step
        done = (np.abs(step) < tol) & ~bad
        if done.all():
            break
    out = np.exp(y)
    for i in np.flatnonzero(~done | ~np.isfinite(out)):
        lo, hi = uniq[i] * 1e-3, uniq[i] * 2.0 + 1.0
        while mean_of(np.array([hi]))[0] < uniq[i]:
            hi *= 2.0
        out[i] = optimize.brentq(lambda u: mean_of(np.array([u]))[0] - uniq[i], lo, hi,
                                 xtol=1e-14, rtol=4e-16)
    return out[inv].reshape(shape)


def _log_tail_poisson(y, mux):
    # log P(Pois(mux) >= y)
    with np.errstate(divide="ignore"):
        return np.where(y == 0, 0.0, np.log(sc.gammainc(np.maximum(y, 1), mux)))


def _log_tail_negbin(y, kappa, q):
    # log P(NB >= y) for failures before kappa successes, failure probability q
    # passed directly: 1 - p cancels when q is tiny
    with np.errstate(divide="ignore"):
        return np.where(y == 0, 0.0, np.log(sc.betainc(np.maximum(y, 1), kappa, q)))


def _r_class_logpmf(y, mu, r, kind, alpha=None):
    """``log q_y`` for the r-class of a Poisson or negative binomial parent.

    Uses ``H_y(x) = H_0(x) P(N_x >= y)`` where ``N_x`` is the parent family
    with its success odds scaled by ``x = 1/r``.
    """
    x = 1.0 / r
    delta = 1.0 - x
    D = np.asarray(r_class_norm_mean(kind, mu, r, alpha)[0])
    if kind == "poisson":
        log_h0 = -mu * delta
        tail = _log_tail_poisson(y, mu * x)
    else:
        kappa = 1.0 / alpha
        am = alpha * mu
        q_x = am / (1.0 + am) * x
        log_h0 = -kappa * (np.log1p(am) + np.log1p(-q_x))
        tail = _log_tail_negbin(y, kappa, q_x)
    return log_h0 + tail + y * math.log(r) + math.log(delta) - np.log(D)


def _r1_logpmf(y, mu, kind, alpha=None):
    # partial-sum limit: P(N >= y) / (1 + mu)
    if kind == "poisson":
        tail = _log_tail_poisson(y, mu)
    else:
        tail = _log_tail_negbin(y, 1.0 / alpha, alpha * mu / (1.0 + alpha * mu))
    return tail - np.log1p(mu)


def _parent_logpmf(y, mu, kind, alpha=None):
    if kind == "poisson":
        return stats.poisson.logpmf(y, mu)
    kappa = 1.0 / alpha
    return stats.nbinom.logpmf(y, kappa, 1.0 / (1.0 + alpha * mu))


def _lambda_class_loglik(y, target, lam, kind, alpha):
    uniq, inv = np.unique(target, return_inverse=True)
    out = np.empty(y.size)

    def build(mu):
        parent = DiscreteParent.poisson(mu) if kind == "poisson" else DiscreteParent.negbin(mu, alpha)
        return LambdaClass(parent, lam)

    for i, tgt in enumerate(uniq):
        f = lambda m: build(m).mean() - tgt
        hi = tgt * 2.0 + 1.0
        while f(hi) < 0:
            hi *= 2.0
        mu = optimize.brentq(f, tgt * 1e-6, hi, xtol=1e-12, rtol=1e-12)
        fam = build(mu)
        rows = inv == i
        with np.errstate(divide="ignore"):
            out[rows] = np.log(fam.pmf(y[rows]))
    return out


def count_loglik(family: str, vals: dict, data: CountDataset) -> float:
    beta = _coef_vector(vals, data.covariate_names)
    target = vals["mu0"] * np.exp(data.covariates @ beta)
    kind = "negbin" if family.startswith("negbin") else "poisson"
    alpha = vals.get("alpha")
    if kind == "negbin" and alpha < ALPHA_POISSON:
        # below this the dispersion is numerically the Poisson limit
        kind, alpha = "poisson", None
    y = data.count
    if family in ("poisson", "negbin"):
        lp = _parent_logpmf(y, target, kind, alpha)
    elif family.endswith("-r"):
        r = vals["r"]
        if not r > 1.0:
            raise ValueError("r must exceed 1")
        mu = invert_r_class_mean(target, r, kind, alpha)
        lp = _r_class_logpmf(y, mu, r, kind, alpha)
    else:
        lp = _lambda_class_loglik(y, target, vals["lambda"], kind, alpha)
    return float(np.sum(lp))


def fit_counts(family: str, data: CountDataset, fixed: dict | None = None,
               start: dict | None = None, max_iter: int = 20000) -> FitResult:
    """Fit a count model whose descendant mean follows a log link.

    For the ``-r`` families the boundary ``r -> 1`` is reported in
    ``flags['boundary']`` as the partial-sum limit model.
    """
    if family not in COUNT_FAMILIES:
        raise ValueError(f"unknown count family '{family}'; choose from {sorted(COUNT_FAMILIES)}")
    fixed = dict(fixed or {})
    start = dict(start or {})
    known = set(COUNT_FAMILIES[family]) | {f"coef:{n}" for n in data.covariate_names}
    for k in fixed:
        if k not in known:
            raise ValueError(f"cannot fix '{k}' for family {family}")
    ybar = max(float(np.mean(data.count)), 1e-3)
    var = float(np.var(data.count))
    defaults = {"mu0": ybar, "alpha": max((var - ybar) / ybar ** 2, 0.1), "r": 2.0, "lambda": 1.0}
    params = []
    for name in COUNT_FAMILIES[family]:
        if name in fixed:
            continue
        params.append(_Param(name, "log1m" if name == "r" else "log", 0.0))
    for n in data.covariate_names:
        if f"coef:{n}" not in fixed:
            params.append(_Param(f"coef:{n}", "free", 0.0))
    x0 = np.array([p.to_internal(start.get(p.name, defaults.get(p.name, 0.0))) for p in params])

    def negll(theta):
        try:
            vals = _split(params, fixed, theta)
            with np.errstate(all="ignore"):
                v = -count_loglik(family, vals, data)
        except (ValueError, OverflowError, ArithmeticError, RuntimeError):
            return np.inf
        return v if np.isfinite(v) else np.inf

    opt = minimize(negll, x0, max_iter=max_iter)
    flags = {}
    if not opt.converged:
        flags["optimizer"] = "iteration cap reached"
    res = _finish(family, params, negll, opt, data.n, fixed, flags)
    if family.startswith("negbin") and res.get("alpha") < 10 * ALPHA_POISSON:
        res.flags["alpha_boundary"] = "alpha -> 0: dispersion has gone to the Poisson limit"
    if family.endswith("-r") and res.get("r") - 1.0 < R_BOUNDARY:
        res.flags["boundary"] = "r -> 1: model has gone to the partial-sum limiting case"
        res.loglik = max(res.loglik, _r1_limit_loglik(res, data, kind="negbin" if family.startswith("negbin") else "poisson"))
    return res


def _r1_limit_loglik(res: FitResult, data: CountDataset, kind: str) -> float:
    vals = {n: res.get(n) for n in res.names}
    vals.update(res.fixed)
    beta = _coef_vector(vals, data.covariate_names)
    target = vals["mu0"] * np.exp(data.covariates @ beta)
    alpha = vals.get("alpha")
    mu = invert_r_class_mean(target, 1.0, kind, alpha)
    return float(np.sum(_r1_logpmf(data.count, mu, kind, alpha)))


# -- dominance test --------------------------------------------------------------

DOMINANCE_FAMILIES = ("f-lambda-exponential", "f-lambda-weibull", "mod-weibull")


def _dom_base_names(family):
    return ("alpha",) if family == "f-lambda-exponential" else ("alpha", "gamma")


XI_BASE = 1e-10


def _dom_logpdf(family, base, xi, t):
    """Log density of the base (``xi = 0``) or its L-shift on sample ``t``."""
    alpha = base["alpha"]
    gamma = base.get("gamma", 1.0)
    x = alpha * t
    if xi < XI_BASE:
        xi = 0.0
    if family == "mod-weibull":
        d = StacyLShift.from_xi(1.0, 1.0, gamma, xi)
        return np.asarray(d.logpdf(x)) + math.log(alpha)
    z = x ** gamma
    lf = math.log(alpha * gamma) + (gamma - 1.0) * np.log(x) - z
    if xi == 0.0:
        return lf
    lam = 1.0 / xi
    return math.log(lam) + lf + _log_v_exponential(z, lam)


def _log_v_exponential(z, lam):
    # log of (1 - F^(lam - 1)) / (lam - 1) for F = 1 - e^-z, with its lam = 1 limit
    eps = lam - 1.0
    logF = np.log(-np.expm1(-z))
    if eps == 0.0:
        return np.log(-logF)
    return np.log(-np.expm1(eps * logF) / eps)


def _dom_negll(family, t_base, t_shift, base, xi):
    if family == "f-lambda-exponential":
        # the exponential parts reduce to sums, leaving one array term
        alpha = base["alpha"]
        n = t_base.size + t_shift.size
        v = n * math.log(alpha) - alpha * (float(np.sum(t_base)) + float(np.sum(t_shift)))
        if xi >= XI_BASE and t_shift.size:
            lam = 1.0 / xi
            with np.errstate(all="ignore"):
                v += t_shift.size * math.log(lam) + float(np.sum(_log_v_exponential(alpha * t_shift, lam)))
        return -v if np.isfinite(v) else np.inf
    with np.errstate(all="ignore"):
        v = -(np.sum(_dom_logpdf(family, base, 0.0, t_base))
              + np.sum(_dom_logpdf(family, base, xi, t_shift)))
    return float(v) if np.isfinite(v) else np.inf


@dataclass(frozen=True)
class _DomFit:
    base: dict
    xi: float
    negll: float


def _fit_null(family, pooled) -> _DomFit:
    names = _dom_base_names(family)
    b0 = np.array([-math.log(float(np.mean(pooled)))] + [0.0] * (len(names) - 1))

    def obj(th):
        return _dom_negll(family, pooled, np.zeros(0), dict(zip(names, np.exp(th))), 0.0)

    res = minimize(obj, b0, restarts=2, xatol=1e-9, fatol=1e-11)
    return _DomFit(dict(zip(names, np.exp(res.x))), 0.0, res.fun)


def _fit_alt(family, t_base, t_shift, null: _DomFit, starts, xatol=1e-9, fatol=1e-11,
             restarts=2) -> _DomFit:
    """Free ``xi = phi^2 >= 0``; the base limit ``phi = 0`` is an interior point."""
    names = _dom_base_names(family)

    def obj(th):
        return _dom_negll(family, t_base, t_shift, dict(zip(names, np.exp(th[:-1]))), th[-1] ** 2)

    best = None
    for s in starts:
        try:
            res = minimize(obj, s, restarts=restarts, xatol=xatol, fatol=fatol)
        except FitError:
            continue
        if best is None or res.fun < best.fun:
            best = res
    if best is None or not best.fun < null.negll:
        return _DomFit(null.base, 0.0, null.negll)
    xi = float(best.x[-1] ** 2)
    return _DomFit(dict(zip(names, np.exp(best.x[:-1]))), 0.0 if xi < XI_BASE else xi, best.fun)


def _fit_dominance(family, t_base, t_shift) -> tuple[_DomFit, _DomFit]:
    """Null fit (both samples from the base law) and alternative fit (the
    second sample L-shifted by ``u = F^lambda``, ``xi = 1/lambda``)."""
    null = _fit_null(family, np.concatenate([t_base, t_shift]))
    b = np.log([null.base[n] for n in _dom_base_names(family)])
    starts = [np.append(b, math.sqrt(0.5)), np.append(b, 0.05)]
    return null, _fit_alt(family, t_base, t_shift, null, starts)


@dataclass
class DominanceResult:
    """Both one-sided orientations of the dominance test.

    ``"b_shifted"`` tests whether sample B is an L-shift of (dominated by)
    sample A's law; ``"a_shifted"`` swaps the roles.
    """

    family: str
    mode: str
    orientations: dict
    n_perm: int
    failures: int

    def to_dict(self) -> dict:
        return {"family": self.family, "mode": self.mode, "n_perm": self.n_perm,
                "failures": self.failures, "orientations": self.orientations}

    def summary(self) -> str:
        lines = [f"dominance test: family {self.family}, mode {self.mode}"]
        for key, o in self.orientations.items():
            lines.append(f"[{key}] xi_hat = {o['xi_hat']:.6g}  lrt = {o['lrt']:.6g}"
                         f"  p_chi2 = {o['p_chi2']:.4g}  p_boundary = {o['p_boundary']:.4g}"
                         + (f"  p_perm = {o['p_perm']:.4g}" if o.get("p_perm") is not None else ""))
            lines.append(f"    base fit: {o['base']}")
        if self.mode != "lrt":
            lines.append(f"permutations: {self.n_perm}, failed refits: {self.failures}")
        return "\n".join(lines)


def _perm_pvalue(observed: float, perm: np.ndarray, rng, tol: float = 1e-7) -> float:
    # proportion of permuted lambda-hat no greater than observed, i.e. xi* >= xi,
    # with ties (typically the xi = 0 boundary) broken uniformly at random
    scale = max(tol, tol * abs(observed))
    greater = int(np.sum(perm > observed + scale))
    ties = int(np.sum(np.abs(perm - observed) <= scale))
    return (greater + rng.random() * (ties + 1)) / (perm.size + 1)


def dominance_test(sample_a, sample_b, family: str = "f-lambda-exponential", mode: str = "lrt",
                   n_perm: int = 199, seed: int | None = 0, orientations=("b_shifted", "a_shifted"),
                   max_failure_rate: float = 0.05) -> DominanceResult:
    """Test whether one sample is an L-shift of the other's fitted law.

    In each orientation the reference sample is fitted with ``1/lambda``
    fixed at zero (the base law) and the other with ``xi = 1/lambda`` free,
    sharing the base parameters.  ``mode`` is ``"lrt"``, ``"permutation"``
    or ``"both"``.
    """
    if family not in DOMINANCE_FAMILIES:
        raise ValueError(f"unknown dominance family '{family}'; choose from {list(DOMINANCE_FAMILIES)}")
    if mode not in ("lrt", "permutation", "both"):
        raise ValueError("mode must be lrt, permutation or both")
    if mode != "lrt" and n_perm < 99:
        raise ValueError("permutation mode needs n_perm >= 99")
    a = np.asarray(sample_a, dtype=float).reshape(-1)
    b = np.asarray(sample_b, dtype=float).reshape(-1)
    if a.size == 0 or b.size == 0:
        raise DataError("both samples must be nonempty")
    if np.any(a <= 0) or np.any(b <= 0) or not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise DataError("samples must be positive and finite")
    ss = np.random.SeedSequence(seed)
    out = {}
    failures_total = 0
    children = ss.spawn(len(orientations))
    for key, child in zip(orientations, children):
        ref, shifted = (a, b) if key == "b_shifted" else (b, a)
        null_fit, alt_fit = _fit_dominance(family, ref, shifted)
        lrt = max(0.0, 2.0 * (null_fit.negll - alt_fit.negll))
        p_chi2 = float(stats.chi2.sf(lrt, 1))
        entry = {
            "xi_hat": alt_fit.xi,
            "lambda_hat": math.inf if alt_fit.xi == 0 else 1.0 / alt_fit.xi,
            "lrt": lrt,
            "p_chi2": p_chi2,
            "p_boundary": 0.5 * p_chi2 if lrt > 0 else 1.0,
            "base": {k: float(v) for k, v in alt_fit.base.items()},
            "null_base": {k: float(v) for k, v in null_fit.base.items()},
            "p_perm": None,
        }
        if mode != "lrt":
            rep_seeds = child.spawn(n_perm + 1)
            pooled = np.concatenate([ref, shifted])
            perm_xi = []
            fails = 0
            names = _dom_base_names(family)
            warm = np.append(np.log([alt_fit.base[n] for n in names]), math.sqrt(max(alt_fit.xi, 0.01)))
            for rs in rep_seeds[:-1]:
                prng = np.random.default_rng(rs)
                idx = prng.permutation(pooled.size)
                try:
                    # the pooled null fit does not depend on the labels
                    pf = _fit_alt(family, pooled[idx[:ref.size]], pooled[idx[ref.size:]], null_fit,
                                  [warm], xatol=1e-7, fatol=1e-9, restarts=0)
                    if not np.isfinite(pf.negll):
                        raise FitError("non-finite likelihood")
                    perm_xi.append(pf.xi)
                except (FitError, ValueError, ArithmeticError):
                    fails += 1
                if fails > max_failure_rate * n_perm:
                    raise FitError(f"{fails} of {n_perm} permutation refits failed (orientation {key})")
            failures_total += fails
            entry["p_perm"] = _perm_pvalue(alt_fit.xi, np.asarray(perm_xi), np.random.default_rng(rep_seeds[-1]))
        out[key] = entry
    return DominanceResult(family, mode, out, n_perm if mode != "lrt" else 0, failures_total)
