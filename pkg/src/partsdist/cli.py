"""Command-line front end: ``partsdist fit|curve|sample|dominance``.

Exit codes: 0 success, 1 fit failure, 2 usage or data error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from importlib import resources
from typing import Callable

import numpy as np
from scipy import stats

from . import __version__
from .continuous import (
    BetaLShift,
    ExpLambdaF,
    FLambda,
    ModifiedExponential,
    PhaseTypeExponential,
    SkewNormalIBP,
    StacyLShift,
    exponential_base,
    normal_base,
    uniform_base,
    weibull_base,
)
from .discrete import LambdaClass, ProductU, RClass, RMinusClass, geometric_longtail_pmf
from .inference import (
    COUNT_FAMILIES,
    DOMINANCE_FAMILIES,
    SURVIVAL_FAMILIES,
    CountDataset,
    DataError,
    FitError,
    SurvivalDataset,
    dominance_test,
    fit_counts,
    fit_survival,
)
from .sbp import DiscreteParent
from .specialfn import ConvergenceError

EXIT_OK, EXIT_FIT, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


# -- family registry -------------------------------------------------------------

@dataclass(frozen=True)
class _Scipy:
    frozen: object

    def pdf(self, x):
        return self.frozen.pdf(x)

    def cdf(self, x):
        return self.frozen.cdf(x)

    def sf(self, x):
        return self.frozen.sf(x)

    def rvs(self, rng, size):
        return self.frozen.rvs(size=size, random_state=rng)


@dataclass(frozen=True)
class _Continuous:
    params: tuple
    defaults: dict
    build: Callable


def _require(cond, msg):
    if not cond:
        raise UsageError(msg)


def _positive(p, *names):
    for n in names:
        _require(p[n] > 0, f"parameter {n} must be positive (got {p[n]})")


def _b_exponential(p):
    _positive(p, "alpha")
    return _Scipy(stats.expon(scale=1.0 / p["alpha"]))


def _b_weibull(p):
    _positive(p, "alpha", "gamma")
    return _Scipy(stats.weibull_min(p["gamma"], scale=1.0 / p["alpha"]))


def _b_stacy(p):
    _positive(p, "alpha", "beta", "gamma")
    _require(p["xi"] >= 0, "parameter xi must be nonnegative")
    return StacyLShift.from_xi(p["alpha"], p["beta"], p["gamma"], p["xi"])


def _b_modweibull(p):
    return _b_stacy({**p, "beta": 1.0})


def _b_flambda(base_fn):
    def build(p):
        _positive(p, "lambda")
        return FLambda(base_fn(p), p["lambda"])
    return build


CONTINUOUS = {
    "exponential": _Continuous(("alpha",), {"alpha": 1.0}, _b_exponential),
    "weibull": _Continuous(("alpha", "gamma"), {"alpha": 1.0, "gamma": 1.0}, _b_weibull),
    "mod-exponential": _Continuous(("alpha",), {"alpha": 1.0},
                                   lambda p: (_positive(p, "alpha"), ModifiedExponential(p["alpha"]))[1]),
    "mod-weibull": _Continuous(("alpha", "gamma", "xi"), {"alpha": 1.0, "gamma": 1.0, "xi": 0.5}, _b_modweibull),
    "stacy": _Continuous(("alpha", "beta", "gamma", "xi"),
                         {"alpha": 1.0, "beta": 1.0, "gamma": 1.0, "xi": 0.5}, _b_stacy),
    "f-lambda-exponential": _Continuous(("alpha", "lambda"), {"alpha": 1.0, "lambda": 1.0},
                                        _b_flambda(lambda p: (_positive(p, "alpha"), exponential_base(p["alpha"]))[1])),
    "f-lambda-weibull": _Continuous(("alpha", "gamma", "lambda"), {"alpha": 1.0, "gamma": 1.0, "lambda": 1.0},
                                    _b_flambda(lambda p: (_positive(p, "alpha", "gamma"),
                                                          weibull_base(p["alpha"], p["gamma"]))[1])),
    "f-lambda-uniform": _Continuous(("lambda",), {"lambda": 1.0}, _b_flambda(lambda p: uniform_base())),
    "f-lambda-normal": _Continuous(("lambda",), {"lambda": 1.0}, _b_flambda(lambda p: normal_base())),
    "exp-lambda-f-exponential": _Continuous(
        ("alpha", "lambda"), {"alpha": 1.0, "lambda": 1.0},
        lambda p: (_positive(p, "alpha", "lambda"), ExpLambdaF(exponential_base(p["alpha"]), p["lambda"]))[1]),
    "phase-type": _Continuous(("lambda",), {"lambda": 2.0},
                              lambda p: (_positive(p, "lambda"), PhaseTypeExponential(p["lambda"]))[1]),
    "beta-l-shift": _Continuous(
        ("alpha", "beta", "lambda", "c"), {"alpha": 2.0, "beta": 2.0, "lambda": 1.0, "c": 0.0},
        lambda p: BetaLShift(p["alpha"], p["beta"], p["lambda"], p["c"])),
    "skew-normal": _Continuous(("lambda", "loc", "scale"), {"lambda": 2.0, "loc": 0.0, "scale": 1.0},
                               lambda p: SkewNormalIBP(p["lambda"], p["loc"], p["scale"])),
}

PARENTS = {
    "poisson": (("mu",), {"mu": 1.0}),
    "negbin": (("mu", "alpha"), {"mu": 1.0, "alpha": 1.0}),
    "binomial": (("n", "p"), {"n": 10, "p": 0.5}),
}

# descendant kind -> (extra parameter, default)
DESCENDANTS = {
    "r": ("r", 2.0),
    "lambda": ("lambda", 1.0),
    "rminus": ("r", 2.0),
    "product": ("t", 1.0),
    "longtail": ("r", 2.0),
}


def _split_discrete(name):
    parent, _, kind = name.partition("-")
    if parent not in PARENTS or (kind and kind not in DESCENDANTS):
        return None
    return parent, kind


def _parent(name, p) -> DiscreteParent:
    if name == "poisson":
        _positive(p, "mu")
        return DiscreteParent.poisson(p["mu"])
    if name == "negbin":
        _positive(p, "mu", "alpha")
        return DiscreteParent.negbin(p["mu"], p["alpha"])
    n = p["n"]
    _require(n >= 1 and n == int(n), "parameter n must be a positive integer")
    _require(0 < p["p"] < 1, "parameter p must lie in (0, 1)")
    return DiscreteParent.binomial(int(n), p["p"])


@dataclass(frozen=True)
class _DiscreteModel:
    pmf_array: np.ndarray  # over 0..len-1
    sampler: Callable | None


def _discrete_model(parent_name, kind, p) -> _DiscreteModel:
    par = _parent(parent_name, p)
    if not kind:
        return _DiscreteModel(par.pmf, par.rvs)
    key, _ = DESCENDANTS[kind]
    val = p[key]
    if kind == "r":
        _require(val > 1, "parameter r must exceed 1")
        fam = RClass(par, val)
        return _DiscreteModel(fam.q, fam.rvs)
    if kind == "lambda":
        _positive(p, "lambda")
        fam = LambdaClass(par, val)
        return _DiscreteModel(fam.q, fam.rvs)
    if kind == "rminus":
        _require(val > 1, "parameter r must exceed 1")
        fam = RMinusClass(par, val)
        return _DiscreteModel(fam.q, fam.rvs)
    if kind == "product":
        _require(val >= 1 and val == int(val), "parameter t must be a positive integer")
        fam = ProductU(par, int(val))
        return _DiscreteModel(fam.q, fam.rvs)
    _require(val > 1, "parameter r must exceed 1")
    # extend until the geometric tail is negligible
    size = par.n + 1 + int(math.ceil(40.0 / math.log(val))) + 1
    q = geometric_longtail_pmf(par, val, size)

    def sample(rng, n):
        return par.rvs(rng, n) + rng.geometric(1.0 - 1.0 / val, n) - 1

    return _DiscreteModel(q, sample)


def _family_params(family):
    if family in CONTINUOUS:
        spec = CONTINUOUS[family]
        return spec.params, spec.defaults
    split = _split_discrete(family)
    if split is None:
        raise UsageError(f"unknown family '{family}'")
    parent, kind = split
    names, defaults = PARENTS[parent]
    defaults = dict(defaults)
    if kind:
        key, dv = DESCENDANTS[kind]
        names = names + (key,)
        defaults[key] = dv
    return names, defaults


def all_curve_families():
    out = list(CONTINUOUS)
    for par in PARENTS:
        out.append(par)
        out.extend(f"{par}-{k}" for k in DESCENDANTS)
    return out


# -- argument helpers -------------------------------------------------------------

def _parse_fix(items, allow_lists: bool):
    out = {}
    for item in items or []:
        name, eq, value = item.partition("=")
        name = name.strip()
        if not eq or not name:
            raise UsageError(f"--fix expects name=value, got '{item}'")
        parts = [v.strip() for v in value.split(",")]
        if len(parts) > 1 and not allow_lists:
            raise UsageError(f"--fix {name}: a single value is required here")
        try:
            vals = [float(v) for v in parts]
        except ValueError:
            raise UsageError(f"--fix {name}: cannot parse '{value}'") from None
        if name in out:
            raise UsageError(f"--fix {name} given twice")
        out[name] = vals if allow_lists else vals[0]
    return out


def _parse_grid(text):
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"--grid expects min:max[:points], got '{text}'")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        pts = int(parts[2]) if len(parts) == 3 else None
    except ValueError:
        raise UsageError(f"--grid: cannot parse '{text}'") from None
    if not lo < hi:
        raise UsageError("--grid: min must be below max")
    if pts is not None and pts < 2:
        raise UsageError("--grid: at least 2 points are required")
    return lo, hi, pts


def _resolve_data(path):
    if path is None:
        raise UsageError("--data is required")
    if path.startswith("example:"):
        name = path.split(":", 1)[1]
        fname = {"survival": "survival_example.csv", "counts": "counts_example.csv"}.get(name)
        if fname is None:
            raise UsageError(f"no bundled example '{name}' (use example:survival or example:counts)")
        return str(resources.files("partsdist").joinpath("data", fname))
    return path


def _covariates(text):
    if not text:
        return ()
    return tuple(c.strip() for c in text.split(",") if c.strip())


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands ---------------------------------------------------------------------

def cmd_fit(args) -> int:
    family = args.family
    fixed = _parse_fix(args.fix, allow_lists=False)
    cov = _covariates(args.covariates)
    path = _resolve_data(args.data)
    fixed = {(f"coef:{k}" if k in cov else k): v for k, v in fixed.items()}
    if family in SURVIVAL_FAMILIES:
        data = SurvivalDataset.from_csv(path, args.time_col, args.event_col, cov)
        res = fit_survival(family, data, fixed=fixed)
    elif family in COUNT_FAMILIES:
        data = CountDataset.from_csv(path, args.count_col, cov)
        res = fit_counts(family, data, fixed=fixed)
    else:
        raise UsageError(f"unknown fit family '{family}'; survival: {sorted(SURVIVAL_FAMILIES)}, "
                         f"counts: {sorted(COUNT_FAMILIES)}")
    report = res.to_dict()
    report["data"] = args.data
    text = res.summary() + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    sys.stdout.write(text)
    if args.json:
        sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _expand(fixed_lists, names, defaults):
    """Parameter dicts for each value of the (at most one) list-valued parameter."""
    for k in fixed_lists:
        if k not in names:
            raise UsageError(f"family has no parameter '{k}' (parameters: {', '.join(names)})")
    varying = [k for k, v in fixed_lists.items() if len(v) > 1]
    if len(varying) > 1:
        raise UsageError("only one parameter may take a comma-separated list")
    base = dict(defaults)
    base.update({k: v[0] for k, v in fixed_lists.items()})
    if not varying:
        return [("", base)]
    key = varying[0]
    return [(f"[{key}={_fmt(v)}]", {**base, key: v}) for v in fixed_lists[key]]


def cmd_curve(args) -> int:
    family = args.family
    names, defaults = _family_params(family)
    variants = _expand(_parse_fix(args.fix, allow_lists=True), names, defaults)
    cols = []
    if family in CONTINUOUS:
        if args.grid is None:
            raise UsageError("--grid min:max:points is required for continuous curves")
        lo, hi, pts = _parse_grid(args.grid)
        x = np.linspace(lo, hi, pts or 200)
        header = ["x"]
        for label, p in variants:
            d = CONTINUOUS[family].build(p)
            pdf = np.array([float(d.pdf(v)) for v in x])
            sf = np.array([float(d.sf(v)) for v in x])
            cols.append((label, pdf, 1.0 - sf, sf))
        names_out = ("pdf", "cdf", "survival", "hazard")
        index = x
    else:
        parent, kind = _split_discrete(family)
        lo, hi = 0, 20
        if args.grid is not None:
            glo, ghi, _ = _parse_grid(args.grid)
            lo, hi = max(0, int(math.ceil(glo))), int(math.floor(ghi))
        index = np.arange(lo, hi + 1)
        header = ["i"]
        if kind and len(variants) > 1:
            # the parent column lets the descendants be compared with it
            par = _parent(parent, variants[0][1]).pmf
            variants = [("[parent]", None)] + variants
        for label, p in variants:
            q = par if p is None else _discrete_model(parent, kind, p).pmf_array
            cdf_full = np.minimum(np.cumsum(q), 1.0)
            sf_full = np.clip(np.cumsum(q[::-1])[::-1] - q, 0.0, 1.0)
            pmf = np.where(index < q.size, q[np.minimum(index, q.size - 1)], 0.0)
            cdf = np.where(index < q.size, cdf_full[np.minimum(index, q.size - 1)], 1.0)
            sf = np.where(index < q.size, sf_full[np.minimum(index, q.size - 1)], 0.0)
            cols.append((label, pmf, cdf, sf))
        names_out = ("pmf", "cdf", "survival", "hazard")
    for label, _, _, _ in cols:
        header.extend(f"{n}{label}" for n in names_out)
    lines = ["\t".join(header)]
    for j, xv in enumerate(index):
        row = [_fmt(xv)]
        for _, dens, cdf, sf in cols:
            haz = dens[j] / sf[j] if sf[j] > 1e-12 else math.nan
            row.extend([_fmt(dens[j]), _fmt(cdf[j]), _fmt(sf[j]), _fmt(haz)])
        lines.append("\t".join(row))
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    family = args.family
    names, defaults = _family_params(family)
    fixed = _parse_fix(args.fix, allow_lists=False)
    for k in fixed:
        if k not in names:
            raise UsageError(f"family has no parameter '{k}' (parameters: {', '.join(names)})")
    if args.n is None or args.n < 1:
        raise UsageError("--n must be a positive integer")
    p = {**defaults, **fixed}
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    if family in CONTINUOUS:
        d = CONTINUOUS[family].build(p)
        if not hasattr(d, "rvs"):
            raise UsageError(f"no sampler available for {family}")
        vals = np.asarray(d.rvs(rng, args.n), dtype=float)
        text = "\n".join(repr(float(v)) for v in vals)
    else:
        parent, kind = _split_discrete(family)
        m = _discrete_model(parent, kind, p)
        if m.sampler is None:
            raise UsageError(f"no sampler available for {family}")
        vals = np.asarray(m.sampler(rng, args.n), dtype=np.int64)
        text = "\n".join(str(int(v)) for v in vals)
    _emit(text + "\n", args.out)
    return EXIT_OK


def _read_values(path):
    vals = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip().split(",")[0].strip()
            if not s or s.startswith("#"):
                continue
            try:
                vals.append(float(s))
            except ValueError:
                if not vals and lineno == 1:
                    continue  # header
                raise DataError(f"{path}: line {lineno}: cannot parse {s!r}") from None
    if not vals:
        raise DataError(f"{path}: no values")
    return np.asarray(vals)


def cmd_dominance(args) -> int:
    if not args.data or len(args.data) != 2:
        raise UsageError("dominance needs exactly two --data files (sample A, then sample B)")
    family = args.family or "f-lambda-exponential"
    if family not in DOMINANCE_FAMILIES:
        raise UsageError(f"unknown dominance family '{family}'; choose from {list(DOMINANCE_FAMILIES)}")
    if args.mode != "lrt" and args.n_perm < 99:
        raise UsageError("permutation mode needs --n-perm of at least 99")
    a = _read_values(_resolve_data(args.data[0]))
    b = _read_values(_resolve_data(args.data[1]))
    res = dominance_test(a, b, family=family, mode=args.mode, n_perm=args.n_perm, seed=args.seed)
    report = res.to_dict()
    report["data"] = list(args.data)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
    sys.stdout.write(res.summary() + "\n")
    if args.json:
        sys.stdout.write(json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n")
    return EXIT_OK


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o).__name__)


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="partsdist", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"partsdist {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, data_multi=False):
        sp.add_argument("--family", required=not data_multi, help="family id")
        sp.add_argument("--fix", action="append", metavar="NAME=VALUE",
                        help="fix a parameter (repeatable)")
        sp.add_argument("--seed", type=int, default=0, help="64-bit random seed (default 0)")
        sp.add_argument("--out", help="output path")

    f = sub.add_parser("fit", help="fit a survival or count model to CSV data")
    common(f)
    f.add_argument("--data", help="CSV file with header, or example:survival / example:counts")
    f.add_argument("--time-col", default="time")
    f.add_argument("--event-col", default="event")
    f.add_argument("--count-col", default="count")
    f.add_argument("--covariates", help="comma-separated covariate columns")
    f.add_argument("--json", action="store_true", help="also print the JSON report")
    f.set_defaults(func=cmd_fit)

    c = sub.add_parser("curve", help="tabulate pdf/pmf, cdf, survival and hazard")
    common(c)
    c.add_argument("--grid", help="min:max:points (discrete: min:max)")
    c.set_defaults(func=cmd_curve)

    s = sub.add_parser("sample", help="draw random values, one per line")
    common(s)
    s.add_argument("--n", type=int, help="number of draws")
    s.set_defaults(func=cmd_sample)

    d = sub.add_parser("dominance", help="test whether sample B is an L-shift of sample A")
    common(d, data_multi=True)
    d.add_argument("--data", action="append", help="value file (give twice: A then B)")
    d.add_argument("--mode", choices=("lrt", "permutation", "both"), default="lrt")
    d.add_argument("--n-perm", type=int, default=199)
    d.add_argument("--json", action="store_true", help="also print the JSON report")
    d.set_defaults(func=cmd_dominance)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DataError) as exc:
        print(f"partsdist {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"partsdist {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FitError, ConvergenceError) as exc:
        print(f"partsdist {args.command}: fit failed: {exc}", file=sys.stderr)
        return EXIT_FIT
    except ValueError as exc:
        # parameter domain violations raised by the families themselves
        print(f"partsdist {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
