"""Distributions generated by integration and summation by parts.

A continuous base density ``f = -u v'`` is turned into ``g = u' v``; a
discrete parent pmf is turned into a descendant pmf by the summation
analogue.  The resulting pairs are ordered by first-order stochastic
dominance.
"""

__version__ = "0.1.0"

from .continuous import (  # noqa: E402
    BetaLShift,
    ExpGammaMixture,
    ExpLambdaF,
    FLambda,
    ModifiedExponential,
    PhaseTypeExponential,
    SkewNormalIBP,
    StacyLShift,
)
from .discrete import (  # noqa: E402
    LambdaClass,
    ProductU,
    RClass,
    RMinusClass,
    bissinger,
    geometric_longtail_pgf,
    geometric_longtail_pmf,
    r_class_r1_limit,
)
from .ibp import BaseDistribution, TransformedContinuous, UFunction, from_scipy, r_shift  # noqa: E402
from .inference import (  # noqa: E402
    CountDataset,
    SurvivalDataset,
    dominance_test,
    fit_counts,
    fit_survival,
)
from .sbp import DescendantPmf, DiscreteParent, USequence  # noqa: E402
from .specialfn import ConvergenceError, QuadratureConfig  # noqa: E402

__all__ = [
    "BaseDistribution",
    "BetaLShift",
    "ConvergenceError",
    "CountDataset",
    "DescendantPmf",
    "DiscreteParent",
    "ExpGammaMixture",
    "ExpLambdaF",
    "FLambda",
    "LambdaClass",
    "ModifiedExponential",
    "PhaseTypeExponential",
    "ProductU",
    "QuadratureConfig",
    "RClass",
    "RMinusClass",
    "SkewNormalIBP",
    "StacyLShift",
    "SurvivalDataset",
    "TransformedContinuous",
    "UFunction",
    "USequence",
    "bissinger",
    "dominance_test",
    "fit_counts",
    "fit_survival",
    "from_scipy",
    "geometric_longtail_pgf",
    "geometric_longtail_pmf",
    "r_class_r1_limit",
    "r_shift",
]
