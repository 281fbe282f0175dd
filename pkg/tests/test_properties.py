"""Property-based checks of the structural invariants."""

import math

import numpy as np
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from partsdist.continuous import FLambda, StacyLShift, exponential_base, weibull_base
from partsdist.discrete import RClass, r_class_mean_stable
from partsdist.inference import CountDataset, SurvivalDataset, count_loglik, invert_r_class_mean, survival_loglik
from partsdist.sbp import DiscreteParent, USequence, descendant_pmf, r_to_l_longtail
from partsdist.specialfn import upper_incomplete_gamma

SETTINGS = settings(max_examples=40, deadline=None)

weights = arrays(np.float64, st.integers(2, 12), elements=st.floats(0.01, 1.0))
u_sequences = st.one_of(
    st.floats(0.2, 5.0).map(USequence.power),
    st.floats(1.05, 20.0).map(USequence.geometric),
    st.floats(1.05, 20.0).map(USequence.geometric_minus),
    st.integers(1, 4).map(USequence.product),
)


@SETTINGS
@given(w=weights, u=u_sequences)
def test_descendant_is_a_distribution(w, u):
    parent = DiscreteParent(w / w.sum())
    d = descendant_pmf(parent, u)
    assert np.all(d.q >= -1e-15)
    assert abs(d.q.sum() - 1.0) < 1e-12
    G = d.cdf_array()
    assert np.all(np.diff(G) >= -1e-14)
    # with u_{-1} = 0 the descendant is stochastically smaller than its parent
    with np.errstate(divide="ignore"):
        u_minus = float(np.exp(u.log_u(-1)))
    if u_minus == 0.0:
        assert np.all(G >= parent.cdf() - 1e-12)
    i = np.arange(d.q.size)
    assert abs(d.mean() - float(i @ d.q)) < 1e-10 * (1 + d.mean())


@SETTINGS
@given(w=weights, tail=st.floats(0.05, 0.9))
def test_reverse_transform_preserves_mass(w, tail):
    q = w / w.sum()
    v = np.append(tail ** np.arange(q.size, dtype=float), 0.0)
    p = r_to_l_longtail(q, v)
    assert np.all(p >= 0)
    assert abs(p.sum() - 1.0) < 1e-12


@SETTINGS
@given(mu=st.floats(0.05, 20.0), r=st.floats(1.01, 50.0))
def test_r_class_mean_closed_form(mu, r):
    d = RClass(DiscreteParent.poisson(mu), r)
    assert math.isclose(r_class_mean_stable("poisson", mu, r), d.desc.mean_direct(), rel_tol=1e-8, abs_tol=1e-10)


@SETTINGS
@given(mu=st.floats(0.01, 50.0), logr=st.floats(-12.0, math.log(1e4)), alpha=st.sampled_from([None, 0.3, 2.0]))
def test_mean_inversion_round_trip(mu, logr, alpha):
    r = 1.0 + math.exp(logr)
    kind = "poisson" if alpha is None else "negbin"
    target = r_class_mean_stable(kind, mu, r, alpha)
    assert math.isclose(float(invert_r_class_mean(target, r, kind, alpha)), mu, rel_tol=1e-10)


@SETTINGS
@given(lam=st.floats(0.1, 20.0), x=st.floats(0.001, 12.0), shape=st.floats(0.5, 3.0))
def test_f_lambda_identity_and_dominance(lam, x, shape):
    base = weibull_base(1.0, shape)
    d = FLambda(base, lam)
    t = d.transform()
    assert abs(float(d.cdf(x)) - base.cdf(x) - t.uv(x)) < 1e-9
    assert base.sf(x) - float(d.sf(x)) >= -1e-12


@SETTINGS
@given(xi=st.floats(0.0, 5.0), gamma=st.floats(0.3, 4.0), beta=st.floats(0.3, 4.0), t=st.floats(0.01, 10.0))
def test_stacy_dominated_by_base(xi, gamma, beta, t):
    d = StacyLShift.from_xi(1.0, beta, gamma, xi)
    base = d.base()
    sf = float(d.sf(t))
    assert 0.0 <= sf <= base.sf(t) + 1e-12
    assert abs(float(d.cdf(t)) + sf - 1.0) < 1e-12


@SETTINGS
@given(a=st.floats(-3.0, 3.0).filter(lambda a: abs(a) > 1e-3 and abs(a + 1) > 1e-3), t=st.floats(0.05, 10.0))
def test_incomplete_gamma_recurrence(a, t):
    res = a * upper_incomplete_gamma(a, t) - upper_incomplete_gamma(a + 1.0, t) + t ** a * math.exp(-t)
    assert abs(res) < 1e-8 * max(1.0, upper_incomplete_gamma(a, t))


@SETTINGS
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_loglik_row_permutation(seed):
    rng = np.random.default_rng(seed)
    n = 60
    x = rng.normal(size=(n, 2))
    t = rng.exponential(size=n)
    ev = rng.random(n) < 0.7
    y = rng.poisson(2.0, n)
    perm = rng.permutation(n)
    sv = {"alpha": 1.3, "gamma": 1.4, "xi": 0.6, "coef:a": 0.2, "coef:b": -0.5}
    s1 = SurvivalDataset(t, ev, x, ("a", "b"))
    s2 = SurvivalDataset(t[perm], ev[perm], x[perm], ("a", "b"))
    assert abs(survival_loglik("mod-weibull", sv, s1) - survival_loglik("mod-weibull", sv, s2)) < 1e-10
    cv = {"mu0": 1.8, "r": 2.5, "alpha": 0.4, "coef:a": 0.1, "coef:b": 0.3}
    c1 = CountDataset(y, x, ("a", "b"))
    c2 = CountDataset(y[perm], x[perm], ("a", "b"))
    assert abs(count_loglik("negbin-r", cv, c1) - count_loglik("negbin-r", cv, c2)) < 1e-10


@SETTINGS
@given(lam=st.sampled_from([0.5, 1.0, 2.0, 5.0]), rate=st.floats(0.2, 5.0))
def test_tail_ratio_limit(lam, rate):
    d = FLambda(exponential_base(rate), lam)
    x = math.log(1e5) / rate  # base survival 1e-5
    assert abs(float(d.tail_ratio(x)) - lam / 2) < 1e-3
