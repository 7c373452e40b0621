import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sirskit import (
    EvaluationError,
    HypothesisViolationError,
    LimitConvergenceError,
    check_hypotheses,
    check_incidence_bound,
    compute_beta,
    from_callables,
    make_builtin,
    small_i_limit,
)

from conftest import FAMILY_INSTANCES, HYPOTHESIS_FAMILIES

positive_pop = st.floats(min_value=1e-6, max_value=50.0,
                         allow_nan=False, allow_infinity=False)


@pytest.mark.parametrize("family", sorted(FAMILY_INSTANCES))
@given(s=positive_pop, i=positive_pop)
@settings(max_examples=50, deadline=None)
def test_factorization(family, s, i):
    f = make_builtin(family, FAMILY_INSTANCES[family])
    fv = f.eval_f(s, i)
    assert abs(fv - i * f.eval_f1(s, i)) <= 1e-10 * max(1.0, abs(fv))


@pytest.mark.parametrize("family", sorted(FAMILY_INSTANCES))
def test_boundary_zeros_exact(family):
    f = make_builtin(family, FAMILY_INSTANCES[family])
    for v in (0.0, 1.0, 10.0, 50.0):
        assert f.eval_f(0.0, v) == 0.0
        assert f.eval_f(v, 0.0) == 0.0


@pytest.mark.parametrize("family", sorted(FAMILY_INSTANCES))
def test_analytic_partials_match_finite_differences(family):
    f = make_builtin(family, FAMILY_INSTANCES[family])
    h = 1e-5
    for s, i in [(5.0, 3.0), (20.0, 1.0), (40.0, 12.0)]:
        fd_s = (f.eval_f1(s + h, i) - f.eval_f1(s - h, i)) / (2 * h)
        fd_i = (f.eval_f1(s, i + h) - f.eval_f1(s, i - h)) / (2 * h)
        an_s = f.f1_ds(s, i)
        an_i = f.f1_di(s, i)
        # abs floor covers difference-quotient roundoff, ~ulp(f1)/(2h)
        assert fd_s == pytest.approx(an_s, rel=1e-5, abs=1e-9)
        assert fd_i == pytest.approx(an_i, rel=1e-5, abs=1e-9)


def test_saturated_f1_value():
    f = make_builtin("saturated_in_I", {"beta": 0.5, "a": 1.0})
    assert f.eval_f1(2.0, 3.0) == pytest.approx(0.25, abs=1e-15)


def test_power_f1_at_equilibrium_scale():
    # 0.0008 * 29.5804^2 is the infected outflow rate 0.7 of the
    # reference parameters, and is independent of I for this family.
    f = make_builtin("power", {"k": 0.0008, "q": 2.0})
    for i in (0.0, 1.0, 9.4244):
        assert f.eval_f1(29.5804, i) == pytest.approx(0.7, abs=1e-3)


@pytest.mark.parametrize("family, coefficients", [
    ("bilinear", {"beta": 0.0}),
    ("bilinear", {"beta": -1.0}),
    ("power", {"k": -0.1, "q": 2.0}),
    ("power", {"k": 0.1, "q": 0.0}),
    ("saturated_in_I", {"beta": 1.0, "a": -0.5}),
    ("ruan", {"beta": 1.0, "rho": -1.0}),
])
def test_make_builtin_rejects_bad_coefficients(family, coefficients):
    with pytest.raises(ValueError):
        make_builtin(family, coefficients)


def test_make_builtin_rejects_unknown_family_and_keys():
    with pytest.raises(ValueError, match="unknown incidence family"):
        make_builtin("holling", {"beta": 1.0})
    with pytest.raises(ValueError, match="unknown coefficient"):
        make_builtin("bilinear", {"beta": 1.0, "rho": 2.0})
    with pytest.raises(ValueError, match="missing required coefficient"):
        make_builtin("power", {"q": 2.0})


def test_check_hypotheses_power_passes():
    report = check_hypotheses(make_builtin("power", {"k": 0.0002, "q": 2.0}), 50.0)
    assert report.all_pass
    assert report.violations == []


@given(k=st.floats(min_value=1e-6, max_value=10.0),
       q=st.floats(min_value=1.0, max_value=5.0))
@settings(max_examples=30, deadline=None)
def test_check_hypotheses_power_family_q_ge_1(k, q):
    report = check_hypotheses(make_builtin("power", {"k": k, "q": q}), 50.0, grid_n=16)
    assert report.all_pass


def test_ruan_fails_h3_with_zero_limits():
    report = check_hypotheses(make_builtin("ruan", {"beta": 0.5, "rho": 1.0}), 50.0)
    assert not report.h3_pass
    failed_h3 = {point[0] for hyp, point, _ in report.violations if hyp == "H3"}
    sampled = {s for s, _ in report.h3_limit_at}
    assert failed_h3 == sampled  # the limit degenerates at every S
    assert all(abs(limit) < 1e-6 for _, limit in report.h3_limit_at)


def test_bilinear_h3_limit_at_s_max():
    report = check_hypotheses(make_builtin("bilinear", {"beta": 1.0}), 1.0)
    assert report.all_pass
    s_last, limit = report.h3_limit_at[-1]
    assert s_last == 1.0
    assert limit == pytest.approx(1.0, abs=1e-9)


def test_violations_empty_iff_all_pass():
    good = check_hypotheses(make_builtin("power", {"k": 0.0008, "q": 2.0}), 50.0)
    bad = check_hypotheses(make_builtin("ruan", {"beta": 0.5, "rho": 1.0}), 50.0)
    assert good.all_pass and good.violations == []
    assert not bad.all_pass and bad.violations != []


def test_check_hypotheses_deterministic():
    f = make_builtin("saturated_in_I", {"beta": 0.1, "a": 2.0})
    assert check_hypotheses(f, 50.0) == check_hypotheses(f, 50.0)


def test_check_hypotheses_validates_inputs():
    f = make_builtin("bilinear", {"beta": 1.0})
    with pytest.raises(ValueError):
        check_hypotheses(f, -1.0)
    with pytest.raises(ValueError):
        check_hypotheses(f, 50.0, grid_n=4)
    with pytest.raises(ValueError):
        check_hypotheses(f, 50.0, eps=100.0)


def test_non_finite_value_reports_point():
    f = from_callables(lambda S, I: np.where(S > 25.0, np.nan, S * I),
                       f1=lambda S, I: np.where(S > 25.0, np.nan, S + 0.0 * I),
                       partials=(lambda S, I: 1.0 + 0.0 * S + 0.0 * I,
                                 lambda S, I: 0.0 * S + 0.0 * I))
    with pytest.raises(EvaluationError, match=r"\("):
        check_hypotheses(f, 50.0)


def test_compute_beta_power_values():
    assert compute_beta(make_builtin("power", {"k": 0.0008, "q": 2.0}),
                        10.0, 0.2) == pytest.approx(0.04, rel=1e-12)
    assert compute_beta(make_builtin("power", {"k": 0.0002, "q": 2.0}),
                        10.0, 0.2) == pytest.approx(0.01, rel=1e-12)


@given(beta0=st.floats(min_value=1e-4, max_value=10.0),
       lam=st.floats(min_value=0.5, max_value=100.0),
       mu=st.floats(min_value=0.01, max_value=2.0))
@settings(max_examples=50, deadline=None)
def test_compute_beta_bilinear_self_consistent(beta0, lam, mu):
    # df/dI at (S0, 0) is beta0*S0, so (mu/Lambda)*beta0*S0 == beta0.
    f = make_builtin("bilinear", {"beta": beta0})
    assert compute_beta(f, lam, mu) == pytest.approx(beta0, rel=1e-12)


def test_compute_beta_extrapolation_path():
    # No partials: force the Richardson route and compare against the
    # analytic value of the same functional form.
    f = from_callables(lambda S, I: 0.0008 * I * S ** 2)
    assert compute_beta(f, 10.0, 0.2) == pytest.approx(0.04, rel=1e-6)


def test_compute_beta_ruan_violates_h3():
    f = make_builtin("ruan", {"beta": 0.5, "rho": 1.0})
    with pytest.raises(HypothesisViolationError):
        compute_beta(f, 10.0, 0.2)


def test_compute_beta_nonconvergent_limit():
    # f/I oscillates as I -> 0+, so the extrapolants cannot settle.
    f = from_callables(lambda S, I: I * (1.0 + 0.5 * np.sin(1.0 / (I + 1e-30))) * S)
    with pytest.raises((LimitConvergenceError, HypothesisViolationError)):
        compute_beta(f, 10.0, 0.2)


def test_small_i_limit_flags():
    f = make_builtin("saturated_in_I", {"beta": 0.1, "a": 2.0})
    limit, converged = small_i_limit(f.eval_f, 30.0)
    assert converged
    assert limit == pytest.approx(0.1 * 30.0, rel=1e-9)


def test_derived_f1_matches_ratio_and_limit():
    f = from_callables(lambda S, I: 0.0008 * I * S ** 2)
    assert f.eval_f1(10.0, 2.0) == pytest.approx(0.0008 * 100.0, rel=1e-12)
    assert f.eval_f1(10.0, 0.0) == pytest.approx(0.08, rel=1e-6)


def test_incidence_bound_power_tight_at_s0():
    passed, slack = check_incidence_bound(
        make_builtin("power", {"k": 0.0008, "q": 2.0}), 10.0, 0.2)
    assert passed
    # f1 does not depend on I, so the bound is attained along S = S0.
    assert abs(slack) <= 1e-12


def test_incidence_bound_saturated_passes():
    passed, slack = check_incidence_bound(
        make_builtin("saturated_in_I", {"beta": 0.1, "a": 2.0}), 10.0, 0.2)
    assert passed
    assert slack >= -1e-12


@pytest.mark.parametrize("family", HYPOTHESIS_FAMILIES)
def test_incidence_bound_all_passing_families(family):
    passed, slack = check_incidence_bound(
        make_builtin(family, FAMILY_INSTANCES[family]), 10.0, 0.2, grid_n=100)
    assert passed, f"{family}: min slack {slack}"
