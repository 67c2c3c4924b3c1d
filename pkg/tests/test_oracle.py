import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _util import NAMED
from lassocompat.designs import DesignSpec, build_gram, sample_spec
from lassocompat.errors import UnsupportedFamily
from lassocompat.oracle import (closed_form, closed_form_family_constants, coefficient_threshold,
                                l1_ball_distance2, sample_beta0)
from lassocompat.solver import ProblemInstance, kkt_residual, noiseless_objective, solve_noiseless


@pytest.mark.parametrize("family", NAMED)
def test_oracle_matches_solver(family):
    rng = np.random.default_rng(NAMED.index(family))
    for _ in range(6):
        spec = sample_spec(family, rng)
        lam = float(rng.uniform(0.005, 0.2))
        beta0 = sample_beta0(spec, lam, rng)
        orc = closed_form(spec, beta0, lam)
        assert orc.applicable, orc.applicability_reason
        G = build_gram(spec)
        assert kkt_residual(G, beta0, lam, orc.beta_star) < 1e-10
        sol = solve_noiseless(ProblemInstance(G, beta0, lam))
        if orc.metadata.get("nonunique"):
            obj = noiseless_objective(G, beta0, lam, orc.beta_star)
            assert obj == pytest.approx(sol.objective, abs=1e-10)
        else:
            np.testing.assert_allclose(sol.beta_star, orc.beta_star, atol=1e-7)
            assert sol.penalized_value == pytest.approx(orc.penalized_error, abs=1e-9)
        assert sol.prediction_error == pytest.approx(orc.prediction_error, abs=1e-9)


@pytest.mark.parametrize("beta0, lam, case, beta", [
    ([1.0, 1.0], 0.1, "Case1", [0.8, 0.8]),
    ([1.0, 0.1], 0.1, "Case2", [0.85, 0.0]),
    ([0.1, 0.1], 0.2, "Case3", [0.0, 0.0]),
    ([0.1, 1.0], 0.1, "Case2", [0.0, 0.85]),
])
def test_two_variable_cases(beta0, lam, case, beta):
    orc = closed_form(DesignSpec("TwoVar", {"rho": 0.5}), beta0, lam)
    assert orc.case_id == case
    np.testing.assert_allclose(orc.beta_star, beta, atol=1e-15)


def test_parent_child_child_coefficient():
    # inactive coefficient lam (C - 1) / tau2 with tau2 = 1 - C^2 phi2 / 2
    orc = closed_form(DesignSpec("ParentChildSingle", {"rho": 0.75, "C": 2.0}), [1.0, 0.8, 0.0], 0.1)
    np.testing.assert_allclose(orc.beta_star, [0.4, 0.2, 0.2], atol=1e-14)
    assert orc.penalized_error == pytest.approx(0.14, abs=1e-14)


def test_good_lasso2_records_stated_values():
    orc = closed_form(DesignSpec("GoodLasso2", {"rho": 0.6, "C": 2.0}), [1.0, 0.5, 0.0, 0.0], 0.1)
    np.testing.assert_allclose(orc.beta_star, [0.4375, 0.0, 0.203125, 0.203125], atol=1e-14)
    assert orc.prediction_error == pytest.approx(0.015625, abs=1e-14)
    assert orc.penalized_error == pytest.approx(0.096875, abs=1e-14)
    assert orc.metadata["stated_prediction_error"] == pytest.approx(0.05, abs=1e-15)
    assert orc.metadata["stated_penalized_error"] == pytest.approx(0.1, abs=1e-15)


def test_good_lasso3_interval():
    orc = closed_form(DesignSpec("GoodLasso3", {"rho": 0.5}), [1.0, 1.0, 0.0, 0.0], 0.1)
    assert orc.metadata["nonunique"]
    assert tuple(orc.metadata["beta3_interval"]) == pytest.approx((0.0, 0.8))


def test_not_applicable_cases():
    spec = DesignSpec("GoodComp", {"rho": 0.6, "C": 2, "tau2": 0.1})
    assert not closed_form(spec, [1.0, 0.01, 0.0, 0.0], 0.05).applicable
    assert not closed_form(spec, [1.0, 1.0, 0.3, 0.0], 0.05).applicable
    assert not closed_form(spec, [1.0, 1.0, 0.0, 0.0], 0.0).applicable
    with pytest.raises(UnsupportedFamily):
        closed_form_family_constants(DesignSpec("Custom", {"matrix": np.eye(2)}))


@pytest.mark.parametrize("family", NAMED)
def test_threshold_is_positive(family):
    spec = sample_spec(family, np.random.default_rng(0))
    assert np.all(np.asarray(coefficient_threshold(spec, 0.1)) > 0)


def _ball_distance_by_sorting(v, r):
    a = np.abs(v)
    if a.sum() <= r:
        return 0.0
    u = np.sort(a)[::-1]
    css = np.cumsum(u) - r
    k = np.flatnonzero(u - css / np.arange(1, u.size + 1) > 0)[-1]
    t = css[k] / (k + 1)
    return float(np.sum((a - np.maximum(a - t, 0)) ** 2))


@settings(max_examples=60, deadline=None)
@given(v=st.lists(st.floats(-3, 3), min_size=1, max_size=8), r=st.floats(0.1, 2.0))
def test_l1_ball_distance(v, r):
    v = np.array(v)
    assert l1_ball_distance2(v, r) == pytest.approx(_ball_distance_by_sorting(v, r), abs=1e-12)
