import json
import math

import numpy as np
import pytest

from conewave import euler_lagrange as el
from conewave import verdict as vd
from conewave.cone_core import ab_coefficients, make_exponents


def E(d, p):
    return make_exponents(d, p)


@pytest.mark.parametrize("d, p, gamma, k", [(3, "3/2", 2, 3), (2, "3/2", 1.5, 2), (4, "6/5", 10, 7)])
def test_subcritical_witness_examples(d, p, gamma, k):
    exp = E(d, p)
    assert float(exp.gamma_p) == pytest.approx(gamma)
    assert vd.subcritical_witness(exp) == k


def test_subcritical_witness_rejects_supercritical():
    with pytest.raises(ValueError):
        vd.subcritical_witness(E(3, 2.5))


@pytest.mark.parametrize("d, p", [(3, 2.5), (2, 3.0), (3, 2.2), (2, 2.2)])
def test_ratio_trace_decays(d, p):
    tr = vd.supercritical_ratio_trace(E(d, p), k_max=20)
    assert tr.nonzero_ok and tr.slope <= math.log(2 / 3) + 0.05
    assert tr.drop_k is not None and tr.drop_k <= 40


@pytest.mark.parametrize("d, p", [(3, 2.5), (2, 3.0), (2, 2.2)])
def test_lhs_tracks_gamma_display(d, p):
    exp = E(d, p)
    ks = list(range(2, 21))
    L = el.lhs_quadrature_many(exp, ks)
    c = [abs(x) / vd.gamma_ratio_display(exp, k) for x, k in zip(L, ks)]
    assert max(abs(x / c[0] - 1) for x in c) <= 1e-5


def test_trace_rejects_subcritical():
    with pytest.raises(ValueError):
        vd.supercritical_ratio_trace(E(3, 1.5))


def test_wang_radius_example():
    rep = vd.wang_bound_check(E(3, 2.5))
    assert rep.radius == pytest.approx(13 / 5)
    assert rep.ok and rep.slope <= math.log(2 / 3) + 0.05


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_radius_infimum_over_grid(d):
    end = 2 * d / (d - 1)
    for p in np.linspace(2.01, end - 1e-6, 25):
        a, b = ab_coefficients(p)
        assert abs(b / a) > 1.25 * (1 - 1e-9)


def test_kernel_coefficients_two_routes():
    exp = E(3, 2.5)
    ks = range(2, 9)
    np.testing.assert_allclose(vd.kernel_coefficients(exp, ks), vd.kernel_coefficients(exp, ks, route="quadrature"),
                               rtol=1e-8)


def test_gegenbauer_norm_matches_quadrature():
    from conewave.specfun import gegenbauer_all, jacobi_rule
    nu = 1.5
    t, w = jacobi_rule(40, nu - 0.5, nu - 0.5)
    rows = gegenbauer_all(nu, 6, t)
    for k in range(7):
        assert np.dot(w, rows[k] ** 2) == pytest.approx(vd.gegenbauer_norm_sq(nu, k), rel=1e-12)


# decide

def test_decide_critical():
    v = vd.decide(E(3, "2"))
    assert isinstance(v.outcome, vd.CriticalPoint) and v.certified
    assert v.outcome.max_rel_L <= 1e-8 and v.outcome.max_rel_R <= 1e-8
    assert v.witness_k is None


def test_decide_float_two_is_critical():
    assert isinstance(vd.decide(E(3, 2.0 + 1e-13)).outcome, vd.CriticalPoint)


def test_decide_subcritical_example():
    v = vd.decide(E(2, "3/2"))
    out = v.outcome
    assert isinstance(out, vd.FailsBySign) and out.k == 2
    assert out.L < 0 < out.R and out.lam > 0 and not out.boundary
    assert out.L_closed == pytest.approx(out.L, rel=1e-8)


def test_decide_boundary_is_still_a_failure():
    out = vd.decide(E(3, "3/2")).outcome
    assert isinstance(out, vd.FailsBySign) and out.boundary and out.k == 3 and out.R > 0


def test_decide_supercritical_example():
    out = vd.decide(E(3, 2.5)).outcome
    assert isinstance(out, vd.FailsByDecay) and out.constant_exact
    assert out.wired_rhs < 0.5 * out.wired_lhs
    assert out.slope <= vd.DECAY_SLOPE


def test_decide_d4_supercritical_is_evidence_based():
    out = vd.decide(E(4, 2.2)).outcome
    assert isinstance(out, vd.FailsByDecay) and not out.constant_exact


def test_branches_do_not_cross():
    # p > 2: R and L share the sign pattern (-1)^k, so there is no sign mismatch to exploit
    exp = E(3, 2.5)
    for k in range(2, 7):
        L, R = el.lhs_quadrature(exp, k), el.rhs_rodrigues(exp, k)
        assert np.sign(L) == np.sign(R) == (-1) ** k
    # p < 2: the trace refuses to run
    with pytest.raises(ValueError):
        vd.supercritical_ratio_trace(E(3, 1.5))


def test_verdict_json_schema():
    v = vd.decide(E(2, "3/2"), p_text="3/2")
    d = v.to_dict()
    assert set(d) >= {"d", "p", "q", "gamma_p", "outcome", "witness_k", "evidence", "tolerances",
                      "evaluator_versions"}
    assert d["p"] == "3/2" and d["outcome"] == "FailsBySign" and d["witness_k"] == 2
    assert set(d["evidence"]) >= {"L", "R", "lambda", "ratio_trace"}
    json.dumps(d, allow_nan=False)


def test_inconclusive_is_reported_not_raised():
    tol = vd.Tolerances(vanish_rel=1e-30)
    v = vd.decide(E(3, "2"), tol=tol)
    assert isinstance(v.outcome, vd.Inconclusive) and not v.certified
    assert "max_rel_L" in v.outcome.diagnostics
