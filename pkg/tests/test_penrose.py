import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conewave import penrose as pz
from conewave.specfun import DomainError


@pytest.mark.parametrize("t, r, T, R", [(0, 0, 0, 0), (0, 1, 0, math.pi / 2), (1, 0, math.pi / 2, 0)])
def test_forward_examples(t, r, T, R):
    pp = pz.penrose_forward(pz.SpacetimePoint(t, r))
    assert (pp.T, pp.R) == pytest.approx((T, R), abs=1e-15)


def test_inverse_examples():
    st_ = pz.penrose_inverse(pz.PenrosePoint(0.0, math.pi / 2))
    assert (st_.t, st_.r) == pytest.approx((0.0, 1.0), abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(t=st.floats(-50, 50), r=st.floats(0, 50))
def test_round_trip_property(t, r):
    pp = pz.penrose_forward(pz.SpacetimePoint(t, r))
    assert pp.in_diamond()
    back = pz.penrose_inverse(pp)
    assert abs(back.t - t) <= 1e-12 * max(1, abs(t)) ** 2 and abs(back.r - r) <= 1e-12 * max(1, r) ** 2


@pytest.mark.parametrize("t, r, want", [(0, 0, 2.0), (0, 1, 1.0), (1, 1, 2 / math.sqrt(5))])
def test_conformal_factor(t, r, want):
    assert pz.conformal_factor(pz.SpacetimePoint(t, r)) == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("test", ["zero", "center_bump", "cos_bump", "shifted_bump"])
def test_pushforward(d, test):
    assert pz.pushforward_check(test, d) <= 1e-6


def test_dsd_examples():
    assert pz.dsd_apply(pz.ZonalFunction.harmonic(3, 0)).coeffs == (1.0,)
    assert pz.dsd_apply(pz.ZonalFunction.harmonic(3, 2)).coeffs[2] == 3.0
    assert pz.dsd_apply(pz.ZonalFunction.harmonic(2, 1)).coeffs[1] == 1.5


def test_halfwave_examples():
    F = pz.ZonalFunction(3, (1.0, 0.3, -0.2))
    assert pz.spherical_halfwave(F, 0.0).coeffs == F.coeffs
    assert pz.spherical_halfwave(pz.ZonalFunction.harmonic(3, 0), math.pi).coeffs[0] == pytest.approx(-1)
    a = pz.spherical_halfwave(pz.spherical_halfwave(F, 0.4), 1.1).coeffs
    b = pz.spherical_halfwave(F, 1.5).coeffs
    assert np.max(np.abs(np.subtract(a, b))) <= 1e-12


def test_penrose_transform_examples():
    r = np.linspace(0, 4, 9)
    for d in (2, 3, 5):
        g = pz.penrose_transform_zonal(pz.ZonalFunction.harmonic(d, 0), r)
        np.testing.assert_allclose(g, (2 / (1 + r * r)) ** ((d - 1) / 2), rtol=1e-14)
    assert pz.penrose_transform_zonal(pz.ZonalFunction.harmonic(3, 0), 0.0) == pytest.approx(2)
    assert pz.penrose_transform_zonal(pz.ZonalFunction.harmonic(3, 2), 1.0) == pytest.approx(-1)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
@pytest.mark.parametrize("ell", range(9))
def test_funk_hecke(d, ell):
    assert pz.funk_hecke_eigenvalue(d, ell) == pytest.approx(1 / (ell + (d - 1) / 2), rel=1e-8)


@pytest.mark.parametrize("d, k", [(3, 0), (3, 2), (3, 5), (2, 0), (2, 2)])
def test_intertwining(d, k):
    assert pz.intertwining_check(d, k) <= 1e-8


def test_dg_closed_example():
    assert pz.dg_k_closed(3, 2, 1.0) == pytest.approx(-3.0)


def test_intertwining_scope():
    with pytest.raises(DomainError):
        pz.intertwining_check(4, 1)


@pytest.mark.parametrize("d", [2, 3])
def test_tangent_space(d):
    res = pz.tangent_space_residuals(d)
    assert max(res.values()) <= 1e-10


@pytest.mark.parametrize("d", [2, 3, 4])
def test_diamond_unfold_constant_at_p2(d):
    diamond, half, res = pz.diamond_unfold_check(pz.ZonalFunction.harmonic(d, 0), d, 0.0)
    from conewave.specfun import sphere_area
    from conewave.quadrature import gauss_jacobi
    s_int = gauss_jacobi(lambda s: np.ones_like(s), (d - 2) / 2, (d - 2) / 2)
    assert half == pytest.approx(0.5 * 2 * math.pi * sphere_area(d) * s_int, rel=1e-12)
    assert res <= 1e-6


def test_diamond_unfold_y2_vanishes_at_p2():
    diamond, half, _ = pz.diamond_unfold_check(pz.ZonalFunction.harmonic(3, 2), 3, 0.0)
    assert abs(diamond) <= 1e-8 and abs(half) <= 1e-8


@pytest.mark.parametrize("gamma", [2.5, 3.0, 3.5, -0.9])
def test_diamond_unfold_y3(gamma):
    _, half, res = pz.diamond_unfold_check(pz.ZonalFunction.harmonic(3, 3), 3, gamma)
    assert res <= 1e-6 * max(1, abs(half))


def test_cylinder_rule_integrates_kernel():
    # int_0^pi int |cos T + s|^g (1-s^2)^{1/2} ds dT against an independent 2-D scipy oracle
    from scipy import integrate
    g = -0.5
    T, s, w, _ = pz.cylinder_rule(g, 3)
    got = float(np.sum(w))
    inner = lambda T: integrate.quad(lambda s: abs(math.cos(T) + s) ** g * math.sqrt(1 - s * s),
                                     -1, 1, points=[-math.cos(T)], limit=200)[0]
    want = integrate.quad(inner, 0, math.pi, limit=200)[0]
    assert got == pytest.approx(want, rel=1e-6)
