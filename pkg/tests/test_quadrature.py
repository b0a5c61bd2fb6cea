import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conewave.euler_lagrange import watson_closed_form
from conewave.quadrature import (QuadratureConfig, bessel_product_integral,
                                 euler_transform, gauss_jacobi, gauss_legendre, singular_split,
                                 watson_strip_ok)
from conewave.specfun import DomainError


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(abs_tol=0)
    with pytest.raises(ValueError):
        QuadratureConfig(gauss_legendre_order=2)


@pytest.mark.parametrize("f, a, b, want", [
    (lambda t: np.cos(3 * t), 0.0, math.pi, 0.0),
    (lambda t: t * t, -1.0, 1.0, 2 / 3),
    (lambda t: np.cos(7 * t) ** 2, 0.0, 2 * math.pi, math.pi),
])
def test_gauss_legendre_examples(f, a, b, want):
    assert gauss_legendre(f, a, b) == pytest.approx(want, abs=1e-13)


@pytest.mark.parametrize("a, b, want", [(0, 0, 2.0), (-0.5, -0.5, math.pi), (0.5, 0.5, math.pi / 2)])
def test_gauss_jacobi_examples(a, b, want):
    assert gauss_jacobi(lambda t: np.ones_like(t), a, b) == pytest.approx(want, rel=1e-14)


def test_gauss_jacobi_rejects_bad_exponent():
    with pytest.raises(DomainError):
        gauss_jacobi(lambda t: t, -1.0, 0.0)


def test_singular_split_examples():
    one = lambda s: np.ones_like(s)
    assert singular_split(one, -0.5, 0.0) == pytest.approx(4.0, rel=1e-13)
    assert singular_split(lambda s: s, -0.5, 0.0) == pytest.approx(0.0, abs=1e-13)
    want = 2 * math.sqrt(1.5) + 2 * math.sqrt(0.5)
    assert singular_split(one, -0.5, 0.5) == pytest.approx(want, rel=1e-13)


def _mp_singular(gamma, s0):
    # u = |s - s0|^{gamma+1} removes the interior singularity on each side
    F = lambda s: (mpmath.cos(2 * s) + s ** 3) * mpmath.sqrt(max(1 - s * s, 0))
    e = 1 / mpmath.mpf(gamma + 1)
    right = mpmath.quad(lambda u: F(s0 + u ** e), [0, (1 - s0) ** (gamma + 1)])
    left = mpmath.quad(lambda u: F(s0 - u ** e), [0, (1 + s0) ** (gamma + 1)])
    return float((left + right) * e)


@settings(max_examples=15, deadline=None)
@given(gamma=st.floats(-0.9, 2.5), s0=st.floats(-0.95, 0.95))
def test_singular_split_against_mpmath(gamma, s0):
    f = lambda s: np.cos(2 * s) + s ** 3
    got = singular_split(f, gamma, s0, a_exp=0.5, b_exp=0.5)
    want = _mp_singular(gamma, s0)
    assert got == pytest.approx(want, rel=1e-9, abs=1e-12)


def test_euler_transform_alternating_series():
    terms = [(-1) ** n / (n + 1) for n in range(30)]
    est, err = euler_transform(terms)
    assert est == pytest.approx(math.log(2), abs=1e-10)
    assert err >= 0


WATSON_TRIPLES = [(1, 1, 1), (2, 2, 1), (1, 2, 2), (0, 0, 0.5), (0.5, 1.5, 1.2), (3, 3, 2.5),
                  (2, 3.5, 1.8), (4, 5.5, 2.3), (1, 1.5, 0.3), (6, 7.5, 4.0), (0, 1, 0.9),
                  (2, 2.5, 0.7), (3, 4, 3.5), (5, 6.5, 1.5), (0.5, 0.5, 1.0), (1, 3, 2.7),
                  (4, 4, 0.2), (2, 2.5, 3.9), (7, 8, 5.0), (3, 3.5, 1.1)]


@pytest.mark.parametrize("mu, nu2, lam", WATSON_TRIPLES)
def test_bessel_product_matches_watson(mu, nu2, lam):
    assert watson_strip_ok(mu, nu2, lam)
    got = bessel_product_integral(mu, nu2, lam)
    assert got == pytest.approx(watson_closed_form(mu, nu2, lam), rel=1e-8)


def test_watson_known_values():
    assert watson_closed_form(1, 1, 1) == pytest.approx(0.5, rel=1e-14)
    assert watson_closed_form(2, 2, 1) == pytest.approx(0.25, rel=1e-14)


def test_bessel_product_mpmath_oracle():
    want = float(mpmath.quadosc(lambda t: mpmath.besselj(1, t) * mpmath.besselj(2, t) / t ** 2,
                                [0, mpmath.inf], omega=1))
    assert bessel_product_integral(1, 2, 2) == pytest.approx(want, rel=1e-6)


def test_out_of_strip_rejected():
    assert not watson_strip_ok(1, 1, 5)
    with pytest.raises(DomainError):
        watson_closed_form(1, 1, 5)
