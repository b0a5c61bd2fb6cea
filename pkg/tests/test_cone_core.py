import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conewave.cone_core import (AdmissibilityError, Boost, Composite, Dilation, FFunctionParams,
                                Phase, SectorialExpansion, Translation, ab_coefficients,
                                apply_symmetry, c_d, c_d_gaussian_superposition,
                                cone_measure_invariance_check, group_law_residuals, gstar_params,
                                inverse, make_exponents, p_from_gamma, parse_p, random_symmetry,
                                symmetry_pointwise_oracle)
from conewave.specfun import DomainError


@pytest.mark.parametrize("d, p, q, gamma, nu", [
    (3, Fraction(2), 4, 0, 1.0),
    (3, Fraction(3, 2), 6, 2, 1.0),
    (2, Fraction(2), 6, 0, 0.5),
])
def test_exponent_examples(d, p, q, gamma, nu):
    e = make_exponents(d, p)
    assert e.q == q and e.gamma_p == gamma and e.nu == nu
    assert e.exact


def test_rational_strings_are_exact():
    assert parse_p("3/2") == Fraction(3, 2)
    e = make_exponents(3, "3/2")
    assert e.gamma_p == 2 and isinstance(e.gamma_p, Fraction)


@pytest.mark.parametrize("d, p", [(3, 1.0), (3, 3.0), (2, 4.5), (1, 1.5), (3, "abc")])
def test_exponent_range_enforced(d, p):
    with pytest.raises(DomainError):
        make_exponents(d, p)


def test_out_of_range_message_explains_integrability():
    with pytest.raises(DomainError, match="not integrable"):
        make_exponents(3, 3.5)


@settings(max_examples=50, deadline=None)
@given(d=st.integers(2, 6), t=st.floats(0.01, 0.99))
def test_gamma_p_round_trip(d, t):
    p = 1 + t * (2 * d / (d - 1) - 1)
    e = make_exponents(d, p)
    assert e.gamma > -1
    assert p_from_gamma(d, e.gamma) == pytest.approx(p, rel=1e-12)


@pytest.mark.parametrize("p, want", [("2", (0.0, 2.0)), ("3/2", (-0.75, 1.25)), ("5/2", (1.25, 3.25))])
def test_ab_coefficients(p, want):
    assert ab_coefficients(p) == pytest.approx(want, abs=0)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_c_d_two_routes(d):
    assert c_d(d) == pytest.approx(c_d_gaussian_superposition(d), rel=1e-10)


def test_admissibility():
    assert gstar_params(3).admissible()
    assert not FFunctionParams(A=-1.0, b=(2.0, 0.0), c=0.0).admissible()
    assert issubclass(AdmissibilityError, RuntimeError)


def test_apply_symmetry_examples():
    f = gstar_params(3)
    same = apply_symmetry(Dilation(1.0), f)
    assert same.A == f.A and same.c == f.c
    tr = apply_symmetry(Translation(1.0, (0.0, 0.0, 0.0)), f)
    assert tr.A == pytest.approx(-1 - 1j) and np.allclose(tr.b_vec, 0)
    ph = apply_symmetry(Phase(math.pi), f)
    assert ph.c == pytest.approx(f.c + 1j * math.pi)


def test_pointwise_oracle_examples():
    f = gstar_params(3)
    xi = np.random.default_rng(1).normal(size=(20, 3))
    assert symmetry_pointwise_oracle(Composite(()), f, xi) == 0.0
    assert symmetry_pointwise_oracle(Composite((Boost((0.3, 0.1, 0)), Boost((-0.3, -0.1, 0)))), f, xi) <= 1e-10
    assert symmetry_pointwise_oracle(Composite((Dilation(2.0), Dilation(0.5))), f, xi) <= 1e-10


@pytest.mark.parametrize("S", [Dilation(1.7), Boost((0.5, -0.2)), SectorialExpansion((0.6, 0.8), 1.9),
                               Translation(0.3, (1.0, -2.0)), Phase(0.4)])
def test_pointwise_oracle_each_generator(S):
    f = apply_symmetry(Boost((0.2, 0.1)), gstar_params(2))
    xi = np.random.default_rng(2).normal(size=(40, 2))
    assert symmetry_pointwise_oracle(S, f, xi, p=1.5) <= 1e-12


def test_group_laws_random_elements():
    rng = np.random.default_rng(7)
    worst = 0.0
    for d in (2, 3):
        for _ in range(100):
            res = group_law_residuals(random_symmetry(rng, d), random_symmetry(rng, d), gstar_params(d))
            worst = max(worst, max(res.values()))
    assert worst <= 1e-10


def test_inverse_of_composite_reverses_order():
    S = Composite((Dilation(2.0), Boost((0.1, 0.0))))
    assert inverse(S).parts == (Boost((-0.1, -0.0)), Dilation(0.5))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 31), d=st.integers(2, 4), length=st.integers(1, 4))
def test_admissibility_closed_under_compositions(seed, d, length):
    rng = np.random.default_rng(seed)
    S = Composite(tuple(random_symmetry(rng, d) for _ in range(length)))
    out = apply_symmetry(S, gstar_params(d))
    assert out.admissible()


@pytest.mark.parametrize("S, d", [(Dilation(0.5), 2), (Dilation(2.0), 3), (Boost((0.3, 0.0)), 2),
                                  (Boost((0.2, -0.3, 0.1)), 3), (Composite(()), 2)])
def test_cone_measure_invariance(S, d):
    assert cone_measure_invariance_check(S, d, "bump_axis", p=2.0) <= 1e-6
