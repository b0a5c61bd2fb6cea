"""Both sides of the Euler-Lagrange equation at g_star, tested against
Penrose transforms of zonal harmonics, each by at least two routes."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.special import betaln, gammaln

from . import penrose
from .cone_core import ExponentConfig, ab_coefficients, c_d
from .quadrature import DEFAULT, QuadratureConfig, gauss_legendre
from .specfun import (DomainError, bessel_j, chebyshev_t, gegenbauer, gegenbauer_all,
                      gegenbauer_at_one, homogeneous_H,
                      jacobi_rule, rodrigues_R, sphere_area)


class ConventionError(RuntimeError):
    """lhs_quadrature / lhs_closed is not a positive k-independent constant."""


class CalibrationUnavailable(ValueError):
    """Too few degrees with a nonvanishing closed form (gamma_p = 0)."""


def _sign(x: float, tol: float = 0.0) -> int:
    if abs(x) <= tol:
        return 0
    return 1 if x > 0 else -1


# Left-hand side

def lhs_quadrature_many(exp: ExponentConfig, ks, cfg: QuadratureConfig = DEFAULT) -> np.ndarray:
    """(|S^{d-1}|/2) int_{-pi}^{pi} cos(kT) int C_k^nu(s) |cos T + s|^gamma (1-s^2)^{(d-2)/2} ds dT."""
    ks = [int(k) for k in ks]
    T, s, w, _ = penrose.cylinder_rule(exp.gamma, exp.d)
    C = gegenbauer_all(exp.nu, max(ks), s)
    area = sphere_area(exp.d)
    # the T-integrand is even, so int_{-pi}^{pi} = 2 int_0^pi
    return np.array([area * float(np.dot(w, np.cos(k * T) * C[k])) for k in ks])


def lhs_quadrature(exp: ExponentConfig, k: int, cfg: QuadratureConfig = DEFAULT) -> float:
    if k < 0:
        raise DomainError("k must be nonnegative")
    return float(lhs_quadrature_many(exp, [k], cfg)[0])


def lhs_scale_many(exp: ExponentConfig, ks) -> np.ndarray:
    """Magnitude used for 'zero within tolerance' statements about the LHS:
    the same integral with the oscillating factors replaced by their absolute values."""
    ks = [int(k) for k in ks]
    T, s, w, _ = penrose.cylinder_rule(exp.gamma, exp.d)
    C = np.abs(gegenbauer_all(exp.nu, max(ks), s))
    aw = np.abs(w)
    return np.array([sphere_area(exp.d) * float(np.dot(aw, C[k])) for k in ks])


def lhs_scale(exp: ExponentConfig, k: int) -> float:
    return float(lhs_scale_many(exp, [k])[0])


def watson_closed_form(mu: float, nu2: float, lam: float) -> float:
    """int_0^inf J_mu J_nu2 t^{-lam} dt in closed form (log-Gamma)."""
    if not (mu + nu2 + 1 > lam > 0):
        raise DomainError("Watson integral needs mu + nu + 1 > lambda > 0")
    lg = math.lgamma
    return math.exp(lg(lam) - lam * math.log(2) + lg((mu + nu2 - lam + 1) / 2)
                    - lg((lam + mu + nu2 + 1) / 2) - lg((lam + nu2 - mu + 1) / 2)
                    - lg((lam + mu - nu2 + 1) / 2))


def _pochhammer(x, k: int):
    out = Fraction(1) if isinstance(x, Fraction) else 1.0
    for j in range(k):
        out *= x + j
    return out


def lhs_closed(exp: ExponentConfig, k: int) -> float:
    """(-1)^k H_gamma Gamma(k+2nu)/k! W(k, nu+k, 1+gamma+nu).

    H_gamma carries 1/Gamma(-gamma/2) and W carries Gamma(k - gamma/2); their
    product is the polynomial (-gamma/2)_k times Gamma((gamma+1)/2) and the
    remaining positive factors. Evaluating it that way reproduces the formula
    inside the Watson strip (gamma < 2k) and continues it analytically beyond.
    It is exactly zero when gamma is an even integer in [0, 2k-2].
    """
    if k < 0:
        raise DomainError("k must be nonnegative")
    g = exp.gamma_p
    poch = _pochhammer(-g / 2, k)
    if poch == 0:
        return 0.0
    gf, nu = float(g), exp.nu
    lam = 1 + gf + nu
    lg = math.lgamma
    log_mag = ((gf + 1) / 2 * math.log(2) - gf / 2 * math.log(math.pi) + lg((gf + 1) / 2)
               + math.log(abs(float(poch))) + lg(k + 2 * nu) - lg(k + 1)
               + lg(lam) - lam * math.log(2)
               - lg(1 + gf / 2 + nu + k) - lg(1 + gf / 2 + nu) - lg(1 + gf / 2))
    sign = (-1) ** k * (1 if poch > 0 else -1)
    return sign * math.exp(log_mag)


def lhs_closed_literal(exp: ExponentConfig, k: int) -> float:
    """The same quantity assembled literally from homogeneous_H and watson_closed_form
    (inside the strip only)."""
    lam = 1 + exp.gamma + exp.nu
    H = homogeneous_H(exp.gamma_p)
    if H == 0:
        return 0.0
    return ((-1) ** k * H * math.exp(math.lgamma(k + 2 * exp.nu) - math.lgamma(k + 1))
            * watson_closed_form(k, exp.nu + k, lam))


def lhs_calibration_predicted(exp: ExponentConfig) -> float:
    """Analytic value of lhs_quadrature / lhs_closed under the convention
    hat h(tau) = int h(t) e^{-i t tau} dt used throughout this package."""
    nu = exp.nu
    return ((2 * math.pi) ** ((exp.gamma + 1) / 2) * sphere_area(exp.d) * 2 ** nu
            * math.sqrt(math.pi) * math.gamma(nu + 0.5) / math.gamma(2 * nu))


@dataclass(frozen=True)
class Calibration:
    constant: float
    ks: tuple
    ratios: tuple
    spread: float


def calibrate_lhs_constant(exp: ExponentConfig, cfg: QuadratureConfig = DEFAULT,
                           rel_tol: float = 1e-5, noise_rel: float = 1e-8) -> Calibration:
    """c = lhs_quadrature / lhs_closed at the first three k >= 2 where L is above its
    noise floor (falling back to k >= 0); must be positive and k-independent."""
    ks = list(range(0, 25))
    quad_all = lhs_quadrature_many(exp, ks, cfg)
    scales = lhs_scale_many(exp, ks)
    # a float p next to an even gamma leaves closed forms that are nonzero only at roundoff
    usable = {k: float(q) for k, q, sc in zip(ks, quad_all, scales)
              if lhs_closed(exp, k) != 0 and abs(q) > noise_rel * sc}
    candidates = [k for k in usable if k >= 2][:3]
    if len(candidates) < 3:
        candidates = list(usable)[:3]
    if len(candidates) < 2:
        raise CalibrationUnavailable("fewer than two degrees with a nonvanishing closed form")
    quad = [usable[k] for k in candidates]
    ratios = tuple(float(q / lhs_closed(exp, k)) for q, k in zip(quad, candidates))
    c0 = ratios[0]
    spread = max(abs(r / c0 - 1) for r in ratios)
    if c0 <= 0 or spread > rel_tol:
        raise ConventionError(f"calibration ratios {ratios} are not a positive constant")
    return Calibration(constant=c0, ks=tuple(candidates), ratios=ratios, spread=spread)


# Fourier transforms of Gegenbauer-weighted functions

def hk_fourier_transform(alpha: float, k: int, tau: float) -> complex:
    """Closed form of int h_k^alpha(t) e^{-i t tau} dt, with h_k^alpha = C_k^alpha (1-t^2)^{alpha-1/2}
    (alpha != 0) or T_k (1-t^2)^{-1/2} (alpha = 0)."""
    if not alpha > -0.5:
        raise DomainError("alpha must exceed -1/2")
    if tau == 0:
        if k > 0:
            return 0j
        return complex(math.exp(math.lgamma(0.5) + math.lgamma(alpha + 0.5) - math.lgamma(alpha + 1)))
    order = alpha + k
    x = abs(tau)
    mag = (2 ** order * math.gamma(order + 0.5) * math.sqrt(math.pi) * rodrigues_R(alpha, k)
           * bessel_j(order, x) / x ** order)
    return complex(mag * (-1j * tau) ** k)


def hk_fourier_quadrature(alpha: float, k: int, tau: float, n: int = 96) -> complex:
    """Direct Gauss-Jacobi quadrature of the same transform."""
    t, w = jacobi_rule(n, alpha - 0.5, alpha - 0.5)
    poly = chebyshev_t(k, t) if alpha == 0 else gegenbauer(alpha, k, t)
    return complex(np.dot(w, poly * np.exp(-1j * t * tau)))


# Right-hand side

def _rhs_prefactor(exp: ExponentConfig, k: int) -> float:
    return (k + exp.nu) * sphere_area(exp.d)


def _kernel_order(exp: ExponentConfig, k: int, cfg: QuadratureConfig) -> int:
    # Gauss rules converge like rho^{-2n}, rho the Bernstein radius of the pole at -b/a
    a, b = ab_coefficients(exp.p)
    if a == 0:
        return max(cfg.gauss_jacobi_order, k + 8)
    x = abs(b / a)
    rho = x + math.sqrt(x * x - 1)
    return max(cfg.gauss_jacobi_order, k + 24 + int(math.ceil(20.0 / math.log(rho))))


def rhs_quadrature(exp: ExponentConfig, k: int, cfg: QuadratureConfig = DEFAULT) -> float:
    """(k+nu)|S^{d-1}| int (2(p-1)^2/(a_p s + b_p))^{(d-1)/2} C_k^nu(s) (1-s^2)^{(d-2)/2} ds."""
    a, b = ab_coefficients(exp.p)
    m = (exp.pf - 1) ** 2
    beta = (exp.d - 2) / 2
    n = _kernel_order(exp, k, cfg)
    s, w = jacobi_rule(n, beta, beta)
    kern = (2 * m / (a * s + b)) ** exp.nu
    return _rhs_prefactor(exp, k) * float(np.dot(w, kern * gegenbauer(exp.nu, k, s)))


def rhs_scale(exp: ExponentConfig, k: int) -> float:
    a, b = ab_coefficients(exp.p)
    m = (exp.pf - 1) ** 2
    beta = (exp.d - 2) / 2
    s, w = jacobi_rule(_kernel_order(exp, k, DEFAULT), beta, beta)
    kern = (2 * m / (a * s + b)) ** exp.nu
    return _rhs_prefactor(exp, k) * float(np.dot(w, np.abs(kern * gegenbauer(exp.nu, k, s))))


def _rodrigues_prefactor(exp: ExponentConfig, k: int) -> float:
    d = exp.d
    m = (exp.pf - 1) ** 2
    return (_rhs_prefactor(exp, k) * gegenbauer_at_one(exp.nu, k) * 2.0 ** (-k)
            * math.exp(math.lgamma(d / 2) - math.lgamma(k + d / 2)) * (2 * m) ** exp.nu)


def rhs_rodrigues(exp: ExponentConfig, k: int, cfg: QuadratureConfig = DEFAULT) -> float:
    """RHS via the Rodrigues formula: the k-th derivative of (a t + b)^{-nu} is
    (-1)^k (nu)_k a^k (a t + b)^{-nu-k}, integrated against (1-t^2)^{k+(d-2)/2}."""
    a, b = ab_coefficients(exp.p)
    if a == 0:
        return 0.0 if k > 0 else rhs_quadrature(exp, k, cfg)
    nu = exp.nu
    beta = (exp.d - 2) / 2
    n = _kernel_order(exp, k, cfg)
    t, w = jacobi_rule(n, k + beta, k + beta)
    rising = math.exp(math.lgamma(nu + k) - math.lgamma(nu))
    deriv = (-1) ** k * rising * a ** k * (a * t + b) ** (-nu - k)
    return _rodrigues_prefactor(exp, k) * float(np.dot(w, deriv))


@dataclass(frozen=True)
class SeriesCertificate:
    expected_sign: int
    signs_ok: bool
    n_terms: int
    partial_sum: float
    tail_bound: float
    inconclusive: bool
    matches_quadrature: Optional[bool]


def rhs_series_signs(exp: ExponentConfig, k: int, terms: int = 30,
                     cfg: QuadratureConfig = DEFAULT, rel_tol: float = 1e-6) -> SeriesCertificate:
    """Binomial expansion of the Rodrigues integrand: only m - k even contributes,
    and every retained term must carry sign +1 (p < 2) or (-1)^k (p > 2)."""
    a, b = ab_coefficients(exp.p)
    if a == 0:
        raise DomainError("the series certificate needs p != 2")
    if terms < 1:
        raise ValueError("terms must be positive")
    nu = exp.nu
    beta = (exp.d - 2) / 2
    r = a / b
    expected = 1 if a < 0 else (-1) ** k
    j = 2 * np.arange(terms, dtype=float)
    m = k + j
    # binom(-nu, m) m!/(m-k)! = (-1)^m (nu)_m / (m-k)!, times B((j+1)/2, k+beta+1)
    log_mag = (gammaln(nu + m) - gammaln(nu) - gammaln(j + 1)
               + betaln((j + 1) / 2, k + beta + 1) + m * math.log(abs(r)))
    sign = (-1.0) ** (k % 2) if r > 0 else 1.0  # (-1)^m sign(r)^m with m = k mod 2
    vals = sign * np.exp(log_mag) * _rodrigues_prefactor(exp, k) * b ** (-nu)
    live = vals[vals != 0]  # far terms may underflow
    signs_ok = bool(live.size and np.all(np.sign(live) == expected))
    # successive-term ratio beyond the last retained term
    mj, jj = m[-1], j[-1]
    growth = (nu + mj) * (nu + mj + 1) / ((jj + 1) * (jj + 2))
    ratio = r * r * max(growth, 1.0)
    tail = abs(vals[-1]) * ratio / (1 - ratio) if ratio < 1 else math.inf
    partial = math.fsum(vals)
    inconclusive = not tail <= rel_tol * abs(partial)
    match = None
    if not inconclusive:
        quad = rhs_quadrature(exp, k, cfg)
        match = bool(abs(partial - quad) <= rel_tol * abs(quad) + tail)
    return SeriesCertificate(expected_sign=expected, signs_ok=signs_ok, n_terms=terms,
                             partial_sum=partial, tail_bound=float(tail),
                             inconclusive=inconclusive, matches_quadrature=match)


def rhs_exact(exp: ExponentConfig, k: int, cfg: QuadratureConfig = DEFAULT,
              route: str = "laplace") -> float:
    """Full-constant RHS: Re int |ghat*|^{p-2} conj(ghat*) ghat_k |xi|^{p-1} dxi.

    With ghat* = C_d |xi|^{-1} e^{-|xi|} this is C_d^{p-1} |S^{d-1}| int_0^inf
    e^{-(p-1) rho} rho^{d-2} F_k(rho) d rho, where F_k = |xi| ghat_k is the
    radial Fourier transform of D g_k in closed form.

    route="laplace" integrates e^{-a rho} against the sine (d=3) or J_0 (d=2)
    kernel first, leaving 4 pi int h r^2/(a^2+r^2) dr or 2 pi int h r/sqrt(a^2+r^2) dr.
    route="hankel" computes F_k(rho) numerically and integrates in rho.
    """
    d = exp.d
    if d not in (2, 3):
        raise DomainError("rhs_exact is available for d in {2, 3}")
    a = exp.pf - 1
    pref = c_d(d) ** (exp.pf - 1) * sphere_area(d)
    h = lambda r: penrose.dg_k_closed(d, k, r)
    if route == "laplace":
        if d == 3:
            kern = lambda r: 4 * math.pi * h(r) * r * r / (a * a + r * r)
        else:
            kern = lambda r: 2 * math.pi * h(r) * r / np.sqrt(a * a + r * r)
        f = lambda th: kern(np.tan(th)) / np.cos(th) ** 2
        val = gauss_legendre(f, 0.0, math.pi / 2 * (1 - 1e-12), cfg)
    elif route == "hankel":
        x, w = jacobi_rule(64, 0.0, 0.0)
        top = (40.0 + 2 * k) / a
        edges = np.geomspace(1e-6, top, 13)
        edges = np.concatenate([[0.0], edges])
        val = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            rho = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x
            F = np.array([penrose._radial_ft(h, d, float(r), cfg) for r in rho])
            val += 0.5 * (hi - lo) * float(np.dot(w, np.exp(-a * rho) * rho ** (d - 2) * F))
    else:
        raise ValueError(f"unknown route {route!r}")
    return pref * val


def rhs_exact_ratio_predicted(exp: ExponentConfig) -> float:
    """Plancherel prediction of rhs_exact / rhs_quadrature: C_d^{p-2} (2 pi)^d (p-1)^{1-d}."""
    d = exp.d
    return c_d(d) ** (exp.pf - 2) * (2 * math.pi) ** d * (exp.pf - 1) ** (1 - d)


# Norms and the multiplier

def half_wave_norm_q(exp: ExponentConfig, cfg: QuadratureConfig = DEFAULT) -> float:
    """||e^{itD} g_star||_q^q = (|S^{d-1}|/2) int int |cos T + s|^gamma (1-s^2)^{(d-2)/2} ds dT."""
    if not exp.gamma > -1:
        raise DomainError("gamma_p must exceed -1")
    if exp.gamma < -0.95:
        warnings.warn(f"gamma_p = {exp.gamma:.4f} is close to -1; the q-norm blows up like "
                      "1/(gamma_p + 1) at the endpoint of the range", RuntimeWarning)
    return lhs_quadrature(exp, 0, cfg)


def fstar_input_norm_p(exp: ExponentConfig) -> float:
    """||ghat_star||_{L^p(|xi|^{p-1} dxi)} = [C_d^p |S^{d-1}| Gamma(d-1) p^{1-d}]^{1/p}."""
    p, d = exp.pf, exp.d
    return (c_d(d) ** p * sphere_area(d) * math.gamma(d - 1) * p ** (1 - d)) ** (1 / p)


def fstar_input_norm_p_quadrature(exp: ExponentConfig, cfg: QuadratureConfig = DEFAULT) -> float:
    """Same norm by radial quadrature of C_d^p rho^{d-2} e^{-p rho}."""
    p, d = exp.pf, exp.d
    f = lambda th: np.tan(th) ** (d - 2) * np.exp(-p * np.tan(th)) / np.cos(th) ** 2
    val = gauss_legendre(f, 0.0, math.pi / 2 * (1 - 1e-12), cfg)
    return (c_d(d) ** p * sphere_area(d) * val) ** (1 / p)


def lambda_multiplier(exp: ExponentConfig, cfg: QuadratureConfig = DEFAULT) -> float:
    """lambda_{p,q} = ||e^{itD} g_star||_q^q / ||ghat_star||_p^q."""
    return half_wave_norm_q(exp, cfg) / fstar_input_norm_p(exp) ** float(exp.q)


def el_multiplier(exp: ExponentConfig, cfg: QuadratureConfig = DEFAULT) -> float:
    """The factor multiplying the RHS integral in the first variation:
    lambda_{p,q} ||ghat_star||_p^{q-p} = ||e^{itD} g_star||_q^q / ||ghat_star||_p^p."""
    return half_wave_norm_q(exp, cfg) / fstar_input_norm_p(exp) ** exp.pf


# Reports

@dataclass
class ELReport:
    exponents: ExponentConfig
    k: int
    lhs_quad: float
    lhs_closed: float
    lhs_calibration: float
    rhs_quad: float
    rhs_rodrigues: float
    rhs_exact: Optional[float] = None
    lambda_exact: Optional[float] = None
    sign_lhs: int = 0
    sign_rhs: int = 0
    ratio_abs: float = math.nan

    def as_row(self) -> dict:
        out = asdict(self)
        out.pop("exponents")
        return out


def el_report(exp: ExponentConfig, k: int, cfg: QuadratureConfig = DEFAULT,
              calibration: Optional[float] = None, with_exact: bool = False,
              zero_rel: float = 1e-9) -> ELReport:
    if k < 0:
        raise DomainError("k must be nonnegative")
    lq = lhs_quadrature(exp, k, cfg)
    lc = lhs_closed(exp, k)
    if calibration is None:
        calibration = lhs_calibration_predicted(exp)
    rq = rhs_quadrature(exp, k, cfg)
    rr = rhs_rodrigues(exp, k, cfg)
    sl = _sign(lq, zero_rel * lhs_scale(exp, k))
    sr = _sign(rq, zero_rel * rhs_scale(exp, k))
    rep = ELReport(exponents=exp, k=k, lhs_quad=lq, lhs_closed=lc, lhs_calibration=calibration,
                   rhs_quad=rq, rhs_rodrigues=rr, sign_lhs=sl, sign_rhs=sr,
                   ratio_abs=abs(rq / lq) if sl != 0 else math.inf)
    if with_exact and exp.d in (2, 3):
        rep.rhs_exact = rhs_exact(exp, k, cfg)
        rep.lambda_exact = el_multiplier(exp, cfg)
    return rep
