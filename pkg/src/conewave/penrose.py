"""Penrose compactification of R^{1+d}, spherical half-wave calculus on zonal
functions, and the numerical content of the intertwining law."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .quadrature import DEFAULT, QuadratureConfig, euler_transform, panel_sums, split_rule
from .specfun import (DomainError, bessel_j, gegenbauer, gegenbauer_all, gegenbauer_at_one,
                      jacobi_rule, legendre_rule, sphere_area)


class ConsistencyError(RuntimeError):
    pass


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    r: float
    omega: tuple = ()

    def __post_init__(self):
        if self.r < 0:
            raise DomainError("radial coordinate must be nonnegative")


@dataclass(frozen=True)
class PenrosePoint:
    T: float
    R: float
    omega: tuple = ()

    def in_diamond(self) -> bool:
        return 0 <= self.R < math.pi - abs(self.T)


def penrose_forward(pt: SpacetimePoint) -> PenrosePoint:
    a, b = math.atan(pt.t + pt.r), math.atan(pt.t - pt.r)
    return PenrosePoint(T=a + b, R=a - b, omega=pt.omega)


def penrose_inverse(pp: PenrosePoint) -> SpacetimePoint:
    if not pp.in_diamond():
        raise DomainError("point is not strictly inside the Penrose diamond (maps to infinity)")
    u = math.tan((pp.T + pp.R) / 2)
    v = math.tan((pp.T - pp.R) / 2)
    return SpacetimePoint(t=(u + v) / 2, r=max((u - v) / 2, 0.0), omega=pp.omega)


def penrose_forward_array(t, r):
    a, b = np.arctan(t + r), np.arctan(t - r)
    return a + b, a - b


def penrose_inverse_array(T, R):
    u, v = np.tan((T + R) / 2), np.tan((T - R) / 2)
    return (u + v) / 2, (u - v) / 2


def conformal_factor(pt) -> float:
    """Omega = 2 / sqrt((1+(t+r)^2)(1+(t-r)^2)) = cos T + cos R, checked both ways."""
    if isinstance(pt, PenrosePoint):
        pp, st = pt, penrose_inverse(pt)
    else:
        st, pp = pt, penrose_forward(pt)
    first = 2 / math.sqrt((1 + (st.t + st.r) ** 2) * (1 + (st.t - st.r) ** 2))
    second = math.cos(pp.T) + math.cos(pp.R)
    if abs(first - second) > 1e-9 * max(1.0, abs(first)):
        raise ConsistencyError(f"conformal factor mismatch {first} vs {second}")
    return first


def _bump2(T, R, cT, cR, w):
    u2 = ((T - cT) ** 2 + (R - cR) ** 2) / w ** 2
    out = np.zeros(np.shape(u2))
    inside = u2 < 1
    out[inside] = np.exp(1 - 1 / (1 - u2[inside]))
    return out


PUSHFORWARD_TESTS = {
    "zero": (lambda T, R: np.zeros(np.shape(T)), (0.0, 1.0, 0.5)),
    "center_bump": (lambda T, R: _bump2(T, R, 0.0, 1.0, 0.6), (0.0, 1.0, 0.6)),
    "cos_bump": (lambda T, R: np.cos(T) * _bump2(T, R, 0.5, 1.2, 0.7), (0.5, 1.2, 0.7)),
    "shifted_bump": (lambda T, R: _bump2(T, R, -0.9, 0.8, 0.5) * (1 + np.sin(R)), (-0.9, 0.8, 0.5)),
}


def pushforward_check(test: str, d: int, cfg: QuadratureConfig = DEFAULT, n: int = 240) -> float:
    """|int phi(P(t,x)) Omega^{d+1} dt dx - int_diamond phi dT dsigma| for a radial phi.

    Both sides carry the same |S^{d-1}| factor, which is dropped. The spacetime
    side is integrated in null coordinates u = t+r, v = t-r over the exact
    preimage of the bump's support box.
    """
    if d not in (2, 3):
        raise DomainError("pushforward check is implemented for d in {2, 3}")
    phi, (cT, cR, w) = PUSHFORWARD_TESTS[test]
    x, wt = legendre_rule(n)

    def grid(lo, hi):
        return 0.5 * (lo + hi) + 0.5 * (hi - lo) * x, 0.5 * (hi - lo) * wt

    # cylinder side: dT sin^{d-1} R dR over the bump box
    T, wT = grid(cT - w, cT + w)
    R, wR = grid(cR - w, cR + w)
    TT, RR = np.meshgrid(T, R, indexing="ij")
    rhs = np.einsum("i,j,ij->", wT, wR, phi(TT, RR) * np.sin(RR) ** (d - 1))
    # spacetime side: dt dr = du dv / 2 with r = (u - v)/2 >= 0
    reach = math.sqrt(2) * w
    u, wu = grid(math.tan((cT + cR - reach) / 2), math.tan((cT + cR + reach) / 2))
    v, wv = grid(math.tan((cT - cR - reach) / 2), math.tan((cT - cR + reach) / 2))
    UU, VV = np.meshgrid(u, v, indexing="ij")
    t, r = (UU + VV) / 2, (UU - VV) / 2
    ok = r > 0
    Tm, Rm = penrose_forward_array(t, np.where(ok, r, 0.0))
    omega = 2 / np.sqrt((1 + UU ** 2) * (1 + VV ** 2))
    vals = np.where(ok, phi(Tm, Rm) * omega ** (d + 1) * np.where(ok, r, 0.0) ** (d - 1), 0.0)
    lhs = 0.5 * np.einsum("i,j,ij->", wu, wv, vals)
    return float(abs(lhs - rhs))


# Zonal functions on S^d

@dataclass(frozen=True)
class ZonalFunction:
    """sum_l coeffs[l] C_l^{(d-1)/2}(X_0) on S^d."""

    d: int
    coeffs: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))

    @property
    def nu(self) -> float:
        return (self.d - 1) / 2

    @classmethod
    def harmonic(cls, d: int, ell: int, coeff=1.0) -> "ZonalFunction":
        return cls(d, (0.0,) * ell + (coeff,))

    def __call__(self, X0):
        X0 = np.asarray(X0, dtype=float)
        L = len(self.coeffs) - 1
        basis = _zonal_basis(self.d, L, X0)
        return np.tensordot(np.array(self.coeffs), basis, axes=1)


def _zonal_basis(d, L, X0):
    nu = (d - 1) / 2
    if nu == 0:
        raise DomainError("zonal harmonics need d >= 2")
    return gegenbauer_all(nu, L, X0)


def dsd_apply(F: ZonalFunction) -> ZonalFunction:
    """D_{S^d}: coefficient l is multiplied by l + (d-1)/2."""
    return ZonalFunction(F.d, tuple(c * (l + F.nu) for l, c in enumerate(F.coeffs)))


def spherical_halfwave(F: ZonalFunction, T: float) -> ZonalFunction:
    """exp(i T D_{S^d}): coefficient l is multiplied by exp(i T (l + (d-1)/2))."""
    return ZonalFunction(F.d, tuple(c * np.exp(1j * T * (l + F.nu)) for l, c in enumerate(F.coeffs)))


def penrose_transform_zonal(F: ZonalFunction, r):
    """g(r) = (1 + X0)^{(d-1)/2} F(X0) with X0 = (1-r^2)/(1+r^2)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("r must be nonnegative")
    X0 = (1 - r * r) / (1 + r * r)
    out = (1 + X0) ** F.nu * F(X0)
    return complex(out) if out.ndim == 0 else out


def zonal_fit(values, X0, d: int, L: int):
    """Least-squares coefficients of samples in degree <= L zonal harmonics; returns (coeffs, residual)."""
    basis = _zonal_basis(d, L, np.asarray(X0)).T
    coef, *_ = np.linalg.lstsq(basis.astype(complex), np.asarray(values, dtype=complex), rcond=None)
    resid = float(np.max(np.abs(basis @ coef - values)))
    return coef, resid


def tangent_space_residuals(d: int, n: int = 41) -> dict:
    """Pull back g_star, i g_star, x.grad g_star and i D g_star to S^d and fit in degrees <= 1."""
    r = np.linspace(0.0, 6.0, n)
    X0 = (1 - r * r) / (1 + r * r)
    nu = (d - 1) / 2
    gstar = (2 / (1 + r * r)) ** nu
    dgstar = nu * (2 / (1 + r * r)) ** ((d + 1) / 2)  # intertwining law at l = 0
    xgrad = -2 * nu * r * r / (1 + r * r) * gstar
    weight = (1 + X0) ** nu
    out = {}
    for name, g in (("gstar", gstar), ("i_gstar", 1j * gstar), ("x_grad_gstar", xgrad),
                    ("i_D_gstar", 1j * dgstar)):
        _, resid = zonal_fit(g / weight, X0, d, 1)
        out[name] = resid
    return out


# Funk-Hecke and the intertwining law

def funk_hecke_eigenvalue(d: int, ell: int, cfg: QuadratureConfig = DEFAULT) -> float:
    """c_d 2^{(1-d)/2} |S^{d-1}| int C_l(t)/C_l(1) (1-t)^{(1-d)/2} (1-t^2)^{(d-2)/2} dt."""
    if d < 2 or ell < 0:
        raise DomainError("need d >= 2 and l >= 0")
    nu = (d - 1) / 2
    cd = math.gamma(nu) / (2 * math.pi ** ((d + 1) / 2))
    n = max(cfg.gauss_jacobi_order, ell + 8)
    # (1-t)^{(1-d)/2} (1-t)^{(d-2)/2} (1+t)^{(d-2)/2} = (1-t)^{-1/2} (1+t)^{(d-2)/2}
    t, w = jacobi_rule(n, -0.5, (d - 2) / 2)
    integral = float(np.dot(w, gegenbauer(nu, ell, t))) / gegenbauer_at_one(nu, ell)
    return cd * 2 ** ((1 - d) / 2) * sphere_area(d) * integral


def g_k(d: int, k: int, r):
    """Penrose transform of Y_k = C_k^nu."""
    return np.real(penrose_transform_zonal(ZonalFunction.harmonic(d, k), r))


def dg_k_closed(d: int, k: int, r):
    """D g_k = (k+nu) (2/(1+r^2))^{(d+1)/2} C_k^nu((1-r^2)/(1+r^2))."""
    r = np.asarray(r, dtype=float)
    nu = (d - 1) / 2
    X0 = (1 - r * r) / (1 + r * r)
    return (k + nu) * (2 / (1 + r * r)) ** ((d + 1) / 2) * gegenbauer(nu, k, X0)


def _radial_ft(h, d, rho, cfg, start_cut=1.0):
    """Radial Fourier transform int h(|x|) e^{-i x.xi} dx at |xi| = rho (scalar).

    d = 3: (4 pi / rho) int_0^inf h(r) r sin(rho r) dr.
    d = 2: 2 pi int_0^inf h(r) J_0(rho r) r dr.
    Panels follow the sign changes of the kernel; the tail is Euler-summed.
    """
    n = cfg.gauss_legendre_order
    if d == 3:
        half = math.pi / rho
        first_zero = half

        def kern(r):
            return h(r) * r * np.sin(rho * r)
        scale = 4 * math.pi / rho
    elif d == 2:
        half = math.pi / rho
        first_zero = 0.75 * math.pi / rho  # McMahon: zeros of J_0 near (m - 1/4) pi

        def kern(r):
            return h(r) * r * bessel_j(0, rho * r)
        scale = 2 * math.pi
    else:
        raise DomainError("radial transform route implemented for d in {2, 3}")
    # resolve the bulk of h (scale ~ 1) before the oscillatory tail
    reach = max(40.0, 40 * half)
    m = math.ceil((reach - first_zero) / half)
    edge = first_zero + m * half
    inner = np.unique(np.concatenate([np.geomspace(1e-3, edge, 60), first_zero + half * np.arange(m + 1)]))
    inner = inner[inner <= edge]
    breaks = np.concatenate([[0.0], inner])
    # refine panels so none is longer than a quarter period
    fine = [breaks[0]]
    for a, b in zip(breaks[:-1], breaks[1:]):
        pieces = max(1, int(math.ceil((b - a) / (0.5 * half))))
        fine.extend(np.linspace(a, b, pieces + 1)[1:])
    body = float(np.sum(panel_sums(kern, np.array(fine), n)))
    tail_breaks = edge + half * np.arange(cfg.tail_extrapolation_terms + 1)
    tail, _ = euler_transform(panel_sums(kern, tail_breaks, n))
    return scale * (body + tail)


def _inverse_radial_ft(F_vals, rho, w_rho, d, r):
    """(2 pi)^{-d} int F(|xi|) e^{i x.xi} dxi at |x| = r from samples on a rho rule."""
    r = np.asarray(r, dtype=float)
    if d == 3:
        kern = np.where(r[:, None] > 0, np.sin(np.outer(r, rho)) / np.maximum(np.outer(r, rho), 1e-300),
                        1.0)
        return (4 * math.pi) / (2 * math.pi) ** 3 * (kern * (F_vals * rho ** 2 * w_rho)).sum(axis=1)
    kern = np.stack([bessel_j(0, rr * rho) for rr in r])
    return (2 * math.pi) / (2 * math.pi) ** 2 * (kern * (F_vals * rho * w_rho)).sum(axis=1)


def intertwining_check(d: int, k: int, r_grid=None, cfg: QuadratureConfig = DEFAULT,
                       n_rho: int = 160) -> float:
    """Max discrepancy (relative to the grid sup norm) between D g_k in closed form
    and D g_k computed as inverse FT of |xi| times the numerical FT of g_k."""
    if d not in (2, 3):
        raise DomainError("transform route implemented for d in {2, 3}")
    if k > 12:
        raise DomainError("intertwining check supports k <= 12")
    if r_grid is None:
        r_grid = np.array([0.0, 0.3, 0.7, 1.0, 1.5, 2.5])
    r_grid = np.asarray(r_grid, dtype=float)
    # rho rule on (0, rho_max): Gauss-Legendre in sqrt(rho) to absorb the 1/rho behaviour
    rho_max = 48.0 + 3 * k
    x, w = legendre_rule(n_rho)
    s = 0.5 * (x + 1) * math.sqrt(rho_max)
    rho = s * s
    w_rho = w * 0.5 * math.sqrt(rho_max) * 2 * s
    h = lambda rr: g_k(d, k, rr)
    F = np.array([_radial_ft(h, d, float(p), cfg) for p in rho])
    numeric = _inverse_radial_ft(rho * F, rho, w_rho, d, r_grid)
    closed = dg_k_closed(d, k, r_grid)
    return float(np.max(np.abs(numeric - closed)) / np.max(np.abs(closed)))


# Diamond unfolding

def _cylinder_rule(gamma: float, d: int, n_inner: int = 48, n_outer: int = 20, depth: int = 24):
    """2-D nodes for int_0^pi dT int_{-1}^{1} ds |cos T + s|^gamma (1-s^2)^{(d-2)/2} (.).

    Returns (T, s, w, right) where `right` flags nodes with s > -cos T (the
    diamond). The inner split is at s = -cos T; the outer T panels are graded
    geometrically toward 0 and pi where the inner integral loses smoothness.
    """
    beta = (d - 2) / 2
    edge = math.pi / 16
    grade = edge * 0.5 ** np.arange(depth, -1, -1)
    uniform = np.linspace(edge, math.pi - edge, 17)
    breaks = np.unique(np.concatenate([[0.0], grade, uniform, math.pi - grade[::-1], [math.pi]]))
    xg, wg = legendre_rule(n_outer)
    Ts, Ss, Ws, Rs = [], [], [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        half = 0.5 * (b - a)
        for xi, wi in zip(xg, wg):
            T = 0.5 * (a + b) + half * xi
            s0 = -math.cos(T)
            one_plus = 2 * math.sin(T / 2) ** 2
            one_minus = 2 * math.sin((math.pi - T) / 2) ** 2
            if gamma == 0:
                s, ws = jacobi_rule(n_inner, beta, beta)
                right = s > s0
            else:
                sl, wl = split_rule(gamma, s0, beta, beta, n=n_inner, n_graded=16, pieces="left",
                                    one_plus=one_plus, one_minus=one_minus)
                sr, wr = split_rule(gamma, s0, beta, beta, n=n_inner, n_graded=16, pieces="right",
                                    one_plus=one_plus, one_minus=one_minus)
                s = np.concatenate([sl, sr])
                ws = np.concatenate([wl, wr])
                right = np.concatenate([np.zeros(sl.size, bool), np.ones(sr.size, bool)])
            Ts.append(np.full(s.size, T))
            Ss.append(s)
            Ws.append(ws * wi * half)
            Rs.append(right)
    return np.concatenate(Ts), np.concatenate(Ss), np.concatenate(Ws), np.concatenate(Rs)


_RULE_CACHE: dict = {}


def cylinder_rule(gamma: float, d: int):
    key = (float(gamma), int(d))
    rule = _RULE_CACHE.get(key)
    if rule is None:
        rule = tuple(a.copy() for a in _cylinder_rule(float(gamma), d))
        for a in rule:
            a.setflags(write=False)
        _RULE_CACHE[key] = rule
    return rule


def diamond_unfold_check(G: ZonalFunction, d: int, gamma: float, cfg: QuadratureConfig = DEFAULT):
    """Return (diamond, half_cylinder, residual) for V = e^{-iT nu} (e^{iTD} G) |Omega|^gamma.

    For zonal G = sum c_l C_l, V = sum c_l e^{i l T} C_l(X0) |cos T + X0|^gamma and
    dsigma = (1-s^2)^{(d-2)/2} ds dsigma_{S^{d-1}} with s = X0.
    """
    if not gamma > -1:
        raise DomainError("gamma_p must exceed -1")
    T, s, w, right = cylinder_rule(gamma, d)
    area = sphere_area(d)
    L = len(G.coeffs) - 1
    basis = _zonal_basis(d, L, s)
    diamond = 0j
    full = 0j
    for ell, c in enumerate(G.coeffs):
        if c == 0:
            continue
        # T in [-pi, pi]: the imaginary part cancels by symmetry, leaving 2 cos(l T)
        vals = 2 * np.cos(ell * T) * basis[ell] * w
        diamond += c * area * vals[right].sum()
        full += c * area * vals.sum()
    half_full = 0.5 * full
    return diamond, half_full, float(abs(diamond - half_full))
