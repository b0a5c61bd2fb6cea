"""Exponent bookkeeping, F-function parameters and the symmetry group acting on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

from .specfun import DomainError, jacobi_rule, sphere_area

Number = Union[int, float, Fraction]


def parse_p(p) -> Number:
    """Accept '3/2', '1.5', Fraction, int or float. Strings become exact rationals."""
    if isinstance(p, str):
        try:
            return Fraction(p.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse exponent {p!r}") from exc
    if isinstance(p, (Fraction, int)):
        return Fraction(p)
    return float(p)


@dataclass(frozen=True)
class ExponentConfig:
    d: int
    p: Number
    p_prime: Number
    q: Number
    gamma_p: Number
    nu: float

    @property
    def exact(self) -> bool:
        return isinstance(self.p, Fraction)

    @property
    def is_critical(self) -> bool:
        """The Strichartz point p = 2 (exactly, or within 1e-12 for float input)."""
        if self.exact:
            return self.p == 2
        return abs(float(self.p) - 2.0) < 1e-12

    @property
    def pf(self) -> float:
        return float(self.p)

    @property
    def gamma(self) -> float:
        return float(self.gamma_p)

    def p_string(self) -> str:
        return str(self.p) if self.exact else repr(float(self.p))


def make_exponents(d: int, p) -> ExponentConfig:
    """Populate (p', q, gamma_p, nu) and enforce 1 < p < 2d/(d-1)."""
    if int(d) != d or d < 2:
        raise DomainError("dimension d must be an integer >= 2")
    d = int(d)
    p = parse_p(p)
    upper = Fraction(2 * d, d - 1)
    if not (1 < p < upper):
        raise DomainError(
            f"p={p} lies outside the open range (1, {upper}); there gamma_p <= -1 and "
            "|Omega|^gamma_p is not integrable over the Penrose cylinder")
    pp = p / (p - 1)
    q = Fraction(d + 1, d - 1) * pp if isinstance(p, Fraction) else (d + 1) / (d - 1) * pp
    gamma = (d + 1) * (pp / 2 - 1)
    return ExponentConfig(d=d, p=p, p_prime=pp, q=q, gamma_p=gamma, nu=(d - 1) / 2)


def p_from_gamma(d: int, gamma: float) -> float:
    """Inverse of p -> gamma_p: p' = 2(gamma/(d+1) + 1)."""
    pp = 2 * (gamma / (d + 1) + 1)
    return pp / (pp - 1)


def ab_coefficients(p) -> tuple[float, float]:
    """(a_p, b_p) = ((p-1)^2 - 1, (p-1)^2 + 1)."""
    p = parse_p(p)
    m = (p - 1) ** 2
    return float(m - 1), float(m + 1)


# C_d normalization of g_star

@lru_cache(maxsize=None)
def c_d(d: int) -> float:
    """C_d with inverse FT of C_d |xi|^{-1} e^{-|xi|} equal to g_star(0) = 2^{(d-1)/2}.

    Convention: g(x) = (2 pi)^{-d} int ghat(xi) e^{i x.xi} dxi. The radial moment
    int_0^inf rho^{d-2} e^{-rho} d rho is evaluated by Gauss-Jacobi quadrature on
    rho = (1+t)/(1-t) rather than by its closed form.
    """
    t, w = jacobi_rule(64, 0.0, 0.0)
    rho = (1 + t) / (1 - t)
    jac = 2 / (1 - t) ** 2
    moment = float(np.dot(w, rho ** (d - 2) * np.exp(-rho) * jac))
    return 2 ** ((d - 1) / 2) * (2 * math.pi) ** d / (sphere_area(d) * moment)


def c_d_gaussian_superposition(d: int) -> float:
    """C_d from the Gaussian superposition of |xi|^{-1} e^{-|xi|}: 2^{(d-1)/2} 2 pi^{(d+1)/2} / Gamma((d-1)/2)."""
    return 2 ** ((d - 1) / 2) * 2 * math.pi ** ((d + 1) / 2) / math.gamma((d - 1) / 2)


# F-functions

class AdmissibilityError(RuntimeError):
    """Transformed parameters left the admissible set (a bug trap)."""


@dataclass(frozen=True)
class FFunctionParams:
    """ghat(xi) = |xi|^{-1} exp(A|xi| + b.xi + c), admissible when |Re b| < -Re A."""

    A: complex
    b: tuple
    c: complex

    def __post_init__(self):
        object.__setattr__(self, "A", complex(self.A))
        object.__setattr__(self, "b", tuple(complex(v) for v in self.b))
        object.__setattr__(self, "c", complex(self.c))

    @property
    def d(self) -> int:
        return len(self.b)

    @property
    def b_vec(self) -> np.ndarray:
        return np.array(self.b, dtype=complex)

    def admissible(self) -> bool:
        return float(np.linalg.norm(self.b_vec.real)) < -self.A.real

    def density(self, xi) -> np.ndarray:
        """|xi| ghat(xi) = exp(A|xi| + b.xi + c); xi has shape (..., d)."""
        xi = np.asarray(xi, dtype=float)
        r = np.linalg.norm(xi, axis=-1)
        return np.exp(self.A * r + xi @ self.b_vec + self.c)

    def ghat(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return self.density(xi) / np.linalg.norm(xi, axis=-1)


def gstar_params(d: int) -> FFunctionParams:
    return FFunctionParams(A=-1.0, b=(0.0,) * d, c=math.log(c_d(d)))


# Symmetries

@dataclass(frozen=True)
class Dilation:
    lam: float


@dataclass(frozen=True)
class Boost:
    xi0: tuple


@dataclass(frozen=True)
class SectorialExpansion:
    theta: tuple
    lam: float


@dataclass(frozen=True)
class Translation:
    t0: float
    x0: tuple


@dataclass(frozen=True)
class Phase:
    theta: float


@dataclass(frozen=True)
class Composite:
    """Apply parts[0] first, then parts[1], and so on."""

    parts: tuple = field(default_factory=tuple)


SymmetryElement = Union[Dilation, Boost, SectorialExpansion, Translation, Phase, Composite]


def inverse(S: SymmetryElement) -> SymmetryElement:
    if isinstance(S, Dilation):
        return Dilation(1.0 / S.lam)
    if isinstance(S, Boost):
        return Boost(tuple(-v for v in S.xi0))
    if isinstance(S, SectorialExpansion):
        return SectorialExpansion(S.theta, 1.0 / S.lam)
    if isinstance(S, Translation):
        return Translation(-S.t0, tuple(-v for v in S.x0))
    if isinstance(S, Phase):
        return Phase(-S.theta)
    if isinstance(S, Composite):
        return Composite(tuple(inverse(s) for s in reversed(S.parts)))
    raise TypeError(f"unknown symmetry {S!r}")


def _split(v, e):
    par = (v @ e) * e
    return par, v - par


def apply_symmetry(S: SymmetryElement, f: FFunctionParams, p: float = 2.0) -> FFunctionParams:
    """Parameter transform induced on the cone density F = exp(A|xi| + b.xi + c).

    The density F = |xi| ghat lives in L^p(d xi / |xi|); p enters only through
    the lambda^{(d-1)/p} normalization of dilations and sectorial expansions.
    """
    A, b, c = f.A, f.b_vec, f.c
    d = f.d
    if isinstance(S, Composite):
        out = f
        for part in S.parts:
            out = apply_symmetry(part, out, p)
        return out
    if isinstance(S, Dilation):
        if not S.lam > 0:
            raise DomainError("dilation factor must be positive")
        A2, b2, c2 = S.lam * A, S.lam * b, c + (d - 1) / p * math.log(S.lam)
    elif isinstance(S, Boost):
        xi0 = np.asarray(S.xi0, dtype=float)
        m = float(np.linalg.norm(xi0))
        if m == 0:
            return f
        e = xi0 / m
        jp = math.sqrt(1 + m * m)
        b_par, b_perp = _split(b, e)
        # F(xi_perp + <m> xi_par - |xi| xi0), with |eta| = <m>|xi| - xi0.xi
        A2 = jp * A - b @ xi0
        b2 = b_perp + jp * b_par - A * xi0
        c2 = c
    elif isinstance(S, SectorialExpansion):
        th = np.asarray(S.theta, dtype=float)
        th = th / np.linalg.norm(th)
        lam = S.lam
        if not lam > 0:
            raise DomainError("expansion factor must be positive")
        b_par, b_perp = _split(b, th)
        bt = b @ th
        A2 = A * (1 + lam ** 2) / 2 + bt * (1 - lam ** 2) / 2
        b2 = A * (1 - lam ** 2) / 2 * th + bt * (1 + lam ** 2) / 2 * th + lam * b_perp
        c2 = c + (d - 1) / p * math.log(lam)
    elif isinstance(S, Translation):
        A2 = A - 1j * S.t0
        b2 = b - 1j * np.asarray(S.x0, dtype=float)
        c2 = c
    elif isinstance(S, Phase):
        A2, b2, c2 = A, b, c + 1j * S.theta
    else:
        raise TypeError(f"unknown symmetry {S!r}")
    out = FFunctionParams(A=A2, b=tuple(b2), c=c2)
    if not out.admissible():
        raise AdmissibilityError(f"{S!r} produced inadmissible parameters {out!r}")
    return out


def act_on_density(S: SymmetryElement, F, d: int, p: float = 2.0):
    """Pointwise action of S on a density F(xi) (a callable on arrays of shape (..., d))."""
    if isinstance(S, Composite):
        G = F
        for part in S.parts:
            G = act_on_density(part, G, d, p)
        return G
    if isinstance(S, Dilation):
        return lambda xi: S.lam ** ((d - 1) / p) * F(S.lam * np.asarray(xi))
    if isinstance(S, Boost):
        xi0 = np.asarray(S.xi0, dtype=float)
        m = float(np.linalg.norm(xi0))
        if m == 0:
            return F
        e = xi0 / m
        jp = math.sqrt(1 + m * m)

        def boosted(xi):
            xi = np.asarray(xi, dtype=float)
            s = xi @ e
            r = np.linalg.norm(xi, axis=-1)
            perp = xi - s[..., None] * e
            eta = perp + (jp * s)[..., None] * e - r[..., None] * xi0
            return F(eta)
        return boosted
    if isinstance(S, SectorialExpansion):
        th = np.asarray(S.theta, dtype=float)
        th = th / np.linalg.norm(th)
        lam = S.lam

        def expanded(xi):
            xi = np.asarray(xi, dtype=float)
            s = xi @ th
            r = np.linalg.norm(xi, axis=-1)
            perp = xi - s[..., None] * th
            eta = (((1 - lam ** 2) / 2 * r + (1 + lam ** 2) / 2 * s)[..., None] * th + lam * perp)
            return lam ** ((d - 1) / p) * F(eta)
        return expanded
    if isinstance(S, Translation):
        x0 = np.asarray(S.x0, dtype=float)

        def translated(xi):
            xi = np.asarray(xi, dtype=float)
            r = np.linalg.norm(xi, axis=-1)
            return np.exp(-1j * (S.t0 * r + xi @ x0)) * F(xi)
        return translated
    if isinstance(S, Phase):
        return lambda xi: np.exp(1j * S.theta) * F(xi)
    raise TypeError(f"unknown symmetry {S!r}")


def symmetry_pointwise_oracle(S: SymmetryElement, f: FFunctionParams, xi, p: float = 2.0) -> float:
    """Max relative residual between ghat of the transformed parameters and the
    pointwise action on ghat, which is |xi|^{-1} S[|.| ghat](xi)."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    r = np.linalg.norm(xi, axis=-1)
    if np.any(r == 0):
        raise DomainError("sample points must be nonzero")
    lhs = apply_symmetry(S, f, p).ghat(xi)
    rhs = act_on_density(S, f.density, f.d, p)(xi) / r
    scale = np.maximum(np.abs(rhs), 1e-300)
    return float(np.max(np.abs(lhs - rhs) / scale))


# Lorentz-invariant cone measure

def bump(center, radius):
    """Smooth test function supported in the ball B(center, radius)."""
    center = np.asarray(center, dtype=float)

    def phi(xi):
        u2 = np.sum((np.asarray(xi) - center) ** 2, axis=-1) / radius ** 2
        out = np.zeros(u2.shape)
        inside = u2 < 1
        out[inside] = np.exp(1 - 1 / (1 - u2[inside]))
        return out
    return phi


TRIAL_FUNCTIONS = {
    "bump_axis": ((1.0, 0.0, 0.0), 0.6),
    "bump_offaxis": ((0.8, 0.9, 0.4), 0.7),
    "bump_far": ((-1.5, 0.5, -0.3), 1.0),
}


def _cone_integral(phi, d: int, n_r: int = 400, n_ang: int = 256) -> float:
    """int phi(xi) dxi/|xi| over R^d in polar coordinates (radius cut at 12)."""
    t, w = jacobi_rule(n_r, 0.0, 0.0)
    r = 6.0 * (t + 1)
    wr = 6.0 * w * r ** (d - 2)
    if d == 2:
        ang = 2 * math.pi * np.arange(n_ang) / n_ang
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        wa = np.full(n_ang, 2 * math.pi / n_ang)
    elif d == 3:
        ct, wt = jacobi_rule(n_ang // 2, 0.0, 0.0)
        ph = 2 * math.pi * np.arange(n_ang) / n_ang
        st = np.sqrt(1 - ct ** 2)
        dirs = np.stack([np.outer(st, np.cos(ph)), np.outer(st, np.sin(ph)),
                         np.outer(ct, np.ones_like(ph))], axis=-1).reshape(-1, 3)
        wa = np.outer(wt, np.full(n_ang, 2 * math.pi / n_ang)).ravel()
    else:
        raise DomainError("cone measure check implemented for d in {2, 3}")
    pts = r[:, None, None] * dirs[None, :, :]
    vals = phi(pts)
    return float(np.einsum("i,j,ij->", wr, wa, np.real(vals)))


def cone_measure_invariance_check(S: SymmetryElement, d: int, trial: str = "bump_axis",
                                  p: float = 2.0) -> float:
    """| int |S phi|^p dmu - int |phi|^p dmu | for dmu = dxi/|xi|.

    For boosts S phi = phi o (Lorentz map) and this is the invariance of the
    cone measure; for dilations the lambda^{(d-1)/p} normalization makes the
    statement an L^p isometry.
    """
    center, radius = TRIAL_FUNCTIONS[trial]
    phi = bump(center[:d], radius)
    moved = act_on_density(S, phi, d, p)
    base = _cone_integral(lambda xi: np.abs(phi(xi)) ** p, d)
    after = _cone_integral(lambda xi: np.abs(moved(xi)) ** p, d)
    return abs(after - base)


def random_symmetry(rng: np.random.Generator, d: int) -> SymmetryElement:
    kind = rng.integers(5)
    if kind == 0:
        return Dilation(float(np.exp(rng.uniform(-1, 1))))
    if kind == 1:
        return Boost(tuple(rng.normal(scale=0.7, size=d)))
    if kind == 2:
        th = rng.normal(size=d)
        return SectorialExpansion(tuple(th / np.linalg.norm(th)), float(np.exp(rng.uniform(-1, 1))))
    if kind == 3:
        return Translation(float(rng.normal()), tuple(rng.normal(size=d)))
    return Phase(float(rng.uniform(-math.pi, math.pi)))


def _param_distance(f: FFunctionParams, g: FFunctionParams) -> float:
    u = np.concatenate([[f.A], f.b_vec, [f.c]]).astype(complex)
    v = np.concatenate([[g.A], g.b_vec, [g.c]]).astype(complex)
    return float(np.max(np.abs(u - v) / np.maximum(1.0, np.abs(v))))


def group_law_residuals(S: SymmetryElement, T: SymmetryElement, f: FFunctionParams,
                        p: float = 2.0) -> dict:
    """Identity, inverse and composition laws on F-function parameters."""
    once = apply_symmetry(S, f, p)
    return {
        "identity": _param_distance(apply_symmetry(Composite(()), f, p), f),
        "inverse": _param_distance(apply_symmetry(inverse(S), once, p), f),
        "composition": _param_distance(apply_symmetry(Composite((S, T)), f, p),
                                       apply_symmetry(T, once, p)),
        "composite_inverse": _param_distance(
            apply_symmetry(inverse(Composite((S, T))), apply_symmetry(Composite((S, T)), f, p), p), f),
    }
