"""Scalar special-function kernels: Gamma in log space, Gegenbauer and
Chebyshev polynomials, Bessel J of real order, and the constants R_k^alpha
and H_gamma."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

MAX_GEGENBAUER_DEGREE = 60


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


def log_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    x = float(x)
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def signed_log_gamma(x: float) -> tuple[float, int]:
    """Return (log|Gamma(x)|, sign Gamma(x)) for any real x.

    At the poles (x a nonpositive integer) the sign is 0, which callers
    treat as a vanishing reciprocal Gamma factor.
    """
    x = float(x)
    if x > 0:
        return math.lgamma(x), 1
    if x == math.floor(x):
        return math.inf, 0
    sign = -1 if math.floor(-x) % 2 == 0 else 1
    return math.lgamma(x), sign


def gamma_ratio(a: float, b: float, k: int) -> float:
    """Gamma(a+k) / Gamma(b+k), computed in log space."""
    if a + k <= 0 or b + k <= 0:
        raise DomainError("gamma_ratio requires a+k > 0 and b+k > 0")
    return math.exp(math.lgamma(a + k) - math.lgamma(b + k))


def sphere_area(m: int) -> float:
    """Surface area |S^{m-1}| = 2 pi^{m/2} / Gamma(m/2) of the unit sphere in R^m."""
    if m < 1:
        raise DomainError(f"sphere_area requires m >= 1, got {m}")
    return 2.0 * math.pi ** (m / 2) / math.gamma(m / 2)


def _check_degree(k: int) -> None:
    if k < 0:
        raise DomainError("degree must be nonnegative")
    if k > MAX_GEGENBAUER_DEGREE:
        raise DomainError(f"degree {k} exceeds the supported maximum {MAX_GEGENBAUER_DEGREE}")


def gegenbauer_all(alpha: float, kmax: int, t):
    """Stack [C_0^alpha(t), ..., C_kmax^alpha(t)] along a new leading axis."""
    if alpha == 0:
        raise DomainError("alpha = 0 is the Chebyshev branch; use chebyshev_t")
    if not alpha > -0.5:
        raise DomainError("Gegenbauer parameter must exceed -1/2")
    _check_degree(kmax)
    t = np.asarray(t, dtype=float)
    out = np.empty((kmax + 1,) + t.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = 2.0 * alpha * t
    for k in range(2, kmax + 1):
        out[k] = (2.0 * (k + alpha - 1) * t * out[k - 1] - (k + 2 * alpha - 2) * out[k - 2]) / k
    return out


def gegenbauer(alpha: float, k: int, t):
    """C_k^alpha(t) by the forward three-term recurrence."""
    _check_degree(k)
    vals = gegenbauer_all(alpha, k, t)[k]
    return float(vals) if np.ndim(vals) == 0 else vals


def gegenbauer_at_one(alpha: float, k: int) -> float:
    """C_k^alpha(1) = Gamma(k+2 alpha) / (k! Gamma(2 alpha))."""
    return math.exp(math.lgamma(k + 2 * alpha) - math.lgamma(k + 1) - math.lgamma(2 * alpha))


def chebyshev_t(k: int, t):
    """T_k(t) = cos(k arccos t) on [-1, 1]."""
    if k < 0:
        raise DomainError("degree must be nonnegative")
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1 + 1e-14):
        raise DomainError("chebyshev_t is defined here on [-1, 1]")
    prev, cur = np.ones_like(t), t.copy()
    if k == 0:
        out = prev
    else:
        for _ in range(k - 1):
            prev, cur = cur, 2 * t * cur - prev
        out = cur
    return float(out) if out.ndim == 0 else out


# Gauss-Jacobi rules (Golub-Welsch). Shared by quadrature; kept here so the
# Bessel kernel can use them without a circular import.

@lru_cache(maxsize=None)
def jacobi_rule(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for int_{-1}^{1} f(t) (1-t)^a (1+t)^b dt.

    Returned arrays are read-only so the cached tables cannot be mutated.
    """
    if a <= -1 or b <= -1:
        raise DomainError("Jacobi exponents must exceed -1")
    if n < 1:
        raise DomainError("rule needs at least one node")
    k = np.arange(n, dtype=float)
    s = 2 * k + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = (b * b - a * a) / (s * (s + 2))
    if abs(a + b) < 1e-15:
        diag[0] = (b - a) / (a + b + 2)
    kk = k[1:]
    s1 = 2 * kk + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        off = np.sqrt(4 * kk * (kk + a) * (kk + b) * (kk + a + b) / (s1 * s1 * (s1 + 1) * (s1 - 1)))
    if n > 1 and abs(a + b + 1) < 1e-15:
        # first off-diagonal entry has a removable 0/0 when a + b = -1
        off[0] = math.sqrt(4 * (1 + a) * (1 + b) / ((2 + a + b) ** 2 * (3 + a + b)))
    nodes, vecs = eigh_tridiagonal(np.nan_to_num(diag), off)
    mu0 = math.exp((a + b + 1) * math.log(2) + math.lgamma(a + 1) + math.lgamma(b + 1)
                   - math.lgamma(a + b + 2))
    weights = mu0 * vecs[0] ** 2
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=None)
def legendre_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    return jacobi_rule(n, 0.0, 0.0)


# Bessel J of real order

_ASYMPTOTIC_SWITCH = 15.0


def _hankel_asymptotic(order: float, x: np.ndarray) -> np.ndarray:
    """Large-argument Hankel expansion, truncated at the smallest term."""
    mu = 4.0 * order * order
    P = np.ones_like(x)
    Q = np.zeros_like(x)
    term = np.ones_like(x)
    prev_abs = np.full_like(x, np.inf)
    active = np.ones(x.shape, dtype=bool)
    for j in range(1, 80):
        term = term * (mu - (2 * j - 1) ** 2) / (8.0 * j * x)
        mag = np.abs(term)
        active &= (mag < prev_abs) & (mag > 0)
        if not active.any():
            break
        signed = np.where(active, term, 0.0)
        if j % 2 == 1:
            Q += (-1) ** ((j - 1) // 2) * signed
        else:
            P += (-1) ** (j // 2) * signed
        prev_abs = np.where(active, mag, prev_abs)
    chi = x - (order / 2 + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (P * np.cos(chi) - Q * np.sin(chi))


def _poisson(order: float, x: np.ndarray) -> np.ndarray:
    """Poisson integral J_v(x) = (x/2)^v / (Gamma(v+1/2) sqrt(pi)) int (1-t^2)^{v-1/2} cos(xt) dt."""
    n = int(30 + np.max(x, initial=0.0))
    t, w = jacobi_rule(n, order - 0.5, order - 0.5)
    integral = np.cos(np.outer(x, t)) @ w
    pref = np.power(x / 2, order) * math.exp(-math.lgamma(order + 0.5) - 0.5 * math.log(math.pi))
    return pref * integral


def _miller_scale(order: float, x: np.ndarray) -> np.ndarray:
    """J_order(x) for 15 < x <= order.

    Upward recurrence from Hankel seeds is trusted only while the order stays
    below x; the remaining stretch is covered by a backward (Miller) sequence
    matched to the two highest trusted values by least squares.
    """
    base = order - math.floor(order)
    n_total = int(round(order - base))
    up = np.empty((n_total + 1, x.size))
    up[0] = _hankel_asymptotic(base, x)
    up[1] = _hankel_asymptotic(base + 1, x)
    for m in range(1, n_total):
        up[m + 1] = 2 * (base + m) / x * up[m] - up[m - 1]
    top = n_total + 40 + int(np.max(x))
    f_next = np.zeros_like(x)
    f_cur = np.full_like(x, 1e-30)
    back = np.empty((n_total + 1, x.size))
    for m in range(top, 0, -1):
        # f_{m-1} = (2 (base+m) / x) f_m - f_{m+1}
        f_prev = 2 * (base + m) / x * f_cur - f_next
        f_next, f_cur = f_cur, f_prev
        scale = np.max(np.abs(f_cur))
        if scale > 1e200:
            f_cur, f_next = f_cur / scale, f_next / scale
            back /= scale
        if m - 1 <= n_total:
            back[m - 1] = f_cur
    m_star = np.clip(np.floor(x - base).astype(int), 1, n_total)
    cols = np.arange(x.size)
    j1, j0 = up[m_star, cols], up[m_star - 1, cols]
    f1, f0 = back[m_star, cols], back[m_star - 1, cols]
    c = (j1 * f1 + j0 * f0) / (f1 * f1 + f0 * f0)
    return c * back[n_total]


def bessel_j(order: float, x):
    """Bessel function J_order(x) for order >= 0 and x >= 0.

    Poisson-integral quadrature for x <= 15. For x > 15 the Hankel expansion
    seeds orders frac(order) and frac(order)+1, followed by upward recurrence
    (stable while the order is below x) and, for x <= order, a Miller
    backward sequence.
    """
    if order < 0:
        raise DomainError("order must be nonnegative")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise DomainError("bessel_j requires x >= 0")
    flat = xa.ravel()
    out = np.empty_like(flat)
    near = flat <= _ASYMPTOTIC_SWITCH
    if near.any():
        out[near] = _poisson(order, flat[near])
    mid = ~near & (flat <= order)
    if mid.any():
        out[mid] = _miller_scale(order, flat[mid])
    far = ~near & ~mid
    if far.any():
        xf = flat[far]
        base = order - math.floor(order)
        j0 = _hankel_asymptotic(base, xf)
        steps = int(round(order - base))
        if steps == 0:
            out[far] = j0
        else:
            j1 = _hankel_asymptotic(base + 1, xf)
            for m in range(1, steps):
                j0, j1 = j1, 2 * (base + m) / xf * j1 - j0
            out[far] = j1
    out = out.reshape(xa.shape)
    return float(out) if out.ndim == 0 else out


# Constants R_k^alpha and H_gamma

def rodrigues_R(alpha: float, k: int) -> float:
    """R_k^alpha, with the alpha = 0 (Chebyshev) branch sqrt(pi) / (2^k Gamma(k+1/2))."""
    if not alpha > -0.5 or k < 0:
        raise DomainError("need alpha > -1/2 and k >= 0")
    if alpha == 0:
        return math.exp(0.5 * math.log(math.pi) - k * math.log(2) - math.lgamma(k + 0.5))
    lg = (math.lgamma(alpha + 0.5) + math.lgamma(k + 2 * alpha) - k * math.log(2)
          - math.lgamma(k + 1) - math.lgamma(2 * alpha) - math.lgamma(alpha + k + 0.5))
    return math.exp(lg)


def is_even_nonnegative_integer(x) -> bool:
    if isinstance(x, Fraction):
        return x.denominator == 1 and x >= 0 and x.numerator % 2 == 0
    xf = float(x)
    return xf >= 0 and xf == math.floor(xf) and int(xf) % 2 == 0


def homogeneous_H(gamma) -> float:
    """H_gamma = 2^{(gamma+1)/2} pi^{-gamma/2} Gamma((gamma+1)/2) / Gamma(-gamma/2).

    Exactly zero on the even nonnegative integers, where 1/Gamma(-gamma/2) vanishes.
    """
    if not gamma > -1:
        raise DomainError("H_gamma requires gamma > -1")
    if is_even_nonnegative_integer(gamma):
        return 0.0
    g = float(gamma)
    lden, sden = signed_log_gamma(-g / 2)
    mag = ((g + 1) / 2 * math.log(2) - g / 2 * math.log(math.pi)
           + math.lgamma((g + 1) / 2) - lden)
    return sden * math.exp(mag)
