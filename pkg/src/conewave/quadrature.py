"""Deterministic quadrature: adaptive Gauss-Legendre, Gauss-Jacobi,
interior algebraic singularities, and semi-infinite oscillatory integrals."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfun import DomainError, bessel_j, jacobi_rule, legendre_rule


@dataclass(frozen=True)
class QuadratureConfig:
    gauss_legendre_order: int = 20
    gauss_jacobi_order: int = 48
    abs_tol: float = 1e-13
    rel_tol: float = 1e-11
    max_panel_depth: int = 40
    oscillatory_truncation: float = 400.0
    tail_extrapolation_terms: int = 24

    def __post_init__(self):
        if self.gauss_legendre_order < 4 or self.gauss_jacobi_order < 4:
            raise ValueError("quadrature orders must be at least 4")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.oscillatory_truncation < 50:
            raise ValueError("oscillatory truncation must be at least 50")
        if self.tail_extrapolation_terms < 4:
            raise ValueError("need at least 4 tail extrapolation terms")
        if self.max_panel_depth < 1:
            raise ValueError("max_panel_depth must be positive")


DEFAULT = QuadratureConfig()


class QuadratureError(RuntimeError):
    """Non-convergence; carries the best estimate and its error estimate."""

    def __init__(self, message, estimate=math.nan, error=math.inf):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


def _tol(cfg, value):
    return max(cfg.abs_tol, cfg.rel_tol * abs(value))


def fixed_legendre(f, a, b, n):
    x, w = legendre_rule(n)
    half = 0.5 * (b - a)
    return half * np.dot(w, f(0.5 * (a + b) + half * x))


def gauss_legendre(f, a: float, b: float, cfg: QuadratureConfig = DEFAULT) -> float:
    """Adaptive panel splitting; each panel's error is estimated by doubling the order."""
    n = cfg.gauss_legendre_order
    total = 0.0
    err_total = 0.0
    stack = [(a, b, 0)]
    while stack:
        lo, hi, depth = stack.pop()
        coarse = fixed_legendre(f, lo, hi, n)
        fine = fixed_legendre(f, lo, hi, 2 * n)
        err = abs(fine - coarse)
        width_share = abs(hi - lo) / max(abs(b - a), 1e-300)
        if err <= _tol(cfg, fine) * max(width_share, 1e-3) or err <= 1e-15 * abs(fine):
            total += fine
            err_total += err
        elif depth >= cfg.max_panel_depth:
            raise QuadratureError("gauss_legendre exceeded max_panel_depth", total + fine, err_total + err)
        else:
            mid = 0.5 * (lo + hi)
            stack.append((lo, mid, depth + 1))
            stack.append((mid, hi, depth + 1))
    return float(total)


def gauss_jacobi(f, alpha_exp: float, beta_exp: float, cfg: QuadratureConfig = DEFAULT) -> float:
    """int_{-1}^{1} f(t) (1-t)^alpha_exp (1+t)^beta_exp dt, by order doubling."""
    if alpha_exp <= -1 or beta_exp <= -1:
        raise DomainError("Jacobi exponents must exceed -1")
    n = cfg.gauss_jacobi_order
    prev = None
    for _ in range(6):
        x, w = jacobi_rule(n, float(alpha_exp), float(beta_exp))
        val = float(np.dot(w, f(x)))
        if prev is not None and abs(val - prev) <= _tol(cfg, val):
            return val
        prev = val
        n *= 2
    raise QuadratureError("gauss_jacobi did not converge", prev, abs(val - prev))


# Weighted panels with endpoint singularities and nearby "shadow" singularities.

def _panel(lo, hi, e_lo, e_hi, n):
    """Nodes/weights on [lo, hi] absorbing (s-lo)^e_lo (hi-s)^e_hi."""
    half = 0.5 * (hi - lo)
    if e_lo == 0 and e_hi == 0:
        x, w = legendre_rule(n)
        return lo + half * (x + 1), half * w
    x, w = jacobi_rule(n, float(e_hi), float(e_lo))
    return lo + half * (x + 1), w * half ** (1 + e_lo + e_hi)


def _grading(length, dist, ratio=0.25):
    """Geometric breakpoints (relative to an endpoint) resolving a singularity at
    distance `dist` outside the interval; empty when it is far enough away."""
    if dist <= 0 or dist >= ratio * length:
        return []
    pts = []
    h = dist
    while h < ratio * length:
        pts.append(h)
        h *= 2
    return pts


def weighted_piece(lo, hi, e_lo=0.0, e_hi=0.0, shadow_lo=(0.0, 0.0), shadow_hi=(0.0, 0.0),
                   n=48, n_graded=16, length=None):
    """Rule for int_lo^hi h(s) (s-lo)^e_lo (hi-s)^e_hi (s-lo+dl)^gl (hi-s+dh)^gh ds.

    shadow_lo = (dl, gl) and shadow_hi = (dh, gh) describe algebraic singular
    points just outside the interval. When one is close relative to the
    interval length, panels are graded geometrically toward that end.
    The returned weights include every algebraic factor. `length` may be
    passed when hi - lo is known more accurately than the float difference.
    """
    length = (hi - lo) if length is None else length
    dl, gl = shadow_lo
    dh, gh = shadow_hi
    left = _grading(length, dl) if gl != 0 else []
    right = _grading(length, dh) if gh != 0 else []
    # breakpoints as offsets from lo
    rel = [0.0] + list(left) + [length - h for h in reversed(right)] + [length]
    main = (left[-1] if left else 0.0, length - right[-1] if right else length)
    nodes, weights = [], []
    for a, b in zip(rel[:-1], rel[1:]):
        ea = e_lo if a == 0.0 else 0.0
        eb = e_hi if b == length else 0.0
        m = n if (a, b) == main else n_graded
        x, w = _panel(a, b, ea, eb, m)
        if a != 0.0 and e_lo != 0:
            w = w * x ** e_lo
        if b != length and e_hi != 0:
            w = w * (length - x) ** e_hi
        nodes.append(x)
        weights.append(w)
    x = np.concatenate(nodes)
    w = np.concatenate(weights)
    if gl != 0:
        w = w * (x + dl) ** gl
    if gh != 0:
        w = w * (length - x + dh) ** gh
    return lo + x, w


def split_rule(gamma, s0, a_exp=0.0, b_exp=0.0, n=48, n_graded=16, pieces="both",
               one_plus=None, one_minus=None):
    """Rule for int_{-1}^{1} h(s) |s-s0|^gamma (1-s)^a_exp (1+s)^b_exp ds.

    The interval is split at s0 and each side receives the exact Jacobi
    weight for its two endpoint singularities; the opposite endpoint factor
    is handled by grading when s0 approaches it. pieces selects "left",
    "right" or "both". one_plus = 1+s0 and one_minus = 1-s0 may be supplied
    when they are known to better relative accuracy than s0 itself.
    """
    ep = (1.0 + s0) if one_plus is None else one_plus
    em = (1.0 - s0) if one_minus is None else one_minus
    if not (ep > 0 and em > 0):
        raise DomainError("split point must lie inside (-1, 1)")
    xs, ws = [], []
    if pieces in ("both", "left"):
        # (1+s)^b at -1, (s0-s)^gamma at s0, (1-s)^a = (s0 - s + (1-s0))^a
        x, w = weighted_piece(-1.0, s0, b_exp, gamma, shadow_hi=(em, a_exp), n=n,
                              n_graded=n_graded, length=ep)
        xs.append(x)
        ws.append(w)
    if pieces in ("both", "right"):
        x, w = weighted_piece(s0, 1.0, gamma, a_exp, shadow_lo=(ep, b_exp), n=n,
                              n_graded=n_graded, length=em)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def singular_split(f, gamma: float, s0: float, cfg: QuadratureConfig = DEFAULT,
                   a_exp: float = 0.0, b_exp: float = 0.0) -> float:
    """int_{-1}^{1} f(s) |s - s0|^gamma (1-s)^a_exp (1+s)^b_exp ds with f smooth."""
    if gamma <= -1:
        raise DomainError("gamma must exceed -1 for integrability")
    if not -1 < s0 < 1:
        if a_exp == 0 and b_exp == 0:
            return gauss_legendre(lambda s: f(s) * np.abs(s - s0) ** gamma, -1.0, 1.0, cfg)
        return gauss_jacobi(lambda s: f(s) * np.abs(s - s0) ** gamma, a_exp, b_exp, cfg)
    n = cfg.gauss_jacobi_order
    prev = None
    for _ in range(5):
        x, w = split_rule(gamma, s0, a_exp, b_exp, n=n, n_graded=max(16, n // 3))
        val = float(np.dot(w, f(x)))
        if prev is not None and abs(val - prev) <= _tol(cfg, val):
            return val
        prev = val
        n *= 2
    raise QuadratureError("singular_split did not converge", prev, abs(val - prev))


# Oscillatory integrals on [0, inf)

def euler_transform(terms) -> tuple[float, float]:
    """Sum an alternating-like series by repeated averaging of partial sums.

    Returns (estimate, error estimate)."""
    partial = np.cumsum(np.asarray(terms, dtype=float))
    rows = [partial]
    while len(rows[-1]) > 1:
        prev = rows[-1]
        rows.append(0.5 * (prev[1:] + prev[:-1]))
    best = rows[-1][0]
    err = abs(rows[-1][0] - rows[-2][-1]) if len(rows) > 1 else math.inf
    return float(best), float(err)


def panel_sums(f, breaks, n):
    """Integrals of f over consecutive panels [breaks[i], breaks[i+1]] (vectorized)."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = legendre_rule(n)
    lo, hi = breaks[:-1], breaks[1:]
    half = 0.5 * (hi - lo)
    pts = (0.5 * (hi + lo))[:, None] + half[:, None] * x[None, :]
    return (f(pts) @ w) * half


def oscillatory_tail(f, start: float, half_period: float, cfg: QuadratureConfig = DEFAULT,
                     phase_zero: float | None = None) -> tuple[float, float]:
    """int_start^inf f for an integrand whose sign alternates every half_period.

    Panel integrals between consecutive sign changes are summed by the Euler
    transform. phase_zero, when given, is one sign-change location used to
    align the panels.
    """
    if phase_zero is not None:
        m = math.ceil((start - phase_zero) / half_period)
        first = phase_zero + m * half_period
    else:
        first = start + half_period
    head = fixed_legendre(f, start, first, cfg.gauss_legendre_order) if first > start else 0.0
    nterms = cfg.tail_extrapolation_terms
    breaks = first + half_period * np.arange(nterms + 1)
    terms = panel_sums(f, breaks, cfg.gauss_legendre_order)
    tail, err = euler_transform(terms)
    return float(head + tail), err


def _hankel_coeffs(order, nmax):
    mu = 4.0 * order * order
    out = [1.0]
    for j in range(1, nmax + 1):
        out.append(out[-1] * (mu - (2 * j - 1) ** 2) / (8.0 * j))
    return out


def _nonoscillatory_product_coeffs(mu, nu2, nmax):
    """c_n such that J_mu J_nu ~ (1/pi) sum_n c_n x^{-1-n} + oscillatory terms."""
    am = _hankel_coeffs(mu, nmax)
    an = _hankel_coeffs(nu2, nmax)
    phase = complex(math.cos((nu2 - mu) * math.pi / 2), math.sin((nu2 - mu) * math.pi / 2))
    out = []
    for n in range(nmax + 1):
        s = 0j
        for j in range(n + 1):
            s += (1j) ** j * (-1j) ** (n - j) * am[j] * an[n - j]
        out.append((phase * s).real / math.pi)
    return out


def watson_strip_ok(mu, nu2, lam):
    return mu + nu2 + 1 > lam > 0


def bessel_product_integral(mu: float, nu2: float, lam: float,
                            cfg: QuadratureConfig = DEFAULT) -> float:
    """int_0^inf J_mu(t) J_nu2(t) t^{-lam} dt by quadrature.

    [0, L] is covered by Gauss panels (Gauss-Jacobi at the origin for the
    t^{mu+nu2-lam} behaviour). Beyond L the non-oscillatory part of the Hankel
    expansion of the product is integrated in closed form and the remaining
    purely oscillatory part is summed panel by panel with the Euler transform.
    """
    if not watson_strip_ok(mu, nu2, lam):
        raise DomainError("need mu + nu + 1 > lambda > 0")
    big = max(mu, nu2)
    L = max(cfg.oscillatory_truncation, 4.0 * big * big)
    # sign changes of cos(2t - (mu+nu2+1) pi/2)
    half = math.pi / 2
    zero0 = ((mu + nu2 + 2) * math.pi / 2) / 2
    L = zero0 + half * math.ceil((L - zero0) / half)

    def integrand(t):
        return bessel_j(mu, t) * bessel_j(nu2, t) * t ** (-lam)

    # origin panel: J_mu J_nu t^{-lam} = [J_mu J_nu / t^{mu+nu2}] t^{mu+nu2-lam}
    a0 = 1.0
    expo = mu + nu2 - lam
    x, w = jacobi_rule(cfg.gauss_jacobi_order, 0.0, float(expo))
    t0 = a0 * (x + 1) / 2
    smooth = bessel_j(mu, t0) * bessel_j(nu2, t0) / t0 ** (mu + nu2)
    head = float(np.dot(w, smooth)) * (a0 / 2) ** (1 + expo)
    nbody = max(8, int(math.ceil((L - a0) / half)))
    breaks = np.linspace(a0, L, nbody + 1)
    body = float(np.sum(panel_sums(integrand, breaks, cfg.gauss_legendre_order)))

    nmax = 8
    coeffs = _nonoscillatory_product_coeffs(mu, nu2, nmax)

    def nonosc(t):
        return sum(c * t ** (-1.0 - n - lam) for n, c in enumerate(coeffs))

    smooth_tail = sum(c * L ** (-lam - n) / (lam + n) for n, c in enumerate(coeffs))
    osc_tail, err = oscillatory_tail(lambda t: integrand(t) - nonosc(t), L, half, cfg, phase_zero=zero0)
    total = head + body + smooth_tail + osc_tail
    if not math.isfinite(total) or err > max(1e-8, 1e-6 * abs(total)):
        raise QuadratureError("oscillatory tail extrapolation did not converge", total, err)
    return float(total)
