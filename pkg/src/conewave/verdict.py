"""Per-(d, p) verdict: are F-functions critical points of the extension inequality?"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

import numpy as np

from . import euler_lagrange as el
from .cone_core import ExponentConfig, ab_coefficients
from .quadrature import DEFAULT, QuadratureConfig
from .specfun import sphere_area

SCHEMA_VERSION = "conewave.verdict/1"
EVALUATOR_VERSIONS = {
    "lhs_quadrature": "cylinder-split/1",
    "lhs_closed": "watson-pochhammer/1",
    "rhs_quadrature": "gauss-jacobi/1",
    "rhs_rodrigues": "rodrigues-gauss-jacobi/1",
    "rhs_exact": "laplace-hankel/1",
}
DECAY_SLOPE = math.log(2 / 3) + 0.05


class DecayError(RuntimeError):
    """The supercritical ratio trace failed to decay as required."""


@dataclass(frozen=True)
class Tolerances:
    vanish_rel: float = 1e-8     # |L|, |R| relative to their absolute-value scale
    sign_rel: float = 1e-12      # below this (times scale) a value has no certified sign
    route_rel: float = 1e-6      # agreement between independent evaluators
    calibration_rel: float = 1e-5
    decay_drop: float = 1e-6
    series_terms: int = 3000
    trace_k_max: int = 20
    trace_k_cap: int = 40

    def as_dict(self) -> dict:
        return asdict(self)


# outcomes

@dataclass
class CriticalPoint:
    ks: list
    max_rel_L: float
    max_rel_R: float
    name: str = field(default="CriticalPoint", init=False)


@dataclass
class FailsBySign:
    k: int
    L: float
    R: float
    L_closed: float
    R_quadrature: float
    boundary: bool
    lam: float
    name: str = field(default="FailsBySign", init=False)


@dataclass
class FailsByDecay:
    k: int
    L: float
    R: float
    ratio_trace: list
    slope: float
    bound_constant: float
    lam: float
    wired_lhs: float
    wired_rhs: float
    constant_exact: bool
    name: str = field(default="FailsByDecay", init=False)


@dataclass
class Inconclusive:
    reason: str
    diagnostics: dict = field(default_factory=dict)
    name: str = field(default="Inconclusive", init=False)


Outcome = Union[CriticalPoint, FailsBySign, FailsByDecay, Inconclusive]


@dataclass
class Verdict:
    exponents: ExponentConfig
    outcome: Outcome
    reports: list = field(default_factory=list)
    tolerances: Tolerances = field(default_factory=Tolerances)
    p_text: Optional[str] = None
    quadrature: QuadratureConfig = DEFAULT

    @property
    def witness_k(self) -> Optional[int]:
        return getattr(self.outcome, "k", None)

    @property
    def certified(self) -> bool:
        return not isinstance(self.outcome, Inconclusive)

    def to_dict(self) -> dict:
        exp, out = self.exponents, self.outcome
        evidence = {"L": None, "R": None, "lambda": None, "ratio_trace": []}
        if isinstance(out, FailsBySign):
            evidence.update(L=out.L, R=out.R, **{"lambda": out.lam},
                            L_closed=out.L_closed, R_quadrature=out.R_quadrature,
                            boundary=out.boundary)
        elif isinstance(out, FailsByDecay):
            evidence.update(L=out.L, R=out.R, ratio_trace=list(out.ratio_trace),
                            **{"lambda": out.lam}, slope=out.slope,
                            bound_constant=out.bound_constant, wired_lhs=out.wired_lhs,
                            wired_rhs=out.wired_rhs, constant_exact=out.constant_exact)
        elif isinstance(out, CriticalPoint):
            evidence.update(ks=list(out.ks), max_rel_L=out.max_rel_L, max_rel_R=out.max_rel_R)
        else:
            evidence.update(reason=out.reason, diagnostics=out.diagnostics)
        tol = self.tolerances.as_dict()
        tol.update(quadrature_abs=self.quadrature.abs_tol, quadrature_rel=self.quadrature.rel_tol)
        return {
            "schema_version": SCHEMA_VERSION,
            "d": exp.d,
            "p": self.p_text if self.p_text is not None else exp.p_string(),
            "q": float(exp.q),
            "gamma_p": exp.gamma,
            "outcome": out.name,
            "witness_k": self.witness_k,
            "evidence": evidence,
            "tolerances": tol,
            "evaluator_versions": dict(EVALUATOR_VERSIONS),
        }


# subcritical

def subcritical_witness(exp: ExponentConfig) -> int:
    """k = floor(gamma_p/2) + 2: the k >= 2 with gamma_p in [2k-4, 2k-2)."""
    if not 1 < exp.p < 2:
        raise ValueError("the sign witness needs 1 < p < 2")
    return int(math.floor(exp.gamma_p / 2)) + 2


# supercritical

@dataclass
class RatioTrace:
    ks: np.ndarray
    L: np.ndarray
    R: np.ndarray
    ratio: np.ndarray
    slope: float
    drop_k: Optional[int]
    nonzero_ok: bool
    slope_ok: bool

    @property
    def ok(self) -> bool:
        return self.nonzero_ok and self.slope_ok and self.drop_k is not None


def supercritical_ratio_trace(exp: ExponentConfig, k_max: int = 20, cfg: QuadratureConfig = DEFAULT,
                              tol: Tolerances = Tolerances(), strict: bool = True) -> RatioTrace:
    """|R(k)/L(k)| for k = 2..k_cap; the slope is fitted on 2..k_max after dividing by k^{gamma+2}."""
    if not (exp.p > 2 and not exp.is_critical):
        raise ValueError("the decay trace needs 2 < p < 2d/(d-1)")
    cap = max(k_max, tol.trace_k_cap)
    ks = np.arange(2, cap + 1)
    L = el.lhs_quadrature_many(exp, ks, cfg)
    # the Rodrigues integrand is single-signed, so R keeps full relative precision as it decays
    R = np.array([el.rhs_rodrigues(exp, int(k), cfg) for k in ks])
    scale = el.lhs_scale_many(exp, ks)
    nonzero_ok = bool(np.all(np.abs(L) > tol.sign_rel * scale))
    ratio = np.abs(R / L)
    m = ks <= k_max
    y = np.log(ratio[m] * ks[m] ** (-exp.gamma - 2.0))
    slope = float(np.polyfit(ks[m], y, 1)[0])
    below = np.nonzero(ratio < tol.decay_drop * ratio[0])[0]
    drop_k = int(ks[below[0]]) if below.size else None
    tr = RatioTrace(ks=ks, L=L, R=R, ratio=ratio, slope=slope, drop_k=drop_k,
                    nonzero_ok=nonzero_ok, slope_ok=slope <= DECAY_SLOPE)
    if strict and not tr.ok:
        raise DecayError(f"ratio trace does not decay: slope={slope:.4f}, drop_k={drop_k}, "
                         f"nonzero={nonzero_ok}")
    return tr


def gamma_ratio_display(exp: ExponentConfig, k: int) -> float:
    """Gamma(k - gamma/2) Gamma(k + 2 nu) / (Gamma(gamma/2 + nu + k + 1) Gamma(k + 1))."""
    g, nu = exp.gamma, exp.nu
    lg = math.lgamma
    return math.exp(lg(k - g / 2) + lg(k + 2 * nu) - lg(g / 2 + nu + k + 1) - lg(k + 1))


@dataclass
class WangReport:
    radius: float
    M: float
    ks: np.ndarray
    coeffs: np.ndarray
    constants: np.ndarray
    bound_constant: float
    stable: bool
    slope: float
    slope_ok: bool

    @property
    def ok(self) -> bool:
        return self.stable and self.slope_ok


def gegenbauer_norm_sq(nu: float, k: int) -> float:
    """int (C_k^nu)^2 (1-s^2)^{nu-1/2} ds."""
    return math.pi * 2 ** (1 - 2 * nu) * math.exp(
        math.lgamma(k + 2 * nu) - math.lgamma(k + 1) - 2 * math.lgamma(nu)) / (k + nu)


def kernel_coefficients(exp: ExponentConfig, ks, cfg: QuadratureConfig = DEFAULT,
                        route: str = "rodrigues") -> np.ndarray:
    """Gegenbauer coefficients of K(s) = (a_p s + b_p)^{-nu}."""
    m = (exp.pf - 1) ** 2
    out = []
    for k in ks:
        k = int(k)
        rhs = el.rhs_rodrigues(exp, k, cfg) if route == "rodrigues" else el.rhs_quadrature(exp, k, cfg)
        integral = rhs / ((k + exp.nu) * sphere_area(exp.d) * (2 * m) ** exp.nu)
        out.append(integral / gegenbauer_norm_sq(exp.nu, k))
    return np.array(out)


def wang_bound_check(exp: ExponentConfig, k_range=range(4, 31), cfg: QuadratureConfig = DEFAULT,
                     n_theta: int = 2048) -> WangReport:
    """|a_k| <= C M k^{1-nu} (2/3)^{k+1}, M the sup of |K| on the ellipse E_{3/2}."""
    a, b = ab_coefficients(exp.p)
    radius = abs(b / a)
    if radius <= 1.25:
        raise RuntimeError(f"|b_p/a_p| = {radius} <= 5/4 contradicts the uniform lower bound")
    rho = 1.5
    th = np.linspace(0, 2 * np.pi, n_theta, endpoint=False)
    s = (rho * np.exp(1j * th) + np.exp(-1j * th) / rho) / 2
    M = float(np.max(np.abs(a * s + b) ** (-exp.nu)))
    ks = np.array(list(k_range))
    coeffs = kernel_coefficients(exp, ks, cfg)
    consts = np.abs(coeffs) / (M * ks ** (1 - exp.nu) * (2 / 3) ** (ks + 1))
    half = len(ks) // 2
    C = float(np.max(consts))
    stable = bool(np.max(consts[half:]) <= np.max(consts[:half]) * (1 + 1e-9))
    slope = float(np.polyfit(ks, np.log(np.abs(coeffs)), 1)[0])
    return WangReport(radius=radius, M=M, ks=ks, coeffs=coeffs, constants=consts, bound_constant=C,
                      stable=stable, slope=slope, slope_ok=slope <= DECAY_SLOPE)


# the decision

def _critical(exp, cfg, tol):
    worst_L = worst_R = 0.0
    reports = []
    ks = list(range(1, 9))
    L = el.lhs_quadrature_many(exp, ks, cfg)
    for k, lq in zip(ks, L):
        rq = el.rhs_quadrature(exp, k, cfg)
        worst_L = max(worst_L, abs(lq) / el.lhs_scale(exp, k))
        worst_R = max(worst_R, abs(rq) / el.rhs_scale(exp, k))
        reports.append(el.el_report(exp, k, cfg, zero_rel=tol.vanish_rel))
    if worst_L > tol.vanish_rel or worst_R > tol.vanish_rel:
        return Inconclusive("p = 2 but the EL sides do not vanish within tolerance",
                            {"max_rel_L": worst_L, "max_rel_R": worst_R}), reports
    return CriticalPoint(ks=ks, max_rel_L=worst_L, max_rel_R=worst_R), reports


def _subcritical(exp, cfg, tol):
    k = subcritical_witness(exp)
    cal = el.calibrate_lhs_constant(exp, cfg, tol.calibration_rel)  # ConventionError is fatal
    rep = el.el_report(exp, k, cfg, calibration=cal.constant, zero_rel=tol.sign_rel)
    Lc = cal.constant * rep.lhs_closed
    sign_closed = 0 if Lc == 0 else (1 if Lc > 0 else -1)
    if not exp.exact and sign_closed != 0:
        # a float p sitting on a vanishing boundary: both routes must see |L| below tolerance
        if abs(Lc) <= tol.sign_rel * el.lhs_scale(exp, k):
            sign_closed = 0
    series = el.rhs_series_signs(exp, k, tol.series_terms, cfg)
    lam = el.lambda_multiplier(exp, cfg)
    diag = {"k": k, "L_quadrature": rep.lhs_quad, "L_closed": Lc, "R_quadrature": rep.rhs_quad,
            "R_rodrigues": rep.rhs_rodrigues, "series_signs_ok": series.signs_ok}
    route_ok = abs(rep.rhs_quad - rep.rhs_rodrigues) <= tol.route_rel * abs(rep.rhs_rodrigues)
    if not (rep.sign_lhs == sign_closed and rep.sign_lhs <= 0):
        return Inconclusive("LHS sign not certified by both routes", diag), [rep]
    if not (rep.sign_rhs > 0 and rep.rhs_rodrigues > 0 and series.signs_ok and route_ok):
        return Inconclusive("RHS sign not certified by all routes", diag), [rep]
    if not lam > 0:
        return Inconclusive("non-positive multiplier", diag), [rep]
    return FailsBySign(k=k, L=rep.lhs_quad, R=rep.rhs_rodrigues, L_closed=Lc,
                       R_quadrature=rep.rhs_quad, boundary=(sign_closed == 0), lam=lam), [rep]


def _supercritical(exp, cfg, tol):
    try:
        trace = supercritical_ratio_trace(exp, tol.trace_k_max, cfg, tol)
    except DecayError as exc:
        return Inconclusive(str(exc)), []
    wang = wang_bound_check(exp, cfg=cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        lam = el.lambda_multiplier(exp, cfg)
        mult = el.el_multiplier(exp, cfg)
    kappa = el.rhs_exact_ratio_predicted(exp)
    exact = exp.d in (2, 3)
    diag = {"slope": trace.slope, "drop_k": trace.drop_k}
    for i, k in enumerate(trace.ks[trace.ks <= tol.trace_k_max]):
        k = int(k)
        L, R = float(trace.L[i]), float(trace.R[i])
        if exact:
            rx = el.rhs_exact(exp, k, cfg)
            # the full-constant route must agree with the Plancherel-rescaled Rodrigues value
            if abs(rx - kappa * R) > tol.route_rel * abs(kappa * R):
                diag[f"rhs_exact_mismatch_k{k}"] = [rx, kappa * R]
                continue
        else:
            rx = kappa * R
        if mult * abs(rx) < 0.5 * abs(L):
            rep = el.el_report(exp, k, cfg, zero_rel=tol.sign_rel)
            rep.rhs_exact, rep.lambda_exact = (rx, mult) if exact else (None, None)
            return FailsByDecay(k=k, L=L, R=R, ratio_trace=[float(r) for r in trace.ratio],
                                slope=trace.slope, bound_constant=wang.bound_constant, lam=lam,
                                wired_lhs=abs(L), wired_rhs=mult * abs(rx),
                                constant_exact=exact), [rep]
    return Inconclusive("no degree with the wired RHS below half the LHS", diag), []


def decide(exp: ExponentConfig, cfg: QuadratureConfig = DEFAULT, tol: Tolerances = Tolerances(),
           p_text: Optional[str] = None) -> Verdict:
    """CriticalPoint iff p = 2; otherwise a certified failure with a witness degree."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        if exp.is_critical:
            outcome, reports = _critical(exp, cfg, tol)
        elif exp.p < 2:
            outcome, reports = _subcritical(exp, cfg, tol)
        else:
            outcome, reports = _supercritical(exp, cfg, tol)
    return Verdict(exponents=exp, outcome=outcome, reports=reports, tolerances=tol,
                   p_text=p_text, quadrature=cfg)
