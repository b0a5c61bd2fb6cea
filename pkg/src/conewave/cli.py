"""Command-line interface: verdicts, EL tables and the validation suites."""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import warnings
from dataclasses import fields, replace
from typing import Optional

import numpy as np

from . import euler_lagrange as el
from . import penrose
from .cone_core import (Boost, cone_measure_invariance_check, gstar_params, group_law_residuals,
                        make_exponents, random_symmetry, symmetry_pointwise_oracle)
from .quadrature import DEFAULT, QuadratureConfig, bessel_product_integral, watson_strip_ok
from .specfun import DomainError
from .verdict import SCHEMA_VERSION, Tolerances, decide

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 64
CONFIG_ENV = "CONEWAVE_CONFIG"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


# formatting

def fmt_float(x) -> str:
    """17 significant digits, lowercase scientific."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.16e" % x


def dump_json(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON with fixed float formatting and insertion-ordered keys."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        import json
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}{dump_json(str(k))}: {dump_json(v, indent, _level + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [inner + dump_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if v is None:
        return ""
    return str(v)


def write_csv(rows: list[dict], columns: list[str], comments: list[str]) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


# configuration

_QUAD_KEYS = {f.name for f in fields(QuadratureConfig)}
_TOL_KEYS = {f.name for f in fields(Tolerances)}


def read_config(path: Optional[str]) -> dict:
    """Flat key=value file; '#' starts a comment."""
    if not path:
        return {}
    out = {}
    try:
        with open(path) as fh:
            for n, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{n}: expected key=value")
                key, val = (s.strip() for s in line.split("=", 1))
                out[key.replace("-", "_")] = val
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    return out


def _coerce(kind, raw, key):
    try:
        return kind(float(raw)) if kind is int else kind(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad value for {key}: {raw!r}") from exc


def build_configs(args) -> tuple[QuadratureConfig, Tolerances]:
    """Config file first, then CLI flags on top; everything validated here."""
    raw = read_config(args.config or os.environ.get(CONFIG_ENV))
    if getattr(args, "tol_abs", None) is not None:
        raw["abs_tol"] = args.tol_abs
    if getattr(args, "tol_rel", None) is not None:
        raw["rel_tol"] = args.tol_rel
    unknown = set(raw) - _QUAD_KEYS - _TOL_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    qkw = {f.name: _coerce(type(getattr(DEFAULT, f.name)), raw[f.name], f.name)
           for f in fields(QuadratureConfig) if f.name in raw}
    base_tol = Tolerances()
    tkw = {f.name: _coerce(type(getattr(base_tol, f.name)), raw[f.name], f.name)
           for f in fields(Tolerances) if f.name in raw}
    try:
        cfg = replace(DEFAULT, **qkw)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    tol = replace(base_tol, **tkw)
    if any(not getattr(tol, k) > 0 for k in _TOL_KEYS):
        raise UsageError("tolerances must be positive")
    return cfg, tol


def _tol_comment(cfg: QuadratureConfig, tol: Tolerances) -> str:
    parts = [f"{k}={fmt_float(v) if isinstance(v, float) else v}"
             for k, v in list(tol.as_dict().items()) + [("abs_tol", cfg.abs_tol), ("rel_tol", cfg.rel_tol)]]
    return "tolerances " + " ".join(parts)


def _exponents(args):
    try:
        return make_exponents(args.d, args.p)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# commands

def cmd_verdict(args) -> int:
    exp = _exponents(args)
    cfg, tol = build_configs(args)
    v = decide(exp, cfg, tol, p_text=args.p)
    doc = v.to_dict()
    if args.format == "csv":
        ev = doc["evidence"]
        row = {"d": doc["d"], "p": doc["p"], "q": doc["q"], "gamma_p": doc["gamma_p"],
               "outcome": doc["outcome"], "witness_k": doc["witness_k"],
               "L": ev.get("L"), "R": ev.get("R"), "lambda": ev.get("lambda")}
        text = write_csv([row], list(row), [f"schema {SCHEMA_VERSION}", _tol_comment(cfg, tol)])
    else:
        text = dump_json(doc) + "\n"
    _emit(text, args.out)
    return EXIT_OK if v.certified else EXIT_INCONCLUSIVE


EL_COLUMNS = ["k", "lhs_quad", "lhs_closed", "lhs_calibration", "rhs_quad", "rhs_rodrigues",
              "sign_lhs", "sign_rhs", "ratio_abs"]


def cmd_el_table(args) -> int:
    exp = _exponents(args)
    cfg, tol = build_configs(args)
    if not 0 <= args.k_min <= args.k_max <= 60:
        raise UsageError("need 0 <= k-min <= k-max <= 60")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        try:
            calib, how = el.calibrate_lhs_constant(exp, cfg, tol.calibration_rel).constant, "measured"
        except el.CalibrationUnavailable:
            # gamma_p = 0: the closed form vanishes for every k >= 1
            calib, how = el.lhs_calibration_predicted(exp), "predicted"
        rows = [el.el_report(exp, k, cfg, calibration=calib, zero_rel=tol.sign_rel).as_row()
                for k in range(args.k_min, args.k_max + 1)]
    comments = [f"schema {SCHEMA_VERSION}",
                f"d={exp.d} p={args.p} gamma_p={fmt_float(exp.gamma)} calibration={how}",
                _tol_comment(cfg, tol)]
    if args.format == "json":
        doc = {"schema_version": SCHEMA_VERSION, "d": exp.d, "p": args.p, "gamma_p": exp.gamma,
               "tolerances": {**tol.as_dict(), "abs_tol": cfg.abs_tol, "rel_tol": cfg.rel_tol},
               "rows": [{c: r[c] for c in EL_COLUMNS} for r in rows]}
        text = dump_json(doc) + "\n"
    else:
        text = write_csv(rows, EL_COLUMNS, comments)
    _emit(text, args.out)
    return EXIT_OK


def _line(name, residual, limit, skipped=False) -> tuple[dict, bool]:
    """One check record; skipped items count as passing."""
    if skipped:
        return {"item": name, "status": "skipped", "residual": math.nan, "limit": limit}, True
    ok = bool(np.isfinite(residual) and residual <= limit)
    return {"item": name, "status": "pass" if ok else "fail", "residual": float(residual),
            "limit": limit}, ok


CHECK_COLUMNS = ["item", "status", "residual", "limit"]


def _render_checks(results, fmt: str) -> str:
    recs = [r for r, _ in results]
    if fmt == "csv":
        return write_csv(recs, CHECK_COLUMNS, [f"schema {SCHEMA_VERSION}"])
    if fmt == "json":
        return dump_json({"schema_version": SCHEMA_VERSION, "checks": recs}) + "\n"
    lines = []
    for r in recs:
        if r["status"] == "skipped":
            lines.append(f"SKIP {r['item']}: transform route needs d in {{2, 3}}")
        else:
            lines.append(f"{r['status'].upper()} {r['item']}: residual={fmt_float(r['residual'])} "
                         f"limit={fmt_float(r['limit'])}")
    return "\n".join(lines) + "\n"


def funk_hecke_lines(d: int, cfg, l_max: int = 8):
    out = []
    for ell in range(l_max + 1):
        got = penrose.funk_hecke_eigenvalue(d, ell, cfg)
        want = 1.0 / (ell + (d - 1) / 2)
        out.append(_line(f"funk-hecke d={d} l={ell}", abs(got / want - 1), 1e-8))
    return out


def cmd_penrose_check(args) -> int:
    cfg, _ = build_configs(args)
    d = args.d
    if d < 2:
        raise UsageError("d must be >= 2")
    results = funk_hecke_lines(d, cfg)
    transform = d in (2, 3)
    for test in penrose.PUSHFORWARD_TESTS:
        res = penrose.pushforward_check(test, d, cfg) if transform else math.nan
        results.append(_line(f"pushforward {test}", res, 1e-6, not transform))
    for k in (0, 2, 5):
        res = penrose.intertwining_check(d, k, cfg=cfg) if transform else math.nan
        results.append(_line(f"intertwining k={k}", res, 1e-8, not transform))
    for gamma in (-0.5, 0.0, 1.5):
        G = penrose.ZonalFunction(d, (1.0, 0.5, -0.25))
        _, half, res = penrose.diamond_unfold_check(G, d, gamma, cfg)
        results.append(_line(f"diamond-unfold gamma={gamma}", res / max(1.0, abs(half)), 1e-8))
    _emit(_render_checks(results, args.format), args.out)
    return EXIT_OK if all(ok for _, ok in results) else EXIT_ERROR


def cmd_watson(args) -> int:
    cfg, _ = build_configs(args)
    mu, nu2, lam = args.mu, args.nu2, args.lam
    if not watson_strip_ok(mu, nu2, lam):
        raise UsageError(f"({mu}, {nu2}, {lam}) is outside the strip Re(mu+nu+1) > Re(lambda) > 0")
    closed = el.watson_closed_form(mu, nu2, lam)
    quad = bessel_product_integral(mu, nu2, lam, cfg)
    rel = abs(quad / closed - 1)
    rows = [{"mu": mu, "nu2": nu2, "lambda": lam, "closed_form": closed, "quadrature": quad,
             "rel_discrepancy": rel}]
    if args.format == "json":
        text = dump_json({"schema_version": SCHEMA_VERSION, **rows[0]}) + "\n"
    else:
        text = write_csv(rows, list(rows[0]), [f"schema {SCHEMA_VERSION}"])
    _emit(text, args.out)
    return EXIT_OK if rel <= 1e-4 else EXIT_ERROR


def cmd_funk_hecke(args) -> int:
    cfg, _ = build_configs(args)
    if args.d < 2 or args.l_max < 0:
        raise UsageError("need d >= 2 and l-max >= 0")
    results = funk_hecke_lines(args.d, cfg, args.l_max)
    _emit(_render_checks(results, args.format), args.out)
    return EXIT_OK if all(ok for _, ok in results) else EXIT_ERROR


def cmd_symmetry_check(args) -> int:
    cfg, _ = build_configs(args)
    d = args.d
    if d < 2 or args.n < 1:
        raise UsageError("need d >= 2 and n >= 1")
    rng = np.random.default_rng(args.seed)
    f = gstar_params(d)
    worst = {"identity": 0.0, "inverse": 0.0, "composition": 0.0, "composite_inverse": 0.0,
             "pointwise": 0.0}
    xi = rng.normal(size=(16, d))
    for _ in range(args.n):
        S, T = random_symmetry(rng, d), random_symmetry(rng, d)
        for key, val in group_law_residuals(S, T, f, args.p_weight).items():
            worst[key] = max(worst[key], val)
        worst["pointwise"] = max(worst["pointwise"], symmetry_pointwise_oracle(S, f, xi, args.p_weight))
    results = [_line(f"group {k}", v, 1e-10) for k, v in worst.items()]
    if d in (2, 3):
        for xi0 in ((0.4,) + (0.0,) * (d - 1), (0.3, -0.2) + (0.0,) * (d - 2)):
            res = cone_measure_invariance_check(Boost(xi0), d, "bump_axis", args.p_weight)
            results.append(_line(f"cone-measure boost {xi0}", res, 1e-6))
    _emit(_render_checks(results, args.format), args.out)
    return EXIT_OK if all(ok for _, ok in results) else EXIT_ERROR


# parser

def _add_common(sp, fmt_default="json", text=False):
    sp.add_argument("--tol-abs", type=float, default=None, help="absolute quadrature tolerance")
    sp.add_argument("--tol-rel", type=float, default=None, help="relative quadrature tolerance")
    formats = ("text", "csv", "json") if text else ("csv", "json")
    sp.add_argument("--format", choices=formats, default=fmt_default)
    sp.add_argument("--out", default=None, metavar="PATH")
    sp.add_argument("--config", default=None, metavar="PATH",
                    help=f"key=value file (default: ${CONFIG_ENV})")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="conewave", description="Euler-Lagrange diagnostics for exponential "
                 "candidates in sharp Fourier extension on the cone.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("verdict", help="critical point or certified failure for one (d, p)")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--p", type=str, required=True, help="exponent, e.g. 2.5 or 3/2")
    _add_common(sp)
    sp.set_defaults(func=cmd_verdict)

    sp = sub.add_parser("el-table", help="both EL sides per degree k")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--p", type=str, required=True)
    sp.add_argument("--k-min", type=int, default=0)
    sp.add_argument("--k-max", type=int, default=8)
    _add_common(sp, "csv")
    sp.set_defaults(func=cmd_el_table)

    sp = sub.add_parser("penrose-check", help="Penrose geometry and intertwining suite")
    sp.add_argument("--d", type=int, required=True)
    _add_common(sp, "text", text=True)
    sp.set_defaults(func=cmd_penrose_check)

    sp = sub.add_parser("watson", help="Bessel-product integral: closed form vs quadrature")
    sp.add_argument("--mu", type=float, required=True)
    sp.add_argument("--nu2", type=float, required=True)
    sp.add_argument("--lam", type=float, required=True)
    _add_common(sp, "csv")
    sp.set_defaults(func=cmd_watson)

    sp = sub.add_parser("funk-hecke", help="Funk-Hecke eigenvalues of the Penrose kernel")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--l-max", type=int, default=8)
    _add_common(sp, "text", text=True)
    sp.set_defaults(func=cmd_funk_hecke)

    sp = sub.add_parser("symmetry-check", help="group laws and cone-measure invariance")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--p-weight", type=float, default=2.0,
                    help="L^p normalization used by dilations and expansions")
    _add_common(sp, "text", text=True)
    sp.set_defaults(func=cmd_symmetry_check)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"conewave: usage error: {exc}\n")
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - reported, nonzero exit
        sys.stderr.write(f"conewave: error: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
