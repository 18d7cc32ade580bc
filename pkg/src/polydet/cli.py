"""Command-line interface: config parsing, result serialization, verifications.

Commands
  torus-det          assemble log(det/Area) for a genus-1 spec
  genus-det          assemble the genus >= 2 value (moduli constant symbolic)
  cone-coeffs        angle coefficients I, Itilde, primitive, d for one angle
  verify-asymptotics fit-vs-closed-form cross check of the cone coefficients
  verify-variation   finite-difference check of the variational identity
  theta-eval         evaluate the genus-1 theta series
  pack-validate      integrity checks of a surface-pack file

Angles may be given as plain numbers or as exact multiples of pi in the
string form "3pi/2". Every emitted number carries the tolerance used to
produce it; outputs are deterministic for a fixed config (fixed node sets,
no wall-clock content). Exit codes: 0 success, 2 schema/domain violation,
3 numerical non-convergence, 4 failed verification. The environment
variable POLYDET_THREADS caps internal parallelism.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .cone import (coefficient_I, coefficient_I_numeric, coefficient_Itilde,
                   coefficient_d, itilde_primitive)
from .errors import (ConvergenceError, DomainError, PolydetError, SchemaError,
                     VerificationError)
from .highergenus import (HigherGenusMetricSpec, SurfacePack, higher_genus_log_det,
                          load_bundled_pack, q_bilinear)
from .special import (HALF_HALF, ThetaCharacteristic, fay_sigma, jacobi_theta,
                      prime_form, riemann_theta)
from .torus import TorusMetricSpec, torus_area, torus_c0, torus_log_det
from .variation import (AngleVariation, PointVariation, ScaleVariation,
                        verify_variation)

_ANGLE_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)?\s*pi\s*(?:/\s*(\d+))?\s*$", re.IGNORECASE)


def parse_angle(text) -> float:
    """Parse an angle: a float, or an exact multiple of pi like '3pi/2'."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _ANGLE_RE.match(text)
    if m:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise SchemaError(f"cannot parse angle {text!r}") from None


def parse_complex(value) -> complex:
    """Parse [re, im] pairs or strings like '0.5+0.866i'."""
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace("i", "j").replace(" ", ""))
        except ValueError:
            raise SchemaError(f"cannot parse complex number {value!r}") from None
    raise SchemaError(f"cannot parse complex number {value!r}")


@dataclass(frozen=True)
class JobConfig:
    """Validated, normalized job description (used for round-trip stability)."""

    command: str
    payload: dict

    def normalized(self) -> dict:
        return {"command": self.command, **self.payload}

    def serialize(self) -> str:
        return json.dumps(self.normalized(), indent=1, sort_keys=True) + "\n"


def parse_torus_config(doc: dict) -> tuple[TorusMetricSpec, JobConfig]:
    if "torus" not in doc:
        raise SchemaError("config needs a 'torus' section")
    sec = doc["torus"]
    try:
        modulus = parse_complex(sec["modulus"])
        points = tuple((parse_complex(p), float(b)) for p, b in sec.get("points", []))
        scale = float(sec.get("scale", 1.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad torus config: {exc}") from None
    spec = TorusMetricSpec(modulus, points, scale)
    payload = {"torus": {
        "modulus": [spec.modulus.real, spec.modulus.imag],
        "points": [[[p.real, p.imag], b] for p, b in spec.points],
        "scale": spec.scale,
    }}
    for key in ("area", "area_tol"):
        if key in sec:
            payload["torus"][key] = sec[key]
    return spec, JobConfig("torus-det", payload)


def parse_genus_config(doc: dict) -> tuple[HigherGenusMetricSpec, JobConfig]:
    if "surface" not in doc:
        raise SchemaError("config needs a 'surface' section")
    sec = doc["surface"]
    pack = SurfacePack.from_file(sec["pack"]) if "pack" in sec else load_bundled_pack()
    try:
        divisor = tuple((str(h), float(b)) for h, b in sec["divisor"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad surface config: {exc}") from None
    spec = HigherGenusMetricSpec(
        pack, divisor, float(sec.get("scale", 1.0)),
        p0=sec.get("p0"), p1=sec.get("p1"),
        x_tuple=tuple(sec["x_tuple"]) if "x_tuple" in sec else None)
    payload = {"surface": {
        "pack": sec.get("pack", "<bundled>"),
        "divisor": [[h, b] for h, b in spec.divisor],
        "scale": spec.scale, "p0": spec.p0, "p1": spec.p1,
        "x_tuple": list(spec.x_tuple),
    }}
    return spec, JobConfig("genus-det", payload)


# ---------------------------------------------------------------------------
# result document
# ---------------------------------------------------------------------------

@dataclass
class ResultDoc:
    command: str
    rows: list          # (key, value, tolerance)
    notes: list

    def render(self, fmt: str) -> str:
        header = [f"polydet {__version__}", f"command: {self.command}"]
        header += [str(n) for n in self.notes]
        if fmt == "csv":
            out = [f"# {h}" for h in header]
            out.append("key,value,tolerance")
            for key, value, tol in self.rows:
                out.append(f"{key},{value!r},{tol}")
            return "\n".join(out) + "\n"
        if fmt == "doc":
            out = [f"# {h}" for h in header]
            width = max((len(k) for k, *_ in self.rows), default=0)
            for key, value, tol in self.rows:
                out.append(f"{key:<{width}} = {value!r}   [tol={tol}]")
            return "\n".join(out) + "\n"
        raise SchemaError(f"unknown output format {fmt!r}")


def _emit(doc: ResultDoc, args) -> None:
    text = doc.render(args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_config(args) -> dict:
    if not args.config:
        raise SchemaError("this command requires --config PATH")
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read config: {exc}") from None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_torus_det(args) -> ResultDoc:
    doc = _load_config(args)
    spec, _ = parse_torus_config(doc)
    want_area = bool(doc["torus"].get("area", False)) or args.area
    area_tol = float(doc["torus"].get("area_tol", 1e-8))
    res = torus_log_det(spec, include_area=want_area, area_tol=area_tol)
    rows = [
        ("log_det_over_area", res.log_det_over_area, 1e-12),
        ("pair_functional_D", res.D, 1e-12),
        ("sum_log_d2", res.sum_log_d2, 1e-12),
        ("scaling_term", res.scaling_term, 1e-12),
        ("c0", res.c0, 1e-13),
    ]
    if want_area:
        rows.append(("area", res.area, area_tol))
        rows.append(("log_det", res.log_det, area_tol))
    return ResultDoc("torus-det", rows, [f"points: {len(spec.points)}"])


def _cmd_genus_det(args) -> ResultDoc:
    doc = _load_config(args)
    spec, _ = parse_genus_config(doc)
    res = higher_genus_log_det(spec)
    rows = [
        ("log_det_over_area_minus_log_c0", res.log_det_over_area, 1e-10),
        ("pair_functional_D", res.D, 1e-10),
        ("sum_log_d2", res.sum_log_d2, 1e-11),
        ("scaling_term", res.scaling_term, 1e-14),
        ("c0", "symbolic", 0.0),
    ]
    return ResultDoc("genus-det", rows,
                     [f"genus: {spec.pack.genus}", "moduli constant left symbolic"])


def _cmd_cone_coeffs(args) -> ResultDoc:
    beta = parse_angle(args.beta)
    rows = [
        ("beta", beta, 0.0),
        ("I", coefficient_I(beta), 1e-15),
        ("Itilde", coefficient_Itilde(beta), 1e-11),
        ("Itilde_primitive", itilde_primitive(beta), 1e-11),
        ("d", coefficient_d(beta), 1e-10),
    ]
    if args.torus_theta_abs is not None:
        rows.append(("d_torus",
                     coefficient_d(beta, torus_mode=True,
                                   theta_prime_abs=float(args.torus_theta_abs)), 1e-10))
    return ResultDoc("cone-coeffs", rows, [])


def _cmd_verify_asymptotics(args) -> ResultDoc:
    beta = parse_angle(args.beta)
    mus = tuple(float(tok) for tok in args.mu_list.split(","))
    fit = coefficient_I_numeric(beta, mus, eps=float(args.eps))
    i_err = abs(fit.I_estimate - coefficient_I(beta))
    it_err = abs(fit.Itilde_estimate - coefficient_Itilde(beta))
    rows = [
        ("I_estimate", fit.I_estimate, args.tol),
        ("I_closed_form", coefficient_I(beta), 0.0),
        ("I_abs_error", i_err, args.tol),
        ("Itilde_estimate", fit.Itilde_estimate, args.tol_itilde),
        ("Itilde_closed_form", coefficient_Itilde(beta), 1e-11),
        ("Itilde_abs_error", it_err, args.tol_itilde),
        ("log_slope", fit.log_slope, args.tol),
        ("expected_log_slope", fit.expected_log_slope, 0.0),
        ("slope_abs_error", fit.slope_residual, args.tol),
    ]
    for rec in fit.records:
        rows.append((f"moment_plain@mu={rec.mu}", rec.plain_moment, 1e-11))
        rows.append((f"moment_log@mu={rec.mu}", rec.log_moment, 1e-11))
    doc = ResultDoc("verify-asymptotics", rows,
                    [f"mu list: {mus}", f"eps: {args.eps}"])
    if i_err > args.tol or it_err > args.tol_itilde or fit.slope_residual > args.tol:
        raise VerificationError(
            f"asymptotic fit outside tolerance (I {i_err:.2e}, Itilde {it_err:.2e}, "
            f"slope {fit.slope_residual:.2e})", doc)
    return doc


def _parse_tau(text: str):
    text = text.strip()
    if text in ("C", "scale"):
        return ScaleVariation()
    m = re.match(r"^P(\d+)\.(re|im)$", text)
    if m:
        return PointVariation(int(m.group(1)) - 1, m.group(2))
    m = re.match(r"^beta(\d+)(?::(\d+))?$", text)
    if m:
        idx = int(m.group(1)) - 1
        comp = int(m.group(2)) - 1 if m.group(2) else (1 if idx == 0 else 0)
        return AngleVariation(idx, comp)
    raise SchemaError(f"cannot parse variation parameter {text!r} "
                      "(use C, P<k>.re, P<k>.im, or beta<k>[:<compensator>])")


def _cmd_verify_variation(args) -> ResultDoc:
    doc = _load_config(args)
    spec, _ = parse_torus_config(doc)
    tau = _parse_tau(args.tau)
    rep = verify_variation(spec, tau, step=float(args.step))
    rows = [
        ("tau", rep.tag, 0.0),
        ("lhs_finite_difference", rep.lhs, float(args.step) ** 2),
        ("rhs_analytic", rep.rhs, 1e-12),
        ("residual", rep.residual, args.tol),
    ]
    out = ResultDoc("verify-variation", rows, [f"step: {args.step}"])
    if rep.residual > args.tol:
        raise VerificationError(
            f"variational identity residual {rep.residual:.3e} > {args.tol}", out)
    return out


def _cmd_theta_eval(args) -> ResultDoc:
    z = parse_complex(args.z)
    modulus = parse_complex(args.modulus)
    if args.char:
        a_str, b_str = args.char.split(";")
        char = ThetaCharacteristic(tuple(float(v) for v in a_str.split(",")),
                                   tuple(float(v) for v in b_str.split(",")))
    else:
        char = HALF_HALF
    val = jacobi_theta(char, z, modulus, tol=args.tol or 1e-13)
    return ResultDoc("theta-eval", [
        ("re", val.real, args.tol or 1e-13),
        ("im", val.imag, args.tol or 1e-13),
    ], [f"char: {char.a};{char.b}"])


def _cmd_pack_validate(args) -> ResultDoc:
    pack = SurfacePack.from_file(args.pack) if args.pack else load_bundled_pack()
    rows = []
    failures = []

    def check(name, value, tol):
        rows.append((name, value, tol))
        if not value <= tol:
            failures.append(name)

    handles = sorted(pack.points)
    g = pack.genus
    zero = ThetaCharacteristic((0.0,) * g, (0.0,) * g)
    theta0 = abs(riemann_theta(np.zeros(g), pack.period, pack.odd_char))
    check("odd_theta_at_zero", theta0, 1e-10)
    worst = 0.0
    for h in handles:
        val = abs(riemann_theta(pack.abel(h) + pack.riemann_constant_base,
                                pack.period, zero))
        worst = max(worst, val)
    check("riemann_vanishing_max", worst, 1e-10)
    anti = 0.0
    diag = 0.0
    for h1 in handles[:4]:
        diag = max(diag, abs(prime_form(pack, h1, h1)))
        for h2 in handles[:4]:
            if h1 < h2:
                anti = max(anti, abs(prime_form(pack, h1, h2)
                                     + prime_form(pack, h2, h1)))
    check("prime_form_diagonal_max", diag, 1e-12)
    check("prime_form_antisymmetry_max", anti, 1e-12)
    if len(pack.x_tuples) >= 2:
        s1 = fay_sigma(pack, handles[0], pack.p0_default, pack.x_tuples[0])
        s2 = fay_sigma(pack, handles[0], pack.p0_default, pack.x_tuples[1])
        check("sigma_tuple_invariance", abs(s1 - s2) / abs(s1), 1e-8)
    zref = next(h for h in handles
                if h not in (pack.p0_default, pack.p1_default))
    m1 = (fay_sigma(pack, zref, pack.p0_default, pack.x_tuples[0])
          * fay_sigma(pack, pack.p0_default, pack.p1_default, pack.x_tuples[0]))
    m2 = fay_sigma(pack, zref, pack.p1_default, pack.x_tuples[0])
    check("sigma_multiplication_law", abs(m1 - m2) / abs(m2), 1e-8)
    q12 = q_bilinear(pack, handles[0], handles[1])
    q21 = q_bilinear(pack, handles[1], handles[0])
    check("q_symmetry", abs(q12 - q21), 1e-12)
    doc = ResultDoc("pack-validate", rows, [f"points: {len(handles)}", f"genus: {g}"])
    if failures:
        raise VerificationError(f"pack checks failed: {', '.join(failures)}", doc)
    return doc


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="polydet", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "doc"), default="doc")
        p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("torus-det", help="genus-1 determinant assembly")
    p.add_argument("--config", required=True)
    p.add_argument("--area", action="store_true", help="also integrate the area")
    common(p)
    p.set_defaults(fn=_cmd_torus_det)

    p = sub.add_parser("genus-det", help="genus >= 2 determinant assembly")
    p.add_argument("--config", required=True)
    common(p)
    p.set_defaults(fn=_cmd_genus_det)

    p = sub.add_parser("cone-coeffs", help="angle coefficients for one cone angle")
    p.add_argument("--beta", required=True, help="angle (e.g. 3pi/2 or 4.71)")
    p.add_argument("--torus-theta-abs", default=None)
    common(p)
    p.set_defaults(fn=_cmd_cone_coeffs)

    p = sub.add_parser("verify-asymptotics", help="fit-vs-closed-form cross check")
    p.add_argument("--beta", required=True)
    p.add_argument("--mu-list", default="-100,-200,-400")
    p.add_argument("--eps", default="0.5")
    p.add_argument("--tol-itilde", type=float, default=1e-3)
    common(p)
    p.set_defaults(fn=_cmd_verify_asymptotics, default_tol=1e-4)

    p = sub.add_parser("verify-variation", help="finite-difference identity check")
    p.add_argument("--config", required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--step", default="1e-5")
    common(p)
    p.set_defaults(fn=_cmd_verify_variation, default_tol=1e-5)

    p = sub.add_parser("theta-eval", help="evaluate the genus-1 theta series")
    p.add_argument("--z", required=True)
    p.add_argument("--modulus", required=True)
    p.add_argument("--char", default=None, help="a1,..;b1,.. (default 0.5;0.5)")
    common(p)
    p.set_defaults(fn=_cmd_theta_eval)

    p = sub.add_parser("pack-validate", help="surface-pack integrity checks")
    p.add_argument("pack", nargs="?", default=None)
    common(p)
    p.set_defaults(fn=_cmd_pack_validate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.tol is not None and not args.tol > 0:
        print("polydet: invalid input: tolerances must be positive", file=sys.stderr)
        return 2
    if args.tol is None:
        args.tol = getattr(args, "default_tol", 1e-10)
    if getattr(args, "tol_itilde", 1.0) <= 0 or float(getattr(args, "eps", 1.0)) <= 0:
        print("polydet: invalid input: tolerances must be positive", file=sys.stderr)
        return 2
    try:
        doc = args.fn(args)
    except VerificationError as exc:
        if exc.args and len(exc.args) > 1 and isinstance(exc.args[1], ResultDoc):
            _emit(exc.args[1], args)
        print(f"polydet: verification failed: {exc.args[0]}", file=sys.stderr)
        return 4
    except (SchemaError, DomainError) as exc:
        print(f"polydet: invalid input: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"polydet: numerical non-convergence: {exc}", file=sys.stderr)
        return 3
    except PolydetError as exc:
        print(f"polydet: {exc}", file=sys.stderr)
        return 3
    _emit(doc, args)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
