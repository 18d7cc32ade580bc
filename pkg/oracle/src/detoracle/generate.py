"""Golden-vector and surface-pack generator.

Every value is produced by a reference route independent of the consumer
package (direct series, image-sum closed forms, brute-force lattice sums,
mpmath quadrature) at fixed working precision, and emitted as a decimal
string with 31 significant digits. Re-running the generator reproduces the
files byte for byte; regenerate only when the catalog itself changes, and
treat any diff in existing values as a regression to investigate, not to
commit.

Usage:
    python -m detoracle.generate --out-dir ../src/polydet/data
    python -m detoracle.generate --only macdonald_k0 --print
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import mpmath as mp

from . import curve as curve_mod
from . import highprec as hp

GOLDEN_SCHEMA = "polydet-golden/1"
PACK_SCHEMA = "polydet-surface-pack/1"
DIGITS = 31
DEFAULT_DPS = 40

CANONICAL_TORUS = {
    "B": mp.mpc(0, 1),
    "points": ((mp.mpf("0.2"), mp.mpf("0.5")),
               (mp.mpc("0.7", "0.3"), mp.mpf("-0.5"))),
    "scale": mp.mpf(1),
}
PACK_DIVISOR = (("P1", mp.mpf(1)), ("P2", mp.mpf(1)))


def _s(x) -> str:
    return mp.nstr(mp.mpf(x), DIGITS, strip_zeros=False)


def _entry(value, note: str) -> dict:
    value = mp.mpc(value)
    return {"re": _s(mp.re(value)), "im": _s(mp.im(value)), "note": note}


def _theta_half_series(z, b_mod, terms: int = 200):
    """Direct 200-term characteristic series, the documented oracle route."""
    half = mp.mpf(1) / 2
    total = mp.mpf(0)
    for n in range(-terms // 2, terms // 2):
        m = n + half
        total += mp.exp(1j * mp.pi * b_mod * m * m + 2j * mp.pi * m * (z + half))
    ref = hp.jacobi_theta_half(z, b_mod)
    assert abs(total - ref) < mp.mpf(10) ** (-(mp.mp.dps - 8)) * max(1, abs(ref))
    return total


class _PackEvaluator:
    """Potential / pair-functional formulas evaluated on the exact curve data."""

    def __init__(self, surf: curve_mod.Genus2Surface):
        self.surf = surf
        self.p0, self.p1 = "p0", "p1"
        self.xs = curve_mod.X_TUPLES[0]
        self.divisor = PACK_DIVISOR

    def x_of(self, handle: str):
        return mp.mpf(curve_mod.POINT_XS[handle])

    def sigma(self, handle: str, p0: str | None = None):
        return self.surf.fay_sigma(self.x_of(handle), self.x_of(p0 or self.p0),
                                   [self.x_of(h) for h in self.xs])

    def E(self, h1: str, h2: str):
        return self.surf.prime_form(self.x_of(h1), self.x_of(h2))

    def Q(self, h1: str, h2: str):
        return self.surf.q_bilinear(self.x_of(h1), self.x_of(h2))

    def phi(self, z: str, scale=mp.mpf(1)):
        total = -mp.log(scale)
        for h, b in self.divisor:
            ratio = 2 * (mp.log(abs(self.E(z, h))) - mp.log(abs(self.E(self.p1, h))))
            total -= b * (ratio + self.Q(z, h))
        total -= 4 * mp.log(abs(self.sigma(z)))
        return total

    def u_j(self, j_handle: str, z: str, scale=mp.mpf(1)):
        b_j = dict(self.divisor)[j_handle]
        total = -mp.log(scale) + mp.mpc(0)
        for h, b in self.divisor:
            total -= b * (self.Q(z, h) + 2 * mp.log(self.E(z, h) / self.E(self.p1, h)))
        total += 2 * b_j * mp.log(self.x_of(z) - self.x_of(j_handle))
        total -= 4 * mp.log(self.sigma(z))
        return total

    def D(self):
        handles = [h for h, _ in self.divisor]
        wts = [b for _, b in self.divisor]
        betas = [2 * mp.pi * (1 + b) for b in wts]
        pair = mp.mpf(0)
        for i in range(len(handles)):
            for j in range(i + 1, len(handles)):
                pair += (wts[i] * wts[j] * (1 / betas[i] + 1 / betas[j])
                         * 2 * mp.log(abs(self.E(handles[i], handles[j]))))
        qpart = mp.mpf(0)
        for i in range(len(handles)):
            for j in range(len(handles)):
                qpart += (wts[i] * wts[j] * (1 / betas[i] + 1 / betas[j])
                          * self.Q(handles[i], handles[j]))
        total = mp.pi / 6 * (pair + qpart / 2)
        i_sum = mp.fsum(hp.coefficient_I(b) for b in betas)
        for i, h in enumerate(handles):
            total += i_sum * wts[i] * 2 * mp.log(abs(self.E(self.p1, h)))
            total -= (2 * mp.pi * wts[i] ** 2 / (3 * betas[i])) \
                * mp.log(abs(self.sigma(h)))
        return total


def _catalog(surf_factory):
    """key -> (callable, provenance note); surface built lazily and shared."""
    cache = {}

    def surf():
        if "s" not in cache:
            cache["s"] = surf_factory()
        return cache["s"]

    def pack_eval():
        if "e" not in cache:
            cache["e"] = _PackEvaluator(surf())
        return cache["e"]

    ct = CANONICAL_TORUS
    cat = {
        "jacobi_theta_half@z=0.3+0.1i;B=1i":
            (lambda: _theta_half_series(mp.mpc("0.3", "0.1"), mp.mpc(0, 1)),
             "200-term direct characteristic series, checked against jtheta"),
        "jacobi_theta_half@z=0.17-0.06i;B=0.4+1.3i":
            (lambda: _theta_half_series(mp.mpc("0.17", "-0.06"), mp.mpc("0.4", "1.3")),
             "200-term direct characteristic series, checked against jtheta"),
        "jacobi_theta_half_zderiv0@B=1i":
            (lambda: hp.jacobi_theta_half_zderiv(0, mp.mpc(0, 1)),
             "termwise z-derivative via jtheta"),
        "dedekind_eta@B=1i":
            (lambda: hp.dedekind_eta(mp.mpc(0, 1)), "500-factor q-product"),
        "dedekind_eta@B=0.3+1.7i":
            (lambda: hp.dedekind_eta(mp.mpc("0.3", "1.7")), "500-factor q-product"),
        "macdonald_k0@w=1":
            (lambda: hp.macdonald_k0(mp.mpf(1)), "cosh-integral quadrature vs besselk"),
        "macdonald_k0@w=6.3":
            (lambda: hp.macdonald_k0(mp.mpf("6.3")), "cosh-integral quadrature vs besselk"),
        "macdonald_k0@w=3+4i":
            (lambda: hp.macdonald_k0(mp.mpc(3, 4)), "cosh-integral quadrature vs besselk"),
        "macdonald_k0@w=0.5+9i":
            (lambda: hp.macdonald_k0(mp.mpc("0.5", 9)), "cosh-integral quadrature vs besselk"),
        "macdonald_k0@w=17":
            (lambda: hp.macdonald_k0(mp.mpf(17)), "cosh-integral quadrature vs besselk"),
        "a_mu@beta=pi;r=1;mu=-100":
            (lambda: hp.a_mu_images_pi(mp.mpf(1), mp.mpf(-100)),
             "method of images, two-term reflection"),
        "a_mu@beta=pi/2;r=0.7;mu=-60":
            (lambda: hp.a_mu_images_half_pi(mp.mpf("0.7"), mp.mpf(-60)),
             "method of images, four sheets with boundary pair at half weight"),
        "cone_heat@beta=pi;t=0.1;r=1;rp=1;dphi=0":
            (lambda: hp.cone_heat_images_pi(mp.mpf("0.1"), mp.mpf(1), mp.mpf(1), mp.mpf(0)),
             "image-sum closed form"),
        "cone_heat@beta=2pi;t=0.2;r=0.9;rp=1.1;dphi=0.7":
            (lambda: hp.cone_heat_plane(mp.mpf("0.2"), mp.mpf("0.9"), mp.mpf("1.1"),
                                        mp.mpf("0.7")),
             "plane Gaussian"),
        "coefficient_Itilde@beta=3pi":
            (lambda: hp.coefficient_Itilde(3 * mp.pi),
             "contour constant term, extended precision"),
        "coefficient_Itilde@beta=2.2":
            (lambda: hp.coefficient_Itilde(mp.mpf("2.2")),
             "contour constant term, extended precision"),
        "hadamard_coth@beta=2pi;split=1":
            (lambda: hp.hadamard_coth_integral(2 * mp.pi),
             "pinned subtraction scheme, Bernoulli small-l series"),
        "hadamard_coth@beta=3pi;split=1":
            (lambda: hp.hadamard_coth_integral(3 * mp.pi),
             "pinned subtraction scheme, Bernoulli small-l series"),
        "itilde_primitive@beta=4pi":
            (lambda: hp.itilde_primitive(4 * mp.pi),
             "quadrature of the contour constant over [2pi, 4pi]"),
        "coefficient_d@beta=4pi":
            (lambda: hp.coefficient_d(4 * mp.pi),
             "recomputed from the Itilde primitive"),
        "torus_phi@canonical;z=0.5":
            (lambda: hp.torus_phi(ct["B"], ct["points"], ct["scale"], mp.mpf("0.5")),
             "doubly periodic potential via jtheta"),
        "torus_D@canonical":
            (lambda: hp.torus_D(ct["B"], ct["points"]),
             "pair functional via jtheta"),
        "torus_c0@B=2i":
            (lambda: hp.torus_c0(mp.mpc(0, 2)), "Im B |eta|^4, 500-factor product"),
        "torus_log_det@canonical":
            (lambda: hp.torus_log_det(ct["B"], ct["points"], ct["scale"]),
             "full genus-1 assembly, extended precision"),
        "riemann_theta_g2@pack;z=0.11+0.07i,-0.2+0.31i":
            (lambda: surf().theta([mp.mpc("0.11", "0.07"), mp.mpc("-0.2", "0.31")]),
             "brute-force genus-2 lattice sum"),
        "q_bilinear@pack;P1,P2":
            (lambda: pack_eval().Q("P1", "P2"), "high-precision matrix arithmetic"),
        "prime_form@pack;P1,P2":
            (lambda: pack_eval().E("P1", "P2"), "odd theta over half-order denominators"),
        "phi_potential@pack;z":
            (lambda: pack_eval().phi("z"), "potential on the bundled divisor b=(1,1)"),
        "u_j_real@pack;j=P1;z=q1":
            (lambda: mp.re(pack_eval().u_j("P1", "q1")),
             "real part of the holomorphic completion (imaginary part is branch-dependent)"),
        "higher_genus_D@pack":
            (lambda: pack_eval().D(), "pair functional on the bundled divisor"),
    }
    return cat


def generate_golden(dps: int = DEFAULT_DPS, only: list[str] | None = None) -> dict:
    old = mp.mp.dps
    mp.mp.dps = dps
    try:
        cat = _catalog(curve_mod.Genus2Surface)
        values = {}
        for key in sorted(cat):
            if only and not any(frag in key for frag in only):
                continue
            fn, note = cat[key]
            values[key] = _entry(fn(), note)
        return {"schema": GOLDEN_SCHEMA, "dps": dps, "digits": DIGITS, "values": values}
    finally:
        mp.mp.dps = old


def generate_pack(dps: int = DEFAULT_DPS) -> dict:
    old = mp.mp.dps
    mp.mp.dps = dps
    try:
        surf = curve_mod.Genus2Surface()
        xs_sorted = sorted(curve_mod.POINT_XS)
        worst = surf.check_riemann_vanishing(
            [mp.mpf(curve_mod.POINT_XS[h]) for h in xs_sorted])
        assert worst < mp.mpf(10) ** (-(dps - 12)), f"vanishing check failed: {worst}"

        def pair(x):
            return [float(mp.re(x)), float(mp.im(x))]

        points = {}
        for handle in xs_sorted:
            x = mp.mpf(curve_mod.POINT_XS[handle])
            ab = surf.abel(x)
            h_val = surf.h_delta(x)
            charts = {"x": {"coord": pair(x), "h_delta": pair(h_val)}}
            if handle == curve_mod.ALT_CHART_POINT:
                f_prime = mp.mpf(curve_mod.ALT_CHART_DERIV)
                charts["alt"] = {
                    "coord": pair(mp.mpf(0)),
                    "h_delta": pair(h_val / mp.sqrt(f_prime)),
                    "dcoord_dprimary": pair(f_prime),
                }
            points[handle] = {
                "abel": [pair(ab[0]), pair(ab[1])],
                "default_chart": "x",
                "charts": charts,
            }
        doc = {
            "schema": PACK_SCHEMA,
            "genus": 2,
            "period_matrix": [[pair(surf.period[i, j]) for j in range(2)]
                              for i in range(2)],
            "odd_char": {"a": [0.0, 0.5], "b": [0.0, 0.5]},
            "riemann_constant": [pair(surf.k_base[0]), pair(surf.k_base[1])],
            "points": points,
            "basepoints": {"p0": "p0", "p1": "p1"},
            "x_tuples": [list(t) for t in curve_mod.X_TUPLES],
            "provenance": (
                "hyperelliptic curve y^2 = x(x-1)(x-2)(x-3)(x-4); upper-rim paths "
                "from basepoint x=0; a-cycles around [0,1] and [2,3]; constant "
                f"vector at half-characteristic m={curve_mod.K_CHAR[0]} "
                f"n={curve_mod.K_CHAR[1]}, pinned by Riemann vanishing; "
                f"generated at dps={dps}"),
        }
        return doc
    finally:
        mp.mp.dps = old


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out-dir", type=Path, default=None,
                    help="write golden.json and genus2_pack.json here")
    ap.add_argument("--dps", type=int, default=DEFAULT_DPS)
    ap.add_argument("--only", action="append", default=None,
                    help="restrict golden keys to those containing this fragment")
    ap.add_argument("--skip-pack", action="store_true")
    ap.add_argument("--print", dest="do_print", action="store_true")
    args = ap.parse_args(argv)

    golden = generate_golden(args.dps, args.only)
    pack = None if args.skip_pack else generate_pack(args.dps)
    if args.do_print or args.out_dir is None:
        sys.stdout.write(dumps(golden))
        return 0
    args.out_dir.mkdir(parents=True, exist_ok=True)
    (args.out_dir / "golden.json").write_text(dumps(golden), encoding="utf-8")
    if pack is not None:
        (args.out_dir / "genus2_pack.json").write_text(dumps(pack), encoding="utf-8")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
