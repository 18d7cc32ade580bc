"""Oracle acceptance: byte-identical regeneration, precision-doubling stability.

The full catalog takes ~half a minute, so the determinism check regenerates
a representative subset twice and also verifies those entries byte for byte
against the checked-in golden file. The doubling check recomputes fast keys
at twice the working precision and requires agreement beyond the emitted
digit count; for the curve machinery it covers the period matrix, the
constant vector, and one Abel value.
"""

import json
from pathlib import Path

import mpmath as mp
import pytest

from detoracle import curve as curve_mod
from detoracle import generate

DATA_DIR = Path(__file__).resolve().parents[2] / "src" / "polydet" / "data"

FAST_KEYS = ["jacobi_theta_half", "dedekind_eta", "macdonald_k0", "a_mu",
             "cone_heat", "coefficient_Itilde", "torus_phi@", "torus_D@",
             "torus_c0", "hadamard_coth"]


def _values(doc):
    return {k: (v["re"], v["im"]) for k, v in doc["values"].items()}


class TestDeterminism:
    def test_subset_regeneration_is_byte_identical(self):
        d1 = generate.dumps(generate.generate_golden(only=FAST_KEYS))
        d2 = generate.dumps(generate.generate_golden(only=FAST_KEYS))
        assert d1 == d2

    def test_matches_checked_in_golden(self):
        checked = json.loads((DATA_DIR / "golden.json").read_text())
        regen = generate.generate_golden(only=FAST_KEYS)
        checked_vals = _values(checked)
        for key, pair in _values(regen).items():
            assert checked_vals[key] == pair, key

    def test_pack_regeneration_is_byte_identical(self):
        p1 = generate.dumps(generate.generate_pack())
        p2 = generate.dumps(generate.generate_pack())
        assert p1 == p2
        checked = (DATA_DIR / "genus2_pack.json").read_text()
        assert p1 == checked


class TestPrecisionDoubling:
    def test_scalar_keys_stable_to_emitted_digits(self):
        base = _values(generate.generate_golden(dps=generate.DEFAULT_DPS,
                                                only=FAST_KEYS))
        doubled = _values(generate.generate_golden(dps=2 * generate.DEFAULT_DPS,
                                                   only=FAST_KEYS))
        for key in base:
            for lo, hi in zip(base[key], doubled[key]):
                a, b = mp.mpf(lo), mp.mpf(hi)
                scale = max(abs(a), abs(b), mp.mpf("1e-30"))
                assert abs(a - b) / scale < mp.mpf("1e-29"), (key, lo, hi)

    def test_curve_quantities_stable(self):
        vals = {}
        for dps in (generate.DEFAULT_DPS, 2 * generate.DEFAULT_DPS):
            old = mp.mp.dps
            mp.mp.dps = dps
            try:
                surf = curve_mod.Genus2Surface()
                ab = surf.abel(mp.mpf("5.5"))
                vals[dps] = [surf.period[0, 0], surf.period[0, 1],
                             surf.period[1, 1], surf.k_base[0], surf.k_base[1],
                             ab[0], ab[1]]
            finally:
                mp.mp.dps = old
        lo, hi = vals[generate.DEFAULT_DPS], vals[2 * generate.DEFAULT_DPS]
        for a, b in zip(lo, hi):
            scale = max(abs(a), abs(b), mp.mpf("1e-30"))
            assert abs(a - b) / scale < mp.mpf("1e-31")


class TestIndependence:
    def test_oracle_does_not_import_the_consumer(self):
        import detoracle
        src = Path(detoracle.__file__).parent
        for py in src.glob("*.py"):
            text = py.read_text()
            assert "import polydet" not in text and "from polydet" not in text, py
