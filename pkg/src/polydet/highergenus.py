"""Genus >= 2 determinant engine on tabulated surface data.

The engine consumes a surface pack: a versioned JSON document carrying the
period matrix, an odd half-integer theta characteristic, and per-point
records (Abel-map value, half-order-differential denominator per chart,
chart coordinates). Packs are opaque inputs here; producing them from a
curve is a separate concern. The moduli constant of the assembly is left
symbolic for genus >= 2, so results are comparable only within a fixed
pack (differences, scalings, transformation laws).

Pack schema (polydet-surface-pack/1), field by field:

  schema            "polydet-surface-pack/1"
  genus             integer g >= 2
  period_matrix     g x g array of [re, im] pairs; symmetric, Im positive definite
  odd_char          {"a": [g rationals], "b": [g rationals]}, odd half-integer
  riemann_constant  length-g array of [re, im]: the constant vector at the
                    pack basepoint (Abel-map origin)
  points            {handle: {"abel": g x [re, im],
                              "default_chart": label,
                              "charts": {label: {"coord": [re, im],
                                                 "h_delta": [re, im],
                                                 "dcoord_dprimary": [re, im] (optional)}}}}
  basepoints        {"p0": handle, "p1": handle}
  x_tuples          list of g-tuples of handles (auxiliary points for sigma)
  provenance        free-form generation note

All complex numbers are [re, im] pairs. Abel values are lifts along fixed
paths from a common basepoint; every identity evaluated here uses those
fixed lifts consistently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

from .cone import TWO_PI, coefficient_I, coefficient_d
from .errors import DomainError, SchemaError
from .special import PeriodMatrix, ThetaCharacteristic, fay_sigma, prime_form
from .torus import DetResult

PACK_SCHEMA = "polydet-surface-pack/1"
GAUSS_BONNET_TOL = 1e-14


def _cx(pair) -> complex:
    if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
        raise SchemaError(f"expected [re, im] pair, got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def _cvec(rows) -> np.ndarray:
    return np.array([_cx(r) for r in rows], dtype=complex)


@dataclass(frozen=True)
class Chart:
    coord: complex
    h_delta: complex
    dcoord_dprimary: complex | None = None


@dataclass(frozen=True)
class PackPoint:
    abel: np.ndarray
    default_chart: str
    charts: Mapping[str, Chart]


@dataclass(frozen=True)
class SurfacePack:
    genus: int
    period: PeriodMatrix
    odd_char: ThetaCharacteristic
    riemann_constant_base: np.ndarray
    points: Mapping[str, PackPoint]
    p0_default: str
    p1_default: str
    x_tuples: tuple
    provenance: str = ""

    def __post_init__(self):
        if self.genus < 2:
            raise SchemaError("surface packs are for genus >= 2")
        if not self.odd_char.is_odd_half_integer:
            raise SchemaError("pack characteristic must be an odd half-integer one")
        for handle in (self.p0_default, self.p1_default):
            if handle not in self.points:
                raise SchemaError(f"basepoint handle {handle!r} not in pack")
        for tup in self.x_tuples:
            if len(tup) != self.genus or any(h not in self.points for h in tup):
                raise SchemaError(f"bad auxiliary tuple {tup!r}")

    def _point(self, handle: str) -> PackPoint:
        try:
            return self.points[handle]
        except KeyError:
            raise SchemaError(f"point handle {handle!r} not in pack") from None

    def abel(self, handle: str) -> np.ndarray:
        return self._point(handle).abel

    def chart(self, handle: str, chart: str | None = None) -> Chart:
        pt = self._point(handle)
        label = chart or pt.default_chart
        try:
            return pt.charts[label]
        except KeyError:
            raise SchemaError(f"point {handle!r} has no chart {label!r}") from None

    def h_delta(self, handle: str, chart: str | None = None) -> complex:
        return self.chart(handle, chart).h_delta

    def chart_coord(self, handle: str, chart: str | None = None) -> complex:
        return self.chart(handle, chart).coord

    def chart_label(self, handle: str) -> str:
        return self._point(handle).default_chart

    def riemann_constant(self, handle: str) -> np.ndarray:
        return self.riemann_constant_base + (self.genus - 1) * self.abel(handle)

    @classmethod
    def from_dict(cls, doc: dict) -> "SurfacePack":
        if doc.get("schema") != PACK_SCHEMA:
            raise SchemaError(f"unsupported pack schema {doc.get('schema')!r}")
        try:
            genus = int(doc["genus"])
            period = PeriodMatrix(np.array(
                [[_cx(c) for c in row] for row in doc["period_matrix"]]))
            char = ThetaCharacteristic(tuple(doc["odd_char"]["a"]),
                                       tuple(doc["odd_char"]["b"]))
            kvec = _cvec(doc["riemann_constant"])
            points = {}
            for handle, rec in doc["points"].items():
                charts = {}
                for label, ch in rec["charts"].items():
                    charts[label] = Chart(
                        coord=_cx(ch["coord"]),
                        h_delta=_cx(ch["h_delta"]),
                        dcoord_dprimary=(_cx(ch["dcoord_dprimary"])
                                         if "dcoord_dprimary" in ch else None))
                abel = _cvec(rec["abel"])
                if abel.shape != (genus,) or kvec.shape != (genus,):
                    raise SchemaError("abel / riemann-constant vectors must have length g")
                points[handle] = PackPoint(abel=abel,
                                           default_chart=rec["default_chart"],
                                           charts=charts)
            return cls(genus=genus, period=period, odd_char=char,
                       riemann_constant_base=kvec, points=points,
                       p0_default=doc["basepoints"]["p0"],
                       p1_default=doc["basepoints"]["p1"],
                       x_tuples=tuple(tuple(t) for t in doc.get("x_tuples", [])),
                       provenance=doc.get("provenance", ""))
        except KeyError as exc:
            raise SchemaError(f"pack document missing field {exc}") from None

    @classmethod
    def from_file(cls, path) -> "SurfacePack":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def load_bundled_pack() -> SurfacePack:
    """The genus-2 pack shipped with the package (hermetic test data)."""
    text = resources.files("polydet").joinpath("data/genus2_pack.json").read_text()
    return SurfacePack.from_dict(json.loads(text))


@dataclass(frozen=True)
class HigherGenusMetricSpec:
    """Conical metric data on a packed surface: divisor, scaling, basepoints."""

    pack: SurfacePack
    divisor: tuple
    scale: float = 1.0
    p0: str | None = None
    p1: str | None = None
    x_tuple: tuple | None = None

    def __post_init__(self):
        div = tuple((str(h), float(b)) for h, b in self.divisor)
        handles = [h for h, _ in div]
        if len(set(handles)) != len(handles):
            raise DomainError("divisor points must be distinct")
        for h, b in div:
            self.pack._point(h)
            if b <= -1:
                raise DomainError(f"divisor weight must exceed -1, got {b}")
        total = math.fsum(b for _, b in div)
        target = 2 * self.pack.genus - 2
        if abs(total - target) > GAUSS_BONNET_TOL:
            raise DomainError(
                f"divisor weights must sum to {target}, got {total!r}")
        object.__setattr__(self, "divisor", div)
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise DomainError(f"scaling factor must be positive, got {self.scale}")
        object.__setattr__(self, "p0", self.p0 or self.pack.p0_default)
        object.__setattr__(self, "p1", self.p1 or self.pack.p1_default)
        if self.p1 in handles:
            raise SchemaError("p1 must not coincide with a divisor point")
        xt = self.x_tuple or (self.pack.x_tuples[0] if self.pack.x_tuples else None)
        if xt is None:
            raise SchemaError("pack provides no auxiliary x-tuple and none was given")
        object.__setattr__(self, "x_tuple", tuple(xt))

    @property
    def weights(self) -> tuple:
        return tuple(b for _, b in self.divisor)

    @property
    def handles(self) -> tuple:
        return tuple(h for h, _ in self.divisor)

    @property
    def angles(self) -> tuple:
        return tuple(TWO_PI * (1.0 + b) for _, b in self.divisor)

    def canonical_order(self) -> tuple:
        return tuple(sorted(range(len(self.divisor)),
                            key=lambda i: self.divisor[i][0]))


def q_bilinear(pack: SurfacePack, z: str, w: str) -> float:
    """Symmetric bilinear form 4 pi/(g-1)^2 (Im K^z)^T (Im B)^{-1} (Im K^w)."""
    g = pack.genus
    kz = np.imag(pack.riemann_constant(z))
    kw = np.imag(pack.riemann_constant(w))
    y = pack.period.matrix.imag
    return float(4 * math.pi / (g - 1) ** 2 * (kz @ np.linalg.solve(y, kw)))


def _log_abs_E(pack, z, w, charts) -> float:
    return math.log(abs(prime_form(pack, z, w,
                                   chart_z=charts.get(z), chart_w=charts.get(w))))


def phi_potential(spec: HigherGenusMetricSpec, z: str,
                  charts: Mapping[str, str] | None = None) -> float:
    """Metric potential at a tabulated point handle (not a divisor point)."""
    charts = dict(charts or {})
    if z in spec.handles:
        raise DomainError("potential evaluated at a cone point")
    pack = spec.pack
    total = -math.log(spec.scale)
    for i in spec.canonical_order():
        h, b = spec.divisor[i]
        ratio = 2.0 * (_log_abs_E(pack, z, h, charts) - _log_abs_E(pack, spec.p1, h, charts))
        total -= b * (ratio + q_bilinear(pack, z, h))
    sigma = fay_sigma(pack, z, spec.p0, spec.x_tuple, chart_z=charts.get(z))
    total -= 4.0 * math.log(abs(sigma))
    return total


def u_j_holomorphic_part(spec: HigherGenusMetricSpec, j: int, z: str,
                         charts: Mapping[str, str] | None = None) -> complex:
    """Holomorphic completion of the regular metric part in the chart of vertex j.

    Its real part satisfies Re u_j(z) = phi(z) + 2 b_j log|z - z_j| in the
    shared chart; the imaginary part depends on principal-log branches and
    is not part of the contract.
    """
    charts = dict(charts or {})
    pack = spec.pack
    handle_j, b_j = spec.divisor[j]
    if pack.chart_label(z) != pack.chart_label(handle_j):
        raise DomainError(f"point {z!r} is outside the chart of vertex {handle_j!r}")
    total = -math.log(spec.scale) + 0.0j
    for i in spec.canonical_order():
        h, b = spec.divisor[i]
        e_z = prime_form(pack, z, h, chart_z=charts.get(z), chart_w=charts.get(h))
        e_p1 = prime_form(pack, spec.p1, h,
                          chart_z=charts.get(spec.p1), chart_w=charts.get(h))
        total -= b * (q_bilinear(pack, z, h) + 2.0 * np.log(e_z / e_p1))
    dz = pack.chart_coord(z, charts.get(z)) - pack.chart_coord(handle_j, charts.get(handle_j))
    total += 2.0 * b_j * np.log(dz)
    sigma = fay_sigma(pack, z, spec.p0, spec.x_tuple, chart_z=charts.get(z))
    total -= 4.0 * np.log(sigma)
    return complex(total)


def higher_genus_D(spec: HigherGenusMetricSpec,
                   charts: Mapping[str, str] | None = None) -> float:
    """Divisor pair functional of the genus >= 2 assembly.

    Independent of the chart choices at the vertices (transformation factors
    cancel through Gauss-Bonnet), invariant under divisor relabeling.
    """
    charts = dict(charts or {})
    pack = spec.pack
    order = spec.canonical_order()
    betas = spec.angles
    wts = spec.weights
    handles = spec.handles

    pair_part = 0.0
    for a_pos, i in enumerate(order):
        for j in order[a_pos + 1:]:
            pair_part += (wts[i] * wts[j] * (1.0 / betas[i] + 1.0 / betas[j])
                          * 2.0 * _log_abs_E(pack, handles[i], handles[j], charts))
    q_part = 0.0
    for i in order:
        for j in order:
            q_part += (wts[i] * wts[j] * (1.0 / betas[i] + 1.0 / betas[j])
                       * q_bilinear(pack, handles[i], handles[j]))
    total = math.pi / 6.0 * (pair_part + 0.5 * q_part)

    i_sum = math.fsum(coefficient_I(betas[j]) for j in order)
    for i in order:
        total += (i_sum * wts[i] * 2.0
                  * _log_abs_E(pack, spec.p1, handles[i], charts))
        sigma = fay_sigma(pack, handles[i], spec.p0, spec.x_tuple,
                          chart_z=charts.get(handles[i]))
        total -= (2 * math.pi * wts[i] ** 2 / (3.0 * betas[i])) * math.log(abs(sigma))
    return total


def higher_genus_log_det(spec: HigherGenusMetricSpec,
                         charts: Mapping[str, str] | None = None) -> DetResult:
    """Assembled log(det/Area) up to the symbolic moduli constant.

    Returns the pair functional plus angle and scaling terms; DetResult.c0
    is None because the moduli constant is undetermined for genus >= 2.
    """
    d_val = higher_genus_D(spec, charts)
    betas = spec.angles
    order = spec.canonical_order()
    sum_log_d2 = math.fsum(2.0 * math.log(coefficient_d(betas[i]))
                           for i in sorted(order, key=lambda k: betas[k]))
    scaling = -math.fsum(coefficient_I(betas[i]) for i in order) * math.log(spec.scale)
    return DetResult(log_det_over_area=d_val + sum_log_d2 + scaling,
                     D=d_val, sum_log_d2=sum_log_d2, scaling_term=scaling, c0=None)
