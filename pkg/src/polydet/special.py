"""Special functions used by the determinant formulas.

Jacobi theta with characteristics (genus 1), Riemann theta (genus g),
the Dedekind eta function, the Macdonald function K0 for complex argument,
and the prime form / Fay comparison function sigma evaluated against
tabulated surface data.

All theta-type series use certified truncation: the index range is chosen
from a Gaussian tail bound targeting the requested absolute tolerance.
Only absolute values, real parts, or ratios of these functions enter the
final determinant formulas, so phase conventions are never load-bearing;
they are nevertheless pinned by the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError, SchemaError

EULER_GAMMA = 0.5772156649015328606065120900824024


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TorusModulus:
    """The b-period of a genus-1 surface; requires Im B > 0."""

    b: complex

    def __post_init__(self):
        b = complex(self.b)
        if not (math.isfinite(b.real) and math.isfinite(b.imag)):
            raise DomainError("torus modulus must be finite")
        if b.imag <= 0:
            raise DomainError(f"torus modulus needs Im B > 0, got Im B = {b.imag}")
        object.__setattr__(self, "b", b)


def _as_modulus(modulus) -> complex:
    if isinstance(modulus, TorusModulus):
        return modulus.b
    return TorusModulus(complex(modulus)).b


@dataclass(frozen=True)
class ThetaCharacteristic:
    """Characteristic [a; b] with entries reduced to [0, 1)."""

    a: tuple
    b: tuple

    def __post_init__(self):
        a = tuple(float(x) % 1.0 for x in np.atleast_1d(self.a))
        b = tuple(float(x) % 1.0 for x in np.atleast_1d(self.b))
        if len(a) != len(b):
            raise SchemaError("characteristic halves must have equal length")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def genus(self) -> int:
        return len(self.a)

    @property
    def is_odd_half_integer(self) -> bool:
        if any(abs(2 * x - round(2 * x)) > 1e-12 for x in self.a + self.b):
            return False
        four_ab = 4 * sum(x * y for x, y in zip(self.a, self.b))
        return abs(four_ab - round(four_ab)) < 1e-9 and round(four_ab) % 2 == 1


HALF_HALF = ThetaCharacteristic((0.5,), (0.5,))
ZERO_CHAR1 = ThetaCharacteristic((0.0,), (0.0,))


@dataclass(frozen=True)
class PeriodMatrix:
    """Symmetric g x g matrix with positive definite imaginary part."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise SchemaError("period matrix must be square")
        if not np.all(np.isfinite(m)):
            raise DomainError("period matrix must be finite")
        if np.max(np.abs(m - m.T)) > 1e-12 * max(1.0, np.max(np.abs(m))):
            raise DomainError("period matrix must be symmetric")
        eigs = np.linalg.eigvalsh(m.imag)
        if np.min(eigs) <= 0:
            raise DomainError(
                f"Im(period matrix) must be positive definite (min eig {np.min(eigs):.3e})")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def genus(self) -> int:
        return self.matrix.shape[0]


# ---------------------------------------------------------------------------
# genus-1 theta and eta
# ---------------------------------------------------------------------------

def _theta1_range(a: float, b: float, z: np.ndarray, im_b: float, tol: float):
    """Index window covering all terms above `tol` of the genus-1 theta series."""
    y = np.imag(z) + 0.0
    center = -a - y / im_b  # peak of the Gaussian in n
    peak_exponent = math.pi * float(np.max(y * y)) / im_b
    width = math.sqrt((peak_exponent + math.log(1.0 / tol) + 6.0) / (math.pi * im_b))
    lo = math.floor(float(np.min(center)) - width) - 1
    hi = math.ceil(float(np.max(center)) + width) + 1
    return np.arange(lo, hi + 1)


def _jacobi_theta_core(char: ThetaCharacteristic, z, modulus, tol: float, order: int):
    if char.genus != 1:
        raise SchemaError("jacobi_theta takes a genus-1 characteristic")
    bmod = _as_modulus(modulus)
    zz = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(zz)):
        raise DomainError("theta argument must be finite")
    a, b = char.a[0], char.b[0]
    ns = _theta1_range(a, b, zz + b, bmod.imag, tol)
    m = ns + a
    expo = (1j * math.pi * bmod) * m * m
    phase = 2j * math.pi * m
    # broadcast: terms over (..., n)
    w = zz[..., None] + b
    vals = np.exp(expo + phase * w)
    if order == 1:
        vals = vals * (2j * math.pi * m)
    out = np.sum(vals, axis=-1)
    return out if out.shape else complex(out)


def jacobi_theta(char: ThetaCharacteristic, z, modulus, tol: float = 1e-13):
    """Theta with characteristics, sum over n of exp(i pi B (n+a)^2 + 2 pi i (n+a)(z+b)).

    Accepts scalar or ndarray `z`; truncation error is below `tol` (absolute).
    """
    return _jacobi_theta_core(char, z, modulus, tol, order=0)


def jacobi_theta_z_derivative(char: ThetaCharacteristic, z, modulus, tol: float = 1e-13):
    """d/dz of jacobi_theta, summed term by term (same truncation contract)."""
    return _jacobi_theta_core(char, z, modulus, tol, order=1)


def dedekind_eta(modulus, tol: float = 1e-14) -> complex:
    """Dedekind eta via the pentagonal-number series q^{1/24} sum (-1)^k q^{k(3k-1)/2}."""
    bmod = _as_modulus(modulus)
    q = np.exp(2j * math.pi * bmod)
    absq = abs(q)
    total = 1.0 + 0.0j
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        g2 = k * (3 * k + 1) // 2
        term = (-1) ** k * (q ** g1 + q ** g2)
        total += term
        if absq ** g1 < 0.25 * tol or k > 400:
            break
        k += 1
    if absq ** (k * (3 * k - 1) // 2) > 0.25 * tol:
        raise ConvergenceError("eta series did not reach tolerance (Im B too small)")
    return complex(np.exp(2j * math.pi * bmod / 24) * total)


# ---------------------------------------------------------------------------
# genus-g Riemann theta
# ---------------------------------------------------------------------------

def riemann_theta(z, period: PeriodMatrix, char: ThetaCharacteristic | None = None,
                  tol: float = 1e-12) -> complex:
    """Riemann theta with characteristics for a genus-g period matrix.

    The lattice sum is truncated by an ellipsoidal radius from the Gaussian
    tail bound so the truncation error stays below `tol` (absolute, up to the
    usual peak normalization).
    """
    if not isinstance(period, PeriodMatrix):
        period = PeriodMatrix(np.asarray(period))
    g = period.genus
    if char is None:
        char = ThetaCharacteristic((0.0,) * g, (0.0,) * g)
    if char.genus != g:
        raise SchemaError(f"characteristic genus {char.genus} != period genus {g}")
    zz = np.asarray(z, dtype=complex).reshape(-1)
    if zz.shape != (g,):
        raise SchemaError(f"theta argument must have length {g}")
    if not np.all(np.isfinite(zz)):
        raise DomainError("theta argument must be finite")

    B = period.matrix
    Y = B.imag
    a = np.array(char.a)
    bvec = np.array(char.b)
    y = np.imag(zz + bvec)
    L = np.linalg.cholesky(Y)
    yquad = float(y @ np.linalg.solve(Y, y))
    radius = math.sqrt((math.pi * yquad + math.log(1.0 / tol) + 6.0 + 3.0 * g) / math.pi)
    center = -np.linalg.solve(Y, y) - a
    half_widths = radius * np.linalg.norm(np.linalg.inv(L), axis=0)
    ranges = [np.arange(math.floor(c - h) - 1, math.ceil(c + h) + 2)
              for c, h in zip(center, half_widths)]
    grids = np.meshgrid(*ranges, indexing="ij")
    n = np.stack([gr.ravel() for gr in grids], axis=1).astype(float)
    x = n - center[None, :]
    keep = np.sum((x @ L) ** 2, axis=1) <= (radius + 1e-9) ** 2
    m = n[keep] + a[None, :]
    quad = np.einsum("ni,ij,nj->n", m, B, m)
    lin = m @ (zz + bvec)
    return complex(np.sum(np.exp(1j * math.pi * quad + 2j * math.pi * lin)))


# ---------------------------------------------------------------------------
# Macdonald K0
# ---------------------------------------------------------------------------

_K0_SERIES_RADIUS = 7.0     # documented switch radius: series -> quadrature
_K0_ASYMPTOTIC_RADIUS = 14.0


def _k0_series(w: np.ndarray) -> np.ndarray:
    wl = w.astype(np.clongdouble)
    q = wl * wl / 4
    term = np.ones_like(wl)
    i0 = np.ones_like(wl)
    s = np.zeros_like(wl)
    h = np.longdouble(0.0)
    for k in range(1, 120):
        term = term * q / np.clongdouble(k * k)
        h = h + np.longdouble(1.0) / k
        i0 = i0 + term
        s = s + term * h
        if np.max(np.abs(term)) * float(h + 1) < 1e-24 * max(1.0, float(np.max(np.abs(i0)))):
            break
    gamma_l = np.longdouble("0.57721566490153286060651209008240243")
    out = -(np.log(wl / 2) + gamma_l) * i0 + s
    return out.astype(complex)


def _k0_quadrature(w: np.ndarray) -> np.ndarray:
    re_min = float(np.min(w.real))
    t_max = math.acosh(1.0 + 45.0 / re_min)
    def value(extra: int) -> np.ndarray:
        breaks = np.linspace(0.0, t_max, 8 * extra + 1)
        x, wt = np.polynomial.legendre.leggauss(64)
        acc = np.zeros(w.shape, dtype=complex)
        for aa, bb in zip(breaks[:-1], breaks[1:]):
            mid, half = 0.5 * (aa + bb), 0.5 * (bb - aa)
            t = mid + half * x
            acc += half * np.sum(np.exp(-w[..., None] * np.cosh(t)) * wt, axis=-1)
        return acc
    v1, v2 = value(1), value(2)
    if np.max(np.abs(v1 - v2)) > 1e-12 * max(1.0, float(np.max(np.abs(v2)))):
        raise ConvergenceError("K0 quadrature did not converge")
    return v2


def _k0_asymptotic(w: np.ndarray) -> np.ndarray:
    s = np.ones(w.shape, dtype=complex)
    term = np.ones(w.shape, dtype=complex)
    active = np.ones(w.shape, dtype=bool)
    for k in range(1, 40):
        nxt = term * (-((2 * k - 1) ** 2) / (8.0 * k)) / w
        grow = np.abs(nxt) >= np.abs(term)
        active &= ~grow
        term = np.where(active, nxt, 0.0)
        s += term
        if not np.any(np.abs(term) > 1e-18):
            break
    return np.sqrt(math.pi / (2 * w)) * np.exp(-w) * s


def macdonald_k0(w):
    """Modified Bessel function K0 for complex arguments with Re w > 0.

    Ascending series (extended precision) for |w| < 7 and for strongly oblique
    arguments up to |w| < 14; the cosh-integral quadrature on the middle band;
    the optimally truncated asymptotic series for |w| >= 14. Relative error
    <= 1e-11 on the whole domain. Arguments on the closed left half plane
    (including the negative real axis) are rejected.
    """
    arr = np.asarray(w, dtype=complex)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if not np.all(np.isfinite(arr)):
        raise DomainError("K0 argument must be finite")
    if np.any(arr.real <= 0):
        raise DomainError("K0 requires Re w > 0 (principal branch; "
                          "negative real axis is rejected)")
    a = np.abs(arr)
    out = np.empty(arr.shape, dtype=complex)
    m_series = (a < _K0_SERIES_RADIUS) | (
        (a < _K0_ASYMPTOTIC_RADIUS) & (arr.real < 0.3 * a))
    m_asym = a >= _K0_ASYMPTOTIC_RADIUS
    m_quad = ~(m_series | m_asym)
    if np.any(m_series):
        out[m_series] = _k0_series(arr[m_series])
    if np.any(m_quad):
        out[m_quad] = _k0_quadrature(arr[m_quad])
    if np.any(m_asym):
        out[m_asym] = _k0_asymptotic(arr[m_asym])
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# prime form and Fay sigma on tabulated surface data
# ---------------------------------------------------------------------------

def prime_form(pack, z, w, chart_z: str | None = None, chart_w: str | None = None) -> complex:
    """Prime form E(z, w) = theta[delta](A(z) - A(w)) / (h(z) h(w)).

    `pack` supplies the period matrix, an odd half-integer characteristic,
    Abel-map values and half-order-differential denominators for tabulated
    point handles. Antisymmetric; vanishes exactly on the diagonal.
    """
    if not pack.odd_char.is_odd_half_integer:
        raise SchemaError("prime form characteristic must be an odd half-integer one")
    dz = pack.abel(z) - pack.abel(w)
    th = riemann_theta(dz, pack.period, pack.odd_char)
    return th / (pack.h_delta(z, chart_z) * pack.h_delta(w, chart_w))


def fay_sigma(pack, z, p0, xs: Sequence[str], chart_z: str | None = None,
              degenerate_tol: float = 1e-12) -> complex:
    """Fay comparison function sigma(z, p0) from an auxiliary g-tuple of points.

    The value is independent of the auxiliary tuple; tuples that put either
    theta value (or a prime-form denominator) below `degenerate_tol` are
    rejected so the caller can resample. As a g/2-form in z it transforms
    under the chart chosen at z (`chart_z`).
    """
    g = pack.genus
    xs = tuple(xs)
    if len(xs) != g:
        raise SchemaError(f"fay_sigma needs a tuple of {g} auxiliary points")
    az = pack.abel(z)
    kz = pack.riemann_constant(z)
    s = np.sum([pack.abel(x) for x in xs], axis=0)
    zero = ThetaCharacteristic((0.0,) * g, (0.0,) * g)
    num = riemann_theta(s - g * az + kz, pack.period, zero)
    den = riemann_theta(s - pack.abel(p0) - (g - 1) * az + kz, pack.period, zero)
    if min(abs(num), abs(den)) < degenerate_tol:
        raise DomainError("degenerate x-tuple, resample")
    ratio = num / den
    for x in xs:
        e_num = prime_form(pack, x, p0)
        e_den = prime_form(pack, x, z, chart_w=chart_z)
        if abs(e_den) < degenerate_tol:
            raise DomainError("degenerate x-tuple, resample")
        ratio *= e_num / e_den
    return complex(ratio)
