"""Infinite-cone heat kernel, its diagonal defect, and the angle coefficients.

The kernel on a cone of opening beta is realized as the classical contour
integral: full residues of cot(pi theta / beta) strictly inside the strip
|Re theta| < pi, half weight for poles landing exactly on the boundary
lines, plus a real line integral along Re theta = +-pi. The orientation of
the lines is pinned by two exact anchors, both covered by tests: the
beta = 2 pi kernel collapses to the plane Gaussian, and the radial moment
of the diagonal defect reproduces the closed form of coefficient_I for
every beta.

Angles that put a contour pole within POLE_TOL of the boundary lines
(beta within roundoff of pi/k) are snapped to the boundary prescription:
the pole is counted with weight 1/2 and the line integrand's Lorentzian
spike is removed; the two one-sided limits agree, so the snap is exact at
the boundary and its error away from it is O(POLE_TOL).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.special import bernoulli as _bernoulli_numbers

from ._quadrature import panels_adaptive
from .errors import ConvergenceError, DomainError, SchemaError
from .special import EULER_GAMMA, macdonald_k0

TWO_PI = 2.0 * math.pi
POLE_TOL = 1e-9


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConeData:
    """A single conical angle; the divisor weight b = beta/(2 pi) - 1 is derived."""

    beta: float

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise DomainError(f"cone angle must be positive and finite, got {self.beta}")

    @property
    def b(self) -> float:
        return self.beta / TWO_PI - 1.0

    @classmethod
    def from_weight(cls, b: float) -> "ConeData":
        if b <= -1:
            raise DomainError(f"divisor weight must exceed -1, got {b}")
        return cls(TWO_PI * (1.0 + b))


@dataclass(frozen=True)
class SpectralCoefficients:
    """Per-cone coefficients entering the determinant assembly."""

    beta: float
    I: float
    Itilde: float
    d: float


def _check_mu(mu: complex) -> complex:
    mu = complex(mu)
    if not (math.isfinite(mu.real) and math.isfinite(mu.imag)):
        raise DomainError("spectral parameter must be finite")
    if mu.real >= 0:
        raise DomainError(f"asymptotic routines need Re mu < 0, got {mu}")
    return mu


# ---------------------------------------------------------------------------
# contour bookkeeping
# ---------------------------------------------------------------------------

def _poles(beta: float, shift: float = 0.0):
    """Poles theta = k beta - shift inside |theta| <= pi, with residue weights.

    Weight 1 strictly inside the strip, 1/2 within POLE_TOL of the lines.
    k = 0 (the plane Gaussian) is included; callers drop it where the defect
    against the plane is wanted.
    """
    out = []
    k_lo = math.floor((-math.pi + shift) / beta) - 1
    k_hi = math.ceil((math.pi + shift) / beta) + 1
    for k in range(k_lo, k_hi + 1):
        theta = k * beta - shift
        if abs(theta) < math.pi - POLE_TOL:
            out.append((theta, 1.0))
        elif abs(abs(theta) - math.pi) <= POLE_TOL:
            out.append((theta, 0.5))
    return out


def _snapped(a: float, beta: float) -> bool:
    """True when a = pi(pi + shift)/beta sits within the snap window of m pi."""
    return abs(a - math.pi * round(a / math.pi)) <= math.pi * POLE_TOL / beta * 1.5


def _line_weight(a: float, b_arr: np.ndarray, snapped: bool) -> np.ndarray:
    """sin(2a) / (sin^2 a + sinh^2 b), Lorentzian spike removed when snapped."""
    s2 = math.sin(2 * a)
    s_sq = math.sin(a) ** 2
    main = s2 / (s_sq + np.sinh(b_arr) ** 2)
    if snapped:
        main = main - s2 / (s_sq + b_arr ** 2)
    return main


def _line_breaks(beta: float, a: float, snapped: bool, y_max: float):
    """Quadrature breakpoints resolving the Lorentzian peak width beta|sin a|/pi."""
    pts = {0.0, y_max}
    if not snapped:
        w = beta * abs(math.sin(a)) / math.pi
        w = max(w, 1e-13)
        while w < min(1.0, y_max):
            pts.add(w)
            w *= 6.0
    for p in (0.25, 1.0, 4.0, 12.0, 40.0):
        if p < y_max:
            pts.add(p)
    return sorted(pts)


# ---------------------------------------------------------------------------
# heat kernel and diagonal defect
# ---------------------------------------------------------------------------

def cone_heat_kernel(t: float, beta: float, x: Sequence[float], xp: Sequence[float]) -> float:
    """Heat kernel H_t on the infinite cone of opening beta; points are polar (r, phi)."""
    ConeData(beta)
    if not (t > 0 and math.isfinite(t)):
        raise DomainError(f"time must be positive, got {t}")
    r, phi = float(x[0]), float(x[1])
    rp, phip = float(xp[0]), float(xp[1])
    if r < 0 or rp < 0:
        raise DomainError("radii must be nonnegative")
    dphi = phi - phip

    gauss = 0.0
    for theta, w in _poles(beta, shift=dphi):
        rho2 = r * r + rp * rp - 2 * r * rp * math.cos(theta)
        gauss += w * math.exp(-rho2 / (4 * t))
    total = gauss / (4 * math.pi * t)

    a_plus = math.pi * (math.pi + dphi) / beta
    a_minus = math.pi * (-math.pi + dphi) / beta
    snap_p = _snapped(a_plus, beta)
    snap_m = _snapped(a_minus, beta)
    trivial_p = snap_p and abs(math.sin(2 * a_plus)) < 1e-12
    trivial_m = snap_m and abs(math.sin(2 * a_minus)) < 1e-12
    if not (trivial_p and trivial_m):
        base = (r * r + rp * rp) / (4 * t)
        scale = r * rp / (2 * t)
        y_scale = 2.0 * math.asinh(math.sqrt(22.5 / scale)) if scale > 0 else math.inf
        y_weight = beta * 45.0 / TWO_PI + 2.0
        y_max = max(1.0, min(y_scale, y_weight))

        def integrand(y):
            b = math.pi * y / beta
            bracket = (_line_weight(a_plus, b, snap_p)
                       - _line_weight(a_minus, b, snap_m))
            return np.exp(-base - scale * np.cosh(y)) * bracket

        a_narrow = min(a_plus, a_minus, key=lambda aa: abs(math.sin(aa)))
        breaks = _line_breaks(beta, a_narrow, snap_p and snap_m, y_max)
        line = panels_adaptive(integrand, breaks, rtol=1e-11, atol=1e-16)
        total -= line / (8 * math.pi * beta * t)
    return total


def a_mu(r: float, beta: float, mu: complex) -> complex:
    """Diagonal defect of the cone resolvent against the plane parametrix.

    The inner time integral is reduced in closed form to 2 K0, then the
    contour is evaluated: residues at theta = k beta with 0 < |k beta| < pi
    (half weight on the lines) plus the line integral over Im theta. Real
    for real mu, with imaginary part below 1e-10.
    """
    ConeData(beta)
    mu = _check_mu(mu)
    if not (r > 0 and math.isfinite(r)):
        raise DomainError(f"radius must be positive, got {r}")
    v = complex(2.0 * r * np.sqrt(complex(-mu)))

    total = 0.0 + 0.0j
    for theta, w in _poles(beta):
        if theta <= 0:
            continue  # each +-k pair contributes (-mu/pi) K0 in total; drop k = 0
        total += w * (-mu / math.pi) * macdonald_k0(v * math.sin(theta / 2.0))

    a = math.pi ** 2 / beta
    snapped = _snapped(a, beta)
    if not (snapped and abs(math.sin(2 * a)) < 1e-12):
        y_k0 = 2.0 * math.acosh(1.0 + 42.0 / max(v.real, 1e-12))
        y_weight = beta * 45.0 / TWO_PI + 2.0
        y_max = max(1.0, min(y_k0, y_weight))
        breaks = _line_breaks(beta, a, snapped, y_max)

        def integrand(y):
            b = math.pi * np.asarray(y, dtype=float) / beta
            return _line_weight(a, b, snapped) * macdonald_k0(v * np.cosh(np.asarray(y) / 2.0))

        line = panels_adaptive(lambda y: np.real(integrand(y)), breaks,
                               rtol=1e-11, atol=1e-16)
        if mu.imag != 0.0:
            line = line + 1j * panels_adaptive(lambda y: np.imag(integrand(y)), breaks,
                                               rtol=1e-11, atol=1e-16)
        total += (mu / (2 * math.pi * beta)) * line
    return complex(total)


# ---------------------------------------------------------------------------
# closed-form coefficients
# ---------------------------------------------------------------------------

def coefficient_I(beta: float) -> float:
    """Constant of the plain radial defect moment: -(1/12)(beta/2pi - 2pi/beta)."""
    ConeData(beta)
    x = beta / TWO_PI
    return -(x - 1.0 / x) / 12.0


def coefficient_Itilde(beta: float) -> float:
    """Constant term of the log-weighted radial moment of the diagonal defect.

    Closed contour form: the residue sum carries (gamma + log sin(k beta/2))
    numerators, the line integral carries (gamma + log cosh(y/2)). This is
    exactly what the asymptotic fit of coefficient_I_numeric extracts, and
    it vanishes at beta = 2 pi where the defect is identically zero.
    """
    ConeData(beta)
    total = 0.0
    for theta, w in _poles(beta):
        if theta <= 0:
            continue
        s = math.sin(theta / 2.0)
        total -= w * (EULER_GAMMA + math.log(s)) / (4 * math.pi * s * s)

    a = math.pi ** 2 / beta
    snapped = _snapped(a, beta)
    if snapped and abs(math.sin(2 * a)) < 1e-12:
        return total
    s_sq = math.sin(a) ** 2

    def weight(y):
        b = math.pi * y / beta
        ch = np.cosh(y / 2.0)
        main = (EULER_GAMMA + np.log(ch)) / (ch * ch * (s_sq + np.sinh(b) ** 2))
        if snapped:
            main = main - EULER_GAMMA / (s_sq + b * b)
        return main

    y_max = max(60.0, beta * 45.0 / TWO_PI + 2.0)
    breaks = _line_breaks(beta, a, snapped, y_max)
    line = panels_adaptive(weight, breaks, rtol=1e-12, atol=1e-16)
    return total + math.sin(2 * a) / (8 * math.pi * beta) * line


@lru_cache(maxsize=4096)
def itilde_primitive(beta: float) -> float:
    """Minus the integral of coefficient_Itilde from 2 pi to beta.

    The angle factor d(beta) needs the function whose beta-derivative is
    -coefficient_Itilde; this primitive is it, normalized to vanish at
    beta = 2 pi. Pole-count boundaries beta = pi/k are quadrature
    breakpoints (the integrand is continuous but only piecewise smooth).
    """
    ConeData(beta)
    lo, hi = sorted((float(beta), TWO_PI))
    if hi - lo == 0.0:
        return 0.0
    pts = [lo] + [math.pi / k for k in range(1, 64) if lo < math.pi / k < hi] + [hi]
    pts = sorted(set(pts))
    val = 0.0
    for aa, bb in zip(pts[:-1], pts[1:]):
        piece, err = integrate.quad(coefficient_Itilde, aa, bb,
                                    epsabs=1e-13, epsrel=1e-12, limit=200)
        if err > 1e-9:
            raise ConvergenceError(f"primitive quadrature error {err:.2e} on [{aa}, {bb}]")
        val += piece
    return -val if beta > TWO_PI else val


def hadamard_coth_integral(beta: float, split: float = 1.0) -> float:
    """Hadamard finite part of int_0^inf coth(pi l) coth(beta l / 2) dl / (8 l).

    Scheme (pinned): on (0, split] subtract the expanded singular part
    a0/l^3 + c1/l with a0 = 1/(4 pi beta), c1 = pi/(12 beta) + beta/(48 pi);
    on [split, inf) subtract 1/(8 l); add the finite contributions of the
    subtracted pieces under the symmetric cutoff convention, dropping all
    eps^-2 and log eps terms. Split-point independent by construction.
    Small l is evaluated through the Bernoulli series of l coth(c l) to
    avoid cancellation against the subtraction.
    """
    ConeData(beta)
    if not (split > 0 and math.isfinite(split)):
        raise DomainError("split point must be positive")
    a0 = 1.0 / (4 * math.pi * beta)
    c1 = math.pi / (12 * beta) + beta / (48 * math.pi)

    nmax = 9
    bern = _bernoulli_numbers(2 * nmax)

    def lcoth_coeffs(c: float):
        return [4.0 ** k * bern[2 * k] * c ** (2 * k - 1) / math.factorial(2 * k)
                for k in range(nmax)]

    ca = lcoth_coeffs(math.pi)
    cb = lcoth_coeffs(beta / 2.0)
    prod = [sum(ca[i] * cb[k - i] for i in range(k + 1)) for k in range(nmax)]

    d = min(0.04, 0.5 * split)
    series = sum((prod[k] / 8.0) * d ** (2 * k - 2) / (2 * k - 2) for k in range(2, nmax))

    def f(l):
        return 1.0 / (math.tanh(math.pi * l) * math.tanh(beta * l / 2.0) * 8.0 * l)

    mid, err1 = integrate.quad(lambda l: f(l) - a0 / l ** 3 - c1 / l, d, split,
                               epsabs=1e-13, epsrel=1e-12, limit=200)
    tail, err2 = integrate.quad(lambda l: f(l) - 1.0 / (8.0 * l), split, np.inf,
                                epsabs=1e-13, epsrel=1e-12, limit=200)
    if max(err1, err2) > 1e-9:
        raise ConvergenceError("finite-part quadrature did not converge")
    return series + mid + tail - a0 / (2 * split * split) + (c1 - 0.125) * math.log(split)


def coefficient_d(beta: float, torus_mode: bool = False,
                  theta_prime_abs: float | None = None) -> float:
    """Angle factor d(beta) of the determinant assembly; d(2 pi) = 1 exactly.

    exp( itilde_primitive(beta) + coefficient_I(beta)
         + (1/12)(beta/2pi + 2pi/beta) log(beta/2pi) ),
    with the torus mode adding (1/12)(beta/2pi + 2pi/beta - 2) log(theta')
    inside the exponent.
    """
    ConeData(beta)
    if torus_mode and theta_prime_abs is None:
        raise SchemaError("torus mode requires theta_prime_abs")
    x = beta / TWO_PI
    expo = itilde_primitive(beta) + coefficient_I(beta) + (x + 1.0 / x) * math.log(x) / 12.0
    if torus_mode:
        if theta_prime_abs <= 0:
            raise DomainError("theta_prime_abs must be positive")
        expo += (x + 1.0 / x - 2.0) * math.log(theta_prime_abs) / 12.0
    return math.exp(expo)


def spectral_coefficients(beta: float, torus_mode: bool = False,
                          theta_prime_abs: float | None = None) -> SpectralCoefficients:
    return SpectralCoefficients(beta=beta, I=coefficient_I(beta),
                                Itilde=coefficient_Itilde(beta),
                                d=coefficient_d(beta, torus_mode, theta_prime_abs))


# ---------------------------------------------------------------------------
# independent asymptotic-fit extraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConeFitRecord:
    mu: float
    plain_moment: float
    log_moment: float


@dataclass(frozen=True)
class ConeFitResult:
    beta: float
    eps: float
    I_estimate: float
    Itilde_estimate: float
    log_slope: float
    expected_log_slope: float
    records: tuple = field(default_factory=tuple)
    weight_power: int = 4

    @property
    def slope_residual(self) -> float:
        return abs(self.log_slope - self.expected_log_slope)


def _defect_moments(beta: float, mu: float, eps: float) -> tuple[float, float]:
    """(beta int_0^eps a_mu r dr, int_0^eps a_mu log r r dr) by quadrature."""

    def plain(r):
        return 0.0 if r == 0.0 else a_mu(r, beta, mu).real * r

    def logw(r):
        return 0.0 if r == 0.0 else a_mu(r, beta, mu).real * math.log(r) * r

    g, eg = integrate.quad(plain, 0.0, eps, epsabs=1e-12, epsrel=1e-11, limit=200)
    h, eh = integrate.quad(logw, 0.0, eps, epsabs=1e-12, epsrel=1e-11, limit=200)
    if max(eg, eh) > 1e-8:
        raise ConvergenceError(f"defect moment quadrature error too large ({eg:.1e}, {eh:.1e})")
    return beta * g, h


def coefficient_I_numeric(beta: float,
                          mu_list: Sequence[float] = (-100.0, -200.0, -400.0),
                          eps: float = 0.5,
                          weight_power: int = 4) -> ConeFitResult:
    """Estimate (I, Itilde) by fitting the large-|mu| moments of the defect.

    The plain moment is fitted with a constant, the log-weighted moment with
    intercept + slope in log(-mu); both fits use weights (-mu)^weight_power
    because the model omits remainders decaying like exp(-2 eps sqrt(-mu) s).
    The fitted slope must match -coefficient_I(beta) / (2 beta).
    """
    ConeData(beta)
    if not eps > 0:
        raise DomainError("eps must be positive")
    mus = [float(m) for m in mu_list]
    if len(mus) < 2:
        raise SchemaError("need at least two spectral parameters for the fit")
    for m in mus:
        if not m < 0:
            raise DomainError(f"fit spectral parameters must be negative reals, got {m}")

    threads = int(os.environ.get("POLYDET_THREADS", "1") or "1")
    if threads > 1 and len(mus) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=min(threads, len(mus))) as ex:
            moments = list(ex.map(lambda m: _defect_moments(beta, m, eps), mus))
    else:
        moments = [_defect_moments(beta, m, eps) for m in mus]

    records = tuple(ConeFitRecord(m, g, h) for m, (g, h) in zip(mus, moments))
    x = np.log([-m for m in mus])
    w = np.array([(-m) ** weight_power for m in mus], dtype=float)
    w /= w.sum()
    g_vals = np.array([rec.plain_moment for rec in records])
    h_vals = np.array([rec.log_moment for rec in records])

    order = np.argsort(x)
    if abs(g_vals[order[-1]] - g_vals[order[-2]]) > 5e-3 * max(1.0, abs(g_vals[order[-1]])):
        raise ConvergenceError("asymptotic regime not reached")

    i_est = float(np.sum(w * g_vals))
    xbar = float(np.sum(w * x))
    hbar = float(np.sum(w * h_vals))
    var = float(np.sum(w * (x - xbar) ** 2))
    slope = float(np.sum(w * (x - xbar) * (h_vals - hbar)) / var)
    intercept = hbar - slope * xbar
    return ConeFitResult(beta=beta, eps=eps, I_estimate=i_est,
                         Itilde_estimate=intercept, log_slope=slope,
                         expected_log_slope=-coefficient_I(beta) / (2 * beta),
                         records=records, weight_power=weight_power)
