"""Extended-precision reference evaluators.

Every routine here is an independent implementation path from the consumer
package: theta functions go through mpmath's jtheta, eta through the plain
500-factor q-product, K0 through the cosh-integral quadrature (checked
against mpmath's besselk), the defect values at beta = pi and pi/2 through
the method-of-images closed forms, and the heat kernel at beta = pi through
the two-term reflection formula. Values are as accurate as the working
precision allows; callers fix mp.dps before use.
"""

from __future__ import annotations

import mpmath as mp

ETA_FACTORS = 500


def jacobi_theta_half(z, b_mod):
    """theta[1/2,1/2](z | B) via the classical theta_1, an independent route."""
    q = mp.exp(1j * mp.pi * b_mod)
    return -mp.jtheta(1, mp.pi * z, q)


def jacobi_theta_half_zderiv(z, b_mod):
    q = mp.exp(1j * mp.pi * b_mod)
    return -mp.pi * mp.jtheta(1, mp.pi * z, q, 1)


def theta_prime_abs(b_mod):
    return abs(jacobi_theta_half_zderiv(0, b_mod))


def dedekind_eta(b_mod, factors: int = ETA_FACTORS):
    """q^{1/24} prod_{n<=factors} (1 - q^n)."""
    q = mp.exp(2j * mp.pi * b_mod)
    prod = mp.mpf(1)
    for n in range(1, factors + 1):
        prod *= 1 - q ** n
    return mp.exp(2j * mp.pi * b_mod / 24) * prod


def macdonald_k0(w):
    """K0 by quadrature of exp(-w cosh t); cross-checked against besselk."""
    with mp.extradps(25):
        val = mp.quad(lambda t: mp.exp(-w * mp.cosh(t)),
                      [0, 0.25, 0.5, 1, 1.5, 2, 3, 4, 6, 8, 12, 16, 26],
                      maxdegree=10)
    ref = mp.besselk(0, w)
    assert abs(val - ref) <= mp.mpf(10) ** (-(mp.mp.dps - 8)) * abs(ref), \
        "quadrature and besselk disagree"
    return val


def a_mu_images_pi(r, mu):
    """Diagonal defect on the half-angle cone (beta = pi) by the image formula."""
    return (-mu) / (2 * mp.pi) * mp.besselk(0, 2 * r * mp.sqrt(-mu))


def a_mu_images_half_pi(r, mu):
    """beta = pi/2: two full images plus the boundary pair at half weight."""
    v = 2 * r * mp.sqrt(-mu)
    return (-mu) / mp.pi * (mp.besselk(0, v / mp.sqrt(2)) + mp.besselk(0, v) / 2)


def cone_heat_images_pi(t, r, rp, dphi):
    """Heat kernel on the beta = pi cone: direct term plus single reflection."""
    d2 = r * r + rp * rp - 2 * r * rp * mp.cos(dphi)
    m2 = r * r + rp * rp + 2 * r * rp * mp.cos(dphi)
    return (mp.exp(-d2 / (4 * t)) + mp.exp(-m2 / (4 * t))) / (4 * mp.pi * t)


def cone_heat_plane(t, r, rp, dphi):
    d2 = r * r + rp * rp - 2 * r * rp * mp.cos(dphi)
    return mp.exp(-d2 / (4 * t)) / (4 * mp.pi * t)


# ---------------------------------------------------------------------------
# cone coefficients (same formulas as the consumer, independent implementation)
# ---------------------------------------------------------------------------

def coefficient_I(beta):
    x = beta / (2 * mp.pi)
    return -(x - 1 / x) / 12


def _poles(beta):
    out = []
    k = 1
    tol = mp.mpf(10) ** (-(mp.mp.dps - 8))
    while k * beta < mp.pi + tol:
        w = mp.mpf('0.5') if abs(k * beta - mp.pi) < tol else mp.mpf(1)
        out.append((k, w))
        k += 1
    return out

def coefficient_Itilde(beta):
    """Asymptotic constant of the log-weighted defect moment (contour form)."""
    g = mp.euler
    total = mp.mpf(0)
    for k, w in _poles(beta):
        s = mp.sin(k * beta / 2)
        total -= w * (g + mp.log(s)) / (4 * mp.pi * s * s)
    a = mp.pi ** 2 / beta
    s2a = mp.sin(2 * a)
    snapped = abs(a - mp.pi * mp.nint(a / mp.pi)) < mp.mpf(10) ** (-(mp.mp.dps - 8))
    if snapped:
        return total
    s_sq = mp.sin(a) ** 2

    def integrand(y):
        b = mp.pi * y / beta
        ch = mp.cosh(y / 2)
        return (g + mp.log(ch)) / (ch * ch * (s_sq + mp.sinh(b) ** 2))

    width = float(beta * abs(mp.sin(a)) / mp.pi)
    pts = sorted({0.0, min(width, 0.5), 1.0, 5.0, 30.0, 80.0})
    line = mp.quad(integrand, pts)
    return total + s2a / (8 * mp.pi * beta) * line


def itilde_primitive(beta):
    """-(integral of coefficient_Itilde from 2 pi to beta)."""
    lo, hi = sorted((beta, 2 * mp.pi))
    if hi == lo:
        return mp.mpf(0)
    pts = [lo] + [mp.pi / k for k in range(1, 64) if lo < mp.pi / k < hi] + [hi]
    val = mp.quad(coefficient_Itilde, sorted(set(pts)))
    return -val if beta > 2 * mp.pi else val


def coefficient_d(beta, theta_prime=None):
    x = beta / (2 * mp.pi)
    expo = itilde_primitive(beta) + coefficient_I(beta) + (x + 1 / x) * mp.log(x) / 12
    if theta_prime is not None:
        expo += (x + 1 / x - 2) * mp.log(theta_prime) / 12
    return mp.exp(expo)


def hadamard_coth_integral(beta, split=mp.mpf(1)):
    """Finite part of int coth(pi l) coth(beta l/2) dl/(8l), pinned scheme."""
    a0 = 1 / (4 * mp.pi * beta)
    c1 = mp.pi / (12 * beta) + beta / (48 * mp.pi)
    nmax = 10

    def lcoth(c):
        return [mp.mpf(4) ** k * mp.bernoulli(2 * k) * c ** (2 * k - 1)
                / mp.factorial(2 * k) for k in range(nmax)]

    ca, cb = lcoth(mp.pi), lcoth(beta / 2)
    prod = [mp.fsum(ca[i] * cb[k - i] for i in range(k + 1)) for k in range(nmax)]
    d = min(mp.mpf('0.04'), split / 2)
    series = mp.fsum((prod[k] / 8) * d ** (2 * k - 2) / (2 * k - 2)
                     for k in range(2, nmax))

    def f(l):
        return mp.coth(mp.pi * l) * mp.coth(beta * l / 2) / (8 * l)

    with mp.extradps(15):
        mid = mp.quad(lambda l: f(l) - a0 / l ** 3 - c1 / l, [d, float(split)])
    tail = mp.quad(lambda l: f(l) - 1 / (8 * l), [float(split), 5, 30, 200])
    return (series + mid + tail - a0 / (2 * split ** 2)
            + (c1 - mp.mpf(1) / 8) * mp.log(split))


# ---------------------------------------------------------------------------
# genus-1 reference values
# ---------------------------------------------------------------------------

def torus_green(w, b_mod):
    th = jacobi_theta_half(w, b_mod)
    return mp.log(abs(th)) - mp.pi * mp.im(w) ** 2 / mp.im(b_mod)


def torus_phi(b_mod, points, scale, z):
    total = -mp.log(scale)
    for p, bw in points:
        total -= 2 * bw * torus_green(z - p, b_mod)
    return total


def torus_D(b_mod, points):
    total = mp.mpf(0)
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            pi_, bi = points[i]
            pj_, bj = points[j]
            gi = 2 * mp.pi * (1 + bi)
            gj = 2 * mp.pi * (1 + bj)
            total += bi * bj * (1 / gi + 1 / gj) * torus_green(pi_ - pj_, b_mod)
    return mp.pi / 3 * total


def torus_c0(b_mod):
    return mp.im(b_mod) * abs(dedekind_eta(b_mod)) ** 4


def torus_log_det(b_mod, points, scale):
    tp = theta_prime_abs(b_mod)
    total = torus_D(b_mod, points) + mp.log(torus_c0(b_mod))
    for _, bw in points:
        beta = 2 * mp.pi * (1 + bw)
        total += 2 * mp.log(coefficient_d(beta, theta_prime=tp))
        total -= coefficient_I(beta) * mp.log(scale)
    return total
