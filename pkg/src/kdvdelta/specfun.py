"""Special functions and quadrature, implemented in-repo.

Everything the rest of the package needs beyond numpy arithmetic lives here:
Gauss-Legendre quadrature, the argument/modulus of Gamma on the imaginary
axis, the Airy function Ai and its derivative, the complete elliptic integral
K, and the Jacobi elliptic cn.  References are to standard sources (DLMF,
Abramowitz & Stegun); accuracy targets are set by the callers and pinned in
the tests.
"""

from __future__ import annotations

import cmath
import math
from functools import lru_cache

import numpy as np

from .errors import DomainError

# ---------------------------------------------------------------------------
# Gauss-Legendre quadrature


@lru_cache(maxsize=8)
def gauss_legendre_rule(order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the `order`-point Gauss-Legendre rule on [-1, 1].

    Newton iteration on the Legendre recurrence; weights 2/((1-x^2) P_n'^2).
    """
    if order < 2:
        raise DomainError("quadrature order must be >= 2")
    n = order
    x = np.cos(np.pi * (np.arange(n) + 0.75) / (n + 0.5))
    for _ in range(100):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for k in range(2, n + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    idx = np.argsort(x)
    return x[idx], w[idx]


def integrate(f, a: float, b: float, panels: int = 16) -> float:
    """Composite 16-point Gauss-Legendre integral of f over [a, b].

    f must be vectorized (ndarray in, ndarray out).  Requires a <= b.
    Panel edges follow a cosine (Chebyshev) distribution: order O(h^32) on
    smooth integrands is unchanged, and endpoint derivative singularities
    (e.g. sqrt(x) at 0) are strongly damped by the quadratic edge clustering.
    """
    if not (a <= b):
        raise DomainError(f"integrate requires a <= b, got [{a}, {b}]")
    if panels < 1:
        raise DomainError("panels must be >= 1")
    if a == b:
        return 0.0
    xi, wi = gauss_legendre_rule(16)
    theta = np.linspace(0.0, np.pi, panels + 1)
    edges = a + (b - a) * 0.5 * (1.0 - np.cos(theta))
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = (mid[:, None] + half[:, None] * xi[None, :]).ravel()
    wts = (half[:, None] * wi[None, :]).ravel()
    vals = np.asarray(f(pts), dtype=float)
    return float(np.dot(wts, vals))


def integrate_graded(f, a: float, b: float, levels: int = 44,
                     panels_per_level: int = 1) -> float:
    """Integral of f over (a, b] for integrands with an integrable (e.g.
    logarithmic or algebraic) singularity at the left endpoint a.

    Panels shrink geometrically toward a (dyadic grading), so plain
    Gauss-Legendre converges to near machine precision on each panel.
    """
    if not (a < b):
        raise DomainError("integrate_graded requires a < b")
    total = 0.0
    hi = b
    width = b - a
    for j in range(levels):
        lo = a + width * 0.5 ** (j + 1)
        total += integrate(f, lo, hi, panels=panels_per_level)
        hi = lo
    # innermost sliver has width ~ 2^-levels * (b-a); for log-type
    # singularities its contribution is far below 1e-12 by construction
    return total


# ---------------------------------------------------------------------------
# Gamma on the imaginary axis

# Lanczos approximation, g = 7, 9 terms (Godfrey's coefficients; see
# Numerical Recipes 3rd ed. section 6.1).  Valid for Re z > 0.
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _loggamma_right_half(z: complex) -> complex:
    """log Gamma(z) for Re z >= 0.5 via Lanczos.  Principal branch of the
    individual logs; callers only use differences so the overall branch is
    irrelevant here."""
    zz = z - 1.0
    acc = _LANCZOS_C[0]
    for k in range(1, 9):
        acc += _LANCZOS_C[k] / (zz + k)
    t = zz + _LANCZOS_G + 0.5
    return (0.5 * math.log(2.0 * math.pi)
            + (zz + 0.5) * cmath.log(t) - t + cmath.log(acc))


def gamma_arg_imag(nu: float) -> tuple[float, float]:
    """arg Gamma(i nu) wrapped to (-pi, pi] and log |Gamma(i nu)|, nu real != 0.

    Uses Gamma(i nu) = Gamma(1 + i nu) / (i nu) with Lanczos for the shifted
    argument (Re = 1, always in the valid half-plane).
    """
    if nu == 0.0 or not math.isfinite(nu):
        raise DomainError("gamma_arg_imag requires finite nonzero nu")
    lg = _loggamma_right_half(1.0 + 1j * nu)
    # subtract log(i nu) = log|nu| + i sign(nu) pi/2
    arg = lg.imag - math.copysign(0.5 * math.pi, nu)
    log_abs = lg.real - math.log(abs(nu))
    # wrap to (-pi, pi]
    arg = math.remainder(arg, 2.0 * math.pi)
    if arg <= -math.pi:
        arg += 2.0 * math.pi
    return arg, log_abs


def gamma_real(x: float) -> float:
    """Gamma(x) for real x > 0 (Lanczos; used for series normalizations)."""
    if x <= 0:
        raise DomainError("gamma_real requires x > 0")
    return float(cmath.exp(_loggamma_right_half(complex(x, 0.0))).real)


# ---------------------------------------------------------------------------
# Airy Ai and Ai'

# Ai(0) = 3^(-2/3)/Gamma(2/3), Ai'(0) = -3^(-1/3)/Gamma(1/3)  (DLMF 9.2.3-4)
_AI0 = np.longdouble("0.3550280538878172392600631860041831763979791741991772")
_AIP0 = np.longdouble("-0.2588194037928067984051835601892039634790911383549846")

_SERIES_CUT_POS = 5.0   # switch to the s -> +inf expansion above this
_SERIES_CUT_NEG = -7.0  # switch to the oscillatory expansion below this


def _airy_series(s: float) -> tuple[float, float]:
    """Maclaurin series for (Ai, Ai') in extended precision (DLMF 9.4.1-2).

    Used for -7 <= s <= 5; extended precision absorbs the exponential
    cancellation on the positive side (ratio ~ e^{2 zeta} ~ 3e6 at s = 5).
    """
    sl = np.longdouble(s)
    s3 = sl * sl * sl
    # Ai = Ai(0) f + Ai'(0) g ; Ai' = Ai(0) f' + Ai'(0) g'
    f = np.longdouble(1.0)
    tf = np.longdouble(1.0)
    g = sl
    tg = sl
    fp = np.longdouble(0.0)
    tfp = sl * sl / 2.0  # first f' term, added at k = 1 below
    gp = np.longdouble(1.0)
    tgp = np.longdouble(1.0)
    tiny = np.longdouble(1e-26)
    for k in range(1, 200):
        tf = tf * s3 / ((3 * k - 1) * (3 * k))
        f += tf
        tg = tg * s3 / ((3 * k) * (3 * k + 1))
        g += tg
        if k >= 2:
            tfp = tfp * s3 / ((3 * k - 3) * (3 * k - 1))
        fp += tfp
        tgp = tgp * s3 / ((3 * k - 2) * (3 * k))
        gp += tgp
        scale = abs(f) + abs(g) + np.longdouble(1.0)
        if abs(tf) < tiny * scale and abs(tg) < tiny * scale:
            break
    ai = _AI0 * f + _AIP0 * g
    aip = _AI0 * fp + _AIP0 * gp
    return float(ai), float(aip)


@lru_cache(maxsize=1)
def _asym_uv(nmax: int = 30) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """u_k, v_k coefficients of the Airy asymptotic expansions (DLMF 9.7.2)."""
    u = [1.0]
    v = [1.0]
    for k in range(1, nmax):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1)
                 / (216.0 * k * (2 * k - 1)))
        v.append(-u[-1] * (6 * k + 1) / (6 * k - 1))
    return tuple(u), tuple(v)


def _asym_sum(coeffs, zeta: float, sign_alternate: bool) -> float:
    """Optimally truncated sum of c_k * (+-1)^k zeta^{-k}."""
    total = 0.0
    prev = math.inf
    zk = 1.0
    for k, c in enumerate(coeffs):
        term = c * zk
        if abs(term) > prev:
            break
        total += (-term if (sign_alternate and k % 2 == 1) else term)
        prev = abs(term)
        zk /= zeta
    return total


def _airy_asym_pos(s: float) -> tuple[float, float]:
    u, v = _asym_uv()
    zeta = (2.0 / 3.0) * s ** 1.5
    pre = math.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    ai = pre * s ** -0.25 * _asym_sum(u, zeta, True)
    aip = -pre * s ** 0.25 * _asym_sum(v, zeta, True)
    return ai, aip


def _airy_asym_neg(s: float) -> tuple[float, float]:
    # s < 0; oscillatory expansion DLMF 9.7.9-10
    u, v = _asym_uv()
    z = -s
    zeta = (2.0 / 3.0) * z ** 1.5
    w = zeta - 0.25 * math.pi
    cw, sw = math.cos(w), math.sin(w)

    def even_odd(coeffs):
        ev = 0.0
        od = 0.0
        prev = math.inf
        zk = 1.0
        for k, c in enumerate(coeffs):
            term = c * zk
            if abs(term) > prev:
                break
            signed = term if (k // 2) % 2 == 0 else -term
            if k % 2 == 0:
                ev += signed
            else:
                od += signed
            prev = abs(term)
            zk /= zeta
        return ev, od

    ue, uo = even_odd(u)
    ve, vo = even_odd(v)
    ai = (cw * ue + sw * uo) / (math.sqrt(math.pi) * z ** 0.25)
    aip = (sw * ve - cw * vo) * z ** 0.25 / math.sqrt(math.pi)
    return ai, aip


def airy_ai(s: float) -> float:
    """Airy function Ai(s), absolute accuracy ~1e-12 on [-10, 12]."""
    return _airy_pair(float(s))[0]


def airy_ai_prime(s: float) -> float:
    """Derivative Ai'(s)."""
    return _airy_pair(float(s))[1]


def _airy_pair(s: float) -> tuple[float, float]:
    if not math.isfinite(s):
        raise DomainError("airy argument must be finite")
    if s > _SERIES_CUT_POS:
        return _airy_asym_pos(s)
    if s < _SERIES_CUT_NEG:
        return _airy_asym_neg(s)
    return _airy_series(s)


# ---------------------------------------------------------------------------
# Elliptic integrals / functions (parameter convention: m = k^2)


def elliptic_K(m: float) -> float:
    """Complete elliptic integral K(m) = int_0^{pi/2} (1 - m sin^2)^{-1/2},
    via the arithmetic-geometric mean.  Parameter convention (m, not the
    modulus k)."""
    if not (0.0 <= m < 1.0):
        raise DomainError(f"elliptic_K requires 0 <= m < 1, got {m}")
    a = 1.0
    b = math.sqrt(1.0 - m)
    for _ in range(60):
        if abs(a - b) <= 1e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2.0 * a)


def jacobi_cn(u: float, m: float) -> float:
    """Jacobi elliptic cn(u | m), parameter convention, 0 <= m < 1.

    Descending Landen (Gauss) transformation with backward phase recursion
    (Abramowitz & Stegun 16.4, 17.6).
    """
    if not (0.0 <= m < 1.0):
        raise DomainError(f"jacobi_cn requires 0 <= m < 1, got {m}")
    if m == 0.0:
        return math.cos(u)
    a = [1.0]
    c = [math.sqrt(m)]
    b = math.sqrt(1.0 - m)
    n = 0
    while abs(c[n]) > 1e-16 * a[n] and n < 60:
        an = 0.5 * (a[n] + b)
        cn1 = 0.5 * (a[n] - b)
        b = math.sqrt(a[n] * b)
        a.append(an)
        c.append(cn1)
        n += 1
    phi = (2.0 ** n) * a[n] * u
    for i in range(n, 0, -1):
        ratio = c[i] / a[i]
        phi = 0.5 * (phi + math.asin(max(-1.0, min(1.0, ratio * math.sin(phi)))))
    return math.cos(phi)
