"""Painleve II transcendent y'' = s y + 2 y^3 with Airy boundary data.

The self-similar evaluator needs the real solution that decays like
rho * Ai(s) as s -> +inf (Ablowitz-Segur family; rho = 1 sits on the
Hastings-McLeod separatrix).  We integrate right-to-left from s_max,
where the Airy data is accurate to machine precision, with an embedded
Cash-Karp RK45 pair and land exactly on every output node so downstream
finite differencing sees a uniform grid.

rho is a calibration input: the Stokes triple (rho, -rho, 0) satisfies
p + q + r + pqr = 0 for every rho, and the sign actually matching the
PDE is frozen in the default run configuration, not here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BlowupError, DomainError, RangeError
from .specfun import airy_ai, airy_ai_prime

_BLOWUP = 1.0e6
_RTOL = 1.0e-12
_ATOL = 1.0e-14
_MAX_STEPS = 2_000_000

# Cash-Karp tableau (Numerical Recipes 16.2).
_B21 = 1.0 / 5.0
_B31, _B32 = 3.0 / 40.0, 9.0 / 40.0
_B41, _B42, _B43 = 3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0
_B51, _B52, _B53, _B54 = -11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0
_B61, _B62, _B63, _B64, _B65 = (1631.0 / 55296.0, 175.0 / 512.0,
                                575.0 / 13824.0, 44275.0 / 110592.0,
                                253.0 / 4096.0)
_C1, _C3, _C4, _C6 = 37.0 / 378.0, 250.0 / 621.0, 125.0 / 594.0, 512.0 / 1771.0
# c - c* for the embedded 4th order error estimate
_E1 = _C1 - 2825.0 / 27648.0
_E3 = _C3 - 18575.0 / 48384.0
_E4 = _C4 - 13525.0 / 55296.0
_E5 = -277.0 / 14336.0
_E6 = _C6 - 1.0 / 4.0


@dataclass(frozen=True)
class PIISolution:
    """Painleve II sample set on a descending uniform grid."""

    rho: float
    s_grid: np.ndarray          # descending, uniform
    y: np.ndarray
    y_prime: np.ndarray
    stokes: tuple[complex, complex, complex] = field(default=(1, -1, 0))

    def __post_init__(self):
        p, q, r = (complex(v) for v in self.stokes)
        if abs(p + q + r + p * q * r) > 1e-12:
            raise DomainError("Stokes triple violates p + q + r + pqr = 0")
        self.s_grid.flags.writeable = False
        self.y.flags.writeable = False
        self.y_prime.flags.writeable = False

    @property
    def step(self) -> float:
        return float(self.s_grid[0] - self.s_grid[1])

    def ode_residual(self) -> np.ndarray:
        """Signed residual y'' - s y - 2 y^3 at interior nodes.

        y'' by the 5-point central stencil (O(h^4)); the 3-point stencil's
        O(h^2) truncation is above 1e-7 once the solution oscillates.
        Returned array aligns with s_grid[2:-2].
        """
        y, s, h = self.y, self.s_grid, self.step
        d2 = (-y[:-4] + 16.0 * y[1:-3] - 30.0 * y[2:-2]
              + 16.0 * y[3:-1] - y[4:]) / (12.0 * h * h)
        yi, si = y[2:-2], s[2:-2]
        return d2 - si * yi - 2.0 * yi**3


def _rhs(s: float, y: float, yp: float) -> tuple[float, float]:
    return yp, s * y + 2.0 * y * y * y


def _ck_step(s: float, y: float, yp: float, h: float):
    """One Cash-Karp stage sweep: returns (y5, yp5, err_y, err_yp)."""
    k1y, k1p = _rhs(s, y, yp)
    k2y, k2p = _rhs(s + _B21 * h, y + h * _B21 * k1y, yp + h * _B21 * k1p)
    k3y, k3p = _rhs(s + 0.3 * h,
                    y + h * (_B31 * k1y + _B32 * k2y),
                    yp + h * (_B31 * k1p + _B32 * k2p))
    k4y, k4p = _rhs(s + 0.6 * h,
                    y + h * (_B41 * k1y + _B42 * k2y + _B43 * k3y),
                    yp + h * (_B41 * k1p + _B42 * k2p + _B43 * k3p))
    k5y, k5p = _rhs(s + h,
                    y + h * (_B51 * k1y + _B52 * k2y + _B53 * k3y + _B54 * k4y),
                    yp + h * (_B51 * k1p + _B52 * k2p + _B53 * k3p + _B54 * k4p))
    k6y, k6p = _rhs(s + 0.875 * h,
                    y + h * (_B61 * k1y + _B62 * k2y + _B63 * k3y
                             + _B64 * k4y + _B65 * k5y),
                    yp + h * (_B61 * k1p + _B62 * k2p + _B63 * k3p
                              + _B64 * k4p + _B65 * k5p))
    y5 = y + h * (_C1 * k1y + _C3 * k3y + _C4 * k4y + _C6 * k6y)
    yp5 = yp + h * (_C1 * k1p + _C3 * k3p + _C4 * k4p + _C6 * k6p)
    ey = h * (_E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y)
    ep = h * (_E1 * k1p + _E3 * k3p + _E4 * k4p + _E5 * k5p + _E6 * k6p)
    return y5, yp5, ey, ep


def _advance(s: float, y: float, yp: float, target: float, h_try: float):
    """Adaptively integrate from s down to target (< s).  Returns state + h."""
    h = -abs(h_try)
    nsub = 0
    while s > target + 1e-14 * max(1.0, abs(target)):
        if s + h < target:
            h = target - s
        y5, yp5, ey, ep = _ck_step(s, y, yp, h)
        sc_y = _ATOL + _RTOL * max(abs(y), abs(y5))
        sc_p = _ATOL + _RTOL * max(abs(yp), abs(yp5))
        err = max(abs(ey) / sc_y, abs(ep) / sc_p)
        if not math.isfinite(err):
            err = 1e10
        if err <= 1.0:
            s += h
            y, yp = y5, yp5
            if abs(y) > _BLOWUP:
                raise BlowupError(
                    f"|y| exceeded {_BLOWUP:g} at s = {s:.6f} "
                    "(pole of the transcendent; expected for |rho| >= 1)",
                    s=s)
            grow = 0.9 * err ** -0.2 if err > 1e-10 else 5.0
            h *= min(5.0, grow)
        else:
            h *= max(0.1, 0.9 * err ** -0.25)
        if abs(h) < 1e-14 * max(1.0, abs(s)):
            raise BlowupError(
                f"step size underflow at s = {s:.6f} "
                "(derivative blow-up near a pole)", s=s)
        nsub += 1
        if nsub > _MAX_STEPS:
            raise BlowupError(f"step budget exhausted at s = {s:.6f}", s=s)
    return y, yp, h


@lru_cache(maxsize=32)
def _solve_pii_cached(rho: float, s_max: float, s_min: float,
                      step: float) -> PIISolution:
    span = s_max - s_min
    n = int(round(span / step))
    if abs(n * step - span) > 1e-9 * max(1.0, span) or n < 1:
        n = int(math.ceil(span / step - 1e-12))
    hs = span / n
    grid = s_max - hs * np.arange(n + 1)
    grid[-1] = s_min

    y = rho * airy_ai(s_max)
    yp = rho * airy_ai_prime(s_max)
    ys = np.empty(n + 1)
    yps = np.empty(n + 1)
    ys[0], yps[0] = y, yp
    h_try = hs
    scur = s_max
    for j in range(1, n + 1):
        y, yp, h_try = _advance(scur, y, yp, grid[j], h_try)
        scur = grid[j]
        ys[j], yps[j] = y, yp
    return PIISolution(rho=rho, s_grid=grid, y=ys, y_prime=yps,
                       stokes=(complex(rho), complex(-rho), 0j))


def solve_pii(rho: float, s_max: float = 8.0, s_min: float = -8.0,
              step: float = 0.005) -> PIISolution:
    """Integrate y'' = s y + 2 y^3 leftward from y ~ rho Ai at s_max.

    The output grid is uniform from s_max to s_min with spacing <= step
    (the requested step, shrunk minimally so the span divides evenly);
    the integrator sub-steps adaptively inside each cell and lands on
    every node exactly.
    """
    rho = float(rho)
    s_max, s_min, step = float(s_max), float(s_min), float(step)
    if not s_max >= 8.0:
        raise DomainError("s_max must be >= 8 (Airy data regime)")
    if s_min < -8.0:
        raise DomainError("s_min below -8 is outside the validated range")
    if s_min >= s_max:
        raise DomainError("need s_min < s_max")
    if not 0.0 < step <= 0.01:
        raise DomainError("step must lie in (0, 0.01]")
    return _solve_pii_cached(rho, s_max, s_min, step)


def _hermite(th: float, h: float, f0: float, f1: float,
             d0: float, d1: float) -> float:
    t2 = th * th
    t3 = t2 * th
    return ((2.0 * t3 - 3.0 * t2 + 1.0) * f0 + (t3 - 2.0 * t2 + th) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * f1 + (t3 - t2) * h * d1)


def pii_combination(sol: PIISolution, s: float) -> float:
    """y^2(s) + y'(s) by cubic Hermite interpolation on the stored grid.

    y interpolates from (y, y'); y' interpolates from (y', y'') with
    y'' = s y + 2 y^3 taken from the ODE, so both pieces are O(h^4).
    """
    s = float(s)
    g = sol.s_grid
    lo, hi = g[-1], g[0]
    slack = 1e-12 * max(1.0, abs(lo), abs(hi))
    if s > hi + slack or s < lo - slack:
        raise RangeError(f"s = {s:g} outside stored grid [{lo:g}, {hi:g}]")
    s = min(max(s, lo), hi)
    # descending grid: find cell i with g[i] >= s >= g[i+1]
    i = int(np.searchsorted(-g, -s, side="right")) - 1
    i = min(max(i, 0), len(g) - 2)
    h = g[i + 1] - g[i]
    th = (s - g[i]) / h
    y0, y1 = sol.y[i], sol.y[i + 1]
    p0, p1 = sol.y_prime[i], sol.y_prime[i + 1]
    dd0 = g[i] * y0 + 2.0 * y0**3
    dd1 = g[i + 1] * y1 + 2.0 * y1**3
    yi = _hermite(th, h, y0, y1, p0, p1)
    pi_ = _hermite(th, h, p0, p1, dd0, dd1)
    return yi * yi + pi_
