"""Direct pseudo-spectral solver for u_t = 6 u u_x - u_xxx on a periodic box.

This is the verification oracle: it shares no formulas with the
asymptotic evaluators.  Fourier side, v = F[u]:

    v_t = i k^3 v + 3 i k F[u^2]

The linear factor is applied exactly through the interaction picture
(w = exp(-i k^3 t) v), and the remaining nonlinear system is advanced
with classical RK4, following the standard folded form in which only
half-step propagators E = exp(i k^3 dt / 2) appear.  The nonlinear
product is dealiased with the 2/3 rule; the mask is folded into the
nonlinear coefficient and also applied once to the initial spectrum
(delta-profile rectangles carry energy at every mode).

Step-size limit: the exponential propagator removes the k^3 stiffness
entirely, so the binding heuristic for this integrator is advective.
Linearizing the transport term 6 u u_x gives frequencies up to
6 max|u| k_max; RK4's imaginary-axis stability interval then requires

    dt * 6 * max|u| * k_max <= 2.8        (2 sqrt 2 with margin)

with k_max the largest dealiased wavenumber.  (A naive k^3 bound
without the integrating factor would force dt ~ 4e-6 at the production
resolution n = 2^15, W = 1024; it does not apply here.)

Elementwise stage arithmetic is delegated to kdvdelta._stepper, which
provides a compiled kernel set and a bitwise-identical numpy fallback.
"""

from dataclasses import dataclass, field
from math import isfinite

import numpy as np
from scipy.fft import irfft, rfft

from . import _stepper
from .errors import DomainError, InstabilityError
from .scattering import DeltaProfile

_CFL_LIMIT = 2.8


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-W, W) with W = half_width."""

    half_width: float
    n_points: int

    def __post_init__(self):
        if not (self.half_width > 0.0 and isfinite(self.half_width)):
            raise DomainError("half_width must be positive and finite")
        n = self.n_points
        if n < 4096 or (n & (n - 1)) != 0:
            raise DomainError(
                "n_points must be a power of two, at least 4096")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n_points

    @property
    def x(self) -> np.ndarray:
        return -self.half_width + self.dx * np.arange(self.n_points)

    @property
    def wavenumbers(self) -> np.ndarray:
        """rfft wavenumbers, (pi/W) * [0 .. n/2]."""
        return (np.pi / self.half_width) * np.arange(self.n_points // 2 + 1)


@dataclass(frozen=True)
class FieldSnapshot:
    grid: Grid
    t: float
    u: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.shape != (self.grid.n_points,):
            raise DomainError("field length does not match the grid")
        if not np.all(np.isfinite(u)):
            raise InstabilityError(
                f"non-finite field values at t = {self.t}")
        u = u.copy()
        u.flags.writeable = False
        object.__setattr__(self, "u", u)


def conserved(snapshot: FieldSnapshot) -> tuple[float, float]:
    """Trapezoid ``(int u dx, int u^2 dx)`` over the periodic box.

    On a periodic uniform grid the composite trapezoid rule reduces to
    dx * sum.
    """
    dx = snapshot.grid.dx
    u = snapshot.u
    return float(dx * np.sum(u)), float(dx * np.sum(u * u))


def dealias(snapshot: FieldSnapshot) -> FieldSnapshot:
    """Project onto the 2/3-rule band that evolve() actually advances.

    The stepper drops modes above n/3 before the first step, so conserved
    quantities of the evolving solution should be measured on this
    projection, not on the raw discretized profile.
    """
    n = snapshot.grid.n_points
    v = rfft(snapshot.u)
    v[n // 3 + 1:] = 0.0
    return FieldSnapshot(snapshot.grid, snapshot.t, irfft(v, n))


def discretize_profile(profile: DeltaProfile, grid: Grid,
                       width: float | None = None) -> FieldSnapshot:
    """Narrow-rectangle approximation of ``-sum U_n delta(x - x_n)``.

    Each spike becomes ``-U_n / width`` on the points with
    |x - x_n| < width/2, then that rectangle is rescaled so its discrete
    trapezoid integral equals -U_n exactly (multiplicative correction).
    Default width is 4 dx.
    """
    dx = grid.dx
    if width is None:
        width = 4.0 * dx
    if not (width >= 2.0 * dx):
        raise DomainError(f"rectangle width {width} < 2 dx = {2.0 * dx}")
    pos = profile.positions
    amps = profile.amplitudes
    lim = 0.5 * grid.half_width
    if np.any(np.abs(pos) >= lim):
        raise DomainError(
            "spike too close to the domain boundary; profile must sit in "
            f"[-W/2, W/2] = [{-lim}, {lim}]")
    if len(pos) > 1:
        spacing = float(np.min(np.diff(np.sort(pos))))
        if not (dx < spacing / 8.0):
            raise DomainError(
                f"dx = {dx} too coarse for spike spacing {spacing} "
                "(need dx < spacing / 8)")
    x = grid.x
    u = np.zeros(grid.n_points)
    touched = np.zeros(grid.n_points, dtype=bool)
    disjoint_required = len(pos) > 1 and width < float(
        np.min(np.diff(np.sort(pos))))
    for U, x0 in zip(amps, pos):
        mask = np.abs(x - x0) < 0.5 * width
        count = int(np.count_nonzero(mask))
        if count == 0:  # cannot happen for width >= 2 dx
            raise DomainError("rectangle narrower than the grid")
        if disjoint_required:
            assert not np.any(touched & mask), "rectangle supports overlap"
        touched |= mask
        # raw mass dx * count * (-U/width), corrected to -U exactly
        u[mask] += -U / (dx * count)
    return FieldSnapshot(grid, 0.0, u)


def _out_indices(t0: float, dt: float, t_end: float,
                 out_times) -> tuple[int, list[int]]:
    span = t_end - t0
    if not (dt > 0.0 and span > 0.0):
        raise DomainError("need dt > 0 and t_end > start time")
    n_steps = int(round(span / dt))
    if n_steps < 1 or abs(n_steps * dt - span) > 1e-9 * max(1.0, abs(t_end)):
        raise DomainError(
            f"t_end - t0 = {span} is not an integer multiple of dt = {dt}")
    if out_times is None:
        out_times = (t_end,)
    idx = []
    for tau in out_times:
        j = int(round((tau - t0) / dt))
        if j < 1 or j > n_steps or abs(t0 + j * dt - tau) > 1e-9 * max(
                1.0, abs(tau)):
            raise DomainError(
                f"output time {tau} is not a step multiple inside "
                f"({t0}, {t_end}]")
        idx.append(j)
    if idx != sorted(idx) or len(set(idx)) != len(idx):
        raise DomainError("output times must be strictly ascending")
    return n_steps, idx


def evolve(u0: FieldSnapshot, t_end: float, dt: float,
           out_times=None) -> list[FieldSnapshot]:
    """Advance ``u_t = 6 u u_x - u_xxx`` and return requested snapshots.

    out_times defaults to (t_end,); every requested time must coincide
    with a step boundary so output is exact, not interpolated.
    """
    grid = u0.grid
    n = grid.n_points
    n_steps, idx = _out_indices(u0.t, dt, t_end, out_times)

    k = grid.wavenumbers
    keep = n // 3
    mask = (np.arange(k.size) <= keep).astype(float)
    k_max_eff = k[keep]
    u_max = float(np.max(np.abs(u0.u))) or 1.0
    cfl = dt * 6.0 * u_max * k_max_eff
    if cfl > _CFL_LIMIT:
        raise DomainError(
            f"advective stability bound violated: dt*6*max|u|*k_max = "
            f"{cfl:.3f} > {_CFL_LIMIT} (max stable dt ~ "
            f"{_CFL_LIMIT / (6.0 * u_max * k_max_eff):.3e})")

    E = np.exp(0.5j * dt * k**3)
    E2 = E * E
    g = 3j * dt * k * mask

    sqr = _stepper.square_real
    scale = _stepper.scale_spectrum
    st_b = _stepper.stage_b_in
    st_c = _stepper.stage_c_in
    st_d = _stepper.stage_d_in
    comb = _stepper.rk_combine

    v = rfft(u0.u) * mask
    out: list[FieldSnapshot] = []
    want = set(idx)
    for j in range(1, n_steps + 1):
        a = scale(g, rfft(sqr(irfft(v, n))))
        b = scale(g, rfft(sqr(irfft(st_b(E, v, a), n))))
        c = scale(g, rfft(sqr(irfft(st_c(E, v, b), n))))
        d = scale(g, rfft(sqr(irfft(st_d(E2, v, E, c), n))))
        v = comb(E, E2, v, a, b, c, d)
        v0 = complex(v[0])
        if not (isfinite(v0.real) and isfinite(v0.imag)):
            raise InstabilityError(
                f"non-finite field at step {j} (t = {u0.t + j * dt})",
                step=j)
        if j in want:
            u = irfft(v, n)
            if not np.all(np.isfinite(u)):
                raise InstabilityError(
                    f"non-finite field at step {j} (t = {u0.t + j * dt})",
                    step=j)
            out.append(FieldSnapshot(grid, u0.t + j * dt, u))
    return out
