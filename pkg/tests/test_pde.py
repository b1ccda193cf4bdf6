"""Pseudo-spectral solver tests.

Oracles used here, in rough order of appearance:
  - grid geometry facts are checked against hand-computed dx and wavenumber
    spacing (pi/W for a [-W, W) box),
  - discretization mass integrals are compared with the exact spike strengths
    (trapezoid-corrected indicator wells),
  - the travelling sech^2 profile u = -(U^2/2) sech^2((U x - U^3 t + log 2)/2)
    is an exact solution, so evolving its t=0 slice and comparing against the
    shifted closed form tests the full stepper with no scattering machinery,
  - quadratic invariants (mass, l2) must be conserved to roundoff by the
    masked Galerkin + RK4 scheme at production time steps,
  - backend equivalence: the compiled kernels and the pure numpy fallback
    define identical floating-point evaluation trees, so whole runs must agree
    bitwise, not just to tolerance.
"""

import os
import subprocess
import sys

import numpy as np
import pytest
from scipy.fft import rfft

from kdvdelta import _stepper
from kdvdelta._stepper import _fallback
from kdvdelta.errors import DomainError, InstabilityError
from kdvdelta.pde import (
    FieldSnapshot,
    Grid,
    conserved,
    discretize_profile,
    evolve,
)
from kdvdelta.scattering import DeltaProfile


# ---------------------------------------------------------------------------
# Grid


def test_grid_geometry():
    g = Grid(64.0, 4096)
    assert g.dx == 128.0 / 4096
    x = g.x
    assert x[0] == -64.0
    assert x[-1] == pytest.approx(64.0 - g.dx)
    k = g.wavenumbers
    assert k.size == 4096 // 2 + 1
    assert k[1] == pytest.approx(np.pi / 64.0)
    assert k[0] == 0.0


@pytest.mark.parametrize(
    "W,n",
    [
        (0.0, 4096),
        (-3.0, 4096),
        (np.inf, 4096),
        (64.0, 1000),  # not a power of two
        (64.0, 2048),  # too small
        (64.0, 4095),
    ],
)
def test_grid_rejects_bad_parameters(W, n):
    with pytest.raises(DomainError):
        Grid(W, n)


# ---------------------------------------------------------------------------
# FieldSnapshot


def test_snapshot_shape_mismatch():
    g = Grid(64.0, 4096)
    with pytest.raises(DomainError):
        FieldSnapshot(g, 0.0, np.zeros(17))


def test_snapshot_rejects_nonfinite():
    g = Grid(64.0, 4096)
    u = np.zeros(4096)
    u[5] = np.nan
    with pytest.raises(InstabilityError):
        FieldSnapshot(g, 0.0, u)
    u[5] = np.inf
    with pytest.raises(InstabilityError):
        FieldSnapshot(g, 0.0, u)


def test_snapshot_copies_and_freezes():
    g = Grid(64.0, 4096)
    u = np.zeros(4096)
    snap = FieldSnapshot(g, 0.0, u)
    u[0] = 7.0  # mutating the source must not leak in
    assert snap.u[0] == 0.0
    with pytest.raises((ValueError, RuntimeError)):
        snap.u[0] = 1.0


# ---------------------------------------------------------------------------
# discretize_profile


def test_discretize_exact_mass_single():
    g = Grid(64.0, 4096)
    u0 = discretize_profile(DeltaProfile.single(2.0), g)
    # trapezoid integral must equal the spike integral -U0 exactly-ish
    assert g.dx * np.sum(u0.u) == pytest.approx(-2.0, abs=1e-13)
    assert u0.t == 0.0


def test_discretize_default_width_is_4dx():
    g = Grid(64.0, 4096)
    u0 = discretize_profile(DeltaProfile.single(2.0), g)
    # an indicator of width 4dx strictly centred at 0 covers 3 or 4 samples;
    # centred on a grid point it covers x in {-dx, 0, +dx} plus edges
    assert np.count_nonzero(u0.u) in (3, 4)


def test_discretize_two_spikes_disjoint_and_additive():
    g = Grid(64.0, 4096)
    prof = DeltaProfile(((1.0, -10.0), (3.0, 10.0)))
    u0 = discretize_profile(prof, g)
    left = g.dx * np.sum(u0.u[g.x < 0])
    right = g.dx * np.sum(u0.u[g.x > 0])
    assert left == pytest.approx(-1.0, abs=1e-13)
    assert right == pytest.approx(-3.0, abs=1e-13)


def test_discretize_negative_amplitude_gives_positive_bump():
    g = Grid(64.0, 4096)
    u0 = discretize_profile(DeltaProfile.single(-2.0), g)
    assert u0.u.max() > 0.0
    assert g.dx * np.sum(u0.u) == pytest.approx(2.0, abs=1e-13)


def test_discretize_width_too_narrow():
    g = Grid(64.0, 4096)
    with pytest.raises(DomainError):
        discretize_profile(DeltaProfile.single(2.0), g, width=g.dx)


def test_discretize_spike_outside_core():
    g = Grid(64.0, 4096)
    with pytest.raises(DomainError):
        discretize_profile(DeltaProfile.single(2.0, 40.0), g)


def test_discretize_spacing_under_resolved():
    # spikes closer than 8 dx must be refused
    g = Grid(64.0, 4096)
    prof = DeltaProfile(((1.0, 0.0), (1.0, 5 * g.dx)))
    with pytest.raises(DomainError):
        discretize_profile(prof, g)


# ---------------------------------------------------------------------------
# conserved


def test_conserved_at_t0_matches_spike_strength():
    g = Grid(64.0, 4096)
    u0 = discretize_profile(DeltaProfile(((1.5, -5.0), (0.5, 5.0))), g)
    mass, l2 = conserved(u0)
    assert mass == pytest.approx(-2.0, abs=1e-13)
    assert l2 > 0.0


# ---------------------------------------------------------------------------
# evolve: exact solutions and invariants


def _sech2_profile(grid, U0, t):
    arg = 0.5 * (U0 * grid.x - U0**3 * t + np.log(2.0))
    return -(U0**2 / 2.0) / np.cosh(arg) ** 2


def test_zero_field_stays_zero():
    g = Grid(64.0, 4096)
    snap = FieldSnapshot(g, 0.0, np.zeros(4096))
    out = evolve(snap, 1.0, 1e-3)
    assert out[-1].t == 1.0
    assert np.all(out[-1].u == 0.0)


def test_travelling_pulse_matches_closed_form():
    # the closed-form travelling solution, evolved for two time units,
    # must track the analytic shift; this exercises dispersion + nonlinearity
    g = Grid(64.0, 4096)
    U0 = 1.2
    snap = FieldSnapshot(g, 0.0, _sech2_profile(g, U0, 0.0))
    out = evolve(snap, 2.0, 2.5e-4)
    expected = _sech2_profile(g, U0, 2.0)
    err = np.max(np.abs(out[-1].u - expected))
    assert err < 1e-6


def test_invariants_drift_roundoff():
    g = Grid(64.0, 4096)
    U0 = 1.2
    snap = FieldSnapshot(g, 0.0, _sech2_profile(g, U0, 0.0))
    m0, e0 = conserved(snap)
    out = evolve(snap, 2.0, 2.5e-4)
    m1, e1 = conserved(out[-1])
    assert abs(m1 - m0) <= 1e-10 * abs(m0)
    assert abs(e1 - e0) <= 1e-9 * abs(e0)


def test_evolve_from_midrun_snapshot():
    # chaining evolve calls must hit the same state as one long run, up to
    # the rfft/irfft roundtrip roundoff taken at the snapshot boundary
    g = Grid(64.0, 4096)
    snap = FieldSnapshot(g, 0.0, _sech2_profile(g, 1.2, 0.0))
    once = evolve(snap, 1.0, 1e-3)[-1]
    half = evolve(snap, 0.5, 1e-3)[-1]
    again = evolve(half, 1.0, 1e-3)[-1]
    assert again.t == 1.0
    assert np.max(np.abs(once.u - again.u)) < 1e-12


def test_dealias_band_stays_empty():
    g = Grid(64.0, 4096)
    rng = np.random.default_rng(5)
    u = 0.1 * rng.standard_normal(4096)
    snap = FieldSnapshot(g, 0.0, u)
    out = evolve(snap, 0.05, 1e-4)
    v = rfft(out[-1].u)
    keep = 4096 // 3
    # the internal spectral state is hard-zero above the kept band; one
    # irfft/rfft roundtrip reintroduces only roundoff there
    assert np.max(np.abs(v[keep + 1 :])) < 1e-13 * max(1.0, np.max(np.abs(v)))


# ---------------------------------------------------------------------------
# evolve: out_times handling


def test_out_times_multiple_and_order():
    g = Grid(64.0, 4096)
    snap = FieldSnapshot(g, 0.0, _sech2_profile(g, 1.0, 0.0))
    out = evolve(snap, 1.0, 1e-3, out_times=(0.25, 0.5, 1.0))
    assert [s.t for s in out] == [0.25, 0.5, 1.0]


@pytest.mark.parametrize(
    "out_times",
    [
        (0.3, 0.2),        # not ascending
        (0.0,),            # not after start
        (1.5,),            # beyond t_end
        (0.2505,),         # not on the step lattice
        (0.5, 0.5),        # duplicate
    ],
)
def test_out_times_rejected(out_times):
    g = Grid(64.0, 4096)
    snap = FieldSnapshot(g, 0.0, np.zeros(4096))
    with pytest.raises(DomainError):
        evolve(snap, 1.0, 1e-3, out_times=out_times)


def test_t_end_not_divisible_by_dt():
    g = Grid(64.0, 4096)
    snap = FieldSnapshot(g, 0.0, np.zeros(4096))
    with pytest.raises(DomainError):
        evolve(snap, 1.0, 3e-4)


def test_nonpositive_dt_and_t_end():
    g = Grid(64.0, 4096)
    snap = FieldSnapshot(g, 0.0, np.zeros(4096))
    with pytest.raises(DomainError):
        evolve(snap, 1.0, -1e-3)
    with pytest.raises(DomainError):
        evolve(snap, 0.0, 1e-3)


# ---------------------------------------------------------------------------
# evolve: stability guard rails


def test_cfl_precheck_rejects_coarse_dt():
    g = Grid(64.0, 4096)
    u0 = discretize_profile(DeltaProfile.single(2.0), g, width=2 * g.dx)
    with pytest.raises(DomainError) as exc:
        evolve(u0, 1.0, 1e-2)
    assert "dt" in str(exc.value)


def test_overflow_detected_with_step_index():
    # amplitude so large that u*u overflows on the first step
    g = Grid(64.0, 4096)
    u = np.zeros(4096)
    u[2048] = 1e160
    snap = FieldSnapshot(g, 0.0, u)
    with pytest.raises(InstabilityError) as exc:
        evolve(snap, 2e-166, 1e-166)
    assert exc.value.step == 1


@pytest.mark.slow
def test_developing_instability_reports_step_index():
    # a spike-loaded small box with the nonlinear band populated out to the
    # dealias edge pumps energy at overly large dt; the run passes the static
    # dt check (the dispersed field is gentle) but must die mid-run with a
    # step index rather than return NaNs
    g = Grid(224.0, 32768)
    u0 = discretize_profile(DeltaProfile.single(2.0), g, width=2 * g.dx)
    settled = evolve(u0, 3e-3, 1e-5)[-1]
    keep = 32768 // 3
    k_eff = g.wavenumbers[keep]
    u_max = float(np.max(np.abs(settled.u)))
    dt = 1.2e-4
    assert dt < 2.8 / (6.0 * u_max * k_eff)  # static check passes
    with pytest.raises(InstabilityError) as exc:
        evolve(settled, 3.0, dt)  # (3.0 - 0.003) / dt is an exact step count
    assert exc.value.step > 1000


# ---------------------------------------------------------------------------
# backend equivalence


def _run_marker(n_steps=64):
    g = Grid(64.0, 4096)
    u0 = discretize_profile(DeltaProfile.single(1.0), g)
    dt = 1e-4
    out = evolve(u0, n_steps * dt, dt)
    return out[-1].u


def test_fallback_kernels_bitwise_match_active_backend():
    # the fallback evaluation trees are the reference; whichever backend is
    # active must reproduce them bit for bit on random data
    rng = np.random.default_rng(23)
    m = 2049
    def cvec():
        return rng.standard_normal(m) + 1j * rng.standard_normal(m)
    for _ in range(5):
        u = rng.standard_normal(4096)
        E, E2, v, a, b, c, d, gsc = (cvec() for _ in range(8))
        pairs = [
            (_stepper.square_real(u), _fallback.square_real(u)),
            (_stepper.scale_spectrum(gsc, v), _fallback.scale_spectrum(gsc, v)),
            (_stepper.stage_b_in(E, v, a), _fallback.stage_b_in(E, v, a)),
            (_stepper.stage_c_in(E, v, b), _fallback.stage_c_in(E, v, b)),
            (_stepper.stage_d_in(E2, v, E, c), _fallback.stage_d_in(E2, v, E, c)),
            (
                _stepper.rk_combine(E, E2, v, a, b, c, d),
                _fallback.rk_combine(E, E2, v, a, b, c, d),
            ),
        ]
        for got, want in pairs:
            assert np.array_equal(
                got.view(np.float64), want.view(np.float64)
            ), "backend kernels disagree bitwise"


def test_forced_fallback_subprocess_bitwise_match():
    # a whole run under KDVDELTA_FORCE_FALLBACK=1 must equal the active
    # backend's run bit for bit
    here = _run_marker()
    code = (
        "import numpy as np\n"
        "from kdvdelta.pde import Grid, discretize_profile, evolve\n"
        "from kdvdelta.scattering import DeltaProfile\n"
        "import kdvdelta._stepper as S\n"
        "assert S.BACKEND == 'fallback', S.BACKEND\n"
        "g = Grid(64.0, 4096)\n"
        "u0 = discretize_profile(DeltaProfile.single(1.0), g)\n"
        "out = evolve(u0, 64e-4, 1e-4)\n"
        "np.save('/tmp/_fallback_run.npy', out[-1].u)\n"
    )
    env = dict(os.environ, KDVDELTA_FORCE_FALLBACK="1")
    subprocess.run([sys.executable, "-c", code], check=True, env=env)
    there = np.load("/tmp/_fallback_run.npy")
    assert np.array_equal(here, there)


def test_backend_reports_identity():
    assert _stepper.BACKEND in ("compiled", "fallback")
