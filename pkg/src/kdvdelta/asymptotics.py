"""Leading-order long-time evaluators for each region of the (x, t) plane.

Region layout for a multi-spike delta profile (velocities v = x/t):
soliton tubes around v = 4 z_j^2, a decay wedge v > C_pos, a self-similar
band |tau| < C_tau around the x ~ t^{1/3} scale (tau = t k0^3 with
k0 = sqrt(|x|/12t)), a collisionless-shock strip
1/C < (-x)/((3t)^{1/3} (log t)^{2/3}) < C, and the dispersive-wave wedge
v < -C_neg.  Everything else gets the label-only TransitionT.

Numerical conventions adopted here (each is a config-visible choice):
  - nu = +(1/2pi) log|s11(k0)|^2 = -(1/2pi) log(1 - |r(k0)|^2) > 0, so the
    modulation amplitude sqrt(4 nu k0 / 3t) is real; the two printed sign
    variants remain available as sensitivity options.
  - 1 - |r|^2 is always evaluated as 1/|s11|^2 (real-axis unitarity):
    near s = 0 the direct difference loses all digits since |r| -> 1.
  - the cnoidal modulus argument alpha enters cn(.; alpha) as the elliptic
    parameter m = alpha by default; m = alpha^2 is the sensitivity option.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ModulationError, RangeError, SpectralError
from .painleve import PIISolution, pii_combination, solve_pii
from .scattering import (DeltaProfile, DiscreteSpectrum, ScatteringData,
                         discrete_eigenvalues, reflection)
from .specfun import (elliptic_K, gamma_arg_imag, integrate, integrate_graded,
                      jacobi_cn)

_TWO_PI = 2.0 * math.pi


class RegionLabel(enum.Enum):
    SOLITON = "Soliton"
    DECAY = "Decay"
    SELF_SIMILAR = "SelfSimilar"
    COLLISIONLESS_SHOCK = "CollisionlessShock"
    DISPERSIVE_WAVE = "DispersiveWave"
    TRANSITION_T = "TransitionT"


@dataclass(frozen=True)
class RegionThresholds:
    """Cutoff constants defining the region decomposition."""

    epsilon_soliton: float = 0.5
    C_pos: float = 1.0
    C_neg: float = 1.0
    C_tau: float = 2.0
    C_shock: float = 4.0

    def __post_init__(self):
        vals = (self.epsilon_soliton, self.C_pos, self.C_neg,
                self.C_tau, self.C_shock)
        if any(not (v > 0.0) for v in vals):
            raise DomainError("all thresholds must be positive")
        if not self.C_shock > 1.0:
            raise DomainError("C_shock must exceed 1")


_DEFAULT_THRESHOLDS = RegionThresholds()


@dataclass(frozen=True)
class RegionEvaluation:
    """Evaluated leading-order value plus named diagnostics."""

    label: RegionLabel
    u: float
    diagnostics: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.u):
            raise SpectralError(f"non-finite u in {self.label.value} region")
        bad = [k for k, v in self.diagnostics.items()
               if not math.isfinite(float(v))]
        if bad:
            raise SpectralError(f"non-finite diagnostics {bad} "
                                f"in {self.label.value} region")


def _signed_tau(x: float, t: float) -> tuple[float, float]:
    """k0 = sqrt(|x|/12t) and tau = t k0^3 signed by sign(-x)."""
    k0 = math.sqrt(abs(x) / (12.0 * t))
    tau = t * k0**3
    if x > 0.0:
        tau = -tau
    return k0, tau


def classify_region(profile: DeltaProfile, x: float, t: float,
                    thresholds: RegionThresholds | None = None) -> RegionLabel:
    """Total classification of (x, t>0) into the asymptotic regions.

    Precedence: soliton tubes, decay wedge, self-similar band, shock strip,
    dispersive wedge, TransitionT fallback.
    """
    if not t > 0.0:
        raise DomainError("classification needs t > 0")
    th = thresholds if thresholds is not None else _DEFAULT_THRESHOLDS
    v = x / t
    spec = discrete_eigenvalues(profile)
    for z in spec.eigenvalues:
        if abs(v - 4.0 * z * z) < th.epsilon_soliton:
            return RegionLabel.SOLITON
    if v > th.C_pos:
        return RegionLabel.DECAY
    _, tau = _signed_tau(x, t)
    if abs(tau) < th.C_tau:
        return RegionLabel.SELF_SIMILAR
    if x < 0.0 and t > 1.0:
        strip = -x / ((3.0 * t) ** (1.0 / 3.0) * math.log(t) ** (2.0 / 3.0))
        if 1.0 / th.C_shock < strip < th.C_shock:
            return RegionLabel.COLLISIONLESS_SHOCK
    if v < -th.C_neg:
        return RegionLabel.DISPERSIVE_WAVE
    return RegionLabel.TRANSITION_T


# ---------------------------------------------------------------------------
# Soliton region


def soliton_phase_offsets(spectrum: DiscreteSpectrum) -> np.ndarray:
    """Phase offsets l_j for the ordered multi-soliton train.

    l_j = (1/2) [ log|gamma_j| - log(2 z_j)
                  + sum_{m>j} log((z_m - z_j)/(z_m + z_j)) ]
    with z ascending.  Uses the stored log-moduli so widely separated spike
    clusters (|gamma| overflowing a double) still work.  A norming constant
    with a phase off the canonical -i ray is flagged, not fixed.
    """
    z = np.asarray(spectrum.eigenvalues)
    if z.size == 0:
        raise DomainError("soliton evaluation needs a nonempty spectrum")
    logmod = np.asarray(spectrum.norming_log_moduli)
    for g in spectrum.norming_constants:
        if np.isfinite(abs(g)) and abs(g.real) > 1e-8 * abs(g):
            warnings.warn("norming constant off the -i ray; using |gamma|",
                          RuntimeWarning)
    offs = np.empty(z.size)
    for j in range(z.size):
        acc = logmod[j] - math.log(2.0 * z[j])
        for m in range(j + 1, z.size):
            acc += math.log((z[m] - z[j]) / (z[m] + z[j]))
        offs[j] = 0.5 * acc
    return offs


def eval_soliton(spectrum: DiscreteSpectrum, x: float,
                 t: float) -> RegionEvaluation:
    """u = -2 sum_j z_j^2 sech^2(z_j x - 4 z_j^3 t - l_j).

    The normalization is pinned by the single-spike closed form
    u = -(U0^2/2) sech^2((U0 x - U0^3 t + log 2)/2), which this expression
    reproduces exactly at z = U0/2, |gamma| = U0/2 (a frozen unit test).
    """
    z = np.asarray(spectrum.eigenvalues)
    offs = soliton_phase_offsets(spectrum)
    arg = z * x - 4.0 * z**3 * t - offs
    arg = np.clip(arg, -350.0, 350.0)  # sech^2 underflows past ~+-355 anyway
    u = -2.0 * float(np.sum(z**2 / np.cosh(arg) ** 2))
    diag: dict[str, float] = {"n_solitons": float(z.size)}
    for j in range(z.size):
        diag[f"z_{j+1}"] = float(z[j])
        diag[f"velocity_{j+1}"] = float(4.0 * z[j] ** 2)
        diag[f"center_{j+1}"] = float(4.0 * z[j] ** 2 * t + offs[j] / z[j])
    return RegionEvaluation(RegionLabel.SOLITON, u, diag)


# ---------------------------------------------------------------------------
# Decay region


def eval_decay(x: float, t: float) -> RegionEvaluation:
    """Leading order vanishes faster than any power of t."""
    return RegionEvaluation(RegionLabel.DECAY, 0.0, {})


# ---------------------------------------------------------------------------
# Self-similar region


def eval_self_similar(pii: PIISolution, x: float,
                      t: float) -> RegionEvaluation:
    """u = (3t)^{-2/3} (y^2(s) + y'(s)), s = x/(3t)^{1/3}."""
    if not t > 0.0:
        raise DomainError("self-similar evaluation needs t > 0")
    s = x / (3.0 * t) ** (1.0 / 3.0)
    u = (3.0 * t) ** (-2.0 / 3.0) * pii_combination(pii, s)
    _, tau = _signed_tau(x, t)
    return RegionEvaluation(RegionLabel.SELF_SIMILAR, u,
                            {"s": s, "tau": tau})


# ---------------------------------------------------------------------------
# Dispersive wave region

_NU_CONVENTIONS = ("neg_half_over_pi", "theorem_over_pi",
                   "appendix_half_over_pi")


def _log_one_minus_r2(profile: DeltaProfile, s):
    """log(1 - |r(s)|^2) = -log|s11(s)|^2, stable down to s -> 0."""
    m11 = ScatteringData(profile).s11(np.asarray(s, dtype=complex))
    a2 = m11.real**2 + m11.imag**2
    if np.any(a2 < 1.0 - 1e-9):
        raise SpectralError("|s11| < 1 on the real axis (unitarity broken)")
    return -np.log(a2)


def nu_exponent(profile: DeltaProfile, k0: float,
                convention: str = "neg_half_over_pi") -> float:
    """The slowly varying exponent nu(k0) under the chosen sign convention."""
    if convention not in _NU_CONVENTIONS:
        raise DomainError(f"unknown nu convention {convention!r}")
    logw = float(_log_one_minus_r2(profile, k0))  # log(1-|r|^2) < 0
    if convention == "neg_half_over_pi":
        return -logw / _TWO_PI
    if convention == "theorem_over_pi":
        return 2.0 * logw / _TWO_PI
    return logw / _TWO_PI


def chi_integral(profile: DeltaProfile, k0: float, *,
                 panels_per_level: int | None = None,
                 check: bool = True) -> complex:
    """chi(k0) = (1/2pi i) int_{-k0}^{k0} log(w(s)/w(k0)) ds/(s - k0),
    where w = 1 - |r|^2 evaluated as 1/|s11|^2.

    w is even and w(s) ~ s^{2L} near s = 0, so the integrand has an
    integrable log singularity at 0 (handled by dyadic grading) and is
    bounded at both +-k0 (the log ratio vanishes there).  The interval is
    trimmed to +-k0(1 - 1e-6); the right sliver is restored by its
    first-order value g'(k0) * k0 * 1e-6 (second-order remainder
    ~ |g''| (k0 eps)^2 / 4 ~ 1e-12) and the left sliver is below
    |g'| eps^2 k0 / 2 ~ 1e-12 by evenness, so both are negligible at the
    1e-9 level the convergence check enforces.  The integrand is real, so
    chi is purely imaginary by construction; asserted anyway.
    """
    if not k0 > 0.0:
        raise DomainError("chi integral needs k0 > 0")
    gk = _log_one_minus_r2(profile, k0)

    def g_over(s):
        return (_log_one_minus_r2(profile, s) - gk) / (s - k0)

    eps = 1e-6
    cut = k0 * (1.0 - eps)

    def quad(ppl: int) -> float:
        right = integrate_graded(g_over, 0.0, cut, panels_per_level=ppl)
        left = integrate_graded(lambda u: g_over(-u), 0.0, cut,
                                panels_per_level=ppl)
        return right + left

    if panels_per_level is None:
        # multi-spike |r|^2 oscillates with wavelength ~ pi/(x_L - x_1);
        # seed the panel count from the number of periods across [0, k0]
        span = float(profile.positions[-1] - profile.positions[0])
        panels_per_level = max(2, math.ceil(span * k0 / 8.0))
    val = quad(panels_per_level)
    if check:
        achieved = math.inf
        for _ in range(4):
            finer = quad(2 * panels_per_level)
            achieved = abs(finer - val)
            if achieved <= 1e-8 * max(1.0, abs(finer)):
                val = finer
                break
            panels_per_level *= 2
            val = finer
        else:
            raise SpectralError(
                f"chi quadrature not converged: doubling panels still moved "
                f"the integral by {achieved:.3e}")
    delta = 1e-5 * k0
    gprime = float((_log_one_minus_r2(profile, k0 + delta)
                    - _log_one_minus_r2(profile, k0 - delta)) / (2.0 * delta))
    val += gprime * (k0 - cut)
    chi = complex(val) / (2j * math.pi)
    if abs(chi.real) > 1e-8 * max(1.0, abs(chi)):
        raise SpectralError("chi acquired a real part")
    return chi


def eval_dispersive(profile: DeltaProfile, x: float, t: float,
                    nu_convention: str = "neg_half_over_pi"
                    ) -> RegionEvaluation:
    """u = sqrt(4 nu k0 / 3t) sin(16 t k0^3 - nu log(192 t k0^3) + phi).

    phi = pi/4 - arg r(k0) + arg Gamma(i nu) - 2i chi(k0)
          + sum_j 4 arctan(z_j / k0)  (one term per bound state; for a
          single positive spike this is the printed 4 arctan(U0/2k0)).
    The diagnostic phi_no_bound omits the arctan sum: the two printed phase
    formulas (with / without bound states) differ by exactly that term.
    Under the sign-variant nu conventions the envelope uses |nu| so the
    amplitude stays real; the default convention has nu > 0.
    """
    if not x < 0.0:
        raise DomainError("dispersive evaluation needs x < 0")
    if not t > 0.0:
        raise DomainError("dispersive evaluation needs t > 0")
    k0 = math.sqrt(-x / (12.0 * t))
    nu = nu_exponent(profile, k0, nu_convention)
    r_k0 = reflection(profile, k0)
    chi = chi_integral(profile, k0)
    chi_term = (-2j * chi).real
    gamma_arg, _ = gamma_arg_imag(nu)
    spec = discrete_eigenvalues(profile)
    bound_sum = float(sum(4.0 * math.atan(z / k0)
                          for z in spec.eigenvalues))
    phi_no_bound = (0.25 * math.pi - math.atan2(r_k0.imag, r_k0.real)
                    + gamma_arg + chi_term)
    phi = phi_no_bound + bound_sum
    envelope = math.sqrt(4.0 * abs(nu) * k0 / (3.0 * t))
    tau = t * k0**3
    u = envelope * math.sin(16.0 * tau - nu * math.log(192.0 * tau) + phi)
    return RegionEvaluation(
        RegionLabel.DISPERSIVE_WAVE, u,
        {"k0": k0, "nu": nu, "envelope": envelope, "phi": phi,
         "phi_no_bound": phi_no_bound, "bound_sum": bound_sum,
         "arg_r": math.atan2(r_k0.imag, r_k0.real),
         "chi_im": chi.imag, "tau": tau})


# ---------------------------------------------------------------------------
# Collisionless shock region


def _closure_integral(a: float) -> float:
    """int_a^b sqrt((p^2-a^2)(b^2-p^2)) dp, b = sqrt(2-a^2).

    Substituting p = a + (b-a)u^2 with u = sin(psi) clears the square-root
    zeros at both endpoints; the psi-integrand is smooth.
    """
    b = math.sqrt(2.0 - a * a)

    def f(psi):
        sn = np.sin(psi)
        p = a + (b - a) * sn * sn
        rad = (p + a) * (b + p)
        assert np.all(rad >= 0.0)
        return 2.0 * (b - a) ** 2 * (sn * np.cos(psi)) ** 2 * np.sqrt(rad)

    return integrate(f, 0.0, 0.5 * math.pi, panels=8)


def solve_modulation(k0: float, tau: float) -> tuple[float, float, float]:
    """Solve log(k0^2)/tau = -24 int_a^b sqrt((p^2-a^2)(b^2-p^2)) dp
    for a in (0,1) with b = sqrt(2-a^2); returns (a, b, alpha = 1-a^2/b^2).

    The right side increases strictly from -16 sqrt(2) to 0 as a goes
    0 -> 1 (the integral shrinks), so bisection is well posed whenever the
    left side lies in that window; otherwise the point is outside the
    strip's validity and a ModulationError is raised.
    """
    if not 0.0 < k0 < 1.0:
        raise DomainError("modulation needs k0 in (0, 1) so log k0^2 < 0")
    if not tau > 0.0:
        raise DomainError("modulation needs tau > 0")
    target = math.log(k0 * k0) / tau

    def h(a: float) -> float:
        return -24.0 * _closure_integral(a) - target

    lo, hi = 1e-12, 1.0 - 1e-12
    h_lo = h(lo)
    if h_lo >= 0.0 or h(hi) <= 0.0:
        raise ModulationError(
            f"log(k0^2)/tau = {target:.6g} outside the attainable window "
            f"({-16.0 * math.sqrt(2.0):.6g}, 0); no modulation root")
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        if h(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    a = 0.5 * (lo + hi)
    b = math.sqrt(2.0 - a * a)
    return a, b, 1.0 - a * a / (b * b)


def _theta_integral(a: float, b: float) -> float:
    """int_0^a sqrt((p^2-a^2)(p^2-b^2)) dp via p = a sin(psi); both factors
    are negative on (0, a) so the radicand is positive and the result real.
    """

    def f(psi):
        sn = np.sin(psi)
        rad = b * b - (a * sn) ** 2
        assert np.all(rad >= 0.0)
        return a * a * np.cos(psi) ** 2 * np.sqrt(rad)

    return integrate(f, 0.0, 0.5 * math.pi, panels=8)


def _theta0(a: float, b: float, m_cn: float, gamma_param: float) -> float:
    """theta0 = K(m_cn) - I2 - I3/(2pi) with

    I2 = int_1^{sqrt(b/a)} ((p^2-1)(1-(a/b)^2 p^2))^{-1/2} dp
    I3 = int_{-1}^{1} log(2 gamma a^2 p^2) ((p^2-1)((a/b)^2 p^2 - 1))^{-1/2} dp

    (radicand grouped so it is positive on (-1,1)).  I2 is desingularized
    at p = 1 by p = 1 + (P-1)u^2; I3 reduces by evenness to
    2 [ log(2 gamma a^2) K(c^2) + 2 J ], c = a/b,
    J = int_0^{pi/2} log(sinphi) (1 - c^2 sin^2 phi)^{-1/2} dphi.
    """
    c = a / b
    P = math.sqrt(b / a)

    def f2(u):
        p = 1.0 + (P - 1.0) * u * u
        rad = (p + 1.0) * (1.0 - (c * p) ** 2)
        assert np.all(rad > 0.0)
        return 2.0 * math.sqrt(P - 1.0) / np.sqrt(rad)

    i2 = integrate(f2, 0.0, 1.0, panels=16)

    def fj(phi):
        sn = np.sin(phi)
        return np.log(sn) / np.sqrt(1.0 - (c * sn) ** 2)

    j = integrate_graded(fj, 0.0, 0.5 * math.pi)
    i3 = 2.0 * (math.log(2.0 * gamma_param * a * a) * elliptic_K(c * c)
                + 2.0 * j)
    return elliptic_K(m_cn) - i2 - i3 / _TWO_PI


def eval_collisionless(profile: DeltaProfile, x: float, t: float,
                       gamma_param: float = 1.0,
                       alpha_convention: str = "parameter"
                       ) -> RegionEvaluation:
    """u = -(2x/3t) (A + B cn^2(2 K(m) theta + theta0; m)).

    A = (b^2-1)/4, B = (1-b^2)/2 = -2A (asserted); theta = (12 tau/pi) times
    the oscillation integral; m = alpha by default ("parameter"), m = alpha^2
    under the "modulus" reading of cn(.; alpha).  gamma_param is the
    undetermined positive constant inside theta0's logarithm.
    """
    if not x < 0.0:
        raise DomainError("shock evaluation needs x < 0")
    if not t > math.e:
        raise DomainError("shock evaluation needs t > e")
    if not gamma_param > 0.0:
        raise DomainError("gamma_param must be positive")
    if alpha_convention not in ("parameter", "modulus"):
        raise DomainError(f"unknown alpha convention {alpha_convention!r}")
    k0 = math.sqrt(-x / (12.0 * t))
    tau = t * k0**3
    a, b, alpha = solve_modulation(k0, tau)
    A = 0.25 * (b * b - 1.0)
    B = 0.5 * (1.0 - b * b)
    assert abs(B + 2.0 * A) < 1e-14
    m_cn = alpha if alpha_convention == "parameter" else alpha * alpha
    theta = (12.0 * tau / math.pi) * _theta_integral(a, b)
    theta0 = _theta0(a, b, m_cn, gamma_param)
    K = elliptic_K(m_cn)
    cn = jacobi_cn(2.0 * K * theta + theta0, m_cn)
    u = -(2.0 * x / (3.0 * t)) * (A + B * cn * cn)
    return RegionEvaluation(
        RegionLabel.COLLISIONLESS_SHOCK, u,
        {"k0": k0, "tau": tau, "a": a, "b": b, "alpha": alpha,
         "A": A, "B": B, "theta": theta, "theta0": theta0, "K": K,
         "strip": -x / ((3.0 * t) ** (1.0 / 3.0)
                        * math.log(t) ** (2.0 / 3.0))})


# ---------------------------------------------------------------------------
# Dispatch


def evaluate_point(profile: DeltaProfile, x: float, t: float, *,
                   thresholds: RegionThresholds | None = None,
                   rho: float = 1.0,
                   nu_convention: str = "neg_half_over_pi",
                   gamma_param: float = 1.0,
                   alpha_convention: str = "parameter",
                   pii: PIISolution | None = None
                   ) -> RegionEvaluation | None:
    """Classify (x, t) and run the matching evaluator.

    Returns None for TransitionT (label-only, no known leading order).
    Self-similar points use the supplied Painleve solution, or a cached
    rho-solve on s in [-8, 14]; |s| beyond that range raises RangeError
    (only reachable at extreme t where the band outgrows the validated
    Painleve window).
    """
    label = classify_region(profile, x, t, thresholds)
    if label is RegionLabel.TRANSITION_T:
        return None
    if label is RegionLabel.SOLITON:
        return eval_soliton(discrete_eigenvalues(profile), x, t)
    if label is RegionLabel.DECAY:
        return eval_decay(x, t)
    if label is RegionLabel.SELF_SIMILAR:
        if pii is None:
            pii = solve_pii(rho, s_max=14.0, s_min=-8.0, step=0.005)
        return eval_self_similar(pii, x, t)
    if label is RegionLabel.COLLISIONLESS_SHOCK:
        return eval_collisionless(profile, x, t, gamma_param=gamma_param,
                                  alpha_convention=alpha_convention)
    return eval_dispersive(profile, x, t, nu_convention=nu_convention)
