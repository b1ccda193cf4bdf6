"""Run configuration: JSON documents validated into a frozen RunConfig.

A config is a single JSON object. Presets are JSON fragments merged under
any user-supplied file, and flag overrides sit on top. The canonical
serialization (sorted keys, fixed separators) feeds the config hash that the
manifests carry, so identical configs produce identical artifacts.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .asymptotics import RegionThresholds
from .errors import ConfigError
from .scattering import DeltaProfile

NU_CONVENTIONS = ("neg_half_over_pi", "theorem_over_pi", "appendix_half_over_pi")
ALPHA_CONVENTIONS = ("parameter", "modulus")
GATE_MODES = ("quick", "full", "skip")


@dataclass(frozen=True)
class RunConfig:
    profile: DeltaProfile
    t_values: tuple[float, ...] = (50.0,)
    x_window: tuple[float, float] = (-700.0, 300.0)
    half_width: float = 1024.0
    n_points: int = 2**15
    dt: float = 2.5e-4
    width_dx: int = 2
    pii_step: float = 0.005
    thresholds: RegionThresholds = field(default_factory=RegionThresholds)
    gamma_param: float = 1.0
    nu_convention: str = "neg_half_over_pi"
    pii_rho: float = 1.0
    alpha_convention: str = "parameter"
    x_samples: int = 1201
    k_max: float = 5.0
    k_samples: int = 250
    gate_mode: str = "quick"
    gate_t: float = 5.0
    phase_L: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    phase_sigma_h: tuple[float, float, int] = (0.05, 5.95, 60)
    lowpass_pass_k: float = 3.0
    lowpass_stop_k: float = 4.0

    def __post_init__(self):
        if not self.profile.spikes:
            raise ConfigError("profile: needs at least one spike")
        if not self.t_values:
            raise ConfigError("t_values: must be nonempty")
        if any(t <= 0 for t in self.t_values):
            raise ConfigError("t_values: all entries must be positive")
        if any(b <= a for a, b in zip(self.t_values, self.t_values[1:])):
            raise ConfigError("t_values: must be strictly ascending")
        if not self.x_window[0] < self.x_window[1]:
            raise ConfigError("x_window: need lo < hi")
        if self.dt <= 0:
            raise ConfigError("dt: must be positive")
        if self.width_dx < 2:
            raise ConfigError("width_dx: rectangle needs at least 2 samples")
        if self.pii_step <= 0:
            raise ConfigError("pii_step: must be positive")
        if self.nu_convention not in NU_CONVENTIONS:
            raise ConfigError(f"nu_convention: unknown '{self.nu_convention}'")
        if self.alpha_convention not in ALPHA_CONVENTIONS:
            raise ConfigError(f"alpha_convention: unknown '{self.alpha_convention}'")
        if self.gate_mode not in GATE_MODES:
            raise ConfigError(f"gate_mode: unknown '{self.gate_mode}'")
        if self.pii_rho not in (1.0, -1.0, 0.0):
            raise ConfigError("pii_rho: must be +1, -1 or 0")
        if self.x_samples < 2:
            raise ConfigError("x_samples: need at least 2")
        if self.k_samples < 2 or self.k_max <= 0:
            raise ConfigError("k grid: need k_max > 0 and k_samples >= 2")
        if self.gate_t <= 0:
            raise ConfigError("gate_t: must be positive")
        if len(self.phase_sigma_h) != 3 or self.phase_sigma_h[2] < 1:
            raise ConfigError("phase_sigma_h: expected (lo, hi, count)")
        if not (0 < self.lowpass_pass_k < self.lowpass_stop_k):
            raise ConfigError("lowpass: need 0 < pass_k < stop_k")

    # -- serialization ------------------------------------------------------

    def to_json_obj(self) -> dict:
        th = self.thresholds
        return {
            "profile": self.profile.to_json_obj(),
            "t_values": list(self.t_values),
            "x_window": list(self.x_window),
            "half_width": self.half_width,
            "n_points": self.n_points,
            "dt": self.dt,
            "width_dx": self.width_dx,
            "pii_step": self.pii_step,
            "thresholds": {
                "epsilon_soliton": th.epsilon_soliton,
                "C_pos": th.C_pos,
                "C_neg": th.C_neg,
                "C_tau": th.C_tau,
                "C_shock": th.C_shock,
            },
            "gamma_param": self.gamma_param,
            "nu_convention": self.nu_convention,
            "pii_rho": self.pii_rho,
            "alpha_convention": self.alpha_convention,
            "x_samples": self.x_samples,
            "k_max": self.k_max,
            "k_samples": self.k_samples,
            "gate_mode": self.gate_mode,
            "gate_t": self.gate_t,
            "phase_L": list(self.phase_L),
            "phase_sigma_h": list(self.phase_sigma_h),
            "lowpass_pass_k": self.lowpass_pass_k,
            "lowpass_stop_k": self.lowpass_stop_k,
        }

    @staticmethod
    def from_json_obj(obj: dict) -> "RunConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config root must be a JSON object")
        known = {
            "profile", "t_values", "x_window", "half_width", "n_points",
            "dt", "width_dx", "pii_step", "thresholds", "gamma_param",
            "nu_convention", "pii_rho", "alpha_convention", "x_samples",
            "k_max", "k_samples", "gate_mode", "gate_t", "phase_L",
            "phase_sigma_h", "lowpass_pass_k", "lowpass_stop_k",
        }
        for key in obj:
            if key not in known:
                raise ConfigError(f"{key}: unknown config field")
        if "profile" not in obj:
            raise ConfigError("profile: required field missing")
        try:
            profile = DeltaProfile.from_json_obj(obj["profile"])
        except (TypeError, KeyError, ValueError) as exc:
            raise ConfigError(f"profile: {exc}") from exc
        kwargs: dict = {"profile": profile}
        scalars = {
            "half_width": float, "n_points": int, "dt": float,
            "width_dx": int, "pii_step": float, "gamma_param": float,
            "nu_convention": str, "pii_rho": float, "alpha_convention": str,
            "x_samples": int, "k_max": float, "k_samples": int,
            "gate_mode": str, "gate_t": float,
            "lowpass_pass_k": float, "lowpass_stop_k": float,
        }
        for name, cast in scalars.items():
            if name in obj:
                try:
                    kwargs[name] = cast(obj[name])
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"{name}: {exc}") from exc
        for name in ("t_values", "x_window", "phase_L", "phase_sigma_h"):
            if name in obj:
                val = obj[name]
                if not isinstance(val, (list, tuple)):
                    raise ConfigError(f"{name}: expected array")
                try:
                    if name == "phase_L":
                        kwargs[name] = tuple(int(v) for v in val)
                    elif name == "phase_sigma_h":
                        kwargs[name] = (float(val[0]), float(val[1]), int(val[2]))
                    elif name == "x_window":
                        if len(val) != 2:
                            raise ConfigError("x_window: expected [lo, hi]")
                        kwargs[name] = (float(val[0]), float(val[1]))
                    else:
                        kwargs[name] = tuple(float(v) for v in val)
                except (TypeError, ValueError, IndexError) as exc:
                    raise ConfigError(f"{name}: {exc}") from exc
        if "thresholds" in obj:
            tobj = obj["thresholds"]
            if not isinstance(tobj, dict):
                raise ConfigError("thresholds: expected object")
            allowed = {"epsilon_soliton", "C_pos", "C_neg", "C_tau", "C_shock"}
            for key in tobj:
                if key not in allowed:
                    raise ConfigError(f"thresholds.{key}: unknown field")
            try:
                kwargs["thresholds"] = RegionThresholds(
                    **{k: float(v) for k, v in tobj.items()}
                )
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"thresholds: {exc}") from exc
        return RunConfig(**kwargs)

    @staticmethod
    def from_file(path: str) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
        return RunConfig.from_json_obj(obj)

    def canonical_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def merge_json(base: dict, override: dict) -> dict:
    """Shallow merge with one level of nesting for object-valued fields."""
    out = dict(base)
    for key, val in override.items():
        if key in out and isinstance(out[key], dict) and isinstance(val, dict):
            inner = dict(out[key])
            inner.update(val)
            out[key] = inner
        else:
            out[key] = val
    return out


# Presets reproduce the paper-figure configurations at desk scale; each
# acceptance scenario has a named entry.
PRESETS: dict[str, dict] = {
    # single positive spike, full multi-region sweep (asymptotics overlay)
    "fig4": {
        "profile": [{"U": 2.0, "x": 0.0}],
        "t_values": [50.0],
        "x_window": [-700.0, 300.0],
    },
    # soliton-region close-up for the positive spike
    "fig6a": {
        "profile": [{"U": 2.0, "x": 0.0}],
        "t_values": [10.0, 25.0, 50.0],
        "x_window": [150.0, 250.0],
    },
    # self-similar window: x = s (3t)^{1/3} for s in [-1.5, 2] at t = 50
    "fig6b": {
        "profile": [{"U": 2.0, "x": 0.0}],
        "t_values": [50.0],
        "x_window": [-9.0, 11.0],
        "x_samples": 2001,
    },
    # negative spike: no soliton, dispersive + self-similar comparison
    "fig7": {
        "profile": [{"U": -2.0, "x": 0.0}],
        "t_values": [50.0],
        "x_window": [-700.0, 100.0],
    },
    # two gentle spikes, two emerging solitons
    "fig9": {
        "profile": [{"U": 0.5, "x": 20.0}, {"U": 0.5, "x": 40.0}],
        "t_values": [50.0, 100.0],
        "x_window": [-50.0, 150.0],
    },
    # soliton-count phase diagram over (sigma h, L)
    "fig10": {
        "profile": [{"U": 0.5, "x": 20.0}],
        "t_values": [1.0],
        "x_window": [-1.0, 1.0],
    },
    # three-spike lattice, three solitons
    "fig11": {
        "profile": [
            {"U": 0.5, "x": 20.0}, {"U": 0.5, "x": 40.0}, {"U": 0.5, "x": 60.0}
        ],
        "t_values": [50.0, 100.0],
        "x_window": [-50.0, 150.0],
    },
    # sign-flip phase comparison windows (dispersive zone, k0 near 1)
    "phase-shift": {
        "profile": [{"U": 2.0, "x": 0.0}],
        "t_values": [50.0],
        "x_window": [-700.0, -200.0],
        "x_samples": 2001,
    },
}
