"""RunConfig: JSON round trip, preset integrity, merge precedence, validation."""

import json

import pytest

from kdvdelta.config import PRESETS, RunConfig, merge_json
from kdvdelta.errors import ConfigError

P2 = [{"U": 2.0, "x": 0.0}]


def test_all_presets_load_and_hash_distinctly():
    hashes = {}
    for name, frag in PRESETS.items():
        cfg = RunConfig.from_json_obj(frag)
        h = cfg.config_hash()
        assert len(h) == 64 and int(h, 16) >= 0
        hashes[name] = h
    assert len(set(hashes.values())) == len(PRESETS)


def test_roundtrip_is_fixed_point():
    cfg = RunConfig.from_json_obj(PRESETS["fig6a"])
    again = RunConfig.from_json_obj(cfg.to_json_obj())
    assert again == cfg
    assert again.canonical_json() == cfg.canonical_json()
    assert again.config_hash() == cfg.config_hash()


def test_canonical_json_is_key_sorted_and_compact():
    cfg = RunConfig.from_json_obj({"profile": P2})
    s = cfg.canonical_json()
    assert ": " not in s and ", " not in s
    keys = list(json.loads(s))
    assert keys == sorted(keys)


def test_defaults():
    cfg = RunConfig.from_json_obj({"profile": P2})
    assert cfg.half_width == 1024.0
    assert cfg.n_points == 2**15
    assert cfg.dt == 2.5e-4
    assert cfg.width_dx == 2
    assert cfg.nu_convention == "neg_half_over_pi"
    assert cfg.pii_rho == 1.0
    assert cfg.gate_mode == "quick"
    assert cfg.thresholds.C_shock == 4.0


def test_merge_override_wins_and_thresholds_nest():
    base = dict(PRESETS["fig4"])
    base["thresholds"] = {"C_pos": 2.0}
    merged = merge_json(base, {"thresholds": {"C_tau": 3.0}, "dt": 1e-4})
    cfg = RunConfig.from_json_obj(merged)
    assert cfg.dt == 1e-4
    assert cfg.thresholds.C_pos == 2.0
    assert cfg.thresholds.C_tau == 3.0
    assert cfg.thresholds.C_neg == 1.0  # untouched default


@pytest.mark.parametrize("patch,needle", [
    ({"t_values": []}, "t_values"),
    ({"t_values": [5.0, 3.0]}, "t_values"),
    ({"t_values": [-1.0]}, "t_values"),
    ({"x_window": [3.0, -1.0]}, "x_window"),
    ({"x_window": [1.0]}, "x_window"),
    ({"dt": 0.0}, "dt"),
    ({"width_dx": 1}, "width_dx"),
    ({"pii_step": -0.1}, "pii_step"),
    ({"nu_convention": "bogus"}, "nu_convention"),
    ({"alpha_convention": "bogus"}, "alpha_convention"),
    ({"gate_mode": "bogus"}, "gate_mode"),
    ({"pii_rho": 0.5}, "pii_rho"),
    ({"x_samples": 1}, "x_samples"),
    ({"k_max": -1.0}, "k grid"),
    ({"k_samples": 1}, "k grid"),
    ({"gate_t": 0.0}, "gate_t"),
    ({"phase_sigma_h": [0.1, 2.0]}, "phase_sigma_h"),
    ({"lowpass_pass_k": 5.0}, "lowpass"),
    ({"mystery_knob": 1}, "mystery_knob"),
    ({"thresholds": {"bogus": 1.0}}, "thresholds.bogus"),
    ({"thresholds": "nope"}, "thresholds"),
])
def test_validation_reports_the_offending_field(patch, needle):
    obj = {"profile": P2}
    obj.update(patch)
    with pytest.raises(ConfigError, match=needle.replace("[", "\\[")):
        RunConfig.from_json_obj(obj)


def test_profile_required_and_checked():
    with pytest.raises(ConfigError, match="profile"):
        RunConfig.from_json_obj({"t_values": [1.0]})
    with pytest.raises(ConfigError, match="profile"):
        RunConfig.from_json_obj({"profile": "nope"})
    with pytest.raises(ConfigError):
        RunConfig.from_json_obj({"profile": []})


def test_root_must_be_object():
    with pytest.raises(ConfigError, match="root"):
        RunConfig.from_json_obj([1, 2, 3])


def test_from_file_good_and_bad(tmp_path):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"profile": P2, "t_values": [2.0]}))
    cfg = RunConfig.from_file(str(good))
    assert cfg.t_values == (2.0,)

    bad = tmp_path / "bad.json"
    bad.write_text('{"profile": [\n  {"U": 2.0, "x": }\n]}')
    with pytest.raises(ConfigError, match="line 2"):
        RunConfig.from_file(str(bad))

    with pytest.raises(ConfigError, match="cannot read"):
        RunConfig.from_file(str(tmp_path / "absent.json"))


def test_hash_changes_with_any_field():
    base = RunConfig.from_json_obj({"profile": P2})
    tweaked = RunConfig.from_json_obj({"profile": P2, "dt": 1e-4})
    assert base.config_hash() != tweaked.config_hash()
