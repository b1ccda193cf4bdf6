"""CLI verbs end to end on desk-size grids.

Runs main() in process for speed; one subprocess test covers the module
entry point. The stiff/gentle spike configs below sit on a 64-half-width,
4096-point box where a full pde+gate run costs a couple of seconds.
"""

import csv
import filecmp
import json
import subprocess
import sys

import numpy as np
import pytest

from kdvdelta.cli import _uniform_lattice_params, main
from kdvdelta.scattering import DeltaProfile, discrete_eigenvalues, uniform_lattice

GENTLE = {
    "profile": [{"U": 0.2, "x": 0.0}],
    "t_values": [0.5],
    "x_window": [-20.0, 20.0],
    "half_width": 64.0,
    "n_points": 4096,
    "dt": 1e-4,
    "gate_t": 0.1,
    "x_samples": 161,
}

# dt far too coarse for the spike transient: fails the dt-halving gate
STIFF = dict(GENTLE, profile=[{"U": 2.0, "x": 0.0}])


def _cfg_file(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _only_dir(root, verb):
    dirs = [d for d in root.iterdir() if d.name.startswith(verb + "_")]
    assert len(dirs) == 1
    return dirs[0]


# ---------------------------------------------------------------------------
# scatter


def test_scatter_matches_library_spectrum(tmp_path):
    rc = main(["scatter", "--preset", "fig11", "--out", str(tmp_path)])
    assert rc == 0
    d = _only_dir(tmp_path, "scatter")
    rep = json.loads((d / "scattering.json").read_text())
    spec = discrete_eigenvalues(uniform_lattice(3, 0.5, 20.0))
    assert rep["n_bound_states"] == 3
    assert np.allclose(rep["eigenvalues"], spec.eigenvalues, rtol=0, atol=1e-14)
    assert rep["count_formula"] == 3
    assert rep["count_agrees"] is True
    amps = rep["soliton_amplitudes"]
    assert np.allclose(amps, 2.0 * np.asarray(spec.eigenvalues) ** 2)

    rows = _read_csv(d / "reflection.csv")
    assert len(rows) == 250
    # unitarity column consistency: abs2_t = 1 - abs2_r on every row
    for r in rows[::25]:
        assert abs(float(r["abs2_t"]) + float(r["abs2_r"]) - 1.0) < 1e-12


def test_scatter_non_lattice_has_no_formula(tmp_path):
    cfg = _cfg_file(tmp_path, {"profile": [{"U": 0.5, "x": 0.0},
                                           {"U": 0.7, "x": 9.0}]})
    assert main(["scatter", "--config", cfg, "--out", str(tmp_path)]) == 0
    rep = json.loads(
        (_only_dir(tmp_path, "scatter") / "scattering.json").read_text())
    assert rep["count_formula"] is None
    assert rep["count_agrees"] is None


def test_uniform_lattice_detection():
    assert _uniform_lattice_params(uniform_lattice(4, 0.5, 3.0)) == (4, 1.5)
    assert _uniform_lattice_params(DeltaProfile.single(2.0)) == (1, None)
    assert _uniform_lattice_params(
        DeltaProfile(((0.5, 0.0), (0.6, 3.0)))) is None
    assert _uniform_lattice_params(
        DeltaProfile(((0.5, 0.0), (0.5, 3.0), (0.5, 7.0)))) is None


# ---------------------------------------------------------------------------
# asym


def test_asym_table_structure(tmp_path):
    cfg = _cfg_file(tmp_path, {
        "profile": [{"U": 2.0, "x": 0.0}],
        "t_values": [50.0],
        "x_window": [-700.0, 300.0],
        "x_samples": 201,
    })
    assert main(["asym", "--config", cfg, "--out", str(tmp_path)]) == 0
    d = _only_dir(tmp_path, "asym")
    rows = _read_csv(d / "asym_t50.csv")
    assert len(rows) == 201
    labels = {r["region"] for r in rows}
    assert {"Soliton", "Decay", "SelfSimilar", "DispersiveWave"} <= labels

    # rows outside the stored Painleve window degrade gracefully, not fatally
    failed = [r for r in rows if r["note"].startswith("RangeError")]
    assert failed and all(r["u"] == "" for r in failed)
    # every evaluable row carries a finite number
    for r in rows:
        if r["u"]:
            assert np.isfinite(float(r["u"]))

    rep = json.loads((d / "asym_report.json").read_text())
    t0 = rep["tables"][0]
    assert t0["region_counts"]["DispersiveWave"] > 50
    seams = t0["seams"]
    assert any(s["left"] == "Decay" and s["right"] == "Soliton" for s in seams)
    # seam jump between decay and soliton tails is exponentially small
    for s in seams:
        if "jump" in s and {"Decay", "Soliton"} == {s["left"], s["right"]}:
            assert s["jump"] < 1e-12


# ---------------------------------------------------------------------------
# pde


def test_pde_manifest_and_window(tmp_path):
    cfg = _cfg_file(tmp_path, GENTLE)
    assert main(["pde", "--config", cfg, "--out", str(tmp_path)]) == 0
    d = _only_dir(tmp_path, "pde")
    man = json.loads((d / "pde_manifest.json").read_text())
    assert man["backend"] in ("compiled", "fallback")
    assert man["gate"]["passed"] is True
    assert man["gate"]["linf_dt_halving_lowpassed"] < 1e-4
    assert man["mass_drift"] < 1e-10
    # conserved rows: t0 on the dealiased band, then each output time
    cons = man["conserved"]
    assert cons[0][0] == 0.0 and cons[-1][0] == 0.5
    assert abs(cons[0][1] + 0.2) < 1e-12  # mass of the -0.2 spike
    assert abs(cons[-1][1] - cons[0][1]) < 1e-12  # mean mode is frozen
    assert cons[0][2] > 0.0 and cons[-1][2] > 0.0

    rows = _read_csv(d / "pde_t0.5.csv")
    xs = np.array([float(r["x"]) for r in rows])
    assert xs.min() >= -20.0 and xs.max() <= 20.0
    assert np.all(np.diff(xs) > 0)


def test_pde_gate_skip_mode(tmp_path):
    cfg = _cfg_file(tmp_path, dict(GENTLE, gate_mode="skip"))
    assert main(["pde", "--config", cfg, "--out", str(tmp_path)]) == 0
    man = json.loads(
        (_only_dir(tmp_path, "pde") / "pde_manifest.json").read_text())
    assert man["gate"]["mode"] == "skip"
    assert "passed" not in man["gate"]


def test_pde_reruns_are_byte_identical(tmp_path):
    cfg = _cfg_file(tmp_path, GENTLE)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["pde", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["pde", "--config", cfg, "--out", str(out2)]) == 0
    d1 = _only_dir(out1, "pde")
    d2 = _only_dir(out2, "pde")
    assert d1.name == d2.name
    for f in sorted(p.name for p in d1.iterdir()):
        assert filecmp.cmp(d1 / f, d2 / f, shallow=False), f


# ---------------------------------------------------------------------------
# compare


def test_compare_report_and_csv(tmp_path):
    cfg = _cfg_file(tmp_path, GENTLE)
    assert main(["compare", "--config", cfg, "--out", str(tmp_path)]) == 0
    d = _only_dir(tmp_path, "compare")
    rep = json.loads((d / "compare_report.json").read_text())
    assert rep["gate"]["passed"] is True
    regions = rep["times"][0]["regions"]
    assert regions, "expected at least one comparable region segment"
    for m in regions:
        assert m["x_lo"] < m["x_hi"]
        assert m["n_points"] > 0
        assert m["rms"] <= m["linf"]

    rows = _read_csv(d / "compare_t0.5.csv")
    assert list(rows[0]) == ["x", "u_pde", "u_asym", "region"]
    with_asym = [r for r in rows if r["u_asym"]]
    without = [r for r in rows if not r["u_asym"]]
    assert with_asym and without
    assert all(r["region"] for r in with_asym)
    assert all(not r["region"] for r in without)


def test_compare_gate_failure_exits_3(tmp_path, capsys):
    cfg = _cfg_file(tmp_path, STIFF)
    assert main(["compare", "--config", cfg, "--out", str(tmp_path)]) == 3
    err = capsys.readouterr().err
    assert "gate failed" in err


# ---------------------------------------------------------------------------
# phase-diagram


def test_phase_diagram_small_grid(tmp_path):
    cfg = _cfg_file(tmp_path, {
        "profile": [{"U": 1.0, "x": 0.0}],
        "phase_L": [1, 2, 3],
        "phase_sigma_h": [0.3, 3.3, 6],
    })
    assert main(["phase-diagram", "--config", cfg, "--out", str(tmp_path)]) == 0
    d = _only_dir(tmp_path, "phase-diagram")
    rows = _read_csv(d / "phase_diagram.csv")
    assert len(rows) == 18
    assert all(r["agree"] == "1" for r in rows)
    rep = json.loads((d / "phase_report.json").read_text())
    assert rep["mismatches"] == 0
    # analytic thresholds 2 + 2 cos(l pi / L) located as sign changes
    for th in rep["thresholds"]:
        assert th["abs_error"] is not None and th["abs_error"] < 1e-8


# ---------------------------------------------------------------------------
# plumbing: exit codes, precedence, subprocess entry


def test_exit_codes(tmp_path, capsys):
    assert main(["asym", "--config", "/absent.json",
                 "--out", str(tmp_path)]) == 2
    bad = _cfg_file(tmp_path, {"profile": [{"U": 2.0, "x": 0.0}],
                               "t_values": [5.0, 3.0]}, "bad.json")
    assert main(["asym", "--config", bad, "--out", str(tmp_path)]) == 2
    assert main(["scatter", "--out", str(tmp_path)]) == 2
    capsys.readouterr()


def test_bad_preset_rejected():
    with pytest.raises(SystemExit):
        main(["scatter", "--preset", "nope"])


def test_flag_overrides_config_overrides_preset(tmp_path):
    # preset fig7 has U0=-2; config file overrides the window; flag sets rho
    over = _cfg_file(tmp_path, {"x_window": [-5.0, 5.0], "x_samples": 11,
                                "t_values": [2.0]}, "over.json")
    rc = main(["asym", "--preset", "fig7", "--config", over,
               "--pii-rho", "-1", "--out", str(tmp_path)])
    assert rc == 0
    d = _only_dir(tmp_path, "asym")
    rows = _read_csv(d / "asym_t2.csv")
    assert len(rows) == 11
    assert float(rows[0]["x"]) == -5.0 and float(rows[-1]["x"]) == 5.0


def test_console_entry_subprocess(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"profile": [{"U": 1.0, "x": 0.0}],
                               "k_samples": 10}))
    r = subprocess.run(
        [sys.executable, "-m", "kdvdelta.cli", "scatter",
         "--config", str(cfg), "--out", str(tmp_path)],
        capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert "scatter: 1 bound state(s)" in r.stdout
