import json

import numpy as np
import pytest

from orifield.cli import main
from orifield.rasters import FORMAT_NAME, FORMAT_VERSION, load_raster


def run(argv):
    return main([str(a) for a in argv])


@pytest.fixture()
def afbf_model(tmp_path):
    p = tmp_path / "afbf.json"
    p.write_text(json.dumps({"kind": "afbf", "hurst": 0.5, "alpha0": 0.0, "delta": 0.3}))
    return p


def test_synth_writes_deterministic_outputs(tmp_path, afbf_model):
    out = tmp_path / "tex"
    assert run(["synth", "--model", afbf_model, "--n", 128, "--seed", 7, "--out", out, "--pgm"]) == 0
    for suffix in (".f64", ".json", ".pgm", ".config.json"):
        assert (tmp_path / ("tex" + suffix)).exists()
    first = (tmp_path / "tex.f64").read_bytes()
    assert run(["synth", "--model", afbf_model, "--n", 128, "--seed", 7, "--out", out]) == 0
    assert (tmp_path / "tex.f64").read_bytes() == first


def test_synth_reproducible_from_snapshot(tmp_path, afbf_model):
    out = tmp_path / "tex"
    run(["synth", "--model", afbf_model, "--n", 64, "--seed", 3, "--out", out])
    first = (tmp_path / "tex.f64").read_bytes()
    snap = tmp_path / "tex.config.json"
    out2 = tmp_path / "tex2"
    assert run(["synth", "--model", afbf_model, "--config", snap, "--out", out2]) == 0
    assert (tmp_path / "tex2.f64").read_bytes() == first


def test_synth_invalid_model_exits_2(tmp_path, capsys):
    assert run(["synth", "--model", '{"kind": "bogus"}', "--n", 64, "--out", tmp_path / "x"]) == 2
    assert "bogus" in capsys.readouterr().err


def test_synth_unbalanced_budget_exits_1(tmp_path):
    model = json.dumps({
        "kind": "gafbf",
        "h": {"kind": "constant", "value": 0.5},
        "alpha": {"kind": "constant", "value": 0.0},
        "delta": 0.3,
    })
    code = run(["synth", "--model", model, "--n", 512, "--freq-n", 512,
                "--seed", 0, "--out", tmp_path / "big"])
    assert code == 1


def test_analyze_recovers_orientation(tmp_path, afbf_model, capsys):
    out = tmp_path / "tex"
    run(["synth", "--model", afbf_model, "--n", 256, "--seed", 1, "--out", out])
    capsys.readouterr()
    assert run(["analyze", "--in", tmp_path / "tex.f64", "--scales", 0, 1, 2,
                "--out", tmp_path / "res", "--orientation-field"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert abs(summary["angle"]) <= np.deg2rad(3.0)
    assert abs(summary["coherency"] - 0.941) <= 0.06
    assert abs(summary["hurst"] - 0.5) <= 0.15
    assert (tmp_path / "res.summary.json").exists()
    assert (tmp_path / "res.orientation.f64").exists()
    assert (tmp_path / "res.orientation.ppm").exists()


def test_analyze_profiles_agree(tmp_path, afbf_model, capsys):
    out = tmp_path / "tex"
    run(["synth", "--model", afbf_model, "--n", 256, "--seed", 2, "--out", out])
    angles = {}
    for prof in ("simoncelli", "meyer"):
        capsys.readouterr()
        assert run(["analyze", "--in", tmp_path / "tex.f64", "--scales", 0,
                    "--profile", prof]) == 0
        angles[prof] = json.loads(capsys.readouterr().out)["angle"]
    assert abs(angles["simoncelli"] - angles["meyer"]) <= np.deg2rad(2.0)


def test_analyze_constant_raster_degenerate(tmp_path, capsys):
    n = 64
    (tmp_path / "flat.f64").write_bytes(np.full((n, n), 2.5).astype("<f8").tobytes())
    (tmp_path / "flat.json").write_text(json.dumps({
        "format": FORMAT_NAME, "version": FORMAT_VERSION, "n": n,
        "domain": [0.0, 1.0], "channels": ["values"],
    }))
    assert run(["analyze", "--in", tmp_path / "flat.f64", "--scales", 0, 1]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["degenerate"] is True
    assert "hurst" not in summary


def test_analyze_version_mismatch_exits_2(tmp_path, afbf_model):
    run(["synth", "--model", afbf_model, "--n", 64, "--seed", 1, "--out", tmp_path / "t"])
    meta = json.loads((tmp_path / "t.json").read_text())
    meta["version"] = 9
    (tmp_path / "t.json").write_text(json.dumps(meta))
    assert run(["analyze", "--in", tmp_path / "t.f64"]) == 2


def test_tensor_command(capsys):
    assert run(["tensor", "--spec", '{"kind": "cone", "alpha0": 0.0, "delta": 0.3}',
                "--matrix", 2, 0, 0, 1]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["coherency"] == pytest.approx(0.941071, abs=1e-6)
    assert report["quadrature_tensor"]["j11"] == pytest.approx(0.970535394496, abs=1e-9)
    assert report["closed_form_tensor"]["j11"] == pytest.approx(0.970535394496, abs=1e-9)
    moved = report["deformed_orientation"]["direction"]
    np.testing.assert_allclose(moved, [1.0, 0.0], atol=1e-9)


def test_tensor_isotropic_degenerate(capsys):
    assert run(["tensor", "--spec", '{"kind": "isotropic"}']) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["orientation"]["degenerate"] is True
    assert report["coherency"] == pytest.approx(0.0, abs=1e-9)


def test_tensor_invalid_spec_exits_2(capsys):
    assert run(["tensor", "--spec", '{"kind": "cone"}']) == 2


def test_validate_closedform_passes(tmp_path, capsys):
    assert run(["validate", "closedform", "--report", "--out-dir", tmp_path]) == 0
    out = capsys.readouterr().out
    assert "all passed" in out
    report = json.loads((tmp_path / "validate-closedform.report.json").read_text())
    assert report["passed"] is True
    assert all(c["passed"] for c in report["checks"])


def test_validate_unknown_suite_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["validate", "everything"])
    assert exc.value.code == 2


def test_figure_recipe_quadratic_rotation_warp(tmp_path):
    # the published quadratic rotation-warp texture runs end-to-end:
    # alpha(x) = -pi/2 + x1^2 - x2 driving a pointwise rotation of the
    # horizontal cone field
    model = {
        "kind": "wafbf",
        "base": {"kind": "afbf", "hurst": 0.5, "alpha0": 0.0, "delta": 0.3},
        "deformation": {
            "kind": "local_rotation",
            "alpha": {"kind": "quadratic_affine", "q1": 1.0, "q2": 0.0,
                      "a": 0.0, "b": -1.0, "c": -np.pi / 2},
        },
    }
    p = tmp_path / "fig1d.json"
    p.write_text(json.dumps(model))
    assert run(["synth", "--model", p, "--n", 128, "--seed", 5,
                "--out", tmp_path / "fig1d", "--pgm"]) == 0
    values, meta = load_raster(tmp_path / "fig1d.f64")
    assert values.shape == (128, 128)
    assert np.all(np.isfinite(values))
    assert meta["model"]["deformation"]["alpha"]["q1"] == 1.0


def test_config_file_defaults_with_flag_override(tmp_path, afbf_model):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"synth": {"n": 64, "seed": 9, "out": "ignored"}}))
    assert run(["synth", "--model", afbf_model, "--config", cfg, "--out", tmp_path / "c1"]) == 0
    values, meta = load_raster(tmp_path / "c1.f64")
    assert meta["n"] == 64 and meta["seed"] == 9
    # explicit flag beats the config value
    assert run(["synth", "--model", afbf_model, "--config", cfg, "--n", 32,
                "--out", tmp_path / "c2"]) == 0
    _, meta2 = load_raster(tmp_path / "c2.f64")
    assert meta2["n"] == 32
