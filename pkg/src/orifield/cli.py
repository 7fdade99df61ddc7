"""Command-line interface: synth, analyze, tensor, validate.

Every run resolves its parameters (config file values overridden by
explicit flags), writes the resolved configuration next to its outputs, and
is bit-reproducible from that snapshot plus the seed.  Exit codes: 0 on
success, 1 when a validation or synthesis run fails, 2 on usage or format
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import monogenic, rasters, synth, tensor, validate
from .errors import OrifieldError
from .fields import model_from_json
from .spectral import spec_from_json
from .synth import Grid, default_threads

FMT = "%.12g"


def _fmt(value):
    """Recursively format floats at 12 significant digits for printing."""
    if isinstance(value, float):
        return float(FMT % value)
    if isinstance(value, dict):
        return {k: _fmt(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_fmt(v) for v in value]
    return value


def _load_json_arg(text: str) -> dict:
    """Accept either inline JSON or a path to a JSON file."""
    s = text.strip()
    if s.startswith("{"):
        return json.loads(s)
    return json.loads(Path(text).read_text())


def _merge_config(args: argparse.Namespace, command: str) -> dict:
    """Fill unset flags from the --config file's section for this command."""
    merged = {}
    if args.config:
        cfg = _load_json_arg(args.config)
        merged.update(cfg.get(command, {}))
    for key, val in vars(args).items():
        if key in ("config", "command", "func") or val is None:
            continue
        merged[key] = val
    return merged


def _write_snapshot(out_base: Path, command: str, params: dict) -> None:
    snap = {"command": command, command: _fmt(params)}
    Path(str(out_base) + ".config.json").write_text(json.dumps(snap, indent=2))


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> int:
    p = _merge_config(args, "synth")
    p.setdefault("n", 512)
    p.setdefault("domain", [0.0, 1.0])
    p.setdefault("seed", 0)
    model = model_from_json(_load_json_arg(p["model"]))
    grid = Grid(int(p["n"]), float(p["domain"][0]), float(p["domain"][1]))

    kwargs = {}
    kind = type(model).__name__
    if kind in ("FBF", "AFBF", "SumAFBF", "LinearDeformed"):
        if "freq_n" in p:
            kwargs["freq_n"] = int(p["freq_n"])
    elif kind == "WAFBF":
        kwargs["margin"] = float(p.get("margin", 0.1))
        kwargs["interp"] = p.get("interp", "bilinear")
        if "base_n" in p:
            kwargs["base_n"] = int(p["base_n"])
        if "freq_n" in p:
            kwargs["freq_n"] = int(p["freq_n"])
    else:  # GAFBF / MBF
        kwargs["freq_n"] = int(p.get("freq_n", 64))
        kwargs["edge"] = p.get("edge", "antialiased")
        kwargs["threads"] = int(p.get("threads", default_threads()))

    real = synth.synthesize(model, grid, int(p["seed"]), **kwargs)

    out_dir = Path(p.get("out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    base = out_dir / p["out"]
    raw, side = rasters.save_realization(base, real)
    written = [str(raw), str(side)]
    if p.get("pgm"):
        written.append(str(rasters.export_pgm(real.values, str(base) + ".pgm")))
    _write_snapshot(base, "synth", p)
    print(json.dumps({"written": written}, indent=2))
    return 0


def cmd_analyze(args) -> int:
    p = _merge_config(args, "analyze")
    values, meta = rasters.load_raster(p["input"])
    if values.ndim != 2:
        raise ValueError("analyze expects a single-channel raster")
    scales = [int(s) for s in p.get("scales", [0, 1, 2])]
    profile = p.get("profile", "simoncelli")
    window = float(p.get("window", 8.0))

    pyr = monogenic.wavelet_pyramid(values, scales, profile)
    per_scale = {}
    degenerate = False
    for s in scales:
        t = monogenic.empirical_structure_tensor(pyr, s)
        if t.trace <= 0.0 or not np.isfinite(t.trace):
            degenerate = True
            per_scale[str(s)] = {"tensor": t.to_json(), "degenerate": True}
            continue
        o = tensor.orientation_of(t)
        degenerate = degenerate or o.degenerate
        per_scale[str(s)] = {"tensor": t.to_json(), "orientation": o.to_json()}

    summary = {
        "input": str(p["input"]),
        "profile": profile,
        "scales": scales,
        "per_scale": per_scale,
        "degenerate": degenerate,
    }
    if not degenerate and len(scales) >= 2:
        summary["hurst"] = monogenic.estimate_hurst(pyr, scales)
    first = per_scale[str(scales[0])]
    if "orientation" in first:
        summary["angle"] = first["orientation"]["angle"]
        summary["coherency"] = first["orientation"]["coherency"]

    out_dir = Path(p.get("out_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    if p.get("orientation_field"):
        fld = monogenic.windowed_orientation_field(pyr, scales[0], window)
        base = out_dir / (p.get("out", "analysis") + ".orientation")
        n = values.shape[0]
        grid = Grid(n, *(meta.get("domain") or [0.0, 1.0]))
        rasters.save_orientation_field(base, fld.angle, fld.coherency, fld.mask, grid,
                                       extra={"scale": scales[0], "window": window})
        rasters.export_angle_ppm(fld.angle, fld.mask, str(base) + ".ppm")
        summary["orientation_field"] = str(base) + ".f64"
    if p.get("out"):
        base = out_dir / p["out"]
        Path(str(base) + ".summary.json").write_text(json.dumps(_fmt(summary), indent=2))
        _write_snapshot(base, "analyze", p)
    print(json.dumps(_fmt(summary), indent=2))
    return 0


def cmd_tensor(args) -> int:
    p = _merge_config(args, "tensor")
    spec = spec_from_json(_load_json_arg(p["spec"]))
    nodes = int(p.get("nodes", 4096))
    quad = tensor.structure_tensor_quadrature(spec, nodes)
    orient = tensor.orientation_of(quad)
    report = {
        "quadrature_tensor": quad.to_json(),
        "orientation": orient.to_json(),
        "coherency": orient.coherency,
        "trace_mass": tensor.circle_integral(spec, nodes),
    }
    obj = _load_json_arg(p["spec"])
    if obj.get("kind") == "cone":
        closed = tensor.afbf_tensor_closed(float(obj["alpha0"]), float(obj["delta"]))
        if obj.get("level") is not None:
            closed = closed.scaled(float(obj["level"]) * 4.0 * float(obj["delta"]))
        report["closed_form_tensor"] = closed.to_json()
    elif obj.get("kind") == "isotropic":
        report["closed_form_tensor"] = {"j11": 0.5, "j12": 0.0, "j22": 0.5}

    if p.get("matrix") is not None:
        mat = np.asarray(p["matrix"], dtype=float).reshape(2, 2)
        n = np.array(orient.direction)
        moved = tensor.deformed_orientation(n, mat)
        report["deformed_orientation"] = {
            "matrix": mat.tolist(),
            "direction": moved.tolist(),
            "angle": float(np.arctan2(moved[1], moved[0])),
        }
    print(json.dumps(_fmt(report), indent=2))
    return 0


def cmd_validate(args) -> int:
    p = _merge_config(args, "validate")
    seeds = int(p.get("seeds", 10))
    results = validate.run_suite(p["suite"], seeds=seeds)
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    report = {
        "suite": p["suite"],
        "seeds": seeds,
        "passed": ok,
        "checks": [r.to_json() for r in results],
    }
    out_dir = Path(p.get("out_dir", "."))
    if p.get("report"):
        out_dir.mkdir(parents=True, exist_ok=True)
        base = out_dir / f"validate-{p['suite']}"
        Path(str(base) + ".report.json").write_text(json.dumps(report, indent=2))
        _write_snapshot(base, "validate", p)
    print(f"suite {p['suite']}: {'all passed' if ok else 'FAILURES'}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="orifield",
        description="Synthesize and analyze oriented Gaussian random field textures.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (64-bit)")
    common.add_argument("--threads", type=int, default=None,
                        help="kernel threads (falls back to ORIFIELD_THREADS, then 1)")
    common.add_argument("--out-dir", dest="out_dir", default=None,
                        help="directory for outputs (default: current)")
    common.add_argument("--config", default=None,
                        help="JSON config file; explicit flags override it")

    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", parents=[common], help="synthesize a raster")
    s.add_argument("--model", required=True, help="field model JSON (file or inline)")
    s.add_argument("--n", type=int, default=None, help="pixels per side (power of two)")
    s.add_argument("--domain", nargs=2, type=float, default=None, metavar=("X0", "X1"))
    s.add_argument("--freq-n", dest="freq_n", type=int, default=None)
    s.add_argument("--margin", type=float, default=None, help="warped-grid margin fraction")
    s.add_argument("--interp", choices=["bilinear", "bicubic"], default=None)
    s.add_argument("--base-n", dest="base_n", type=int, default=None,
                   help="warped base grid resolution override")
    s.add_argument("--edge", choices=["antialiased", "hard"], default=None,
                   help="cone edge handling for space-varying synthesis")
    s.add_argument("--out", required=True, help="output basename (writes .f64/.json)")
    s.add_argument("--pgm", action="store_true", default=None, help="also write a PGM preview")
    s.set_defaults(func=cmd_synth)

    a = sub.add_parser("analyze", parents=[common], help="estimate orientation/coherency/Hurst")
    a.add_argument("--in", dest="input", required=True, help="raster .f64 or .json path")
    a.add_argument("--scales", nargs="+", type=int, default=None)
    a.add_argument("--profile", choices=["simoncelli", "meyer"], default=None)
    a.add_argument("--window", type=float, default=None, help="local window std [pixels]")
    a.add_argument("--orientation-field", dest="orientation_field", action="store_true",
                   default=None, help="write the per-pixel orientation field")
    a.add_argument("--out", default=None, help="basename for summary/orientation outputs")
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("tensor", parents=[common], help="structure tensor of an anisotropy spec")
    t.add_argument("--spec", required=True, help="anisotropy spec JSON (file or inline)")
    t.add_argument("--matrix", nargs=4, type=float, default=None, metavar=("A", "B", "C", "D"),
                   help="row-major 2x2 deformation; prints the transported orientation")
    t.add_argument("--nodes", type=int, default=None)
    t.set_defaults(func=cmd_tensor)

    v = sub.add_parser("validate", parents=[common], help="run a self-check suite")
    v.add_argument("suite", choices=validate.suite_names())
    v.add_argument("--seeds", type=int, default=None, help="Monte-Carlo seed count")
    v.add_argument("--report", action="store_true", default=None,
                   help="write a JSON report next to the outputs")
    v.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OrifieldError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
