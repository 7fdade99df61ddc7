"""Raster file I/O: raw float64 payloads with JSON sidecars.

``<name>.f64`` holds little-endian 8-byte floats, row-major, no header;
``<name>.json`` describes the shape and provenance.  Multi-channel rasters
(orientation fields) store channels consecutively, channel-major.  PGM/PPM
exports are for visual inspection only and are lossy (8-bit).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .fields import model_to_json
from .synth import FieldRealization, Grid

__all__ = [
    "save_realization",
    "load_raster",
    "save_orientation_field",
    "export_pgm",
    "export_angle_ppm",
]

FORMAT_NAME = "orifield-raster"
FORMAT_VERSION = 1


def _write_payload(path: Path, arr: np.ndarray) -> None:
    np.ascontiguousarray(arr, dtype="<f8").tofile(path)


def save_realization(base_path, realization: FieldRealization) -> tuple[Path, Path]:
    """Write ``<base>.f64`` and ``<base>.json`` for a synthesized raster."""
    base = Path(base_path)
    raw = Path(str(base) + ".f64")
    side = Path(str(base) + ".json")
    _write_payload(raw, realization.values)
    try:
        model_json = model_to_json(realization.model)
    except TypeError:
        model_json = {"kind": type(realization.model).__name__.lower(), "serializable": False}
    meta = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "n": realization.grid.n,
        "domain": [realization.grid.x0, realization.grid.x1],
        "channels": ["values"],
        "model": model_json,
        "seed": realization.seed,
        "params": realization.params,
    }
    side.write_text(json.dumps(meta, indent=2))
    return raw, side


def load_raster(path) -> tuple[np.ndarray, dict]:
    """Read a raster (or channel stack) written by this module.

    ``path`` may point at either the .f64 or the .json half.  Returns the
    array (shape (n, n) or (channels, n, n)) and the sidecar metadata.
    """
    p = Path(path)
    stem = str(p)[: -len(p.suffix)] if p.suffix in (".f64", ".json") else str(p)
    raw, side = Path(stem + ".f64"), Path(stem + ".json")
    if not raw.exists() or not side.exists():
        raise FileNotFoundError(f"need both {raw} and {side}")
    meta = json.loads(side.read_text())
    if meta.get("format") != FORMAT_NAME or meta.get("version") != FORMAT_VERSION:
        raise ValueError(
            f"unsupported raster format {meta.get('format')!r} v{meta.get('version')!r}"
        )
    n = int(meta["n"])
    channels = meta.get("channels", ["values"])
    data = np.fromfile(raw, dtype="<f8")
    expected = len(channels) * n * n
    if data.size != expected:
        raise ValueError(f"payload holds {data.size} values, expected {expected}")
    shape = (n, n) if len(channels) == 1 else (len(channels), n, n)
    return data.reshape(shape), meta


def save_orientation_field(base_path, angle, coherency, mask, grid: Grid,
                           extra: dict | None = None) -> tuple[Path, Path]:
    """Write a two-channel (angle, coherency) raster; masked pixels are NaN."""
    angle = np.where(mask, angle, np.nan)
    coherency = np.where(mask, coherency, np.nan)
    raw = Path(str(base_path) + ".f64")
    side = Path(str(base_path) + ".json")
    _write_payload(raw, np.stack([angle, coherency]))
    meta = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "n": grid.n if isinstance(grid, Grid) else int(grid),
        "domain": [grid.x0, grid.x1] if isinstance(grid, Grid) else None,
        "channels": ["angle", "coherency"],
    }
    if extra:
        meta.update(extra)
    side.write_text(json.dumps(meta, indent=2))
    return raw, side


def export_pgm(values: np.ndarray, path) -> Path:
    """Min-max normalized 8-bit PGM, for eyeballing textures."""
    v = np.asarray(values, dtype=float)
    lo, hi = float(v.min()), float(v.max())
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    img = np.clip((v - lo) * scale, 0, 255).astype(np.uint8)
    p = Path(path)
    with open(p, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
        fh.write(img.tobytes())
    return p


def export_angle_ppm(angle: np.ndarray, mask: np.ndarray, path) -> Path:
    """Hue-coded axial angle map (angle in (-pi/2, pi/2] -> hue), masked black."""
    a = np.asarray(angle, dtype=float)
    hue = (a / np.pi + 0.5) % 1.0  # axial angle -> [0, 1)
    hh = hue * 6.0
    c = np.ones_like(hue)
    xcomp = 1.0 - np.abs(hh % 2.0 - 1.0)
    rgb = np.zeros(a.shape + (3,))
    conds = [
        (hh < 1, (c, xcomp, 0)),
        ((hh >= 1) & (hh < 2), (xcomp, c, 0)),
        ((hh >= 2) & (hh < 3), (0, c, xcomp)),
        ((hh >= 3) & (hh < 4), (0, xcomp, c)),
        ((hh >= 4) & (hh < 5), (xcomp, 0, c)),
        (hh >= 5, (c, 0, xcomp)),
    ]
    for cond, (r, g, b) in conds:
        rgb[cond, 0] = r[cond] if isinstance(r, np.ndarray) else r
        rgb[cond, 1] = g[cond] if isinstance(g, np.ndarray) else g
        rgb[cond, 2] = b[cond] if isinstance(b, np.ndarray) else b
    rgb[~np.asarray(mask, dtype=bool)] = 0.0
    img = np.clip(rgb * 255.0, 0, 255).astype(np.uint8)
    p = Path(path)
    with open(p, "wb") as fh:
        fh.write(f"P6\n{img.shape[1]} {img.shape[0]}\n255\n".encode())
        fh.write(img.tobytes())
    return p
