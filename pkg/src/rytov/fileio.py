"""On-disk formats.

All quantitative exchange uses raw little-endian IEEE-754 arrays (f32 for
images, f64 for measurements and projectors) next to small JSON sidecars;
PNGs are previews only. JSON is always written canonically (sorted keys,
compact separators) so reruns are byte-identical.
"""

import csv
import hashlib
import json
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ConfigError, DataMismatchError
from .forward import MeasurementSet
from .geometry import DoIGrid
from .inverse import ContrastPair, PrecomputedInverse


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def write_json(path, obj):
    Path(path).write_text(canonical_json(obj))


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"missing file: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}")


def write_raw(path, arr, dtype):
    Path(path).write_bytes(np.ascontiguousarray(arr, dtype=dtype).tobytes())


def read_raw(path, dtype, shape=None):
    data = np.frombuffer(Path(path).read_bytes(), dtype=dtype)
    if shape is not None:
        expected = int(np.prod(shape))
        if data.size != expected:
            raise DataMismatchError(
                f"{path}: expected {expected} values, found {data.size}")
        data = data.reshape(shape)
    return data.astype(dtype.lstrip("<"))


def write_f32(path, arr):
    write_raw(path, arr, "<f4")


def read_f32(path, shape=None):
    return read_raw(path, "<f4", shape)


def write_f64(path, arr):
    write_raw(path, arr, "<f8")


def read_f64(path, shape=None):
    return read_raw(path, "<f8", shape)


def save_measurements(out_prefix, m):
    """Write <prefix>.json + <prefix>.f64 for a measurement set."""
    out_prefix = Path(out_prefix)
    write_f64(out_prefix.with_suffix(".f64"), m.values)
    write_json(out_prefix.with_suffix(".json"), {
        "layout_hash": m.layout.layout_hash,
        "kind": m.kind,
        "units": "dB",
        "count": int(len(m.values)),
        "label": m.label,
        "values_file": out_prefix.with_suffix(".f64").name,
    })


def load_measurements(prefix, layout):
    prefix = Path(prefix)
    manifest = read_json(prefix.with_suffix(".json"))
    if manifest["layout_hash"] != layout.layout_hash:
        raise DataMismatchError(
            f"{prefix}: measurement layout hash does not match the configured "
            "geometry")
    values = read_f64(prefix.with_suffix(".f64"), (manifest["count"],))
    return MeasurementSet(values=values, kind=manifest["kind"], layout=layout,
                          label=manifest.get("label", ""))


def export_measurements_csv(path, m):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["link_index", "tx", "rx", "value_db"])
        for l, (t, r) in enumerate(m.layout.links):
            writer.writerow([l, int(t), int(r), repr(float(m.values[l]))])


def save_contrast(out_dir, pair, grid, provenance=None, png=False):
    """chi_re.f32 + chi_im.f32 + sidecar (+ optional grayscale PNG previews)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_f32(out_dir / "chi_re.f32", pair.re)
    write_f32(out_dir / "chi_im.f32", pair.im)
    sidecar = {
        "grid": {"nx": grid.nx, "ny": grid.ny,
                 "size_x_m": grid.size_x, "size_y_m": grid.size_y},
        "channels": ["re", "im"],
        "format": "f32le-rowmajor",
        "provenance": provenance or {},
    }
    if png:
        norms = {}
        for name, img in (("re", pair.re), ("im", pair.im)):
            norms[name] = _write_png(out_dir / f"chi_{name}.png", img)
        sidecar["png_normalization"] = norms
    write_json(out_dir / "contrast.json", sidecar)


def load_contrast(in_dir):
    in_dir = Path(in_dir)
    sidecar = read_json(in_dir / "contrast.json")
    ny, nx = sidecar["grid"]["ny"], sidecar["grid"]["nx"]
    return ContrastPair(re=read_f32(in_dir / "chi_re.f32", (ny, nx)),
                        im=read_f32(in_dir / "chi_im.f32", (ny, nx)))


def _write_png(path, img):
    """Linear grayscale with per-image min/max normalization; returns the
    normalization actually applied."""
    lo, hi = float(np.min(img)), float(np.max(img))
    scale = hi - lo if hi > lo else 1.0
    u8 = np.round(255.0 * (img - lo) / scale).astype(np.uint8)
    Image.fromarray(u8, mode="L").save(path)
    return {"min": lo, "max": hi}


def save_projector(out_prefix, pre):
    out_prefix = Path(out_prefix)
    write_f64(out_prefix.with_suffix(".f64"), pre.pi)
    write_json(out_prefix.with_suffix(".json"), {
        "rows": pre.pi.shape[0],
        "cols": pre.pi.shape[1],
        "grid": {"nx": pre.grid.nx, "ny": pre.grid.ny,
                 "size_x_m": pre.grid.size_x, "size_y_m": pre.grid.size_y},
        "layout_hash": pre.layout_hash,
        "model_hash": pre.model_hash,
        "alpha": pre.alpha,
        "format": "f64le-rowmajor",
    })


def load_projector(prefix):
    prefix = Path(prefix)
    header = read_json(prefix.with_suffix(".json"))
    pi = read_f64(prefix.with_suffix(".f64"), (header["rows"], header["cols"]))
    g = header["grid"]
    grid = DoIGrid(g["size_x_m"], g["size_y_m"], g["nx"], g["ny"])
    return PrecomputedInverse(pi=pi, grid=grid,
                              layout_hash=header["layout_hash"],
                              model_hash=header["model_hash"],
                              alpha=header["alpha"])


def sha256_of(*chunks):
    h = hashlib.sha256()
    for chunk in chunks:
        h.update(chunk if isinstance(chunk, bytes) else str(chunk).encode())
    return h.hexdigest()
