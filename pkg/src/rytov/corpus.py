"""Training-corpus generation: scene -> forward simulation -> background
subtraction -> linear reconstruction -> labeled sample on disk.

Each sample lives in its own sample_%05d/ directory holding chi_re.f32,
chi_im.f32, gt_eps.f32 (inverse-grid row-major f32), meas.f64 (the
background-differenced per-link dB vector) and scene.json; scene.json is
written last and marks the sample complete, which is what makes interrupted
runs resumable. The manifest JSON is the only contract consumed by the
permittivity-regression trainer.
"""

import multiprocessing
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fileio
from .errors import ConfigError, DataMismatchError, RytovError
from .forward import PermittivityMap, background_subtract, synthesize_power
from .geometry import PhysicsConfig, SystemConfig
from .inverse import RegularizerConfig, assemble_xra, precompute_pi, reconstruct
from .scenes import SceneSpec, rasterize, sample_scene, scene_permittivity

MANIFEST_NAME = "manifest.json"
FORMAT_TAG = "f32le-rowmajor"
CORPUS_VERSION = 1


@dataclass(frozen=True)
class CorpusConfig:
    system: SystemConfig
    alpha: float = 10.0
    shapes_per_scene: int = 2
    placement: str = "top"
    solver_method: str = "auto"
    dense_limit: int = 4096


@dataclass(frozen=True, eq=False)
class TrainingSample:
    index: int
    scene: SceneSpec
    chi_re: np.ndarray
    chi_im: np.ndarray
    gt_eps: np.ndarray
    meas: np.ndarray


def sample_dir_name(index):
    return f"sample_{index:05d}"


def split_sizes(n_samples):
    """train/val/test counts: a tenth each for val and test, rest training
    (5000 -> 4000/500/500)."""
    held = n_samples // 10
    return n_samples - 2 * held, held, held


def provenance_hash(system, alpha, seed):
    return fileio.sha256_of(fileio.canonical_json({
        "physics": {"frequency_hz": system.physics.frequency,
                    "speed_of_light": system.physics.speed_of_light},
        "geometry": system.to_dict(),
        "alpha": alpha,
        "seed": seed,
    }))


def _sample_seed(master_seed, index):
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _sample_complete(path, inv_grid, n_links):
    cells = inv_grid.n_cells
    expected = {"chi_re.f32": 4 * cells, "chi_im.f32": 4 * cells,
                "gt_eps.f32": 4 * cells, "meas.f64": 8 * n_links}
    if not (path / "scene.json").exists():
        return False
    return all((path / name).exists() and (path / name).stat().st_size == size
               for name, size in expected.items())


_CTX = None


def _init_worker(ctx):
    global _CTX
    _CTX = ctx


def _run_sample(index):
    return _generate_one(_CTX, index)


def _generate_one(ctx, index):
    out = Path(ctx["out_dir"]) / sample_dir_name(index)
    inv_grid = ctx["system"].inverse_doi()
    if _sample_complete(out, inv_grid, ctx["layout"].n_links):
        return index, "skipped", ""
    try:
        scene = sample_scene(_sample_seed(ctx["seed"], index),
                             ctx["cfg_corpus"].shapes_per_scene,
                             ctx["system"].physics,
                             ctx["system"].forward_doi(),
                             placement=ctx["cfg_corpus"].placement)
        fwd_map = scene_permittivity(scene, ctx["system"].forward_doi())
        p_obj = synthesize_power(fwd_map, ctx["layout"], ctx["system"].physics,
                                 method=ctx["cfg_corpus"].solver_method,
                                 dense_limit=ctx["cfg_corpus"].dense_limit,
                                 label="t0+dt")
        delta = background_subtract(p_obj, ctx["p_empty"])
        pair = reconstruct(delta, ctx["pi"])
        label = rasterize(scene, inv_grid)
        _check_label(scene, label, inv_grid)
        out.mkdir(parents=True, exist_ok=True)
        fileio.write_f32(out / "chi_re.f32", pair.re)
        fileio.write_f32(out / "chi_im.f32", pair.im)
        fileio.write_f32(out / "gt_eps.f32", label)
        fileio.write_f64(out / "meas.f64", delta.values)
        (out / "scene.json").write_text(scene.to_json())
        return index, "done", ""
    except RytovError as e:
        return index, "failed", f"{type(e).__name__}: {e}"


def _check_label(scene, label, grid):
    xg, yg = np.meshgrid(grid.xs, grid.ys)
    outside = np.ones(grid.shape, dtype=bool)
    for shape in scene.shapes:
        outside &= ~shape.covers(xg, yg)
    if not np.all(label[outside] == 1.0):
        raise DataMismatchError("label background is not exactly 1.0")
    if not np.all(np.isfinite(label)):
        raise DataMismatchError("label contains non-finite values")


def generate_corpus(n_samples, seed, cfg_corpus, out_dir, workers=1,
                    progress=None):
    """Generate (or resume) a corpus of n_samples under out_dir and write its
    manifest. Returns the manifest dict; marks the corpus partial when any
    sample failed, keeping the per-sample error messages."""
    if n_samples < 1:
        raise ConfigError("need at least one sample")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    system = cfg_corpus.system
    layout = system.layout()
    model = assemble_xra(layout, system.inverse_doi(), system.physics)
    reg = RegularizerConfig.for_grid(system.inverse_doi(), cfg_corpus.alpha)
    pi = precompute_pi(model, reg)
    p_empty = synthesize_power(PermittivityMap.empty(system.forward_doi()),
                               layout, system.physics, label="t0")
    ctx = {"system": system, "cfg_corpus": cfg_corpus, "layout": layout,
           "pi": pi, "p_empty": p_empty, "seed": seed, "out_dir": str(out_dir)}

    indices = list(range(n_samples))
    results = {}
    if workers > 1:
        with multiprocessing.get_context("fork").Pool(
                workers, initializer=_init_worker, initargs=(ctx,)) as pool:
            for k, (idx, status, msg) in enumerate(
                    pool.imap_unordered(_run_sample, indices, chunksize=1)):
                results[idx] = (status, msg)
                if progress and (k + 1) % 10 == 0:
                    progress(k + 1, n_samples)
    else:
        for k, idx in enumerate(indices):
            idx, status, msg = _generate_one(ctx, idx)
            results[idx] = (status, msg)
            if progress and (k + 1) % 10 == 0:
                progress(k + 1, n_samples)

    failed = {i: msg for i, (status, msg) in results.items()
              if status == "failed"}
    n_train, n_val, n_test = split_sizes(n_samples)
    ids = [sample_dir_name(i) for i in range(n_samples)]
    manifest = {
        "version": CORPUS_VERSION,
        "physics": {"frequency_hz": system.physics.frequency,
                    "speed_of_light": system.physics.speed_of_light},
        "geometry": system.to_dict(),
        "alpha": cfg_corpus.alpha,
        "seed": seed,
        "shapes_per_scene": cfg_corpus.shapes_per_scene,
        "placement": cfg_corpus.placement,
        "n_samples": n_samples,
        "splits": {"train": ids[:n_train],
                   "val": ids[n_train:n_train + n_val],
                   "test": ids[n_train + n_val:]},
        "format": FORMAT_TAG,
        "provenance_hash": provenance_hash(system, cfg_corpus.alpha, seed),
        "partial": bool(failed),
        "failed": {sample_dir_name(i): msg for i, msg in sorted(failed.items())},
    }
    fileio.write_json(out_dir / MANIFEST_NAME, manifest)
    return manifest


def load_manifest(corpus_dir):
    manifest = fileio.read_json(Path(corpus_dir) / MANIFEST_NAME)
    geo = manifest["geometry"]
    system = SystemConfig(
        physics=PhysicsConfig(frequency=geo["frequency_hz"],
                              speed_of_light=manifest["physics"]["speed_of_light"]),
        doi_size=tuple(geo["doi_size_m"]),
        forward_grid=tuple(geo["forward_grid"]),
        inverse_grid=tuple(geo["inverse_grid"]),
        node_count=geo["node_count"],
        ring_side=geo["ring_side_m"],
    )
    expected = provenance_hash(system, manifest["alpha"], manifest["seed"])
    if expected != manifest["provenance_hash"]:
        raise DataMismatchError(
            "corpus manifest provenance hash does not match its own fields")
    return manifest, system


def load_sample(corpus_dir, index, system):
    path = Path(corpus_dir) / sample_dir_name(index)
    inv = system.inverse_doi()
    n_links = system.node_count * (system.node_count - 1) // 2
    return TrainingSample(
        index=index,
        scene=SceneSpec.from_json((path / "scene.json").read_text()),
        chi_re=fileio.read_f32(path / "chi_re.f32", inv.shape),
        chi_im=fileio.read_f32(path / "chi_im.f32", inv.shape),
        gt_eps=fileio.read_f32(path / "gt_eps.f32", inv.shape),
        meas=fileio.read_f64(path / "meas.f64", (n_links,)),
    )
