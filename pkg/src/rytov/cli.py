"""Command-line front end: simulate, reconstruct, dataset, eval, alpha-sweep.

Exit codes: 0 success, 2 configuration problem, 3 numerical failure,
4 data mismatch. Every command is deterministic under a fixed seed and
config. Flags can be supplied through RYTOV_-prefixed environment variables.
"""

import csv
import functools
import shlex
import subprocess
import sys
import time
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from . import corpus as corpus_mod
from . import fileio
from .errors import ConfigError, DataMismatchError, NumericalError, RytovError
from .forward import (PermittivityMap, add_noise, background_subtract,
                      synthesize_power)
from .geometry import default_config, load_config
from .inverse import (RegularizerConfig, alpha_sweep, assemble_xra,
                      precompute_pi, reconstruct)
from .metrics import evaluate_pair
from .scenes import SceneSpec, scene_permittivity

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_DATA = 4


def _mapped_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as e:
            _fail(e, EXIT_CONFIG)
        except NumericalError as e:
            _fail(e, EXIT_NUMERICAL)
        except DataMismatchError as e:
            _fail(e, EXIT_DATA)
        except RytovError as e:
            _fail(e, EXIT_CONFIG)
    return wrapper


def _fail(exc, code):
    click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def _load_system(config_path, grid_forward, grid_inverse):
    system = load_config(config_path) if config_path else default_config()
    if grid_forward:
        system = replace(system, forward_grid=(grid_forward, grid_forward))
    if grid_inverse:
        system = replace(system, inverse_grid=(grid_inverse, grid_inverse))
    return system


config_option = click.option(
    "--config", type=click.Path(), envvar="RYTOV_CONFIG", default=None,
    help="Geometry/physics JSON; the 2.4 GHz 40-node reference setup when omitted.")
out_option = click.option(
    "--out", type=click.Path(), envvar="RYTOV_OUT", required=True,
    help="Output directory.")
seed_option = click.option(
    "--seed", type=int, envvar="RYTOV_SEED", default=0, show_default=True)
alpha_option = click.option(
    "--alpha", type=float, envvar="RYTOV_ALPHA", default=10.0,
    show_default=True, help="Gradient-penalty weight.")
grid_forward_option = click.option(
    "--grid-forward", type=int, envvar="RYTOV_GRID_FORWARD", default=None,
    help="Override the forward grid with an NxN resolution.")
grid_inverse_option = click.option(
    "--grid-inverse", type=int, envvar="RYTOV_GRID_INVERSE", default=None,
    help="Override the inverse grid with an NxN resolution.")
noise_option = click.option(
    "--noise-db", type=float, envvar="RYTOV_NOISE_DB", default=0.0,
    show_default=True, help="Gaussian dB noise added to absolute powers.")


@click.group()
def main():
    """Phaseless RF tomography: simulate link powers, reconstruct contrast
    images, generate training corpora, evaluate predictions."""


@main.command()
@click.option("--scene", "scene_path", type=click.Path(), required=True,
              help="Scene JSON ({'shapes': [{kind, cx, cy, size, eps_r}]}).")
@config_option
@out_option
@seed_option
@grid_forward_option
@noise_option
@_mapped_errors
def simulate(scene_path, config, out, seed, grid_forward, noise_db):
    """Synthesize absolute and background-differenced link powers for a scene."""
    system = _load_system(config, grid_forward, None)
    scene = SceneSpec.from_json(_read_text(scene_path))
    layout = system.layout()
    cfg = system.physics
    fwd = system.forward_doi()

    p_empty = synthesize_power(PermittivityMap.empty(fwd), layout, cfg,
                               label="t0")
    p_scene = synthesize_power(scene_permittivity(scene, fwd), layout, cfg,
                               label="t0+dt")
    if noise_db > 0:
        children = np.random.SeedSequence(seed).spawn(2)
        p_empty = add_noise(p_empty, noise_db, children[0])
        p_scene = add_noise(p_scene, noise_db, children[1])
    p_diff = background_subtract(p_scene, p_empty)

    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for name, m in (("p_empty", p_empty), ("p_scene", p_scene),
                    ("p_diff", p_diff)):
        fileio.save_measurements(out / name, m)
        fileio.export_measurements_csv(out / f"{name}.csv", m)
    click.echo(f"wrote {layout.n_links}-link measurement sets to {out}")


def _read_text(path):
    try:
        return Path(path).read_text()
    except FileNotFoundError:
        raise ConfigError(f"file not found: {path}")


def _projector_for(system, alpha, cache_dir):
    """Load the cached projector for this geometry/alpha or build and cache it."""
    layout = system.layout()
    model = assemble_xra(layout, system.inverse_doi(), system.physics)
    cache_dir = Path(cache_dir)
    prefix = cache_dir / f"pi_{model.model_hash[:16]}_a{alpha:g}"
    if prefix.with_suffix(".json").exists():
        pre = fileio.load_projector(prefix)
        if pre.model_hash != model.model_hash or pre.alpha != alpha:
            raise DataMismatchError(
                f"cached projector {prefix} does not match the configured "
                "geometry; delete the cache or fix the config")
        return layout, pre, 0.0
    t0 = time.perf_counter()
    reg = RegularizerConfig.for_grid(system.inverse_doi(), alpha)
    pre = precompute_pi(model, reg)
    build_seconds = time.perf_counter() - t0
    cache_dir.mkdir(parents=True, exist_ok=True)
    fileio.save_projector(prefix, pre)
    return layout, pre, build_seconds


@main.command("reconstruct")
@click.option("--meas", "meas_path", type=click.Path(), required=True,
              help="Measurement prefix or .json path from `simulate`.")
@config_option
@out_option
@alpha_option
@grid_inverse_option
@click.option("--pi-cache", type=click.Path(), default=None,
              help="Projector cache directory (default: <out>/pi_cache).")
@click.option("--unet-cmd", default=None,
              help="External permittivity-regression command, invoked as "
                   "'<cmd> <contrast_dir> <out_dir>' over the written files.")
@_mapped_errors
def reconstruct_cmd(meas_path, config, out, alpha, grid_inverse, pi_cache,
                    unet_cmd):
    """Reconstruct the two contrast images from a measurement file."""
    system = _load_system(config, None, grid_inverse)
    out = Path(out)
    layout, pre, build_seconds = _projector_for(
        system, alpha, pi_cache or out / "pi_cache")
    m = fileio.load_measurements(Path(meas_path).with_suffix(""), layout)

    t0 = time.perf_counter()
    pair = reconstruct(m, pre)
    apply_seconds = time.perf_counter() - t0
    fileio.save_contrast(out, pair, pre.grid,
                         provenance={"model_hash": pre.model_hash,
                                     "alpha": alpha,
                                     "measurement_kind": m.kind},
                         png=True)
    if build_seconds:
        click.echo(f"projector built in {build_seconds:.2f} s (cached for reuse)")
    click.echo(f"reconstruction latency: {apply_seconds * 1e3:.1f} ms "
               f"(target <= 2 s post-projector)")
    click.echo(f"wrote contrast images to {out}")

    if unet_cmd:
        pred_dir = out / "unet"
        pred_dir.mkdir(parents=True, exist_ok=True)
        cmd = shlex.split(unet_cmd) + [str(out), str(pred_dir)]
        status = subprocess.run(cmd).returncode
        if status != 0:
            raise NumericalError(
                f"permittivity-regression command failed with exit {status}")
        click.echo(f"wrote network permittivity prediction to {pred_dir}")


@main.command()
@click.option("--n", "n_samples", type=int, required=True)
@config_option
@out_option
@seed_option
@alpha_option
@grid_forward_option
@grid_inverse_option
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--shapes", type=int, default=2, show_default=True,
              help="Scatterers per scene (1-3).")
@click.option("--placement", type=click.Choice(["top", "full"]),
              default="top", show_default=True,
              help="Scatterer placement region (full-DoI for generalization suites).")
@_mapped_errors
def dataset(n_samples, config, out, seed, alpha, grid_forward, grid_inverse,
            workers, shapes, placement):
    """Generate (or resume) a training corpus."""
    system = _load_system(config, grid_forward, grid_inverse)
    cfg_corpus = corpus_mod.CorpusConfig(system=system, alpha=alpha,
                                         shapes_per_scene=shapes,
                                         placement=placement)
    t0 = time.perf_counter()
    manifest = corpus_mod.generate_corpus(
        n_samples, seed, cfg_corpus, out, workers=workers,
        progress=lambda done, total: click.echo(f"  {done}/{total} samples"))
    elapsed = time.perf_counter() - t0
    splits = {k: len(v) for k, v in manifest["splits"].items()}
    click.echo(f"corpus of {n_samples} samples in {elapsed:.1f} s "
               f"({elapsed / n_samples:.2f} s/sample), splits {splits}")
    if manifest["partial"]:
        for sample_id, msg in manifest["failed"].items():
            click.echo(f"FAILED {sample_id}: {msg}", err=True)
        click.echo("corpus marked partial", err=True)
        sys.exit(EXIT_NUMERICAL)


@main.command("eval")
@click.option("--pred", "pred_dir", type=click.Path(), default=None,
              help="Directory of <sample_id>.f32 predictions.")
@click.option("--corpus", "corpus_dir", type=click.Path(), required=True)
@click.option("--split", type=click.Choice(["train", "val", "test"]),
              default="test", show_default=True)
@click.option("--baseline", is_flag=True,
              help="Evaluate the linear-model baseline max(Re(chi)+1, 1) "
                   "instead of reading predictions.")
@out_option
@_mapped_errors
def eval_cmd(pred_dir, corpus_dir, split, baseline, out):
    """Per-sample and aggregate PSNR/IoU/centroid metrics for predictions
    aligned to a corpus split."""
    if not baseline and pred_dir is None:
        raise ConfigError("either --pred or --baseline is required")
    manifest, system = corpus_mod.load_manifest(corpus_dir)
    inv = system.inverse_doi()
    ids = manifest["splits"][split]

    missing = []
    rows = []
    for sample_id in ids:
        index = int(sample_id.split("_")[1])
        sample = corpus_mod.load_sample(corpus_dir, index, system)
        if baseline:
            pred = np.maximum(sample.chi_re + 1.0, 1.0)
        else:
            path = Path(pred_dir) / f"{sample_id}.f32"
            if not path.exists():
                missing.append(sample_id)
                continue
            pred = fileio.read_f32(path, inv.shape)
        r = evaluate_pair(pred, sample.gt_eps)
        rows.append({"sample_id": sample_id, "psnr_db": r.psnr_db,
                     "centroid_error_cells": r.centroid_error_cells,
                     "support_iou": r.support_iou})
    if missing:
        for sample_id in missing:
            click.echo(f"missing prediction: {sample_id}", err=True)
        sys.exit(EXIT_DATA)

    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "metrics.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    summary = {}
    for key in ("psnr_db", "centroid_error_cells", "support_iou"):
        col = np.array([r[key] for r in rows])
        finite = col[np.isfinite(col)]
        summary[key] = {
            "mean": float(np.mean(finite)) if len(finite) else None,
            "median": float(np.median(finite)) if len(finite) else None,
            "count_infinite": int(np.sum(~np.isfinite(col))),
        }
    summary["n_samples"] = len(rows)
    summary["split"] = split
    summary["predictor"] = "baseline-linear" if baseline else str(pred_dir)
    fileio.write_json(out / "summary.json", summary)
    click.echo(f"median PSNR {summary['psnr_db']['median']:.2f} dB over "
               f"{len(rows)} samples; wrote {out / 'metrics.csv'}")


@main.command("alpha-sweep")
@click.option("--meas", "meas_path", type=click.Path(), required=True)
@config_option
@out_option
@grid_inverse_option
@click.option("--alphas", default=None,
              help="Comma-separated weights (default: 6 log-spaced in "
                   "[1e-2, 1e3]).")
@_mapped_errors
def alpha_sweep_cmd(meas_path, config, out, grid_inverse, alphas):
    """Residual-vs-penalty pairs across regularization weights (L-curve)."""
    system = _load_system(config, None, grid_inverse)
    layout = system.layout()
    m = fileio.load_measurements(Path(meas_path).with_suffix(""), layout)
    model = assemble_xra(layout, system.inverse_doi(), system.physics)
    values = None
    if alphas:
        values = [float(a) for a in alphas.split(",")]
    rows = alpha_sweep(model, m, values)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "alpha_sweep.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    click.echo(f"wrote {len(rows)}-point sweep to {out / 'alpha_sweep.csv'}")


if __name__ == "__main__":
    main()
