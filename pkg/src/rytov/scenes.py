"""Randomized scatterer scenes for corpus generation, and their rasterization.

Scenes mirror the indoor-imaging training distribution: one to three circle
or square scatterers, sizes on a half-wavelength grid up to 2.5 wavelengths,
permittivities on a 0.2 grid covering both the ordinary-object band [1, 5]
and the water band [50, 77], centers confined to the top half of the DoI by
default (translation invariance of the downstream network covers the rest).
"""

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError
from .forward import PermittivityMap

SIZE_FACTORS = (0.5, 1.0, 1.5, 2.0, 2.5)           # in wavelengths
CENTER_X_RANGE = (-0.6, 0.6)
CENTER_Y_RANGE_TOP = (0.15, 0.6)
MAX_RESAMPLE_ATTEMPTS = 1000

# permittivity grid: 1.0, 1.2, ..., 5.0 and 50.0, 50.2, ..., 77.0
EPS_R_VALUES = 1.0 + 0.2 * np.concatenate(
    [np.arange(0, 21), np.arange(245, 381)])


@dataclass(frozen=True)
class Shape:
    kind: str                  # "circle" | "square"
    cx: float
    cy: float
    size: float                # diameter or side, meters
    eps_r: float

    def half_extent(self):
        return 0.5 * self.size

    def covers(self, x, y):
        if self.kind == "circle":
            return (x - self.cx) ** 2 + (y - self.cy) ** 2 \
                <= self.half_extent() ** 2
        if self.kind == "square":
            return np.maximum(np.abs(x - self.cx), np.abs(y - self.cy)) \
                <= self.half_extent()
        raise ConfigError(f"unknown shape kind {self.kind!r}")

    def inside(self, doi):
        h = self.half_extent()
        return (abs(self.cx) + h <= 0.5 * doi.size_x
                and abs(self.cy) + h <= 0.5 * doi.size_y)


@dataclass(frozen=True)
class SceneSpec:
    shapes: tuple
    seed: int = None

    def to_json(self):
        return json.dumps(
            {"seed": self.seed, "shapes": [asdict(s) for s in self.shapes]},
            sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text):
        raw = json.loads(text)
        try:
            shapes = tuple(Shape(**s) for s in raw["shapes"])
        except (KeyError, TypeError) as e:
            raise ConfigError(f"bad scene JSON: {e}")
        return cls(shapes=shapes, seed=raw.get("seed"))


def sample_scene(seed, count, cfg, doi, placement="top"):
    """Draw a random scene with `count` shapes (1 to 3), deterministic under
    the seed. A shape crossing the DoI boundary is redrawn in full."""
    if count not in (1, 2, 3):
        raise ConfigError(f"shape count must be 1, 2 or 3, got {count}")
    if placement not in ("top", "full"):
        raise ConfigError(f"placement must be 'top' or 'full', got {placement!r}")
    cy_range = CENTER_Y_RANGE_TOP if placement == "top" \
        else (-0.5 * doi.size_y, 0.5 * doi.size_y)
    rng = np.random.default_rng(seed)
    shapes = []
    for _ in range(count):
        for attempt in range(MAX_RESAMPLE_ATTEMPTS):
            shape = Shape(
                kind="circle" if rng.random() < 0.5 else "square",
                cx=rng.uniform(*CENTER_X_RANGE),
                cy=rng.uniform(*cy_range),
                size=float(rng.choice(SIZE_FACTORS)) * cfg.wavelength,
                eps_r=float(rng.choice(EPS_R_VALUES)),
            )
            if shape.inside(doi):
                shapes.append(shape)
                break
        else:
            raise ConfigError(
                f"could not place a shape inside the DoI after "
                f"{MAX_RESAMPLE_ATTEMPTS} attempts")
    return SceneSpec(shapes=tuple(shapes), seed=seed)


def rasterize(scene, grid):
    """Ground-truth eps_R image: cell value is the permittivity of the last
    listed shape covering the cell center, 1.0 elsewhere."""
    xg, yg = np.meshgrid(grid.xs, grid.ys)
    img = np.ones(grid.shape)
    for shape in scene.shapes:
        img[shape.covers(xg, yg)] = shape.eps_r
    return img


def scene_permittivity(scene, grid):
    """Lossless PermittivityMap of the scene on the given grid."""
    return PermittivityMap(grid=grid,
                           eps=rasterize(scene, grid).astype(complex),
                           shapes=scene.shapes)
