"""Physics constants, imaging-domain grids, and the transceiver ring.

Convention used by every module in this package: time dependence e^{+j omega t},
outgoing 2D Green's function g(rho) = (-j/4) H0^(2)(k0 rho). Lossy permittivity
is stored in eps_R + j*eps_I notation with eps_I >= 0 meaning absorption; the
solvers map it to the physical eps_R - j*eps_I internally.
"""

import hashlib
import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ConfigError

# The nominal 2.4 GHz systems in this problem domain quote lambda0 = 0.125 m,
# which corresponds to c = 3e8 m/s exactly; using the CODATA value would shift
# every wavelength-derived size by 0.07%.
SPEED_OF_LIGHT = 3.0e8


@dataclass(frozen=True)
class PhysicsConfig:
    """Operating frequency and the constants derived from it."""

    frequency: float
    speed_of_light: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if self.frequency <= 0:
            raise ConfigError(f"frequency must be positive, got {self.frequency}")

    @property
    def wavelength(self):
        return self.speed_of_light / self.frequency

    @property
    def k0(self):
        return 2.0 * np.pi / self.wavelength

    @property
    def c0(self):
        """dB-per-neper conversion 20*log10(e), the phaseless model prefactor."""
        return 20.0 / np.log(10.0)


@dataclass(frozen=True)
class DoIGrid:
    """Uniform rectangular grid of cells covering the domain of interest.

    Cell n = j*nx + i is centered at (xs[i], ys[j]); the domain is centered
    at the origin. Images over the grid are (ny, nx) arrays indexed [j, i].
    """

    size_x: float
    size_y: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.size_x <= 0 or self.size_y <= 0:
            raise ConfigError("grid extent must be positive")
        if self.nx < 1 or self.ny < 1:
            raise ConfigError("grid resolution must be at least 1 cell")

    @property
    def dx(self):
        return self.size_x / self.nx

    @property
    def dy(self):
        return self.size_y / self.ny

    @property
    def cell_area(self):
        return self.dx * self.dy

    @property
    def n_cells(self):
        return self.nx * self.ny

    @property
    def shape(self):
        """Image shape (ny, nx)."""
        return (self.ny, self.nx)

    @cached_property
    def xs(self):
        return -0.5 * self.size_x + self.dx * (np.arange(self.nx) + 0.5)

    @cached_property
    def ys(self):
        return -0.5 * self.size_y + self.dy * (np.arange(self.ny) + 0.5)

    def points(self):
        """Cell centers as an (n_cells, 2) array in n = j*nx + i order."""
        xg, yg = np.meshgrid(self.xs, self.ys)
        return np.column_stack([xg.ravel(), yg.ravel()])

    def contains(self, xy):
        x, y = np.asarray(xy)[..., 0], np.asarray(xy)[..., 1]
        return (np.abs(x) <= 0.5 * self.size_x) & (np.abs(y) <= 0.5 * self.size_y)


@dataclass(frozen=True, eq=False)
class SensorLayout:
    """Transceiver positions on the boundary ring plus the link enumeration.

    Links are the L = M(M-1)/2 unordered node pairs, enumerated row-major:
    (0,1), (0,2), ..., (0,M-1), (1,2), ...; the first index transmits.
    """

    nodes: np.ndarray          # (M, 2)
    links: np.ndarray          # (L, 2) int, tx < rx

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_links(self):
        return len(self.links)

    @cached_property
    def layout_hash(self):
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.nodes, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.links, dtype="<i8").tobytes())
        return h.hexdigest()


def make_layout(n_nodes, ring_side, grid):
    """Place n_nodes equally spaced on a square ring of side ring_side
    (centered at the origin, counterclockwise from the bottom-left corner)
    and enumerate all links.
    """
    if n_nodes < 3:
        raise ConfigError(f"need at least 3 nodes, got {n_nodes}")
    if ring_side <= max(grid.size_x, grid.size_y):
        raise ConfigError(
            f"ring side {ring_side} must exceed the DoI extent "
            f"{max(grid.size_x, grid.size_y)}"
        )
    h = 0.5 * ring_side
    spacing = 4.0 * ring_side / n_nodes
    nodes = np.empty((n_nodes, 2))
    for m in range(n_nodes):
        t = m * spacing
        edge, s = divmod(t, ring_side)
        if edge == 0:
            nodes[m] = (-h + s, -h)
        elif edge == 1:
            nodes[m] = (h, -h + s)
        elif edge == 2:
            nodes[m] = (h - s, h)
        else:
            nodes[m] = (-h, h - s)
    # nodes sit strictly outside the DoI, so they can never land on a cell
    # center; assert it anyway since the model matrix divides by distances
    d = nodes[:, None, :] - grid.points()[None, :, :]
    if np.min(np.hypot(d[..., 0], d[..., 1])) < 1e-12:
        raise ConfigError("a node coincides with a grid cell center")
    links = np.array(
        [(t, r) for t in range(n_nodes - 1) for r in range(t + 1, n_nodes)],
        dtype=np.int64,
    )
    return SensorLayout(nodes=nodes, links=links)


@dataclass(frozen=True)
class SystemConfig:
    """Full measurement-system description as loaded from a config JSON."""

    physics: PhysicsConfig
    doi_size: tuple = (1.5, 1.5)
    forward_grid: tuple = (400, 400)
    inverse_grid: tuple = (50, 50)
    node_count: int = 40
    ring_side: float = 3.0

    def forward_doi(self):
        return DoIGrid(self.doi_size[0], self.doi_size[1],
                       self.forward_grid[0], self.forward_grid[1])

    def inverse_doi(self):
        return DoIGrid(self.doi_size[0], self.doi_size[1],
                       self.inverse_grid[0], self.inverse_grid[1])

    def layout(self):
        return make_layout(self.node_count, self.ring_side, self.forward_doi())

    def to_dict(self):
        return {
            "frequency_hz": self.physics.frequency,
            "doi_size_m": list(self.doi_size),
            "forward_grid": list(self.forward_grid),
            "inverse_grid": list(self.inverse_grid),
            "node_count": self.node_count,
            "ring_side_m": self.ring_side,
        }

    @cached_property
    def geometry_hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def default_config():
    """The 2.4 GHz / 3 m ring / 1.5 m DoI / 40-node reference setup."""
    return SystemConfig(physics=PhysicsConfig(frequency=2.4e9))


def _pair(value, name):
    if np.isscalar(value):
        return (value, value)
    value = tuple(value)
    if len(value) != 2:
        raise ConfigError(f"{name} must be a scalar or a pair")
    return value


def load_config(path):
    """Load a SystemConfig from a JSON document.

    Keys: frequency_hz, doi_size_m, forward_grid, inverse_grid, node_count,
    ring_side_m. Scalar grid/size values mean a square domain.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}")
    known = {"frequency_hz", "doi_size_m", "forward_grid", "inverse_grid",
             "node_count", "ring_side_m"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    base = default_config()
    try:
        fwd = _pair(raw.get("forward_grid", base.forward_grid), "forward_grid")
        inv = _pair(raw.get("inverse_grid", base.inverse_grid), "inverse_grid")
        return SystemConfig(
            physics=PhysicsConfig(frequency=float(raw.get("frequency_hz", 2.4e9))),
            doi_size=_pair(raw.get("doi_size_m", base.doi_size), "doi_size_m"),
            forward_grid=(int(fwd[0]), int(fwd[1])),
            inverse_grid=(int(inv[0]), int(inv[1])),
            node_count=int(raw.get("node_count", base.node_count)),
            ring_side=float(raw.get("ring_side_m", base.ring_side)),
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad config value in {path}: {e}")
