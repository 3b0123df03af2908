"""Full-wave forward solver: pulse-basis collocation of the volume integral
equation E = E_i + k0^2 G[chi E], with Richmond's equivalent-circle rule for
the self cell, plus phaseless per-link power synthesis.

Two algebraically identical solution paths:

* "dense"  — restrict the system to the cells where chi != 0 and LU-factor
  it once per scene; exact, and the factorization is shared by every
  transmitter. Preferred whenever the support is small compared to the grid.
* "krylov" — matrix-free BiCGStab with the block-Toeplitz operator applied
  by zero-padded 2D FFT convolution; the only option when the contrast
  support is a large fraction of a large grid.

The "auto" method picks dense below a support-size threshold.
"""

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .errors import ConfigError, DataMismatchError, SolverConvergenceError
from .geometry import DoIGrid, SensorLayout
from .greens import greens_2d, greens_matrix
from .special import hankel2

KIND_ABSOLUTE = "absolute-power"
KIND_DIFFERENCED = "background-differenced"

DENSE_SUPPORT_LIMIT = 4096


@dataclass(frozen=True, eq=False)
class PermittivityMap:
    """Relative permittivity per cell, stored as eps_R + j*eps_I with
    eps_I >= 0 meaning absorption (the solver applies the e^{+j omega t}
    sign internally). Background cells are exactly 1."""

    grid: DoIGrid
    eps: np.ndarray            # (ny, nx) complex
    shapes: tuple = ()         # scene metadata, free-form

    def __post_init__(self):
        eps = np.asarray(self.eps, dtype=complex)
        if eps.shape != self.grid.shape:
            raise ConfigError(
                f"eps shape {eps.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(eps)):
            raise ConfigError("permittivity map contains non-finite values")
        if np.min(eps.real) < 1.0 or np.min(eps.imag) < 0.0:
            raise ConfigError("passive media require eps_R >= 1 and eps_I >= 0")
        object.__setattr__(self, "eps", eps)

    @property
    def chi(self):
        """Contrast eps - 1 in the solver's sign convention."""
        return (self.eps.real - 1.0) - 1j * self.eps.imag

    @classmethod
    def empty(cls, grid):
        return cls(grid=grid, eps=np.ones(grid.shape, dtype=complex))


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """Per-link power values in dB."""

    values: np.ndarray
    kind: str
    layout: SensorLayout
    label: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.layout.n_links,):
            raise DataMismatchError(
                f"{len(values)} values for a layout with {self.layout.n_links} links")
        if not np.all(np.isfinite(values)):
            raise DataMismatchError("measurement values must be finite")
        if self.kind not in (KIND_ABSOLUTE, KIND_DIFFERENCED):
            raise ConfigError(f"unknown measurement kind {self.kind!r}")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True, eq=False)
class FieldGrid:
    """Complex total field at every cell center, plus (optionally) at the
    layout nodes; carries how the solve was done."""

    values: np.ndarray                 # (ny, nx) complex
    node_values: np.ndarray = None     # (M,) complex or None
    method: str = ""
    iterations: int = 0
    residual: float = 0.0


def self_term(cfg, cell_area):
    """k0^2 * integral of g over the equal-area disk replacing a cell
    (Richmond's rule): -1 - j*(pi/2)*k0*a*H1^(2)(k0*a), a = sqrt(area/pi)."""
    a = np.sqrt(cell_area / np.pi)
    ka = cfg.k0 * a
    return -1.0 - 0.5j * np.pi * ka * hankel2(1, ka)


def convolution_kernel(grid, cfg):
    """FFT of the (2ny, 2nx) circulant embedding of k0^2 * g * cell_area over
    all cell-center offsets, with the self cell replaced by the Richmond
    disk integral."""
    ox = np.arange(2 * grid.nx, dtype=float)
    oy = np.arange(2 * grid.ny, dtype=float)
    ox[grid.nx:] -= 2 * grid.nx
    oy[grid.ny:] -= 2 * grid.ny
    rho = np.hypot(oy[:, None] * grid.dy, ox[None, :] * grid.dx)
    kern = np.empty(rho.shape, dtype=complex)
    nonzero = rho > 0.0
    kern[nonzero] = (cfg.k0 ** 2 * grid.cell_area
                     * (-0.25j) * hankel2(0, cfg.k0 * rho[nonzero]))
    kern[0, 0] = self_term(cfg, grid.cell_area)
    return np.fft.fft2(kern)


_KERNEL_CACHE = {}


def _cached_kernel(grid, cfg):
    key = (grid.nx, grid.ny, grid.dx, grid.dy, cfg.k0)
    if key not in _KERNEL_CACHE:
        if len(_KERNEL_CACHE) > 8:
            _KERNEL_CACHE.clear()
        _KERNEL_CACHE[key] = convolution_kernel(grid, cfg)
    return _KERNEL_CACHE[key]


def apply_kernel(kernel_fft, u):
    """k0^2 G[u] * cell_area via zero-padded FFT convolution; u is (ny, nx)."""
    ny2, nx2 = kernel_fft.shape
    conv = np.fft.ifft2(kernel_fft * np.fft.fft2(u, s=(ny2, nx2)))
    return conv[: u.shape[0], : u.shape[1]]


def interaction_matrix(grid, cell_indices, chi_cells, cfg):
    """Dense system matrix I - K*diag(chi) over the given flat cell indices.

    Distances come from integer lattice offsets so the entries are bit-equal
    to the FFT convolution kernel's."""
    idx = np.asarray(cell_indices)
    ix, iy = idx % grid.nx, idx // grid.nx
    rho = np.hypot((ix[:, None] - ix[None, :]) * grid.dx,
                   (iy[:, None] - iy[None, :]) * grid.dy)
    n = len(idx)
    kmat = np.empty((n, n), dtype=complex)
    off = rho > 0.0
    kmat[off] = cfg.k0 ** 2 * grid.cell_area \
        * (-0.25j) * hankel2(0, cfg.k0 * rho[off])
    kmat[~off] = self_term(cfg, grid.cell_area)
    return np.eye(n) - kmat * np.asarray(chi_cells)[None, :]


class SceneSolver:
    """Per-scene machinery shared across transmitters: support extraction,
    one dense factorization (or the FFT operator), and re-radiation."""

    def __init__(self, scene, cfg, method="auto", rtol=1e-8, maxiter=4000,
                 dense_limit=DENSE_SUPPORT_LIMIT):
        if method not in ("auto", "dense", "krylov"):
            raise ConfigError(f"unknown solver method {method!r}")
        self.scene = scene
        self.cfg = cfg
        self.grid = scene.grid
        self.rtol = rtol
        self.maxiter = maxiter
        chi = scene.chi
        self.support = np.flatnonzero(chi.ravel() != 0.0)
        self.chi_s = chi.ravel()[self.support]
        self.points_s = self.grid.points()[self.support]
        if method == "auto":
            method = "dense" if len(self.support) <= dense_limit else "krylov"
        self.method = "empty" if len(self.support) == 0 else method
        self._lu = None
        self._kfft = None

    @property
    def kernel_fft(self):
        if self._kfft is None:
            self._kfft = _cached_kernel(self.grid, self.cfg)
        return self._kfft

    def _dense_lu(self):
        if self._lu is None:
            a = interaction_matrix(self.grid, self.support, self.chi_s, self.cfg)
            self._lu = scipy.linalg.lu_factor(a)
        return self._lu

    def _apply_support_operator(self, e_s):
        """(I - K chi) restricted to support cells, via the grid FFT."""
        u = np.zeros(self.grid.shape, dtype=complex)
        u.ravel()[self.support] = self.chi_s * e_s
        conv = apply_kernel(self.kernel_fft, u)
        return e_s - conv.ravel()[self.support]

    def solve_support(self, e_inc_s):
        """Total field on the support cells given the incident field there.
        Accepts a single RHS (S,) or a batch (S, T)."""
        e_inc_s = np.asarray(e_inc_s, dtype=complex)
        if self.method == "empty":
            return e_inc_s.copy()
        if self.method == "dense":
            return scipy.linalg.lu_solve(self._dense_lu(), e_inc_s)
        single = e_inc_s.ndim == 1
        rhs_list = e_inc_s[:, None] if single else e_inc_s
        n = len(self.support)
        op = scipy.sparse.linalg.LinearOperator(
            (n, n), matvec=self._apply_support_operator, dtype=complex)
        out = np.empty_like(rhs_list)
        for k in range(rhs_list.shape[1]):
            b = rhs_list[:, k]
            x, info = scipy.sparse.linalg.bicgstab(
                op, b, x0=b.copy(), rtol=self.rtol, atol=0.0,
                maxiter=self.maxiter)
            res = np.linalg.norm(self._apply_support_operator(x) - b) \
                / np.linalg.norm(b)
            if info != 0 or res > self.rtol:
                raise SolverConvergenceError(
                    f"BiCGStab did not reach rtol={self.rtol:g} within "
                    f"{self.maxiter} iterations (residual {res:.3e})",
                    residual=res, iterations=self.maxiter)
            out[:, k] = x
        return out[:, 0] if single else out

    def radiate(self, points, e_s):
        """Scattered field k0^2 sum_n g(r, r_n) chi_n E_n dA at external
        points; e_s may be a batch (S, T)."""
        e_s = np.asarray(e_s, dtype=complex)
        if len(self.support) == 0:
            shape = (len(points),) if e_s.ndim == 1 else (len(points), e_s.shape[1])
            return np.zeros(shape, dtype=complex)
        g = greens_matrix(points, self.points_s, self.cfg)
        w = self.cfg.k0 ** 2 * self.grid.cell_area
        weighted = self.chi_s * e_s if e_s.ndim == 1 else self.chi_s[:, None] * e_s
        return w * (g @ weighted)

    def full_field(self, tx, e_s):
        """Total field on every grid cell for one transmitter."""
        e = greens_2d(self.grid.points(), np.asarray(tx, dtype=float), self.cfg)
        if len(self.support):
            u = np.zeros(self.grid.shape, dtype=complex)
            u.ravel()[self.support] = self.chi_s * e_s
            e = e + apply_kernel(self.kernel_fft, u).ravel()
            # the FFT pass uses the Richmond self integral on support cells,
            # which is exactly the collocation equation solved for e_s
        return e.reshape(self.grid.shape)


def solve_total_field(scene, tx, cfg, layout=None, method="auto", rtol=1e-8,
                      maxiter=4000, dense_limit=DENSE_SUPPORT_LIMIT):
    """Total field for one transmitter: every grid cell, plus the layout
    nodes when a layout is given. tx must lie outside the DoI."""
    tx = np.asarray(tx, dtype=float)
    if scene.grid.contains(tx):
        raise ConfigError("transmitter must lie outside the DoI")
    solver = SceneSolver(scene, cfg, method=method, rtol=rtol,
                         maxiter=maxiter, dense_limit=dense_limit)
    e_inc_s = greens_2d(solver.points_s, tx, cfg) if len(solver.support) \
        else np.zeros(0, dtype=complex)
    e_s = solver.solve_support(e_inc_s)
    cells = solver.full_field(tx, e_s)
    node_values = None
    if layout is not None:
        others = ~np.all(layout.nodes == tx, axis=1)
        node_values = np.full(layout.n_nodes, np.nan + 0j)
        node_values[others] = greens_2d(layout.nodes[others], tx, cfg)
        node_values[others] += solver.radiate(layout.nodes[others], e_s)
    residual = 0.0
    if len(solver.support):
        residual = float(
            np.linalg.norm(solver._apply_support_operator(e_s) - e_inc_s)
            / np.linalg.norm(e_inc_s))
    return FieldGrid(values=cells, node_values=node_values,
                     method=solver.method, residual=residual)


def synthesize_power(scene, layout, cfg, method="auto", rtol=1e-8,
                     maxiter=4000, dense_limit=DENSE_SUPPORT_LIMIT,
                     label=""):
    """Absolute per-link power 20*log10|E_total(rx)| in dB. One field solve
    per transmitter, shared by all of its receivers."""
    solver = SceneSolver(scene, cfg, method=method, rtol=rtol,
                         maxiter=maxiter, dense_limit=dense_limit)
    tx_ids = np.unique(layout.links[:, 0])
    nodes = layout.nodes
    if len(solver.support):
        g_node_s = greens_matrix(nodes, solver.points_s, cfg)  # (M, S)
        try:
            e_s = solver.solve_support(g_node_s[tx_ids].T)     # (S, T)
        except SolverConvergenceError as e:
            raise SolverConvergenceError(
                f"forward solve failed for a transmitter batch: {e}",
                residual=e.residual, iterations=e.iterations)
        w = cfg.k0 ** 2 * scene.grid.cell_area
        scat = w * g_node_s @ (solver.chi_s[:, None] * e_s)    # (M, T)
    else:
        scat = np.zeros((layout.n_nodes, len(tx_ids)))
    col_of = {int(t): k for k, t in enumerate(tx_ids)}
    g_nn = greens_matrix_offdiag(nodes, cfg)
    values = np.empty(layout.n_links)
    for l, (t, r) in enumerate(layout.links):
        e_total = g_nn[r, t] + scat[r, col_of[int(t)]]
        values[l] = 20.0 * np.log10(np.abs(e_total))
    return MeasurementSet(values=values, kind=KIND_ABSOLUTE, layout=layout,
                          label=label)


def greens_matrix_offdiag(nodes, cfg):
    """Node-to-node Green's matrix with the (singular) diagonal left as NaN;
    links never pair a node with itself."""
    n = len(nodes)
    d = nodes[:, None, :] - nodes[None, :, :]
    rho = np.hypot(d[..., 0], d[..., 1])
    out = np.full((n, n), np.nan + 0j)
    off = ~np.eye(n, dtype=bool)
    out[off] = -0.25j * hankel2(0, cfg.k0 * rho[off])
    return out


def background_subtract(p_after, p_before):
    """Per-link dB difference of two absolute-power sets on one layout."""
    if p_after.layout.layout_hash != p_before.layout.layout_hash:
        raise DataMismatchError("measurement sets use different layouts")
    if p_after.kind != KIND_ABSOLUTE or p_before.kind != KIND_ABSOLUTE:
        raise DataMismatchError(
            "background subtraction needs two absolute-power sets, got "
            f"{p_after.kind!r} and {p_before.kind!r}")
    label = f"{p_after.label or 't0+dt'} - {p_before.label or 't0'}"
    return MeasurementSet(values=p_after.values - p_before.values,
                          kind=KIND_DIFFERENCED, layout=p_after.layout,
                          label=label)


def add_noise(m, sigma_db, seed):
    """Zero-mean Gaussian dB noise, deterministic under the seed."""
    if sigma_db < 0:
        raise ConfigError(f"noise sigma must be >= 0, got {sigma_db}")
    if sigma_db == 0:
        return replace(m, values=m.values.copy())
    rng = np.random.default_rng(seed)
    noisy = m.values + rng.normal(0.0, sigma_db, size=m.values.shape)
    return replace(m, values=noisy)
