"""Phaseless linearized inverse model and its Tikhonov/H1 solution.

The model stacks, per link l = (tx, rx) and inverse-grid cell n, the complex
kernel

    G[l, n] = C0 * k0^2 * dA * g(r_rx, r_n) * E_i^tx(r_n) / E_i^tx(r_rx)

into the real L x 2N matrix  [Re(G)  -Im(G)]  acting on the stacked
[Re(chi); Im(chi)] contrast vector, so that G_real @ chi predicts the
background-differenced dB power on every link.

The regularized solution minimizes

    (1/2) ||G_real chi - p||^2 + (alpha/2) (||Dx chi||^2 + ||Dy chi||^2)

per channel, i.e. chi = (G^T G + alpha (Dx^T Dx + Dy^T Dy))^{-1} G^T p, the
closed form that the precomputed projector Pi applies in one matvec.
"""

import hashlib
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import ConfigError, DataMismatchError, NumericalError
from .geometry import DoIGrid
from .greens import greens_2d, greens_matrix


@dataclass(frozen=True, eq=False)
class XraModelMatrix:
    """Real stacked model matrix [Re(G) -Im(G)] plus the geometry it encodes."""

    g_real: np.ndarray         # (L, 2N)
    grid: DoIGrid
    layout_hash: str
    k0: float

    @property
    def n_cells(self):
        return self.grid.n_cells

    @property
    def model_hash(self):
        h = hashlib.sha256()
        h.update(self.layout_hash.encode())
        h.update(repr((self.grid.size_x, self.grid.size_y,
                       self.grid.nx, self.grid.ny, self.k0)).encode())
        return h.hexdigest()

    def complex_rows(self):
        """Recover the complex kernel G from the stacked real halves."""
        n = self.n_cells
        return self.g_real[:, :n] - 1j * self.g_real[:, n:]


@dataclass(frozen=True, eq=False)
class RegularizerConfig:
    """Gradient-penalty weight and the per-channel difference operators."""

    alpha: float
    d_x: scipy.sparse.csr_matrix
    d_y: scipy.sparse.csr_matrix

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be > 0, got {self.alpha}")

    @classmethod
    def for_grid(cls, grid, alpha):
        d_x, d_y = difference_operators(grid.nx, grid.ny)
        return cls(alpha=alpha, d_x=d_x, d_y=d_y)

    def penalty_matrix(self):
        """Dx^T Dx + Dy^T Dy for one channel (the 4-neighbor grid Laplacian)."""
        return (self.d_x.T @ self.d_x + self.d_y.T @ self.d_y).tocoo()


@dataclass(frozen=True, eq=False)
class PrecomputedInverse:
    """Pi = (G^T G + alpha Q^T Q)^{-1} G^T, reusable for any measurement
    vector on the same geometry."""

    pi: np.ndarray             # (2N, L)
    grid: DoIGrid
    layout_hash: str
    model_hash: str
    alpha: float


@dataclass(frozen=True, eq=False)
class ContrastPair:
    """Re and Im contrast images on the inverse grid, the two channels the
    permittivity-regression network consumes."""

    re: np.ndarray             # (ny, nx)
    im: np.ndarray             # (ny, nx)

    def __post_init__(self):
        if self.re.shape != self.im.shape:
            raise DataMismatchError("contrast channels differ in shape")
        if not (np.all(np.isfinite(self.re)) and np.all(np.isfinite(self.im))):
            raise NumericalError("contrast images contain non-finite values")

    def stacked(self):
        return np.concatenate([self.re.ravel(), self.im.ravel()])


def difference_operators(nx, ny):
    """Forward-difference operators along x and y for a row-major (ny, nx)
    image, one row per interior adjacent pair (no wrap across the border,
    so constants are exactly annihilated)."""
    n = nx * ny
    # horizontal: (j, i+1) - (j, i)
    j, i = np.meshgrid(np.arange(ny), np.arange(nx - 1), indexing="ij")
    base = (j * nx + i).ravel()
    rows = np.arange(base.size)
    d_x = scipy.sparse.coo_matrix(
        (np.concatenate([-np.ones(base.size), np.ones(base.size)]),
         (np.concatenate([rows, rows]), np.concatenate([base, base + 1]))),
        shape=(base.size, n)).tocsr()
    # vertical: (j+1, i) - (j, i)
    j, i = np.meshgrid(np.arange(ny - 1), np.arange(nx), indexing="ij")
    base = (j * nx + i).ravel()
    rows = np.arange(base.size)
    d_y = scipy.sparse.coo_matrix(
        (np.concatenate([-np.ones(base.size), np.ones(base.size)]),
         (np.concatenate([rows, rows]), np.concatenate([base, base + nx]))),
        shape=(base.size, n)).tocsr()
    return d_x, d_y


def assemble_xra(layout, grid, cfg):
    """Build the stacked real model matrix for every link over the inverse
    grid. Row order follows the layout's link enumeration."""
    cells = grid.points()
    nodes = layout.nodes
    g_node_cell = greens_matrix(nodes, cells, cfg)      # also E_i from node m
    d = nodes[:, None, :] - nodes[None, :, :]
    rho = np.hypot(d[..., 0], d[..., 1])
    if np.min(rho[~np.eye(len(nodes), dtype=bool)]) == 0.0:
        raise ConfigError("layout contains coincident nodes")
    tx = layout.links[:, 0]
    rx = layout.links[:, 1]
    # incident field at the receiver of each link, from that link's tx
    e_rx = greens_2d(nodes[rx], nodes[tx], cfg)
    scale = cfg.c0 * cfg.k0 ** 2 * grid.cell_area
    g_complex = scale * g_node_cell[rx] * g_node_cell[tx] / e_rx[:, None]
    g_real = np.hstack([g_complex.real, -g_complex.imag])
    return XraModelMatrix(g_real=g_real, grid=grid,
                          layout_hash=layout.layout_hash, k0=cfg.k0)


def _normal_matrix(g, qtq_coo, alpha):
    """Dense G^T G with alpha * QtQ added to each channel's diagonal block."""
    a = g.T @ g
    n = qtq_coo.shape[0]
    if 2 * n != a.shape[0]:
        raise DataMismatchError(
            f"penalty for {n} cells cannot regularize a {a.shape[0]}-column model")
    np.add.at(a, (qtq_coo.row, qtq_coo.col), alpha * qtq_coo.data)
    np.add.at(a, (qtq_coo.row + n, qtq_coo.col + n), alpha * qtq_coo.data)
    return a


def penalized_normal_solve(g, qtq, alpha, rhs_columns):
    """Solve (G^T G + alpha diag-block(QtQ)) x = G^T rhs by Cholesky.

    rhs_columns may be a vector (L,) or matrix (L, K); single-channel systems
    pass a QtQ whose size equals the full column count (used by the 2x2 toy
    oracle in the tests).
    """
    g = np.asarray(g, dtype=float)
    qtq = scipy.sparse.coo_matrix(qtq)
    if qtq.shape[0] * 2 == g.shape[1]:
        a = _normal_matrix(g, qtq, alpha)
    elif qtq.shape[0] == g.shape[1]:
        a = g.T @ g
        np.add.at(a, (qtq.row, qtq.col), alpha * qtq.data)
    else:
        raise DataMismatchError(
            f"penalty shape {qtq.shape} incompatible with model {g.shape}")
    try:
        factor = scipy.linalg.cho_factor(a, check_finite=False)
    except scipy.linalg.LinAlgError as e:
        raise NumericalError(
            "regularized normal matrix is singular "
            f"(condition estimate {np.linalg.cond(a):.3e}): {e}")
    b = g.T @ rhs_columns
    x = scipy.linalg.cho_solve(factor, b, check_finite=False)
    # one step of iterative refinement: keeps the closed form within the
    # advertised 1e-10 of any other exact solve even for ill-scaled alpha
    x += scipy.linalg.cho_solve(factor, b - a @ x, check_finite=False)
    return x


def tikhonov_solve(model, reg, p):
    """Closed-form minimizer of the penalized least squares for one
    measurement set; returns the two contrast images."""
    _check_measurement(model, p)
    x = penalized_normal_solve(model.g_real, reg.penalty_matrix(), reg.alpha,
                               p.values)
    return _split(x, model.grid)


def precompute_pi(model, reg):
    """Materialize the full inverse-projection matrix by solving the normal
    system against every column of G^T at once."""
    pi = penalized_normal_solve(model.g_real, reg.penalty_matrix(), reg.alpha,
                                np.eye(model.g_real.shape[0]))
    return PrecomputedInverse(pi=pi, grid=model.grid,
                              layout_hash=model.layout_hash,
                              model_hash=model.model_hash, alpha=reg.alpha)


def reconstruct(p, pi):
    """Single matvec reconstruction through a precomputed projector."""
    if p.layout.layout_hash != pi.layout_hash:
        raise DataMismatchError(
            "measurement layout does not match the projector's layout "
            "(stale Pi?)")
    if len(p.values) != pi.pi.shape[1]:
        raise DataMismatchError(
            f"{len(p.values)} measurements for a {pi.pi.shape[1]}-link projector")
    return _split(pi.pi @ p.values, pi.grid)


def _split(x, grid):
    n = grid.n_cells
    return ContrastPair(re=x[:n].reshape(grid.shape),
                        im=x[n:].reshape(grid.shape))


def _check_measurement(model, p):
    if p.layout.layout_hash != model.layout_hash:
        raise DataMismatchError("measurement layout does not match the model")
    if len(p.values) != model.g_real.shape[0]:
        raise DataMismatchError(
            f"{len(p.values)} measurements for a {model.g_real.shape[0]}-row model")


def alpha_sweep(model, p, alphas=None):
    """Residual/penalty pairs across a log-spaced alpha grid, for L-curve
    regularization-weight selection."""
    if alphas is None:
        alphas = np.logspace(-2, 3, 6)
    rows = []
    qtq = RegularizerConfig.for_grid(model.grid, 1.0).penalty_matrix()
    d_x, d_y = difference_operators(model.grid.nx, model.grid.ny)
    for alpha in alphas:
        t0 = time.perf_counter()
        x = penalized_normal_solve(model.g_real, qtq, float(alpha), p.values)
        n = model.n_cells
        residual = float(np.linalg.norm(model.g_real @ x - p.values))
        penalty = float(np.sqrt(
            np.linalg.norm(d_x @ x[:n]) ** 2 + np.linalg.norm(d_y @ x[:n]) ** 2
            + np.linalg.norm(d_x @ x[n:]) ** 2 + np.linalg.norm(d_y @ x[n:]) ** 2))
        rows.append({"alpha": float(alpha), "residual": residual,
                     "penalty": penalty,
                     "solve_seconds": time.perf_counter() - t0})
    return rows
