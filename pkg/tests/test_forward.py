import numpy as np
import pytest

from rytov import (DoIGrid, PermittivityMap, add_noise, background_subtract,
                   greens_2d, make_layout, mie_cylinder_oracle,
                   solve_total_field, synthesize_power)
from rytov.errors import ConfigError, DataMismatchError, SolverConvergenceError
from rytov.forward import (KIND_ABSOLUTE, KIND_DIFFERENCED, apply_kernel,
                           convolution_kernel, interaction_matrix, self_term)
from rytov.scenes import Shape, SceneSpec, scene_permittivity

from conftest import circle_map
from oracles import disk_greens_integral_mp


def test_permittivity_map_invariants():
    grid = DoIGrid(1.0, 1.0, 8, 8)
    with pytest.raises(ConfigError):
        PermittivityMap(grid=grid, eps=np.full(grid.shape, 0.5 + 0j))
    with pytest.raises(ConfigError):
        PermittivityMap(grid=grid, eps=np.full(grid.shape, 2.0 - 0.1j))
    with pytest.raises(ConfigError):
        PermittivityMap(grid=grid, eps=np.ones((4, 4), dtype=complex))
    m = PermittivityMap(grid=grid, eps=np.full(grid.shape, 3.0 + 0.5j))
    # stored loss notation maps to the absorbing sign of the e^{+jwt} convention
    assert m.chi[0, 0] == 2.0 - 0.5j
    assert np.all(PermittivityMap.empty(grid).eps == 1.0 + 0j)


def test_richmond_self_term_against_quadrature(cfg):
    for cell in (0.0125, 0.00625, 0.003):
        got = self_term(cfg, cell * cell)
        ref = disk_greens_integral_mp(cfg.k0, cell * cell)
        assert got == pytest.approx(ref, abs=1e-12)


def test_fft_operator_equals_dense_16x16(cfg):
    grid = DoIGrid(0.4, 0.4, 16, 16)
    rng = np.random.default_rng(0)
    u = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    kfft = convolution_kernel(grid, cfg)
    a = interaction_matrix(grid, np.arange(grid.n_cells),
                           np.ones(grid.n_cells), cfg)
    kdense = np.eye(grid.n_cells) - a
    via_dense = (kdense @ u.ravel()).reshape(grid.shape)
    via_fft = apply_kernel(kfft, u)
    rel = np.linalg.norm(via_fft - via_dense) / np.linalg.norm(via_dense)
    assert rel < 1e-12


def test_empty_scene_fast_path(cfg):
    grid = DoIGrid(1.5, 1.5, 32, 32)
    layout = make_layout(8, 3.0, grid)
    scene = PermittivityMap.empty(grid)
    fg = solve_total_field(scene, layout.nodes[0], cfg, layout=layout)
    assert fg.method == "empty"
    e_inc = greens_2d(grid.points(), layout.nodes[0], cfg).reshape(grid.shape)
    np.testing.assert_array_equal(fg.values, e_inc)
    np.testing.assert_array_equal(
        fg.node_values[1:], greens_2d(layout.nodes[1:], layout.nodes[0], cfg))


def test_tx_inside_doi_rejected(cfg):
    grid = DoIGrid(1.5, 1.5, 16, 16)
    scene = PermittivityMap.empty(grid)
    with pytest.raises(ConfigError):
        solve_total_field(scene, (0.1, 0.1), cfg)


@pytest.mark.parametrize("method", ["dense", "krylov"])
def test_cylinder_matches_series_oracle(cfg, lam, method):
    # 0.4 m domain at 64x64 = 20 cells per wavelength
    grid = DoIGrid(0.4, 0.4, 64, 64)
    layout = make_layout(40, 3.0, grid)
    scene = circle_map(grid, (0.0, 0.0), lam / 2, 2.0)
    tx = layout.nodes[3]
    fg = solve_total_field(scene, tx, cfg, layout=layout, method=method)
    assert fg.residual < 1e-8
    rx = np.delete(layout.nodes, 3, axis=0)
    got = np.delete(fg.node_values, 3)
    ref = mie_cylinder_oracle(lam / 2, 2.0 + 0j, tx, rx, cfg)
    assert np.linalg.norm(got - ref) / np.linalg.norm(ref) < 0.01


def test_dense_and_krylov_agree(cfg, lam):
    grid = DoIGrid(0.4, 0.4, 48, 48)
    layout = make_layout(12, 3.0, grid)
    scene = circle_map(grid, (0.05, -0.03), lam / 2, 3.0)
    fd = solve_total_field(scene, layout.nodes[1], cfg, layout=layout,
                           method="dense")
    fk = solve_total_field(scene, layout.nodes[1], cfg, layout=layout,
                           method="krylov")
    assert np.linalg.norm(fd.values - fk.values) \
        / np.linalg.norm(fd.values) < 1e-7


def test_krylov_nonconvergence_reports_residual(cfg, lam):
    grid = DoIGrid(0.4, 0.4, 48, 48)
    scene = circle_map(grid, (0.0, 0.0), lam, 40.0)
    with pytest.raises(SolverConvergenceError) as err:
        solve_total_field(scene, (1.5, 0.0), cfg, method="krylov", maxiter=2)
    assert err.value.residual > 0


def test_reciprocity(cfg, lam):
    grid = DoIGrid(1.5, 1.5, 128, 128)
    layout = make_layout(40, 3.0, grid)
    scene = circle_map(grid, (0.2, 0.3), lam / 2, 3.0)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(4):
        t, r = rng.choice(40, size=2, replace=False)
        f1 = solve_total_field(scene, layout.nodes[t], cfg, layout=layout)
        f2 = solve_total_field(scene, layout.nodes[r], cfg, layout=layout)
        p1 = 20 * np.log10(abs(f1.node_values[r]))
        p2 = 20 * np.log10(abs(f2.node_values[t]))
        worst = max(worst, abs(p1 - p2))
    assert worst < 1e-6


def test_synthesize_empty_scene_is_incident_power(cfg):
    grid = DoIGrid(1.5, 1.5, 32, 32)
    layout = make_layout(40, 3.0, grid)
    m = synthesize_power(PermittivityMap.empty(grid), layout, cfg)
    assert m.kind == KIND_ABSOLUTE
    assert len(m.values) == 780
    # per link, power is 20 log10 |E_i| (so a unit-magnitude field gives 0 dB)
    for l in (0, 100, 779):
        t, r = layout.links[l]
        e_i = greens_2d(layout.nodes[r], layout.nodes[t], cfg)
        assert m.values[l] == pytest.approx(20 * np.log10(abs(e_i)), abs=1e-12)


def test_strong_scatterer_perturbs_links(cfg, lam):
    grid = DoIGrid(1.5, 1.5, 128, 128)
    layout = make_layout(40, 3.0, grid)
    scene = scene_permittivity(
        SceneSpec(shapes=(Shape("square", 0.0, 0.2, 2.5 * lam, 77.0),)), grid)
    p = synthesize_power(scene, layout, cfg)
    p0 = synthesize_power(PermittivityMap.empty(grid), layout, cfg)
    delta = background_subtract(p, p0).values
    assert np.max(np.abs(delta)) > 3.0
    # lossless scene: no link may gain more than the 20 dB blow-up guard
    assert np.max(delta) <= 20.0


def test_grid_independence_fixed_shape(cfg, lam):
    # shapes sit on both the 120- and 180-cell lattices of the 0.75 m domain,
    # so refining 20 -> 30 cells/lambda0 keeps the physical scene identical
    cases = [(5.0, 0.05, 0.0375), (3.0, 0.1, 0.0375)]
    for eps_v, side, cx in cases:
        scene = SceneSpec(shapes=(Shape("square", cx, 0.05, side, eps_v),))
        values = {}
        for n in (120, 180):
            grid = DoIGrid(0.75, 0.75, n, n)
            layout = make_layout(40, 3.0, grid)
            values[n] = synthesize_power(scene_permittivity(scene, grid),
                                         layout, cfg).values
        assert np.max(np.abs(values[120] - values[180])) < 0.1


def test_background_subtract_examples(cfg):
    grid = DoIGrid(1.5, 1.5, 24, 24)
    layout = make_layout(8, 3.0, grid)
    a = synthesize_power(PermittivityMap.empty(grid), layout, cfg, label="t0")
    b = circle_map(grid, (0.1, 0.2), 0.12, 2.0)
    pb = synthesize_power(b, layout, cfg, label="t0+dt")
    zero = background_subtract(a, a)
    assert np.all(zero.values == 0.0)
    assert zero.kind == KIND_DIFFERENCED
    np.testing.assert_array_equal(background_subtract(pb, a).values,
                                  -background_subtract(a, pb).values)
    # determinism: identical pipelines give identical bytes
    pb2 = synthesize_power(b, layout, cfg, label="t0+dt")
    assert background_subtract(pb, a).values.tobytes() \
        == background_subtract(pb2, a).values.tobytes()


def test_background_subtract_mismatches(cfg):
    grid = DoIGrid(1.5, 1.5, 24, 24)
    layout8 = make_layout(8, 3.0, grid)
    layout10 = make_layout(10, 3.0, grid)
    m8 = synthesize_power(PermittivityMap.empty(grid), layout8, cfg)
    m10 = synthesize_power(PermittivityMap.empty(grid), layout10, cfg)
    with pytest.raises(DataMismatchError):
        background_subtract(m8, m10)
    diff = background_subtract(m8, m8)
    with pytest.raises(DataMismatchError):
        background_subtract(diff, m8)


def test_add_noise(cfg):
    grid = DoIGrid(1.5, 1.5, 24, 24)
    layout = make_layout(8, 3.0, grid)
    m = synthesize_power(PermittivityMap.empty(grid), layout, cfg)
    assert np.array_equal(add_noise(m, 0.0, seed=1).values, m.values)
    n1 = add_noise(m, 0.5, seed=42)
    n2 = add_noise(m, 0.5, seed=42)
    np.testing.assert_array_equal(n1.values, n2.values)
    assert not np.array_equal(n1.values, m.values)
    with pytest.raises(ConfigError):
        add_noise(m, -0.1, seed=1)


def test_noise_variance_oracle(cfg):
    # sample variance over 1e5 draws within 5% of sigma^2
    grid = DoIGrid(1.5, 1.5, 8, 8)
    layout = make_layout(3, 3.0, grid)
    m = synthesize_power(PermittivityMap.empty(grid), layout, cfg)
    sigma = 0.8
    draws = np.concatenate([
        add_noise(m, sigma, seed=s).values - m.values
        for s in range(int(1e5) // len(m.values) + 1)])
    assert np.var(draws) == pytest.approx(sigma ** 2, rel=0.05)
