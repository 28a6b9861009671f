import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from torusflow import spectral
from torusflow.errors import ConfigError, UsageError

GRID = spectral.GridSpec(2, 64)


def random_field(rng, grid, vector=False, kmax=None):
    shape = ((grid.d,) if vector else ()) + grid.shape
    f = rng.standard_normal(shape)
    if kmax is not None:
        band = np.ones(grid.spec_shape, dtype=bool)
        for k in grid.wavenumbers:
            band &= np.abs(k) <= kmax
        f = grid.ifft(grid.fft(f) * band)
    return f


def test_grid_rejects_bad_sizes():
    with pytest.raises(ConfigError):
        spectral.GridSpec(2, 48)
    with pytest.raises(ConfigError):
        spectral.GridSpec(4, 64)


def test_basis_count_for_unit_cutoff():
    basis = spectral.build_mode_basis(GRID, 1)
    assert basis.modes == ((0, 0), (0, 1), (1, 0))
    assert len(spectral.basis_fields(basis, GRID)) == 6


def test_basis_fields_orthonormal_and_divergence_free():
    basis = spectral.build_mode_basis(GRID, 3)
    fields = spectral.basis_fields(basis, GRID)
    gram = np.array([[GRID.integrate(np.sum(a * b, axis=0)) for b in fields] for a in fields])
    assert np.allclose(gram, np.eye(len(fields)), atol=1e-10)
    for w in fields:
        assert np.max(np.abs(spectral.divergence(w, GRID))) <= 1e-12 * 100


def test_single_mode_norm():
    x, y = GRID.mesh()
    w = np.stack([np.zeros_like(x), np.sqrt(2) * np.cos(2 * np.pi * x)])
    assert GRID.integrate(np.sum(w * w, axis=0)) == pytest.approx(1.0, abs=1e-12)


def test_cutoff_range_checked():
    with pytest.raises(ConfigError):
        spectral.build_mode_basis(GRID, 22)
    with pytest.raises(ConfigError):
        spectral.build_mode_basis(GRID, 0)


def test_leray_examples():
    x, y = GRID.mesh()
    psi = np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)
    assert np.max(np.abs(spectral.leray_project(spectral.gradient(psi, GRID), GRID))) < 1e-12
    shear = np.stack([np.sin(2 * np.pi * y), np.zeros_like(x)])
    assert np.allclose(spectral.leray_project(shear, GRID), shear, atol=1e-13)
    comp = np.stack([np.sin(2 * np.pi * x), np.zeros_like(x)])
    assert np.max(np.abs(spectral.leray_project(comp, GRID))) < 1e-13


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_leray_idempotent_self_adjoint(seed):
    rng = np.random.default_rng(seed)
    v, w = random_field(rng, GRID, True), random_field(rng, GRID, True)
    pv = spectral.leray_project(v, GRID)
    assert np.allclose(spectral.leray_project(pv, GRID), pv, atol=1e-12)
    lhs = GRID.integrate(np.sum(pv * w, axis=0))
    rhs = GRID.integrate(np.sum(v * spectral.leray_project(w, GRID), axis=0))
    assert abs(lhs - rhs) < 1e-10
    assert np.max(np.abs(spectral.divergence(pv, GRID))) < 1e-10


def test_truncation_examples():
    basis = spectral.build_mode_basis(GRID, 3)
    x, y = GRID.mesh()
    inside = np.stack([np.sin(2 * np.pi * 3 * y), np.zeros_like(x)])
    outside = np.stack([np.sin(2 * np.pi * 4 * y), np.zeros_like(x)])
    assert np.allclose(spectral.galerkin_truncate(inside, basis, GRID), inside, atol=1e-13)
    assert np.max(np.abs(spectral.galerkin_truncate(outside, basis, GRID))) < 1e-13


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_truncation_nonexpansive_idempotent(seed):
    rng = np.random.default_rng(seed)
    basis = spectral.build_mode_basis(GRID, 5)
    v = random_field(rng, GRID, True, kmax=10)
    pv = spectral.galerkin_truncate(v, basis, GRID)
    assert GRID.integrate(np.sum(pv * pv, axis=0)) <= GRID.integrate(np.sum(v * v, axis=0)) + 1e-12
    assert np.allclose(spectral.galerkin_truncate(pv, basis, GRID), pv, atol=1e-13)


@pytest.mark.parametrize("mode", ["interface", "grid", "power", "none"])
def test_kernel_unit_mass(mode):
    kern = spectral.mollifier_kernel(GRID, 0.05, 0.25, mode)
    assert kern.samples.sum() * GRID.cell_volume == pytest.approx(1.0, abs=1e-12)
    assert kern.hat[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(kern.samples >= 0)


def test_kernel_widths():
    assert spectral.mollifier_kernel(GRID, 0.02, 0.25, "power").width == pytest.approx(0.02 ** 0.125)
    assert spectral.mollifier_kernel(GRID, 0.02, 0.25, "power").width == pytest.approx(0.613, abs=1e-3)
    assert spectral.mollifier_kernel(GRID, 0.05, 0.25, "interface").width == 0.05
    assert spectral.mollifier_kernel(GRID, 0.05, 0.25, "grid").width == 4 / 64
    with pytest.raises(ConfigError):
        spectral.mollifier_kernel(GRID, 0.02, 0.25, "interface")  # 0.02 < 2/64
    with pytest.raises(ConfigError):
        spectral.mollifier_kernel(GRID, 0.05, 0.25, "gaussian")


def test_mollify_identity_and_constants():
    rng = np.random.default_rng(1)
    v = random_field(rng, GRID, True)
    assert np.array_equal(spectral.mollify(v, spectral.mollifier_kernel(GRID, 0.05, mode="none"), GRID), v)
    kern = spectral.mollifier_kernel(GRID, 0.1)
    assert np.allclose(spectral.mollify(np.full(GRID.shape, 3.0), kern, GRID), 3.0, atol=1e-13)
    other = spectral.mollifier_kernel(spectral.GridSpec(2, 32), 0.1)
    with pytest.raises(UsageError):
        spectral.mollify(v, other, GRID)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([0.07, 0.1, 0.3]))
def test_mollify_contracts(seed, width):
    rng = np.random.default_rng(seed)
    kern = spectral.mollifier_kernel(GRID, width)
    f = random_field(rng, GRID, kmax=6)
    g = spectral.mollify(f, kern, GRID)
    assert abs(g.mean() - f.mean()) < 1e-12
    for q in (1, 2):
        assert GRID.integrate(np.abs(g) ** q) <= GRID.integrate(np.abs(f) ** q) * (1 + 1e-12)
    assert np.max(np.abs(g)) <= np.max(np.abs(f)) * (1 + 1e-12)
    grad_f = spectral.gradient(f, GRID)
    grad_g = spectral.gradient(g, GRID)
    assert np.max(np.abs(grad_g)) <= np.max(np.abs(grad_f)) * (1 + 1e-12)
    # commutes with differentiation; preserves divergence-free fields
    assert np.allclose(grad_g, spectral.mollify(grad_f, kern, GRID), atol=1e-10)
    v = spectral.leray_project(random_field(rng, GRID, True, kmax=6), GRID)
    assert np.max(np.abs(spectral.divergence(spectral.mollify(v, kern, GRID), GRID))) < 1e-10


def test_derivative_examples():
    x, y = GRID.mesh()
    f = np.sin(2 * np.pi * x)
    g = spectral.gradient(f, GRID)
    assert np.allclose(g[0], 2 * np.pi * np.cos(2 * np.pi * x), atol=1e-11)
    assert np.allclose(g[1], 0, atol=1e-12)
    assert np.allclose(spectral.laplacian(f, GRID), -4 * np.pi ** 2 * f, atol=1e-10)
    u = np.stack([np.sin(2 * np.pi * y), np.zeros_like(x)])
    e = spectral.sym_gradient(u, GRID)
    assert np.allclose(e[0, 1], np.pi * np.cos(2 * np.pi * y), atol=1e-12)
    assert np.allclose(e[1, 0], e[0, 1])
    assert np.allclose(e[0, 0], 0, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.sampled_from([2, 3]))
def test_roundtrip_and_div_grad(seed, d):
    grid = spectral.GridSpec(d, 16 if d == 3 else 64)
    rng = np.random.default_rng(seed)
    f = random_field(rng, grid)
    assert np.allclose(grid.ifft(grid.fft(f)), f, rtol=0, atol=1e-12 * np.max(np.abs(f)))
    f = random_field(rng, grid, kmax=grid.N // 2 - 1)
    lap = spectral.laplacian(f, grid)
    dg = spectral.divergence(spectral.gradient(f, grid), grid)
    assert np.max(np.abs(dg - lap)) <= 1e-10 * max(1.0, np.max(np.abs(lap)))


def test_shape_checks():
    with pytest.raises(UsageError):
        spectral.gradient(np.zeros((32, 32)), GRID)
    with pytest.raises(UsageError):
        spectral.leray_project(np.zeros((3, 64, 64)), GRID)


def test_three_dimensional_basis():
    grid = spectral.GridSpec(3, 16)
    basis = spectral.build_mode_basis(grid, 1)
    fields = spectral.basis_fields(basis, grid)
    assert len(fields) == 3 + 3 * 2 * 2
    gram = np.array([[grid.integrate(np.sum(a * b, axis=0)) for b in fields] for a in fields])
    assert np.allclose(gram, np.eye(len(fields)), atol=1e-10)
