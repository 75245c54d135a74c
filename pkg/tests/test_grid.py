import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from groundstate.grid import (
    GridMismatch,
    build_grid,
    convolve,
    integrate,
    inner,
    laplacian,
    laplacian_quadratic_form,
    power_kernel_cell_average,
    sample_radial_kernel,
)
from oracles import direct_convolution_1d


def test_spacing_and_cells():
    g = build_grid(1, 16, 8)
    assert g.spacing == 4.0
    assert g.axis.tolist() == [-16, -12, -8, -4, 0, 4, 8, 12]


def test_two_dim_cell_count():
    g = build_grid(2, 8, 16)
    assert g.size == 256 and g.cell_volume == 1.0


@pytest.mark.parametrize("args", [(1, 16, 7), (4, 16, 8), (1, 0.0, 8), (1, -1.0, 8), (1, 16, 6)])
def test_rejects_bad_grids(args):
    with pytest.raises(ValueError):
        build_grid(*args)


def test_origin_index_and_zero_mode():
    g = build_grid(2, 5.0, 10)
    assert g.axis[g.n // 2] == 0.0
    assert g.k2.flat[0] == 0.0
    assert g.index_radius_sq[5, 5] == 0


def test_multipliers_symmetric_fft_order():
    g = build_grid(1, 3.0, 8)
    modes = np.array([0, 1, 2, 3, 4])
    assert np.allclose(g.k2, (np.pi * modes / 3.0) ** 2, rtol=1e-14)


def test_integrate_constant_and_zero():
    g = build_grid(1, 16, 64)
    assert integrate(g, np.ones(g.shape)) == 32.0
    assert integrate(g, np.zeros(g.shape)) == 0.0


def test_integrate_gaussian():
    g = build_grid(1, 16, 512)
    assert abs(integrate(g, np.exp(-g.axis**2)) - math.sqrt(math.pi)) < 1e-10


def test_gaussian_dirichlet_form():
    g = build_grid(1, 16, 512)
    phi = math.pi**-0.25 * np.exp(-0.5 * g.axis**2)
    assert abs(laplacian_quadratic_form(g, phi) - 0.5) < 1e-8


def test_dirichlet_form_of_constant_and_zero():
    g = build_grid(2, 4, 16)
    assert laplacian_quadratic_form(g, np.zeros(g.shape)) == 0.0
    assert abs(laplacian_quadratic_form(g, 3.0 * np.ones(g.shape))) < 1e-12


def test_dirichlet_form_matches_laplacian_pairing():
    g = build_grid(2, 6, 32)
    f = np.exp(-g.radius**2) * (1 + 0.3 * g.coords[0])
    assert math.isclose(laplacian_quadratic_form(g, f), inner(g, laplacian(g, f), f), rel_tol=1e-12)


def test_dirichlet_form_against_central_differences():
    # second-order finite differences converge to the spectral value at O(h²)
    errs = []
    for n in (64, 128):
        g = build_grid(1, 10, n)
        f = np.exp(-g.axis**2)
        d = (np.roll(f, -1) - f) / g.spacing
        errs.append(abs(g.spacing * np.sum(d * d) - laplacian_quadratic_form(g, f)))
    assert errs[1] < errs[0] / 3.5


def test_delta_kernel_is_identity():
    g = build_grid(2, 4, 16)
    k = np.zeros(g.shape)
    k[8, 8] = 1.0 / g.cell_volume
    f = np.random.default_rng(0).random(g.shape)
    assert np.allclose(convolve(g, k, f), f, atol=1e-14)
    assert np.all(convolve(g, k, np.zeros(g.shape)) == 0)


def test_gaussian_self_convolution():
    g = build_grid(1, 16, 512)
    out = convolve(g, np.exp(-g.axis**2), np.exp(-g.axis**2))
    assert np.max(np.abs(out - math.sqrt(math.pi / 2) * np.exp(-0.5 * g.axis**2))) < 1e-8


def test_convolution_matches_direct_sum():
    g = build_grid(1, 8, 64)
    rng = np.random.default_rng(3)
    f = rng.random(g.shape)
    kfun = lambda off: np.exp(-np.abs(off * g.spacing))
    k = sample_radial_kernel(g, lambda r: np.exp(-r))
    assert np.allclose(convolve(g, k, f), direct_convolution_1d(kfun, f, g.spacing), atol=1e-12)


def test_grid_mismatch():
    g = build_grid(1, 8, 64)
    with pytest.raises(GridMismatch):
        convolve(g, np.ones(32), np.ones(64))


def test_cell_average_closed_forms():
    g1 = build_grid(1, 8, 64)
    # mean of |x|^-1/2 over [-h/2, h/2] is 2 (h/2)^{-1/2}
    assert math.isclose(power_kernel_cell_average(g1, 0.5), 2.0 * (g1.spacing / 2) ** -0.5, rel_tol=1e-14)
    g2 = build_grid(2, 8, 64)
    assert math.isclose(power_kernel_cell_average(g2, 1.0) * g2.spacing, 4 * math.log(1 + math.sqrt(2)), rel_tol=1e-12)


def test_cell_average_3d_against_monte_carlo():
    g = build_grid(3, 4, 8)
    pts = np.random.default_rng(7).random((400_000, 3)) - 0.5
    mc = np.mean(1.0 / np.linalg.norm(pts, axis=1))
    assert math.isclose(power_kernel_cell_average(g, 1.0) * g.spacing, mc, rel_tol=5e-3)


def test_cell_average_rejects_nonintegrable():
    with pytest.raises(ValueError):
        power_kernel_cell_average(build_grid(1, 8, 64), 1.0)


fields = arrays(np.float64, 32, elements=st.floats(-10, 10))


@settings(max_examples=50, deadline=None)
@given(fields, fields, st.floats(-3, 3))
def test_integrate_linear_and_monotone(f, g_, a):
    grid = build_grid(1, 4, 32)
    assert math.isclose(integrate(grid, a * f + g_), a * integrate(grid, f) + integrate(grid, g_), abs_tol=1e-9)
    lo, hi = np.minimum(f, g_), np.maximum(f, g_)
    assert integrate(grid, lo) <= integrate(grid, hi)


@settings(max_examples=50, deadline=None)
@given(fields)
def test_dirichlet_form_nonnegative(f):
    assert laplacian_quadratic_form(build_grid(1, 4, 32), f) >= 0.0


@settings(max_examples=30, deadline=None)
@given(fields, fields, st.floats(-2, 2))
def test_convolution_bilinear_and_symmetric(f, h, a):
    grid = build_grid(1, 4, 32)
    k = np.exp(-grid.axis**2)
    assert np.max(np.abs(convolve(grid, k, f) - convolve(grid, f, k))) <= 1e-10 * (1 + np.max(np.abs(f)))
    lhs = convolve(grid, k, a * f + h)
    assert np.allclose(lhs, a * convolve(grid, k, f) + convolve(grid, k, h), atol=1e-10)
