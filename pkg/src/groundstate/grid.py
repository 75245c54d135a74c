"""Periodic uniform grids on [-L, L)^N with spectral operators.

Fields are plain numpy arrays of shape ``grid.shape``; an m-component
field carries a leading component axis, shape ``(m, *grid.shape)``.
Cell centres are ``x_i = -L + i*h``, so the origin sits at index ``n//2``
along every axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

__all__ = [
    "Grid",
    "GridMismatch",
    "build_grid",
    "integrate",
    "inner",
    "laplacian",
    "laplacian_quadratic_form",
    "convolve",
    "kernel_transform",
    "convolve_hat",
    "power_kernel_cell_average",
    "sample_radial_kernel",
]


class GridMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    dim: int
    half_extent: float
    n: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dim}")
        if not self.half_extent > 0:
            raise ValueError(f"half extent must be positive, got {self.half_extent}")
        if self.n % 2 or self.n < 8:
            raise ValueError(f"points per axis must be even and >= 8, got {self.n}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_extent / self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n**self.dim

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.half_extent + self.spacing * np.arange(self.n)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.axis] * self.dim), indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c * c for c in self.coords))

    @cached_property
    def index_radius_sq(self) -> np.ndarray:
        """Squared distance to the origin cell in index units (exact integers)."""
        offs = np.arange(self.n) - self.n // 2
        parts = np.meshgrid(*([offs] * self.dim), indexing="ij")
        return sum(p.astype(np.int64) ** 2 for p in parts)

    @cached_property
    def k2(self) -> np.ndarray:
        """Multipliers of -Laplacian in the real-FFT layout."""
        h = self.spacing
        full = 2.0 * np.pi * np.fft.fftfreq(self.n, d=h)
        half = 2.0 * np.pi * np.fft.rfftfreq(self.n, d=h)
        axes = [full] * (self.dim - 1) + [half]
        ks = np.meshgrid(*axes, indexing="ij")
        return sum(k * k for k in ks)

    @cached_property
    def parseval_weights(self) -> np.ndarray:
        # rfft keeps half the last axis; interior modes stand for a conjugate pair
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = w[-1] = 1.0
        shape = (1,) * (self.dim - 1) + (w.size,)
        return np.broadcast_to(w.reshape(shape), self.k2.shape)

    def fft(self, f: np.ndarray) -> np.ndarray:
        return np.fft.rfftn(f, axes=self._axes(f))

    def ifft(self, fh: np.ndarray) -> np.ndarray:
        return np.fft.irfftn(fh, s=self.shape, axes=self._axes(fh))

    def _axes(self, a: np.ndarray) -> tuple[int, ...]:
        return tuple(range(a.ndim - self.dim, a.ndim))

    def check(self, f: np.ndarray, name: str = "field") -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape[f.ndim - self.dim:] != self.shape or f.ndim < self.dim:
            raise GridMismatch(f"{name} has shape {f.shape}, grid expects {self.shape}")
        return f

    def boundary_max(self, f: np.ndarray) -> float:
        """Largest |value| on the outermost cells of the box."""
        f = np.abs(self.check(f))
        out = 0.0
        for ax in range(f.ndim - self.dim, f.ndim):
            out = max(out, float(np.take(f, 0, axis=ax).max()))
            out = max(out, float(np.take(f, -1, axis=ax).max()))
        return out


def build_grid(N: int, L: float, n: int) -> Grid:
    return Grid(int(N), float(L), int(n))


def integrate(grid: Grid, f: np.ndarray) -> float:
    return grid.cell_volume * float(np.sum(grid.check(f)))


def inner(grid: Grid, f: np.ndarray, g: np.ndarray) -> float:
    return grid.cell_volume * float(np.sum(grid.check(f) * grid.check(g)))


def laplacian(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Spectral ``-Δf`` (note the sign: the result is the positive operator)."""
    return grid.ifft(grid.k2 * grid.fft(grid.check(f)))


def laplacian_quadratic_form(grid: Grid, f: np.ndarray) -> float:
    """∫|∇f|² via Parseval; nonnegative by construction."""
    fh = grid.fft(grid.check(f))
    s = np.sum(grid.parseval_weights * grid.k2 * (fh.real**2 + fh.imag**2))
    return grid.cell_volume * float(s) / grid.size


def kernel_transform(grid: Grid, kernel: np.ndarray) -> np.ndarray:
    """Spectrum of a centred kernel, scaled so that ``convolve_hat`` is h^N Σ."""
    kernel = grid.check(kernel, "kernel")
    if kernel.shape != grid.shape:
        raise GridMismatch("kernel must be a single scalar field")
    return grid.cell_volume * grid.fft(np.fft.ifftshift(kernel))


def convolve_hat(grid: Grid, khat: np.ndarray, f: np.ndarray) -> np.ndarray:
    return grid.ifft(khat * grid.fft(grid.check(f)))


def convolve(grid: Grid, kernel: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Periodic convolution ``h^N Σ_y K(x-y) f(y)``; ``kernel`` is centred on the origin cell."""
    return convolve_hat(grid, kernel_transform(grid, kernel), f)


@lru_cache(maxsize=None)
def _unit_cell_power_average(dim: int, gamma: float, order: int = 48) -> float:
    # Mean of |x|^-gamma over [-1/2, 1/2]^dim. Split [0,1/2]^dim into dim
    # pyramids by the largest coordinate u; with x = u(1, v) the radial part
    # integrates in closed form and the angular part is smooth in v.
    if gamma >= dim:
        raise ValueError("|x|^-gamma is not locally integrable for gamma >= dim")
    radial = 0.5 ** (dim - gamma) / (dim - gamma)
    if dim == 1:
        angular = 1.0
    else:
        t, w = np.polynomial.legendre.leggauss(order)
        v, wv = 0.5 * (t + 1.0), 0.5 * w
        vs = np.meshgrid(*([v] * (dim - 1)), indexing="ij")
        ws = np.prod(np.meshgrid(*([wv] * (dim - 1)), indexing="ij"), axis=0)
        angular = float(np.sum(ws * (1.0 + sum(x * x for x in vs)) ** (-gamma / 2)))
    return 2**dim * dim * radial * angular


def power_kernel_cell_average(grid: Grid, gamma: float) -> float:
    """Average of |x|^-gamma over the origin cell (a cube of side h)."""
    return grid.spacing ** (-gamma) * _unit_cell_power_average(grid.dim, float(gamma))


def sample_radial_kernel(grid: Grid, fn, origin_value: float | None = None) -> np.ndarray:
    """Sample ``r -> fn(r)`` at cell centres, centred layout.

    Distances are minimum periodic images, which the centred layout gives
    directly. Singular kernels pass ``origin_value`` (typically a cell
    average from :func:`power_kernel_cell_average`); otherwise ``fn(0)`` is used.
    """
    r = grid.radius
    origin = (grid.n // 2,) * grid.dim
    safe = r.copy()
    safe[origin] = 1.0
    k = np.asarray(fn(safe), dtype=float) * np.ones(grid.shape)
    k[origin] = float(fn(np.array(0.0))) if origin_value is None else float(origin_value)
    return k
