"""Energy functional, its L² gradient and the nonlinear part N(Φ).

    E(Φ) = ½ Σ_j ∫|∇Φ_j|² − ½ ∫V|Φ|² − ∫G(|x|, Φ²) − ½ Σ_ij ∫(W_ij * h(Φ_i)) h(Φ_j)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, convolve_hat, integrate, laplacian, laplacian_quadratic_form
from .model import ModelSpec

__all__ = ["EnergyBreakdown", "InvalidState", "energy", "gradient", "n_functional", "nonlocal_pairs", "as_multifield"]


class InvalidState(FloatingPointError):
    """Raised when an evaluation produces non-finite values."""


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    potential: float
    local: float
    nonlocal_: float
    total: float

    def to_dict(self) -> dict:
        return {
            "kinetic": self.kinetic,
            "potential": self.potential,
            "local": self.local,
            "nonlocal": self.nonlocal_,
            "total": self.total,
        }


def as_multifield(spec: ModelSpec, grid: Grid, phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    if phi.shape == grid.shape and spec.m == 1:
        phi = phi[None]
    if phi.shape != (spec.m, *grid.shape):
        raise ValueError(f"expected {spec.m} components of shape {grid.shape}, got {phi.shape}")
    return phi


def _convolutions(spec: ModelSpec, grid: Grid, phi: np.ndarray):
    """h(Φ_i) and the matrix of W_ij * h(Φ_i), indexed [i][j]."""
    nl = spec.nonlocal_
    hs = nl.h_abs(phi)
    conv = [[None] * spec.m for _ in range(spec.m)]
    for i in range(spec.m):
        for j in range(spec.m):
            k = nl.kernels[i][j]
            if k is not None:
                conv[i][j] = convolve_hat(grid, k.transform(grid), hs[i])
    return hs, conv


def nonlocal_pairs(spec: ModelSpec, grid: Grid, phi: np.ndarray) -> np.ndarray:
    """Matrix of ∬ W_ij(|x−y|) h(Φ_i(x)) h(Φ_j(y)) dx dy."""
    phi = as_multifield(spec, grid, phi)
    out = np.zeros((spec.m, spec.m))
    if spec.nonlocal_ is None:
        return out
    hs, conv = _convolutions(spec, grid, phi)
    for i in range(spec.m):
        for j in range(spec.m):
            if conv[i][j] is not None:
                out[i, j] = integrate(grid, conv[i][j] * hs[j])
    return out


def _local_density(spec: ModelSpec, grid: Grid, phi: np.ndarray) -> np.ndarray:
    return np.asarray(spec.local.G(grid.radius, phi * phi), dtype=float)


def energy(spec: ModelSpec, grid: Grid, phi: np.ndarray) -> EnergyBreakdown:
    phi = as_multifield(spec, grid, phi)
    kinetic = 0.5 * sum(laplacian_quadratic_form(grid, p) for p in phi)
    potential = 0.0
    if not spec.potential.is_zero:
        potential = 0.5 * integrate(grid, spec.potential(grid.radius) * np.sum(phi * phi, axis=0))
    local = integrate(grid, _local_density(spec, grid, phi)) if spec.local is not None else 0.0
    nonlocal_ = 0.5 * float(np.sum(nonlocal_pairs(spec, grid, phi))) if spec.nonlocal_ is not None else 0.0
    total = kinetic - potential - local - nonlocal_
    if not np.isfinite(total):
        raise InvalidState(f"non-finite energy: {kinetic}, {potential}, {local}, {nonlocal_}")
    return EnergyBreakdown(kinetic, potential, local, nonlocal_, total)


def _nonlinear_force(spec: ModelSpec, grid: Grid, phi: np.ndarray) -> np.ndarray:
    """L² gradient of N(Φ): 2∂_jG Φ_j + Σ_i (W_ij * h(Φ_i)) h'(Φ_j)."""
    out = np.zeros_like(phi)
    if spec.local is not None:
        out += spec.local.force_terms(grid.radius, phi)
    if spec.nonlocal_ is not None:
        _, conv = _convolutions(spec, grid, phi)
        dh = spec.nonlocal_.dh_signed(phi)
        for j in range(spec.m):
            for i in range(spec.m):
                if conv[i][j] is not None:
                    out[j] += conv[i][j] * dh[j]
    return out


def gradient(spec: ModelSpec, grid: Grid, phi: np.ndarray) -> np.ndarray:
    """E'(Φ) as an L² field: −ΔΦ_j − VΦ_j − 2∂_jG Φ_j − Σ_i (W_ij * h(Φ_i)) h'(Φ_j)."""
    phi = as_multifield(spec, grid, phi)
    g = laplacian(grid, phi)
    if not spec.potential.is_zero:
        g -= spec.potential(grid.radius) * phi
    g -= _nonlinear_force(spec, grid, phi)
    if not np.all(np.isfinite(g)):
        raise InvalidState("gradient has non-finite entries")
    return g


def n_functional(spec: ModelSpec, grid: Grid, phi: np.ndarray) -> tuple[float, float]:
    """Return ``(N(Φ), N'(Φ)(Φ))`` with N = ∫G + ½ Σ∬ W h h."""
    phi = as_multifield(spec, grid, phi)
    value = 0.0
    if spec.local is not None:
        value += integrate(grid, _local_density(spec, grid, phi))
    if spec.nonlocal_ is not None:
        value += 0.5 * float(np.sum(nonlocal_pairs(spec, grid, phi)))
    prime = integrate(grid, np.sum(_nonlinear_force(spec, grid, phi) * phi, axis=0))
    if not (np.isfinite(value) and np.isfinite(prime)):
        raise InvalidState("non-finite nonlinear functional")
    return value, prime
