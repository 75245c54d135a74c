"""Constrained minimisation over the mass sphere by normalised gradient flow."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .energy import EnergyBreakdown, as_multifield, energy, gradient, n_functional
from .grid import Grid, inner
from .model import DEFAULT_SEED, UNBOUNDED, ModelSpec, classify_criticality

log = logging.getLogger(__name__)

__all__ = [
    "MinimizeOptions",
    "GroundStateResult",
    "SupercriticalRefused",
    "project_to_sphere",
    "total_mass",
    "default_initial_field",
    "minimize",
    "multiplier_sign_check",
    "write_history_csv",
    "HISTORY_COLUMNS",
]

HISTORY_COLUMNS = ("iter", "energy", "kinetic", "potential", "local", "nonlocal", "mass", "residual", "step")


class SupercriticalRefused(RuntimeError):
    """The infimum is -inf for this model; the flow would diverge."""


@dataclass
class MinimizeOptions:
    initial_step: float = 0.1
    backtrack: float = 0.5
    tol: float = 1e-8
    max_iter: int = 100_000
    seed: int = DEFAULT_SEED
    noise: float = 0.01
    grow_after: int = 5
    grow_factor: float = 1.1
    max_backtracks: int = 60
    # give up when the residual has not improved by 1% for this many iterations
    stall_window: int = 1000
    # Sobolev preconditioner (a - Δ)^-1; None tracks a = -λ along the flow
    precondition: bool = True
    precond_shift: Optional[float] = None
    allow_supercritical: bool = False

    def __post_init__(self):
        if not (self.initial_step > 0 and self.tol > 0 and self.max_iter > 0):
            raise ValueError("initial_step, tol and max_iter must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtracking factor must lie in (0, 1)")
        if not self.tol < 1:
            raise ValueError("tolerance must be < 1")
        if self.stall_window < 1:
            raise ValueError("stall_window must be >= 1")
        if self.noise < 0:
            raise ValueError("noise must be nonnegative")


@dataclass
class GroundStateResult:
    field: np.ndarray
    I_c: float
    lambda_c: float
    residual: float
    tau: float
    N_value: float
    N_prime: float
    breakdown: EnergyBreakdown
    history: list[tuple] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    c: float = 1.0
    message: str = ""

    def summary(self) -> dict:
        return {
            "I_c": self.I_c,
            "lambda_c": self.lambda_c,
            "tau": self.tau,
            "residual": self.residual,
            "N": self.N_value,
            "N_prime_phi": self.N_prime,
            "mass": self.c,
            "converged": self.converged,
            "iterations": self.iterations,
            "message": self.message,
            "breakdown": self.breakdown.to_dict(),
        }


def total_mass(grid: Grid, phi: np.ndarray) -> float:
    return grid.cell_volume * float(np.sum(phi * phi))


def project_to_sphere(grid: Grid, phi: np.ndarray, c: float) -> np.ndarray:
    """Scale all components by one factor so the total mass equals ``c``."""
    mass = total_mass(grid, phi)
    if not mass > 0:
        raise ValueError("cannot project the zero field onto the mass sphere")
    return phi * math.sqrt(c / mass)


def default_initial_field(spec: ModelSpec, grid: Grid, seed: int = DEFAULT_SEED, noise: float = 0.01) -> np.ndarray:
    rng = np.random.default_rng(seed)
    base = np.exp(-0.5 * grid.radius**2)
    phi = np.stack([base * (1.0 + noise * rng.standard_normal(grid.shape)) for _ in range(spec.m)])
    return project_to_sphere(grid, np.maximum(phi, 0.0), spec.c)


def _roundoff(E: EnergyBreakdown) -> float:
    # energies closer than this are indistinguishable in double precision
    return 16 * np.finfo(float).eps * (abs(E.kinetic) + abs(E.potential) + abs(E.local) + abs(E.nonlocal_))


def _residual(grid: Grid, g: np.ndarray, phi: np.ndarray, c: float) -> tuple[float, float]:
    lam = inner(grid, g, phi) / c
    r = g - lam * phi
    return lam, math.sqrt(inner(grid, r, r))


def _clipped_share(grid: Grid, r: np.ndarray, phi: np.ndarray) -> float:
    # part of the residual the nonnegativity clip forbids following
    blocked = (phi == 0.0) & (r > 0.0)
    total = inner(grid, r, r)
    return inner(grid, r * blocked, r * blocked) / total if total > 0 else 0.0


def minimize(
    spec: ModelSpec,
    grid: Grid,
    opts: Optional[MinimizeOptions] = None,
    init: Optional[np.ndarray] = None,
) -> GroundStateResult:
    """Projected gradient descent on the mass sphere with monotone backtracking.

    Each trial point is ``project(clip(Φ - s d))`` where ``d`` is the
    preconditioned tangential gradient; a trial is accepted as soon as its
    energy does not exceed the current one (energy changes below round-off
    are resolved with gradient information instead).
    """
    opts = opts or MinimizeOptions()
    crit = classify_criticality(spec, grid.dim)
    if crit.overall == UNBOUNDED and not opts.allow_supercritical:
        raise SupercriticalRefused(f"{spec.name}: infimum is -inf ({crit.ell_verdicts}, mu {crit.mu_verdict})")

    c = spec.c
    if init is None:
        phi = default_initial_field(spec, grid, opts.seed, opts.noise)
    else:
        phi = project_to_sphere(grid, np.maximum(as_multifield(spec, grid, init), 0.0), c)

    E = energy(spec, grid, phi)
    g = gradient(spec, grid, phi)
    lam, res = _residual(grid, g, phi, c)

    step = opts.initial_step
    streak = 0
    best, best_it = math.inf, 0
    history: list[tuple] = []
    converged = False
    message = "iteration cap reached"
    it = 0
    for it in range(opts.max_iter + 1):
        history.append((it, E.total, E.kinetic, E.potential, E.local, E.nonlocal_, total_mass(grid, phi), res, step))
        if res <= opts.tol:
            converged, message = True, "residual below tolerance"
            break
        if res < 0.99 * best:
            best, best_it = res, it
        elif it - best_it >= opts.stall_window:
            share = _clipped_share(grid, g - lam * phi, phi)
            message = (f"residual stalled at {res:.3g} for {opts.stall_window} iterations; "
                       f"{share:.0%} of it pushes clipped cells negative (refine the grid)")
            break
        if it == opts.max_iter:
            break
        r = g - lam * phi
        if opts.precondition:
            shift = opts.precond_shift if opts.precond_shift is not None else max(-lam, 0.05)
            precond = 1.0 / (shift + grid.k2)
            pr = grid.ifft(precond * grid.fft(r))
            pphi = grid.ifft(precond * grid.fft(phi))
            d = pr - (inner(grid, pr, phi) / inner(grid, pphi, phi)) * pphi
        else:
            d = r
        s = step
        band = _roundoff(E)
        for k in range(opts.max_backtracks):
            cand = project_to_sphere(grid, np.maximum(phi - s * d, 0.0), c)
            Ec = energy(spec, grid, cand)
            dE = Ec.total - E.total
            if dE < -band:
                gc = gradient(spec, grid, cand)
                break
            if dE <= band:
                # below double-precision resolution of E: judge the step by the
                # trapezoid rule for the line integral of E' along the segment
                gc = gradient(spec, grid, cand)
                lam_c = inner(grid, gc, cand) / c
                delta = cand - phi
                trap = inner(grid, r + gc - lam_c * cand, delta) + 0.5 * (lam_c - lam) * inner(grid, delta, delta)
                if trap <= 0.0:
                    break
            s *= opts.backtrack
        else:
            message = "line search stalled"
            break
        streak = streak + 1 if k == 0 else 0
        step = s
        if streak >= opts.grow_after:
            step *= opts.grow_factor
            streak = 0
        phi, E, g = cand, Ec, gc
        lam, res = _residual(grid, g, phi, c)

    Nv, Np = n_functional(spec, grid, phi)
    if grid.boundary_max(phi) > 1e-6 * float(np.max(np.abs(phi))):
        log.warning("field does not decay inside the box (boundary/max = %.2e); enlarge L",
                    grid.boundary_max(phi) / float(np.max(np.abs(phi))))
    return GroundStateResult(
        field=phi,
        I_c=E.total,
        lambda_c=lam,
        residual=res,
        tau=2.0 * Nv - Np,
        N_value=Nv,
        N_prime=Np,
        breakdown=E,
        history=history,
        converged=converged,
        iterations=it,
        c=c,
        message=message,
    )


def multiplier_sign_check(result: GroundStateResult, premise_tol: float = 1e-8) -> dict:
    """Negative energy plus N'(Φ)Φ - 2N(Φ) >= 0 should force a negative multiplier."""
    defect = result.N_prime - 2.0 * result.N_value
    out = {"I_c": result.I_c, "lambda_c": result.lambda_c, "N_prime_minus_2N": defect}
    if not result.converged:
        out["verdict"] = "inconclusive"
    elif result.I_c < 0 and defect >= -premise_tol:
        out["verdict"] = "pass" if result.lambda_c < 0 else "fail"
    else:
        out["verdict"] = "premise not met"
    return out


def write_history_csv(result: GroundStateResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(HISTORY_COLUMNS)
        for row in result.history:
            w.writerow([row[0]] + [format(v, ".17g") for v in row[1:]])
