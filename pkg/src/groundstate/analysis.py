"""Rearrangement and scaling probes of the energy landscape."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .energy import EnergyBreakdown, as_multifield, energy, n_functional, nonlocal_pairs
from .grid import Grid, build_grid, integrate, laplacian_quadratic_form
from .model import UNBOUNDED, ModelSpec, _check_G0, _check_V, _Sampler, classify_criticality

__all__ = [
    "schwarz_symmetrize",
    "symmetrize_field",
    "recenter",
    "symmetrization_inequality_check",
    "RadialProfile",
    "gaussian_profile",
    "ScalingProbeReport",
    "ProbeRefused",
    "scaling_probe_small_t",
    "scaling_probe_large_t",
    "tau_identity_check",
    "fit_exponent",
]

NEGATIVE_NEAR_ZERO = "NegativeNearZero"
DIVERGES = "DivergesToMinusInfinity"
INCONCLUSIVE = "Inconclusive"


# ---------------------------------------------------------------------------
# Schwarz symmetrization


def _radial_order(grid: Grid) -> np.ndarray:
    d2 = grid.index_radius_sq.ravel()
    # lexsort: last key is primary; ties at equal radius go by flat (lexicographic) index
    return np.lexsort((np.arange(d2.size), d2))


def schwarz_symmetrize(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Discrete decreasing rearrangement about the origin cell."""
    f = grid.check(f)
    if f.shape != grid.shape:
        raise ValueError("schwarz_symmetrize acts on a single scalar field")
    if np.any(f < 0):
        raise ValueError("Schwarz symmetrization needs a nonnegative field")
    out = np.empty(f.size)
    out[_radial_order(grid)] = np.sort(f.ravel())[::-1]
    return out.reshape(grid.shape)


def symmetrize_field(grid: Grid, phi: np.ndarray) -> np.ndarray:
    return np.stack([schwarz_symmetrize(grid, p) for p in phi])


def recenter(grid: Grid, phi: np.ndarray, sweeps: int = 3) -> np.ndarray:
    """Translate a multi-component field so its total density peaks at the origin.

    The integer part uses the discrete argmax; the sub-cell remainder is
    removed by a spectral shift that zeroes the density's first moment.
    """
    phi = np.asarray(phi, dtype=float)
    rho = np.sum(phi * phi, axis=0)
    peak = np.unravel_index(int(np.argmax(rho)), grid.shape)
    roll = tuple(grid.n // 2 - p for p in peak)
    axes = tuple(range(1, phi.ndim))
    phi = np.roll(phi, roll, axis=axes)
    kvecs = _wavevectors(grid)
    for _ in range(sweeps):
        rho = np.sum(phi * phi, axis=0)
        mass = float(np.sum(rho))
        com = [float(np.sum(x * rho)) / mass for x in grid.coords]
        phase = np.exp(1j * sum(k * x0 for k, x0 in zip(kvecs, com)))
        phi = grid.ifft(grid.fft(phi) * phase)
    # the shift leaves round-off ripples of either sign in the tails
    return np.maximum(phi, 0.0)


def _wavevectors(grid: Grid) -> list[np.ndarray]:
    h = grid.spacing
    full = 2.0 * np.pi * np.fft.fftfreq(grid.n, d=h)
    half = 2.0 * np.pi * np.fft.rfftfreq(grid.n, d=h)
    return list(np.meshgrid(*([full] * (grid.dim - 1) + [half]), indexing="ij"))


def _kernel_nonincreasing(kernel, samples: int = 2000) -> bool:
    r = np.sort(np.geomspace(1e-3, 1e2, samples))
    w = np.asarray(kernel(r), dtype=float)
    return bool(np.all(w >= 0) and np.all(np.diff(w) <= 1e-12 * np.abs(w[:-1])))


def symmetrization_inequality_check(spec: ModelSpec, grid: Grid, phi: np.ndarray, seed: int = 0) -> dict:
    """Compare each energy term of Φ against its componentwise rearrangement Φ*."""
    phi = as_multifield(spec, grid, phi)
    if np.any(phi < 0):
        raise ValueError("symmetrization check needs a nonnegative field")
    smp = _Sampler(seed, 2000)
    if not _check_V(spec, smp).passed:
        raise ValueError("potential is not radially non-increasing")
    if spec.nonlocal_ is not None:
        for row in spec.nonlocal_.kernels:
            for k in row:
                if k is not None and not _kernel_nonincreasing(k):
                    raise ValueError("kernel is not radially non-increasing")

    star = symmetrize_field(grid, phi)
    E, Es = energy(spec, grid, phi), energy(spec, grid, star)
    slack = 1e-6 * (1.0 + abs(E.total))

    def cmp(before, after, allowance, note=""):
        return {"before": before, "after": after, "holds": bool(after <= before + allowance), "slack": allowance, "note": note}

    report: dict = {"slack": slack}
    report["kinetic"] = [
        cmp(laplacian_quadratic_form(grid, a), laplacian_quadratic_form(grid, b), slack) for a, b in zip(phi, star)
    ]
    if spec.potential.is_zero:
        V = np.zeros(grid.shape)
    else:
        V = spec.potential(grid.radius)
    # potential and interaction terms grow under rearrangement: compare negatives
    report["potential"] = [
        cmp(-integrate(grid, V * a * a), -integrate(grid, V * b * b), 1e-12 * (1 + abs(integrate(grid, V * a * a))))
        for a, b in zip(phi, star)
    ]
    if spec.local is None:
        report["local"] = cmp(0.0, 0.0, 0.0, "no local term")
    else:
        c1, c2 = _check_G0(spec.local, spec.m, smp)
        if c1.passed and c2.passed:
            report["local"] = cmp(-E.local, -Es.local, 1e-12 * (1 + abs(E.local)))
        else:
            report["local"] = {"holds": None, "note": "not applicable: G is not super-modular",
                               "before": -E.local, "after": -Es.local}
    P, Ps = nonlocal_pairs(spec, grid, phi), nonlocal_pairs(spec, grid, star)
    report["nonlocal"] = [
        [cmp(-float(P[i, j]), -float(Ps[i, j]), slack) for j in range(spec.m)] for i in range(spec.m)
    ]
    report["energy"] = cmp(E.total, Es.total, slack)
    report["all_hold"] = bool(
        all(x["holds"] for x in report["kinetic"])
        and all(x["holds"] for x in report["potential"])
        and report["local"]["holds"] is not False
        and all(x["holds"] for row in report["nonlocal"] for x in row)
        and report["energy"]["holds"]
    )
    return report


# ---------------------------------------------------------------------------
# scaling probes


@dataclass
class RadialProfile:
    """Closed-form radial components ``r -> φ_j(r)``; ``None`` marks a zero component."""

    components: list[Optional[Callable[[np.ndarray], np.ndarray]]]
    c: float

    def sample(self, r: np.ndarray) -> np.ndarray:
        return np.stack([np.zeros_like(r) if f is None else np.asarray(f(r), dtype=float) for f in self.components])


def gaussian_profile(N: int, m: int, c: float, active: Optional[Sequence[int]] = None) -> RadialProfile:
    """Gaussians ``a e^{-r²/2}`` sharing mass ``c`` over the active components."""
    active = list(range(m)) if active is None else list(active)
    a = math.sqrt(c / len(active) / math.pi ** (N / 2))
    comps = [(lambda r, a=a: a * np.exp(-0.5 * r * r)) if j in active else None for j in range(m)]
    return RadialProfile(comps, c)


@dataclass
class ScalingProbeReport:
    kind: str
    t: list[float]
    energies: list[float]
    breakdowns: list[dict]
    masses: list[float]
    fitted: dict[str, Optional[float]]
    expected_exponent: Optional[float]
    verdict: str
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "verdict": self.verdict,
            "fitted_exponents": self.fitted,
            "expected_exponent": self.expected_exponent,
            "t": self.t,
            "energies": self.energies,
            "masses": self.masses,
            "notes": self.notes,
        }

    def write_csv(self, path, mode: str = "w", header: bool = True) -> None:
        with open(path, mode, newline="") as fh:
            w = csv.writer(fh)
            if header:
                w.writerow(["probe", "t", "energy", "kinetic", "potential", "local", "nonlocal", "mass"])
            for t, b, m in zip(self.t, self.breakdowns, self.masses):
                w.writerow([self.kind] + [format(v, ".17g") for v in (t, b["total"], b["kinetic"], b["potential"], b["local"], b["nonlocal"], m)])

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump({"verdict": self.verdict, "fitted_exponents": self.fitted, "expected_exponent": self.expected_exponent}, fh, indent=2)


class ProbeRefused(ValueError):
    pass


def fit_exponent(t: Sequence[float], values: Sequence[float]) -> Optional[float]:
    """Least-squares slope of log|values| against log t; None if any value is zero."""
    t, v = np.asarray(t, dtype=float), np.abs(np.asarray(values, dtype=float))
    if t.size < 2 or np.any(v == 0) or not np.all(np.isfinite(v)):
        return None
    return float(np.polyfit(np.log(t), np.log(v), 1)[0])


def _scaled_states(spec: ModelSpec, profile: RadialProfile, base: Grid, ts: Sequence[float], first_only: bool):
    for t in ts:
        g = build_grid(base.dim, base.half_extent / t, base.n)
        # on the rescaled box t*x runs over the base grid, so φ(t|x|) = φ(r_base)
        phi = t ** (base.dim / 2) * profile.sample(base.radius)
        if first_only:
            phi[1:] = 0.0
        yield t, g, phi


def _run_probe(spec, profile, base, ts, first_only):
    rows = []
    for t, g, phi in _scaled_states(spec, profile, base, ts, first_only):
        E = energy(spec, g, phi)
        rows.append((t, E, g.cell_volume * float(np.sum(phi * phi))))
    return rows


def _term_fits(ts, rows) -> dict[str, Optional[float]]:
    fits = {}
    for name in ("kinetic", "potential", "local", "nonlocal_"):
        vals = [getattr(E, name) for _, E, _ in rows]
        fits[name.rstrip("_")] = fit_exponent(ts, vals)
    return fits


def _validate_t(ts: Sequence[float]) -> list[float]:
    ts = [float(t) for t in ts]
    if not ts:
        raise ValueError("empty t grid")
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("t values must be strictly increasing")
    return ts


def scaling_probe_small_t(
    spec: ModelSpec,
    profile: RadialProfile,
    t_grid: Sequence[float],
    grid: Grid,
) -> ScalingProbeReport:
    """Energies of ``(t^{N/2} φ(t·), 0, ..., 0)`` for t in (0, 1].

    Each t is evaluated on the box of half-width L/t so the dilated profile
    stays resolved and its mass is t-invariant on the grid.
    """
    ts = _validate_t(t_grid)
    if ts[0] <= 0 or ts[-1] > 1:
        raise ValueError("small-t probe needs 0 < t <= 1")
    rows = _run_probe(spec, profile, grid, ts, first_only=True)
    energies = [E.total for _, E, _ in rows]
    half = max(2, (len(ts) + 1) // 2)
    near = slice(0, half)

    fits = _term_fits(ts, rows)
    tail_e = energies[near]
    fits["energy"] = fit_exponent(ts[near], tail_e) if all(e < 0 for e in tail_e) else None

    crit = classify_criticality(spec, grid.dim)
    expected = None
    cands = []
    if spec.local is not None and spec.local.gamma is not None:
        cands.append(grid.dim * spec.local.gamma - grid.dim)
    if spec.nonlocal_ is not None:
        nl = spec.nonlocal_
        cands.append(nl.Gamma + grid.dim * nl.beta - 2 * grid.dim)
    if cands:
        expected = min(cands)

    notes = [f"criticality: {crit.overall}"]
    verdict = NEGATIVE_NEAR_ZERO if all(e < 0 for e in tail_e) else INCONCLUSIVE
    return ScalingProbeReport("small_t", ts, energies, [E.to_dict() for _, E, _ in rows],
                              [m for _, _, m in rows], fits, expected, verdict, notes)


def scaling_probe_large_t(
    spec: ModelSpec,
    profile: RadialProfile,
    t_grid: Sequence[float],
    grid: Grid,
) -> ScalingProbeReport:
    """Energies of ``t^{N/2} Φ_0(t·)`` for t >= 1 on boxes of half-width L/t."""
    ts = _validate_t(t_grid)
    if ts[0] < 1:
        raise ValueError("large-t probe needs t >= 1")
    crit = classify_criticality(spec, grid.dim)
    if crit.overall != UNBOUNDED:
        raise ProbeRefused(f"{crit.overall}: the infimum is bounded below, nothing to probe")
    rows = _run_probe(spec, profile, grid, ts, first_only=False)
    energies = [E.total for _, E, _ in rows]
    half = max(2, (len(ts) + 1) // 2)
    far = slice(len(ts) - half, len(ts))

    fits = _term_fits(ts, rows)
    drive = [E.local + E.nonlocal_ for _, E, _ in rows]
    fits["nonlinear"] = fit_exponent(ts[far], drive[far])
    tail_e = energies[far]
    fits["energy"] = fit_exponent(ts[far], tail_e) if all(e < 0 for e in tail_e) else None

    # exponents of the terms that beat the t² kinetic growth
    super_exps = [e for key, e in crit.large_t_exponents.items() if e is not None and e > 2
                  and ((key == "local" and spec.local is not None) or (key == "nonlocal" and spec.nonlocal_ is not None))]
    expected = max(super_exps) if super_exps else None

    decreasing = all(b < a for a, b in zip(energies, energies[1:]))
    deep = energies[-1] < -10.0 * abs(energies[0])
    verdict = DIVERGES if decreasing and deep else INCONCLUSIVE
    notes = [f"criticality: {crit.overall}", f"decreasing={decreasing}", f"below -10|E(t_0)|={deep}"]
    return ScalingProbeReport("large_t", ts, energies, [E.to_dict() for _, E, _ in rows],
                              [m for _, _, m in rows], fits, expected, verdict, notes)


# ---------------------------------------------------------------------------
# homogeneity identities


def tau_identity_check(spec: ModelSpec, grid: Grid, phi: np.ndarray) -> dict:
    """N'(Φ)Φ − 2N(Φ) against 2(ϱ−1)∫G + (μ−1) Σ∬ W h h for homogeneous G and h."""
    phi = as_multifield(spec, grid, phi)
    loc, nl = spec.local, spec.nonlocal_
    if (loc is None or loc.degree is None) and (nl is None or nl.degree is None):
        raise ValueError("neither G nor h declares a homogeneity degree")
    if loc is not None and loc.degree is None:
        raise ValueError("local term present without a homogeneity degree")
    if nl is not None and nl.degree is None:
        raise ValueError("nonlocal term present without a homogeneity degree")
    Nv, Np = n_functional(spec, grid, phi)
    lhs = Np - 2.0 * Nv
    rhs = 0.0
    if loc is not None:
        rhs += 2.0 * (loc.degree - 1.0) * integrate(grid, np.asarray(loc.G(grid.radius, phi * phi)))
    if nl is not None:
        rhs += (nl.degree - 1.0) * float(np.sum(nonlocal_pairs(spec, grid, phi)))
    scale = max(abs(lhs), abs(rhs))
    return {
        "lhs": lhs,
        "rhs": rhs,
        "abs_discrepancy": abs(lhs - rhs),
        "rel_discrepancy": abs(lhs - rhs) / scale if scale > 0 else 0.0,
    }
