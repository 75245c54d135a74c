"""Problem data: potential, local and nonlocal nonlinearities, validators.

Densities enter the local term as ``s_j = Φ_j²`` and the nonlocal term
through ``h(|Φ_j|)``. Evaluators are vectorised over a leading component
axis: ``G(r, s)`` takes ``s`` of shape ``(m, ...)`` and returns shape ``(...)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .grid import Grid, power_kernel_cell_average, sample_radial_kernel

__all__ = [
    "Potential",
    "RadialKernel",
    "LocalNonlinearity",
    "NonlocalNonlinearity",
    "ModelSpec",
    "CheckResult",
    "HypothesisReport",
    "CriticalityReport",
    "builtin_power_model",
    "cubic_nls_model",
    "symmetric_kernels",
    "validate_hypotheses",
    "classify_criticality",
    "DEFAULT_SEED",
]

DEFAULT_SEED = 20240917
_REL = 1e-10


@dataclass(eq=False)
class Potential:
    fn: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"

    def __call__(self, r):
        return self.fn(np.asarray(r, dtype=float))

    @property
    def value_at_origin(self) -> float:
        return float(self(0.0))

    @property
    def is_zero(self) -> bool:
        return self.name == "zero"

    @classmethod
    def zero(cls) -> "Potential":
        return cls(lambda r: np.zeros_like(r), name="zero")

    @classmethod
    def lorentzian(cls, v0: float) -> "Potential":
        if v0 == 0:
            return cls.zero()
        return cls(lambda r: v0 / (1.0 + r * r), name=f"{v0}/(1+r^2)")


@dataclass(eq=False)
class RadialKernel:
    """Radial kernel ``r -> W(r)``; ``singular_exponent`` flags an ``r^-Γ`` origin."""

    fn: Callable[[np.ndarray], np.ndarray]
    singular_exponent: Optional[float] = None
    coefficient: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False)

    def __call__(self, r):
        return self.fn(np.asarray(r, dtype=float))

    @classmethod
    def power(cls, gamma: float, coefficient: float = 1.0) -> "RadialKernel":
        return cls(lambda r: coefficient * r ** (-gamma), singular_exponent=gamma, coefficient=coefficient)

    def sample(self, grid: Grid) -> np.ndarray:
        if grid not in self._cache:
            origin = None
            if self.singular_exponent:
                origin = self.coefficient * power_kernel_cell_average(grid, self.singular_exponent)
            self._cache[grid] = sample_radial_kernel(grid, self.fn, origin)
        return self._cache[grid]

    def transform(self, grid: Grid) -> np.ndarray:
        key = ("hat", grid)
        if key not in self._cache:
            from .grid import kernel_transform

            self._cache[key] = kernel_transform(grid, self.sample(grid))
        return self._cache[key]


def symmetric_kernels(upper: Sequence[Sequence[Optional[RadialKernel]]]) -> list[list[Optional[RadialKernel]]]:
    """Full m×m matrix from its upper triangle (row i lists W_ii..W_im)."""
    m = len(upper)
    mat: list[list[Optional[RadialKernel]]] = [[None] * m for _ in range(m)]
    for i, row in enumerate(upper):
        if len(row) != m - i:
            raise ValueError(f"upper-triangle row {i} must have {m - i} entries")
        for off, k in enumerate(row):
            j = i + off
            mat[i][j] = mat[j][i] = k
    return mat


@dataclass(eq=False)
class LocalNonlinearity:
    """``G(r, s_1..s_m)`` with partials ``∂G/∂s_j``.

    ``force`` may supply ``2 ∂_jG(r, Φ²) Φ_j`` directly when the partials are
    singular at ``s_j = 0`` but the product is not.
    """

    G: Callable
    partials: Callable
    ell: tuple[float, ...]
    K: float
    degree: Optional[float] = None
    B: Optional[float] = None
    gamma: Optional[float] = None
    R2: Optional[float] = None
    S2: Optional[float] = None
    force: Optional[Callable] = None

    @property
    def m(self) -> int:
        return len(self.ell)

    def force_terms(self, r: np.ndarray, phi: np.ndarray) -> np.ndarray:
        if self.force is not None:
            return self.force(r, phi)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 2.0 * self.partials(r, phi * phi) * phi
        return np.where(np.abs(phi) < 1e-12, 0.0, out)


@dataclass(eq=False)
class NonlocalNonlinearity:
    h: Callable
    dh: Callable
    mu: float
    beta: float
    M: float
    A: float
    S1: float
    kernels: list
    Gamma: float
    q: float
    C: float
    t1: float = 1.0
    degree: Optional[float] = None

    @property
    def m(self) -> int:
        return len(self.kernels)

    def h_abs(self, phi):
        return self.h(np.abs(phi))

    def dh_signed(self, phi):
        """d/dΦ h(|Φ|); zero below 1e-12 where h'(s)/s may be unbounded."""
        a = np.abs(phi)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.dh(a) * np.sign(phi)
        return np.where(a < 1e-12, 0.0, out)


@dataclass(eq=False)
class ModelSpec:
    m: int
    potential: Potential
    local: Optional[LocalNonlinearity]
    nonlocal_: Optional[NonlocalNonlinearity]
    c: float
    dim: Optional[int] = None
    name: str = "custom"

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("need at least one component")
        if not self.c > 0:
            raise ValueError("mass c must be positive")
        if self.local is not None and self.local.m != self.m:
            raise ValueError(f"local nonlinearity has {self.local.m} exponents, model has m={self.m}")
        if self.nonlocal_ is not None:
            k = self.nonlocal_.kernels
            if len(k) != self.m or any(len(row) != self.m for row in k):
                raise ValueError(f"kernel matrix must be {self.m}x{self.m}")
            for i in range(self.m):
                for j in range(i):
                    if k[i][j] is not k[j][i]:
                        raise ValueError(f"kernel matrix not symmetric at ({i}, {j})")

    def with_mass(self, c: float) -> "ModelSpec":
        return ModelSpec(self.m, self.potential, self.local, self.nonlocal_, c, self.dim, self.name)


def builtin_power_model(
    N: int,
    m: int,
    ell: float,
    mu: float,
    Gamma: float,
    V0: float,
    c: float,
    *,
    g_scale: float = 1.0,
    w_scale: float = 1.0,
) -> ModelSpec:
    """The coupled power family.

    ``G = g/(ℓ+2) Σ_{i,j} [s_i^p + 2 s_i^{p/2} s_j^{p/2}]`` with ``p = (ℓ+2)/2``,
    ``h(s) = s^μ``, ``W_ij(r) = w r^-Γ`` and ``V(r) = V0/(1+r²)``.
    A zero ``g_scale`` or ``w_scale`` drops the corresponding term.
    """
    if N not in (1, 2, 3):
        raise ValueError("N must be 1, 2 or 3")
    if m < 1:
        raise ValueError("m must be >= 1")
    if not (ell > 0 and mu > 0 and Gamma > 0):
        raise ValueError("exponents ell, mu, Gamma must be positive")
    if Gamma >= N:
        raise ValueError(f"Gamma={Gamma} >= N={N}: kernel is not locally integrable")
    if V0 < 0 or g_scale < 0 or w_scale < 0:
        raise ValueError("V0, g_scale and w_scale must be nonnegative")

    p = (ell + 2.0) / 2.0
    g = float(g_scale)

    def G(r, s):
        s = np.asarray(s, dtype=float)
        S = np.sum(s ** (p / 2), axis=0)
        return g / (ell + 2.0) * (m * np.sum(s**p, axis=0) + 2.0 * S * S)

    def partials(r, s):
        s = np.asarray(s, dtype=float)
        S = np.sum(s ** (p / 2), axis=0)
        return 0.5 * g * (m * s ** (p - 1) + 2.0 * S * s ** (p / 2 - 1))

    def force(r, phi):
        a = np.abs(phi)
        S = np.sum(a**p, axis=0)
        return g * (m * a ** (2 * p - 2) * phi + 2.0 * S * np.sign(phi) * a ** (p - 1))

    local = None
    if g > 0:
        local = LocalNonlinearity(
            G=G,
            partials=partials,
            force=force,
            ell=(float(ell),) * m,
            K=g * 3.0 * m / (ell + 2.0),
            degree=p,
            B=g * (m + 2.0) / (ell + 2.0),
            gamma=p,
            R2=0.0,
            S2=1.0,
        )

    nonlocal_ = None
    if w_scale > 0:
        kernel = RadialKernel.power(Gamma, float(w_scale))
        nonlocal_ = NonlocalNonlinearity(
            h=lambda s: np.asarray(s, dtype=float) ** mu,
            dh=lambda s: mu * np.asarray(s, dtype=float) ** (mu - 1),
            mu=float(mu),
            beta=float(mu),
            M=1.0,
            A=1.0,
            S1=1.0,
            kernels=[[kernel] * m for _ in range(m)],
            Gamma=float(Gamma),
            q=N / Gamma,
            C=float(w_scale),
            degree=float(mu),
        )

    name = f"power(N={N}, m={m}, ell={ell}, mu={mu}, Gamma={Gamma}, V0={V0})"
    return ModelSpec(m, Potential.lorentzian(V0), local, nonlocal_, float(c), dim=N, name=name)


def cubic_nls_model(N: int = 1, c: float = 1.0, V0: float = 0.0) -> ModelSpec:
    """Single focusing cubic equation, ``G = s²/4`` and no nonlocal term."""
    spec = builtin_power_model(N, 1, 2.0, 2.0, 0.5 if N == 1 else 1.0, V0, c, g_scale=1.0 / 3.0, w_scale=0.0)
    spec.name = f"cubic_nls(N={N}, V0={V0})"
    return spec


# ---------------------------------------------------------------------------
# sampled hypothesis validation


@dataclass
class CheckResult:
    passed: bool
    detail: str = ""
    witness: Optional[dict] = None

    def to_dict(self) -> dict:
        return {"passed": self.passed, "detail": self.detail, "witness": self.witness}


@dataclass
class HypothesisReport:
    checks: dict[str, CheckResult]
    samples: int
    seed: int

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def __getitem__(self, key: str) -> CheckResult:
        return self.checks[key]

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "seed": self.seed,
            "all_passed": self.all_passed,
            "checks": {k: v.to_dict() for k, v in self.checks.items()},
        }


def _witness(**kw) -> dict:
    out = {}
    for k, v in kw.items():
        v = np.asarray(v)
        out[k] = v.tolist() if v.ndim else float(v)
    return out


def _first_violation(bad: np.ndarray) -> Optional[int]:
    idx = np.flatnonzero(bad)
    return int(idx[0]) if idx.size else None


class _Sampler:
    def __init__(self, seed: int, n: int):
        self.n = n
        self._seed = seed
        self._calls = 0

    def unit(self, d: int) -> np.ndarray:
        self._calls += 1
        eng = qmc.Halton(d=d, scramble=True, seed=self._seed + 7919 * self._calls)
        return np.clip(eng.random(self.n), 1e-12, 1.0)


def _check_V(spec: ModelSpec, smp: _Sampler) -> CheckResult:
    V = spec.potential
    u = smp.unit(2)
    r1, r2 = np.sort(100.0 * u, axis=1).T
    v1, v2 = V(r1), V(r2)
    if np.any(np.asarray(v1) < 0) or np.any(np.asarray(v2) < 0):
        i = _first_violation((v1 < 0) | (v2 < 0))
        return CheckResult(False, "V takes negative values", _witness(r1=r1[i], r2=r2[i]))
    bad = v1 < v2 - _REL * np.abs(v2)
    i = _first_violation(bad)
    if i is not None:
        return CheckResult(False, "V not radially non-increasing", _witness(r1=r1[i], r2=r2[i], V1=v1[i], V2=v2[i]))
    tail = np.asarray(V(np.array([10.0, 1e2, 1e3, 1e4])))
    v0 = V.value_at_origin
    if np.any(np.diff(tail) > 0) or tail[-1] > 1e-6 * abs(v0):
        return CheckResult(False, "V does not decay to 0", _witness(r=[10.0, 1e2, 1e3, 1e4], V=tail))
    return CheckResult(True, f"V(0)={v0:.6g}")


def _check_G0(loc: LocalNonlinearity, m: int, smp: _Sampler) -> tuple[CheckResult, CheckResult]:
    if m < 2:
        coop1 = CheckResult(True, "vacuous for m=1")
    else:
        u = smp.unit(m + 5)
        r = 100.0 * u[:, 0]
        y = 10.0 * u[:, 1 : m + 1].T
        hh, kk = 10.0 * u[:, m + 1], 10.0 * u[:, m + 2]
        i = np.minimum((u[:, m + 3] * m).astype(int), m - 1)
        j = (i + 1 + np.minimum((u[:, m + 4] * (m - 1)).astype(int), m - 2)) % m
        cols = np.arange(y.shape[1])
        yh, yk, yhk = y.copy(), y.copy(), y.copy()
        yh[i, cols] += hh
        yk[j, cols] += kk
        yhk[i, cols] += hh
        yhk[j, cols] += kk
        a, b, cc, d = loc.G(r, yhk), loc.G(r, y), loc.G(r, yh), loc.G(r, yk)
        tol = _REL * (np.abs(a) + np.abs(b) + np.abs(cc) + np.abs(d))
        n = _first_violation(a + b < cc + d - tol)
        if n is None:
            coop1 = CheckResult(True)
        else:
            coop1 = CheckResult(False, "mixed increment negative", _witness(r=r[n], y=y[:, n], h=hh[n], k=kk[n], i=i[n], j=j[n]))
    u = smp.unit(m + 4)
    r0, r1 = np.sort(100.0 * u[:, :2], axis=1).T
    y = 10.0 * u[:, 2 : m + 2].T
    hh = 10.0 * u[:, m + 2]
    i = np.minimum((u[:, m + 3] * m).astype(int), m - 1)
    yh = y.copy()
    yh[i, np.arange(y.shape[1])] += hh
    lhs = loc.G(r1, yh) + loc.G(r0, y)
    rhs = loc.G(r1, y) + loc.G(r0, yh)
    tol = _REL * (np.abs(lhs) + np.abs(rhs))
    n = _first_violation(lhs > rhs + tol)
    if n is None:
        coop2 = CheckResult(True)
    else:
        coop2 = CheckResult(False, "increment grows with r", _witness(r0=r0[n], r1=r1[n], y=y[:, n], h=hh[n], i=i[n]))
    return coop1, coop2


def _check_G1(loc: LocalNonlinearity, m: int, N: Optional[int], smp: _Sampler) -> CheckResult:
    u = smp.unit(m + 1)
    r = 100.0 * u[:, 0]
    s = 10.0 * u[:, 1:].T
    Gv = np.asarray(loc.G(r, s))
    n = _first_violation(Gv < 0)
    if n is not None:
        return CheckResult(False, "G negative", _witness(r=r[n], s=s[:, n], G=Gv[n]))
    ell = np.asarray(loc.ell)[:, None]
    bound = loc.K * (np.sum(s, axis=0) + np.sum(s ** ((ell + 2) / 2), axis=0))
    n = _first_violation(Gv > bound * (1 + _REL))
    if n is not None:
        return CheckResult(False, "growth bound exceeded", _witness(r=r[n], s=s[:, n], G=Gv[n], bound=bound[n]))
    if any(e <= 0 for e in loc.ell):
        return CheckResult(False, "exponents must be positive", _witness(ell=list(loc.ell)))
    return CheckResult(True, f"K={loc.K:.6g}")


def _check_G2(loc: LocalNonlinearity, m: int, smp: _Sampler) -> CheckResult:
    u = smp.unit(m + 1)
    R0 = 100.0
    r = R0 + 1e4 * u[:, 0]
    for eps in (1e-1, 1e-2, 1e-3):
        # small exponents need S0 ~ (eps/K)^(2/ell), far below 1e-12
        for k in range(1, 201):
            S0 = 10.0**-k
            s = S0 * u[:, 1:].T
            if np.all(np.asarray(loc.G(r, s)) <= eps * np.sum(s, axis=0)):
                break
        else:
            return CheckResult(False, f"no S0 >= 1e-200 works for eps={eps}", _witness(eps=eps, R0=R0))
    return CheckResult(True, f"R0={R0}")


def _check_G3(loc: LocalNonlinearity, m: int, smp: _Sampler) -> CheckResult:
    u = smp.unit(m + 2)
    r = 100.0 * u[:, 0]
    t = 1.0 + 9.0 * u[:, 1]
    s = 10.0 * u[:, 2:].T
    lhs, rhs = np.asarray(loc.G(r, t * s)), t * np.asarray(loc.G(r, s))
    n = _first_violation(lhs < rhs - _REL * np.abs(rhs))
    if n is not None:
        return CheckResult(False, "G(r, ts) < t G(r, s)", _witness(r=r[n], t=t[n], s=s[:, n]))
    return CheckResult(True)


def _check_G4(loc: LocalNonlinearity, m: int, N: Optional[int], smp: _Sampler) -> CheckResult:
    if None in (loc.B, loc.gamma, loc.R2, loc.S2):
        return CheckResult(False, "lower-bound data (B, gamma, R2, S2) not declared")
    u = smp.unit(2)
    r = loc.R2 + 1e-9 + 100.0 * u[:, 0]
    s1 = loc.S2 * u[:, 1]
    s = np.zeros((m, s1.size))
    s[0] = s1
    Gv, lb = np.asarray(loc.G(r, s)), loc.B * s1**loc.gamma
    n = _first_violation(Gv < lb * (1 - _REL))
    if n is not None:
        return CheckResult(False, "G(r, s1, 0..) < B s1^gamma", _witness(r=r[n], s1=s1[n]))
    if N is not None and not (1 <= loc.gamma < 1 + 2 / N):
        return CheckResult(False, f"gamma={loc.gamma:.6g} outside [1, 1+2/N)", _witness(gamma=loc.gamma, N=N))
    return CheckResult(True, f"B={loc.B:.6g}, gamma={loc.gamma:.6g}")


def _check_partials(loc: LocalNonlinearity, m: int, smp: _Sampler) -> CheckResult:
    u = smp.unit(m + 1)[:500]
    r = 100.0 * u[:, 0]
    s = 0.1 + 10.0 * u[:, 1:].T
    dG = np.asarray(loc.partials(r, s))
    worst = 0.0
    for j in range(m):
        step = 1e-5 * s[j]
        sp, sm = s.copy(), s.copy()
        sp[j] += step
        sm[j] -= step
        fd = (np.asarray(loc.G(r, sp)) - np.asarray(loc.G(r, sm))) / (2 * step)
        err = np.abs(fd - dG[j]) / np.maximum(np.abs(dG[j]), 1e-8 * (1.0 + np.abs(np.asarray(loc.G(r, s)))))
        n = int(np.argmax(err))
        worst = max(worst, float(err[n]))
        if err[n] > 1e-6:
            return CheckResult(False, f"partial {j} mismatch {err[n]:.3g}", _witness(r=r[n], s=s[:, n], j=j))
    return CheckResult(True, f"max rel err {worst:.2g}")


def _check_h(nl: NonlocalNonlinearity, N: Optional[int], smp: _Sampler) -> dict[str, CheckResult]:
    out = {}
    u = smp.unit(3)
    s = 10.0 * u[:, 0]
    s_small = nl.S1 * u[:, 1]
    t = 1.0 + 9.0 * u[:, 2]
    h = lambda x: np.asarray(nl.h(np.asarray(x, dtype=float)), dtype=float)

    # (h0)
    res = CheckResult(True, "continuity assumed")
    pair = np.sort(10.0 * smp.unit(2), axis=1)
    h0v = float(h(0.0))
    bound = 2 - 1 / nl.q + 2 / N if N else math.inf
    if h0v != 0.0:
        res = CheckResult(False, "h(0) != 0", _witness(h0=h0v))
    elif np.any(h(s) < 0):
        n = _first_violation(h(s) < 0)
        res = CheckResult(False, "h negative", _witness(s=s[n]))
    elif (n := _first_violation(h(pair[:, 0]) > h(pair[:, 1]) * (1 + _REL))) is not None:
        res = CheckResult(False, "h decreasing", _witness(s1=pair[n, 0], s2=pair[n, 1]))
    elif (n := _first_violation(h(s_small) > nl.M * s_small**nl.mu * (1 + _REL))) is not None:
        res = CheckResult(False, "h(s) > M s^mu", _witness(s=s_small[n], M=nl.M, mu=nl.mu))
    elif not (2 <= nl.mu < bound):
        res = CheckResult(False, f"mu={nl.mu:.6g} outside [2, {bound:.6g})", _witness(mu=nl.mu, bound=bound))
    out["h0"] = res

    lhs, rhs = h(t * s), t * h(s)
    n = _first_violation(lhs < rhs * (1 - _REL))
    out["h1"] = CheckResult(True) if n is None else CheckResult(False, "h(ts) < t h(s)", _witness(s=s[n], t=t[n]))

    n = _first_violation(h(s_small) < nl.A * s_small**nl.beta * (1 - _REL))
    if n is not None:
        out["h2"] = CheckResult(False, "h(s) < A s^beta", _witness(s=s_small[n], A=nl.A, beta=nl.beta))
    elif nl.beta < nl.mu:
        out["h2"] = CheckResult(False, "beta < mu", _witness(beta=nl.beta, mu=nl.mu))
    else:
        out["h2"] = CheckResult(True, f"A={nl.A:.6g}, beta={nl.beta:.6g}")

    ds = 1e-6 * (0.1 + s)
    fd = (h(s + 0.1 + ds) - h(s + 0.1 - ds)) / (2 * ds)
    dh = np.asarray(nl.dh(s + 0.1), dtype=float)
    err = np.abs(fd - dh) / np.maximum(np.abs(dh), 1e-12)
    n = int(np.argmax(err))
    out["h_derivative"] = (
        CheckResult(True, f"max rel err {err[n]:.2g}")
        if err[n] <= 1e-6
        else CheckResult(False, f"h' mismatch {err[n]:.3g}", _witness(s=s[n] + 0.1))
    )

    W11 = nl.kernels[0][0]
    if W11 is None:
        out["W1"] = CheckResult(False, "W_11 is identically zero")
        return out
    uw = smp.unit(2)
    r = 100.0 * uw[:, 0]
    tt = nl.t1 * uw[:, 1]
    lhs = np.asarray(W11(r / tt))
    rhs = nl.C * tt**nl.Gamma / r**nl.Gamma
    n = _first_violation(lhs < rhs * (1 - _REL))
    expo = 2 * N - N * nl.beta - nl.Gamma + 2 if N else math.inf
    if n is not None:
        out["W1"] = CheckResult(False, "W_11(r/t) < C t^Gamma / r^Gamma", _witness(r=r[n], t=tt[n]))
    elif not expo > 0:
        out["W1"] = CheckResult(False, f"2N - N beta - Gamma + 2 = {expo:.6g} <= 0", _witness(value=expo))
    else:
        out["W1"] = CheckResult(True, f"2N - N beta - Gamma + 2 = {expo:.6g}")
    return out


def validate_hypotheses(spec: ModelSpec, seed: int = DEFAULT_SEED, samples: int = 10_000) -> HypothesisReport:
    """Sampled checks of every standing assumption; a failure carries an exact witness."""
    smp = _Sampler(seed, samples)
    N, m = spec.dim, spec.m
    checks: dict[str, CheckResult] = {"V0": _check_V(spec, smp)}
    loc = spec.local
    if loc is None:
        for key in ("G0_coop1", "G0_coop2", "G1", "G2", "G3", "G_partials"):
            checks[key] = CheckResult(True, "no local term (G = 0)")
        checks["G4"] = CheckResult(False, "no local term (G = 0)")
    else:
        checks["G0_coop1"], checks["G0_coop2"] = _check_G0(loc, m, smp)
        checks["G1"] = _check_G1(loc, m, N, smp)
        checks["G2"] = _check_G2(loc, m, smp)
        checks["G3"] = _check_G3(loc, m, smp)
        checks["G4"] = _check_G4(loc, m, N, smp)
        checks["G_partials"] = _check_partials(loc, m, smp)
    nl = spec.nonlocal_
    if nl is None:
        for key in ("h0", "h1", "h_derivative"):
            checks[key] = CheckResult(True, "no nonlocal term (W = 0)")
        checks["h2"] = CheckResult(False, "no nonlocal term (W = 0)")
        checks["W1"] = CheckResult(False, "no nonlocal term (W = 0)")
    else:
        checks.update(_check_h(nl, N, smp))
    return HypothesisReport(checks, samples, seed)


# ---------------------------------------------------------------------------
# criticality

WELL_POSED_ALL = "WellPosedAllMass"
WELL_POSED_SMALL = "WellPosedSmallMass"
UNBOUNDED = "UnboundedBelow"


def _compare(x: float, threshold: float) -> str:
    if math.isclose(x, threshold, rel_tol=1e-12, abs_tol=1e-14):
        return "critical"
    return "subcritical" if x < threshold else "supercritical"


@dataclass
class CriticalityReport:
    dim: int
    ell_verdicts: list[str]
    ell_threshold: float
    mu_verdict: Optional[str]
    mu_threshold: Optional[float]
    q_hat: Optional[float]
    sigma: list[float]
    gamma_gn: Optional[float]
    overall: str
    small_t_exponents: dict[str, Optional[float]]
    large_t_exponents: dict[str, Optional[float]]

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def classify_criticality(spec: ModelSpec, N: Optional[int] = None) -> CriticalityReport:
    """Verdict on boundedness of the constrained infimum from exponent arithmetic."""
    N = N if N is not None else spec.dim
    if N is None:
        raise ValueError("dimension unknown: pass N or build the model with dim")
    loc, nl = spec.local, spec.nonlocal_

    ell = list(loc.ell) if loc is not None else []
    ell_thr = 4.0 / N
    ell_v = [_compare(e, ell_thr) for e in ell]
    sigma = [N * e / (2 * (e + 2)) for e in ell]

    mu_v = mu_thr = q_hat = gamma_gn = None
    if nl is not None:
        mu_thr = 2 - 1 / nl.q + 2 / N
        mu_v = _compare(nl.mu, mu_thr)
        q_hat = 2 * nl.q / (2 * nl.q - 1)
        gamma_gn = N / 2 * (q_hat * nl.mu - 2) / (q_hat * nl.mu)

    verdicts = ell_v + ([mu_v] if mu_v else [])
    if "supercritical" in verdicts:
        overall = UNBOUNDED
    elif "critical" in verdicts:
        overall = WELL_POSED_SMALL
    else:
        overall = WELL_POSED_ALL

    small = {
        "local": (N * loc.gamma - N - 2) if loc is not None and loc.gamma is not None else None,
        "nonlocal": (nl.Gamma + N * nl.beta - 2 * N - 2) if nl is not None else None,
    }
    large = {
        "local": (N * max(ell) / 2) if ell else None,
        "nonlocal": (nl.Gamma + N * nl.mu - 2 * N) if nl is not None else None,
    }
    return CriticalityReport(N, ell_v, ell_thr, mu_v, mu_thr, q_hat, sigma, gamma_gn, overall, small, large)
