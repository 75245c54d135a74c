"""Batch front end: ``groundstate solve|validate|probe <config>``.

Config files are sectioned ``key = value`` text::

    [grid]
    N = 1            ; dimension, 1..3
    L = 16           ; box is [-L, L)^N
    n = 1024         ; points per axis, even, >= 8

    [model]
    builtin = power  ; power | cubic_nls
    m = 1
    ell = 2
    mu = 2
    Gamma = 0.5
    V0 = 0
    c = 1
    g_scale = 1      ; 0 drops the local term
    w_scale = 1      ; 0 drops the nonlocal term

    [solver]         ; any MinimizeOptions field
    tol = 1e-8

    [probes]
    small_t = 0.001, 0.01, 0.1, 1
    large_t = 1, 2, 4, 8, 16
    enable_small_t = true
    enable_large_t = true

    [output]
    directory = results
    formats = json, csv

Only ``[grid]`` and ``[model]`` are required. ``;`` and ``#`` start comments.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import logging
import math
import os
import re
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .analysis import (
    ProbeRefused,
    ScalingProbeReport,
    gaussian_profile,
    scaling_probe_large_t,
    scaling_probe_small_t,
)
from .grid import Grid, build_grid
from .minimizer import (
    GroundStateResult,
    MinimizeOptions,
    SupercriticalRefused,
    minimize,
    multiplier_sign_check,
    write_history_csv,
)
from .model import DEFAULT_SEED, ModelSpec, builtin_power_model, classify_criticality, cubic_nls_model, validate_hypotheses

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_REFUSED, EXIT_NOT_CONVERGED = 0, 2, 3
DEFAULT_SMALL_T = tuple(2.0**-k for k in range(10, 0, -1))
DEFAULT_LARGE_T = (1.0, 2.0, 4.0, 8.0, 16.0)


class ConfigError(ValueError):
    pass


@dataclass
class GridConfig:
    N: int
    L: float
    n: int

    def build(self) -> Grid:
        return build_grid(self.N, self.L, self.n)


@dataclass
class ModelConfig:
    builtin: str = "power"
    m: int = 1
    ell: float = 2.0
    mu: float = 2.0
    Gamma: float = 0.5
    V0: float = 0.0
    c: float = 1.0
    g_scale: float = 1.0
    w_scale: float = 1.0

    def build(self, N: int) -> ModelSpec:
        if self.builtin == "cubic_nls":
            return cubic_nls_model(N, self.c, self.V0)
        return builtin_power_model(N, self.m, self.ell, self.mu, self.Gamma, self.V0, self.c,
                                   g_scale=self.g_scale, w_scale=self.w_scale)


@dataclass
class ProbeConfig:
    small_t: tuple[float, ...] = DEFAULT_SMALL_T
    large_t: tuple[float, ...] = DEFAULT_LARGE_T
    enable_small_t: bool = True
    enable_large_t: bool = True


@dataclass
class OutputConfig:
    directory: str = "results"
    formats: tuple[str, ...] = ("json", "csv")


@dataclass
class RunConfig:
    grid: GridConfig
    model: ModelConfig
    solver: MinimizeOptions = field(default_factory=MinimizeOptions)
    probes: ProbeConfig = field(default_factory=ProbeConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    source: Optional[str] = None


# ---------------------------------------------------------------------------
# parsing

_SECTIONS = {"grid": GridConfig, "model": ModelConfig, "solver": MinimizeOptions, "probes": ProbeConfig, "output": OutputConfig}


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    where, section = {}, None
    for no, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            where[(section, "")] = no
        elif section and s and s[0] not in "#;":
            key = re.split(r"[=:]", s, maxsplit=1)[0].strip()
            where[(section, key)] = no
    return where


def _coerce(tp, raw: str, name: str):
    tp = str(tp)
    try:
        if "tuple[float" in tp:
            vals = tuple(float(x) for x in raw.replace(",", " ").split())
            return vals
        if "tuple[str" in tp:
            return tuple(x.strip() for x in raw.split(",") if x.strip())
        if "bool" in tp:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if "Optional[float]" in tp:
            return None if raw.strip().lower() in ("", "none") else float(raw)
        if "int" in tp:
            return int(raw)
        if "float" in tp:
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"{name}: cannot read {raw!r} as {tp}") from None


def _check_ranges(cfg: RunConfig, lines: dict) -> None:
    def bad(sec, key, msg):
        at = lines.get((sec, key))
        where = f" (line {at})" if at else ""
        raise ConfigError(f"{sec}.{key}{where}: {msg}")

    g, m = cfg.grid, cfg.model
    if g.N not in (1, 2, 3):
        bad("grid", "N", "must be 1, 2 or 3")
    if not g.L > 0:
        bad("grid", "L", "must be positive")
    if g.n < 8 or g.n % 2:
        bad("grid", "n", "must be even and >= 8")
    if m.builtin not in ("power", "cubic_nls"):
        bad("model", "builtin", "must be 'power' or 'cubic_nls'")
    if m.m < 1:
        bad("model", "m", "must be >= 1")
    for key in ("ell", "mu"):
        if not getattr(m, key) > 0:
            bad("model", key, "must be positive")
    if not 0 < m.Gamma < g.N:
        bad("model", "Gamma", f"must lie in (0, N={g.N})")
    for key in ("V0", "g_scale", "w_scale"):
        if getattr(m, key) < 0:
            bad("model", key, "must be nonnegative")
    if not m.c > 0:
        bad("model", "c", "must be positive")
    p = cfg.probes
    for key, ts, ok in (("small_t", p.small_t, lambda t: 0 < t <= 1), ("large_t", p.large_t, lambda t: t >= 1)):
        if not ts:
            bad("probes", key, "empty t grid")
        if not all(ok(t) for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
            bad("probes", key, "values must be strictly increasing and in range")
    if not set(cfg.output.formats) <= {"json", "csv"}:
        bad("output", "formats", "allowed formats are json and csv")


def parse_config_text(text: str, source: Optional[str] = None) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text, source=source or "<config>")
    except configparser.Error as exc:
        raise ConfigError(f"parse error: {exc}") from None
    lines = _key_lines(text)
    for sec in cp.sections():
        if sec not in _SECTIONS:
            raise ConfigError(f"unknown section [{sec}] (line {lines.get((sec, ''), '?')})")
    for sec in ("grid", "model"):
        if sec not in cp:
            raise ConfigError(f"missing required section [{sec}]")

    built = {}
    for sec, cls in _SECTIONS.items():
        fields = {f.name: f for f in dataclasses.fields(cls) if f.init}
        kw = {}
        if sec in cp:
            for key, raw in cp[sec].items():
                if key not in fields:
                    at = lines.get((sec, key))
                    raise ConfigError(f"unknown key {sec}.{key}" + (f" (line {at})" if at else ""))
                kw[key] = _coerce(fields[key].type, raw, f"{sec}.{key}")
        try:
            built[sec] = cls(**kw)
        except TypeError as exc:
            raise ConfigError(f"[{sec}]: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"solver: {exc}") from None
    cfg = RunConfig(**built, source=source)
    _check_ranges(cfg, lines)
    return cfg


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config_text(text, str(path))


# ---------------------------------------------------------------------------
# serialization


def _fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return {True: "true", False: "false", None: "null"}[x]
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "null"
        s = format(x, ".17g")
        return s if any(ch in s for ch in ".en") else s + ".0"
    if isinstance(x, str):
        import json

        return json.dumps(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{_fmt(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        obj = list(obj)
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_fmt(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + to_json(v, indent, _level + 1) for v in obj) + "\n" + pad + "]"
    return _fmt(obj)


def emit_plot_data(source, path, grid: Optional[Grid] = None) -> Path:
    """Two-column series: a radial profile (r, Φ_j(r)) or a probe's (t, energy)."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if isinstance(source, ScalingProbeReport):
            w.writerow(["t", "energy"])
            for t, e in zip(source.t, source.energies):
                w.writerow([format(t, ".17g"), format(e, ".17g")])
        elif isinstance(source, GroundStateResult):
            if grid is None:
                raise ValueError("profile export needs the grid")
            phi = source.field
            o = grid.n // 2
            r = grid.axis[o:]
            w.writerow(["r"] + [f"phi_{j + 1}" for j in range(phi.shape[0])])
            for i, ri in enumerate(r):
                vals = [p[(o,) * (grid.dim - 1) + (o + i,)] for p in phi]
                w.writerow([format(ri, ".17g")] + [format(float(v), ".17g") for v in vals])
        elif source is None:
            w.writerow(["t", "energy"])
        else:
            raise TypeError("expected a GroundStateResult or ScalingProbeReport")
    return path


# ---------------------------------------------------------------------------
# pipeline


def _probes(cfg: RunConfig, spec: ModelSpec, grid: Grid, report: dict) -> list[ScalingProbeReport]:
    done = []
    section = {}
    if cfg.probes.enable_small_t:
        prof = gaussian_profile(grid.dim, spec.m, spec.c, active=[0])
        rep = scaling_probe_small_t(spec, prof, cfg.probes.small_t, grid)
        section["small_t"] = rep.to_dict()
        done.append(rep)
    if cfg.probes.enable_large_t:
        prof = gaussian_profile(grid.dim, spec.m, spec.c)
        try:
            rep = scaling_probe_large_t(spec, prof, cfg.probes.large_t, grid)
            section["large_t"] = rep.to_dict()
            done.append(rep)
        except ProbeRefused as exc:
            section["large_t"] = {"kind": "large_t", "verdict": "refused", "reason": str(exc)}
    if section:
        report["probes"] = section
    return done


def _write_probes_csv(path: Path, reports: Sequence[ScalingProbeReport]) -> None:
    if not reports:
        emit_plot_data(None, path)
        return
    for i, rep in enumerate(reports):
        rep.write_csv(path, mode="w" if i == 0 else "a", header=i == 0)


def run(cfg: RunConfig, command: str = "solve", override_supercritical: bool = False,
        out_dir: Optional[str] = None) -> int:
    start = time.perf_counter()
    out = Path(out_dir or cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    grid = cfg.grid.build()
    spec = cfg.model.build(grid.dim)

    report: dict = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": {
            "grid": dataclasses.asdict(cfg.grid),
            "model": dataclasses.asdict(cfg.model),
            "solver": dataclasses.asdict(cfg.solver),
        },
        "errors": [],
    }
    status = EXIT_OK
    report["hypotheses"] = validate_hypotheses(spec, seed=cfg.solver.seed).to_dict()
    crit = classify_criticality(spec, grid.dim)
    report["criticality"] = crit.to_dict()

    result = None
    if command == "solve":
        opts = dataclasses.replace(cfg.solver, allow_supercritical=cfg.solver.allow_supercritical or override_supercritical)
        try:
            result = minimize(spec, grid, opts)
        except SupercriticalRefused as exc:
            report["errors"].append(f"minimize refused: {exc}")
            status = EXIT_REFUSED
        if result is not None:
            report["ground_state"] = result.summary()
            report["ground_state"]["multiplier_sign_check"] = multiplier_sign_check(result)
            if not result.converged:
                report["errors"].append(f"not converged: {result.message}")
                status = EXIT_NOT_CONVERGED

    probes: list[ScalingProbeReport] = []
    if command in ("solve", "probe"):
        try:
            probes = _probes(cfg, spec, grid, report)
        except Exception as exc:  # recorded, the run still reports
            report["errors"].append(f"probe failed: {exc}")

    if "csv" in cfg.output.formats:
        if result is not None:
            write_history_csv(result, out / "history.csv")
            emit_plot_data(result, out / "profile.csv", grid)
        if command in ("solve", "probe"):
            _write_probes_csv(out / "probes.csv", probes)

    report["exit_status"] = status
    report["runtime"] = {
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds").replace("+00:00", "Z"),
        "wall_seconds": time.perf_counter() - start,
    }
    if "json" in cfg.output.formats:
        (out / "report.json").write_text(to_json(report) + "\n")
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="groundstate",
        description="Ground states and variational probes for coupled NLS systems.",
        epilog=__doc__.split("\n", 2)[2] + "\nSolver defaults: "
        + ", ".join(f"{f.name}={f.default}" for f in dataclasses.fields(MinimizeOptions))
        + f"\nProbe defaults: small_t = 2^-10..2^-1, large_t = {', '.join(map(str, DEFAULT_LARGE_T))}"
        + f"\nOutput defaults: directory = results, formats = json, csv",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("solve", "minimize, then run enabled probes"),
                        ("validate", "hypothesis checks and criticality only"),
                        ("probe", "scaling probes only")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("config")
        s.add_argument("--override-supercritical", action="store_true",
                       help="run the flow even when the infimum is -inf")
        s.add_argument("--seed", type=int, default=None, help=f"RNG seed (default {DEFAULT_SEED})")
        s.add_argument("--out", default=None, help="output directory (overrides output.directory)")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=os.environ.get("GROUNDSTATE_LOG", "WARNING"))
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.seed is not None:
        if args.seed < 0:
            print("error: --seed must be a nonnegative integer", file=sys.stderr)
            return 1
        cfg.solver = dataclasses.replace(cfg.solver, seed=args.seed)
    return run(cfg, args.command, args.override_supercritical, args.out)


if __name__ == "__main__":
    sys.exit(main())
