"""Run the dilation probes and write their energy curves.

Small t checks that spreading a fixed profile makes the energy negative
before it reaches zero; large t checks that concentrating it drives the
energy to -inf when an exponent is supercritical.
"""

import argparse
from pathlib import Path

from groundstate import build_grid, builtin_power_model
from groundstate.analysis import gaussian_profile, scaling_probe_large_t, scaling_probe_small_t


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/probes"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    small_t = [2.0**-k for k in range(10, 0, -1)]
    for c in (0.1, 1.0, 10.0):
        spec = builtin_power_model(1, 2, 0.5, 2.0, 0.5, 1.0, c)
        rep = scaling_probe_small_t(spec, gaussian_profile(1, 2, c), small_t, build_grid(1, 32, 512))
        rep.write_csv(args.out / f"small_t_c{c:g}.csv")
        print(f"small t, c={c:g}: {rep.verdict}, slope {rep.fitted['energy']:.3f} (expected {rep.expected_exponent:g})")

    spec = builtin_power_model(2, 1, 3.0, 3.0, 1.0, 0.0, 10.0)
    rep = scaling_probe_large_t(spec, gaussian_profile(2, 1, 10.0), [1, 2, 4, 8, 16], build_grid(2, 12, 128))
    rep.write_csv(args.out / "large_t.csv")
    rep.write_json(args.out / "large_t.json")
    print(f"large t: {rep.verdict}, slope {rep.fitted['energy']:.3f} (expected {rep.expected_exponent:g})")


if __name__ == "__main__":
    main()
