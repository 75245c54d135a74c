"""Grid refinement of a Choquard ground state with a singular r^-Gamma kernel.

The origin cell of the kernel is replaced by its cell average; every other
cell is point-sampled, so the energy converges like h^(N - Gamma), much more
slowly than the spectral kinetic term.
"""

import argparse

from groundstate import build_grid, builtin_power_model, minimize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=float, default=32.0)
    ap.add_argument("--sizes", type=int, nargs="+", default=[256, 512, 1024, 2048])
    ap.add_argument("--Gamma", type=float, default=0.5)
    args = ap.parse_args()
    spec = builtin_power_model(1, 1, 2.0, 2.0, args.Gamma, 0.0, 1.0)
    prev = None
    for n in args.sizes:
        res = minimize(spec, build_grid(1, args.L, n))
        step = "" if prev is None else f"  change {res.I_c - prev:+.3e}"
        print(f"n={n:5d} h={2 * args.L / n:.4f} I_c={res.I_c:.8f} lambda_c={res.lambda_c:.8f} "
              f"converged={res.converged}{step}")
        prev = res.I_c


if __name__ == "__main__":
    main()
