"""Print boundedness verdicts for exponents straddling both thresholds."""

import argparse

from groundstate import builtin_power_model
from groundstate.model import classify_criticality


def rows(N, Gamma):
    ell_thr, mu_thr = 4 / N, 2 - Gamma / N + 2 / N
    ell_lo, mu_lo = 0.5 * ell_thr, 2.0 + 0.5 * (mu_thr - 2.0)
    return [(ell_lo, mu_lo), (ell_thr, mu_lo), (ell_thr + 0.5, mu_lo),
            (ell_lo, mu_thr), (ell_lo, mu_thr + 0.5), (ell_thr, mu_thr)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dims", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--gamma-frac", type=float, default=0.5, help="kernel exponent as a fraction of N")
    args = ap.parse_args()
    print(f"{'N':>2} {'ell':>7} {'ell*':>7} {'mu':>7} {'mu*':>7}  verdict")
    for N in args.dims:
        Gamma = args.gamma_frac * N
        for ell, mu in rows(N, Gamma):
            rep = classify_criticality(builtin_power_model(N, 1, ell, mu, Gamma, 0.0, 1.0))
            print(f"{N:2d} {ell:7.3f} {rep.ell_threshold:7.3f} {mu:7.3f} {rep.mu_threshold:7.3f}  {rep.overall}")


if __name__ == "__main__":
    main()
