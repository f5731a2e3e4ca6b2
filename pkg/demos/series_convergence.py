"""Partial sums of the Pfaffian series on a small grid with a field.

Terms come in canonical order (subset size, then lexicographic). The running
log Z closes in on the exact value and hits it once every term is in.
"""

import math
import sys

from loopcalc import IsingParams, ising_grid_forney, ising_log_z, run_bp, run_series, sample_couplings


def main(beta=1.0, theta=0.5, seed=2):
    params = IsingParams(3, 3, beta, theta, "mixed", seed)
    g = ising_grid_forney(params)
    bp = run_bp(g)
    res = run_series(g, bp)
    exact = ising_log_z(sample_couplings(params))
    print(f"Bethe log Z {bp.bethe_log_z:.12f}   exact {exact:.12f}   {res.n_triplets} triplets")
    for t, running in zip(res.terms, res.running):
        est = bp.bethe_log_z + math.log(running) if running > 0 else float("nan")
        psi = ",".join(map(str, t.psi)) or "{}"
        print(f"{psi:>14}  Z_psi={t.contribution:+.3e}  log Z={est:.12f}  err={abs(est - exact):.1e}")


if __name__ == "__main__":
    main(*map(float, sys.argv[1:3]))
