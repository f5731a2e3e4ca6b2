"""Cost of z_empty against the size of the extended graph.

The Pfaffian of an N x N matrix costs O(N^3); banded elimination keeps grids
well below that. Doubling the side multiplies N_Gext by about four.
"""

import time

from loopcalc import IsingParams, ising_grid_forney, pfaffian_term, run_bp


def main(sides=(4, 6, 8, 12, 16)):
    print(f"{'grid':>6} {'N_Gext':>7} {'bp s':>7} {'pf s':>7} {'z_empty':>10}")
    for n in sides:
        g = ising_grid_forney(IsingParams(n, n, 1.0, 0.1, "mixed", seed=0))
        t0 = time.perf_counter()
        bp = run_bp(g)
        t_bp = time.perf_counter() - t0
        term = pfaffian_term(g, bp, ())
        print(f"{n:>3}x{n:<2} {term.n_gext:7d} {t_bp:7.2f} {term.seconds:7.2f} {term.z_psi:10.5f}")


if __name__ == "__main__":
    main()
