"""Five-variable benchmark: chaos solve against a fine block-FD reference.

Desk scale by default (P=2, N=4, about two seconds); --full adds the
P=3, N=5 configuration (sparse normal-equation solve, about a minute).
The reference is the coupled finite-difference system at n=161 with P=3,
solved once and reused for every row.
"""
import argparse
import sys
import time
from pathlib import Path

import sincpce as sp


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/example2", help="output directory")
    ap.add_argument("--full", action="store_true", help="include P=3, N=5")
    args = ap.parse_args(argv)
    out = Path(args.out)

    cfg = sp.load_config(sp.bundled_config("example2"))
    p = cfg.problem
    print(f"coercivity floor {sp.validate_coercivity(p):g}")

    t0 = time.perf_counter()
    basis3 = sp.chaos_basis(5, 3)
    coupled3 = sp.galerkin_assemble(p, basis3, sp.triple_tensor(basis3))
    mean_grid, var_grid = sp.block_moments(sp.fd_solve_block(coupled3, cfg.reference_fd_n))
    xs, ys = sp.default_lattice(p.domain, 201)
    ref_mean = sp.lift_uniform(mean_grid, xs, ys)
    ref_var = sp.lift_uniform(var_grid, xs, ys)
    print(f"reference fd n={cfg.reference_fd_n} P=3 in {time.perf_counter() - t0:.1f}s")

    runs = [(2, 4)] + ([(3, 5)] if args.full else [])
    rows = []
    print(f"{'P':>3} {'N':>3} {'unknowns':>9} {'method':>12} {'mean L2':>12} {'var L2':>12} {'secs':>7}")
    for P, N in runs:
        t0 = time.perf_counter()
        basis = sp.chaos_basis(5, P)
        coupled = sp.galerkin_assemble(p, basis, sp.triple_tensor(basis))
        gx = sp.sinc_points(0.0, 1.0, N, cfg.h)
        gy = sp.sinc_points(0.0, 1.0, N, cfg.h)
        gsys = sp.build_global_system(coupled, gx, gy, cfg.tau)
        sol = sp.solve_least_squares(gsys, basis)
        em = sp.error_norms(sol.mean_lattice(xs, ys), ref_mean, xs, ys).l2
        ev = sp.error_norms(sol.variance_lattice(xs, ys), ref_var, xs, ys).l2
        dt = time.perf_counter() - t0
        rows.append((P, N, gsys.columns, sol.method, em, ev, dt))
        print(f"{P:>3} {N:>3} {gsys.columns:>9} {sol.method:>12} {em:>12.4e} {ev:>12.4e} {dt:>7.1f}")

    sp.write_table_csv(
        out / "runs.csv",
        ("P", "N", "unknowns", "method", "l2_mean", "l2_var", "seconds"),
        rows,
    )
    print(f"outputs in {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
