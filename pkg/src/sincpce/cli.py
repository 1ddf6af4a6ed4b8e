"""Command-line interface.

Subcommands:
  solve      chaos solve of one configuration; writes mean/variance/
             coefficient grids, the decay table, and summary.json
  compare    Poly-Sinc vs finite differences across a grid sweep against a
             configured reference; writes sweep.csv and summary.json
  lebesgue   table of estimated vs measured Lebesgue constants
  validate   parse a configuration and certify coercivity, no solve

Exit codes: 0 success, 2 configuration/argument problems, 3 numerical
failures (non-coercive coefficient, solver breakdown).
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .chaos import chaos_basis, triple_tensor
from .colloc import build_global_system, solve_least_squares
from .config import REFERENCE_KINDS, RunConfig, load_config
from .errors import ConfigError, DomainError, SolveError
from .gridio import write_field_csv, write_summary_json, write_table_csv
from .model import galerkin_assemble, validate_coercivity
from .reference import (
    block_moments,
    decay_fit,
    default_lattice,
    error_norms,
    fd_solve_block,
    lift_uniform,
    make_fd_sampler,
    sampled_reference,
    semi_analytic_example1,
    tensor_gauss,
)
from .sincgrid import lebesgue_estimate, lebesgue_measured, sinc_points

__all__ = ["main", "build_parser"]

_FIELD_LATTICE_N = 101
_SWEEP_LATTICE_N = 201
_DEFAULT_SWEEP = (5, 7, 9, 11, 13)


def _parse_sweep(text: str) -> list[int]:
    try:
        ns = [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as e:
        raise ConfigError(f"--n-sweep must be a comma list of integers: {e}") from e
    if not ns:
        raise ConfigError("--n-sweep is empty")
    for n in ns:
        if n < 3 or n % 2 == 0:
            raise ConfigError(f"sweep grid sizes must be odd and >= 3, got {n}")
    return ns


def _grids(cfg: RunConfig, N: int):
    (xl, xh), (yl, yh) = cfg.problem.domain
    return sinc_points(xl, xh, N, cfg.h), sinc_points(yl, yh, N, cfg.h)


def _build(cfg: RunConfig):
    basis = chaos_basis(cfg.K, cfg.P)
    tensor = triple_tensor(basis)
    return basis, tensor, galerkin_assemble(cfg.problem, basis, tensor)


def _solve_once(cfg: RunConfig, N: int, tau: float):
    basis, _, coupled = _build(cfg)
    gx, gy = _grids(cfg, N)
    gsys = build_global_system(coupled, gx, gy, tau)
    return solve_least_squares(gsys, basis), gsys


def _linfit(x, y):
    """Least-squares line with coefficient of determination."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    yhat = slope * x + intercept
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 1.0
    return float(slope), float(intercept), r2


def _reference_fields(cfg: RunConfig, kind: str, xs, ys):
    """Mean and variance of the chosen reference on the given lattice."""
    p = cfg.problem
    if kind == "semi-analytic":
        if p.domain != ((-1.0, 1.0), (-1.0, 1.0)):
            raise ConfigError(
                "semi-analytic reference is defined on the (-1,1)^2 benchmark domain"
            )
        mean, var = semi_analytic_example1(xs, ys)
        return mean, var, "semi-analytic"
    if kind == "fd-fine":
        p_ref = max(cfg.P, 3)
        basis = chaos_basis(cfg.K, p_ref)
        coupled = galerkin_assemble(p, basis, triple_tensor(basis))
        fields = fd_solve_block(coupled, cfg.reference_fd_n)
        mean_grid, var_grid = block_moments(fields)
        return (
            lift_uniform(mean_grid, xs, ys),
            lift_uniform(var_grid, xs, ys),
            f"fd-fine(n={cfg.reference_fd_n}, P={p_ref})",
        )
    if kind == "sampled":
        # native FD lattice with n matching the comparison lattice: no lift
        solve_sample, sxs, sys_ = make_fd_sampler(p, n=len(np.atleast_1d(xs)))
        if not (np.allclose(sxs, xs) and np.allclose(sys_, ys)):
            raise ConfigError("sampled reference requires the default uniform lattice")
        nodes, weights = tensor_gauss(p.K, cfg.reference_samples)
        mean, var = sampled_reference(nodes, weights, solve_sample)
        return mean, var, f"sampled(q={cfg.reference_samples}^{p.K}, n={len(xs)})"
    raise ConfigError(f"compare needs a reference kind other than 'none' ({REFERENCE_KINDS})")


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    tau = cfg.tau if args.tau is None else float(args.tau)
    if tau <= 0:
        raise ConfigError(f"--tau must be positive, got {tau}")
    out = Path(args.out)
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    floor = validate_coercivity(cfg.problem)
    timings["coercivity"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    sol, gsys = _solve_once(cfg, cfg.N, tau)
    timings["assemble_and_solve"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    xs, ys = default_lattice(cfg.problem.domain, _FIELD_LATTICE_N)
    write_field_csv(out / "mean.csv", xs, ys, sol.mean_lattice(xs, ys))
    write_field_csv(out / "variance.csv", xs, ys, sol.variance_lattice(xs, ys))
    for i in range(sol.m_plus_1):
        write_field_csv(out / f"coeff_{i}.csv", xs, ys, sol.coeff_lattice(i, xs, ys))
    maxima = sol.coefficient_maxima(xs, ys)
    write_table_csv(
        out / "decay.csv", ("i", "max_abs_coeff"), [(i, m) for i, m in enumerate(maxima)]
    )
    decay = None
    try:
        fit = decay_fit(maxima)
        decay = {
            "alpha": fit.alpha,
            "beta": fit.beta,
            "r_squared": fit.r_squared,
            "used_indices": list(fit.used_indices),
        }
    except DomainError:
        pass
    timings["outputs"] = time.perf_counter() - t0

    summary = {
        "command": "solve",
        "config": cfg.raw,
        "basis_size": sol.m_plus_1,
        "grid": {"N": cfg.N, "n": sol.grid_x.n, "h": sol.grid_x.h},
        "tau": tau,
        "unknowns": gsys.columns,
        "rows": gsys.matrix.shape[0],
        "coercivity_floor": floor,
        "residual_norm": sol.residual_norm,
        "solver_method": sol.method,
        "decay_fit": decay,
        "timings": timings,
    }
    write_summary_json(out / "summary.json", summary)
    print(f"solved: {sol.m_plus_1} chaos fields on a {sol.grid_x.n}x{sol.grid_y.n} Sinc grid")
    print(f"residual norm {sol.residual_norm:.6e} via {sol.method}")
    print(f"outputs in {out}")
    return 0


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    tau = cfg.tau if args.tau is None else float(args.tau)
    if tau <= 0:
        raise ConfigError(f"--tau must be positive, got {tau}")
    kind = cfg.reference_kind if args.reference is None else args.reference
    if kind not in REFERENCE_KINDS:
        raise ConfigError(f"--reference must be one of {REFERENCE_KINDS}, got {kind!r}")
    ns = _parse_sweep(args.n_sweep) if args.n_sweep else list(_DEFAULT_SWEEP)
    out = Path(args.out)
    timings: dict[str, float] = {}

    validate_coercivity(cfg.problem)
    xs, ys = default_lattice(cfg.problem.domain, _SWEEP_LATTICE_N)
    t0 = time.perf_counter()
    ref_mean, ref_var, ref_desc = _reference_fields(cfg, kind, xs, ys)
    timings["reference"] = time.perf_counter() - t0

    basis, _, coupled = _build(cfg)
    rows = []
    for n in ns:
        N = (n - 1) // 2
        t0 = time.perf_counter()
        sol, _ = _solve_once(cfg, N, tau)
        e_ps_mean = error_norms(sol.mean_lattice(xs, ys), ref_mean, xs, ys).l2
        e_ps_var = error_norms(sol.variance_lattice(xs, ys), ref_var, xs, ys).l2
        timings[f"polysinc_n{n}"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        fields = fd_solve_block(coupled, n)
        mean_grid, var_grid = block_moments(fields)
        e_fd_mean = error_norms(lift_uniform(mean_grid, xs, ys), ref_mean, xs, ys).l2
        e_fd_var = error_norms(lift_uniform(var_grid, xs, ys), ref_var, xs, ys).l2
        timings[f"fd_n{n}"] = time.perf_counter() - t0
        rows.append((n, e_ps_mean, e_fd_mean, e_ps_var, e_fd_var))

    write_table_csv(
        out / "sweep.csv",
        ("n", "l2_mean_polysinc", "l2_mean_fd", "l2_var_polysinc", "l2_var_fd"),
        rows,
    )

    fits = {}
    if len(rows) >= 3:
        sqrtN = [np.sqrt((n - 1) // 2) for n, *_ in rows]
        (xl, xh), _ = cfg.problem.domain
        hs = [(xh - xl) / (n - 1) for n, *_ in rows]
        slope, _, r2 = _linfit(sqrtN, np.log([r[1] for r in rows]))
        fits["polysinc_mean_log_vs_sqrtN"] = {"slope": slope, "r_squared": r2}
        order, _, r2fd = _linfit(np.log(hs), np.log([r[2] for r in rows]))
        fits["fd_mean_order"] = {"order": order, "r_squared": r2fd}

    summary = {
        "command": "compare",
        "config": cfg.raw,
        "reference": ref_desc,
        "tau": tau,
        "sweep": [
            {
                "n": n,
                "l2_mean_polysinc": a,
                "l2_mean_fd": b,
                "l2_var_polysinc": c,
                "l2_var_fd": d,
            }
            for (n, a, b, c, d) in rows
        ],
        "fits": fits,
        "lattice_points": _SWEEP_LATTICE_N,
        "timings": timings,
    }
    write_summary_json(out / "summary.json", summary)

    print(f"reference: {ref_desc}")
    print(f"{'n':>4} {'mean PS':>12} {'mean FD':>12} {'var PS':>12} {'var FD':>12}")
    for n, a, b, c, d in rows:
        print(f"{n:>4} {a:>12.4e} {b:>12.4e} {c:>12.4e} {d:>12.4e}")
    print(f"outputs in {out}")
    return 0


def cmd_lebesgue(args) -> int:
    ns = _parse_sweep(args.n_sweep) if args.n_sweep else [3, 5, 7, 9, 11, 13]
    out = Path(args.out)
    rows = []
    print(f"{'n':>4} {'estimate':>12} {'measured':>12} {'ratio':>8}")
    for n in ns:
        N = (n - 1) // 2
        grid = sinc_points(-1.0, 1.0, N)
        est = lebesgue_estimate(n)
        meas = lebesgue_measured(grid, resolution=max(10_000, 20 * n))
        rows.append((n, est, meas))
        print(f"{n:>4} {est:>12.6f} {meas:>12.6f} {meas / est:>8.3f}")
    write_table_csv(out / "lebesgue.csv", ("n", "estimate", "measured"), rows)
    print(f"outputs in {out}")
    return 0


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    floor = validate_coercivity(cfg.problem)
    basis = chaos_basis(cfg.K, cfg.P)
    n = 2 * cfg.N + 1
    print(f"config ok: {args.config}")
    print(f"domain {cfg.problem.domain[0]} x {cfg.problem.domain[1]}")
    print(f"K={cfg.K} P={cfg.P}: {basis.size} chaos fields")
    print(f"Sinc grid N={cfg.N} (n={n}): {basis.size * n * n} unknowns")
    print(f"coercivity floor {floor:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sincpce",
        description="Poly-Sinc collocation for elliptic PDEs with random diffusion",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one chaos solve and write its fields")
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--tau", type=float, default=None, help="boundary weight override")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="sweep grid sizes against a reference")
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n-sweep", default=None, help="comma list of odd grid sizes")
    p.add_argument("--tau", type=float, default=None, help="boundary weight override")
    p.add_argument(
        "--reference", default=None, choices=list(REFERENCE_KINDS), help="reference override"
    )
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("lebesgue", help="estimated vs measured Lebesgue constants")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n-sweep", default=None, help="comma list of odd grid sizes")
    p.set_defaults(func=cmd_lebesgue)

    p = sub.add_parser("validate", help="check a configuration without solving")
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except SolveError as e:
        print(f"solver error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
