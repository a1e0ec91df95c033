"""Command-line interface: simulate | energy-check | converge-time | weights-dump | ml-eval.

Every subcommand writes deterministic CSV artifacts (documented headers) into
the configured output directory, overridable with FRACVISCO_OUTPUT_DIR.
Errors exit nonzero after printing one machine-readable line
``error: <subcommand>: <message>`` on stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, parse_config
from .diagnostics import energy_ledger, long_time_limit
from .fem import (ElasticParams, assemble, build_rect_mesh, constant_volume,
                  quasi_static_solve, side_traction)
from .mlf import KernelParams, ml_e
from .scalar import ScalarModel, convergence_study
from .stepper import run
from .weights import TimeGrid, build_weights


def _load_config(path):
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _out_dir(cfg):
    path = Path(os.environ.get("FRACVISCO_OUTPUT_DIR", cfg.out_dir))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _setup(cfg):
    mesh = build_rect_mesh(cfg.nx, cfg.ny, cfg.lx, cfg.ly)
    ep = ElasticParams(mu=cfg.mu, lam=cfg.lam, rho=cfg.rho)
    ker = KernelParams(alpha=cfg.alpha, tau=cfg.tau, gamma=cfg.gamma)
    tr = {name: getattr(cfg, f"g_{name}")
          for name in ("left", "right", "bottom", "top")}
    traction = side_traction(tr) if any(any(v) for v in tr.values()) else None
    volume = constant_volume(cfg.f) if any(cfg.f) else None
    sys_ = assemble(mesh, ep, volume=volume, traction=traction,
                    lumped=cfg.mass_lumping)
    grid = TimeGrid.uniform(cfg.t_final, cfg.steps)
    table = build_weights(grid, ker, mode=cfg.weights_mode)
    return mesh, ep, ker, sys_, grid, table


def _fmt(x):
    return repr(float(x))


def cmd_simulate(args):
    cfg = _load_config(args.config)
    mesh, ep, ker, sys_, grid, table = _setup(cfg)
    ndof = sys_.n_dofs
    zero = np.zeros(ndof)
    hist = run(sys_, grid, table, zero, zero, solver=cfg.method,
               rtol=cfg.cg_tol)
    out = _out_dir(cfg)
    paths = []
    for i, point in enumerate(cfg.probes):
        vertex = mesh.nearest_vertex(point)
        trace = hist.probe_trace(vertex)
        name = "probe_trace.csv" if i == 0 else f"probe_trace_{i + 1}.csv"
        lines = ["t,u1_x,u1_y,u2_x,u2_y"]
        for t, row in zip(hist.times, trace):
            lines.append(",".join([_fmt(t)] + [_fmt(v) for v in row]))
        path = out / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        paths.append(path)
    print("wrote " + ", ".join(str(p) for p in paths))
    return 0


def cmd_energy_check(args):
    cfg = _load_config(args.config)
    mesh, ep, ker, sys_, grid, table = _setup(cfg)
    ndof = sys_.n_dofs
    if sys_.volume is None and sys_.traction is None:
        # homogeneous: start from the relaxed static shape of the default
        # unit traction so the ledger exercises a nontrivial balance
        loaded = assemble(mesh, ep, traction=side_traction(
            {"right": (0.0, -1.0)}), lumped=cfg.mass_lumping)
        u0 = quasi_static_solve(loaded, scale=max(1.0 - ker.gamma, 1e-8))
    else:
        u0 = np.zeros(ndof)
    hist = run(sys_, grid, table, u0, np.zeros(ndof), solver=cfg.method,
               rtol=cfg.cg_tol)
    led = energy_ledger(hist, sys_, table)
    out = _out_dir(cfg)
    path = out / "energy_ledger.csv"
    path.write_text(led.csv(), encoding="utf-8")
    print(f"wrote {path} (residual_rel = {led.residual_rel:.3e})")
    return 0


def cmd_converge_time(args):
    cfg = _load_config(args.config)
    ker = KernelParams(alpha=cfg.alpha, tau=cfg.tau, gamma=cfg.gamma)
    k_list = [float(s) for s in args.k_list.split(",")]
    model = ScalarModel(rho=args.rho, kappa=args.kappa, kernel=ker,
                        u0=args.u0, v0=args.v0)
    study = convergence_study(model, k_list, args.t_final)
    out = _out_dir(cfg)
    path = out / "convergence.csv"
    path.write_text(study.csv(), encoding="utf-8")
    print(f"wrote {path}")
    for row in study.rows:
        print(f"  k={row.k:<12g} error={row.error:.6e} order={row.order:.3f}")
    return 0


def cmd_weights_dump(args):
    cfg = _load_config(args.config)
    ker = KernelParams(alpha=cfg.alpha, tau=cfg.tau, gamma=cfg.gamma)
    grid = TimeGrid.uniform(cfg.t_final, cfg.steps)
    table = build_weights(grid, ker, mode=cfg.weights_mode)
    lines = ["n,j,omega_nj,eta_n"]
    for n in range(1, table.n_steps + 1):
        eta = table.eta_bar[n]
        for j in range(1, n + 1):
            lines.append(f"{n},{j},{_fmt(table.omega[n - 1, j - 1])},{_fmt(eta)}")
    out = _out_dir(cfg)
    path = out / "weights.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {path}")
    return 0


def cmd_ml_eval(args):
    value = ml_e(args.alpha, args.b, args.x)
    print(repr(value))
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="fracvisco",
        description="dG(0) solver for dynamic fractional-order viscoelasticity")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a configured simulation, "
                       "write probe_trace.csv per probe")
    p.add_argument("config")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("energy-check", help="run and write energy_ledger.csv")
    p.add_argument("config")
    p.set_defaults(fn=cmd_energy_check)

    p = sub.add_parser("converge-time",
                       help="scalar-model temporal convergence table")
    p.add_argument("config")
    p.add_argument("--k-list", default="0.125,0.0625,0.03125,0.015625",
                   help="comma-separated decreasing steps")
    p.add_argument("--t-final", type=float, default=4.0)
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--u0", type=float, default=1.0)
    p.add_argument("--v0", type=float, default=0.0)
    p.set_defaults(fn=cmd_converge_time)

    p = sub.add_parser("weights-dump", help="write the weight table as CSV")
    p.add_argument("config")
    p.set_defaults(fn=cmd_weights_dump)

    p = sub.add_parser("ml-eval", help="print E_{alpha,b}(-x)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    p.set_defaults(fn=cmd_ml_eval)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as err:
        for e in err.errors:
            print(f"error: {args.command}: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError, RuntimeError) as err:
        print(f"error: {args.command}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
