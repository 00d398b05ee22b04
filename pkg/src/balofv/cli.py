"""Command-line entry points.

Exit codes: 0 when the experiment report has no failed metric, 1 on metric
failure or a solver abort, 2 on usage or configuration errors. ``--threads``
caps the worker pool used by multi-run experiments; the BALO_FV_THREADS
environment variable is the fallback.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import fileio
from ._version import __version__
from .config import (
    RunConfig,
    config_digest,
    grid_from_config,
    parse_config,
    snapshot_meta,
)
from .errors import ConfigError, DomainError, SolverError
from .experiments import (
    D_BARRIER,
    run_convergence_study,
    run_epsilon_sweep,
    run_figure_comparison,
    run_invariant_audit,
    run_weak_residual_check,
    simulate,
)
from .report import ExperimentReport


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="balofv",
        description="Finite-volume solver for the macrophage/cytokine/oligodendrocyte system",
    )
    parser.add_argument("--version", action="version", version=f"balofv {__version__}")
    parser.add_argument("--output-dir", default=None, help="override the config output_dir")
    parser.add_argument("--quiet", action="store_true", help="suppress the report on stdout")
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker pool size for multi-run experiments (default: BALO_FV_THREADS or 1)",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("run", "advance one configuration, writing snapshots"),
        ("audit", "run while checking the analytic invariants"),
        ("weak-check", "weak-form residual decay under refinement"),
        ("figures", "linear vs porous-medium comparison panels"),
    ):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("config")
    conv = sub.add_parser("converge", help="Richardson self-convergence study")
    conv.add_argument("config")
    conv.add_argument("--levels", type=int, default=3, help="refinement levels (>= 3)")
    eps = sub.add_parser("eps-sweep", help="regularization sweep toward epsilon = 0")
    eps.add_argument("config")
    eps.add_argument(
        "--eps", default="1e-1,1e-2,1e-3,1e-4", help="comma-separated descending epsilons"
    )
    return parser


def _cmd_run(cfg: RunConfig, exp_id: str, out_root: Path) -> ExperimentReport:
    rep = ExperimentReport(exp_id, config_digest(cfg))
    grid = grid_from_config(cfg)

    def writer(state) -> None:
        rel = f"snap_{len(rep.snapshots):02d}.csv"
        fileio.write_snapshot(state, grid, snapshot_meta(cfg, state.t), out_root / rel)
        rep.snapshots.append(rel)

    sim = simulate(cfg, on_snapshot=writer)
    stats = sim.stats
    rep.add("steps", float(len(stats)), ">=1")
    rep.add("min_m", min(s.min_m for s in stats), ">=0")
    rep.add("max_d", max(s.max_d for s in stats), D_BARRIER)
    rep.add("clamp_m_cells", float(sum(s.clamp_m_cells for s in stats)), "<=0")
    rep.add("final_mass_m", stats[-1].mass_m, "none")
    rep.add("final_linf_c", stats[-1].linf_c, "none")
    return rep


def cli_main(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2

    if args.threads is not None:
        threads = args.threads
    else:
        try:
            threads = int(os.environ.get("BALO_FV_THREADS", "1"))
        except ValueError:
            print("BALO_FV_THREADS must be an integer", file=sys.stderr)
            return 2
    if threads < 1:
        print("--threads must be at least 1", file=sys.stderr)
        return 2

    try:
        cfg = parse_config(args.config)
        exp_id = cfg.experiment or args.command
        out_base = args.output_dir if args.output_dir is not None else cfg.output_dir
        out_root = Path(out_base) / exp_id

        if args.command == "run":
            rep = _cmd_run(cfg, exp_id, out_root)
        elif args.command == "audit":
            rep = run_invariant_audit(cfg)
        elif args.command == "converge":
            rep = run_convergence_study(cfg, levels=args.levels, threads=threads)
        elif args.command == "weak-check":
            rep = run_weak_residual_check(cfg, threads=threads)
        elif args.command == "eps-sweep":
            try:
                eps_list = [float(tok) for tok in args.eps.split(",") if tok.strip()]
            except ValueError:
                raise ConfigError(f"--eps must be comma-separated numbers, got {args.eps!r}")
            rep = run_epsilon_sweep(cfg, eps_list, threads=threads)
        else:  # figures
            rep = run_figure_comparison(cfg, out_dir=out_base, threads=threads)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1

    rep.write(out_root / "report.txt")
    if not args.quiet:
        sys.stdout.write(rep.to_text())
    return 0 if rep.passed else 1


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
