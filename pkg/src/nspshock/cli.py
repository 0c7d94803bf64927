"""Command-line entry points: profile, simulate, analyze, verify.

Exit codes: 0 success, 1 usage, 2 config error, 3 numerical failure,
4 acceptance failure.  Every subcommand prints a SHA-256 provenance
digest of its canonicalized input.  The --threads flag (or NSP_THREADS)
caps the BLAS/compiler thread pools; the numerics are written so results
are bitwise independent of it.
"""

from __future__ import annotations

import argparse
import os
import sys


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(1)


def _build_parser() -> _Parser:
    p = _Parser(prog="nsp", description=__doc__)
    p.add_argument(
        "--threads",
        type=int,
        default=None,
        help="thread cap for BLAS pools (default: NSP_THREADS or hardware count); "
        "must not and does not change results",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("profile", help="solve the viscous shock profile")
    sp.add_argument("config", help="run configuration file")
    sp.add_argument("--out-dir", default=None, help="override io.out_dir")

    ss = sub.add_parser("simulate", help="evolve perturbed shock, write diagnostics")
    ss.add_argument("config", help="run configuration file")
    ss.add_argument("--out-dir", default=None, help="override io.out_dir")

    sa = sub.add_parser("analyze", help="decay-rate fits from a diagnostics CSV")
    sa.add_argument("csv", help="diagnostics CSV produced by simulate")
    sa.add_argument(
        "--field",
        action="append",
        default=None,
        help="column to fit (repeatable; default L2_z_neq and L2_w_neq)",
    )
    sa.add_argument("--window", nargs=2, type=float, default=None, metavar=("T0", "T1"))
    sa.add_argument("--columns-out", default=None, help="write gnuplot-ready columns")

    sv = sub.add_parser("verify", help="run the built-in acceptance suite")
    sv.add_argument("--quick", action="store_true", help="fast property subset (< 5 min)")
    sv.add_argument("--out-dir", default="runs/acceptance")
    return p


def _setup_threads(n: int | None):
    if n is None:
        env = os.environ.get("NSP_THREADS")
        n = int(env) if env else (os.cpu_count() or 1)
    for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(n))
    os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")
    return n


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    _setup_threads(args.threads)

    # heavy imports only after the thread environment is pinned
    from . import errors as err

    try:
        if args.command == "profile":
            return _cmd_profile(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "analyze":
            return _cmd_analyze(args)
        if args.command == "verify":
            return _cmd_verify(args)
    except (err.ParseError, err.UnknownKey, err.ValidationError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except err.NspError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    raise AssertionError("unreachable")


def _load(args):
    from .config import canonical_digest, parse_config

    cfg = parse_config(args.config)
    digest = canonical_digest(cfg)
    print(f"config_digest sha256={digest}")
    out_dir = args.out_dir if getattr(args, "out_dir", None) else cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    return cfg, out_dir


def _cmd_profile(args) -> int:
    import numpy as np

    from .shock import check_lax, solve_profile, verify_profile
    from .snapshot import write_snapshot

    cfg, out_dir = _load(args)
    grid = cfg.grid()
    es = cfg.endstates()
    lax = check_lax(es)
    prof = solve_profile(
        es, grid, tol=cfg["profile.tol"], max_iter=cfg["profile.max_iter"]
    )
    rep = verify_profile(prof)

    csv_path = os.path.join(out_dir, "profile.csv")
    with open(csv_path, "w") as fh:
        fh.write("xi,rho,u1,E\n")
        for i in range(grid.N1):
            fh.write(
                f"{prof.xi[i]:.17g},{prof.rho[i]:.17g},{prof.u1[i]:.17g},{prof.E[i]:.17g}\n"
            )
    m = np.zeros((3, grid.N1, 1, 1))
    m[0, :, 0, 0] = prof.m1
    write_snapshot(
        os.path.join(out_dir, "profile.nsps"),
        grid.L, 0.0, prof.rho[:, None, None], m, prof.E[:, None, None],
    )
    rep_path = os.path.join(out_dir, "profile_report.txt")
    with open(rep_path, "w") as fh:
        fh.write(f"residual_norm={prof.residual_norm:.6e}\n")
        fh.write(f"lax_margins={lax.margins[0]:.6e},{lax.margins[1]:.6e},{lax.margins[2]:.6e}\n")
        for name in (
            "monotone_rho", "monotone_u1", "monotone_E", "tail_rate_left",
            "tail_rate_right", "end_mismatch", "rh_residual", "ratio_lower",
            "ratio_upper", "massflux_error", "eq_ratio_error", "center_offset",
        ):
            fh.write(f"{name}={getattr(rep, name)}\n")
    print(f"profile: residual {prof.residual_norm:.3e}, wrote {csv_path}")
    return 0


def _cmd_simulate(args) -> int:
    from .diagnostics import csv_header, csv_row, record
    from .integrator import Simulator
    from .perturbation import build_initial
    from .shock import Frame, solve_profile
    from .snapshot import write_snapshot

    cfg, out_dir = _load(args)
    if cfg["shock.frame"] != Frame.SHOCK_STATIONARY.value:
        from .errors import ValidationError

        raise ValidationError(
            "shock.frame", "simulate requires the shock_stationary frame"
        )
    grid = cfg.grid()
    es = cfg.endstates()
    prof = solve_profile(
        es, grid, tol=cfg["profile.tol"], max_iter=cfg["profile.max_iter"]
    )
    print(f"profile: residual {prof.residual_norm:.3e}")
    state = build_initial(prof, cfg.perturb_spec(), grid, cfg.poisson_config())
    sim = Simulator(grid, prof, cfg.solver_config())

    csv_path = os.path.join(out_dir, "diagnostics.csv")
    snap_every = cfg.snapshots
    out_dt = cfg["sim.output_every"]
    fh = open(csv_path, "w")
    fh.write(csv_header() + "\n")
    count = [0]

    def on_output(st, prev_E):
        rec = record(st, prof, grid, prev_E, out_dt if st.t > 0 else None)
        fh.write(csv_row(rec) + "\n")
        fh.flush()
        if snap_every:
            write_snapshot(
                os.path.join(out_dir, f"snap_{count[0]:05d}.nsps"),
                grid.L, st.t, st.rho, st.m, st.E,
            )
        count[0] += 1

    try:
        final = sim.run(state, on_output=on_output)
    finally:
        fh.close()
    write_snapshot(
        os.path.join(out_dir, "final.nsps"), grid.L, final.t, final.rho, final.m, final.E
    )
    print(f"simulate: reached t={final.t:g}, wrote {csv_path}")
    return 0


def _read_diag_csv(path):
    import numpy as np

    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return header, data


def _cmd_analyze(args) -> int:
    import hashlib

    import numpy as np

    from .diagnostics import decay_fit

    with open(args.csv, "rb") as fh:
        print(f"input_digest sha256={hashlib.sha256(fh.read()).hexdigest()}")
    header, data = _read_diag_csv(args.csv)
    t = data[:, header.index("t")]
    fields = args.field or ["L2_z_neq", "L2_w_neq"]
    window = tuple(args.window) if args.window else (0.2 * t[-1], t[-1])
    print(f"fit window: [{window[0]:g}, {window[1]:g}]")
    for name in fields:
        if name not in header:
            print(f"analyze error: unknown field {name!r}", file=sys.stderr)
            return 1
        y = data[:, header.index(name)]
        fit = decay_fit(np.column_stack([t, y]), window=window)
        print(f"{name}: C={fit.C:.6e} c={fit.c:.6f} r2={fit.r2:.6f} n={fit.n}")
    if args.columns_out:
        cols = [t] + [data[:, header.index(name)] for name in fields]
        np.savetxt(
            args.columns_out,
            np.column_stack(cols),
            header="t " + " ".join(fields),
            fmt="%.17g",
        )
        print(f"wrote {args.columns_out}")
    return 0


def _cmd_verify(args) -> int:
    from .verify import run_acceptance

    results = run_acceptance(quick=args.quick, out_dir=args.out_dir)
    failed = [r for r in results if not r.passed]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.name}: {r.details} ({r.seconds:.1f}s)")
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 4 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
