"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from ._parallel import THREADS_ENV
from .config import build_config, load_config_file
from .errors import ConfigError, DickeError, SamePhaseError
from .output import Column, write_json, write_table

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON file of scenario keys; flags override it")
    common.add_argument("--omega", type=float)
    common.add_argument("--omega0", type=float)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--lambda0", dest="lam0", type=float)
    common.add_argument("--eta", type=float)
    common.add_argument("--phase", choices=("normal", "superradiant"))
    common.add_argument("--bogoliubov", choices=("asymptotic", "exact"))
    common.add_argument("--apply-cos", dest="apply_cos", action="store_const", const=True)
    common.add_argument("--tmax", dest="t_max", type=float)
    common.add_argument("--dt", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--mmax", dest="m_max", type=int)
    common.add_argument("--nmax", dest="n_max", type=int)
    common.add_argument("--mu-max", dest="mu_max", type=int)
    common.add_argument("--out")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--threads", type=int, help=f"worker threads (default ${THREADS_ENV} or CPU count)")
    common.add_argument("--etas", help="comma-separated eta grid")
    common.add_argument("--lambdas", help="comma-separated coupling grid")
    common.add_argument("--q-times", dest="q_times", help="comma-separated times for Q(m, t) rows")
    common.add_argument("--protocol", choices=("A", "B", "both"))

    p = argparse.ArgumentParser(prog="dicke-harmonics", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("spectrum", "mode energies on a coupling grid"),
                       ("evolve", "second moment and echo on a time grid"),
                       ("scaling", "peak amplitude, echo minimum and fidelity against eta"),
                       ("relation", "echo against second moment for the two sampling protocols"),
                       ("validate", "run the invariant suite")):
        sub.add_parser(name, parents=[common], help=text)
    rep = sub.add_parser("reproduce", parents=[common], help="data and gnuplot scripts for one figure")
    rep.add_argument("--figure", type=int, required=True)
    rep.add_argument("--out-dir", dest="out_dir", default=".")
    return p


_KEYS = ("omega", "omega0", "lam", "lam0", "eta", "phase", "bogoliubov", "apply_cos", "t_max", "dt", "tol",
         "m_max", "n_max", "mu_max", "out", "format", "threads", "etas", "lambdas", "q_times", "protocol")


def _emit(cfg, columns, meta, default_name):
    path = cfg.out or default_name
    write_table(path, columns, meta, cfg.format)
    return path


def _sidecar(path, suffix, fmt, columns, meta):
    stem, _ = os.path.splitext(path)
    side = f"{stem}_{suffix}.{fmt}"
    write_table(side, columns, meta, fmt)
    return side


def _fit_columns(fit, extra=()):
    cols = [Column("a", "1", [fit.a]), Column("b", "1", [fit.b]), Column("residual", "1", [fit.residual]),
            Column("n_points", "1", [fit.n_points])]
    return cols + list(extra)


def _run(args):
    from . import scenarios
    from .validation import run_validation

    file_values = load_config_file(args.config) if args.config else {}
    cfg = build_config(file_values, {k: getattr(args, k) for k in _KEYS})
    ext = cfg.format
    if args.command == "spectrum":
        cols, meta = scenarios.spectrum_rows(cfg)
        print(_emit(cfg, cols, meta, f"spectrum.{ext}"))
    elif args.command == "evolve":
        cols, q_cols, meta = scenarios.evolve_run(cfg)
        path = _emit(cfg, cols, meta, f"evolve.{ext}")
        print(path)
        if q_cols:
            print(_sidecar(path, "q", ext, q_cols, meta))
    elif args.command == "scaling":
        cols, fit, meta = scenarios.scaling_run(cfg)
        path = _emit(cfg, cols, meta, f"scaling.{ext}")
        print(path)
        if fit is not None:
            print(_sidecar(path, "fit", ext, _fit_columns(fit), meta))
            print(f"A_p = {fit.a:.6g} * eta^{fit.b:.6g}")
    elif args.command == "relation":
        cols, fit, gap, meta = scenarios.relation_run(cfg)
        path = _emit(cfg, cols, meta, f"relation.{ext}")
        print(path)
        if fit is not None:
            print(_sidecar(path, "fit", ext, _fit_columns(fit, [Column("collapse_gap", "1", [gap])]), meta))
            print(f"a = {fit.a:.6g}, b = {fit.b:.6g}, collapse gap = {gap:.3g}")
    elif args.command == "validate":
        report = run_validation(cfg)
        report["config"] = cfg.resolved()
        if cfg.out:
            write_json(cfg.out, report)
        for c in report["checks"]:
            status = "PASS" if c["passed"] else "FAIL"
            detail = c.get("error") or f"{c['value']:.3e} < {c['limit']:.1e}"
            print(f"{status} {c['name']}: {detail}")
        return EXIT_OK if report["passed"] else EXIT_FAIL
    elif args.command == "reproduce":
        for path in scenarios.reproduce(args.figure, args.out_dir, cfg.threads):
            print(path)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return _run(args)
    except (ConfigError, SamePhaseError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DickeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
