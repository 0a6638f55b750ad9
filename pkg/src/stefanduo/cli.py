"""Command-line front end.

Subcommands ``simulate``, ``sweep``, ``bisect``, ``lifespan``, ``barriers``
and ``resume``. Each writes CSV / JSON files (and PNG figures unless
``--no-figures``) into the output directory and prints a tab-separated
summary on stdout.

Exit status: 0 success, 2 usage or configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .barriers import barrier_report
from .classify import (BLOWUP_LABEL, Classification, bisect_threshold, classify_run,
                       fit_lifespan)
from .io import (CheckpointError, ConfigError, RunConfig, checkpoint_read, checkpoint_write,
                 load_config, output_dir, with_overrides, write_csv, write_diagnostics_csv,
                 write_json, write_record_csv, write_snapshots_csv)
from .model import make_initial_data
from .solver import NONFINITE, Progress, RunRecord, run

logger = logging.getLogger("stefanduo")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
CHECKPOINT_NAME = "checkpoint.ckpt"
ERROR_LABEL = "Error"


class UsageError(Exception):
    """Bad command-line usage; maps to exit status 2."""


def _amplitudes(text: Optional[str]) -> list:
    if text is None:
        return []
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--amplitudes: not a comma-separated list of numbers: {text!r}") from None


def _fmt(x) -> str:
    if x is None:
        return "nan"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _emit(header: Sequence[str], rows) -> None:
    print("\t".join(header))
    for row in rows:
        print("\t".join(_fmt(v) for v in row))


def _figures(args, cfg: RunConfig) -> bool:
    return cfg.output.figures and not args.no_figures


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    return with_overrides(cfg, n=args.n, horizon=args.horizon, jobs=args.jobs)


def _meta(cfg: RunConfig, record: RunRecord, cls: Classification) -> dict:
    fits = {"blowup": {"T_est": cls.T_est, "exponent": cls.fit_exponent,
                       "quality": cls.fit_quality},
            "decay": {"rate_u": cls.decay_rate_u, "rate_v": cls.decay_rate_v},
            "fronts": {"h_inf_est": cls.h_inf_est, "g_inf_est": cls.g_inf_est,
                       "growth": cls.front_growth}}
    return {
        "version": __version__,
        "config": cfg.echo(),
        "config_hash": cfg.hash(),
        "termination": record.termination,
        "t_stop": record.t_stop,
        "steps": record.steps,
        "samples": len(record.samples),
        "final": {"norm_u": record.samples[-1][1], "norm_v": record.samples[-1][2],
                  "h": record.samples[-1][3], "g": record.samples[-1][4]},
        "classification": cls.as_dict(),
        "fits": fits,
    }


def _write_run(cfg: RunConfig, record: RunRecord, cls: Classification, out: Path,
               figures: bool) -> None:
    out.mkdir(parents=True, exist_ok=True)
    if "csv" in cfg.output.formats:
        write_record_csv(record, out / "record.csv", cfg.output.cadence)
        write_diagnostics_csv(record, out / "diagnostics.csv", cfg.output.cadence)
        if record.snapshots:
            write_snapshots_csv(record, out / "snapshots.csv")
    if "json" in cfg.output.formats:
        write_json(_meta(cfg, record, cls), out / "meta.json")
    if figures:
        from .plotting import plot_run
        plot_run(record, out / "run.png")


RUN_HEADER = ("A", "termination", "t_stop", "steps", "label", "T_est", "decay_rate_u",
              "h_final", "g_final")


def _run_row(record: RunRecord, cls: Classification) -> tuple:
    return (record.data.A, record.termination, record.t_stop, record.steps, cls.label,
            cls.T_est, cls.decay_rate_u, record.samples[-1][3], record.samples[-1][4])


def _simulate(cfg: RunConfig, out: Path, figures: bool, resume: Optional[Progress] = None) -> int:
    data = make_initial_data(cfg.spec, cfg.family, cfg.A)
    every = cfg.output.checkpoint_every
    callback = None
    if every:
        out.mkdir(parents=True, exist_ok=True)
        digest = cfg.hash()

        def callback(progress):
            checkpoint_write(progress, out / CHECKPOINT_NAME, digest)

    record = run(cfg.spec, data, cfg.ctrl, resume=resume, on_checkpoint=callback,
                 checkpoint_every=every)
    cls = classify_run(record, cfg.classify)
    _write_run(cfg, record, cls, out, figures)
    _emit(RUN_HEADER, [_run_row(record, cls)])
    if record.termination == NONFINITE:
        logger.error("non-finite values at t=%.6g", record.t_stop)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load(args)
    amps = _amplitudes(args.amplitudes)
    if len(amps) > 1:
        raise UsageError("simulate takes at most one amplitude")
    if amps:
        cfg = with_overrides(cfg, A=amps[0])
    return _simulate(cfg, output_dir(args.out, cfg), _figures(args, cfg))


def cmd_resume(args) -> int:
    cfg = _load(args)
    out = output_dir(args.out, cfg)
    path = Path(args.checkpoint) if args.checkpoint else out / CHECKPOINT_NAME
    progress = checkpoint_read(path, cfg.hash())
    if progress.state.n != cfg.ctrl.n:
        raise ConfigError("checkpoint resolution does not match solver.n")
    return _simulate(cfg, out, _figures(args, cfg), resume=progress)


def _sweep_task(args):
    cfg, A = args
    try:
        record = run(cfg.spec, make_initial_data(cfg.spec, cfg.family, A), cfg.ctrl)
        return record, classify_run(record, cfg.classify), ""
    except (ValueError, ArithmeticError) as exc:
        return None, None, f"{type(exc).__name__}: {exc}"


def _map(fn, tasks, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def _row_dir(out: Path, A: float) -> Path:
    return out / "runs" / f"A_{A!r}"


PHASE_HEADER = ("A", "label", "termination", "T_est", "decay_rate_u", "decay_rate_v",
                "h_final", "g_final", "error")


def cmd_sweep(args) -> int:
    cfg = _load(args)
    amps = _amplitudes(args.amplitudes)
    if not amps:
        raise UsageError("sweep needs a non-empty --amplitudes list")
    out = output_dir(args.out, cfg)
    figures = _figures(args, cfg)
    results = _map(_sweep_task, [(cfg, A) for A in amps], cfg.jobs)
    rows, entries = [], []
    ok = 0
    for A, (record, cls, err) in zip(amps, results):
        if record is None:
            rows.append((A, ERROR_LABEL, "", None, None, None, None, None, err))
            entries.append({"A": A, "label": ERROR_LABEL, "error": err})
            continue
        _write_run(with_overrides(cfg, A=A), record, cls, _row_dir(out, A), figures)
        if record.termination != NONFINITE:
            ok += 1
        h, g = record.samples[-1][3], record.samples[-1][4]
        rows.append((A, cls.label, record.termination, cls.T_est, cls.decay_rate_u,
                     cls.decay_rate_v, h, g, cls.reason))
        entries.append({"A": A, "label": cls.label, "termination": record.termination,
                        "T_est": cls.T_est, "decay_rate_u": cls.decay_rate_u,
                        "decay_rate_v": cls.decay_rate_v, "h_final": h, "g_final": g,
                        "reason": cls.reason})
    out.mkdir(parents=True, exist_ok=True)
    if "csv" in cfg.output.formats:
        write_csv(out / "phase.csv", PHASE_HEADER, rows)
    if "json" in cfg.output.formats:
        write_json({"config": cfg.echo(), "rows": entries}, out / "sweep.json")
    if figures:
        from .plotting import plot_phase
        done = [(r[0], r[1]) for r in rows]
        plot_phase([a for a, _ in done], [lab for _, lab in done], out / "phase.png")
    _emit(PHASE_HEADER, rows)
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_bisect(args) -> int:
    cfg = _load(args)
    if args.a_lo is None or args.a_hi is None:
        raise UsageError("bisect needs --a-lo and --a-hi")
    out = output_dir(args.out, cfg)
    try:
        bracket = bisect_threshold(cfg.spec, cfg.family, args.a_lo, args.a_hi, args.tol,
                                   cfg.ctrl, cfg.classify, cfg.jobs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    history = sorted(bracket.history)
    out.mkdir(parents=True, exist_ok=True)
    if "json" in cfg.output.formats:
        write_json({"config": cfg.echo(), "A_lo": bracket.A_lo, "A_hi": bracket.A_hi,
                    "tol": args.tol, "widened": bracket.widened,
                    "history": [{"A": A, "label": lab} for A, lab in history]},
                   out / "bisect.json")
    if "csv" in cfg.output.formats:
        write_csv(out / "bisect.csv", ("A", "label"), history)
    if _figures(args, cfg):
        from .plotting import plot_phase
        plot_phase([A for A, _ in history], [lab for _, lab in history], out / "phase.png",
                   threshold=0.5 * (bracket.A_lo + bracket.A_hi))
    _emit(("A_lo", "A_hi", "widened", "evaluations"),
          [(bracket.A_lo, bracket.A_hi, bracket.widened, len(history))])
    return EXIT_OK


def cmd_lifespan(args) -> int:
    cfg = _load(args)
    amps = _amplitudes(args.amplitudes)
    if len(amps) < 3:
        raise UsageError("lifespan needs >= 3 amplitudes")
    if any(A <= 0 for A in amps):
        raise UsageError("lifespan amplitudes must be positive")
    out = output_dir(args.out, cfg)
    results = _map(_sweep_task, [(cfg, A) for A in amps], cfg.jobs)
    rows, failed = [], []
    for A, (record, cls, err) in zip(amps, results):
        if record is None:
            failed.append(f"A={A:g}: {err}")
            rows.append((A, ERROR_LABEL, None, None, None))
            continue
        rows.append((A, cls.label, cls.T_est, cls.fit_exponent, cls.fit_quality))
        if cls.label != BLOWUP_LABEL:
            failed.append(f"A={A:g} classified {cls.label}")
    slope = intercept = None
    if not failed:
        slope, intercept = fit_lifespan([r[0] for r in rows], [r[2] for r in rows])
    out.mkdir(parents=True, exist_ok=True)
    header = ("A", "label", "T_est", "fit_exponent", "fit_quality")
    if "csv" in cfg.output.formats:
        write_csv(out / "lifespan.csv", header, rows)
    if "json" in cfg.output.formats:
        write_json({"config": cfg.echo(), "slope": slope, "intercept": intercept,
                    "runs": [dict(zip(header, r)) for r in rows], "failures": failed},
                   out / "lifespan.json")
    if _figures(args, cfg):
        from .plotting import plot_lifespan
        plot_lifespan([r[0] for r in rows], [r[2] if r[2] is not None else float("nan")
                                             for r in rows], out / "lifespan.png",
                      slope, intercept)
    _emit(header, rows)
    _emit(("slope", "intercept"), [(slope, intercept)])
    if failed:
        logger.error("lifespan fit needs blow-up at every amplitude: %s", "; ".join(failed))
        return EXIT_CONFIG
    return EXIT_OK


def cmd_barriers(args) -> int:
    cfg = _load(args)
    data = make_initial_data(cfg.spec, cfg.family, cfg.A)
    report = barrier_report(cfg.spec, data)
    out = output_dir(args.out, cfg)
    out.mkdir(parents=True, exist_ok=True)
    if "json" in cfg.output.formats:
        write_json({"config": cfg.echo(), "families": report}, out / "barriers.json")
    rows = []
    for family in ("blowup", "fast", "cosh"):
        entry = report[family]
        extremum = entry.get("residual_max", entry.get("residual_min"))
        kind = "residual_max" if "residual_max" in entry else (
            "residual_min" if "residual_min" in entry else "")
        rows.append((family, entry["status"], kind, extremum))
    _emit(("family", "status", "residual", "value"), rows)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "bisect": cmd_bisect,
            "lifespan": cmd_lifespan, "barriers": cmd_barriers, "resume": cmd_resume}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stefanduo",
        description="Two-front reaction-diffusion simulations and barrier checks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="INI config file")
    common.add_argument("--out", metavar="DIR",
                        help="output directory (default: $STEFANDUO_OUT, then output.directory)")
    common.add_argument("--jobs", type=int, metavar="N", help="worker processes")
    common.add_argument("--n", type=int, metavar="INT", help="grid intervals per component")
    common.add_argument("--horizon", type=float, metavar="FLOAT", help="final time")
    common.add_argument("--amplitudes", metavar="CSVLIST", help="comma-separated amplitudes")
    common.add_argument("--no-figures", action="store_true", help="skip PNG figures")
    common.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="one run")
    sub.add_parser("sweep", parents=[common], help="phase table over --amplitudes")
    p = sub.add_parser("bisect", parents=[common], help="bracket the critical amplitude")
    p.add_argument("--a-lo", type=float, required=True, help="amplitude with a global solution")
    p.add_argument("--a-hi", type=float, required=True, help="amplitude that blows up")
    p.add_argument("--tol", type=float, default=0.01, help="relative bracket width")
    sub.add_parser("lifespan", parents=[common], help="blow-up time against amplitude")
    sub.add_parser("barriers", parents=[common], help="barrier validity and residuals")
    p = sub.add_parser("resume", parents=[common], help="continue from a checkpoint")
    p.add_argument("--checkpoint", metavar="PATH",
                   help=f"checkpoint file (default: OUT/{CHECKPOINT_NAME})")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if args.jobs is not None and args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, CheckpointError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
