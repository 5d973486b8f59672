"""Command line front end.

Exit codes: 0 success, 2 config or usage problem, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys

import numpy as np

from . import __version__
from .analytics import FORMULA_IDS, theory_curve
from .config import ConfigError, LoadedConfig, load_config
from .constellation import SUPPORTED_ORDERS, build_qam
from .framing import frame_user_data
from .mapping import (
    build_address_bit_plan,
    build_qos_plan,
    capacity_enhancement,
    format_lookup_table,
    throughput_reduction,
)
from .report import multi_report_csv, report_csv, summary_text, write_text_atomic
from .simulate import ExperimentConfig, compare_user_scaling, run_experiment
from .plotting import save_ber_figure, save_constellation_figure, save_theory_figure


def _emit(text: str, out: str | None, quiet: bool) -> None:
    """Write to --out when given, else stdout; --quiet only mutes stdout."""
    if out:
        write_text_atomic(out, text)
        if not quiet:
            print(f"wrote {out}")
    elif not quiet:
        print(text, end="" if text.endswith("\n") else "\n")


def _figure_path(csv_path: str) -> str:
    root, _ = os.path.splitext(csv_path)
    return root + ".png"


def _select_runs(loaded: LoadedConfig, run: str | None) -> dict[str, ExperimentConfig]:
    if run is not None:
        if run not in loaded.runs:
            known = ", ".join(sorted(loaded.runs)) or "<none>"
            raise ConfigError(f"{loaded.path}: no run named {run!r} (have: {known})")
        return {run: loaded.runs[run]}
    return dict(loaded.runs)


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    if getattr(args, "seed", None) is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if getattr(args, "snr_mode", None) is not None:
        config = dataclasses.replace(
            config, sweep=dataclasses.replace(config.sweep, mode=args.snr_mode)
        )
    return config


# default capacity-table rows: (order, data word width) pairs
_CAPACITY_ROWS = (
    (64, 4), (64, 3), (64, 2),
    (256, 6), (256, 4), (256, 2),
    (1024, 8), (1024, 6), (1024, 4),
)


def _cmd_capacity_table(args) -> int:
    if args.bits is not None:
        if args.order is None:
            raise ConfigError("--bits needs --order")
        try:
            value = capacity_enhancement(args.order, args.bits)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        _emit(f"{value}\n", args.out, args.quiet)
        return 0
    if args.order is not None:
        d = args.order.bit_length() - 1
        pairs = [(args.order, b) for b in range(1, d + 1)]
    else:
        pairs = list(_CAPACITY_ROWS)
    lines = [
        f"{order}-QAM, B={b} -> {capacity_enhancement(order, b)}" for order, b in pairs
    ]
    _emit("\n".join(lines) + "\n", args.out, args.quiet)
    return 0


def _cmd_throughput(args) -> int:
    orders = [args.order] if args.order else list(SUPPORTED_ORDERS)
    lines = []
    for order in orders:
        d = order.bit_length() - 1
        for a in range(0, d):
            lines.append(f"{order}-QAM, A={a} -> {throughput_reduction(order, a)}")
    _emit("\n".join(lines) + "\n", args.out, args.quiet)
    return 0


def _cmd_theory(args) -> int:
    snr_db = tuple(
        args.start_db + k * args.step_db
        for k in range(int(math.floor((args.stop_db - args.start_db) / args.step_db + 1e-9)) + 1)
    )
    try:
        curve = theory_curve(
            args.formula,
            snr_db,
            order=args.order,
            data_bits=args.data_bits,
            address_bits=args.address_bits,
            snr_mode=args.snr_mode or "symbol",
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    lines = [f"snr_db,{args.formula}"]
    for x, y in zip(curve.snr_db, curve.values):
        lines.append(f"{x:.10g},{y:.10g}")
    _emit("\n".join(lines) + "\n", args.out, args.quiet)
    if args.out and not args.no_plot:
        fig_path = _figure_path(args.out)
        save_theory_figure(
            {args.formula: (curve.snr_db, curve.values)}, fig_path, curve.snr_mode
        )
        if not args.quiet:
            print(f"wrote {fig_path}")
    return 0


def _plan_from_args(args):
    if args.config:
        loaded = load_config(args.config)
        runs = _select_runs(loaded, args.run)
        if len(runs) != 1:
            raise ConfigError(f"{args.config}: pick one run with --run")
        config = next(iter(runs.values()))
        return config.plan.build(config.order), config.order
    if args.order is None:
        raise ConfigError("need --config or --order")
    if args.address_positions:
        positions = tuple(int(p) for p in args.address_positions.split(","))
        plan = build_address_bit_plan(args.order, positions)
    elif args.qos_bits:
        bits = tuple(int(b) for b in args.qos_bits.split(","))
        plan = build_qos_plan(args.order, bits)
    else:
        raise ConfigError("need --address-positions or --qos-bits with --order")
    return plan, args.order


def _cmd_map_table(args) -> int:
    plan, _ = _plan_from_args(args)
    _emit(format_lookup_table(plan), args.out, args.quiet)
    return 0


def _cmd_constellation_dump(args) -> int:
    plan = None
    if args.config or args.address_positions or args.qos_bits:
        plan, order = _plan_from_args(args)
    else:
        if args.order is None:
            raise ConfigError("need --order or --config")
        order = args.order
    constellation = build_qam(order)
    lines = ["label,bits,i,q,user_id"]
    for label in range(order):
        point = constellation.points[label]
        owner = -1
        if plan is not None:
            idx = int(plan.owner_of_label[label])
            owner = plan.users[idx].user_id if idx >= 0 else -1
        lines.append(
            f"{label},{label:0{constellation.bits_per_symbol}b},"
            f"{point.real:.10g},{point.imag:.10g},{owner}"
        )
    _emit("\n".join(lines) + "\n", args.out, args.quiet)
    if args.out and not args.no_plot:
        fig_path = _figure_path(args.out)
        save_constellation_figure(constellation, fig_path, plan)
        if not args.quiet:
            print(f"wrote {fig_path}")
    return 0


def _cmd_frame_dump(args) -> int:
    loaded = load_config(args.config)
    runs = _select_runs(loaded, args.run)
    if len(runs) != 1:
        raise ConfigError(f"{args.config}: pick one run with --run")
    config = _apply_overrides(next(iter(runs.values())), args)
    plan = config.plan.build(config.order)
    user_ids = [u.user_id for u in plan.users]
    schedule = config.schedule.build(user_ids, config.geometry.symbols_per_slot)
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0, 0]))
    streams = {}
    for user in plan.users:
        need = schedule.symbols_of(user.user_id) * config.geometry.subcarriers
        streams[user.user_id] = rng.integers(0, 1 << user.data_bits, size=need)
    grid = frame_user_data(plan, schedule, config.geometry, streams)
    lines = ["# one OFDM symbol per line, comma-separated constellation labels"]
    for k in range(grid.shape[0]):
        owner = schedule.assignments[k]
        row = ",".join(str(int(v)) for v in grid[k])
        lines.append(f"{row}  # user {owner}")
    _emit("\n".join(lines) + "\n", args.out, args.quiet)
    return 0


def _cmd_ber_sweep(args) -> int:
    loaded = load_config(args.config)
    runs = _select_runs(loaded, args.run)
    reports = {}
    for name, config in runs.items():
        config = _apply_overrides(config, args)
        reports[name] = run_experiment(config, workers=args.workers)
        if not args.quiet:
            title = name or "run"
            print(f"[{title}]")
            print(summary_text(reports[name]), end="")
    if len(reports) == 1:
        text = report_csv(next(iter(reports.values())))
    else:
        text = multi_report_csv(reports)
    write_text_atomic(args.out, text)
    if not args.quiet:
        print(f"wrote {args.out}")
    if not args.no_plot:
        fig_path = _figure_path(args.out)
        save_ber_figure(reports, fig_path)
        if not args.quiet:
            print(f"wrote {fig_path}")
    return 0


def _cmd_user_scaling(args) -> int:
    loaded = load_config(args.config)
    runs = _select_runs(loaded, args.run)
    if len(runs) != 1:
        raise ConfigError(f"{args.config}: pick one run with --run")
    config = _apply_overrides(next(iter(runs.values())), args)
    counts = tuple(int(c) for c in args.counts.split(","))
    scaled = compare_user_scaling(config, counts, workers=args.workers)
    reports = {f"users{count}": report for count, report in scaled.items()}
    if not args.quiet:
        for name, report in reports.items():
            print(f"[{name}]")
            print(summary_text(report), end="")
    write_text_atomic(args.out, multi_report_csv(reports))
    if not args.quiet:
        print(f"wrote {args.out}")
    if not args.no_plot:
        fig_path = _figure_path(args.out)
        save_ber_figure(reports, fig_path)
        if not args.quiet:
            print(f"wrote {fig_path}")
    return 0


def _add_common(sub):
    sub.add_argument("--out", default=None,
                     help="output file path (default: print to stdout)")
    sub.add_argument("--quiet", action="store_true", help="suppress stdout chatter")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csmalink",
        description="Link-level simulator for constellation-partitioned multiple access.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    cap = commands.add_parser(
        "capacity-table", help="users per resource block for each data word width"
    )
    cap.add_argument("--order", type=int, choices=SUPPORTED_ORDERS, default=None)
    cap.add_argument("--bits", type=int, default=None,
                     help="print just the user count for this data word width")
    _add_common(cap)
    cap.set_defaults(func=_cmd_capacity_table)

    thr = commands.add_parser(
        "throughput", help="per-user throughput ratio for each address width"
    )
    thr.add_argument("--order", type=int, choices=SUPPORTED_ORDERS, default=None)
    _add_common(thr)
    thr.set_defaults(func=_cmd_throughput)

    theo = commands.add_parser("theory", help="closed-form error-rate curves")
    theo.add_argument("--formula", choices=FORMULA_IDS, required=True)
    theo.add_argument("--order", type=int, default=None)
    theo.add_argument("--data-bits", type=int, default=None)
    theo.add_argument("--address-bits", type=int, default=None)
    theo.add_argument("--start-db", type=float, default=0.0)
    theo.add_argument("--stop-db", type=float, default=20.0)
    theo.add_argument("--step-db", type=float, default=1.0)
    theo.add_argument("--snr-mode", choices=("symbol", "databit"), default=None)
    theo.add_argument("--no-plot", action="store_true")
    _add_common(theo)
    theo.set_defaults(func=_cmd_theory)

    mapt = commands.add_parser("map-table", help="dump a plan as lookup-table text")
    mapt.add_argument("--config", default=None)
    mapt.add_argument("--run", default=None)
    mapt.add_argument("--order", type=int, default=None)
    mapt.add_argument("--address-positions", default=None,
                      help="comma-separated label bit positions")
    mapt.add_argument("--qos-bits", default=None,
                      help="comma-separated data word widths, one per user")
    _add_common(mapt)
    mapt.set_defaults(func=_cmd_map_table)

    dump = commands.add_parser(
        "constellation-dump", help="labels and coordinates, optionally with owners"
    )
    dump.add_argument("--order", type=int, choices=SUPPORTED_ORDERS, default=None)
    dump.add_argument("--config", default=None)
    dump.add_argument("--run", default=None)
    dump.add_argument("--address-positions", default=None)
    dump.add_argument("--qos-bits", default=None)
    dump.add_argument("--no-plot", action="store_true")
    _add_common(dump)
    dump.set_defaults(func=_cmd_constellation_dump)

    frame = commands.add_parser("frame-dump", help="one slot's label grid")
    frame.add_argument("--config", required=True)
    frame.add_argument("--run", default=None)
    frame.add_argument("--seed", type=int, default=None)
    _add_common(frame)
    frame.set_defaults(func=_cmd_frame_dump)

    sweep = commands.add_parser("ber-sweep", help="Monte Carlo error-rate sweep")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--run", default=None, help="run one named run from the config")
    sweep.add_argument("--seed", type=int, default=None)
    sweep.add_argument("--snr-mode", choices=("symbol", "databit"), default=None)
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--no-plot", action="store_true")
    sweep.add_argument("--out", default="ber_sweep.csv")
    sweep.add_argument("--quiet", action="store_true")
    sweep.set_defaults(func=_cmd_ber_sweep)

    scale = commands.add_parser(
        "user-scaling", help="rerun one sweep with 1..n users sharing the block"
    )
    scale.add_argument("--config", required=True)
    scale.add_argument("--run", default=None)
    scale.add_argument("--counts", default="1,4,8")
    scale.add_argument("--seed", type=int, default=None)
    scale.add_argument("--snr-mode", choices=("symbol", "databit"), default=None)
    scale.add_argument("--workers", type=int, default=1)
    scale.add_argument("--no-plot", action="store_true")
    scale.add_argument("--out", default="user_scaling.csv")
    scale.add_argument("--quiet", action="store_true")
    scale.set_defaults(func=_cmd_user_scaling)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
