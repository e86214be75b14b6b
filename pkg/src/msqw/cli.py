"""Command-line interface: ``msqw <subcommand> [options]``.

Every subcommand writes delimited text (CSV) to ``--out`` or stdout and a JSON
summary to ``--summary`` (default: next to ``--out`` with a ``.json`` suffix,
otherwise stderr). Reports from ``sweep``, ``fit`` and ``trace`` also render a
PNG figure beside the CSV unless ``--no-plot`` is given. Any ``--flag`` can be
set in a flat ``key = value`` file passed with ``--config``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import ising, stats
from .evolve import PreparedProblem
from .exact import p_inf_nested
from .experiment import (SweepConfig, curate, evaluate_instance, fit_scaling, fits_to_csv,
                         median_table, read_config, read_records, records_to_csv, run_sweep)
from .schedule import HardwareSchedule, build_schedule, default_alpha, hardware_stage_times

log = logging.getLogger("msqw")


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(" ", "").split(",") if x]


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


class Report:
    def __init__(self, args, command: str):
        self.args = args
        self.summary = {"command": command}
        self.errors: list[str] = []
        self.start = time.perf_counter()

    @property
    def out(self) -> Path | None:
        return Path(self.args.out) if self.args.out else None

    def write_csv(self, text: str) -> None:
        if self.out is None:
            sys.stdout.write(text)
        else:
            self.out.parent.mkdir(parents=True, exist_ok=True)
            self.out.write_text(text)
            self.summary["csv"] = str(self.out)

    def figure_path(self, suffix: str = "") -> Path | None:
        if self.args.no_plot or self.out is None:
            return None
        return self.out.with_name(self.out.stem + suffix + ".png")

    def finish(self) -> int:
        self.summary["errors"] = self.errors
        self.summary["wall_time"] = round(time.perf_counter() - self.start, 3)
        text = json.dumps(self.summary, indent=1, default=str) + "\n"
        if self.args.summary:
            Path(self.args.summary).write_text(text)
        elif self.out is not None and self.out.suffix != ".json":
            self.out.with_suffix(".json").write_text(text)
        else:
            sys.stderr.write(text)
        return 1 if self.errors else 0


def _per_instance(report: Report, problems, fn):
    rows = []
    for p in problems:
        try:
            rows.extend(fn(p))
        except Exception as exc:
            msg = f"{p.label}: {type(exc).__name__}: {exc}"
            log.error(msg)
            report.errors.append(msg)
    return rows


def _problems(args):
    return ising.load_problems(args.inputs, scale_sqrt2=args.scale_sqrt2)


# ---- subcommands --------------------------------------------------------

def cmd_gen(args, report):
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    problems = ising.sk_generate(args.n, args.seed, args.count, scale_sqrt2=args.scale_sqrt2)
    paths = []
    for p in problems:
        if args.format == "raw":
            path = out_dir / f"{p.label}.bin"
            ising.save_raw_binary(p, path)
        else:
            path = out_dir / f"{p.label}.json"
            ising.save_json(p, path)
        paths.append(path)
    report.write_csv(_csv(["label", "n", "path"], [(p.label, p.n, str(f)) for p, f in zip(problems, paths)]))
    report.summary.update(n=args.n, count=args.count, seed=args.seed, directory=str(out_dir))


def cmd_solve(args, report):
    def row(p):
        sp = ising.brute_force_spectrum(p, cap=args.cap, keep=False)
        return [(p.label, p.n, sp.e_min, sp.e_max, sp.min_gap, len(sp.ground_indices),
                 " ".join(map(str, sp.ground_indices)))]
    rows = _per_instance(report, _problems(args), row)
    report.write_csv(_csv(["label", "n", "e_min", "e_max", "min_gap", "ground_count", "ground_indices"], rows))
    report.summary["instances"] = len(rows)


def cmd_stats(args, report):
    def row(p):
        s = stats.spin_stats(p)
        spreads = []
        for method in stats.SPREAD_METHODS:
            try:
                spreads.append(stats.estimate_spread(p, method).value)
            except ValueError:
                spreads.append(math.nan)
        return [(p.label, p.n, s.m2, s.m3, s.m4, s.m5, s.delta_sq, s.kurtosis, *spreads)]
    rows = _per_instance(report, _problems(args), row)
    header = ["label", "n", "m2", "m3", "m4", "m5", "delta_sq", "kurtosis",
              *(f"spread_{m.replace('-', '_')}" for m in stats.SPREAD_METHODS)]
    report.write_csv(_csv(header, rows))
    report.summary["instances"] = len(rows)


def cmd_schedule(args, report):
    def rows(p):
        out = []
        for m in _int_list(args.stages):
            sch = build_schedule(p, m, args.spread_method)
            out.extend((p.label, m, k, g, t, de) for k, g, t, de in sch.rows())
        return out
    data = _per_instance(report, _problems(args), rows)
    report.write_csv(_csv(["label", "m", "k", "gamma", "t", "delta_e"], data))


def cmd_run(args, report):
    config = SweepConfig(n_min=1, n_max=1, seed=args.seed, spread_method=args.spread_method,
                         samples=args.samples, mode=args.mode, cap=args.cap)

    def rows(p):
        return [(p.label, p.n, r.m, r.success_prob, r.stderr, r.samples)
                for r in evaluate_instance(p, config, _int_list(args.stages))]
    data = _per_instance(report, _problems(args), rows)
    report.write_csv(_csv(["label", "n", "m", "success_prob", "stderr", "samples"], data))
    report.summary.update(mode=args.mode, samples=args.samples, seed=args.seed)


def _sweep_config(args) -> SweepConfig:
    return SweepConfig(
        n_min=args.n_min, n_max=args.n_max, stages=_int_list(args.stages), instances=args.instances,
        seed=args.seed, spread_method=args.spread_method, samples=args.samples, mode=args.mode,
        dataset=args.dataset, gap_threshold=args.gap_threshold, data=args.data,
        gamma_override=args.gamma_override, scale_sqrt2=args.scale_sqrt2, workers=args.workers,
        cap=args.cap)


def cmd_sweep(args, report):
    config = _sweep_config(args)
    existing = []
    if args.resume and report.out is not None and report.out.exists():
        existing = read_records(report.out)
    outcome = run_sweep(config, existing)
    report.errors.extend(outcome.errors)
    report.write_csv(records_to_csv(outcome.records))
    points = median_table(outcome.records, args.resamples, args.seed)
    report.summary.update(
        config={k: v for k, v in vars(config).items()},
        records=len(outcome.records), skipped=outcome.skipped,
        compute_time=round(sum(r.wall_time for r in outcome.records), 3),
        medians=[vars(p) for p in points])
    fig = report.figure_path()
    if fig is not None and points:
        from .plotting import plot_medians
        plot_medians(points, fig, title=f"{config.dataset}, {config.mode}")
        report.summary["figure"] = str(fig)


def cmd_fit(args, report):
    records = read_records(args.input)
    fits = fit_scaling(records)
    report.write_csv(fits_to_csv(fits))
    points = median_table(records, args.resamples, args.seed)
    report.summary.update(fits=[vars(f) for f in fits])
    fig = report.figure_path()
    if fig is not None:
        from .plotting import plot_fits, plot_medians
        plot_fits(fits, fig)
        plot_medians(points, report.figure_path("_medians"))
        report.summary["figures"] = [str(fig), str(report.figure_path("_medians"))]


def cmd_trace(args, report):
    from .evolve import graph_energy_trace

    problems = _problems(args)
    if len(problems) != 1:
        log.warning("trace uses the first of %d instances", len(problems))
    p = problems[0]
    dsq = stats.delta_sq(p)
    t_s = math.sqrt(4 * p.n / dsq)
    gamma = args.gamma if args.gamma is not None else build_schedule(p, 1, args.spread_method).gammas[0]
    t_max = args.t_max if args.t_max is not None else 2.0 * t_s
    trace = graph_energy_trace(p, gamma, t_max, args.steps)
    report.write_csv(_csv(["t", "e_g_simulated", "e_g_quadratic"], trace))
    report.summary.update(label=p.label, gamma=gamma, t_s=t_s, t_max=t_max)
    fig = report.figure_path()
    if fig is not None:
        from .plotting import plot_trace
        plot_trace(trace, fig, p.n, t_s)
        report.summary["figure"] = str(fig)


def cmd_pinf(args, report):
    def rows(p):
        prep = PreparedProblem.from_problem(p, args.cap)
        return [(p.label, p.n, m, p_inf_nested(prep, build_schedule(p, m, args.spread_method).gammas,
                                               grouped=args.grouped))
                for m in _int_list(args.stages)]
    data = _per_instance(report, _problems(args), rows)
    report.write_csv(_csv(["label", "n", "m", "p_inf"], data))


def cmd_curate(args, report):
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cur = curate(args.n, args.count, args.gap_threshold, args.seed, args.cap)
    rows = []
    for p in cur.problems:
        path = out_dir / f"{p.label}.json"
        ising.save_json(p, path)
        gap = ising.brute_force_spectrum(p, args.cap, keep=False).min_gap
        rows.append((p.label, p.n, gap, str(path)))
    report.write_csv(_csv(["label", "n", "min_gap", "path"], rows))
    report.summary.update(draws=cur.draws, acceptance_rate=cur.acceptance_rate)


def cmd_hardware_time(args, report):
    hw = HardwareSchedule.from_text(args.table)

    def rows(p):
        alpha = args.alpha if args.alpha is not None else default_alpha(p.n)
        out = []
        for m in _int_list(args.stages):
            sch = build_schedule(p, m, args.spread_method)
            per_stage = hardware_stage_times(sch, hw, alpha)
            for k, ((g, t), (s_star, a, t_real)) in enumerate(zip(sch.stages, per_stage), start=1):
                out.append((p.label, m, k, g, t, s_star, a, t_real))
            out.append((p.label, m, "total", "", sum(sch.times), "", "", sum(x[2] for x in per_stage)))
        return out
    data = _per_instance(report, _problems(args), rows)
    report.write_csv(_csv(["label", "m", "k", "gamma", "t", "s_star", "A_GHz", "t_real_ns"], data))


# ---- parser -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file supplying defaults for any flag")
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--out", help="CSV output path (default: stdout)")
    common.add_argument("--summary", help="JSON summary path")
    common.add_argument("--samples", type=int, default=100, help="Monte-Carlo time samples per point")
    common.add_argument("--stages", default="1", help="comma-separated stage counts, e.g. 1,2,5")
    common.add_argument("--spread-method", default="gumbel",
                        choices=[*stats.SPREAD_METHODS, "exact"])
    common.add_argument("--mode", default="short-time-mc", choices=["short-time-mc", "infinite-time"])
    common.add_argument("--cap", type=int, default=ising.DEFAULT_CAP, help="largest n for 2^n storage")
    common.add_argument("--scale-sqrt2", action="store_true", help="multiply couplings by sqrt(2)")
    common.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="msqw", description="Multi-stage quantum walk simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, inputs=True):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        if inputs:
            sp.add_argument("inputs", nargs="+", help="instance files (.json/.bin) or directories")
        sp.set_defaults(func=fn)
        return sp

    sp = add("gen", cmd_gen, "generate SK instances", inputs=False)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--count", type=int, default=10)
    sp.add_argument("--format", choices=["json", "raw"], default="json")
    sp.add_argument("--out-dir", default="instances")

    add("solve", cmd_solve, "exhaustive ground state, extremes and gap")
    add("stats", cmd_stats, "closed-form moments, delta_sq and spread estimates")
    add("schedule", cmd_schedule, "heuristic (gamma, t) schedule per stage")
    add("run", cmd_run, "short-time Monte-Carlo success probability")

    sp = add("sweep", cmd_sweep, "batch sweep over n and stage counts", inputs=False)
    sp.add_argument("--n-min", type=int, default=5)
    sp.add_argument("--n-max", type=int, default=10)
    sp.add_argument("--instances", type=int, default=100)
    sp.add_argument("--dataset", choices=["typical", "hard"], default="typical")
    sp.add_argument("--gap-threshold", type=float, default=0.05)
    sp.add_argument("--data", help="directory of instance files instead of generated ones")
    sp.add_argument("--gamma-override", type=float)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--resamples", type=int, default=1000)
    sp.add_argument("--resume", action="store_true", help="keep rows already in --out")

    sp = add("fit", cmd_fit, "fit ln(median P) = a n + b per stage count", inputs=False)
    sp.add_argument("--input", required=True, help="sweep CSV")
    sp.add_argument("--resamples", type=int, default=1000)

    sp = add("trace", cmd_trace, "graph-energy trace of a single-stage walk")
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--t-max", type=float)
    sp.add_argument("--steps", type=int, default=100)

    sp = add("pinf", cmd_pinf, "infinite-time average success probability")
    sp.add_argument("--grouped", action="store_true", help="treat degenerate levels as eigenspaces")

    sp = add("curate", cmd_curate, "rejection-sample small-gap SK instances", inputs=False)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--count", type=int, default=30)
    sp.add_argument("--gap-threshold", type=float, default=0.05)
    sp.add_argument("--out-dir", default="hard")

    sp = add("hardware-time", cmd_hardware_time, "walk time on an annealer schedule table")
    sp.add_argument("--table", required=True, help="s, A_GHz, B_GHz table")
    sp.add_argument("--alpha", type=float)
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        values = read_config(args.config)
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in subparser._actions}
        unknown = set(values) - known
        if unknown:
            parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
        for action in subparser._actions:
            if action.dest in values and isinstance(action, argparse._StoreTrueAction):
                values[action.dest] = values[action.dest].lower() in ("1", "true", "yes", "on")
        subparser.set_defaults(**values)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    report = Report(args, args.command)
    try:
        args.func(args, report)
    except Exception as exc:
        log.error("%s", exc)
        report.errors.append(f"{type(exc).__name__}: {exc}")
    return report.finish()


if __name__ == "__main__":
    sys.exit(main())
