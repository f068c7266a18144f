"""Command-line front end: run scenarios, compare strategies, dump gains.

All diagnostics go to stderr; trace data goes to files. Exit code 0 on
success, 1 on planning/convergence/configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from pathlib import Path

import numpy as np

from lqcharge import fts as fts_mod
from lqcharge import tracking as trk_mod
from lqcharge.battery import NoiseSpec, discretize
from lqcharge.errors import ConvergenceError, InvalidParameterError, PlanningError
from lqcharge.harness import compare_strategies, emit_csv, format_summary, run_scenario
from lqcharge.scenario import load_scenario


def _cmd_run(args):
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    trace, metrics = run_scenario(scenario)
    out = args.out or Path(args.scenario).with_suffix(".csv").name
    emit_csv(trace, out)
    print(
        f"wrote {out}: final SoC {metrics.final_soc:.4f} "
        f"(target {metrics.target_soc:.4f}, error {metrics.soc_error:.2e}), "
        f"max |health| {metrics.max_abs_health:.3e} V, "
        f"peak current {metrics.peak_current_a:.3f} A",
        file=sys.stderr,
    )
    return 0


def _cmd_compare(args):
    paths = sorted(Path(args.scenario_dir).glob("*.toml"))
    if not paths:
        print(f"no scenario files (*.toml) in {args.scenario_dir}", file=sys.stderr)
        return 1
    scenarios = []
    for p in paths:
        sc = load_scenario(p)
        if args.seed is not None:
            sc = sc.with_seed(args.seed)
        if not sc.label:
            sc = dataclasses.replace(sc, label=p.stem)
        scenarios.append(sc)
    rows, ratios = compare_strategies(scenarios)
    table = format_summary(rows, ratios)
    if args.out:
        Path(args.out).write_text(table + "\n")
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        print(table)
    return 0


def _cmd_gains(args):
    scenario = load_scenario(args.scenario)
    sys_ = discretize(scenario.params, scenario.ts)
    obj = scenario.objective
    n = obj.horizon(scenario.ts)
    out = args.out or Path(args.scenario).with_suffix(".gains.csv").name

    if scenario.strategy == "lqcwfts":
        cfg = scenario.fts
        weights = fts_mod.weight_schedule(n, cfg.q0, cfg.growth)
        sched = fts_mod.plan_fts(sys_, obj, scenario.bounds, scenario.params, weights, r=cfg.r)
        header = ["k", "f_qb", "f_qs", "h_qb", "h_qs"]
        rows = [[k, *sched.f[k], *sched.h[k]] for k in range(n)]
        note = f"terminal state ({sched.x_bar.q_b:.6g}, {sched.x_bar.q_s:.6g}) C, worst P cond {sched.p_condition:.3e}"
    elif scenario.strategy in ("lqt", "ss-lqt"):
        cfg = scenario.tracking
        ref = trk_mod.make_reference(obj, scenario.bounds, scenario.params, scenario.ts,
                                     tau_b=cfg.tau_b, tau_s=cfg.tau_s)
        q = np.diag(cfg.q_diag)
        if scenario.strategy == "lqt":
            gains = trk_mod.plan_tracking(sys_, ref, q, cfg.r, s_terminal=cfg.s_terminal_scale * q)
            note = "time-varying tracking gains"
        else:
            noise = scenario.noise or NoiseSpec()
            gains = trk_mod.plan_ss_tracking(sys_, ref, q, cfg.r, noise.w_cov, noise.v_var)
            note = (
                f"steady gains; control DARE residual {gains.control_dare.residual:.3e}, "
                f"filter DARE residual {gains.filter_dare.residual:.3e}"
            )
        header = ["k", "k_qb", "k_qs", "ks_qb", "ks_qs", "s_qb", "s_qs"]
        rows = [
            [k, *gains.feedback(k), *gains.feedforward(k), *gains.s_seq[k]]
            for k in range(n)
        ]
    else:
        print("constant-current strategy has no gain schedule", file=sys.stderr)
        return 1

    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
    print(f"wrote {out} ({note})", file=sys.stderr)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lqcharge",
        description="Health-aware LQ battery charging simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and write its trace CSV")
    p_run.add_argument("scenario", help="scenario TOML file")
    p_run.add_argument("--out", help="trace CSV path (default: scenario name with .csv)")
    p_run.add_argument("--seed", type=int, help="override the scenario seed")
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="run every scenario in a directory and tabulate")
    p_cmp.add_argument("scenario_dir", help="directory containing scenario TOML files")
    p_cmp.add_argument("--out", help="write the summary table to this file instead of stdout")
    p_cmp.add_argument("--seed", type=int, help="override every scenario seed")
    p_cmp.set_defaults(func=_cmd_compare)

    p_gains = sub.add_parser("gains", help="dump the planned gain schedule for inspection")
    p_gains.add_argument("scenario", help="scenario TOML file")
    p_gains.add_argument("--out", help="gains CSV path")
    p_gains.set_defaults(func=_cmd_gains)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PlanningError, ConvergenceError, InvalidParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
