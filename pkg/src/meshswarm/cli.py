"""Command line interface for running trials, sweeps, and weight adaptation."""

import argparse
import json
import sys
from typing import List, Optional

from .adaptation import (ADAPTED_VARIABLES, AdaptationError, run_adaptation,
                         scenario_evaluator)
from .costs import CostProfile
from .scenario import ConfigError, load_scenario
from .trial import summarize
from . import experiments as ex


def _load_profile(path: str) -> CostProfile:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("cannot read profile %s: %s" % (path, exc))
    except json.JSONDecodeError as exc:
        raise ConfigError("profile %s is not valid JSON: %s" % (path, exc))
    if not isinstance(data, dict):
        raise ConfigError("profile %s must be a JSON object" % path)
    try:
        return CostProfile.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise ConfigError("profile %s: %s" % (path, exc))


def _profile_label(path: str) -> str:
    name = path.replace("\\", "/").rsplit("/", 1)[-1]
    if name.endswith(".json"):
        name = name[: -len(".json")]
    return name or "profile"


def _parse_values(text: str) -> List[float]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(float(part))
        except ValueError:
            raise ConfigError("sweep value %r is not a number" % part)
    if not out:
        raise ConfigError("no sweep values given")
    return out


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario).resolved()
    run_dir = ex.make_run_dir(ex.output_root(args.out), scenario.name)
    ex.write_config(run_dir, scenario)

    if args.seed is not None:
        seeds = [int(args.seed)]
    else:
        seeds = ex.trial_seeds(scenario)

    outcomes = ex.run_batch(scenario, scenario.profile, seeds,
                            workers=args.workers)
    ex.write_trials(run_dir, outcomes)
    ex.write_trials_csv(run_dir, outcomes)
    for out in outcomes:
        print(
            "trial seed=%d searched=%.1f%% collisions=%d duration=%.2fs E_c=%.4f"
            % (
                out.seed,
                100.0 * out.fraction_searched,
                out.collisions,
                out.duration_s,
                out.heuristic,
            )
        )
    stats = summarize(outcomes)
    print(
        "summary n=%d mean_duration=%.2fs pct_searched=%.1f%% "
        "mean_collisions=%.2f mean_E_c=%.4f"
        % (
            len(outcomes),
            stats["mu_t"],
            stats["pct_searched"],
            stats["mean_collisions"],
            stats["mean_E_c"],
        )
    )
    print("wrote %s" % run_dir)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario).resolved()
    values = _parse_values(args.values)
    profiles = [("default", scenario.profile)]
    for path in args.profile or []:
        profiles.append((_profile_label(path), _load_profile(path)))

    run_dir = ex.make_run_dir(ex.output_root(args.out), scenario.name)
    ex.write_config(run_dir, scenario)
    rows, _ = ex.sweep(
        scenario, args.axis, values, profiles, workers=args.workers
    )
    csv_path = ex.write_sweep_csv(run_dir, rows)
    for row in rows:
        print(
            "%s %s=%g mean_duration=%.2fs pct_searched=%.1f%% "
            "mean_collisions=%.2f"
            % (
                row["profile"],
                args.axis,
                row["value"],
                row["mu_t"],
                row["pct_searched"],
                row["mean_collisions"],
            )
        )
    from .plots import render_run_dir

    for fig_path in render_run_dir(run_dir):
        print("wrote %s" % fig_path)
    print("wrote %s" % csv_path)
    return 0


def _cmd_adapt(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario).resolved()
    run_dir = ex.make_run_dir(ex.output_root(args.out), scenario.name)
    ex.write_config(run_dir, scenario)

    result = run_adaptation(scenario.asa, scenario=scenario,
                            workers=args.workers)
    trace_path, profile_path = ex.write_adapt_outputs(run_dir, result)

    # Baseline score for the unadapted profile; iteration -1 keeps its
    # trial seeds disjoint from every annealing iteration.
    evaluate = scenario_evaluator(scenario.asa, scenario, workers=args.workers)
    initial_e = evaluate(scenario.profile, -1)
    print("initial profile E_c=%.4f" % initial_e)
    print("adapted profile E_c=%.4f" % result.best_e)
    print(
        "adapted variables: "
        + " ".join(
            "%s=%.4f" % (name, getattr(result.best_profile, name))
            for name in sorted(ADAPTED_VARIABLES)
        )
    )
    from .plots import render_run_dir

    for fig_path in render_run_dir(run_dir):
        print("wrote %s" % fig_path)
    print("wrote %s" % trace_path)
    print("wrote %s" % profile_path)
    return 0


def _cmd_plotdata(args: argparse.Namespace) -> int:
    from .plots import render_run_dir, write_tidy

    made = render_run_dir(args.run_dir, out_dir=args.out)
    tidy = write_tidy(args.run_dir, out_dir=args.out)
    if tidy is not None:
        made.append(tidy)
    if not made:
        print("no sweep.csv or adapt_trace.csv under %s" % args.run_dir,
              file=sys.stderr)
        return 3
    for path in made:
        print("wrote %s" % path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meshswarm",
        description="Decentralized search-swarm simulator and weight tuner.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run trials for one scenario")
    run_p.add_argument("--scenario", required=True, help="scenario JSON file")
    run_p.add_argument("--seed", type=int, default=None,
                       help="run a single trial with this seed")
    run_p.add_argument("--out", default=None, help="output root directory")
    run_p.add_argument("--workers", type=int, default=1,
                       help="parallel trial processes")
    run_p.set_defaults(func=_cmd_run)

    sweep_p = sub.add_parser("sweep", help="sweep one axis across values")
    sweep_p.add_argument("--scenario", required=True)
    sweep_p.add_argument("--axis", required=True, choices=ex.SWEEP_AXES)
    sweep_p.add_argument("--values", required=True,
                         help="comma separated axis values")
    sweep_p.add_argument("--profile", action="append", default=[],
                         help="extra cost-profile JSON (repeatable)")
    sweep_p.add_argument("--out", default=None)
    sweep_p.add_argument("--workers", type=int, default=1)
    sweep_p.set_defaults(func=_cmd_sweep)

    adapt_p = sub.add_parser("adapt", help="adapt cost weights on a scenario")
    adapt_p.add_argument("--scenario", required=True)
    adapt_p.add_argument("--out", default=None)
    adapt_p.add_argument("--workers", type=int, default=1,
                         help="parallel trials per evaluation")
    adapt_p.set_defaults(func=_cmd_adapt)

    plot_p = sub.add_parser("plotdata",
                            help="render figures and tidy CSV for a run dir")
    plot_p.add_argument("run_dir", help="directory produced by run/sweep/adapt")
    plot_p.add_argument("--out", default=None,
                        help="write figures here instead of the run dir")
    plot_p.set_defaults(func=_cmd_plotdata)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except AdaptationError as exc:
        print("adaptation failed: %s" % exc, file=sys.stderr)
        return 3
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
