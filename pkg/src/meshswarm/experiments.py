"""Batch orchestration: seed batches, axis sweeps and output layout.

Trial seeds derive from the scenario master seed and the trial index
only, so every axis value and profile arm sees the same seed set
(paired comparisons). Results land under
<out>/<scenario>/<timestamp>/ as trial JSON records plus CSV tables;
all JSON is written with sorted keys so reruns are byte-comparable.
"""

import csv
import dataclasses
import json
import multiprocessing
import os
import time
from typing import Dict, List, Optional, Sequence, Tuple

from .adaptation import AdaptationResult, run_adaptation
from .costs import CostProfile
from .scenario import Scenario
from .seeding import derive_seed
from .trial import TrialOutcome, run_trial, summarize

SWEEP_AXES = ("delay", "velocity_noise", "acceleration_noise", "n_agents")

SWEEP_COLUMNS = ("scenario", "profile", "axis", "value", "n_seeds",
                 "mu_t", "var_t", "pct_searched", "mean_collisions", "mean_E_c")

TRACE_COLUMNS = ("iteration", "temperature", "w_eta", "w_z", "w_g",
                 "delta_min", "c_penalty", "E_c", "accepted", "best_E_c")

TRIAL_COLUMNS = ("scenario", "seed", "duration_s", "pct_searched",
                 "collisions", "E_c")


def trial_seeds(scenario: Scenario, n: Optional[int] = None) -> List[int]:
    count = scenario.n_seeds if n is None else n
    return [derive_seed(scenario.master_seed, "trial", k) for k in range(count)]


def apply_axis(scenario: Scenario, axis: str, value: float) -> Scenario:
    """Scenario copy with one swept quantity replaced."""
    if axis == "delay":
        net = dataclasses.replace(scenario.network, mean_delay=float(value),
                                  delay_jitter=None)
        return dataclasses.replace(scenario, network=net).resolved()
    if axis == "velocity_noise":
        het = dataclasses.replace(scenario.heterogeneity,
                                  velocity_noise_sigma=float(value))
        return dataclasses.replace(scenario, heterogeneity=het)
    if axis == "acceleration_noise":
        het = dataclasses.replace(scenario.heterogeneity,
                                  acceleration_noise_sigma=float(value))
        return dataclasses.replace(scenario, heterogeneity=het)
    if axis == "n_agents":
        return dataclasses.replace(scenario, n_agents=int(value))
    raise ValueError("unknown sweep axis %r (choose from %s)"
                     % (axis, ", ".join(SWEEP_AXES)))


def _run_one(args) -> TrialOutcome:
    scenario, profile, seed, record_tile_times = args
    return run_trial(
        scenario.world, scenario.network, profile, scenario.n_agents, seed,
        heterogeneity=scenario.heterogeneity, de=scenario.de,
        weights=scenario.bid_weights, scenario_name=scenario.name,
        record_tile_times=record_tile_times,
    )


def run_batch(scenario: Scenario, profile: CostProfile, seeds: Sequence[int],
              workers: int = 1, record_tile_times: bool = False) -> List[TrialOutcome]:
    """Run one trial per seed; order of results follows the seed list."""
    jobs = [(scenario, profile, seed, record_tile_times) for seed in seeds]
    if workers <= 1 or len(jobs) <= 1:
        return [_run_one(job) for job in jobs]
    with multiprocessing.Pool(processes=workers) as pool:
        return list(pool.map(_run_one, jobs))


def sweep(scenario: Scenario, axis: str, values: Sequence[float],
          profiles: Sequence[Tuple[str, CostProfile]], workers: int = 1,
          ) -> Tuple[List[dict], Dict[Tuple[str, float], List[TrialOutcome]]]:
    """Cross every axis value with every profile arm over the shared seeds.

    Returns (summary rows, outcomes per (profile label, value)).
    """
    seeds = trial_seeds(scenario)
    rows = []
    outcomes: Dict[Tuple[str, float], List[TrialOutcome]] = {}
    for value in values:
        varied = apply_axis(scenario, axis, value)
        for label, profile in profiles:
            batch = run_batch(varied, profile, seeds, workers=workers)
            outcomes[(label, value)] = batch
            stats = summarize(batch)
            rows.append({
                "scenario": scenario.name,
                "profile": label,
                "axis": axis,
                "value": value,
                "n_seeds": len(seeds),
                "mu_t": stats["mu_t"],
                "var_t": stats["var_t"],
                "pct_searched": stats["pct_searched"],
                "mean_collisions": stats["mean_collisions"],
                "mean_E_c": stats["mean_E_c"],
            })
    return rows, outcomes


# -- output layout ---------------------------------------------------------


def output_root(explicit: Optional[str] = None) -> str:
    if explicit:
        return explicit
    return os.environ.get("MESHSWARM_OUT", "results")


def make_run_dir(root: str, scenario_name: str,
                 timestamp: Optional[str] = None) -> str:
    stamp = timestamp or time.strftime("%Y%m%d-%H%M%S")
    path = os.path.join(root, scenario_name, stamp)
    suffix = 0
    candidate = path
    while os.path.exists(candidate):
        suffix += 1
        candidate = "%s-%d" % (path, suffix)
    os.makedirs(candidate)
    return candidate


def write_json(path: str, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_trials(run_dir: str, outcomes: List[TrialOutcome]) -> List[str]:
    trials_dir = os.path.join(run_dir, "trials")
    os.makedirs(trials_dir, exist_ok=True)
    paths = []
    for outcome in outcomes:
        path = os.path.join(trials_dir, "trial_%d.json" % outcome.seed)
        write_json(path, outcome.to_dict())
        paths.append(path)
    return paths


def write_trials_csv(run_dir: str, outcomes: List[TrialOutcome]) -> str:
    path = os.path.join(run_dir, "trials.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIAL_COLUMNS)
        for o in outcomes:
            writer.writerow([o.scenario, o.seed, repr(o.duration_s),
                             repr(100.0 * o.fraction_searched), o.collisions,
                             repr(o.heuristic)])
    return path


def write_sweep_csv(run_dir: str, rows: List[dict]) -> str:
    path = os.path.join(run_dir, "sweep.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return path


def write_adapt_outputs(run_dir: str, result: AdaptationResult) -> Tuple[str, str]:
    trace_path = os.path.join(run_dir, "adapt_trace.csv")
    with open(trace_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for row in result.trace:
            writer.writerow([
                row.iteration, repr(row.temperature),
                repr(row.profile.w_eta), repr(row.profile.w_z),
                repr(row.profile.w_g), repr(row.profile.delta_min),
                repr(row.profile.c_penalty),
                repr(row.e_candidate), int(row.accepted), repr(row.best_e),
            ])
    profile_path = os.path.join(run_dir, "adapted_profile.json")
    write_json(profile_path, result.best_profile.to_dict())
    return trace_path, profile_path


def write_config(run_dir: str, scenario: Scenario) -> str:
    path = os.path.join(run_dir, "config.json")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(scenario.to_json())
    return path
