"""Adaptive simulated annealing over the five decision-cost variables.

Each iteration proposes a candidate profile by perturbing the incumbent
inside temperature-scaled bounds, evaluates it with one or more seeded
trials, and accepts it when it beats the best energy seen so far or by
the Metropolis rule against the previous energy. The temperature decays
geometrically and is re-widened to its initial value on a fixed period.
"""

import math
import random
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

from .costs import CostProfile
from .seeding import derive_seed

ADAPTED_VARIABLES: Dict[str, Tuple[float, float]] = {
    "w_eta": (0.0, 1.0),
    "w_z": (0.0, 1.0),
    "w_g": (0.0, 1.0),
    "delta_min": (0.0, 100.0),
    "c_penalty": (0.0, 1.0),
}


@dataclass
class AsaConfig:
    max_trials: int = 50
    temperature_decay: float = 0.95
    reanneal_period: int = 25
    bounds: Dict[str, Tuple[float, float]] = field(
        default_factory=lambda: dict(ADAPTED_VARIABLES))
    trials_per_eval: int = 1
    seed: int = 0


@dataclass
class TraceRow:
    iteration: int
    temperature: float
    e_candidate: float
    accepted: bool
    best_e: float
    profile: CostProfile


@dataclass
class AdaptationResult:
    best_profile: CostProfile
    best_e: float
    trace: List[TraceRow]


class AdaptationError(RuntimeError):
    """Evaluation failure; carries the trace accumulated so far."""

    def __init__(self, message: str, trace: List[TraceRow]):
        super().__init__(message)
        self.trace = trace


def initial_temperature(max_trials: int, decay: float) -> float:
    """Start temperature decay^(-max_trials), so decay reaches 1 at the end."""
    return decay ** (-max_trials)


def propose(incumbent: CostProfile, ratio: float, rng: random.Random,
            bounds: Optional[Dict[str, Tuple[float, float]]] = None) -> CostProfile:
    """Perturb each adapted variable within its bounds scaled by ratio.

    ratio is T_current / T_initial; at full temperature the proposal spans
    the whole box, and it tightens around the incumbent as ratio falls.
    Values at a bound get one-sided proposals naturally.
    """
    bounds = bounds or ADAPTED_VARIABLES
    updates = {}
    for name, (low, high) in bounds.items():
        current = getattr(incumbent, name)
        y = rng.uniform((low - current) * ratio, (high - current) * ratio)
        updates[name] = min(max(current + y, low), high)
    return replace(incumbent, **updates)


def accept(e_candidate: float, e_prev: float, e_min: float,
           temperature: float, rng: random.Random) -> bool:
    """Accept on a new best energy, else by the Metropolis rule vs e_prev."""
    if e_candidate < e_min:
        return True
    exponent = (e_prev - e_candidate) / temperature
    if exponent >= 0.0:
        return True
    return math.exp(exponent) > rng.random()


def run_adaptation(asa: AsaConfig, scenario=None,
                   evaluate: Optional[Callable[[CostProfile, int], float]] = None,
                   initial_profile: Optional[CostProfile] = None,
                   workers: int = 1) -> AdaptationResult:
    """Anneal the profile; returns the best profile, its energy and the trace.

    evaluate(profile, iteration) must return the trial heuristic for the
    candidate. When a scenario is given instead, candidates are scored by
    the mean heuristic of trials_per_eval trials with seeds derived from
    (asa.seed, iteration, k); workers > 1 runs those trials in parallel
    without changing the result. The trace has exactly max_trials rows; on
    an evaluation failure the partial trace rides on the raised error.
    """
    if evaluate is None:
        if scenario is None:
            raise ValueError("need a scenario or an evaluate callable")
        evaluate = scenario_evaluator(asa, scenario, workers=workers)
    if initial_profile is None:
        initial_profile = scenario.profile if scenario is not None else CostProfile()

    rng = random.Random(derive_seed(asa.seed, "asa"))
    t0 = initial_temperature(asa.max_trials, asa.temperature_decay)
    incumbent = initial_profile
    best = initial_profile
    e_prev = math.inf
    e_min = math.inf
    trace: List[TraceRow] = []

    for i in range(asa.max_trials):
        # Geometric cooling, re-widened to T_0 at the start of each period.
        if i % asa.reanneal_period == 0:
            temperature = t0
        else:
            temperature = t0 * asa.temperature_decay ** i
        candidate = propose(incumbent, temperature / t0, rng, asa.bounds)
        try:
            e_candidate = evaluate(candidate, i)
        except Exception as exc:
            raise AdaptationError("evaluation failed at iteration %d: %s" % (i, exc),
                                  trace) from exc
        if accept(e_candidate, e_prev, e_min, temperature, rng):
            incumbent = candidate
            if e_candidate < e_min:
                e_min = e_candidate
                best = candidate
        e_prev = e_candidate
        trace.append(TraceRow(i, temperature, e_candidate,
                              incumbent is candidate, e_min, candidate))

    return AdaptationResult(best_profile=best, best_e=e_min, trace=trace)


def scenario_evaluator(asa: AsaConfig, scenario,
                       workers: int = 1) -> Callable[[CostProfile, int], float]:
    """Score a profile by the mean heuristic over trials_per_eval seeds.

    Seeds derive from (asa.seed, iteration, k), so distinct iterations see
    distinct worlds; callers may pass iteration -1 for a baseline score
    without colliding with the annealing stream. The mean is accumulated
    in seed order, so the score is identical at any worker count.
    """
    from .experiments import run_batch

    def evaluate(profile: CostProfile, iteration: int) -> float:
        seeds = [derive_seed(asa.seed, "eval", iteration, k)
                 for k in range(asa.trials_per_eval)]
        outcomes = run_batch(scenario, profile, seeds, workers=workers)
        return sum(o.heuristic for o in outcomes) / asa.trials_per_eval

    return evaluate
