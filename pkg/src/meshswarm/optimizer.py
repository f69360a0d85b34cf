"""Constrained differential evolution over a 3-axis box.

DE/rand/1/bin with feasibility-rule selection: a feasible point always
beats an infeasible one, feasible points compare by objective value,
infeasible points compare by violation magnitude, and the incumbent wins
exact ties. The run is a pure function of its inputs and seed.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class SearchBox:
    """Axis-aligned candidate box; lower <= upper per axis."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.lower.shape != self.upper.shape:
            raise ValueError("box bounds must share a shape")
        if np.any(self.lower > self.upper):
            raise ValueError("box lower bound exceeds upper bound")


@dataclass
class DEParams:
    population_size: int = 24
    max_generations: int = 40
    differential_weight: float = 0.5
    crossover_rate: float = 0.9
    seed: int = 0

    def validate(self) -> None:
        if self.population_size < 4:
            raise ValueError("population_size must be at least 4")
        if self.max_generations < 0:
            raise ValueError("max_generations must be non-negative")
        if not 0.0 < self.differential_weight < 2.0:
            raise ValueError("differential_weight must lie in (0, 2)")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("crossover_rate must lie in [0, 1]")


@dataclass
class MinimizeResult:
    point: np.ndarray
    value: float
    feasible: bool
    violation: float


def _improves(f_new: float, v_new: float, f_old: float, v_old: float) -> bool:
    """Feasibility-rule comparison; strict, so ties keep the incumbent."""
    if v_new == 0.0 and v_old == 0.0:
        return f_new < f_old
    if v_new == 0.0:
        return True
    if v_old == 0.0:
        return False
    return v_new < v_old


def minimize(objective: Callable[[np.ndarray], float],
             constraint: Callable[[np.ndarray], float],
             box: SearchBox, params: DEParams) -> MinimizeResult:
    """Minimize objective subject to constraint(x) == 0 inside box.

    constraint returns a violation magnitude (0 means feasible). The
    best individual of the final population is returned; when nothing
    feasible was ever sampled that is the least-violating point and the
    feasible flag is False.
    """
    params.validate()
    rng = np.random.default_rng(params.seed)
    dim = box.lower.shape[0]
    span = box.upper - box.lower
    np_size = params.population_size

    pop = box.lower + rng.random((np_size, dim)) * span
    values = np.empty(np_size)
    violations = np.empty(np_size)
    for i in range(np_size):
        values[i] = objective(pop[i])
        violations[i] = constraint(pop[i])

    for _ in range(params.max_generations):
        for i in range(np_size):
            r1 = _pick_index(rng, np_size, (i,))
            r2 = _pick_index(rng, np_size, (i, r1))
            r3 = _pick_index(rng, np_size, (i, r1, r2))
            mutant = pop[r1] + params.differential_weight * (pop[r2] - pop[r3])
            trial = pop[i].copy()
            j_rand = int(rng.random() * dim)
            for d in range(dim):
                if d == j_rand or rng.random() < params.crossover_rate:
                    trial[d] = mutant[d]
            np.clip(trial, box.lower, box.upper, out=trial)
            f_t = objective(trial)
            v_t = constraint(trial)
            if _improves(f_t, v_t, values[i], violations[i]):
                pop[i] = trial
                values[i] = f_t
                violations[i] = v_t

    best = 0
    for i in range(1, np_size):
        if _improves(values[i], violations[i], values[best], violations[best]):
            best = i
    return MinimizeResult(
        point=pop[best].copy(),
        value=float(values[best]),
        feasible=bool(violations[best] == 0.0),
        violation=float(violations[best]),
    )


def _pick_index(rng, size: int, taken) -> int:
    """Uniform index draw avoiding the taken ones (rejection)."""
    while True:
        r = int(rng.random() * size)
        if r not in taken:
            return r
