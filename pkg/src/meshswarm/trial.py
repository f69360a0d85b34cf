"""Single-trial execution and the scalar trial heuristic.

A trial advances the world on a fixed tick: deliver due messages, step
every agent (all outboxes commit after all agents stepped), integrate
kinematics, then apply ground-truth checks (tile searches, collisions).
It ends when every tile is searched or the time cap is reached. Equal
inputs give bit-identical outcomes.
"""

import math
import random
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from .agent import Agent
from .bidding import BidWeights
from .costs import CostProfile
from .meshnet import MeshNetwork, NetworkConfig
from .optimizer import DEParams
from .seeding import derive_seed
from .world import (
    AgentState, Heterogeneity, SimClock, WorldConfig, build_grid,
    check_tile_searched, containing_tile_index, detect_collisions,
    step_kinematics,
)


@dataclass
class TrialOutcome:
    scenario: str
    seed: int
    n_agents: int
    duration_s: float
    fraction_searched: float
    collisions: int
    heuristic: float
    per_tile_times: Optional[Dict[str, float]] = None

    def to_dict(self) -> dict:
        out = {
            "scenario": self.scenario,
            "seed": self.seed,
            "n_agents": self.n_agents,
            "duration_s": self.duration_s,
            "pct_searched": 100.0 * self.fraction_searched,
            "fraction_searched": self.fraction_searched,
            "collisions": self.collisions,
            "E_c": self.heuristic,
        }
        if self.per_tile_times is not None:
            out["per_tile_times"] = self.per_tile_times
        return out


def trial_heuristic(duration_s: float, t_max: float, fraction_searched: float,
                    collisions: int, n_agents: int) -> float:
    """Scalar badness of one trial in [0, 7]: time + unsearched + collisions.

    The collision term jumps to 0.25 at the first colliding pair and grows
    with the pair count, capped at 1, so any collision dominates plain
    slowness. An empty run (nothing searched, no time spent) scores 2.
    """
    c_time = duration_s / t_max if t_max > 0.0 else 0.0
    c_nsrh = 1.0 - fraction_searched
    if collisions == 0:
        c_clsn = 0.0
    else:
        c_clsn = min(1.0, 0.25 + 0.75 * collisions / n_agents)
    return c_time + 2.0 * c_nsrh + 4.0 * c_clsn


def summarize(outcomes: List[TrialOutcome]) -> dict:
    """Batch statistics: mean/unbiased-variance duration, search %, collisions."""
    n = len(outcomes)
    if n == 0:
        raise ValueError("no outcomes to summarize")
    durations = [o.duration_s for o in outcomes]
    mu_t = sum(durations) / n
    if n > 1:
        var_t = sum((d - mu_t) ** 2 for d in durations) / (n - 1)
    else:
        var_t = 0.0
    return {
        "n": n,
        "mu_t": mu_t,
        "var_t": var_t,
        "pct_searched": 100.0 * sum(o.fraction_searched for o in outcomes) / n,
        "mean_collisions": sum(o.collisions for o in outcomes) / n,
        "mean_E_c": sum(o.heuristic for o in outcomes) / n,
    }


def start_positions(n_agents: int, cfg: WorldConfig) -> List[np.ndarray]:
    """Corner cluster: a square grid spaced 2 * collision_radius apart."""
    cols = max(1, math.ceil(math.sqrt(n_agents)))
    spacing = 2.0 * cfg.collision_radius
    out = []
    for i in range(n_agents):
        out.append(np.array([
            spacing * (1 + i % cols),
            spacing * (1 + i // cols),
            cfg.search_altitude,
        ]))
    return out


def spawn_states(n_agents: int, world: WorldConfig,
                 heterogeneity: Optional[Heterogeneity],
                 seed: int) -> List[AgentState]:
    """Build per-agent states at the corner cluster with per-trial limits.

    Heterogeneity draws are floored (1 m/s, 0.2 m/s^2 per axis) so a bad
    draw degrades an agent instead of paralyzing it.
    """
    het = heterogeneity or Heterogeneity()
    het_rng = random.Random(derive_seed(seed, "het"))
    states: List[AgentState] = []
    for i, pos in enumerate(start_positions(n_agents, world)):
        max_speed = world.max_speed
        if het.velocity_noise_sigma > 0.0:
            max_speed = max(1.0, max_speed + het_rng.gauss(0.0, het.velocity_noise_sigma))
        max_acc = world.max_acc()
        if het.acceleration_noise_sigma > 0.0:
            max_acc = np.maximum(
                0.2, max_acc + het_rng.gauss(0.0, het.acceleration_noise_sigma))
        states.append(AgentState(
            agent_id=i, position=pos, velocity=np.zeros(3),
            acceleration=np.zeros(3), max_speed_actual=max_speed,
            max_acc_actual=max_acc,
        ))
    return states


def boustrophedon_routes(n_agents: int, world: WorldConfig) -> List[List[int]]:
    """Split rows into contiguous bands, one per agent, serpentine each band.

    Band sizes differ by at most one row; with more agents than rows the
    extra agents get empty routes. Returns flat tile indexes in visit order.
    """
    n_rows, n_cols = world.grid_shape()
    routes: List[List[int]] = [[] for _ in range(n_agents)]
    base, extra = divmod(n_rows, n_agents)
    row = 0
    for a in range(n_agents):
        size = base + (1 if a < extra else 0)
        for j in range(size):
            cols = range(n_cols) if j % 2 == 0 else range(n_cols - 1, -1, -1)
            routes[a].extend((row + j) * n_cols + c for c in cols)
        row += size
    return routes


class TrialRunner:
    """Owns the world, network and agents for one seeded trial."""

    def __init__(self, world: WorldConfig, net: NetworkConfig,
                 profile: CostProfile, n_agents: int, seed: int,
                 heterogeneity: Optional[Heterogeneity] = None,
                 de: Optional[DEParams] = None,
                 weights: Optional[BidWeights] = None,
                 scenario_name: str = "trial",
                 record_tile_times: bool = False,
                 message_trace: Optional[list] = None,
                 auction_trace: Optional[list] = None):
        self.world = world
        self.net_cfg = net.resolve(world.comm_range)
        self.profile = profile
        self.n_agents = n_agents
        self.seed = seed
        self.scenario_name = scenario_name
        self.record_tile_times = record_tile_times
        self.auction_trace = auction_trace

        self.tiles = build_grid(world)
        self.n_rows, self.n_cols = world.grid_shape()
        centers = np.stack([t.center for t in self.tiles])
        self.clock = SimClock(dt=world.sim_dt)
        self.net = MeshNetwork(self.net_cfg,
                               random.Random(derive_seed(seed, "net")),
                               trace=message_trace)

        de = de or DEParams()
        weights = weights or BidWeights()
        self.states = spawn_states(n_agents, world, heterogeneity, seed)
        self.agents: List[Agent] = []
        for state in self.states:
            self.agents.append(Agent(state, world, self.net_cfg, profile, de,
                                     weights, centers, master_seed=seed,
                                     trace=auction_trace))
        for agent in self.agents:
            agent.seed_formation(self.states)

        self.collided_pairs: set = set()
        self.searched_count = 0

    def run(self, settle: bool = False) -> TrialOutcome:
        world = self.world
        n_tiles = len(self.tiles)
        ticks_max = int(round(world.t_max / world.sim_dt))
        completed_at: Optional[float] = None

        while self.clock.tick < ticks_max:
            self._tick()
            if self.searched_count == n_tiles:
                completed_at = self.clock.now
                break

        if settle:
            self._settle()

        duration = completed_at if completed_at is not None else world.t_max
        fraction = self.searched_count / n_tiles if n_tiles else 0.0
        collisions = len(self.collided_pairs)
        per_tile = None
        if self.record_tile_times:
            per_tile = {}
            for t in self.tiles:
                if t.true_searched:
                    per_tile["%d,%d" % (t.row, t.col)] = t.searched_at
        return TrialOutcome(
            scenario=self.scenario_name, seed=self.seed, n_agents=self.n_agents,
            duration_s=duration, fraction_searched=fraction,
            collisions=collisions,
            heuristic=trial_heuristic(duration, world.t_max, fraction,
                                      collisions, self.n_agents),
            per_tile_times=per_tile,
        )

    def _tick(self) -> None:
        now = self.clock.now
        tick = self.clock.tick
        delivered = self.net.deliver_due(now, self.states)
        desired: List[np.ndarray] = []
        outboxes: List[List] = []
        for agent in self.agents:
            target, outbox = agent.step(now, tick, delivered.get(agent.agent_id, []))
            desired.append(target)
            outboxes.append(outbox)
        for outbox in outboxes:
            for msg in outbox:
                self.net.send(msg, self.states, now)
        for state, target in zip(self.states, desired):
            step_kinematics(state, target, self.world.sim_dt,
                            horizon=self.world.plan_horizon)
        self.clock.advance()
        after = self.clock.now
        self._ground_truth_checks(after)

    def _ground_truth_checks(self, now: float) -> None:
        for state, agent in zip(self.states, self.agents):
            idx = containing_tile_index(self.world, self.n_rows, self.n_cols,
                                        state.position[0], state.position[1])
            if idx is None:
                continue
            tile = self.tiles[idx]
            if tile.true_searched:
                continue
            if check_tile_searched(tile, state.position, self.world):
                tile.true_searched = True
                tile.searched_by = state.agent_id
                tile.searched_at = now
                self.searched_count += 1
                if self.auction_trace is not None:
                    self.auction_trace.append(
                        (now, idx, "searched", state.agent_id, 0.0))
                announce = agent.on_tile_searched(idx, now)
                self.net.send(announce, self.states, now)
        pairs = detect_collisions(self.states, self.world.collision_radius)
        for pair in pairs:
            self.collided_pairs.add(pair)

    def _settle(self, max_ticks: int = 400000) -> None:
        """Drain in-flight traffic without physics so beliefs can converge.

        Agents keep ingesting and closing auctions (no flying, no position
        broadcasts); used by protocol-consistency checks.
        """
        for _ in range(max_ticks):
            if self.net.pending() == 0:
                break
            self.clock.advance()
            now = self.clock.now
            delivered = self.net.deliver_due(now, self.states)
            outboxes = []
            for agent in self.agents:
                outbox: List = []
                agent.ingest(delivered.get(agent.agent_id, []), now, outbox)
                agent.bidding_phase(now, outbox)
                outboxes.append(outbox)
            for outbox in outboxes:
                for msg in outbox:
                    self.net.send(msg, self.states, now)


def run_trial(world: WorldConfig, net: NetworkConfig, profile: CostProfile,
              n_agents: int, seed: int, **kwargs) -> TrialOutcome:
    """Run one seeded trial; see TrialRunner for the knobs."""
    settle = kwargs.pop("settle", False)
    return TrialRunner(world, net, profile, n_agents, seed, **kwargs).run(settle=settle)


def run_scripted_trial(world: WorldConfig, n_agents: int, seed: int,
                       heterogeneity: Optional[Heterogeneity] = None,
                       scenario_name: str = "scripted") -> TrialOutcome:
    """Centrally preplanned sweep baseline: no auctions, no mesh traffic.

    Each agent flies a boustrophedon route over its own row band and holds
    position when the band is done. Ground-truth search and collision
    accounting match run_trial, so outcomes are directly comparable.
    """
    tiles = build_grid(world)
    n_rows, n_cols = world.grid_shape()
    states = spawn_states(n_agents, world, heterogeneity, seed)
    routes = boustrophedon_routes(n_agents, world)
    cursors = [0] * n_agents
    clock = SimClock(dt=world.sim_dt)
    collided: set = set()
    searched = 0
    n_tiles = len(tiles)
    ticks_max = int(round(world.t_max / world.sim_dt))
    completed_at: Optional[float] = None

    while clock.tick < ticks_max:
        for i, state in enumerate(states):
            route = routes[i]
            # Skip waypoints already searched (possibly by a passer-by).
            while cursors[i] < len(route) and tiles[route[cursors[i]]].true_searched:
                cursors[i] += 1
            if cursors[i] < len(route):
                target = tiles[route[cursors[i]]].center
            else:
                target = state.position
            step_kinematics(state, target, world.sim_dt,
                            horizon=world.plan_horizon)
        clock.advance()
        now = clock.now
        for state in states:
            idx = containing_tile_index(world, n_rows, n_cols,
                                        state.position[0], state.position[1])
            if idx is None:
                continue
            tile = tiles[idx]
            if tile.true_searched:
                continue
            if check_tile_searched(tile, state.position, world):
                tile.true_searched = True
                tile.searched_by = state.agent_id
                tile.searched_at = now
                searched += 1
        for pair in detect_collisions(states, world.collision_radius):
            collided.add(pair)
        if searched == n_tiles:
            completed_at = now
            break

    duration = completed_at if completed_at is not None else world.t_max
    fraction = searched / n_tiles if n_tiles else 0.0
    return TrialOutcome(
        scenario=scenario_name, seed=seed, n_agents=n_agents,
        duration_s=duration, fraction_searched=fraction,
        collisions=len(collided),
        heuristic=trial_heuristic(duration, world.t_max, fraction,
                                  len(collided), n_agents),
    )
