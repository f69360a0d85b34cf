"""Per-agent decision loop: beliefs, auctions and the per-tick solve.

Each tick an agent ingests delivered messages, runs its bidding phase
(close due auctions, then place a new bid when it has neither claim nor
open candidate), predicts neighbors by dead reckoning, solves the
constrained one-step optimization and finally broadcasts its state on
its own schedule. While an auction runs the agent already flies toward
the candidate tile.
"""

import math
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import bidding
from ._kernel import solve_decision
from .bidding import BeliefState, Bid, BidWeights, TileBelief
from .costs import CostProfile
from .meshnet import (
    KIND_BID, KIND_CLAIM, KIND_CORRECTION, KIND_POSITION, KIND_SEARCHED,
    Message, NetworkConfig, PositionUpdate, SearchedAnnounce,
)
from .optimizer import DEParams
from .seeding import derive_seed, derive_seed32
from .world import AgentState, WorldConfig, gps_jitter


@dataclass
class NeighborBelief:
    agent_id: int
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    observed_at: float


def predict_neighbor(belief: NeighborBelief, t: float) -> np.ndarray:
    """Dead-reckon the neighbor to time t from its last reported state."""
    dt = t - belief.observed_at
    return belief.position + belief.velocity * dt + 0.5 * belief.acceleration * dt * dt


class KnowledgeBase:
    """Everything an agent believes: neighbor states and tile auctions."""

    def __init__(self, n_tiles: int):
        self.neighbors: Dict[int, NeighborBelief] = {}
        self.tiles: List[TileBelief] = [TileBelief(i) for i in range(n_tiles)]
        self.in_auction: set = set()

    def sync_auction(self, index: int) -> None:
        if self.tiles[index].state == BeliefState.IN_AUCTION:
            self.in_auction.add(index)
        else:
            self.in_auction.discard(index)


class Agent:
    """One swarm member; owns no ground truth besides its own state."""

    def __init__(self, state: AgentState, world: WorldConfig, net: NetworkConfig,
                 profile: CostProfile, de: DEParams, weights: BidWeights,
                 tile_centers: np.ndarray, master_seed: int,
                 trace: Optional[list] = None):
        self.agent_id = state.agent_id
        self.state = state
        self.world = world
        self.profile = profile
        self.de = de
        self.weights = weights
        self.tile_centers = tile_centers
        self.master_seed = master_seed
        self.kb = KnowledgeBase(tile_centers.shape[0])
        self.candidate_tile: Optional[int] = None
        self.current_goal: Optional[int] = None
        self.d_max = math.sqrt(world.area_width ** 2 + world.area_height ** 2)
        # A neighbor is presumed gone once ~10 broadcast periods beyond
        # normal transit time have passed without an update.
        self.staleness_limit = 10.0 * world.t_broadcast + net.mean_delay
        self.propagate_bids = net.propagate_bids
        self.broadcast_every = max(1, int(round(world.t_broadcast / world.sim_dt)))
        self.gps_rng = random.Random(derive_seed(master_seed, "gps", self.agent_id))
        self.counters = {"bids": 0, "claims": 0, "corrections": 0, "searched": 0,
                         "malformed": 0, "unknown": 0}
        self.trace = trace

    def seed_formation(self, states: List[AgentState]) -> None:
        """Pre-load beliefs with the spawn formation (at rest, time zero).

        The swarm launches together, so every member knows where the others
        start; without this, delays longer than the spawn spacing allows
        would make the first seconds blind.
        """
        for other in states:
            if other.agent_id == self.agent_id:
                continue
            self.kb.neighbors[other.agent_id] = NeighborBelief(
                other.agent_id, other.position.copy(), np.zeros(3),
                np.zeros(3), 0.0,
            )

    # -- message handling ------------------------------------------------

    def step(self, now: float, tick: int,
             inbox: List[Message]) -> Tuple[np.ndarray, List[Message]]:
        outbox: List[Message] = []
        self.ingest(inbox, now, outbox)
        self.bidding_phase(now, outbox)
        desired = self.decision_step(now, tick)
        if tick % self.broadcast_every == 0:
            outbox.append(self.broadcast_self(now))
        return desired, outbox

    def ingest(self, inbox: List[Message], now: float,
               outbox: List[Message]) -> None:
        for msg in inbox:
            if msg.kind == KIND_POSITION:
                pu = msg.payload
                known = self.kb.neighbors.get(msg.sender)
                # Jitter can reorder deliveries; keep the newest observation.
                if known is not None and known.observed_at > msg.sent_at:
                    continue
                self.kb.neighbors[msg.sender] = NeighborBelief(
                    msg.sender, pu.position, pu.velocity, pu.acceleration,
                    msg.sent_at,
                )
                continue
            if msg.kind not in (KIND_BID, KIND_CLAIM, KIND_CORRECTION,
                                KIND_SEARCHED):
                self.counters["unknown"] += 1
                continue
            tile = msg.payload.tile
            if not isinstance(tile, int) or not 0 <= tile < len(self.kb.tiles):
                self.counters["malformed"] += 1
                continue
            belief = self.kb.tiles[tile]
            replies = bidding.reconcile(
                belief, msg.kind, msg.payload, self.agent_id, now,
                self.world.t_auction,
            )
            self._after_belief_change(tile, belief)
            for kind, payload in replies:
                self.counters["corrections"] += 1
                if self.trace is not None:
                    value = getattr(payload, "value", 0.0)
                    self.trace.append((now, tile, "correction", self.agent_id, value))
                outbox.append(self._make_message(kind, payload, now))

    def _after_belief_change(self, tile: int, belief: TileBelief) -> None:
        self.kb.sync_auction(tile)
        if self.candidate_tile == tile:
            still_mine = (belief.state == BeliefState.IN_AUCTION
                          and belief.best_bidder == self.agent_id)
            if not still_mine:
                self.candidate_tile = None
        if self.current_goal == tile and belief.state != BeliefState.CLAIMED_BY_SELF:
            self.current_goal = None

    # -- bidding ----------------------------------------------------------

    def bidding_phase(self, now: float, outbox: List[Message]) -> None:
        for tile in sorted(self.kb.in_auction):
            belief = self.kb.tiles[tile]
            if belief.auction_deadline is None or now < belief.auction_deadline:
                continue
            outcome, msgs = bidding.resolve_deadline(belief, self.agent_id, now)
            self.kb.sync_auction(tile)
            for kind, payload in msgs:
                outbox.append(self._make_message(kind, payload, now))
            if outcome == "won":
                self.counters["claims"] += 1
                if self.trace is not None:
                    self.trace.append((now, tile, "claim", self.agent_id,
                                       belief.best_value))
                if self.candidate_tile == tile:
                    self.candidate_tile = None
                if self.current_goal is None:
                    self.current_goal = tile
            elif outcome == "lost" and self.candidate_tile == tile:
                self.candidate_tile = None
        if self.current_goal is None and self.candidate_tile is None:
            bid = self.generate_bid(now)
            if bid is not None:
                belief = self.kb.tiles[bid.tile]
                msgs = bidding.open_or_raise(belief, bid, now, self.world.t_auction)
                self.kb.sync_auction(bid.tile)
                self.candidate_tile = bid.tile
                self.counters["bids"] += 1
                if self.trace is not None:
                    self.trace.append((now, bid.tile, "bid", self.agent_id, bid.value))
                for kind, payload in msgs:
                    outbox.append(self._make_message(kind, payload, now))

    def generate_bid(self, now: float) -> Optional[Bid]:
        """Best-scoring tile the agent could still win, or None."""
        idxs = []
        for i, belief in enumerate(self.kb.tiles):
            if belief.state in (BeliefState.UNCLAIMED, BeliefState.IN_AUCTION):
                idxs.append(i)
        if not idxs:
            return None
        centers = self.tile_centers[idxs]
        pos = self.state.position
        diff = centers - pos
        d_self = np.sqrt((diff * diff).sum(axis=1))
        scores = self.weights.w_dist * (1.0 - d_self / self.d_max)
        others = self._believed_positions(now)
        if others.shape[0] > 0:
            sep = centers[None, :, :] - others[:, None, :]
            d_other = np.sqrt((sep * sep).sum(axis=2)).min(axis=0)
            scores += self.weights.w_near * (d_other / self.d_max)
        else:
            scores += self.weights.w_near
        for k in np.argsort(-scores, kind="stable"):
            tile = idxs[k]
            belief = self.kb.tiles[tile]
            value = float(scores[k])
            if belief.state == BeliefState.IN_AUCTION and not bidding.beats(
                    value, self.agent_id, belief.best_value, belief.best_bidder):
                continue
            return Bid(tile, value, self.agent_id, now)
        return None

    def _believed_positions(self, now: float) -> np.ndarray:
        ids = sorted(self.kb.neighbors)
        rows = []
        for aid in ids:
            nb = self.kb.neighbors[aid]
            if now - nb.observed_at <= self.staleness_limit:
                rows.append(nb.position)
        if not rows:
            return np.empty((0, 3))
        return np.stack(rows)

    # -- flight -----------------------------------------------------------

    def decision_step(self, now: float, tick: int) -> np.ndarray:
        """Solve the constrained optimization for the plan horizon.

        The search box is the set of positions reachable by the horizon,
        and neighbors are dead-reckoned to the same instant, so the
        separation constraint is checked where the plan actually lands.
        When the solve finds no feasible point the least-violating point
        is used, which both brakes an approach and escapes an
        already-violated margin.
        """
        dt = self.world.plan_horizon
        horizon = now + dt
        preds = self._predicted_neighbors(now, horizon)
        goal_tile = self.current_goal if self.current_goal is not None else self.candidate_tile
        if goal_tile is not None:
            center = self.tile_centers[goal_tile]
            has_goal, gx, gy, gz = True, center[0], center[1], center[2]
        else:
            has_goal, gx, gy, gz = False, 0.0, 0.0, 0.0
        prof = self.profile
        seed = derive_seed32(self.master_seed, "solve", self.agent_id, tick)
        x, y, z, _val, _viol, _feas = solve_decision(
            self.state.position[0], self.state.position[1], self.state.position[2],
            self.state.velocity[0], self.state.velocity[1], self.state.velocity[2],
            self.state.max_acc_actual[0], self.state.max_acc_actual[1],
            self.state.max_acc_actual[2],
            dt, preds, has_goal, gx, gy, gz,
            prof.w_eta, prof.w_z, prof.w_g, prof.delta_min, prof.c_penalty,
            prof.alpha, prof.c_dist, prof.z_min, prof.z_max,
            self.world.comm_range,
            self.de.population_size, self.de.max_generations,
            self.de.differential_weight, self.de.crossover_rate, seed,
        )
        return np.array([x, y, z])

    def _predicted_neighbors(self, now: float, horizon: float) -> np.ndarray:
        ids = sorted(self.kb.neighbors)
        live = []
        for aid in ids:
            nb = self.kb.neighbors[aid]
            if now - nb.observed_at <= self.staleness_limit:
                live.append(nb)
        preds = np.empty((len(live), 3))
        for row, nb in enumerate(live):
            dt = horizon - nb.observed_at
            for axis in range(3):
                preds[row, axis] = (nb.position[axis] + nb.velocity[axis] * dt
                                    + 0.5 * nb.acceleration[axis] * dt * dt)
        return preds

    # -- world feedback and broadcasting ----------------------------------

    def on_tile_searched(self, tile: int, now: float) -> Message:
        """World credit for a tile this agent just searched."""
        belief = self.kb.tiles[tile]
        belief.state = BeliefState.SEARCHED
        belief.searched_by_self = True
        belief.auction_deadline = None
        self.kb.sync_auction(tile)
        if self.candidate_tile == tile:
            self.candidate_tile = None
        if self.current_goal == tile:
            self.current_goal = None
        self.counters["searched"] += 1
        return self._make_message(
            KIND_SEARCHED, SearchedAnnounce(tile, self.agent_id), now)

    def broadcast_self(self, now: float) -> Message:
        if self.world.gps_noise_radius > 0.0:
            pos = gps_jitter(self.state.position, self.world.gps_noise_radius,
                             self.gps_rng)
        else:
            pos = self.state.position.copy()
        payload = PositionUpdate(pos, self.state.velocity.copy(),
                                 self.state.acceleration.copy())
        return Message(KIND_POSITION, self.agent_id, now, payload, propagate=False)

    def _make_message(self, kind: str, payload, now: float) -> Message:
        return Message(kind, self.agent_id, now, payload,
                       propagate=self.propagate_bids)
