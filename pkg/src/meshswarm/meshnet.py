"""Simulated lossy, delayed mesh network with range-limited flooding.

Links exist between agents within communication range at send time. Each
scheduled delivery draws an independent drop and jitter sample. Messages
flagged propagate are re-forwarded by each first-time recipient to its
own neighbors until the hop budget runs out; a per-message seen set
suppresses duplicates so no (message, recipient) pair delivers twice.
"""

import heapq
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from .world import AgentState

KIND_POSITION = "position"
KIND_BID = "bid"
KIND_CLAIM = "claim"
KIND_SEARCHED = "searched"
KIND_CORRECTION = "correction"

BID_KINDS = (KIND_BID, KIND_CLAIM, KIND_SEARCHED, KIND_CORRECTION)


@dataclass
class PositionUpdate:
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray


@dataclass
class BidAnnounce:
    tile: int
    value: float
    bidder: int
    placed_at: float


@dataclass
class ClaimAnnounce:
    tile: int
    value: float
    bidder: int


@dataclass
class SearchedAnnounce:
    tile: int
    by: int


@dataclass
class Correction:
    """Re-assertion of a claim (claimed=True) or a standing bid."""

    tile: int
    value: float
    bidder: int
    claimed: bool


@dataclass
class Message:
    kind: str
    sender: int
    sent_at: float
    payload: object
    propagate: bool = False
    hop_count: int = 0
    msg_id: Optional[Tuple[int, int]] = None


@dataclass
class NetworkConfig:
    """Link model parameters; None fields are resolved against the world."""

    mean_delay: float = 0.0
    delay_jitter: Optional[float] = None
    drop_probability: float = 0.0
    comm_range: Optional[float] = None
    max_hops: int = 16
    propagate_bids: bool = True

    def resolve(self, world_comm_range: float) -> "NetworkConfig":
        jitter = self.delay_jitter
        if jitter is None:
            jitter = 0.25 * self.mean_delay
        comm = self.comm_range
        if comm is None:
            comm = world_comm_range
        return replace(self, delay_jitter=jitter, comm_range=comm)


def neighbors(states: List[AgentState], agent_id: int, comm_range: float) -> List[int]:
    """Ids of all other agents within comm_range (inclusive), ascending."""
    me = None
    for s in states:
        if s.agent_id == agent_id:
            me = s
            break
    if me is None:
        raise KeyError("unknown agent id %d" % agent_id)
    out = []
    r2 = comm_range * comm_range
    for s in states:
        if s.agent_id == agent_id:
            continue
        d = s.position - me.position
        if d[0] * d[0] + d[1] * d[1] + d[2] * d[2] <= r2:
            out.append(s.agent_id)
    out.sort()
    return out


@dataclass(order=True)
class _QueueEntry:
    sort_key: Tuple[float, int, int, int]
    message: Message = field(compare=False)
    recipient: int = field(compare=False)


class MeshNetwork:
    """In-flight queue plus duplicate-suppression bookkeeping."""

    def __init__(self, cfg: NetworkConfig, rng, trace: Optional[list] = None):
        if cfg.delay_jitter is None or cfg.comm_range is None:
            raise ValueError("NetworkConfig must be resolved before use")
        self.cfg = cfg
        self.rng = rng
        self.trace = trace
        self._queue: List[_QueueEntry] = []
        self._next_seq: Dict[int, int] = {}
        self._seen: Dict[Tuple[int, int], set] = {}

    def pending(self) -> int:
        return len(self._queue)

    def send(self, message: Message, states: List[AgentState], now: float,
             forwarder: Optional[int] = None) -> None:
        """Schedule delivery to every current neighbor of the sending node.

        forwarder is the re-broadcasting node for flooded messages; plain
        sends originate at message.sender.
        """
        origin = message.sender if forwarder is None else forwarder
        if message.msg_id is None:
            seq = self._next_seq.get(message.sender, 0)
            self._next_seq[message.sender] = seq + 1
            message.msg_id = (message.sender, seq)
            self._seen[message.msg_id] = {message.sender}
        seen = self._seen.setdefault(message.msg_id, {message.sender})
        for nb in neighbors(states, origin, self.cfg.comm_range):
            if nb in seen:
                continue
            if self.cfg.drop_probability > 0.0:
                if self.rng.random() < self.cfg.drop_probability:
                    continue
            delay = self.cfg.mean_delay
            if self.cfg.delay_jitter > 0.0:
                delay += self.rng.uniform(-self.cfg.delay_jitter,
                                          self.cfg.delay_jitter)
            when = now + max(0.0, delay)
            key = (when, message.msg_id[0], message.msg_id[1], nb)
            heapq.heappush(self._queue, _QueueEntry(key, message, nb))

    def deliver_due(self, now: float, states: List[AgentState]) -> Dict[int, List[Message]]:
        """Pop everything due, forward flooded messages, group by recipient.

        Duplicates (same message id already delivered to that recipient)
        are dropped here. Forwarded copies keep the message id and bump
        hop_count; with zero delay a flood can traverse several hops
        within one call, bounded by max_hops and the seen set.
        """
        out: Dict[int, List[Message]] = {}
        while self._queue and self._queue[0].sort_key[0] <= now:
            entry = heapq.heappop(self._queue)
            msg = entry.message
            rcpt = entry.recipient
            seen = self._seen[msg.msg_id]
            if rcpt in seen:
                continue
            seen.add(rcpt)
            out.setdefault(rcpt, []).append(msg)
            if self.trace is not None:
                self.trace.append(
                    (entry.sort_key[0], msg.kind, msg.sender, rcpt, msg.hop_count)
                )
            if msg.propagate and msg.hop_count < self.cfg.max_hops:
                fwd = replace(msg, hop_count=msg.hop_count + 1)
                self.send(fwd, states, entry.sort_key[0], forwarder=rcpt)
        return out
