"""Distributed tile auctions: scoring, local deadlines and reconciliation.

Every agent keeps its own belief per tile. Auctions are not centrally
resolved: an agent that first hears (or places) a bid starts a local
deadline; at the deadline the highest bid it knows about wins. Later
information is reconciled through announce and correction messages, so
beliefs converge even when messages arrive after deadlines have passed.
All bid comparisons use (value, bidder id) so exact ties are impossible.
"""

import enum
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .meshnet import (
    KIND_BID, KIND_CLAIM, KIND_CORRECTION, KIND_SEARCHED,
    BidAnnounce, ClaimAnnounce, Correction, SearchedAnnounce,
)


class BeliefState(enum.Enum):
    UNCLAIMED = "unclaimed"
    IN_AUCTION = "in_auction"
    CLAIMED_BY_SELF = "claimed_by_self"
    CLAIMED_BY_OTHER = "claimed_by_other"
    SEARCHED = "searched"


@dataclass
class TileBelief:
    index: int
    state: BeliefState = BeliefState.UNCLAIMED
    best_value: float = -math.inf
    best_bidder: int = -1
    auction_deadline: Optional[float] = None
    searched_by_self: bool = False


@dataclass
class Bid:
    tile: int
    value: float
    bidder: int
    placed_at: float


@dataclass
class BidWeights:
    w_dist: float = 1.0
    w_near: float = 0.3


def beats(value_a: float, id_a: int, value_b: float, id_b: int) -> bool:
    """True when bid a wins against bid b; higher id breaks value ties."""
    if value_a != value_b:
        return value_a > value_b
    return id_a > id_b


def score_tile(position: np.ndarray, others: np.ndarray, center: np.ndarray,
               d_max: float, weights: BidWeights) -> float:
    """Bid value for a tile: own proximity plus a crowding bonus.

    The crowding factor is the normalized distance of the nearest believed
    other agent to the tile (1 when no other agent is known), so tiles far
    from everyone else score higher for the same own distance.
    """
    d_self = float(np.linalg.norm(position - center))
    if others.shape[0] == 0:
        nearest = 1.0
    else:
        nearest = math.inf
        for k in range(others.shape[0]):
            dx = others[k, 0] - center[0]
            dy = others[k, 1] - center[1]
            dz = others[k, 2] - center[2]
            nearest = min(nearest, math.sqrt(dx * dx + dy * dy + dz * dz) / d_max)
    return weights.w_dist * (1.0 - d_self / d_max) + weights.w_near * nearest


def open_or_raise(belief: TileBelief, bid: Bid, now: float,
                  t_auction: float) -> List[Tuple[str, object]]:
    """Record an own bid; opens the auction or raises the known best.

    Raising keeps the existing local deadline (the countdown starts with
    the first bid heard, not the latest).
    """
    if belief.state == BeliefState.UNCLAIMED:
        belief.state = BeliefState.IN_AUCTION
        belief.best_value = bid.value
        belief.best_bidder = bid.bidder
        belief.auction_deadline = now + t_auction
    elif belief.state == BeliefState.IN_AUCTION:
        if not beats(bid.value, bid.bidder, belief.best_value, belief.best_bidder):
            raise ValueError("own bid does not beat the known best")
        belief.best_value = bid.value
        belief.best_bidder = bid.bidder
    else:
        raise ValueError("cannot bid on tile in state %s" % belief.state.value)
    return [(KIND_BID, BidAnnounce(bid.tile, bid.value, bid.bidder, bid.placed_at))]


def resolve_deadline(belief: TileBelief, self_id: int,
                     now: float) -> Tuple[Optional[str], List[Tuple[str, object]]]:
    """Close the auction at the local deadline.

    Returns ("won"|"lost", messages). Winning converts the belief to a
    self claim and announces it; losing just records the other claimant.
    """
    if belief.state != BeliefState.IN_AUCTION or belief.auction_deadline is None:
        return None, []
    if now < belief.auction_deadline:
        return None, []
    belief.auction_deadline = None
    if belief.best_bidder == self_id:
        belief.state = BeliefState.CLAIMED_BY_SELF
        msg = ClaimAnnounce(belief.index, belief.best_value, self_id)
        return "won", [(KIND_CLAIM, msg)]
    belief.state = BeliefState.CLAIMED_BY_OTHER
    return "lost", []


def reconcile(belief: TileBelief, kind: str, payload, self_id: int, now: float,
              t_auction: float) -> List[Tuple[str, object]]:
    """Fold an incoming auction message into the belief.

    Returns corrective messages to broadcast. Searched is absorbing; a
    bid or claim on a tile this agent itself searched triggers a searched
    re-announcement. Conflicting claims resolve by bid comparison, the
    loser reverting silently, the winner re-asserting.
    """
    if kind == KIND_CORRECTION:
        kind = KIND_CLAIM if payload.claimed else KIND_BID
        payload = (ClaimAnnounce(payload.tile, payload.value, payload.bidder)
                   if kind == KIND_CLAIM
                   else BidAnnounce(payload.tile, payload.value, payload.bidder, now))

    if kind == KIND_SEARCHED:
        belief.state = BeliefState.SEARCHED
        belief.auction_deadline = None
        return []

    if belief.state == BeliefState.SEARCHED:
        if belief.searched_by_self:
            return [(KIND_SEARCHED, SearchedAnnounce(belief.index, self_id))]
        return []

    if kind == KIND_BID:
        return _reconcile_bid(belief, payload, self_id, now, t_auction)
    if kind == KIND_CLAIM:
        return _reconcile_claim(belief, payload, self_id, now, t_auction)
    raise ValueError("unknown auction message kind %r" % kind)


def _reconcile_bid(belief: TileBelief, bid: BidAnnounce, self_id: int, now: float,
                   t_auction: float) -> List[Tuple[str, object]]:
    if belief.state == BeliefState.UNCLAIMED:
        belief.state = BeliefState.IN_AUCTION
        belief.best_value = bid.value
        belief.best_bidder = bid.bidder
        belief.auction_deadline = now + t_auction
        return []
    if belief.state == BeliefState.IN_AUCTION:
        if beats(bid.value, bid.bidder, belief.best_value, belief.best_bidder):
            belief.best_value = bid.value
            belief.best_bidder = bid.bidder
        return []
    if belief.state == BeliefState.CLAIMED_BY_SELF:
        if beats(bid.value, bid.bidder, belief.best_value, belief.best_bidder):
            # A higher bid displaces the own claim; re-enter the auction.
            belief.state = BeliefState.IN_AUCTION
            belief.best_value = bid.value
            belief.best_bidder = bid.bidder
            belief.auction_deadline = now + t_auction
            return []
        msg = Correction(belief.index, belief.best_value, self_id, True)
        return [(KIND_CORRECTION, msg)]
    if belief.state == BeliefState.CLAIMED_BY_OTHER:
        if beats(bid.value, bid.bidder, belief.best_value, belief.best_bidder):
            belief.state = BeliefState.IN_AUCTION
            belief.best_value = bid.value
            belief.best_bidder = bid.bidder
            belief.auction_deadline = now + t_auction
        return []
    return []


def _reconcile_claim(belief: TileBelief, claim: ClaimAnnounce, self_id: int,
                     now: float, t_auction: float) -> List[Tuple[str, object]]:
    if belief.state == BeliefState.CLAIMED_BY_SELF:
        if beats(claim.value, claim.bidder, belief.best_value, belief.best_bidder):
            belief.state = BeliefState.CLAIMED_BY_OTHER
            belief.best_value = claim.value
            belief.best_bidder = claim.bidder
            return []
        msg = Correction(belief.index, belief.best_value, self_id, True)
        return [(KIND_CORRECTION, msg)]
    if belief.state == BeliefState.IN_AUCTION and belief.best_bidder == self_id:
        if beats(belief.best_value, self_id, claim.value, claim.bidder):
            # Own standing bid outranks the claim: re-assert instead of
            # yielding, otherwise the tile could end up owned by nobody.
            msg = Correction(belief.index, belief.best_value, self_id, False)
            return [(KIND_CORRECTION, msg)]
    belief.state = BeliefState.CLAIMED_BY_OTHER
    belief.best_value = claim.value
    belief.best_bidder = claim.bidder
    belief.auction_deadline = None
    return []
