"""Tests for the simulated mesh: topology, latency, loss, flooding."""

import random

import numpy as np
import pytest

from meshswarm.meshnet import (
    KIND_BID, KIND_POSITION, BidAnnounce, MeshNetwork, Message, NetworkConfig,
    PositionUpdate, neighbors,
)
from meshswarm.world import AgentState


def state(x, agent_id) -> AgentState:
    return AgentState(agent_id=agent_id, position=np.array([x, 0.0, 40.0]),
                      velocity=np.zeros(3), acceleration=np.zeros(3),
                      max_speed_actual=40.0,
                      max_acc_actual=np.array([3.0, 3.0, 6.0]))


def network(**kw) -> MeshNetwork:
    cfg = NetworkConfig(**kw).resolve(world_comm_range=200.0)
    return MeshNetwork(cfg, random.Random(kw.pop("rng_seed", 0)))


def bid_msg(sender, sent_at=0.0, tile=0) -> Message:
    return Message(KIND_BID, sender, sent_at,
                   BidAnnounce(tile, 1.0, sender, sent_at), propagate=True)


def pos_msg(sender, sent_at=0.0) -> Message:
    return Message(KIND_POSITION, sender, sent_at,
                   PositionUpdate(np.zeros(3), np.zeros(3), np.zeros(3)),
                   propagate=False)


# -- topology --------------------------------------------------------------------


def test_neighbors_within_range_mutual():
    states = [state(0.0, 0), state(150.0, 1)]
    assert neighbors(states, 0, 200.0) == [1]
    assert neighbors(states, 1, 200.0) == [0]


def test_neighbors_out_of_range_empty():
    states = [state(0.0, 0), state(250.0, 1)]
    assert neighbors(states, 0, 200.0) == []


def test_neighbors_chain_sees_only_adjacent():
    states = [state(0.0, 0), state(150.0, 1), state(300.0, 2)]
    assert neighbors(states, 0, 200.0) == [1]
    assert neighbors(states, 2, 200.0) == [1]
    assert neighbors(states, 1, 200.0) == [0, 2]


def test_neighbors_unknown_id_raises():
    with pytest.raises(KeyError):
        neighbors([state(0.0, 0)], 9, 200.0)


def test_neighbors_boundary_inclusive():
    states = [state(0.0, 0), state(200.0, 1)]
    assert neighbors(states, 0, 200.0) == [1]


# -- delivery ---------------------------------------------------------------------


def test_zero_delay_delivered_at_next_tick():
    net = network()
    states = [state(0.0, 0), state(10.0, 1)]
    net.send(pos_msg(0, sent_at=0.0), states, now=0.0)
    # Not yet due strictly before the send instant; due at the tick boundary.
    batches = net.deliver_due(0.0, states)
    assert [m.sender for m in batches.get(1, [])] == [0]


def test_total_loss_never_delivers():
    net = network(drop_probability=1.0)
    states = [state(0.0, 0), state(10.0, 1)]
    for k in range(50):
        net.send(pos_msg(0, sent_at=0.05 * k), states, now=0.05 * k)
    assert net.pending() == 0


def test_two_hop_chain_propagation_doubles_delay():
    net = network(mean_delay=1.0, delay_jitter=0.0)
    states = [state(0.0, 0), state(150.0, 1), state(300.0, 2)]
    net.send(bid_msg(0, sent_at=0.0), states, now=0.0)

    # Hop 1 lands on B at t=1; C (out of A's range) has nothing yet.
    first = net.deliver_due(1.0, states)
    assert 1 in first and 2 not in first
    # The forwarded copy reaches C one more delay later, hop_count bumped.
    second = net.deliver_due(2.0, states)
    got = second[2][0]
    assert got.sender == 0
    assert got.hop_count == 1
    assert got.sent_at == 0.0


def test_same_tick_batch_ordered_by_sender():
    net = network()
    states = [state(0.0, 0), state(10.0, 3), state(20.0, 7)]
    net.send(pos_msg(7, sent_at=0.0), states, now=0.0)
    net.send(pos_msg(3, sent_at=0.0), states, now=0.0)
    batch = net.deliver_due(0.0, states)[0]
    assert [m.sender for m in batch] == [3, 7]


def test_future_message_not_delivered_early():
    net = network(mean_delay=1.0, delay_jitter=0.0)
    states = [state(0.0, 0), state(10.0, 1)]
    net.send(pos_msg(0, sent_at=0.0), states, now=0.0)
    assert net.deliver_due(0.95, states) == {}
    assert 1 in net.deliver_due(1.0, states)


def test_no_duplicate_delivery_under_flood_loops():
    # Dense triangle: every flood path would revisit nodes without the
    # seen-set; each recipient must still get exactly one copy.
    net = network()
    states = [state(0.0, 0), state(10.0, 1), state(20.0, 2)]
    net.send(bid_msg(0, sent_at=0.0), states, now=0.0)
    total = {}
    for step in range(10):
        for rcpt, msgs in net.deliver_due(0.05 * step, states).items():
            total.setdefault(rcpt, []).extend(msgs)
    assert sorted(total) == [1, 2]
    assert all(len(v) == 1 for v in total.values())
    assert net.pending() == 0


def test_flood_reaches_connected_component():
    # 8-node line, 150 m spacing: only flooding can cross it.
    net = network()
    states = [state(150.0 * k, k) for k in range(8)]
    net.send(bid_msg(0, sent_at=0.0), states, now=0.0)
    reached = set()
    for step in range(40):
        for rcpt in net.deliver_due(0.05 * step, states):
            reached.add(rcpt)
        if net.pending() == 0:
            break
    assert reached == {1, 2, 3, 4, 5, 6, 7}


def test_max_hops_bounds_flood_depth():
    net = network(max_hops=2)
    states = [state(150.0 * k, k) for k in range(8)]
    net.send(bid_msg(0, sent_at=0.0), states, now=0.0)
    reached = set()
    for step in range(40):
        for rcpt in net.deliver_due(0.05 * step, states):
            reached.add(rcpt)
        if net.pending() == 0:
            break
    # hop 0 lands on 1, hop 1 on 2, hop 2 on 3; the flood stops there.
    assert reached == {1, 2, 3}


def test_position_updates_do_not_propagate():
    net = network()
    states = [state(0.0, 0), state(150.0, 1), state(300.0, 2)]
    net.send(pos_msg(0, sent_at=0.0), states, now=0.0)
    reached = set()
    for step in range(10):
        for rcpt in net.deliver_due(0.05 * step, states):
            reached.add(rcpt)
        if net.pending() == 0:
            break
    assert reached == {1}


# -- delay statistics ----------------------------------------------------------------


def test_empirical_delay_mean_within_five_percent():
    cfg = NetworkConfig(mean_delay=1.0).resolve(200.0)
    net = MeshNetwork(cfg, random.Random(0))
    states = [state(0.0, 0), state(10.0, 1)]
    total, count = 0.0, 0
    for k in range(10000):
        net.send(pos_msg(0, sent_at=0.0), states, now=0.0)
    while net.pending():
        entry = net._queue[0]
        batches = net.deliver_due(entry.sort_key[0], states)
        for msgs in batches.values():
            total += entry.sort_key[0]
            count += len(msgs)
    assert count == 10000
    assert abs(total / count - 1.0) <= 0.05


def test_jitter_defaults_to_quarter_of_mean():
    cfg = NetworkConfig(mean_delay=3.2).resolve(200.0)
    assert cfg.delay_jitter == pytest.approx(0.8)
    explicit = NetworkConfig(mean_delay=3.2, delay_jitter=0.1).resolve(200.0)
    assert explicit.delay_jitter == 0.1


def test_latency_never_negative():
    cfg = NetworkConfig(mean_delay=0.1, delay_jitter=5.0).resolve(200.0)
    net = MeshNetwork(cfg, random.Random(1))
    states = [state(0.0, 0), state(10.0, 1)]
    for _ in range(2000):
        net.send(pos_msg(0, sent_at=7.0), states, now=7.0)
    while net.pending():
        assert net._queue[0].sort_key[0] >= 7.0
        net.deliver_due(net._queue[0].sort_key[0], states)


# -- determinism -----------------------------------------------------------------------


def test_schedule_deterministic_for_fixed_seed():
    def run():
        cfg = NetworkConfig(mean_delay=0.5, drop_probability=0.3).resolve(200.0)
        net = MeshNetwork(cfg, random.Random(99))
        states = [state(0.0, 0), state(50.0, 1), state(100.0, 2)]
        log = []
        for k in range(200):
            now = 0.05 * k
            net.send(pos_msg(k % 3, sent_at=now), states, now)
            for rcpt, msgs in net.deliver_due(now, states).items():
                for m in msgs:
                    log.append((round(now, 4), rcpt, m.sender, m.sent_at))
        return log

    assert run() == run()


def test_unresolved_config_rejected():
    with pytest.raises(ValueError):
        MeshNetwork(NetworkConfig(mean_delay=1.0), random.Random(0))
