"""Unit and property tests for the decision cost terms."""

import math
import random

import numpy as np
import pytest

from meshswarm.costs import (
    PROFILE_KEYS, CostProfile, DecisionContext, cohesion_cost, feasible,
    goal_cost, make_context, objective, safety_cost,
)

RC = 200.0


def profile(**kw) -> CostProfile:
    return CostProfile(**kw)


# -- cohesion ---------------------------------------------------------------


def test_cohesion_single_neighbor_at_half_range_is_zero():
    p = profile(alpha=1.0)
    assert cohesion_cost([RC / 2.0], p, RC) == pytest.approx(0.0, abs=1e-9)


def test_cohesion_far_neighbor_pays_penalty():
    p = profile(alpha=1.0, c_penalty=0.75)
    assert cohesion_cost([0.8 * RC], p, RC) == pytest.approx(0.75, abs=1e-9)


def test_cohesion_two_neighbors_hand_value():
    p = profile(alpha=0.5)
    got = cohesion_cost([RC / 4.0, RC / 2.0], p, RC)
    assert got == pytest.approx(-0.125, abs=1e-9)


def test_cohesion_empty_is_zero():
    assert cohesion_cost([], profile(), RC) == 0.0


def test_cohesion_order_invariant():
    p = profile(alpha=0.7, c_penalty=0.4)
    rng = random.Random(11)
    for _ in range(200):
        ds = [rng.uniform(0.0, 1.2 * RC) for _ in range(rng.randint(1, 6))]
        base = cohesion_cost(ds, p, RC)
        rng.shuffle(ds)
        assert cohesion_cost(ds, p, RC) == pytest.approx(base, abs=1e-12)


def test_cohesion_range_bounds():
    rng = random.Random(7)
    for _ in range(500):
        p = profile(alpha=rng.uniform(0.0, 1.0), c_penalty=rng.uniform(0.0, 1.0))
        ds = [rng.uniform(0.0, 2.0 * RC) for _ in range(rng.randint(1, 8))]
        got = cohesion_cost(ds, p, RC)
        assert -1.0 - 1e-12 <= got <= 1.0 + 1e-12


def test_cohesion_minus_one_requires_coincident_and_alpha_one():
    p = profile(alpha=1.0)
    n = 4
    assert cohesion_cost([0.0] * n, p, RC) == pytest.approx(-1.0, abs=1e-12)
    assert cohesion_cost([0.0] * n, profile(alpha=0.9), RC) > -1.0
    assert cohesion_cost([1.0] * n, p, RC) > -1.0


# -- safety -------------------------------------------------------------------


def test_safety_zero_at_band_floor():
    p = profile()
    assert safety_cost(p.z_min, p) == pytest.approx(0.0, abs=1e-9)


def test_safety_ground_level_is_one():
    p = profile()
    assert safety_cost(0.0, p) == pytest.approx(1.0, abs=1e-9)


def test_safety_high_altitude_caps_at_one():
    p = profile()
    assert safety_cost(p.z_min + p.z_max, p) == pytest.approx(1.0, abs=1e-9)


def test_safety_bounds_and_unique_zero():
    p = profile()
    rng = random.Random(3)
    for _ in range(500):
        z = rng.uniform(-50.0, 300.0)
        c = safety_cost(z, p)
        assert 0.0 <= c <= 1.0
        if c == 0.0:
            assert z == pytest.approx(p.z_min)
    assert safety_cost(-10.0, p) == 1.0


# -- goal ---------------------------------------------------------------------


def test_goal_zero_distance():
    assert goal_cost(0.0, profile()) == pytest.approx(0.0, abs=1e-9)


def test_goal_at_distance_scale_is_half():
    p = profile()
    assert goal_cost(p.c_dist, p) == pytest.approx(0.5, abs=1e-9)


def test_goal_far_distance_saturates_below_one():
    p = profile()
    got = goal_cost(1000.0 * p.c_dist, p)
    assert got == pytest.approx((2.0 / math.pi) * math.atan(1000.0), abs=1e-9)
    assert got < 1.0
    assert round(got, 5) == 0.99936


def test_goal_monotone_in_distance():
    p = profile()
    prev = -1.0
    for d in np.linspace(0.0, 5000.0, 400):
        c = goal_cost(float(d), p)
        assert 0.0 <= c < 1.0
        assert c >= prev
        prev = c


# -- objective ------------------------------------------------------------------


def _ctx(neighbors, goal, prof, comm_range=RC):
    arr = np.asarray(neighbors, dtype=float).reshape(-1, 3)
    return DecisionContext(
        profile=prof, comm_range=comm_range,
        box_lower=np.array([-1e9] * 3), box_upper=np.array([1e9] * 3),
        neighbors=arr, goal=None if goal is None else np.asarray(goal, float),
    )


def test_objective_all_weights_zero():
    prof = profile(w_eta=0.0, w_z=0.0, w_g=0.0)
    ctx = _ctx([[5.0, 0.0, 40.0]], [100.0, 0.0, 40.0], prof)
    rng = random.Random(5)
    for _ in range(50):
        cand = np.array([rng.uniform(-100, 100) for _ in range(3)])
        assert objective(cand, ctx) == 0.0


def test_objective_goal_only_zero_at_goal():
    prof = profile(w_eta=0.0, w_z=0.0, w_g=1.0)
    goal = np.array([30.0, 20.0, prof.z_min])
    ctx = _ctx(np.empty((0, 3)), goal, prof)
    assert objective(goal, ctx) == pytest.approx(0.0, abs=1e-12)


def test_objective_weighted_sum_hand_value():
    # Components engineered to (0.75, 1, 0.5): far neighbor at the penalty
    # plateau, altitude one full band above the floor, goal at c_dist.
    prof = profile(w_eta=0.5, w_z=0.3, w_g=0.2, c_penalty=0.75, alpha=1.0)
    z = prof.z_min + prof.z_max
    cand = np.array([0.0, 0.0, z])
    neighbor = [[0.8 * RC, 0.0, z]]
    goal = np.array([prof.c_dist, 0.0, z])
    ctx = _ctx(neighbor, goal, prof)
    assert objective(cand, ctx) == pytest.approx(0.775, abs=1e-9)


def test_objective_omits_goal_term_without_claim():
    prof = profile(w_eta=0.0, w_z=0.0, w_g=1.0)
    cand = np.array([0.0, 0.0, prof.z_min])
    with_goal = _ctx(np.empty((0, 3)), [500.0, 0.0, prof.z_min], prof)
    without = _ctx(np.empty((0, 3)), None, prof)
    assert objective(cand, with_goal) > 0.0
    assert objective(cand, without) == 0.0


def test_objective_translation_invariant_in_xy():
    prof = profile(w_eta=0.4, w_z=0.3, w_g=0.3)
    rng = random.Random(17)
    for _ in range(100):
        cand = np.array([rng.uniform(-50, 50), rng.uniform(-50, 50),
                         rng.uniform(30, 80)])
        nbs = np.array([[rng.uniform(-50, 50), rng.uniform(-50, 50),
                         rng.uniform(30, 80)] for _ in range(3)])
        goal = np.array([rng.uniform(-50, 50), rng.uniform(-50, 50),
                         rng.uniform(30, 80)])
        shift = np.array([rng.uniform(-500, 500), rng.uniform(-500, 500), 0.0])
        base = objective(cand, _ctx(nbs, goal, prof))
        moved = objective(cand + shift, _ctx(nbs + shift, goal + shift, prof))
        assert moved == pytest.approx(base, abs=1e-9)


# -- feasibility -----------------------------------------------------------------


def test_feasible_ballistic_point():
    prof = profile()
    pos = np.array([10.0, 20.0, 40.0])
    vel = np.array([3.0, -1.0, 0.0])
    ctx = make_context(pos, vel, np.array([3.0, 3.0, 6.0]), 0.05,
                       np.empty((0, 3)), None, prof, RC)
    ok, violation = feasible(pos + vel * 0.05, ctx)
    assert ok and violation == 0.0


def test_feasible_coincident_neighbor_violation_equals_delta_min():
    prof = profile(delta_min=10.0)
    pos = np.array([0.0, 0.0, 40.0])
    cand = pos + np.array([0.0, 0.0, 0.0]) * 0.05
    ctx = make_context(pos, np.zeros(3), np.array([3.0, 3.0, 6.0]), 0.05,
                       cand.reshape(1, 3), None, prof, RC)
    ok, violation = feasible(cand, ctx)
    assert not ok
    assert violation == pytest.approx(10.0, abs=1e-9)


def test_feasible_rejects_unreachable_candidate():
    prof = profile()
    pos = np.zeros(3)
    ctx = make_context(pos, np.zeros(3), np.array([3.0, 3.0, 6.0]), 0.05,
                       np.empty((0, 3)), None, prof, RC)
    ok, violation = feasible(np.array([1000.0, 0.0, 0.0]), ctx)
    assert not ok and violation > 0.0


def test_feasible_monotone_in_delta_min():
    rng = random.Random(23)
    pos = np.zeros(3)
    for _ in range(200):
        nbs = np.array([[rng.uniform(-5, 5), rng.uniform(-5, 5),
                         rng.uniform(-5, 5)] for _ in range(2)])
        cand = np.array([rng.uniform(-0.01, 0.01) for _ in range(3)])
        small = make_context(pos, np.zeros(3), np.array([30.0, 30.0, 30.0]), 0.05,
                             nbs, None, profile(delta_min=1.0), RC)
        large = make_context(pos, np.zeros(3), np.array([30.0, 30.0, 30.0]), 0.05,
                             nbs, None, profile(delta_min=8.0), RC)
        ok_small, _ = feasible(cand, small)
        ok_large, _ = feasible(cand, large)
        if ok_large:
            assert ok_small

    # Zero-margin case never flags separation.
    none_ctx = make_context(pos, np.zeros(3), np.array([30.0] * 3), 0.05,
                            np.array([[0.0, 0.0, 0.0]]), None,
                            profile(delta_min=0.0), RC)
    ok, violation = feasible(np.zeros(3), none_ctx)
    assert ok and violation == 0.0


def test_make_context_box_geometry():
    pos = np.array([1.0, 2.0, 3.0])
    vel = np.array([10.0, 0.0, -2.0])
    acc = np.array([3.0, 3.0, 6.0])
    dt = 0.5
    ctx = make_context(pos, vel, acc, dt, np.empty((0, 3)), None, profile(), RC)
    center = pos + vel * dt
    half = 0.5 * acc * dt * dt
    assert np.allclose(ctx.box_lower, center - half)
    assert np.allclose(ctx.box_upper, center + half)


# -- profile serialization ---------------------------------------------------------


def test_profile_keys_exact():
    assert PROFILE_KEYS == ("w_eta", "w_z", "w_g", "delta_min", "c_penalty",
                            "alpha", "c_dist", "z_min", "z_max")
    assert tuple(CostProfile().to_dict().keys()) == PROFILE_KEYS


def test_profile_round_trip_and_unknown_keys():
    p = CostProfile(w_eta=0.1, delta_min=42.0)
    again = CostProfile.from_dict(p.to_dict())
    assert again == p
    with pytest.raises(ValueError, match="unknown profile keys"):
        CostProfile.from_dict({"w_eta": 0.1, "bogus": 1.0})
