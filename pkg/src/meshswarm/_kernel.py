"""Compiled per-tick decision solver.

Same algorithm as optimizer.minimize (DE/rand/1/bin, feasibility-rule
selection, incumbent wins ties) with the cost formulas from costs.py
inlined, compiled with numba so a full solve fits the per-tick budget.
Draws come from the MT19937 stream seeded per call, so results are a
pure function of the arguments. Kept in lockstep with costs.objective /
costs.feasible by tests that compare both pointwise.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _eval_point(x0, x1, x2, neighbors, dwork,
                has_goal, gx, gy, gz,
                w_eta, w_z, w_g, delta_min, c_penalty, alpha,
                c_dist, z_min, z_max, comm_range):
    """Objective value and separation violation at one candidate point."""
    n = neighbors.shape[0]
    viol = 0.0
    for k in range(n):
        dx = x0 - neighbors[k, 0]
        dy = x1 - neighbors[k, 1]
        dz = x2 - neighbors[k, 2]
        d = math.sqrt(dx * dx + dy * dy + dz * dz)
        dwork[k] = d
        if d < delta_min:
            viol += delta_min - d
    c_eta = 0.0
    if n > 0:
        for a in range(1, n):
            key = dwork[a]
            b = a - 1
            while b >= 0 and dwork[b] > key:
                dwork[b + 1] = dwork[b]
                b -= 1
            dwork[b + 1] = key
        total = 0.0
        weight = 1.0
        for a in range(n):
            d = dwork[a]
            if d < 0.75 * comm_range:
                f = 2.0 * d / comm_range - 1.0
            else:
                f = c_penalty
            weight *= alpha
            total += weight * f
        c_eta = min(1.0, total / n)
    if z_min > x2:
        t = x2 / z_min - 1.0
    else:
        t = (x2 - z_min) / z_max
    c_z = min(1.0, t * t)
    value = w_eta * c_eta + w_z * c_z
    if has_goal:
        dx = x0 - gx
        dy = x1 - gy
        dz = x2 - gz
        dist = math.sqrt(dx * dx + dy * dy + dz * dz)
        value += w_g * min(1.0, (2.0 / math.pi) * math.atan(dist / c_dist))
    return value, viol


@njit(cache=True)
def solve_decision(px, py, pz, vx, vy, vz,
                   amax0, amax1, amax2, dt,
                   neighbors, has_goal, gx, gy, gz,
                   w_eta, w_z, w_g, delta_min, c_penalty, alpha,
                   c_dist, z_min, z_max, comm_range,
                   pop_size, generations, weight, crossover, seed):
    """Solve one decision step; returns (x, y, z, value, violation, feasible).

    The search box is the one-step reachable set around the ballistic
    point. When nothing feasible exists the returned point is the least
    violating one found (callers treat it as the escape direction).
    """
    np.random.seed(seed)
    lo = np.empty(3)
    hi = np.empty(3)
    lo[0] = px + vx * dt - 0.5 * amax0 * dt * dt
    hi[0] = px + vx * dt + 0.5 * amax0 * dt * dt
    lo[1] = py + vy * dt - 0.5 * amax1 * dt * dt
    hi[1] = py + vy * dt + 0.5 * amax1 * dt * dt
    lo[2] = pz + vz * dt - 0.5 * amax2 * dt * dt
    hi[2] = pz + vz * dt + 0.5 * amax2 * dt * dt

    n_nb = neighbors.shape[0]
    dwork = np.empty(max(n_nb, 1))
    pop = np.empty((pop_size, 3))
    vals = np.empty(pop_size)
    viols = np.empty(pop_size)
    any_feasible = False
    for i in range(pop_size):
        for d in range(3):
            pop[i, d] = lo[d] + (hi[d] - lo[d]) * np.random.random()
        v, c = _eval_point(pop[i, 0], pop[i, 1], pop[i, 2], neighbors, dwork,
                           has_goal, gx, gy, gz, w_eta, w_z, w_g, delta_min,
                           c_penalty, alpha, c_dist, z_min, z_max, comm_range)
        vals[i] = v
        viols[i] = c
        if c == 0.0:
            any_feasible = True

    trial = np.empty(3)
    for _ in range(generations):
        for i in range(pop_size):
            r1 = i
            while r1 == i:
                r1 = int(np.random.random() * pop_size)
            r2 = i
            while r2 == i or r2 == r1:
                r2 = int(np.random.random() * pop_size)
            r3 = i
            while r3 == i or r3 == r1 or r3 == r2:
                r3 = int(np.random.random() * pop_size)
            j_rand = int(np.random.random() * 3)
            for d in range(3):
                take = d == j_rand
                if not take:
                    take = np.random.random() < crossover
                if take:
                    t = pop[r1, d] + weight * (pop[r2, d] - pop[r3, d])
                    if t < lo[d]:
                        t = lo[d]
                    elif t > hi[d]:
                        t = hi[d]
                    trial[d] = t
                else:
                    trial[d] = pop[i, d]
            v, c = _eval_point(trial[0], trial[1], trial[2], neighbors, dwork,
                               has_goal, gx, gy, gz, w_eta, w_z, w_g, delta_min,
                               c_penalty, alpha, c_dist, z_min, z_max, comm_range)
            if c == 0.0:
                any_feasible = True
            if c == 0.0 and viols[i] == 0.0:
                better = v < vals[i]
            elif c == 0.0:
                better = True
            elif viols[i] == 0.0:
                better = False
            else:
                better = c < viols[i]
            if better:
                pop[i, 0] = trial[0]
                pop[i, 1] = trial[1]
                pop[i, 2] = trial[2]
                vals[i] = v
                viols[i] = c

    best = 0
    for i in range(1, pop_size):
        if viols[i] == 0.0 and viols[best] == 0.0:
            better = vals[i] < vals[best]
        elif viols[i] == 0.0:
            better = True
        elif viols[best] == 0.0:
            better = False
        else:
            better = viols[i] < viols[best]
        if better:
            best = i
    return (pop[best, 0], pop[best, 1], pop[best, 2],
            vals[best], viols[best], any_feasible)
