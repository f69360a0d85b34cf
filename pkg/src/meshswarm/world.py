"""World model: configuration, tile grid, agent kinematics and ground truth.

Distances are meters, times are seconds. The world is a flat rectangle of
square tiles; agents are point masses with per-axis acceleration limits and
a norm-bounded speed, integrated with semi-implicit Euler at a fixed step.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np


@dataclass
class WorldConfig:
    """Static world, vehicle and timing parameters."""

    area_width: float = 600.0
    area_height: float = 400.0
    tile_size: float = 25.0
    search_radius: float = 5.0
    search_altitude: float = 40.0
    z_min: float = 35.0
    z_max: float = 100.0
    altitude_tolerance: float = 2.0
    collision_radius: float = 1.0
    comm_range: float = 200.0
    max_speed: float = 40.0
    max_acc_horizontal: float = 3.0
    max_acc_vertical: float = 6.0
    sim_dt: float = 0.05
    t_update: float = 0.05
    t_broadcast: float = 0.25
    t_auction: float = 0.5
    t_max: float = 300.0
    gps_noise_radius: float = 2.0
    plan_horizon: float = 1.0

    def grid_shape(self) -> Tuple[int, int]:
        """Return (n_rows, n_cols); raises ValueError if tiles do not fit."""
        n_cols = self.area_width / self.tile_size
        n_rows = self.area_height / self.tile_size
        if abs(n_cols - round(n_cols)) > 1e-9 or abs(n_rows - round(n_rows)) > 1e-9:
            raise ValueError(
                "world.tile_size %g does not evenly divide area %gx%g"
                % (self.tile_size, self.area_width, self.area_height)
            )
        return int(round(n_rows)), int(round(n_cols))

    def max_acc(self) -> np.ndarray:
        return np.array(
            [self.max_acc_horizontal, self.max_acc_horizontal, self.max_acc_vertical]
        )


@dataclass
class AgentState:
    """Ground-truth kinematic state of one agent.

    max_speed_actual and max_acc_actual are this agent's own limits, which
    heterogeneous trials perturb away from the configured fleet values.
    """

    agent_id: int
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    max_speed_actual: float
    max_acc_actual: np.ndarray


@dataclass
class Heterogeneity:
    """Per-agent capability noise, drawn once per trial from its seed."""

    velocity_noise_sigma: float = 0.0
    acceleration_noise_sigma: float = 0.0


@dataclass
class Tile:
    """One grid cell; true_searched is ground truth owned by the world."""

    index: int
    row: int
    col: int
    center: np.ndarray
    true_searched: bool = False
    searched_by: Optional[int] = None
    searched_at: Optional[float] = None


@dataclass
class SimClock:
    """Tick counter; now is always tick * dt exactly (no float accumulation)."""

    dt: float
    tick: int = 0

    @property
    def now(self) -> float:
        return self.tick * self.dt

    def advance(self) -> None:
        self.tick += 1


def build_grid(cfg: WorldConfig) -> List[Tile]:
    """Lay out tiles row-major; centers at z = search_altitude."""
    n_rows, n_cols = cfg.grid_shape()
    tiles = []
    for row in range(n_rows):
        for col in range(n_cols):
            center = np.array(
                [
                    (col + 0.5) * cfg.tile_size,
                    (row + 0.5) * cfg.tile_size,
                    cfg.search_altitude,
                ]
            )
            tiles.append(Tile(index=row * n_cols + col, row=row, col=col, center=center))
    return tiles


def containing_tile_index(cfg: WorldConfig, n_rows: int, n_cols: int,
                          x: float, y: float) -> Optional[int]:
    """Index of the tile containing (x, y), or None when outside the area."""
    col = int(math.floor(x / cfg.tile_size))
    row = int(math.floor(y / cfg.tile_size))
    if col < 0 or col >= n_cols or row < 0 or row >= n_rows:
        return None
    return row * n_cols + col


def check_tile_searched(tile: Tile, position: np.ndarray, cfg: WorldConfig) -> bool:
    """True when the agent position satisfies the search geometry for the tile.

    Horizontal distance to the tile center must be at most search_radius and
    altitude within altitude_tolerance of search_altitude (both inclusive).
    """
    dx = position[0] - tile.center[0]
    dy = position[1] - tile.center[1]
    if dx * dx + dy * dy > cfg.search_radius * cfg.search_radius:
        return False
    return abs(position[2] - cfg.search_altitude) <= cfg.altitude_tolerance


def step_kinematics(state: AgentState, desired_position: np.ndarray, dt: float,
                    horizon: Optional[float] = None) -> None:
    """Advance one step toward desired_position (semi-implicit Euler).

    The commanded acceleration is the constant one that would land on the
    desired position at the horizon, a = 2*(desired - p - v*h) / h^2, clamped
    per axis (h defaults to dt). Written as a servo this is a PD law with
    damping ratio 1/sqrt(2), so a desired position equal to the current one
    commands braking rather than zero input. Velocity is integrated first,
    clamped to max_speed by norm, then position.
    """
    p = state.position
    v = state.velocity
    h = dt if horizon is None else horizon
    gain = 2.0 / (h * h)
    ax = desired_position[0] - p[0] - v[0] * h
    ay = desired_position[1] - p[1] - v[1] * h
    az = desired_position[2] - p[2] - v[2] * h
    lim = state.max_acc_actual
    ax = min(max(ax * gain, -lim[0]), lim[0])
    ay = min(max(ay * gain, -lim[1]), lim[1])
    az = min(max(az * gain, -lim[2]), lim[2])

    vx = v[0] + ax * dt
    vy = v[1] + ay * dt
    vz = v[2] + az * dt
    speed = math.sqrt(vx * vx + vy * vy + vz * vz)
    if speed > state.max_speed_actual:
        scale = state.max_speed_actual / speed
        vx *= scale
        vy *= scale
        vz *= scale
    # Effective acceleration (after clamps) is what gets dead-reckoned by peers.
    state.acceleration[0] = (vx - v[0]) / dt
    state.acceleration[1] = (vy - v[1]) / dt
    state.acceleration[2] = (vz - v[2]) / dt
    v[0] = vx
    v[1] = vy
    v[2] = vz
    p[0] += vx * dt
    p[1] += vy * dt
    p[2] += vz * dt


def detect_collisions(states: List[AgentState], radius: float) -> List[Tuple[int, int]]:
    """All unordered agent pairs strictly closer than radius, sorted by id."""
    pairs = []
    n = len(states)
    r2 = radius * radius
    for i in range(n):
        pi = states[i].position
        for j in range(i + 1, n):
            pj = states[j].position
            dx = pi[0] - pj[0]
            dy = pi[1] - pj[1]
            dz = pi[2] - pj[2]
            if dx * dx + dy * dy + dz * dz < r2:
                pairs.append((states[i].agent_id, states[j].agent_id))
    pairs.sort()
    return pairs


def gps_jitter(position: np.ndarray, radius: float, rng) -> np.ndarray:
    """Position with uniform-disk horizontal noise applied; z is exact."""
    r = radius * math.sqrt(rng.random())
    theta = 2.0 * math.pi * rng.random()
    noisy = position.copy()
    noisy[0] += r * math.cos(theta)
    noisy[1] += r * math.sin(theta)
    return noisy
