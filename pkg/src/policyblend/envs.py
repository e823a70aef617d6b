"""Deterministic 2D point-mass environments with constant-velocity obstacles.

Two scenario kinds are supported:

* ``toy_box`` -- a C-shaped box built from a rigid ring of circle obstacles
  that translates horizontally at constant speed and reflects at its travel
  bounds.  The goal is pinned to the geometric center of the box, so the only
  way in is through the opening at the top.
* ``toy_maze`` -- randomly placed circular obstacles (partly static, partly
  moving) in a corridor region between a sampled start and goal.

Dynamics are a double integrator under semi-implicit Euler with a velocity
norm clamp.  Environments are value semantic: ``clone()`` gives an
independent copy, so planner rollouts never touch the live episode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Arena:
    width: float = 1000.0
    height: float = 1000.0
    dt: float = 1.0
    max_steps: int = 500
    goal_radius: float = 15.0
    particle_radius: float = 5.0
    v_max: float = 40.0

    @property
    def diag(self) -> float:
        return math.hypot(self.width, self.height)


@dataclass(frozen=True)
class Context:
    """Environment snapshot attached to a state."""

    goal: np.ndarray
    obs_centers: np.ndarray   # (m, 2)
    obs_vels: np.ndarray      # (m, 2)
    obs_radii: np.ndarray     # (m,)
    width: float
    height: float
    t: int


@dataclass(frozen=True)
class State:
    q: np.ndarray
    qdot: np.ndarray
    context: Context

    def __post_init__(self):
        if self.q.shape != self.qdot.shape:
            raise ValueError("q and qdot must have identical dimension")


def _advance_points(centers, vels, lo, hi, dt):
    """One constant-velocity step with reflection at per-point bounds.

    Mutates nothing; returns new (centers, vels).  Bounds may be +-inf for
    unconstrained axes.
    """
    c = centers + vels * dt
    v = vels.copy()
    over = c > hi
    c = np.where(over, 2.0 * hi - c, c)
    under = c < lo
    c = np.where(under, 2.0 * lo - c, c)
    v = np.where(over | under, -v, v)
    return c, v


class PlanarEnv:
    """Mutable point-mass environment; one owner per live episode."""

    def __init__(self, arena: Arena, q, qdot, goal, goal_vel, goal_lo, goal_hi,
                 centers, vels, radii, obs_lo, obs_hi, cost_cfg: dict, t: int = 0):
        self.arena = arena
        self.q = np.asarray(q, dtype=float).copy()
        self.qdot = np.asarray(qdot, dtype=float).copy()
        self.goal = np.asarray(goal, dtype=float).copy()
        self.goal_vel = np.asarray(goal_vel, dtype=float).copy()
        self.goal_lo = np.asarray(goal_lo, dtype=float).copy()
        self.goal_hi = np.asarray(goal_hi, dtype=float).copy()
        self.centers = np.asarray(centers, dtype=float).reshape(-1, 2).copy()
        self.vels = np.asarray(vels, dtype=float).reshape(-1, 2).copy()
        self.radii = np.asarray(radii, dtype=float).reshape(-1).copy()
        self.obs_lo = np.asarray(obs_lo, dtype=float).reshape(-1, 2).copy()
        self.obs_hi = np.asarray(obs_hi, dtype=float).reshape(-1, 2).copy()
        self.cost_cfg = dict(cost_cfg)
        self.t = t
        if np.any(self.radii <= 0):
            raise ConfigError("obstacle radii must be strictly positive")

    @property
    def n_obstacles(self) -> int:
        return self.centers.shape[0]

    def clone(self) -> "PlanarEnv":
        return PlanarEnv(self.arena, self.q, self.qdot, self.goal, self.goal_vel,
                         self.goal_lo, self.goal_hi, self.centers, self.vels,
                         self.radii, self.obs_lo, self.obs_hi, self.cost_cfg, self.t)

    def state(self) -> State:
        ctx = Context(self.goal.copy(), self.centers.copy(), self.vels.copy(),
                      self.radii.copy(), self.arena.width, self.arena.height, self.t)
        return State(self.q.copy(), self.qdot.copy(), ctx)

    def step(self, a) -> State:
        a = np.asarray(a, dtype=float)
        dt = self.arena.dt
        qdot = self.qdot + a * dt
        speed = float(np.linalg.norm(qdot))
        if speed > self.arena.v_max:
            qdot = qdot * (self.arena.v_max / speed)
        self.qdot = qdot
        self.q = self.q + qdot * dt
        self.centers, self.vels = _advance_points(
            self.centers, self.vels, self.obs_lo, self.obs_hi, dt)
        g, gv = _advance_points(self.goal[None, :], self.goal_vel[None, :],
                                self.goal_lo[None, :], self.goal_hi[None, :], dt)
        self.goal, self.goal_vel = g[0], gv[0]
        self.t += 1
        return self.state()

    def in_collision(self) -> bool:
        pr = self.arena.particle_radius
        if np.any(self.q < 0.0) or self.q[0] > self.arena.width or self.q[1] > self.arena.height:
            return True
        if self.n_obstacles == 0:
            return False
        d = np.linalg.norm(self.centers - self.q, axis=1)
        return bool(np.any(d <= self.radii + pr))

    def dist_to_goal(self) -> float:
        return float(np.linalg.norm(self.q - self.goal))

    def at_goal(self) -> bool:
        return self.dist_to_goal() <= self.arena.goal_radius

    def cost(self, a) -> float:
        """Per-step cost c(s, a); the planner scores log p(O=1|a,s) = -c."""
        cc = self.cost_cfg
        a = np.asarray(a, dtype=float)
        c = cc["w_goal"] * self.dist_to_goal() / self.arena.diag
        if self.in_collision():
            c += cc["w_col"]
        if self.n_obstacles:
            surf = np.linalg.norm(self.centers - self.q, axis=1) - self.radii
            prox = np.maximum(0.0, 1.0 - surf / cc["influence"])
            c += cc["w_prox"] * float(np.sum(prox * prox))
        c += cc["w_ctrl"] * float(a @ a)
        return c

    def forecast(self, horizon: int):
        """Obstacle and goal positions for the next `horizon` steps.

        Returns (obs_traj (h+1, m, 2), goal_traj (h+1, 2)); index 0 is the
        current step.  Obstacle motion is independent of the particle, so one
        forecast serves every rollout of a planning cycle.
        """
        m = self.n_obstacles
        obs = np.empty((horizon + 1, m, 2))
        goal = np.empty((horizon + 1, 2))
        c, v = self.centers, self.vels
        g, gv = self.goal[None, :], self.goal_vel[None, :]
        obs[0], goal[0] = c, g[0]
        for k in range(1, horizon + 1):
            c, v = _advance_points(c, v, self.obs_lo, self.obs_hi, self.arena.dt)
            g, gv = _advance_points(g, gv, self.goal_lo[None, :],
                                    self.goal_hi[None, :], self.arena.dt)
            obs[k], goal[k] = c, g[0]
        return obs, goal


def _box_ring(half: float, wall_radius: float, spacing: float, opening: float,
              closed: bool) -> np.ndarray:
    """Circle centers (relative to box center) outlining a square box.

    The top edge keeps a gap of width `opening` centered on the box unless
    `closed` is set.
    """
    xs = np.arange(-half, half + 0.5 * spacing, spacing)
    ys = np.arange(-half + spacing, half - 0.5 * spacing, spacing)
    pts = []
    for x in xs:                      # bottom edge
        pts.append((x, -half))
    for x in xs:                      # top edge, with opening
        if closed or abs(x) >= opening / 2.0:
            pts.append((x, half))
    for y in ys:                      # side edges (corners already placed)
        pts.append((-half, y))
        pts.append((half, y))
    out = np.array(pts, dtype=float)
    # pad to wall thickness 2*wall_radius by construction; spacing <= 2*r keeps
    # the outline impassable for the particle.
    assert spacing <= 2.0 * wall_radius + 1e-9
    return out


def make_env(cfg: dict, seed: int) -> PlanarEnv:
    """Build the initial environment for a scenario (the reset operation)."""
    arena = Arena(**cfg.get("arena", {}))
    sc = cfg["scenario"]
    cost_cfg = cfg["cost"]
    kind = sc["env_kind"]
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & (2**63 - 1), 0xE17]))
    if kind == "toy_box":
        return _make_toy_box(arena, sc, cost_cfg, rng)
    if kind == "toy_maze":
        return _make_toy_maze(arena, sc, cost_cfg, rng)
    raise ConfigError(f"unknown env_kind: {kind!r}")


def _make_toy_box(arena, sc, cost_cfg, rng) -> PlanarEnv:
    center = np.asarray(sc.get("center", [500.0, 500.0]), dtype=float)
    half = float(sc.get("box_half", 150.0))
    wall_r = float(sc.get("wall_radius", 10.0))
    spacing = float(sc.get("wall_spacing", 20.0))
    opening = float(sc.get("opening_width", 120.0))
    closed = bool(sc.get("closed_box", False))
    speed = float(sc.get("box_speed", 10.0))
    travel = float(sc.get("travel", 150.0))
    if not 0.0 <= speed <= 30.0:
        raise ConfigError("box_speed must lie in [0, 30]")

    rel = _box_ring(half, wall_r, spacing, opening, closed)
    centers = center[None, :] + rel
    m = centers.shape[0]
    direction = 1.0 if rng.random() < 0.5 else -1.0
    vels = np.zeros((m, 2))
    vels[:, 0] = direction * speed
    radii = np.full(m, wall_r)
    # Per-circle bounds share the box-center travel window shifted by the
    # circle offset, so the whole ring reflects as one rigid body.
    lo = np.column_stack([rel[:, 0] + center[0] - travel, np.full(m, -np.inf)])
    hi = np.column_stack([rel[:, 0] + center[0] + travel, np.full(m, np.inf)])

    goal = center.copy()
    goal_vel = np.array([direction * speed, 0.0])
    goal_lo = np.array([center[0] - travel, -np.inf])
    goal_hi = np.array([center[0] + travel, np.inf])

    sx_lo, sx_hi = sc.get("start_x", [60.0, 160.0])
    sy_lo, sy_hi = sc.get("start_y", [400.0, 600.0])
    x = rng.uniform(sx_lo, sx_hi)
    if rng.random() < 0.5:
        x = arena.width - x
    q = np.array([x, rng.uniform(sy_lo, sy_hi)])
    return PlanarEnv(arena, q, np.zeros(2), goal, goal_vel, goal_lo, goal_hi,
                     centers, vels, radii, lo, hi, cost_cfg)


def _make_toy_maze(arena, sc, cost_cfg, rng) -> PlanarEnv:
    m = int(sc.get("n_obstacles", 10))
    n_dyn = int(sc.get("n_dynamic", 5))
    if n_dyn > m:
        raise ConfigError("n_dynamic must not exceed n_obstacles")
    region = sc.get("spawn_region", [250.0, 50.0, 750.0, 950.0])  # x0 y0 x1 y1
    x0, y0, x1, y1 = (float(v) for v in region)
    r_lo, r_hi = sc.get("obstacle_radius", [30.0, 60.0])
    v_lo, v_hi = sc.get("obstacle_speed", [1.0, 4.0])

    centers = np.column_stack([rng.uniform(x0, x1, size=m),
                               rng.uniform(y0, y1, size=m)])
    radii = rng.uniform(r_lo, r_hi, size=m)
    vels = np.zeros((m, 2))
    ang = rng.uniform(0.0, 2.0 * math.pi, size=n_dyn)
    spd = rng.uniform(v_lo, v_hi, size=n_dyn)
    vels[:n_dyn, 0] = spd * np.cos(ang)
    vels[:n_dyn, 1] = spd * np.sin(ang)
    lo = np.tile([x0, y0], (m, 1))
    hi = np.tile([x1, y1], (m, 1))

    margin = arena.particle_radius + 10.0

    def sample_free(xa, xb, ya, yb):
        for _ in range(100):
            p = np.array([rng.uniform(xa, xb), rng.uniform(ya, yb)])
            if np.all(np.linalg.norm(centers - p, axis=1) > radii + margin):
                return p
        raise ConfigError("could not place a collision-free start/goal")

    start_box = sc.get("start_region", [50.0, 100.0, 150.0, 900.0])
    goal_box = sc.get("goal_region", [850.0, 100.0, 950.0, 900.0])
    q = sample_free(*[float(v) for v in (start_box[0], start_box[2], start_box[1], start_box[3])])
    goal = sample_free(*[float(v) for v in (goal_box[0], goal_box[2], goal_box[1], goal_box[3])])

    inf = np.array([np.inf, np.inf])
    return PlanarEnv(arena, q, np.zeros(2), goal, np.zeros(2), -inf, inf,
                     centers, vels, radii, lo, hi, cost_cfg)
