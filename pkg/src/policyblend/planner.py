"""Sampling-based high-level planners over the reactive expert blend.

Two planners share the environment's ground-truth dynamics with scripted
constant-velocity obstacle extrapolation as their shooting model:

* ``hipbi_plan`` -- cross-entropy search over Dirichlet-distributed blend
  weights.  One weight vector is held fixed over the whole look-ahead; each
  rollout executes the fused expert mean and is scored by the accumulated
  negative cost (plus an optional fused log-density bonus).
* ``mpc_icem_plan`` -- the action-space baseline: CEM over bounded action
  sequences with colored-noise candidates and elite reuse.

Rollouts are batched over candidates with numpy; obstacle trajectories are
independent of the particle, so one forecast serves a whole planning cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .dirichlet import DirichletParams, dir_sample_n, moment_match
from .envs import PlanarEnv
from .errors import ConfigError
from .experts import build_expert_bank, evaluate_bank, expand_beta, n_blend
from .fusion import fuse, optimal_action

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class PlannerConfig:
    horizon: int = 75
    n_samples: int = 64
    n_elites: int = 8
    n_iters: int = 3
    lambda_pi: float = 0.0
    momentum: float = 0.5
    noise_exponent: float = 2.0
    action_low: float = -10.0
    action_high: float = 10.0
    icem_std: float = 5.0
    std_floor: float = 0.5
    alpha_init: float = 1.0
    precision_cap: float = 10.0
    explore_floor: float = 0.5

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if not 2 <= self.n_elites <= self.n_samples:
            raise ConfigError("need 2 <= n_elites <= n_samples")
        if self.lambda_pi < 0:
            raise ConfigError("lambda_pi must be >= 0")


@dataclass
class Rollout:
    states: list
    actions: list
    score: float
    beta: np.ndarray


@dataclass
class PlanResult:
    posterior: object                  # DirichletParams (hipbi) or action array (baseline)
    executed_beta: np.ndarray | None
    diagnostics: list = field(default_factory=list)
    actions: np.ndarray | None = None


def plan_seed(base_seed: int, *tags: int) -> np.random.SeedSequence:
    """Stable seed derivation for nested planner randomness."""
    return np.random.SeedSequence([int(base_seed) & (2**63 - 1), *[int(t) & (2**63 - 1) for t in tags]])


# ---------------------------------------------------------------------------
# batched shooting engine

class BlendRolloutEngine:
    """Simulates fused-policy rollouts for a batch of blend weight vectors.

    Expert column order matches :func:`policyblend.experts.build_expert_bank`:
    goal attractor, curl pair, damper, then one repulsor per obstacle.
    """

    def __init__(self, env: PlanarEnv, expert_cfg: dict, horizon: int,
                 lambda_pi: float = 0.0):
        self.horizon = horizon
        self.lambda_pi = lambda_pi
        self.arena = env.arena
        self.cost_cfg = env.cost_cfg
        self.q0 = env.q.copy()
        self.v0 = env.qdot.copy()
        self.radii = env.radii.copy()
        self.obs_traj, self.goal_traj = env.forecast(horizon)
        att = expert_cfg["goal_attractor"]
        rep = expert_cfg["obstacle_repulsor"]
        self.k_p, self.k_d, self.c_soft, self.w_goal = (
            att["k_p"], att["k_d"], att["c_soft"], att["w_goal"])
        self.k_curl = expert_cfg["curl"]["k_curl"]
        self.w_curl = expert_cfg["curl"]["w_curl"]
        self.k_damp = expert_cfg["velocity_damper"]["k_damp"]
        self.w_damp = expert_cfg["velocity_damper"]["w_damp"]
        self.k_rep, self.infl, self.w_far, self.w_near = (
            rep["k_rep"], rep["influence_radius"], rep["w_far"], rep["w_near"])
        self.rw = rep.get("radial_weight", 1.0)
        self.tw = rep.get("tangent_weight", 0.1)

    @property
    def n_experts(self) -> int:
        return 4 + self.radii.size

    @property
    def n_blend(self) -> int:
        return n_blend(self.radii.size)

    def fused_mean(self, Q, V, betas, t):
        """Fused action mean for batch positions Q, velocities V at step t.

        Returns (A, logdet) where logdet is log|Lambda| per batch element.
        """
        goal = self.goal_traj[t]
        obs = self.obs_traj[t]
        eps = 1e-3

        delta = goal[None, :] - Q
        dn = np.linalg.norm(delta, axis=1, keepdims=True)
        att = self.k_p * delta / (dn + self.c_soft)
        mu_goal = att - self.k_d * V
        curl = np.empty_like(att)
        curl[:, 0] = -att[:, 1]
        curl[:, 1] = att[:, 0]
        curl *= self.k_curl
        mu_damp = -self.k_damp * V

        b_g, b_cp, b_cn, b_d = betas[:, 0], betas[:, 1], betas[:, 2], betas[:, 3]
        # one shared repulsor-group weight, repeated per obstacle
        b_rep = np.repeat(betas[:, 4:5], self.radii.size, axis=1) if self.radii.size else betas[:, 4:]

        iso = b_g * self.w_goal + (b_cp + b_cn) * self.w_curl + b_d * self.w_damp
        eta = (b_g * self.w_goal)[:, None] * mu_goal \
            + ((b_cp - b_cn) * self.w_curl)[:, None] * curl \
            + (b_d * self.w_damp)[:, None] * mu_damp

        if self.radii.size:
            D = Q[:, None, :] - obs[None, :, :]                  # (B, m, 2)
            r = np.linalg.norm(D, axis=2)
            surf = r - self.radii[None, :]
            dist = np.clip(surf, eps, None)
            inside = surf < self.infl
            U = D / np.clip(r, eps, None)[:, :, None]
            g = np.where(inside, (1.0 - dist / self.infl) ** 2 * (self.infl / (dist + 1.0)), 0.0)
            mu_rep = np.where(inside[:, :, None], self.k_rep * U / (dist * dist)[:, :, None], 0.0)
            # repulsor means are radial, so P @ mu = radial_weight * mu
            eta += np.einsum("bm,bmi->bi", b_rep * (self.w_far + self.w_near * g * self.rw), mu_rep)
            iso = iso + np.sum(b_rep, axis=1) * self.w_far + np.sum(b_rep * g, axis=1) * self.w_near * self.tw
            aniso = (self.rw - self.tw) * self.w_near * b_rep * g   # (B, m)
            S = np.einsum("bm,bmi,bmj->bij", aniso, U, U)
        else:
            S = np.zeros((Q.shape[0], 2, 2))

        l00 = iso + S[:, 0, 0]
        l11 = iso + S[:, 1, 1]
        l01 = S[:, 0, 1]
        det = l00 * l11 - l01 * l01
        A = np.empty_like(Q)
        A[:, 0] = (l11 * eta[:, 0] - l01 * eta[:, 1]) / det
        A[:, 1] = (l00 * eta[:, 1] - l01 * eta[:, 0]) / det
        return A, (l00, l01, l11, det)

    def step_cost(self, Q, A, t):
        goal = self.goal_traj[t]
        obs = self.obs_traj[t]
        cc = self.cost_cfg
        ar = self.arena
        c = cc["w_goal"] * np.linalg.norm(Q - goal[None, :], axis=1) / ar.diag
        outside = (np.min(Q, axis=1) < 0.0) | (Q[:, 0] > ar.width) | (Q[:, 1] > ar.height)
        if self.radii.size:
            r = np.linalg.norm(Q[:, None, :] - obs[None, :, :], axis=2)
            hit = np.any(r <= (self.radii + ar.particle_radius)[None, :], axis=1)
            surf = r - self.radii[None, :]
            prox = np.maximum(0.0, 1.0 - surf / cc["influence"])
            c = c + cc["w_prox"] * np.sum(prox * prox, axis=1)
        else:
            hit = np.zeros(Q.shape[0], dtype=bool)
        c = c + cc["w_col"] * (hit | outside)
        c = c + cc["w_ctrl"] * np.sum(A * A, axis=1)
        return c

    def run(self, betas: np.ndarray, rng: np.random.Generator | None = None,
            record: bool = False):
        """Score a batch of blend weights; optionally record batch-0 states."""
        betas = np.atleast_2d(np.ascontiguousarray(betas, dtype=float))
        B = betas.shape[0]
        h = self.horizon
        stochastic = self.lambda_pi > 0.0 and rng is not None
        z = (rng.standard_normal((h, B, 2)) if stochastic
             else np.zeros((1, 1, 2)))
        scores = np.zeros(B)
        states_arr = np.zeros((h + 1, 4))
        acts_arr = np.zeros((h, 2))
        cc, ar = self.cost_cfg, self.arena
        _kernels.blend_rollout(
            self.q0, self.v0, betas, self.obs_traj, self.goal_traj, self.radii,
            self.k_p, self.k_d, self.c_soft, self.w_goal, self.k_curl,
            self.w_curl, self.k_damp, self.w_damp,
            self.k_rep, self.infl, self.w_far, self.w_near, self.rw, self.tw,
            cc["w_goal"], cc["w_col"], cc["w_prox"], cc["influence"], cc["w_ctrl"],
            ar.dt, ar.v_max, ar.width, ar.height, ar.diag, ar.particle_radius,
            self.lambda_pi, z, stochastic,
            scores, states_arr, acts_arr)
        if not record:
            return scores
        states = [(states_arr[t, :2].copy(), states_arr[t, 2:].copy())
                  for t in range(h + 1)]
        actions = [acts_arr[t].copy() for t in range(h)]
        return scores, states, actions


def rollout_hipbi(env: PlanarEnv, expert_cfg: dict, beta, horizon: int,
                  lambda_pi: float = 0.0, rng_seed=0) -> Rollout:
    """Simulate one fixed-beta rollout and return its trace and score."""
    beta = np.asarray(beta, dtype=float)
    engine = BlendRolloutEngine(env, expert_cfg, horizon, lambda_pi)
    if beta.size != engine.n_blend:
        raise ValueError(f"beta has {beta.size} entries for a {engine.n_blend}-way blend")
    rng = np.random.default_rng(plan_seed(_seed_int(rng_seed), 1))
    scores, states, actions = engine.run(beta[None, :], rng=rng, record=True)
    return Rollout(states, actions, float(scores[0]), beta)


def _seed_int(rng_seed) -> int:
    if isinstance(rng_seed, np.random.SeedSequence):
        return int(rng_seed.generate_state(1)[0])
    return int(rng_seed)


def hipbi_plan(env: PlanarEnv, prev: DirichletParams, cfg: PlannerConfig,
               expert_cfg: dict, rng_seed) -> PlanResult:
    """One CEM cycle over blend weights: sample, shoot, select, moment-match."""
    engine = BlendRolloutEngine(env, expert_cfg, cfg.horizon, cfg.lambda_pi)
    if prev.alpha.size != engine.n_blend:
        raise ConfigError("Dirichlet dimension does not match the blend simplex")
    params = prev
    base = _seed_int(rng_seed)
    elites = None
    diagnostics = []
    for it in range(cfg.n_iters):
        betas = dir_sample_n(params, cfg.n_samples, plan_seed(base, 11, it))
        pool = betas if elites is None else np.vstack([betas, elites])
        rng = np.random.default_rng(plan_seed(base, 13, it))
        scores = engine.run(pool, rng=rng)
        order = np.argsort(-scores, kind="stable")
        elites = pool[order[:cfg.n_elites]]
        diagnostics.append(scores[order[:cfg.n_elites]].copy())
        params = moment_match(elites, params, cfg.momentum, cfg.precision_cap)
        if cfg.explore_floor > 0.0:
            # keep every blend direction sampleable; a collapsed component
            # would otherwise never be proposed again
            params = DirichletParams(np.maximum(params.alpha, cfg.explore_floor))
    return PlanResult(posterior=params, executed_beta=params.mean,
                      diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# colored noise + action-space baseline

def _colored_batch(shape, horizon: int, exponent: float, rng) -> np.ndarray:
    """(*, horizon) colored-noise sequences, unit sample variance each."""
    lead = tuple(shape)
    if horizon == 1:
        return rng.standard_normal(lead + (1,))
    nf = horizon // 2 + 1
    freqs = np.fft.rfftfreq(horizon)
    amp = np.zeros(nf)
    amp[1:] = freqs[1:] ** (-exponent / 2.0)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=lead + (nf,))
    coef = amp * np.exp(1j * phase)
    x = np.fft.irfft(coef, n=horizon, axis=-1)
    std = np.std(x, axis=-1, keepdims=True)
    return x / np.clip(std, 1e-30, None)


def colored_noise(horizon: int, dim: int, exponent: float, rng_seed) -> np.ndarray:
    """(horizon, dim) noise with power spectral density ~ 1/f^exponent."""
    if horizon < 1 or exponent < 0:
        raise ValueError("need horizon >= 1 and exponent >= 0")
    rng = np.random.default_rng(rng_seed)
    return _colored_batch((dim,), horizon, exponent, rng).T


class ActionRolloutEngine:
    """Open-loop scoring of action sequences on the forecast model."""

    def __init__(self, env: PlanarEnv, horizon: int):
        self.horizon = horizon
        self.arena = env.arena
        self.cost_cfg = env.cost_cfg
        self.q0 = env.q.copy()
        self.v0 = env.qdot.copy()
        self.radii = env.radii.copy()
        self.obs_traj, self.goal_traj = env.forecast(horizon)
        # reuse the blend engine's vectorized cost
        self._cost = BlendRolloutEngine.step_cost.__get__(self)

    def run(self, actions: np.ndarray) -> np.ndarray:
        actions = np.ascontiguousarray(actions, dtype=float)
        scores = np.zeros(actions.shape[0])
        cc, ar = self.cost_cfg, self.arena
        _kernels.action_rollout(
            self.q0, self.v0, actions, self.obs_traj, self.goal_traj, self.radii,
            cc["w_goal"], cc["w_col"], cc["w_prox"], cc["influence"], cc["w_ctrl"],
            ar.dt, ar.v_max, ar.width, ar.height, ar.diag, ar.particle_radius,
            scores)
        return scores


def mpc_icem_plan(env: PlanarEnv, prev_plan: np.ndarray | None,
                  cfg: PlannerConfig, rng_seed) -> PlanResult:
    """CEM over action sequences with colored noise and elite reuse."""
    h = cfg.horizon
    if prev_plan is not None and prev_plan.shape == (h, 2):
        mean = np.vstack([prev_plan[1:], prev_plan[-1:]])
    else:
        mean = np.zeros((h, 2))
    std = np.full((h, 2), cfg.icem_std)
    base = _seed_int(rng_seed)
    engine = ActionRolloutEngine(env, h)
    elites = None
    diagnostics = []
    for it in range(cfg.n_iters):
        rng = np.random.default_rng(plan_seed(base, 17, it))
        noise = np.moveaxis(_colored_batch((cfg.n_samples, 2), h, cfg.noise_exponent, rng), 1, 2)
        cands = np.clip(mean[None] + std[None] * noise, cfg.action_low, cfg.action_high)
        pool = cands if elites is None else np.concatenate([cands, elites], axis=0)
        scores = engine.run(pool)
        order = np.argsort(-scores, kind="stable")
        elites = pool[order[:cfg.n_elites]]
        diagnostics.append(scores[order[:cfg.n_elites]].copy())
        mean = elites.mean(axis=0)
        std = np.maximum(elites.std(axis=0), cfg.std_floor)
    best = elites[0].copy()
    return PlanResult(posterior=best, executed_beta=None,
                      diagnostics=diagnostics, actions=best)


def executed_action(env: PlanarEnv, bank, beta) -> np.ndarray:
    """Low-level control: fuse the expert bank at the live state.

    `beta` lives on the blend simplex; the shared repulsor-group weight is
    expanded to one temperature per obstacle before fusing.
    """
    evals = evaluate_bank(bank, env.state())
    return optimal_action(fuse(evals, expand_beta(beta, env.n_obstacles)))
