"""Reactive Gaussian expert policies and the task-map pullback.

Each expert maps a state to a Gaussian over accelerations: a mean action and
an SPD precision.  Precisions double as the importance metric when experts
are fused (see :mod:`policyblend.fusion`).  All evaluators are pure
functions of their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .envs import State
from .errors import ConfigError

EPS_SPD = 1e-6
EPS_DIST = 1e-3

EXPERT_KINDS = ("goal_attractor", "obstacle_repulsor", "curl_positive",
                "curl_negative", "velocity_damper")


@dataclass(frozen=True)
class ExpertSpec:
    kind: str
    params: dict

    def __post_init__(self):
        if self.kind not in EXPERT_KINDS:
            raise ConfigError(f"unknown expert kind: {self.kind!r}")


@dataclass(frozen=True)
class ExpertEval:
    mu: np.ndarray
    lam: np.ndarray


@dataclass(frozen=True)
class TaskMapEval:
    x: np.ndarray
    jacobian: np.ndarray


def _iso(d: int, w: float) -> np.ndarray:
    return w * np.eye(d)


def softnorm(v: np.ndarray, c_soft: float) -> np.ndarray:
    return v / (np.linalg.norm(v) + c_soft)


def _attraction(state: State, p: dict) -> np.ndarray:
    """Pure goal-attraction term (no damping); shared with the curl experts."""
    goal = state.context.goal
    if goal is None:
        raise ConfigError("goal attractor requires a goal in the context")
    return p["k_p"] * softnorm(goal - state.q, p["c_soft"])


def eval_goal_attractor(state: State, spec: ExpertSpec) -> ExpertEval:
    p = spec.params
    mu = _attraction(state, p) - p["k_d"] * state.qdot
    return ExpertEval(mu, _iso(state.q.size, p["w_goal"]))


def eval_obstacle_repulsor(state: State, obstacle_index: int, spec: ExpertSpec) -> ExpertEval:
    """Inverse-square repulsion with a directional barrier metric.

    Outside the influence radius the expert is near vacuous (zero mean, weak
    isotropic precision), so the fused policy ignores far obstacles.
    """
    p = spec.params
    ctx = state.context
    if not 0 <= obstacle_index < ctx.obs_centers.shape[0]:
        raise IndexError(f"obstacle index {obstacle_index} out of range")
    d = state.q.size
    dvec = state.q - ctx.obs_centers[obstacle_index]
    r = float(np.linalg.norm(dvec))
    dist = max(r - float(ctx.obs_radii[obstacle_index]), EPS_DIST)
    infl = p["influence_radius"]
    if dist >= infl:
        return ExpertEval(np.zeros(d), _iso(d, p["w_far"]))
    direction = dvec / max(r, EPS_DIST)
    mu = p["k_rep"] * direction / (dist * dist)
    # barrier gain: smooth zero at the influence radius, grows ~1/dist close in
    g = (1.0 - dist / infl) ** 2 * (infl / (dist + 1.0))
    outer = np.outer(direction, direction)
    proj = p.get("radial_weight", 1.0) * outer + p.get("tangent_weight", 0.1) * (np.eye(d) - outer)
    lam = _iso(d, p["w_far"]) + p["w_near"] * g * proj
    return ExpertEval(mu, lam)


_R90 = np.array([[0.0, -1.0], [1.0, 0.0]])


def eval_curl(state: State, spec: ExpertSpec, sign: int) -> ExpertEval:
    """Force normal to the goal attraction; vanishes at the goal.

    The two signed instances are mutually cancelling, so under equal weights
    their net contribution to the fused mean is exactly zero.
    """
    if state.q.size != 2:
        raise ValueError("curl experts are defined for planar (d=2) states only")
    p = spec.params
    mu = float(sign) * p["k_curl"] * (_R90 @ _attraction(state, p))
    return ExpertEval(mu, _iso(2, p["w_curl"]))


def eval_velocity_damper(state: State, spec: ExpertSpec) -> ExpertEval:
    p = spec.params
    return ExpertEval(-p["k_damp"] * state.qdot, _iso(state.q.size, p["w_damp"]))


def pullback(task_eval: ExpertEval, tmap: TaskMapEval) -> ExpertEval:
    """Pull a task-space expert back to configuration space.

    Mean via the Jacobian pseudoinverse, precision via the congruence
    J^T Lambda J, floored to stay SPD for rank-deficient maps.
    """
    J = tmap.jacobian
    mu_q = np.linalg.pinv(J) @ task_eval.mu
    lam_q = J.T @ task_eval.lam @ J + EPS_SPD * np.eye(J.shape[1])
    return ExpertEval(mu_q, lam_q)


def build_expert_bank(expert_cfg: dict, n_obstacles: int):
    """Expert list for one environment, in pinned order.

    Order: goal attractor, curl pair, damper, then one repulsor per obstacle.
    Returns a list of (spec, obstacle_index or None).
    """
    att = dict(expert_cfg["goal_attractor"])
    curl = dict(expert_cfg["curl"])
    # curl rotates the attraction term, so it carries the attractor gains too
    curl.update({k: att[k] for k in ("k_p", "c_soft")})
    bank = [
        (ExpertSpec("goal_attractor", att), None),
        (ExpertSpec("curl_positive", curl), None),
        (ExpertSpec("curl_negative", curl), None),
        (ExpertSpec("velocity_damper", dict(expert_cfg["velocity_damper"])), None),
    ]
    rep = dict(expert_cfg["obstacle_repulsor"])
    for i in range(n_obstacles):
        bank.append((ExpertSpec("obstacle_repulsor", rep), i))
    return bank


def n_blend(n_obstacles: int) -> int:
    """Dimension of the blend simplex: all repulsors share one weight."""
    return 4 + (1 if n_obstacles > 0 else 0)


def expand_beta(beta, n_obstacles: int) -> np.ndarray:
    """Map blend weights to per-expert temperatures.

    The planner searches a low-dimensional simplex where the whole repulsor
    group carries a single weight; fusion wants one temperature per expert,
    so the group weight is repeated for every obstacle.
    """
    b = np.asarray(beta, dtype=float)
    if b.size != n_blend(n_obstacles):
        raise ValueError(f"expected {n_blend(n_obstacles)} blend weights, got {b.size}")
    if n_obstacles == 0:
        return b.copy()
    return np.concatenate([b[:4], np.full(n_obstacles, b[4])])


def evaluate_bank(bank, state: State):
    """Evaluate every expert in the bank at one state."""
    out = []
    for spec, idx in bank:
        if spec.kind == "goal_attractor":
            out.append(eval_goal_attractor(state, spec))
        elif spec.kind == "curl_positive":
            out.append(eval_curl(state, spec, +1))
        elif spec.kind == "curl_negative":
            out.append(eval_curl(state, spec, -1))
        elif spec.kind == "velocity_damper":
            out.append(eval_velocity_damper(state, spec))
        else:
            out.append(eval_obstacle_repulsor(state, idx, spec))
    return out
