"""Episode execution, metrics, and benchmark sweeps.

Synchronous mode freezes the environment while the controller plans at every
step.  Asynchronous mode models planner latency deterministically: a new
plan is available every ``latency_steps`` environment steps; between plans
the hierarchical controller keeps executing its reactive low level with the
last delivered blend weights, while the action-space baseline consumes its
last delivered sequence open loop.  Collisions never terminate an episode;
they only clear the safety flag.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .config import with_overrides
from .dirichlet import DirichletParams
from .envs import make_env
from .errors import ConfigError
from .experts import build_expert_bank, n_blend
from .planner import (PlannerConfig, executed_action, hipbi_plan,
                      mpc_icem_plan, plan_seed)

TRACE_SCHEMA = "policyblend-trace-v1"

CSV_COLUMNS = ["env", "controller", "mode", "lookahead", "speed", "n_episodes",
               "suc_pct", "safe_pct", "l2d_mean", "l2d_std", "ts_mean",
               "ts_std", "seed_base"]


@dataclass(frozen=True)
class ExecutionMode:
    mode: str = "sync"
    latency_steps: int = 10

    def __post_init__(self):
        if self.mode not in ("sync", "async"):
            raise ConfigError("mode must be 'sync' or 'async'")
        if self.latency_steps < 1:
            raise ConfigError("latency_steps must be >= 1")

    @property
    def replan_interval(self) -> int:
        return 1 if self.mode == "sync" else self.latency_steps


@dataclass
class TraceStep:
    t: int
    q: np.ndarray
    qdot: np.ndarray
    action: np.ndarray
    beta: np.ndarray | None
    goal: np.ndarray
    obstacles: np.ndarray     # (m, 5): cx, cy, vx, vy, radius


@dataclass
class EpisodeRecord:
    suc: bool
    safe: bool
    l2d: float
    ts: int
    trace: list = field(default_factory=list)


def planner_config(cfg: dict, lookahead: int | None = None) -> PlannerConfig:
    p = dict(cfg["planner"])
    if lookahead is not None:
        p["horizon"] = int(lookahead)
    return PlannerConfig(**p)


def fixed_beta_for(cfg: dict, n_experts: int) -> np.ndarray:
    spec = cfg["controller"].get("fixed_beta", "uniform")
    if isinstance(spec, str):
        if spec != "uniform":
            raise ConfigError(f"unknown fixed_beta spec: {spec!r}")
        return np.full(n_experts, 1.0 / n_experts)
    b = np.asarray(spec, dtype=float)
    if b.size != n_experts or np.any(b < 0) or not np.any(b > 0):
        raise ConfigError("fixed_beta must be a nonnegative vector on the blend simplex")
    return b


def episode_seed(seed_base: int, index: int) -> int:
    return int(np.random.SeedSequence([int(seed_base) & (2**63 - 1), int(index)]).generate_state(1)[0])


def run_episode(cfg: dict, seed: int) -> EpisodeRecord:
    """Run one seeded episode under the configured controller and mode."""
    env = make_env(cfg, seed)
    bank = build_expert_bank(cfg["experts"], env.n_obstacles)
    n = n_blend(env.n_obstacles)
    kind = cfg["controller"]["kind"]
    mode = ExecutionMode(cfg["mode"]["mode"], int(cfg["mode"].get("latency_steps", 10)))
    replan = mode.replan_interval
    pcfg = planner_config(cfg)
    max_steps = env.arena.max_steps

    beta = None
    prev = None
    seq = None
    seq_t0 = 0
    if kind == "reactive_fixed":
        fb = fixed_beta_for(cfg, n)
        beta = fb / float(np.sum(fb))
    elif kind == "hipbi":
        init = cfg["controller"].get("init_alpha")
        alpha = (np.asarray(init, dtype=float) if init is not None
                 else np.full(n, float(pcfg.alpha_init)))
        prev = DirichletParams(alpha)
        beta = prev.mean
    elif kind != "mpc_icem":
        raise ConfigError(f"unknown controller kind: {kind!r}")

    base = episode_seed(seed, 0x51)
    safe = not env.in_collision()
    trace: list[TraceStep] = []
    suc = False
    ts = max_steps
    for t in range(max_steps):
        if env.at_goal():
            suc, ts = True, t
            break
        if kind == "hipbi":
            if t % replan == 0:
                result = hipbi_plan(env, prev, pcfg, cfg["experts"], plan_seed(base, t))
                prev = result.posterior
                beta = result.executed_beta
            a = executed_action(env, bank, beta)
        elif kind == "mpc_icem":
            if t % replan == 0:
                result = mpc_icem_plan(env, seq, pcfg, plan_seed(base, t))
                seq, seq_t0 = result.actions, t
            a = seq[min(t - seq_t0, pcfg.horizon - 1)]
        else:
            a = executed_action(env, bank, beta)

        obstacles = np.column_stack([env.centers, env.vels, env.radii])
        trace.append(TraceStep(t, env.q.copy(), env.qdot.copy(), np.asarray(a, dtype=float).copy(),
                               None if beta is None else beta.copy(),
                               env.goal.copy(), obstacles))
        env.step(a)
        if env.in_collision():
            safe = False
    return EpisodeRecord(suc, safe, float(env.dist_to_goal()), ts, trace)


# ---------------------------------------------------------------------------
# aggregation and sweeps

def aggregate(records) -> dict:
    suc = np.array([r.suc for r in records], dtype=float)
    safe = np.array([r.safe for r in records], dtype=float)
    l2d = np.array([r.l2d for r in records], dtype=float)
    ts = np.array([r.ts for r in records], dtype=float)
    return {
        "n_episodes": len(records),
        "suc_pct": 100.0 * float(suc.mean()),
        "safe_pct": 100.0 * float(safe.mean()),
        "l2d_mean": float(l2d.mean()), "l2d_std": float(l2d.std()),
        "ts_mean": float(ts.mean()), "ts_std": float(ts.std()),
    }


def run_cell(cfg: dict, n_episodes: int, seed_base: int):
    """Run one (controller, mode, env) cell; returns (records, csv row dict)."""
    records = [run_episode(cfg, episode_seed(seed_base, i)) for i in range(n_episodes)]
    agg = aggregate(records)
    row = {
        "env": cfg["scenario"]["env_kind"],
        "controller": cfg["controller"]["kind"],
        "mode": cfg["mode"]["mode"],
        "lookahead": cfg["planner"]["horizon"],
        "speed": cfg["scenario"].get("box_speed", ""),
        "seed_base": seed_base,
        **agg,
    }
    return records, row


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _fmt(row.get(k, "")) for k in CSV_COLUMNS})
    return buf.getvalue()


def suite_cells(cfg: dict):
    """Default Table-style grid from the config's sweep section."""
    lookaheads = cfg.get("sweep", {}).get("lookaheads", [cfg["planner"]["horizon"]])
    cells = [{"controller__kind": "reactive_fixed", "mode__mode": "sync"}]
    for ctrl in ("mpc_icem", "hipbi"):
        for m in ("sync", "async"):
            for la in lookaheads:
                cells.append({"controller__kind": ctrl, "mode__mode": m,
                              "planner__horizon": int(la)})
    return cells


def run_suite(cfg: dict, n_episodes: int, seed_base: int, cells=None):
    """Run a grid of cells; returns (rows, records per cell)."""
    if n_episodes < 1:
        raise ConfigError("n_episodes must be >= 1")
    rows, all_records = [], []
    for cell in (cells if cells is not None else suite_cells(cfg)):
        records, row = run_cell(with_overrides(cfg, **cell), n_episodes, seed_base)
        rows.append(row)
        all_records.append(records)
    return rows, all_records


def run_speed_ablation(cfg: dict, speeds, n_episodes: int, seed_base: int,
                       controllers=("reactive_fixed", "mpc_icem", "hipbi")):
    """Success/safety curves over box speeds for each controller."""
    if any(s < 0 or s > 30 for s in speeds):
        raise ConfigError("speeds must lie in [0, 30]")
    rows = []
    for ctrl in controllers:
        for s in speeds:
            cell_cfg = with_overrides(cfg, controller__kind=ctrl,
                                      scenario__box_speed=float(s))
            _, row = run_cell(cell_cfg, n_episodes, seed_base)
            rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# trace serialization

def trace_lines(record: EpisodeRecord):
    """Line-delimited trace serialization; byte-deterministic."""
    header = {"schema": TRACE_SCHEMA,
              "fields": ["t", "q", "qdot", "action", "beta", "goal", "obstacles"],
              "suc": record.suc, "safe": record.safe,
              "l2d": record.l2d, "ts": record.ts}
    yield json.dumps(header, separators=(",", ":"))
    for s in record.trace:
        yield json.dumps({
            "t": s.t,
            "q": s.q.tolist(), "qdot": s.qdot.tolist(),
            "action": s.action.tolist(),
            "beta": None if s.beta is None else s.beta.tolist(),
            "goal": s.goal.tolist(),
            "obstacles": s.obstacles.tolist(),
        }, separators=(",", ":"))


def write_trace(record: EpisodeRecord, path) -> None:
    with open(path, "w") as f:
        for line in trace_lines(record):
            f.write(line + "\n")
