import numpy as np
import pytest

from policyblend.config import default_profile, with_overrides
from policyblend.envs import Arena, PlanarEnv

COST = {"w_goal": 1.0, "w_col": 30.0, "w_prox": 0.2, "influence": 60.0,
        "w_ctrl": 0.0001}

EXPERTS = {
    "goal_attractor": {"k_p": 8.0, "k_d": 0.8, "c_soft": 40.0, "w_goal": 1.0},
    "obstacle_repulsor": {"k_rep": 30000.0, "influence_radius": 150.0,
                          "w_far": 0.005, "w_near": 6.0,
                          "radial_weight": 1.0, "tangent_weight": 0.1},
    "curl": {"k_curl": 1.0, "w_curl": 1.0},
    "velocity_damper": {"k_damp": 1.0, "w_damp": 0.3},
}


def open_env(q=(200.0, 500.0), qdot=(0.0, 0.0), goal=(800.0, 500.0),
             centers=(), vels=None, radii=(), cost=None, arena=None):
    """Hand-built environment with explicit geometry (no scenario sampling)."""
    m = len(centers)
    centers = np.asarray(centers, dtype=float).reshape(m, 2)
    vels = (np.zeros((m, 2)) if vels is None
            else np.asarray(vels, dtype=float).reshape(m, 2))
    radii = np.asarray(radii, dtype=float).reshape(m)
    inf2 = np.full((m, 2), np.inf)
    return PlanarEnv(arena or Arena(), q, qdot, goal, np.zeros(2),
                     np.array([-np.inf, -np.inf]), np.array([np.inf, np.inf]),
                     centers, vels, radii, -inf2, inf2, cost or dict(COST))


@pytest.fixture(scope="session")
def box_profile():
    return default_profile("toy_box")


@pytest.fixture(scope="session")
def quick_box(box_profile):
    """Box profile trimmed for fast episode-level tests."""
    return with_overrides(box_profile, planner__horizon=25,
                          arena__max_steps=60)
