"""Hierarchical policy blending: reactive Gaussian experts fused as a
product of experts, with a Dirichlet cross-entropy planner over the blend
weights, and 2D dynamic-obstacle navigation benchmarks."""

from .dirichlet import (DirichletParams, SimplexSampleStats, digamma,
                        dir_entropy, dir_log_pdf, dir_mle_update, dir_sample,
                        inv_digamma, moment_match, trigamma)
from .envs import Arena, Context, PlanarEnv, State, make_env
from .errors import ConfigError, DomainError
from .experts import (ExpertEval, ExpertSpec, TaskMapEval, build_expert_bank,
                      eval_curl, eval_goal_attractor, eval_obstacle_repulsor,
                      eval_velocity_damper, evaluate_bank, expand_beta,
                      n_blend, pullback)
from .fusion import (BlendWeights, FusedGaussian, fuse, log_density,
                     optimal_action, sample_action)
from .harness import (EpisodeRecord, ExecutionMode, run_episode,
                      run_speed_ablation, run_suite)
from .planner import (PlannerConfig, PlanResult, Rollout, colored_noise,
                      hipbi_plan, mpc_icem_plan, rollout_hipbi)

__version__ = "0.1.0"
