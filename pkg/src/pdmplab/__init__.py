"""Exact simulation and analytics for piecewise deterministic Markov processes.

Event-driven simulation with closed-form flows (engine, models),
analytic ground truth (oracles), coupling constructions with empirical
distance estimators (coupling), and a reproducible experiment runner
(config, runner, cli).
"""

from .engine import (BoundViolationError, EXPLOSION_THRESHOLD, FlowOverflowError,
                     FlowSpec, HybridState, JumpEvent, KernelSpec, PdmpError,
                     PdmpModel, RateSpec, Trajectory, advance_flow,
                     ergodic_samples, sample_next_jump, simulate, terminal_state)
from .models import (AimdSpec, BanditSpec, Dim1Spec, MorrisLecarSpec,
                     PlanarRotationSpec, StorageSpec, SwitchedLinearSpec,
                     TcpSpec, TelegraphSpec, WorstCycle, build_model,
                     generator_apply, morris_lecar_rates, voltage_segment,
                     worst_trajectory_cycle)
from .oracles import (LyapunovBreakdown, MomentTable, angular_mass,
                      dim1_invariant_density, dim1_mode_weights,
                      dissipativity_estimate, g_curve_max, lyapunov_quadrature,
                      stability_R, stability_threshold, stationary_ode_residual,
                      storage_laplace, storage_mean, tcp_eigenpoly,
                      tcp_invariant_moment, tcp_moment, tcp_moment_table,
                      tcp_pairing_integral, tcp_poly_generator,
                      telegraph_invariant_density)
from .coupling import (CoupledRun, DistanceEstimate, couple_shared_noise,
                       couple_switched, couple_tv_storage, couple_tv_tcp,
                       empirical_tv, empirical_wasserstein, lyapunov_mc,
                       maximal_shifted_exponential)
from .config import ConfigError, ExperimentConfig, model_config_lines, parse_config
from .quadrature import QuadratureError, adaptive_quad, bisect_root, golden_max
from .rng import RandomSource
from .runner import ExperimentReport, ReportRow, run_experiment

__version__ = "0.1.0"
