"""Event-triggered gain scheduling of backstepping boundary controllers
for 1D reaction-diffusion equations with time- and space-varying reaction.

The package simulates the closed loop formed by an implicit-Euler plant,
a Volterra-transform boundary controller whose kernel is frozen between
events, and a state-dependent scheduler (static or dynamic) deciding when
to resample the coefficient and recompute the kernel. Companion analysis
routines evaluate the guaranteed transform bound, the minimal dwell time,
the sufficient stability condition, and the decay envelope.
"""

from .analysis import (AnalysisError, EventStats, GrowthBound, StabilityReport,
                       build_stability_report, check_decay_envelope,
                       decay_rate_sigma, event_statistics, stability_condition,
                       transform_bound_G)
from .backstepping import (Kernel, KernelSolveError, control_value,
                           direct_transform, inverse_transform,
                           solve_inverse_kernel, solve_kernel_closed_form,
                           solve_kernel_numeric, trace_target, transform_bound)
from .closedloop import (BatchStats, BlowUpError, CoefficientSpec,
                         KernelSolverKind, SimConfig, SimResult, SimulationError,
                         batch_run, family_member, initial_profile,
                         paper_sim_config, run_closed_loop)
from .config import ConfigError, RunManifest, TableSweep, load_config
from .numerics import (Grid, NumericsError, Profile, ZeroPivotError, bessel_i0,
                       bessel_i1, cumulative_trapezoid, inner_product, l2_norm,
                       solve_tridiagonal)
from .plant import (Actuation, PlantConfig, PlantError, ReactionCoefficient,
                    SampledCoefficient, make_coefficient, sample_coefficient,
                    sampling_error, step_plant, validate_coefficient)
from .trigger import (TriggerError, TriggerMode, TriggerParams, TriggerState,
                      dynamic_fires, min_dwell_time, principal_eigenvalue,
                      scheduler_mu, static_fires, step_dynamic_variable,
                      trigger_quantity)

__version__ = "0.1.0"

__all__ = [
    "Actuation", "AnalysisError", "BatchStats", "BlowUpError", "CoefficientSpec",
    "ConfigError",
    "EventStats", "Grid", "GrowthBound", "Kernel", "KernelSolveError",
    "KernelSolverKind", "NumericsError", "PlantConfig", "PlantError", "Profile",
    "ReactionCoefficient", "RunManifest", "SampledCoefficient", "SimConfig",
    "SimResult", "SimulationError", "StabilityReport", "TableSweep",
    "TriggerError", "TriggerMode", "TriggerParams", "TriggerState",
    "ZeroPivotError", "batch_run", "bessel_i0", "bessel_i1",
    "build_stability_report", "check_decay_envelope", "control_value",
    "cumulative_trapezoid", "decay_rate_sigma", "direct_transform",
    "dynamic_fires", "event_statistics", "family_member", "initial_profile",
    "inner_product", "inverse_transform", "l2_norm", "load_config",
    "make_coefficient", "min_dwell_time", "paper_sim_config",
    "principal_eigenvalue", "run_closed_loop", "sample_coefficient",
    "sampling_error", "scheduler_mu", "solve_inverse_kernel",
    "solve_kernel_closed_form", "solve_kernel_numeric", "solve_tridiagonal",
    "stability_condition", "static_fires", "step_dynamic_variable", "step_plant",
    "trace_target", "transform_bound", "transform_bound_G", "trigger_quantity",
    "validate_coefficient",
]
