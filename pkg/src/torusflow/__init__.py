"""Diffuse-interface two-phase non-Newtonian flow on the periodic torus.

Fourier-Galerkin velocity, Allen-Cahn phase field, mollified coupling and
the diagnostics used to check the scheme against analytic oracles.
"""
__version__ = "0.1.0"

from .config import SimConfig, config_to_text, load_config, parse_config
from .constitutive import StressLaw, tau_blend, tau_phase, validate_stress_law
from .errors import BlowUpError, ConfigError, UsageError
from .phase_init import ProfileParams, Scenario, initial_phase, initial_velocity
from .simulation import build_model, initial_state, run, run_simulation, sweep_epsilon
from .spectral import GridSpec, build_mode_basis, leray_project, mollifier_kernel
from .stepper import Model, PhysicsParams, SimState, StepParams, stable_dt, step

__all__ = [
    "SimConfig", "config_to_text", "load_config", "parse_config", "StressLaw",
    "tau_blend", "tau_phase", "validate_stress_law", "BlowUpError", "ConfigError",
    "UsageError", "ProfileParams", "Scenario", "initial_phase", "initial_velocity",
    "build_model", "initial_state", "run", "run_simulation", "sweep_epsilon",
    "GridSpec", "build_mode_basis", "leray_project", "mollifier_kernel", "Model",
    "PhysicsParams", "SimState", "StepParams", "stable_dt", "step",
]
