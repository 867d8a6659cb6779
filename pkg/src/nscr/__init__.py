"""Pseudo-spectral toolkit for rotating Couette-flow stability experiments."""

from .fitting import DecayFit, fit_decay, fit_threshold_exponent
from .linear import (
    NonzeroModeState,
    PhysicsParams,
    ZeroModeState,
    classical_liftup,
    decay_envelope_check,
    eigen_structure,
    evolve_qk_mode,
    evolve_qk_modes,
    reconstruct_velocity,
    zero_mode_double,
    zero_mode_simple,
)
from .multipliers import M_rate, M_value, MultiplierParams, m_rate, m_value
from .solver import (
    EnergyLedger,
    SimulationConfig,
    Verdict,
    diagnostics,
    load_checkpoint,
    make_initial_data,
    nonlinear_rhs,
    run,
    save_checkpoint,
    step,
)
from .spectral import (
    Grid,
    SheredSymbols,
    SpectralField,
    Wavevector,
    leray_project_moving,
    project_x_nonzero,
    project_x_zero,
    project_z_nonzero,
    project_z_zero,
    sobolev_norm,
    symbol_p,
)

__version__ = "0.1.0"

__all__ = [
    "DecayFit",
    "EnergyLedger",
    "Grid",
    "MultiplierParams",
    "NonzeroModeState",
    "PhysicsParams",
    "SheredSymbols",
    "SimulationConfig",
    "SpectralField",
    "Verdict",
    "Wavevector",
    "ZeroModeState",
    "classical_liftup",
    "decay_envelope_check",
    "diagnostics",
    "eigen_structure",
    "evolve_qk_mode",
    "evolve_qk_modes",
    "fit_decay",
    "fit_threshold_exponent",
    "leray_project_moving",
    "load_checkpoint",
    "M_rate",
    "M_value",
    "m_rate",
    "m_value",
    "make_initial_data",
    "nonlinear_rhs",
    "project_x_nonzero",
    "project_x_zero",
    "project_z_nonzero",
    "project_z_zero",
    "reconstruct_velocity",
    "run",
    "save_checkpoint",
    "sobolev_norm",
    "step",
    "symbol_p",
    "zero_mode_double",
    "zero_mode_simple",
]
