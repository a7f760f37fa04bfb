"""Steady-state quadrature squeezing of multimode optomechanical systems
with an intracavity parametric amplifier and a phase-modulated
phonon-hopping chain, via Lyapunov covariance analysis."""

from ._version import __version__
from .analysis import (
    NormalModeDecomposition,
    PhysicalityReport,
    SqueezingReport,
    cooperativity,
    dark_mode_census,
    mechanical_normal_modes,
    normal_mode_quadrature_transform,
    physicality_check,
    quadrature_variance,
    squeezing_degree,
    squeezing_report,
)
from .configio import load_sweep_spec, load_system_config, set_param
from .model import (
    DriftMatrix,
    NoiseMatrix,
    PhysicalDriveConfig,
    SystemConfig,
    ValidatedConfig,
    build_drift_matrix,
    build_noise_matrix,
    linearize_from_drive,
    validate_config,
)
from .steady_state import (
    CovarianceMatrix,
    StabilityReport,
    integrate_covariance_ode,
    is_stable,
    routh_hurwitz_check,
    solve_lyapunov,
)
from .sweep import (
    SweepAxis,
    SweepResult,
    SweepSpec,
    export_csv,
    figure_preset,
    find_threshold,
    resolve_preset_names,
    run_sweep,
)

__all__ = [
    "__version__",
    "SystemConfig",
    "ValidatedConfig",
    "PhysicalDriveConfig",
    "DriftMatrix",
    "NoiseMatrix",
    "CovarianceMatrix",
    "StabilityReport",
    "SqueezingReport",
    "PhysicalityReport",
    "NormalModeDecomposition",
    "SweepAxis",
    "SweepSpec",
    "SweepResult",
    "validate_config",
    "linearize_from_drive",
    "build_drift_matrix",
    "build_noise_matrix",
    "is_stable",
    "routh_hurwitz_check",
    "solve_lyapunov",
    "integrate_covariance_ode",
    "quadrature_variance",
    "squeezing_degree",
    "physicality_check",
    "mechanical_normal_modes",
    "normal_mode_quadrature_transform",
    "dark_mode_census",
    "cooperativity",
    "squeezing_report",
    "run_sweep",
    "figure_preset",
    "resolve_preset_names",
    "find_threshold",
    "export_csv",
    "load_system_config",
    "load_sweep_spec",
    "set_param",
]
