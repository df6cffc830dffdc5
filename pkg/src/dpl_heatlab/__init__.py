"""Temperature fields of a rectangular plate heated by a moving source.

Series solver for the phase-lagged (and classical) heat equation with a
point source on line/circle/ellipse paths, an independent finite-difference
cross-check, and field-analysis utilities.
"""

__version__ = "0.1.0"

from .analysis import (
    LineProfile,
    PeakReport,
    line_profile_y,
    locate_peak,
    source_peak_distance_sweep,
    trajectory_profile,
)
from .errors import (
    ConfigFormatError,
    NegativeElapsed,
    PeakOnBoundary,
    QuadratureNotConverged,
    ScenarioValidationError,
    TrajectoryNotClosed,
    UnstableConfig,
    ZeroAngularVelocity,
)
from .fdm import (
    GaussianSourceFactors,
    deviation_report,
    project_gaussian_source_series,
    solve_fdm,
)
from .model import (
    FdmConfig,
    GridSpec,
    PlateScenario,
    TemperatureField,
    Trajectory,
    bundled_scenario_names,
    classical,
    default_peak_grid,
    format_scenario,
    load_bundled,
    load_scenario,
    load_scenario_file,
    save_scenario,
    validate_scenario,
    with_lags,
)
from .modes import ModeEntry, ModeTable, build_mode_table, kernel
from .quadrature import QuadratureSpec, integrate_columns, integrate_scalar
from .series import (
    CoefficientHistory,
    default_truncation,
    mode_coefficient,
    mode_coefficients,
    source_factor,
    temperature,
    temperature_at_point,
    temperature_at_points,
)
from .trajectory import SourceState, period, position, source_state, velocity

__all__ = [
    "__version__",
    "CoefficientHistory", "ConfigFormatError", "FdmConfig",
    "GaussianSourceFactors", "GridSpec", "LineProfile", "ModeEntry",
    "ModeTable", "NegativeElapsed", "PeakOnBoundary", "PeakReport",
    "PlateScenario", "QuadratureNotConverged", "QuadratureSpec",
    "ScenarioValidationError", "SourceState", "TemperatureField",
    "Trajectory", "TrajectoryNotClosed", "UnstableConfig",
    "ZeroAngularVelocity", "build_mode_table", "bundled_scenario_names",
    "classical", "default_peak_grid", "default_truncation",
    "deviation_report", "format_scenario", "integrate_columns",
    "integrate_scalar", "kernel",
    "line_profile_y", "load_bundled", "load_scenario", "load_scenario_file",
    "locate_peak", "mode_coefficient", "mode_coefficients", "period",
    "position", "project_gaussian_source_series", "save_scenario",
    "solve_fdm", "source_factor", "source_peak_distance_sweep",
    "source_state", "temperature", "temperature_at_point",
    "temperature_at_points", "trajectory_profile", "validate_scenario",
    "velocity", "with_lags",
]
