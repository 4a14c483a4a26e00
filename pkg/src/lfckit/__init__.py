"""lfckit: multi-area load-frequency control modeling, LQG synthesis, and
disturbance simulation on numpy."""

from .analysis import (ComparisonReport, StabilityReport, TransientMetrics,
                       compare, metrics, stability_report)
from .model import (AreaKind, AreaParams, Diagnostic, PlantModel, TieLine,
                    augment_integrators, build_plant, conservation_directions,
                    integrator_selector, tie_laplacian, validate_params)
from .numerics import (CareError, CareSolution, LyapunovError, NumericsError,
                       care_residual, expm, solve_care, solve_lyapunov,
                       spectral_abscissa)
from .presets import (default_area, paper_three_area_config, preset_config,
                      three_area_system)
from .simulation import (DisturbanceSpec, GaussDisturbance, RampDisturbance,
                         Scenario, SimTrace, SimulationDivergence,
                         StepDisturbance, discretize, render_disturbance,
                         simulate)
from .synthesis import (ClosedLoopSystem, LqgController, LqrWeights,
                        NoiseModel, SynthesisError, assemble_closed_loop,
                        default_noise, default_weights, design_kalman,
                        design_lqg, design_lqr, make_droop_baseline)

__version__ = "0.1.0"

__all__ = [
    "AreaKind", "AreaParams", "TieLine", "PlantModel", "Diagnostic",
    "build_plant", "augment_integrators", "validate_params",
    "conservation_directions", "integrator_selector", "tie_laplacian",
    "expm", "solve_lyapunov", "solve_care", "spectral_abscissa",
    "care_residual", "CareSolution",
    "NumericsError", "LyapunovError", "CareError",
    "LqrWeights", "NoiseModel", "LqgController", "ClosedLoopSystem",
    "design_lqr", "design_kalman", "design_lqg", "assemble_closed_loop",
    "make_droop_baseline", "default_weights", "default_noise",
    "SynthesisError",
    "Scenario", "SimTrace", "DisturbanceSpec", "StepDisturbance",
    "RampDisturbance", "GaussDisturbance", "discretize",
    "render_disturbance", "simulate", "SimulationDivergence",
    "TransientMetrics", "StabilityReport", "ComparisonReport",
    "metrics", "stability_report", "compare",
    "default_area", "three_area_system", "paper_three_area_config",
    "preset_config",
]
