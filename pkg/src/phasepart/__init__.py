"""Phase-field computation of minimal partitions and isoperimetric shapes.

Relaxes (possibly position-dependent, anisotropic) perimeter functionals
into diffuse-interface energies, minimizes them by projected gradient
descent under partition and mass constraints, and drives the interface
width to zero with grid refinement.
"""

from .grid import (Field, Grid, Labels, gradient_field, integrate,
                   make_disk_mask, make_hexagon_mask, make_triangle_mask,
                   refine_interpolate)
from .anisotropy import (Anisotropy, DensityWeighted, Elliptic, Euclidean, Lp,
                         ProductRoot, RotatedL1, RotatedLp, catalog,
                         make_anisotropy, make_density_weight, phi, phi_sq_grad)
from .energy import (DoubleWell, PhaseSystem, energy_gradient, phase_energy,
                     sharp_energy, total_energy)
from .constraints import (clip_unit, make_feasible, mass_residual,
                          partition_residual, project_admissible, project_mass,
                          project_partition)
from .profile import Profile, profile_energy_1d, profile_value, recovery_init, signed_distance
from .optimizer import (ContinuationSchedule, MinimizeConfig, Problem, RunReport,
                        SmoothingContinuation, Stage, extract_labels, make_schedule,
                        minimize_at_eps, run_continuation)
from .cli import ConfigError, RunConfig, parse_config, read_pgm_labels, render_labels, write_report

__version__ = "0.1.0"

__all__ = [
    "Anisotropy", "ConfigError", "ContinuationSchedule", "DensityWeighted",
    "DoubleWell", "Elliptic", "Euclidean", "Field", "Grid", "Labels", "Lp",
    "MinimizeConfig", "PhaseSystem", "Problem", "Profile", "ProductRoot",
    "RotatedL1", "RotatedLp", "RunConfig", "RunReport", "SmoothingContinuation",
    "Stage", "catalog", "clip_unit", "energy_gradient", "extract_labels",
    "gradient_field", "integrate", "make_anisotropy", "make_density_weight",
    "make_disk_mask", "make_feasible", "make_hexagon_mask", "make_schedule",
    "make_triangle_mask", "mass_residual", "minimize_at_eps", "parse_config",
    "partition_residual", "phase_energy", "phi", "phi_sq_grad", "profile_energy_1d",
    "profile_value", "project_admissible", "project_mass", "project_partition",
    "read_pgm_labels", "recovery_init", "refine_interpolate", "render_labels",
    "run_continuation", "sharp_energy", "signed_distance", "total_energy",
    "write_report",
]
