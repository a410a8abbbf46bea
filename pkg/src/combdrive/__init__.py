"""Comb-drive electrostatics at desk scale.

Solves the vacuum-gap potential of an interdigitated comb drive on both the
physical and the gap-flattened geometry, evaluates the longitudinal
electrostatic force through a boundary integral and through an equivalent
volume functional, and checks the small-period behaviour of forces, energies,
averages, and corrector norms against their closed-form limits.
"""

from .params import CombParams, InvalidParamsError, OutsideProvenRegimeError, validate
from .geometry import (
    BoundarySegment,
    Rect,
    RectilinearDomain,
    Region,
    RescaleMap,
    Tag,
    build_physical_domain,
    build_rescaled_domain,
)
from .mesh import NodeClass, RefineSpec, TensorMesh, generate_mesh
from .solver import (
    AnisotropicCoeffs,
    DiscreteField,
    SolverSettings,
    SparseSystem,
    assemble,
    solve,
    solve_physical,
    solve_rescaled,
)
from .cutoff import CutoffSpec, Variant
from .diagnostics import (
    ForceMethod,
    ForceResult,
    NormReport,
    apriori_norms,
    force_boundary,
    force_volume,
)
from .homogenized import (
    CorrectorNorms,
    LimitProfiles,
    corrector_norms,
    discrete_weak_averages,
    extend,
    limit_energy,
    limit_force,
    weak_averages,
)
from .harness import SweepConfig, SweepReport, check_report, run_sweep

__all__ = [
    "CombParams",
    "InvalidParamsError",
    "OutsideProvenRegimeError",
    "validate",
    "BoundarySegment",
    "Rect",
    "RectilinearDomain",
    "Region",
    "RescaleMap",
    "Tag",
    "build_physical_domain",
    "build_rescaled_domain",
    "NodeClass",
    "RefineSpec",
    "TensorMesh",
    "generate_mesh",
    "AnisotropicCoeffs",
    "DiscreteField",
    "SolverSettings",
    "SparseSystem",
    "assemble",
    "solve",
    "solve_physical",
    "solve_rescaled",
    "CutoffSpec",
    "Variant",
    "ForceMethod",
    "ForceResult",
    "NormReport",
    "apriori_norms",
    "force_boundary",
    "force_volume",
    "CorrectorNorms",
    "LimitProfiles",
    "corrector_norms",
    "discrete_weak_averages",
    "extend",
    "limit_energy",
    "limit_force",
    "weak_averages",
    "SweepConfig",
    "SweepReport",
    "check_report",
    "run_sweep",
]

__version__ = "0.1.0"
