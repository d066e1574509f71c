"""Laurent binomial systems: Smith normal forms, torus solution structure,
degrees by regular subdivision and witness sets by polyhedral homotopy."""
from .binomial import (
    BinomialSystem,
    ComponentParametrization,
    InconsistentSystemError,
    SolutionStructure,
    analyze,
    enumerate_components,
    evaluate_parametrization,
    load_system,
)
from .estimators import BinomialSolver, RegularSubdivision
from .homotopy import WitnessSet, witness_set
from .intlinalg import IntMatrix, SnfResult, det_exact, smith_normal_form
from .lpkernel import DegenerateLiftingError, LiftedPointSet
from .mspace import MasterSpaceSpec, generate
from .subdivision import Cell, LiftingExhaustedError, Subdivision, degree, subdivide

__version__ = "0.1.0"

__all__ = [
    "BinomialSystem",
    "ComponentParametrization",
    "InconsistentSystemError",
    "SolutionStructure",
    "analyze",
    "enumerate_components",
    "evaluate_parametrization",
    "load_system",
    "BinomialSolver",
    "RegularSubdivision",
    "WitnessSet",
    "witness_set",
    "IntMatrix",
    "SnfResult",
    "det_exact",
    "smith_normal_form",
    "DegenerateLiftingError",
    "LiftedPointSet",
    "MasterSpaceSpec",
    "generate",
    "Cell",
    "LiftingExhaustedError",
    "Subdivision",
    "degree",
    "subdivide",
]
