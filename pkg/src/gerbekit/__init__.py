"""Exact cohomology of finite groupoid presentations, with S^1-bundles and gerbes."""

__version__ = "0.1.0"

from .cochains import (Q, Z, Cochain, CoefficientRing, QmodZ, TotalCochain, Zmod, boundary_partial, coboundary_d,
                       cup, delta_matrix, pullback, total_delta)
from .errors import (ExtensionError, GerbekitError, MathematicalObstruction, NonIntegralClassError, NotACocycleError,
                     NotFlatError, ParseError, PrequantizationObstruction, ReferenceError_, TruncationError,
                     ValidationError)
from .gerbes import (BundleCocycle, CentralExtension, GerbeCocycle, associator, build_extension, chern_class,
                     dd_class, holonomy, is_flat, prequantize_bundle, prequantize_gerbe, pullback_cocycle, tau_maps,
                     tensor)
from .homology import CohomologyGroup, bockstein, cohomology, is_coboundary, is_integral_class, simplicial_cohomology
from .io import Workspace, load, loads
from .linalg import smith_normal_form
from .morita import (Bitorsor, MoritaMorphism, cech_to_manifold, compare_cohomology, pullback_groupoid,
                     pullback_morphism, refinement_morphism, verify_bitorsor)
from .spaces import (CoveredComplex, FiniteGroupoid, GroupAction, SemiSimplicialSpace, SimplicialComplex,
                     SimplicialMap, SpaceMap, cech_space, cyclic_group, manifold_space, nerve, product_group,
                     stack_dimension, transformation_space)

__all__ = [
    "CohomologyGroup", "bockstein", "cohomology", "is_coboundary", "is_integral_class", "simplicial_cohomology",
    "Workspace", "load", "loads", "smith_normal_form",
    "Q", "Z", "Cochain", "CoefficientRing", "QmodZ", "TotalCochain", "Zmod", "boundary_partial",
    "coboundary_d", "cup", "delta_matrix", "pullback", "total_delta", "ExtensionError", "GerbekitError",
    "MathematicalObstruction", "NonIntegralClassError", "NotACocycleError", "NotFlatError", "ParseError",
    "PrequantizationObstruction", "ReferenceError_", "TruncationError", "ValidationError", "BundleCocycle",
    "CentralExtension", "GerbeCocycle", "associator", "build_extension", "chern_class", "dd_class", "holonomy",
    "is_flat", "prequantize_bundle", "prequantize_gerbe", "pullback_cocycle", "tau_maps", "tensor", "Bitorsor",
    "MoritaMorphism", "cech_to_manifold", "compare_cohomology", "pullback_groupoid", "pullback_morphism",
    "refinement_morphism", "verify_bitorsor", "CoveredComplex", "FiniteGroupoid", "GroupAction",
    "SemiSimplicialSpace", "SimplicialComplex", "SimplicialMap", "SpaceMap", "cech_space", "cyclic_group",
    "manifold_space", "nerve", "product_group", "stack_dimension", "transformation_space",
]
