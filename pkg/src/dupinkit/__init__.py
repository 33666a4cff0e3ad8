"""Conformal invariants and Dupin checks for spacelike hypersurfaces in Lorentzian space forms."""

from .catalog import (
    CatalogEntry,
    ClassificationResult,
    build,
    classify_two_curvature,
    cone_over,
    cylinder_over,
    perturbed_graph,
    product_hypersurface,
    warped_example,
)
from .conformal import (
    ConformalFrame,
    ConformalTensors,
    conformal_factor,
    conformal_frame,
    conformal_position,
    conformal_tensors,
    covariant_derivative_B,
    dupin_conformal_relation,
    gauss_residual,
    sigma_lift,
    verify_trace_identities,
)
from .hypersurface import (
    CurvatureData,
    Immersion,
    SpaceForm,
    dupin_check,
    fundamental_forms,
    moebius_curvature,
    principal_data,
)
from .indefinite import PseudoOrthogonalTransform, Signature, boost, inner_product, random_pseudo_orthogonal
from .moebius import ProjectiveLightPoint, act, chart_transition, transform_immersion, verify_moebius_invariance

__version__ = "0.1.0"
