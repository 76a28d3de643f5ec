"""Eigenangle calculus for finite-dimensional unitary matrices.

Checks the bounds on the extreme eigenvalue arguments of a product UV in
terms of those of U and V, together with their equality conditions.
"""

from .bounds import (
    BoundReport,
    CaseLabel,
    ReductionAudit,
    classify_case,
    reduction_audit,
    subspace_intersection_dim,
    theorem1_check,
    theorem2_check,
)
from .core import (
    EigenSystem,
    NotSquare,
    NotUnitary,
    Subspace,
    ToleranceProfile,
    UnitargError,
    UnitaryMatrix,
    compose,
    make_unitary,
    principal_value,
)
from .eig import EigenspaceQuery, Order, eig_unitary, eigenspace, inverse_angle_map
from .harness import CampaignSummary, TrialCampaign, replay, run_campaign
from .numrange import (
    ArgRange,
    max_arg_on_subspace,
    minmax_verify,
    product_phase_decomposition,
    quadratic_form_arg,
)
from .sampling import (
    SampleSpec,
    equality_pair,
    gap_pair,
    haar_unitary,
    trial_rng,
    unitary_with_spectrum,
)
from .spectral import fractional_power, pick_a

__version__ = "0.1.0"
