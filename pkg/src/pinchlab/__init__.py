"""Generalised and reverse pinching inequalities, the weight spectrahedra
``A_n`` / ``B_n``, and the ordered gentle-measurement bounds, checked
numerically on dense complex matrices."""

from .matrix_core import (
    LoewnerVerdict,
    Tolerance,
    all_ones,
    hermitize,
    is_psd,
    loewner_leq,
    trace_norm,
)
from .spectrahedron import (
    MembershipVerdict,
    SignStructure,
    b_sign_structure,
    in_A3_closed_form,
    in_A_direct,
    in_A_recursive,
    in_B_direct,
    sample_A_boundary,
    sample_B2_boundary,
)
from .pinching import (
    OperatorFamily,
    ProjectivePOVM,
    converse_check,
    converse_witness,
    pinch,
    sum_conjugation,
    verify_generalized,
    verify_hayashi,
    verify_reverse,
    weighted_conjugation,
)
from .gentle import (
    GentleInstance,
    binary_lower,
    binary_upper,
    gentle_bounds,
    gentle_difference_bounds,
    sandwich_report,
    trace_norm_report,
)
from .harness import CampaignConfig, CampaignReport, run_campaign

__version__ = "0.1.0"
