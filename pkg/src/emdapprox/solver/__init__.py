"""MWU solver: schedule, Certify, the round loop, and the threshold search."""

from .certify import (
    Certificate,
    CertifyOutcome,
    certify,
    dual_unit,
    level_potentials,
    level_residuals,
    node_imbalances,
    residual_fail_test,
    special_constraint_terms,
)
from .mwu import (
    CertificateCheck,
    MwuOptions,
    MwuResult,
    MwuStatus,
    mwu_run,
    rescaled_lower_bound,
    tighten_certificate,
    verify_certificate,
)
from .params import MwuParams, compute_params
from .pipeline import EmdEstimate, PartResult, approximate_emd, choose_source, prepare_part, solve_part
from .search import SearchResult, search_threshold, threshold_count

__all__ = [
    "Certificate", "CertifyOutcome", "certify", "dual_unit", "level_potentials", "level_residuals",
    "node_imbalances", "residual_fail_test", "special_constraint_terms",
    "CertificateCheck", "MwuOptions", "MwuResult", "MwuStatus", "mwu_run", "rescaled_lower_bound",
    "tighten_certificate", "verify_certificate",
    "MwuParams", "compute_params",
    "EmdEstimate", "PartResult", "approximate_emd", "choose_source", "prepare_part", "solve_part",
    "SearchResult", "search_threshold", "threshold_count",
]
