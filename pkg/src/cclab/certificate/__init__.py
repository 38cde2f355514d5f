"""Triple-based analysis: per-pivot cost and LP charge, grid certificates, tables and lower bounds."""

from .bounds import (
    LowerBoundReport,
    bisect_threshold,
    ccc_case_minimum,
    ccc_case_small_y,
    ccc_case_value,
    lb_ccc,
    lb_wcc,
    violation_interval,
    violation_region,
)
from .sweep import CertificateReport, certify, certify_ccc, certify_wcc
from .tables import TableRow, extremal_tables, formula_table
from .triple import (
    TripleConfig,
    e_cost,
    e_lp_cc,
    e_lp_ccc_lower,
    role_gaps,
    triple_gap,
)

__all__ = [
    "CertificateReport",
    "LowerBoundReport",
    "TableRow",
    "TripleConfig",
    "bisect_threshold",
    "ccc_case_minimum",
    "ccc_case_small_y",
    "ccc_case_value",
    "certify",
    "certify_ccc",
    "certify_wcc",
    "e_cost",
    "e_lp_cc",
    "e_lp_ccc_lower",
    "extremal_tables",
    "formula_table",
    "lb_ccc",
    "lb_wcc",
    "role_gaps",
    "triple_gap",
    "violation_interval",
    "violation_region",
]
