"""Numerical tools for the exponential family f(z) = exp(lambda z)."""

from .classify import (ClassReport, Thresholds, assign_case, classify_lambda,
                       expansion_diagnostic, prop1_scan, w_evidence)
from .errors import (EmptyGridAfterExclusion, ExpDynError, ImageAtForbiddenPole,
                     InsufficientSamples, LambdaZero, MoebiusDegenerate, NoConvergence,
                     PoleHit, RangeExceeded, ScanLimitError, TruncatedAtEscape, ZeroArgument)
from .logcplx import LogComplex, from_cartesian, to_cartesian
from .orbit import OrbitRecord, derivative_cocycle, orbit, postsingular, solve_fixed_point
from .ruelle import (GammaCombo, branch_sum, branches, fixed_point_residual, gamma_eval,
                     mobius_identity_residual, modulus_branch_sum, nonvanishing_scan,
                     phi_truncation, push_forward, push_forward_iter)
from .scan import ScanJob, run_scan
from .series import b_series, poincare_report, summability_report

__all__ = [
    "ClassReport", "Thresholds", "assign_case", "classify_lambda", "expansion_diagnostic",
    "prop1_scan", "w_evidence",
    "EmptyGridAfterExclusion", "ExpDynError", "ImageAtForbiddenPole", "InsufficientSamples",
    "LambdaZero", "MoebiusDegenerate", "NoConvergence", "PoleHit", "RangeExceeded",
    "ScanLimitError", "TruncatedAtEscape", "ZeroArgument",
    "LogComplex", "from_cartesian", "to_cartesian",
    "OrbitRecord", "derivative_cocycle", "orbit", "postsingular", "solve_fixed_point",
    "GammaCombo", "branch_sum", "branches", "fixed_point_residual", "gamma_eval",
    "mobius_identity_residual", "modulus_branch_sum", "nonvanishing_scan", "phi_truncation",
    "push_forward", "push_forward_iter",
    "ScanJob", "run_scan",
    "b_series", "poincare_report", "summability_report",
]
