"""Discrete checks of the claims about the spectral obstacle problem.

Every check returns :class:`TheoremReport` objects whose margins are
oriented so that ``>= 0`` means the claim holds.
"""

from .comparison import check_navier_dirichlet
from .extension_checks import check_extension_theorems
from .operators import check_operator_theorems
from .regularity import check_regularity_theorems
from .report import (FAIL, INFO, PASS, PASSING, VACUOUS_PASS, WEAK_PASS, Check, PositivitySet,
                     TheoremReport, merge_reports, positivity_set)
from .variational import check_vi_theorems

SUITES = {
    "operators": check_operator_theorems,
    "vi": check_vi_theorems,
    "regularity": check_regularity_theorems,
    "comparison": check_navier_dirichlet,
    "extension": check_extension_theorems,
}

__all__ = [
    "SUITES", "Check", "PositivitySet", "TheoremReport", "merge_reports", "positivity_set",
    "check_operator_theorems", "check_vi_theorems", "check_regularity_theorems",
    "check_navier_dirichlet", "check_extension_theorems",
    "PASS", "WEAK_PASS", "VACUOUS_PASS", "FAIL", "INFO", "PASSING",
]
