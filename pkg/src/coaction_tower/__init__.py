"""Coactions of finite quantum groups on finite-dimensional C*-algebras, lifted along the Jones tower.

The fixed-point spaces Q_n of the lifted coactions are computed with the Haar
projection, and the tower maps and lattice identities are checked numerically.
"""

from .algebra import IndexedAlgebra, LoopSpace, Tensor, WeightedForm, build_algebra, form_value, p_weights, theta
from .checks import CheckRecord, CheckReport
from .coaction import (
    CoactionTable,
    canonical_Q,
    check_axioms,
    check_invariance,
    check_two_paths,
    from_group_action,
    translation_coaction,
    trivial_coaction,
)
from .hopf import HopfData, from_group_algebra, from_group_function_algebra, group_table, haar
from .lattice import verify_all
from .runner import Report, run
from .specfile import SpecError, SpecFile, bundled_spec, load_spec
from .tower import fixed_point_basis, gamma, poincare_series, vn_table, w_corep_check

__all__ = [
    "CheckRecord", "CheckReport", "CoactionTable", "HopfData", "IndexedAlgebra", "LoopSpace", "Report",
    "SpecError", "SpecFile", "Tensor", "WeightedForm", "build_algebra", "bundled_spec", "canonical_Q",
    "check_axioms", "check_invariance", "check_two_paths", "fixed_point_basis", "form_value",
    "from_group_action", "from_group_algebra", "from_group_function_algebra", "gamma", "group_table", "haar",
    "load_spec", "p_weights", "poincare_series", "run", "theta", "translation_coaction", "trivial_coaction",
    "verify_all", "vn_table", "w_corep_check",
]
