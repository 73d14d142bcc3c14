"""Exact differential privacy for count queries."""

from .derivability import (
    DerivabilityReport,
    PostProcess,
    add_privacy,
    check_derivable,
    cramer_oracle,
    triple_margin,
)
from .exactnum import RMatrix, det, inverse, mat_mul, parse_rational, replace_column
from .mechanism import (
    ConsumerProfile,
    Mechanism,
    SampleTrace,
    check_dp,
    geometric_full_pmf,
    geometric_restricted,
    max_loss,
    named_loss,
    sample,
)
from .multilevel import build_ladder, collusion_audit, joint_distribution, release
from .oblivious import DatabaseSpace, DbMechanism, check_db_dp, obliviousify, reduction_audit
from .optimizer import optimal_interaction, optimal_mechanism, row_pattern_diagnostic
from .simplex import LinearProgram, solve_lp

__version__ = "0.1.0"
