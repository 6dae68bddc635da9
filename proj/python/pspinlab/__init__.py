"""Numerical laboratory for p-spin moment and overlap bounds."""

from pspinlab._core import (
    BoundReport,
    BudgetExceeded,
    CriticalPoint,
    HolderChain,
    InfeasibleConstraint,
    InvalidParams,
    LocalMax,
    McEstimate,
    ModelParams,
    RatePoint,
    RsReport,
    TiltedOverlapDistribution,
    annealed_moment_exact,
    chain_verify,
    critical_points,
    holder_chain_check,
    moment_mc,
    rate_function,
    rs_maximize,
    rs_value,
    tilted_delta_expectation,
    tilted_overlap_distribution,
    tilted_overlap_mc,
)

__all__ = [
    "BoundReport",
    "BudgetExceeded",
    "CriticalPoint",
    "HolderChain",
    "InfeasibleConstraint",
    "InvalidParams",
    "LocalMax",
    "McEstimate",
    "ModelParams",
    "RatePoint",
    "RsReport",
    "TiltedOverlapDistribution",
    "annealed_moment_exact",
    "chain_verify",
    "critical_points",
    "holder_chain_check",
    "moment_mc",
    "rate_function",
    "rs_maximize",
    "rs_value",
    "tilted_delta_expectation",
    "tilted_overlap_distribution",
    "tilted_overlap_mc",
]
