"""Exact cake cutting: mechanisms, fairness checks, and counterexample chains.

Everything is computed over exact rationals: allocations, property reports,
manipulation-gain certificates, and the violation witnesses produced by the
counterexample chains all re-verify with zero tolerance.
"""

from cakecut.cake import (
    Allocation,
    InfeasibleCutError,
    Interval,
    Piece,
    PiecewiseConstantValuation,
    Profile,
    frac,
    ival,
    normalized,
    validate_allocation,
)
from cakecut.chains import (
    ChainError,
    ChainParameters,
    InfeasibleParameters,
    PropertyCertificate,
    ViolationWitness,
    discussion_example,
    ep_worstcase_fixture,
    prop1_chain,
    thm1_chain,
    thm2_chain,
)
from cakecut.mechanisms import (
    MECHANISMS,
    Mechanism,
    equal_split_nonwasteful,
    even_paz,
    get_mechanism,
    modified_even_paz,
    with_zero_piece_exchange,
)
from cakecut.properties import (
    GainCertificate,
    PropertyReport,
    SearchConfig,
    best_response_gain,
    check_properties,
    ep_cutpoint_best_response,
    evaluate_misreport,
    report_for,
)
from cakecut.queries import (
    LearnedValuation,
    LiftedMechanism,
    RWOracle,
    StrategicOracle,
    approximate_valuation,
    lift_direct_to_rw,
    query_budget,
)

__all__ = [
    "Allocation",
    "ChainError",
    "ChainParameters",
    "GainCertificate",
    "InfeasibleCutError",
    "InfeasibleParameters",
    "Interval",
    "LearnedValuation",
    "LiftedMechanism",
    "MECHANISMS",
    "Mechanism",
    "Piece",
    "PiecewiseConstantValuation",
    "Profile",
    "PropertyCertificate",
    "PropertyReport",
    "RWOracle",
    "SearchConfig",
    "StrategicOracle",
    "ViolationWitness",
    "approximate_valuation",
    "best_response_gain",
    "check_properties",
    "discussion_example",
    "ep_cutpoint_best_response",
    "ep_worstcase_fixture",
    "equal_split_nonwasteful",
    "evaluate_misreport",
    "even_paz",
    "frac",
    "get_mechanism",
    "ival",
    "lift_direct_to_rw",
    "modified_even_paz",
    "normalized",
    "prop1_chain",
    "query_budget",
    "report_for",
    "thm1_chain",
    "thm2_chain",
    "validate_allocation",
    "with_zero_piece_exchange",
]
