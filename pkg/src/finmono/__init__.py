"""Exact digit-sum criteria, Gauss sums and trace functions for finite-monodromy questions
about exponential-sum local systems over finite fields."""

__version__ = "0.1.0"

from .criteria import (  # noqa: E402
    CriterionReport,
    SystemSpec,
    Twist,
    Verdict,
    check_digit_criterion,
    check_digit_criterion_A,
    check_V_criterion,
    gauss_criterion,
    mellin_oracle,
)
from .digits import FractionModZ, digit_sum_abs, digit_sum_lower, digit_sum_upper, kubert_V, kubert_V_RL  # noqa: E402
from .finite_field import FieldTable, build_field, mult_order  # noqa: E402
from .search import is_known_case, search  # noqa: E402
from .traces import raw_trace, trace_table, twisted_trace, wild_inertia_image_order  # noqa: E402

__all__ = [
    "CriterionReport",
    "FieldTable",
    "FractionModZ",
    "SystemSpec",
    "Twist",
    "Verdict",
    "build_field",
    "check_V_criterion",
    "check_digit_criterion",
    "check_digit_criterion_A",
    "digit_sum_abs",
    "digit_sum_lower",
    "digit_sum_upper",
    "gauss_criterion",
    "is_known_case",
    "kubert_V",
    "kubert_V_RL",
    "mellin_oracle",
    "mult_order",
    "raw_trace",
    "search",
    "trace_table",
    "twisted_trace",
    "wild_inertia_image_order",
]
