"""Exact-arithmetic toolkit for finite delta-hyperbolic metric spaces."""

from .errors import InputError, ResourceLimitError, VerificationError
from .rational import format_rational, parse_rational
from .space import (FiniteMetricSpace, MetricViolation, QuadrupleWitness,
                    is_delta_hyperbolic, is_geodetic, max_defect,
                    min_hyperbolicity, validate_metric)
from .gates import (ClosednessReport, GateResult, closure, convex_closure,
                    delta_closed_pairs, delta_closed_subsets, gate, gate_map,
                    is_delta_closed, is_gated)
from .amalgam import (Amalgam, AmalgamSpec, AmalgamationReport, MarkedSpace,
                      canonical_amalgam, check_amalgamation_lemma, marked_amalgam)

__version__ = "0.1.0"

__all__ = [
    "InputError", "ResourceLimitError", "VerificationError",
    "format_rational", "parse_rational",
    "FiniteMetricSpace", "MetricViolation", "QuadrupleWitness",
    "is_delta_hyperbolic", "is_geodetic", "max_defect", "min_hyperbolicity",
    "validate_metric",
    "ClosednessReport", "GateResult", "closure", "convex_closure",
    "delta_closed_pairs", "delta_closed_subsets", "gate", "gate_map",
    "is_delta_closed", "is_gated",
    "Amalgam", "AmalgamSpec", "AmalgamationReport", "MarkedSpace",
    "canonical_amalgam", "check_amalgamation_lemma", "marked_amalgam",
    "__version__",
]
