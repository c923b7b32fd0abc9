"""Numerics for Orlicz and weighted Orlicz spaces on desk-scale measure models.

Young functions with conjugation and growth analysis, sigma-finite model
spaces (atoms + dyadic segment + symbolic countable family), Luxemburg and
Amemiya norms, multiplication-operator analysis, and a deterministic
verification suite.  The hot kernels run through a compiled extension when
available (see orlicz_kit._kernels.BACKEND).
"""

from ._kernels import BACKEND
from .errors import (ComputationError, ConfigError, DomainError,
                     HypothesisViolation, NotInSpaceError, OrliczKitError,
                     SpaceMismatchError, UnboundedConjugateError,
                     UnsupportedRuleError)
from .harness import (PairingDecay, SpikeSequence, SuiteReport, build_spikes,
                      demo_config, measure_convergence_bound, pairing_decay,
                      run_suite, spike_lower_bound)
from .norms import (NormResult, amemiya_norm, indicator_norm, luxemburg_norm,
                    modular, modular_at_norm, weighted_indicator_norm)
from .operators import (CompactnessReport, InvertibilityResult,
                        OperatorNormResult, OperatorReport, analyze, apply,
                        check_invertible, classify_compact, commute_check,
                        n_set, operator_norm, truncation, truncation_gap)
from .orlicz import (Delta2Report, OrliczFunction, check_delta2,
                     check_superlinear, conjugate, conjugate_value, derivative,
                     evaluate, right_inverse, validate)
from .spaces import (CountableAtomFamily, MeasureSpace, PieceSet,
                     SimpleFunction, Tau, WeightedStructure, absolute,
                     build_space, decompose, derive_weight, ess_inf_abs,
                     ess_sup, indicator, measure, pointwise_mul, preimage,
                     scale, shrinking_sequence)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "__version__",
    # errors
    "OrliczKitError", "ConfigError", "DomainError", "SpaceMismatchError",
    "UnsupportedRuleError", "NotInSpaceError", "UnboundedConjugateError",
    "HypothesisViolation", "ComputationError",
    # Young functions
    "OrliczFunction", "Delta2Report", "evaluate", "right_inverse",
    "derivative", "conjugate", "conjugate_value", "check_delta2",
    "check_superlinear", "validate",
    # spaces
    "MeasureSpace", "CountableAtomFamily", "PieceSet", "SimpleFunction",
    "Tau", "WeightedStructure", "build_space", "measure", "decompose",
    "shrinking_sequence", "derive_weight", "preimage", "indicator",
    "pointwise_mul", "scale", "absolute", "ess_sup", "ess_inf_abs",
    # norms
    "NormResult", "modular", "luxemburg_norm", "amemiya_norm",
    "indicator_norm", "weighted_indicator_norm", "modular_at_norm",
    # operators
    "OperatorReport", "OperatorNormResult", "CompactnessReport",
    "InvertibilityResult", "apply", "operator_norm", "n_set",
    "classify_compact", "check_invertible", "truncation", "truncation_gap",
    "commute_check", "analyze",
    # harness
    "SpikeSequence", "PairingDecay", "SuiteReport", "build_spikes",
    "pairing_decay", "spike_lower_bound", "measure_convergence_bound",
    "run_suite", "demo_config",
]
