"""Minimum-error postselected discrimination of two quantum states.

Typical use::

    from postsel import make_instance, min_postselected_error, max_acceptance
    inst = make_instance(rho, sigma, p_rho=0.5)
    min_postselected_error(inst).e_s
"""
from ._backend import BACKEND
from .maximize import (
    AcceptanceReport,
    MaxAcceptance,
    Method,
    UpsilonResult,
    acceptance_from_params,
    max_acceptance,
    max_acceptance_equal,
    max_acceptance_unequal,
    upsilon,
)
from .construction import (
    EqualC1,
    EqualC2,
    EqualC3,
    EqualDegenerate,
    ExtremalSubspaces,
    MembershipCheck,
    Unequal1,
    Unequal2,
    Unequal3,
    construct,
    construct_equal,
    construct_unequal,
    extremal_subspaces,
    is_error_minimizing_equal,
    is_error_minimizing_unequal,
    max_c,
)
from .errors import ConvergenceFailure, PostselError, UndefinedError, ValidationError
from .linalg import (
    EigenSystem,
    Extremum,
    HermitianOperator,
    Projector,
    eig,
    extremal_projector,
    hermitize,
    loewner_leq,
    norm_inf,
    pseudo_power,
    r_max,
    r_min,
    relative_operator,
    shorted_operator,
    support_projector,
)
from .metrics import (
    CaseLabel,
    MetricsReport,
    SupportRelation,
    acceptance,
    classify,
    critical_prior,
    min_postselected_error,
    postselected_error,
    support_relation,
    thompson_xi,
)
from .oracle import (
    LEMMAS,
    OracleConfig,
    OracleReport,
    check_lemma,
    oracle_max_acceptance,
    oracle_min_error,
    sample_measurement,
)
from .simulate import SimReport, outcome_distribution, simulate
from .states import (
    DensityOperator,
    Prior,
    ProblemInstance,
    ThreeOutcomeMeasurement,
    Tolerances,
    derive_seed,
    make_instance,
    random_density,
    random_psd_in_subspace,
    validate_density,
    validate_measurement,
)

__version__ = "0.1.0"

import types as _types

__all__ = sorted(
    name for name, obj in globals().items() if not name.startswith("_") and not isinstance(obj, _types.ModuleType)
)
