"""Error-minimizing three-outcome measurements.

Equal supports
    The relative operator sigma^{-1/2} rho sigma^{-1/2} has extremal
    eigenspaces T_max, T_min. Their sigma^{-1/2}-conjugated supports P_max,
    P_min host every effect that can reach the minimum error.

Unequal supports
    Zero error is reachable. Members split into three families E1, E2 and E3
    by which states they ever accept.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CaseMismatch,
    CBoundViolated,
    EqualSupports,
    MembershipViolated,
    SetEmptyForSupports,
    SumExceedsIdentity,
    UnequalSupports,
    ZeroOverlap,
)
from .linalg import (
    Extremum,
    Projector,
    as_matrix,
    check_psd,
    eig,
    extremal_projector,
    herm,
    membership_defect,
    norm_inf,
    pseudo_power,
    relative_operator,
    support_projector,
    trace_product,
)
from .metrics import (
    DENOM_TOL,
    CaseLabel,
    SupportRelation,
    classify,
    support_relation,
)
from .states import ProblemInstance, ThreeOutcomeMeasurement, Tolerances, validate_density, validate_measurement

BOUND_SLACK = 1e-12
ZERO_TRACE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ExtremalSubspaces:
    t_max: Projector
    t_min: Projector
    p_max: Projector
    p_min: Projector
    sigma_support: Projector
    degenerate: bool


# Parameter records. ``c`` left as None means "at its upper bound".


@dataclass(frozen=True, eq=False)
class EqualC1:
    psi_max: np.ndarray
    c: float | None = None
    residual_sigma: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class EqualC2:
    psi_min: np.ndarray
    c: float | None = None
    residual_rho: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class EqualC3:
    psi_max: np.ndarray
    psi_min: np.ndarray
    c_r: float
    c: float | None = None


@dataclass(frozen=True, eq=False)
class EqualDegenerate:
    """C3 when T_max = T_min, i.e. rho = sigma: both effects share one subspace."""

    psi_rho: np.ndarray
    psi_sigma: np.ndarray
    c_r: float
    c: float | None = None


@dataclass(frozen=True, eq=False)
class Unequal1:
    psi_rho: np.ndarray
    c: float | None = None
    residual_sigma: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class Unequal2:
    psi_sigma: np.ndarray
    c: float | None = None
    residual_rho: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class Unequal3:
    psi_rho: np.ndarray
    psi_sigma: np.ndarray
    c_r: float
    c: float | None = None


EQUAL_PARAMS = (EqualC1, EqualC2, EqualC3, EqualDegenerate)
UNEQUAL_PARAMS = (Unequal1, Unequal2, Unequal3)


@dataclass(frozen=True)
class MembershipCheck:
    ok: bool
    clause: str | None = None
    family: str | None = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True, eq=False)
class _Shape:
    unit_rho: np.ndarray
    unit_sigma: np.ndarray
    bound: float
    residual_rho: np.ndarray | None
    residual_sigma: np.ndarray | None


def classify_support_relation(rho, sigma, rank_tol: float = 1e-10) -> SupportRelation:
    return support_relation(rho, sigma, rank_tol)


def extremal_subspaces(rho, sigma, tolerances: Tolerances | None = None) -> ExtremalSubspaces:
    tol = tolerances or Tolerances()
    if support_relation(rho, sigma, tol.rank_tol) is not SupportRelation.EQUAL:
        raise UnequalSupports("extremal subspaces need equal supports")
    rel = relative_operator(rho, sigma, tol.rank_tol)
    t_max = extremal_projector(rel, Extremum.MAX, tol.cluster_tol, tol.rank_tol)
    t_min = extremal_projector(rel, Extremum.MIN_NONZERO, tol.cluster_tol, tol.rank_tol)
    es = eig(rel)
    w = es.eigenvalues[es.eigenvalues > tol.rank_tol * es.scale]
    degenerate = bool(w[0] - w[-1] <= tol.cluster_tol * es.scale)
    s = pseudo_power(sigma, -0.5, tol.rank_tol).matrix
    p_max = support_projector(herm(s @ t_max.matrix @ s), tol.rank_tol)
    p_min = support_projector(herm(s @ t_min.matrix @ s), tol.rank_tol)
    return ExtremalSubspaces(t_max, t_min, p_max, p_min, support_projector(sigma, tol.rank_tol), degenerate)


def _density_in(psi, space: np.ndarray, tol: Tolerances, name: str) -> np.ndarray:
    d = validate_density(psi, tol, name).matrix
    defect = membership_defect(d, space)
    if defect > tol.member_tol:
        raise MembershipViolated(f"{name} leaves its allowed subspace (defect {defect:.3e})")
    return d


def _per_unit(psi: np.ndarray, state: np.ndarray, name: str) -> np.ndarray:
    t = trace_product(psi, state)
    if t <= DENOM_TOL:
        raise ZeroOverlap(f"{name} has zero overlap with the state it must detect")
    return psi / t


def _inv_norm(x: np.ndarray) -> float:
    return 1.0 / norm_inf(x)


def _residual(res, space: np.ndarray, tol: Tolerances, name: str) -> np.ndarray | None:
    if res is None:
        return None
    r = herm(as_matrix(res))
    check_psd(r, tol.psd_tol, name)
    defect = membership_defect(r, space)
    if defect > tol.member_tol * max(1.0, norm_inf(r)):
        raise MembershipViolated(f"{name} must vanish on the support (defect {defect:.3e})")
    return r


def _mixed(units, c_r: float) -> float:
    if not 0.0 <= c_r <= 1.0:
        raise CBoundViolated(f"c_r must lie in [0, 1]; got {c_r!r}")
    a, b = units
    if c_r == 1.0:
        return _inv_norm(a)
    if c_r == 0.0:
        return _inv_norm(b)
    return _inv_norm(c_r * a + (1.0 - c_r) * b)


def _shape_equal(instance: ProblemInstance, params) -> _Shape:
    tol = instance.tolerances
    case = classify(instance)
    if not case.equal_support:
        raise UnequalSupports(f"instance has unequal supports ({case.value})")
    sub = extremal_subspaces(instance.rho, instance.sigma, tol)
    if case is CaseLabel.C3:
        expected = EqualDegenerate if sub.degenerate else EqualC3
    else:
        expected = EqualC1 if case is CaseLabel.C1 else EqualC2
    if type(params) is not expected:
        raise CaseMismatch(f"instance is in case {case.value}; expected {expected.__name__}, got {type(params).__name__}")
    sigma = instance.sigma.matrix
    eye = np.eye(instance.dim)
    outside = eye - sub.sigma_support.matrix
    zero = np.zeros_like(sigma)
    if isinstance(params, EqualC1):
        x = _per_unit(_density_in(params.psi_max, outside + sub.p_max.matrix, tol, "psi_max"), sigma, "psi_max")
        res = _residual(params.residual_sigma, outside, tol, "residual_sigma")
        return _Shape(x, zero, _inv_norm(x), None, res)
    if isinstance(params, EqualC2):
        x = _per_unit(_density_in(params.psi_min, outside + sub.p_min.matrix, tol, "psi_min"), sigma, "psi_min")
        res = _residual(params.residual_rho, outside, tol, "residual_rho")
        return _Shape(zero, x, _inv_norm(x), res, None)
    if isinstance(params, EqualC3):
        names = ("psi_max", "psi_min")
        psis = (params.psi_max, params.psi_min)
        spaces = (outside + sub.p_max.matrix, outside + sub.p_min.matrix)
    else:
        names = ("psi_rho", "psi_sigma")
        psis = (params.psi_rho, params.psi_sigma)
        spaces = (outside + sub.p_max.matrix,) * 2
    return _shape_two(psis, names, spaces, (sigma, sigma), params.c_r, tol)


def _shape_two(psis, names, spaces, states, c_r, tol) -> _Shape:
    """Shared C3 / E3 shape; an endpoint c_r drops the unused density entirely."""
    units = [np.zeros_like(states[0]), np.zeros_like(states[0])]
    weights = (c_r, 1.0 - c_r)
    for k in range(2):
        if weights[k] != 0.0:
            units[k] = _per_unit(_density_in(psis[k], spaces[k], tol, names[k]), states[k], names[k])
    bound = _mixed(units, c_r)
    return _Shape(c_r * units[0], (1.0 - c_r) * units[1], bound, None, None)


def _shape_unequal(instance: ProblemInstance, params) -> _Shape:
    tol = instance.tolerances
    rel = support_relation(instance.rho, instance.sigma, tol.rank_tol)
    if rel is SupportRelation.EQUAL:
        raise EqualSupports("zero-error families need unequal supports")
    rho, sigma = instance.rho.matrix, instance.sigma.matrix
    eye = np.eye(instance.dim)
    not_sigma = eye - support_projector(sigma, tol.rank_tol).matrix
    not_rho = eye - support_projector(rho, tol.rank_tol).matrix
    neither = eye - support_projector(rho + sigma, tol.rank_tol).matrix
    zero = np.zeros_like(rho)
    c_r = getattr(params, "c_r", None)
    uses_rho = isinstance(params, Unequal1) or (isinstance(params, Unequal3) and c_r > 0)
    uses_sigma = isinstance(params, Unequal2) or (isinstance(params, Unequal3) and c_r < 1)
    if uses_rho and rel is SupportRelation.RHO_INSIDE_SIGMA:
        raise SetEmptyForSupports("rho's support lies inside sigma's: no effect can accept rho without error")
    if uses_sigma and rel is SupportRelation.SIGMA_INSIDE_RHO:
        raise SetEmptyForSupports("sigma's support lies inside rho's: no effect can accept sigma without error")
    if isinstance(params, Unequal1):
        x = _per_unit(_density_in(params.psi_rho, not_sigma, tol, "psi_rho"), rho, "psi_rho")
        res = _residual(params.residual_sigma, neither, tol, "residual_sigma")
        return _Shape(x, zero, _inv_norm(x), None, res)
    if isinstance(params, Unequal2):
        x = _per_unit(_density_in(params.psi_sigma, not_rho, tol, "psi_sigma"), sigma, "psi_sigma")
        res = _residual(params.residual_rho, neither, tol, "residual_rho")
        return _Shape(zero, x, _inv_norm(x), res, None)
    if isinstance(params, Unequal3):
        return _shape_two(
            (params.psi_rho, params.psi_sigma), ("psi_rho", "psi_sigma"),
            (not_sigma, not_rho), (rho, sigma), params.c_r, tol,
        )
    raise CaseMismatch(f"unsupported parameter record {type(params).__name__}")


def _shape(instance, params) -> _Shape:
    if isinstance(params, EQUAL_PARAMS):
        return _shape_equal(instance, params)
    if isinstance(params, UNEQUAL_PARAMS):
        return _shape_unequal(instance, params)
    raise CaseMismatch(f"unsupported parameter record {type(params).__name__}")


def max_c(instance: ProblemInstance, params) -> float:
    """Largest admissible scale ``c`` for the given densities (and c_r)."""
    return _shape(instance, params).bound


def _build(instance, params) -> ThreeOutcomeMeasurement:
    shape = _shape(instance, params)
    c = shape.bound if params.c is None else float(params.c)
    if not c > 0.0:
        raise CBoundViolated(f"c must be positive; got {c!r}")
    if c > shape.bound * (1.0 + BOUND_SLACK):
        raise CBoundViolated(f"c = {c!r} exceeds its bound {shape.bound!r}")
    lr = c * shape.unit_rho
    ls = c * shape.unit_sigma
    if shape.residual_rho is not None:
        lr = lr + shape.residual_rho
    if shape.residual_sigma is not None:
        ls = ls + shape.residual_sigma
    tol = instance.tolerances
    if shape.residual_rho is not None or shape.residual_sigma is not None:
        es = eig(np.eye(instance.dim) - lr - ls)
        if es.eigenvalues[-1] < -tol.psd_tol * es.scale:
            raise SumExceedsIdentity("residual effect pushes the accept effects above the identity")
    return validate_measurement(herm(lr), herm(ls), tol)


def construct_equal(instance: ProblemInstance, params) -> ThreeOutcomeMeasurement:
    """Measurement from the equal-support parameter table."""
    if not isinstance(params, EQUAL_PARAMS):
        raise CaseMismatch(f"{type(params).__name__} is not an equal-support record")
    return _build(instance, params)


def construct_unequal(instance: ProblemInstance, params) -> ThreeOutcomeMeasurement:
    """Zero-error measurement from the unequal-support parameter table."""
    if not isinstance(params, UNEQUAL_PARAMS):
        raise CaseMismatch(f"{type(params).__name__} is not an unequal-support record")
    return _build(instance, params)


def construct(instance: ProblemInstance, params) -> ThreeOutcomeMeasurement:
    return _build(instance, params)


def _accepts(instance, m, tol) -> bool:
    rho, sigma = instance.rho.matrix, instance.sigma.matrix
    acc = as_matrix(m.lambda_rho) + as_matrix(m.lambda_sigma)
    den = instance.p_rho * trace_product(acc, rho) + instance.p_sigma * trace_product(acc, sigma)
    return den >= DENOM_TOL


def is_error_minimizing_equal(instance: ProblemInstance, m: ThreeOutcomeMeasurement, tol: float = 1e-8) -> MembershipCheck:
    """Decide whether ``m`` attains the minimum postselected error (equal supports).

    Checks the sigma^{1/2}-conjugated effects against T_max / T_min for the
    instance's case and reports the first clause that fails.
    """
    tols = instance.tolerances
    sub = extremal_subspaces(instance.rho, instance.sigma, tols)
    case = classify(instance)
    if not _accepts(instance, m, tols):
        return MembershipCheck(False, "nonzero acceptance")
    half = pseudo_power(instance.sigma, 0.5, tols.rank_tol).matrix
    xr = herm(half @ as_matrix(m.lambda_rho) @ half)
    xs = herm(half @ as_matrix(m.lambda_sigma) @ half)

    def inside(x, p):
        return membership_defect(x, p.matrix) <= tol * max(1.0, norm_inf(x))

    def vanishes(x):
        return norm_inf(x) <= tol

    if case is CaseLabel.C1:
        if not inside(xr, sub.t_max):
            return MembershipCheck(False, "sigma^{1/2} Lambda_rho sigma^{1/2} in P(T_max)")
        if not vanishes(xs):
            return MembershipCheck(False, "sigma^{1/2} Lambda_sigma sigma^{1/2} = 0")
    elif case is CaseLabel.C2:
        if not inside(xs, sub.t_min):
            return MembershipCheck(False, "sigma^{1/2} Lambda_sigma sigma^{1/2} in P(T_min)")
        if not vanishes(xr):
            return MembershipCheck(False, "sigma^{1/2} Lambda_rho sigma^{1/2} = 0")
    else:
        if not inside(xr, sub.t_max):
            return MembershipCheck(False, "sigma^{1/2} Lambda_rho sigma^{1/2} in P(T_max)")
        if not inside(xs, sub.t_min):
            return MembershipCheck(False, "sigma^{1/2} Lambda_sigma sigma^{1/2} in P(T_min)")
    return MembershipCheck(True, family=case.value)


def is_error_minimizing_unequal(instance: ProblemInstance, m: ThreeOutcomeMeasurement, tol: float = ZERO_TRACE_TOL) -> MembershipCheck:
    """Zero-error test with family tag E1 / E2 / E3 from the detection pattern."""
    rho, sigma = instance.rho.matrix, instance.sigma.matrix
    lr, ls = as_matrix(m.lambda_rho), as_matrix(m.lambda_sigma)
    if not _accepts(instance, m, instance.tolerances):
        return MembershipCheck(False, "nonzero acceptance")
    if trace_product(lr, sigma) > tol:
        return MembershipCheck(False, "Tr(Lambda_rho sigma) = 0")
    if trace_product(ls, rho) > tol:
        return MembershipCheck(False, "Tr(Lambda_sigma rho) = 0")
    hit_rho = trace_product(lr, rho) > tol
    hit_sigma = trace_product(ls, sigma) > tol
    if hit_rho and hit_sigma:
        return MembershipCheck(True, family="E3")
    if hit_rho:
        return MembershipCheck(True, family="E1")
    if hit_sigma:
        return MembershipCheck(True, family="E2")
    return MembershipCheck(False, "nonzero acceptance")
