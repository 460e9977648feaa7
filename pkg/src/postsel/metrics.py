"""Scalar figures of merit and regime classification."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import UndefinedError, UnequalSupports
from .linalg import as_matrix, r_max, support_projector, trace_product
from .states import ProblemInstance, ThreeOutcomeMeasurement

CASE_TOL = 1e-9
DENOM_TOL = 1e-12


class SupportRelation(str, Enum):
    EQUAL = "Equal"
    SIGMA_INSIDE_RHO = "SigmaInsideRho"
    RHO_INSIDE_SIGMA = "RhoInsideSigma"
    INCOMPARABLE = "Incomparable"


class CaseLabel(str, Enum):
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    SIGMA_INSIDE_RHO = "SigmaInsideRho"
    RHO_INSIDE_SIGMA = "RhoInsideSigma"
    INCOMPARABLE = "Incomparable"

    @property
    def equal_support(self) -> bool:
        return self in (CaseLabel.C1, CaseLabel.C2, CaseLabel.C3)


@dataclass(frozen=True)
class MetricsReport:
    e_s: float
    case: CaseLabel
    xi: float
    p_star: tuple[float, float] | None = None
    r_max_rho_sigma: float | None = None
    r_max_sigma_rho: float | None = None


def support_relation(rho, sigma, rank_tol: float = 1e-10) -> SupportRelation:
    """Compare supports through ranks of Pi_rho, Pi_sigma and Pi_rho + Pi_sigma."""
    pr = support_projector(rho, rank_tol)
    ps = support_projector(sigma, rank_tol)
    union = support_projector(pr.matrix + ps.matrix, rank_tol).rank
    if pr.rank == ps.rank == union:
        return SupportRelation.EQUAL
    if union == pr.rank:
        return SupportRelation.SIGMA_INSIDE_RHO
    if union == ps.rank:
        return SupportRelation.RHO_INSIDE_SIGMA
    return SupportRelation.INCOMPARABLE


def _relation(instance: ProblemInstance) -> SupportRelation:
    return support_relation(instance.rho, instance.sigma, instance.tolerances.rank_tol)


def _weighted_ratios(instance: ProblemInstance) -> tuple[float, float, float, float]:
    tol = instance.tolerances.rank_tol
    a = r_max(instance.rho, instance.sigma, tol)
    b = r_max(instance.sigma, instance.rho, tol)
    w = instance.p_rho / instance.p_sigma
    return a * w, b / w, a, b


def thompson_xi(instance: ProblemInstance) -> float:
    """max(R_max(p_rho rho, p_sigma sigma), R_max(p_sigma sigma, p_rho rho)), or inf."""
    if _relation(instance) is not SupportRelation.EQUAL:
        return math.inf
    up, down, _, _ = _weighted_ratios(instance)
    return max(up, down)


def _equal_case(up: float, down: float) -> CaseLabel:
    if abs(up - down) <= CASE_TOL * max(up, down):
        return CaseLabel.C3
    return CaseLabel.C1 if up > down else CaseLabel.C2


def classify(instance: ProblemInstance) -> CaseLabel:
    rel = _relation(instance)
    if rel is not SupportRelation.EQUAL:
        return CaseLabel(rel.value)
    up, down, _, _ = _weighted_ratios(instance)
    return _equal_case(up, down)


def critical_prior(rho, sigma, rank_tol: float = 1e-10) -> tuple[float, float]:
    """Prior at which both states can be detected by an error-minimizing measurement."""
    if support_relation(rho, sigma, rank_tol) is not SupportRelation.EQUAL:
        raise UnequalSupports("critical prior needs equal supports")
    a = math.sqrt(r_max(rho, sigma, rank_tol))
    b = math.sqrt(r_max(sigma, rho, rank_tol))
    p = b / (a + b)
    return p, 1.0 - p


def min_postselected_error(instance: ProblemInstance) -> MetricsReport:
    rel = _relation(instance)
    if rel is not SupportRelation.EQUAL:
        return MetricsReport(e_s=0.0, case=CaseLabel(rel.value), xi=math.inf)
    up, down, a, b = _weighted_ratios(instance)
    xi = max(up, down)
    p = math.sqrt(b) / (math.sqrt(a) + math.sqrt(b))
    return MetricsReport(
        e_s=1.0 / (1.0 + xi),
        case=_equal_case(up, down),
        xi=xi,
        p_star=(p, 1.0 - p),
        r_max_rho_sigma=a,
        r_max_sigma_rho=b,
    )


def _traces(instance: ProblemInstance, m: ThreeOutcomeMeasurement):
    rho, sigma = instance.rho.matrix, instance.sigma.matrix
    lr, ls = as_matrix(m.lambda_rho), as_matrix(m.lambda_sigma)
    return (
        trace_product(lr, rho),
        trace_product(lr, sigma),
        trace_product(ls, rho),
        trace_product(ls, sigma),
    )


def postselected_error(instance: ProblemInstance, m: ThreeOutcomeMeasurement) -> float:
    """Wrong-decision probability conditioned on acceptance.

    Raises :class:`UndefinedError` when the acceptance probability is below
    ``1e-12`` (the ratio has no meaning there).
    """
    rr, rs, sr, ss = _traces(instance, m)
    pr, ps = instance.p_rho, instance.p_sigma
    den = pr * (rr + sr) + ps * (rs + ss)
    if den < DENOM_TOL:
        raise UndefinedError(f"measurement accepts with probability {den:.3e}")
    return (ps * rs + pr * sr) / den


def acceptance(instance: ProblemInstance, m: ThreeOutcomeMeasurement) -> tuple[float, float]:
    """(Tr((L_rho + L_sigma) rho), Tr((L_rho + L_sigma) sigma))."""
    rr, rs, sr, ss = _traces(instance, m)
    return rr + sr, rs + ss
