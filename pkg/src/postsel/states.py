"""Validated states, priors, measurements and seeded samplers."""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import _backend
from .errors import (
    BadPrior,
    BadRank,
    DimMismatch,
    SumExceedsIdentity,
    TraceNotOne,
    ValidationError,
    ZeroProjector,
)
from .linalg import (
    CLUSTER_TOL,
    HERM_TOL,
    RANK_TOL,
    HermitianOperator,
    as_matrix,
    check_psd,
    eig,
    herm,
    hermitize,
)

TRACE_TOL = 1e-9
PRIOR_EDGE = 1e-12


@dataclass(frozen=True)
class Tolerances:
    """Numerical knobs carried by every instance and echoed in reports."""

    rank_tol: float = RANK_TOL
    cluster_tol: float = CLUSTER_TOL
    psd_tol: float = RANK_TOL
    member_tol: float = 1e-8
    herm_tol: float = HERM_TOL

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict | None) -> "Tolerances":
        if not data:
            return cls()
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown tolerance keys: {sorted(unknown)}")
        out = cls(**{k: float(v) for k, v in data.items()})
        for k, v in out.to_dict().items():
            if not (v >= 0 and np.isfinite(v)):
                raise ValidationError(f"tolerance {k} must be a finite nonnegative number")
        return out


@dataclass(frozen=True, eq=False)
class DensityOperator:
    op: HermitianOperator

    @property
    def matrix(self) -> np.ndarray:
        return self.op.matrix

    @property
    def dim(self) -> int:
        return self.op.dim

    def __array__(self, dtype=None, copy=None):
        return self.op.__array__(dtype)


@dataclass(frozen=True)
class Prior:
    p_rho: float

    def __post_init__(self):
        p = float(self.p_rho)
        if not (PRIOR_EDGE < p < 1.0 - PRIOR_EDGE):
            raise BadPrior(f"p_rho must lie strictly inside (0, 1); got {p!r}")
        object.__setattr__(self, "p_rho", p)

    @property
    def p_sigma(self) -> float:
        return 1.0 - self.p_rho


@dataclass(frozen=True, eq=False)
class ThreeOutcomeMeasurement:
    """Accept-as-rho and accept-as-sigma effects; the reject effect is implied."""

    lambda_rho: HermitianOperator
    lambda_sigma: HermitianOperator

    @property
    def dim(self) -> int:
        return self.lambda_rho.dim

    @property
    def reject(self) -> np.ndarray:
        return np.eye(self.dim) - self.lambda_rho.matrix - self.lambda_sigma.matrix

    @property
    def accept(self) -> np.ndarray:
        return self.lambda_rho.matrix + self.lambda_sigma.matrix


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    rho: DensityOperator
    sigma: DensityOperator
    prior: Prior
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if self.rho.dim != self.sigma.dim:
            raise DimMismatch(f"rho has dim {self.rho.dim}, sigma has dim {self.sigma.dim}")

    @property
    def dim(self) -> int:
        return self.rho.dim

    @property
    def p_rho(self) -> float:
        return self.prior.p_rho

    @property
    def p_sigma(self) -> float:
        return self.prior.p_sigma

    def with_prior(self, p_rho: float) -> "ProblemInstance":
        return replace(self, prior=Prior(p_rho))


def validate_density(raw, tolerances: Tolerances | None = None, which: str = "state") -> DensityOperator:
    tol = tolerances or Tolerances()
    op = raw if isinstance(raw, HermitianOperator) else hermitize(raw, tol.herm_tol)
    check_psd(op, tol.psd_tol, which)
    tr = float(np.trace(op.matrix).real)
    if abs(tr - 1.0) > TRACE_TOL:
        raise TraceNotOne(f"{which} has trace {tr!r}, expected 1")
    return DensityOperator(op)


def validate_measurement(lambda_rho, lambda_sigma, tolerances: Tolerances | None = None) -> ThreeOutcomeMeasurement:
    """Check both effects are PSD and their sum is dominated by the identity."""
    tol = tolerances or Tolerances()
    lr = lambda_rho if isinstance(lambda_rho, HermitianOperator) else hermitize(lambda_rho, tol.herm_tol)
    ls = lambda_sigma if isinstance(lambda_sigma, HermitianOperator) else hermitize(lambda_sigma, tol.herm_tol)
    if lr.dim != ls.dim:
        raise DimMismatch(f"lambda_rho has dim {lr.dim}, lambda_sigma has dim {ls.dim}")
    check_psd(lr, tol.psd_tol, "lambda_rho")
    check_psd(ls, tol.psd_tol, "lambda_sigma")
    es = eig(np.eye(lr.dim) - lr.matrix - ls.matrix)
    if es.eigenvalues[-1] < -tol.psd_tol * es.scale:
        raise SumExceedsIdentity(
            f"lambda_rho + lambda_sigma exceeds I (reject effect min eigenvalue {es.eigenvalues[-1]:.3e})"
        )
    return ThreeOutcomeMeasurement(lr, ls)


def make_instance(rho, sigma, p_rho: float, tolerances: Tolerances | None = None) -> ProblemInstance:
    tol = tolerances or Tolerances()
    r = rho if isinstance(rho, DensityOperator) else validate_density(rho, tol, "rho")
    s = sigma if isinstance(sigma, DensityOperator) else validate_density(sigma, tol, "sigma")
    return ProblemInstance(r, s, Prior(p_rho), tol)


def derive_seed(seed: int, index: int) -> int:
    """Child seed for item ``index`` of a seeded loop (SplitMix64 finalizer)."""
    return _backend.mix64(seed, index)


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_density(dim: int, rank: int, seed: int) -> DensityOperator:
    """G G^dagger / Tr(G G^dagger) for a complex Gaussian ``dim x rank`` factor G."""
    if not (1 <= rank <= dim):
        raise BadRank(f"rank must satisfy 1 <= rank <= dim; got rank={rank}, dim={dim}")
    g = _ginibre(np.random.default_rng(seed), dim, rank)
    m = herm(g @ g.conj().T)
    return DensityOperator(HermitianOperator(m / np.trace(m).real))


def random_psd_in_subspace(p, seed: int) -> DensityOperator:
    """Random density confined to range(P)."""
    pm = as_matrix(p)
    if np.trace(pm).real < 0.5:
        raise ZeroProjector("cannot sample a density inside the zero subspace")
    g = _ginibre(np.random.default_rng(seed), pm.shape[0], pm.shape[0])
    pg = pm @ g
    m = herm(pg @ pg.conj().T)
    return DensityOperator(HermitianOperator(m / np.trace(m).real))


__all__ = [
    "DensityOperator",
    "Prior",
    "ProblemInstance",
    "ThreeOutcomeMeasurement",
    "Tolerances",
    "derive_seed",
    "make_instance",
    "random_density",
    "random_psd_in_subspace",
    "validate_density",
    "validate_measurement",
]
