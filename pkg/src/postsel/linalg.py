"""Small-dimension complex Hermitian linear algebra.

All spectra come from the cyclic Jacobi kernel selected in ``_backend``.
Eigenvalue thresholds scale with ``max(1, ||M||)`` where ``||M||`` is the
operator norm (largest absolute eigenvalue).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _backend
from .errors import (
    ConvergenceFailure,
    DimMismatch,
    HermDefectTooLarge,
    NotPSD,
    ZeroOperator,
)

RANK_TOL = 1e-10
CLUSTER_TOL = 1e-9
HERM_TOL = 1e-8
JACOBI_TOL = 1e-12
MAX_SWEEPS = 100
PHASE_TOL = 1e-10


class Extremum(str, Enum):
    MAX = "Max"
    MIN_NONZERO = "MinNonzero"


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Hermitian matrix plus the defect measured when it was ingested."""

    matrix: np.ndarray
    herm_defect: float = 0.0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise DimMismatch(f"expected a non-empty square matrix, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


@dataclass(frozen=True, eq=False)
class Projector(HermitianOperator):
    rank: int = 0


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigenvalues sorted descending; eigenvectors are the matching columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    cluster_tol: float = CLUSTER_TOL
    norm: float = field(init=False)

    def __post_init__(self):
        w = self.eigenvalues
        object.__setattr__(self, "norm", float(np.max(np.abs(w))) if w.size else 0.0)

    @property
    def scale(self) -> float:
        return max(1.0, self.norm)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return herm((v * self.eigenvalues) @ v.conj().T)


def as_matrix(x) -> np.ndarray:
    """Return ``x`` as a square complex128 array (no copy for operators)."""
    if isinstance(x, HermitianOperator):
        return x.matrix
    m = np.asarray(x, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimMismatch(f"expected a non-empty square matrix, got shape {m.shape}")
    return m


def herm(m: np.ndarray) -> np.ndarray:
    """Exact Hermitian part, (m + m^dagger)/2."""
    return (m + m.conj().T) / 2


def trace_product(a, b) -> float:
    """Real part of Tr(ab)."""
    return float(np.einsum("ij,ji->", as_matrix(a), as_matrix(b)).real)


def hermitize(raw, tol: float = HERM_TOL) -> HermitianOperator:
    """Symmetrize ``raw``, refusing inputs whose anti-Hermitian part exceeds ``tol``."""
    m = as_matrix(raw)
    anti = m - m.conj().T
    defect = 0.0
    if np.any(anti):
        defect = eig(1j * anti).norm
    if defect > tol:
        raise HermDefectTooLarge(f"||M - M^dagger|| = {defect:.3e} exceeds {tol:.1e}")
    return HermitianOperator(herm(m), defect)


def _phase_fix(v: np.ndarray) -> np.ndarray:
    v = v.copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        k = int(np.argmax(np.abs(col) > PHASE_TOL))
        a = abs(col[k])
        if a > 0:
            v[:, j] = col * (col[k].conjugate() / a)
            v[k, j] = a
    return v


def eig(m, cluster_tol: float = CLUSTER_TOL) -> EigenSystem:
    """Deterministic eigendecomposition of a Hermitian matrix."""
    a = herm(as_matrix(m))
    n = a.shape[0]
    target = JACOBI_TOL * float(np.linalg.norm(a)) / math.sqrt(n)
    w, v, sweeps = _backend.jacobi_eigh(a, target, MAX_SWEEPS)
    if sweeps < 0:
        raise ConvergenceFailure(f"Jacobi did not converge in {MAX_SWEEPS} sweeps (dim {n})")
    v = _phase_fix(v)
    keys = [
        (-w[j], tuple(np.column_stack([v[:, j].real, v[:, j].imag]).ravel()))
        for j in range(n)
    ]
    order = sorted(range(n), key=keys.__getitem__)
    return EigenSystem(w[order].copy(), v[:, order].copy(), cluster_tol)


def norm_inf(m) -> float:
    """Operator norm of a Hermitian matrix."""
    return eig(m).norm


def _span(vecs: np.ndarray) -> np.ndarray:
    return herm(vecs @ vecs.conj().T)


def _psd_eig(m, rank_tol: float, which: str) -> tuple[EigenSystem, float]:
    es = eig(m)
    thr = rank_tol * es.scale
    if es.eigenvalues.size and es.eigenvalues[-1] < -thr:
        raise NotPSD(which, float(es.eigenvalues[-1]))
    return es, thr


def support_projector(m, rank_tol: float = RANK_TOL) -> Projector:
    """Projector onto the span of eigenvectors with eigenvalue above the rank threshold."""
    es, thr = _psd_eig(m, rank_tol, "operator")
    keep = es.eigenvalues > thr
    return Projector(_span(es.eigenvectors[:, keep]), rank=int(keep.sum()))


def extremal_projector(
    m,
    which: Extremum | str = Extremum.MAX,
    cluster_tol: float = CLUSTER_TOL,
    rank_tol: float = RANK_TOL,
) -> Projector:
    """Projector onto the eigenspace of the largest or smallest nonzero eigenvalue.

    Eigenvalues within ``cluster_tol * max(1, ||M||)`` of the extremum belong
    to the same eigenspace.
    """
    which = Extremum(which)
    es, thr = _psd_eig(m, rank_tol, "operator")
    w = es.eigenvalues
    nonzero = w > thr
    if not nonzero.any():
        raise ZeroOperator("extremal projector of the zero operator")
    band = cluster_tol * es.scale
    if which is Extremum.MAX:
        keep = nonzero & (w >= w[0] - band)
    else:
        lo = w[nonzero].min()
        keep = nonzero & (w <= lo + band)
    return Projector(_span(es.eigenvectors[:, keep]), rank=int(keep.sum()))


def pseudo_power(m, p: float, rank_tol: float = RANK_TOL) -> HermitianOperator:
    """Raise nonzero eigenvalues to ``p``; zero eigenvalues stay zero."""
    es, thr = _psd_eig(m, rank_tol, "operator")
    w = es.eigenvalues
    f = np.zeros_like(w)
    nz = w > thr
    f[nz] = w[nz] ** p
    v = es.eigenvectors
    return HermitianOperator(herm((v * f) @ v.conj().T))


def check_psd(m, rank_tol: float = RANK_TOL, which: str = "operator") -> EigenSystem:
    """Raise :class:`NotPSD` unless ``m`` is PSD within the rank threshold."""
    return _psd_eig(m, rank_tol, which)[0]


def relative_operator(nu1, nu2, rank_tol: float = RANK_TOL) -> HermitianOperator:
    """nu2^{-1/2} nu1 nu2^{-1/2} with the generalized inverse square root."""
    a = as_matrix(nu1)
    check_psd(a, rank_tol, "nu1")
    s = pseudo_power(nu2, -0.5, rank_tol).matrix
    if s.shape != a.shape:
        raise DimMismatch(f"dimensions differ: {a.shape} vs {s.shape}")
    return HermitianOperator(herm(s @ a @ s))


def _relative_spectrum(nu1, nu2, rank_tol):
    if support_projector(nu2, rank_tol).rank == 0:
        raise ZeroOperator("second argument is zero")
    es = eig(relative_operator(nu1, nu2, rank_tol))
    return es.eigenvalues, rank_tol * es.scale


def r_max(nu1, nu2, rank_tol: float = RANK_TOL) -> float:
    """Largest eigenvalue of nu2^{-1/2} nu1 nu2^{-1/2}."""
    w, _ = _relative_spectrum(nu1, nu2, rank_tol)
    return max(0.0, float(w[0]))


def r_min(nu1, nu2, rank_tol: float = RANK_TOL) -> float:
    """Smallest nonzero eigenvalue of nu2^{-1/2} nu1 nu2^{-1/2}; 0 if that operator vanishes."""
    w, thr = _relative_spectrum(nu1, nu2, rank_tol)
    nz = w[w > thr]
    return float(nz.min()) if nz.size else 0.0


def loewner_leq(a, b, tol: float = RANK_TOL) -> bool:
    """True when B - A is PSD up to ``tol * max(1, ||B - A||)``."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimMismatch(f"dimensions differ: {a.shape} vs {b.shape}")
    es = eig(b - a)
    return bool(es.eigenvalues[-1] >= -tol * es.scale)


def in_subspace(x, p, tol: float = 1e-8) -> bool:
    """``||P X P - X|| <= tol * max(1, ||X||)``."""
    x, p = as_matrix(x), as_matrix(p)
    return membership_defect(x, p) <= tol * max(1.0, norm_inf(x))


def membership_defect(x, p) -> float:
    """``||P X P - X||`` for Hermitian X."""
    x, p = as_matrix(x), as_matrix(p)
    return norm_inf(herm(p @ x @ p) - x)


def complement_bases(p, split: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases of range(P) and its orthogonal complement."""
    es = eig(p)
    inside = es.eigenvalues > split
    return es.eigenvectors[:, inside], es.eigenvectors[:, ~inside]


def shorted_operator(a, p, rank_tol: float = RANK_TOL) -> HermitianOperator:
    """Largest PSD operator supported in range(P) that is dominated by A.

    Computed as the Schur complement A11 - A12 A22^+ A21 in the split
    range(P) + range(P)^perp.
    """
    a = as_matrix(a)
    u1, u2 = complement_bases(p)
    if u1.shape[1] == 0:
        return HermitianOperator(np.zeros_like(a))
    a11 = u1.conj().T @ a @ u1
    if u2.shape[1]:
        a12 = u1.conj().T @ a @ u2
        inv22 = pseudo_power(u2.conj().T @ a @ u2, -1.0, rank_tol).matrix
        a11 = a11 - a12 @ inv22 @ a12.conj().T
    return HermitianOperator(herm(u1 @ herm(a11) @ u1.conj().T))


def intersect_projectors(p1, p2, tol: float = 1e-8) -> Projector:
    """Projector onto range(P1) intersected with range(P2)."""
    p1, p2 = as_matrix(p1), as_matrix(p2)
    es = eig(herm(p1 @ p2 @ p1))
    keep = es.eigenvalues >= 1.0 - tol
    return Projector(_span(es.eigenvectors[:, keep]), rank=int(keep.sum()))


def projector_distance(p1, p2) -> float:
    return norm_inf(as_matrix(p1) - as_matrix(p2))
