"""Acceptance of error-minimizing measurements and its maximum.

The two-subspace problem behind the C3 maximum is

    Upsilon(sigma, r) = max { c : c (r psi1 + (1-r) psi2) <= sigma,
                              psi1 in S(Pi1), psi2 in S(Pi2) }.

Before any formula is applied, sigma is replaced by its shorted operator on
(Pi1 + Pi2) intersected with supp(sigma). That is the largest PSD operator
living there and dominated by sigma, so the feasible set is unchanged.

Block-diagonal and rank-one problems have closed forms. Anything else goes
through a log-det barrier solver; its densities are then polished by an exact
ray search so every reported value is attained by a valid measurement. When
the maximum over r is wanted, the whole search is one SDP,

    max w1 Tr Y1 + w2 Tr Y2  s.t.  Y1 (+) Y2 <= sigma,  Yj >= 0 on Pij,

with r = Tr Y1 / (Tr Y1 + Tr Y2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import brentq, minimize_scalar

from .construction import (
    EqualC1,
    EqualC2,
    EqualC3,
    EqualDegenerate,
    Unequal1,
    Unequal2,
    Unequal3,
    extremal_subspaces,
)
from .errors import CaseMismatch, EqualSupports, ProjectorsNotOrthogonal, UnequalSupports
from .linalg import (
    RANK_TOL,
    as_matrix,
    complement_bases,
    eig,
    herm,
    intersect_projectors,
    pseudo_power,
    r_max,
    r_min,
    shorted_operator,
    support_projector,
    trace_product,
)
from .metrics import CaseLabel, SupportRelation, classify, support_relation
from .states import ProblemInstance, ThreeOutcomeMeasurement, validate_measurement

ORTH_TOL = 1e-9
BLOCK_TOL = 1e-10
GRID_POINTS = 1001
BARRIER_GAP = 1e-12
NEWTON_STEPS = 100


class Method(str, Enum):
    CLOSED_FORM = "ClosedForm"
    NUMERIC = "NumericUpsilon"


@dataclass(frozen=True, eq=False)
class UpsilonResult:
    """Value plus the maximizing densities (full-space matrices).

    ``upper_bound`` is min(Tr S1 / r, Tr S2 / (1-r)) with S_j the shorted
    operator of sigma on each subspace; for ``NumericUpsilon`` results the
    value is a feasible point, so ``value <= Upsilon <= upper_bound``.
    """

    value: float
    method: Method
    detail: str
    psi1: np.ndarray | None
    psi2: np.ndarray | None
    upper_bound: float


@dataclass(frozen=True, eq=False)
class AcceptanceReport:
    a_rho: float
    a_sigma: float
    achieving_measurement: ThreeOutcomeMeasurement | None
    c_r_star: float | None
    method: Method


@dataclass(frozen=True, eq=False)
class MaxAcceptance:
    """Maxima for each state with the measurement that attains each one."""

    case: CaseLabel
    a_rho_max: float
    a_sigma_max: float
    for_rho: AcceptanceReport
    for_sigma: AcceptanceReport


def _density(m: np.ndarray) -> np.ndarray:
    m = herm(m)
    return m / np.trace(m).real


class Upsilon:
    """Prepared two-subspace problem; call with ``r`` to evaluate."""

    def __init__(self, pi1, pi2, sigma, *, rank_tol: float = RANK_TOL):
        p1, p2, s = as_matrix(pi1), as_matrix(pi2), herm(as_matrix(sigma))
        overlap = trace_product(p1, p2)
        if overlap > ORTH_TOL:
            raise ProjectorsNotOrthogonal(f"Tr(Pi1 Pi2) = {overlap:.3e}")
        self.sigma = s
        supp = support_projector(s, rank_tol).matrix
        q1 = intersect_projectors(p1, supp).matrix
        q2 = intersect_projectors(p2, supp).matrix
        self.q1, self.q2 = q1, q2
        u1, _ = complement_bases(q1)
        u2, _ = complement_bases(q2)
        self.k1, self.k2 = u1.shape[1], u2.shape[1]
        self.w = np.hstack([u1, u2])
        self.t1 = self._endpoint(q1, rank_tol)
        self.t2 = self._endpoint(q2, rank_tol)
        if self.k1 and self.k2:
            short = shorted_operator(s, q1 + q2, rank_tol).matrix
            self.s = herm(self.w.conj().T @ short @ self.w)
            off = np.abs(self.s[: self.k1, self.k1 :]).max()
            self.block = bool(off <= BLOCK_TOL * max(1.0, eig(self.s).norm))
        else:
            self.s = None
            self.block = True

    def _endpoint(self, q, rank_tol):
        """(value, psi) for r at the endpoint that keeps only subspace ``q``."""
        if np.trace(q).real < 0.5:
            return 0.0, None
        neg = pseudo_power(self.sigma, -0.5, rank_tol).matrix
        proj = support_projector(herm(neg @ q @ neg), rank_tol).matrix
        value = trace_product(proj, self.sigma)
        return value, _density(shorted_operator(self.sigma, q, rank_tol).matrix)

    def _embed(self, block: np.ndarray, which: int) -> np.ndarray:
        u = self.w[:, : self.k1] if which == 1 else self.w[:, self.k1 :]
        return herm(u @ block @ u.conj().T)

    def upper_bound(self, r: float) -> float:
        a = self.t1[0] / r if r > 0 else math.inf
        b = self.t2[0] / (1.0 - r) if r < 1 else math.inf
        return min(a, b)

    def __call__(self, r: float) -> UpsilonResult:
        r = float(r)
        if not 0.0 <= r <= 1.0:
            raise ValueError(f"r must lie in [0, 1]; got {r!r}")
        ub = self.upper_bound(r)
        if r == 1.0:
            return UpsilonResult(self.t1[0], Method.CLOSED_FORM, "endpoint", self.t1[1], None, ub)
        if r == 0.0:
            return UpsilonResult(self.t2[0], Method.CLOSED_FORM, "endpoint", None, self.t2[1], ub)
        if not (self.k1 and self.k2):
            return UpsilonResult(0.0, Method.CLOSED_FORM, "empty", None, None, ub)
        k1 = self.k1
        s11, s22 = self.s[:k1, :k1], self.s[k1:, k1:]
        if self.block:
            a, b = np.trace(s11).real, np.trace(s22).real
            value = min(a / r, b / (1.0 - r))
            return UpsilonResult(value, Method.CLOSED_FORM, "block", self._embed(s11 / a, 1), self._embed(s22 / b, 2), ub)
        if not self.numeric:
            d = np.array([1.0 / math.sqrt(r), 1.0 / math.sqrt(1.0 - r)])
            value = float(eig(d[:, None] * self.s * d[None, :]).eigenvalues[-1])
            one = np.ones((1, 1))
            return UpsilonResult(value, Method.CLOSED_FORM, "rank1", self._embed(one, 1), self._embed(one, 2), ub)
        return self._interior(r, ub)

    @property
    def numeric(self) -> bool:
        """True when interior values need the barrier solver."""
        return bool(self.k1 and self.k2 and not self.block and self.k1 * self.k2 > 1)

    def best_weighted(self, w1: float, w2: float):
        """Maximize (r w1 + (1-r) w2) Upsilon(r) over r in one SDP solve.

        Returns (value, r, psi1, psi2). The barrier point fixes r and psi2; psi1 and
        the scale then come from an exact ray search, so the value is attained.
        """
        best = [(w1 * self.t1[0], 1.0, self.t1[1], None), (w2 * self.t2[0], 0.0, None, self.t2[1])]
        if self.numeric:
            y1, y2 = _barrier(self.s, self.k1, weights=(w1, w2))
            a, b = np.trace(y1).real, np.trace(y2).real
            r = a / (a + b)
            if 0.0 < r < 1.0:
                psi2 = _density(y2)
                c, psi1 = self._best_given(1, psi2, r, 1.0 - r)
                best.append(((r * w1 + (1.0 - r) * w2) * c, r, self._embed(psi1, 1), self._embed(psi2, 2)))
        return max(best, key=lambda t: t[0])

    # numeric branch -----------------------------------------------------

    def _blocks(self, which: int):
        k1 = self.k1
        sl_a = slice(0, k1) if which == 1 else slice(k1, None)
        sl_b = slice(k1, None) if which == 1 else slice(0, k1)
        s = self.s
        return s[sl_a, sl_a], s[sl_a, sl_b], s[sl_b, sl_b]

    def _best_given(self, which: int, psi_fixed: np.ndarray, w_free: float, w_fixed: float):
        """Maximize c over the free density with the other density held fixed."""
        saa, sab, sbb = self._blocks(which)
        # S - c w_fixed Psi >= 0  iff  c w_fixed psi <= Schur complement of the free block
        tb = herm(sbb - sab.conj().T @ np.linalg.solve(saa, sab))
        neg = pseudo_power(tb, -0.5).matrix
        lam = eig(herm(neg @ psi_fixed @ neg)).eigenvalues[0]
        c_hi = (1.0 / (w_fixed * lam)) * (1.0 - 1e-12)

        def shorted(c):
            m = herm(sbb - c * w_fixed * psi_fixed)
            try:
                x = np.linalg.solve(m, sab.conj().T)
            except np.linalg.LinAlgError:
                x = np.linalg.lstsq(m, sab.conj().T, rcond=None)[0]
            return herm(saa - sab @ x)

        def g(c):
            return np.trace(shorted(c)).real - c * w_free

        if g(c_hi) >= 0.0:
            c = c_hi
        else:
            c = brentq(g, 0.0, c_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            step = 1e-15 * max(1.0, c)
            while g(c) < 0.0:
                c -= step
                step *= 2.0
        return c, _density(shorted(c))

    def _interior(self, r: float, ub: float) -> UpsilonResult:
        """Log-det barrier solve of the block problem, then an exact ray search
        along the resulting psi2 so the reported value is feasible."""
        _, x2 = _barrier(self.s, self.k1, r)
        psi2 = _density(x2)
        c, psi1 = self._best_given(1, psi2, r, 1.0 - r)
        return UpsilonResult(float(c), Method.NUMERIC, "barrier", self._embed(psi1, 1), self._embed(psi2, 2), ub)


def _herm_basis(k: int) -> np.ndarray:
    """Columns are column-major vec(E_a) for a real basis of k x k Hermitian matrices."""
    cols = []
    for i in range(k):
        for j in range(i, k):
            e = np.zeros((k, k), dtype=np.complex128)
            e[i, j] = e[j, i] = 1.0
            cols.append(e.ravel(order="F"))
            if i != j:
                e = np.zeros((k, k), dtype=np.complex128)
                e[i, j], e[j, i] = 1j, -1j
                cols.append(e.ravel(order="F"))
    return np.array(cols).T


def _barrier(s: np.ndarray, k1: int, r: float | None = None, weights=(1.0, 1.0)):
    """Log-det barrier solve of one of two block SDPs.

    With ``r``:  max Tr X1  s.t.  Tr X1 = Tr X2,  s - (r X1 (+) (1-r) X2) >= 0.
    Without:     max w1 Tr X1 + w2 Tr X2  s.t.  s - (X1 (+) X2) >= 0.
    X1, X2 >= 0 in both.
    """
    k = s.shape[0]
    k2 = k - k1
    b1, b2 = _herm_basis(k1), _herm_basis(k2)
    n1, n2 = b1.shape[1], b2.shape[1]
    f1, f2 = (r, 1.0 - r) if r is not None else (1.0, 1.0)
    # d(vec Z)/dx for Z = s - blockdiag(r X1, (1-r) X2)
    lift = np.zeros((k * k, n1 + n2), dtype=np.complex128)
    for a in range(n1):
        e = np.zeros((k, k), dtype=np.complex128)
        e[:k1, :k1] = b1[:, a].reshape(k1, k1, order="F")
        lift[:, a] = -f1 * e.ravel(order="F")
    for a in range(n2):
        e = np.zeros((k, k), dtype=np.complex128)
        e[k1:, k1:] = b2[:, a].reshape(k2, k2, order="F")
        lift[:, n1 + a] = -f2 * e.ravel(order="F")
    tr1 = np.real(b1.T @ np.eye(k1).ravel(order="F"))
    tr2 = np.real(b2.T @ np.eye(k2).ravel(order="F"))
    if r is not None:
        obj = np.concatenate([tr1, np.zeros(n2)])
        null = null_space(np.concatenate([tr1, -tr2])[None, :])
    else:
        obj = np.concatenate([weights[0] * tr1, weights[1] * tr2])
        null = np.eye(n1 + n2)

    def mats(x):
        x1 = (b1 @ x[:n1]).reshape(k1, k1, order="F")
        x2 = (b2 @ x[n1:]).reshape(k2, k2, order="F")
        z = s.astype(np.complex128).copy()
        z[:k1, :k1] -= f1 * x1
        z[k1:, k1:] -= f2 * x2
        return x1, x2, z

    def logdet(m):
        try:
            l = np.linalg.cholesky(m)
        except np.linalg.LinAlgError:
            return None
        d = np.abs(np.diag(l))
        if not np.all(np.isfinite(d)) or d.min() <= 0.0:
            return None
        return 2.0 * np.log(d).sum()

    def phi(x, t):
        parts = [logdet(m) for m in mats(x)]
        if any(p is None for p in parts):
            return math.inf
        return -t * obj @ x - sum(parts)

    def hess_block(minv, basis):
        return np.real(basis.conj().T @ np.kron(minv.T, minv) @ basis)

    def newton(x, t):
        x1, x2, z = mats(x)
        i1, i2, iz = np.linalg.inv(x1), np.linalg.inv(x2), np.linalg.inv(z)
        g = -t * obj
        g[:n1] -= np.real(b1.conj().T @ i1.ravel(order="F"))
        g[n1:] -= np.real(b2.conj().T @ i2.ravel(order="F"))
        g -= np.real(lift.conj().T @ iz.ravel(order="F"))
        h = hess_block(iz, lift)
        h[:n1, :n1] += hess_block(i1, b1)
        h[n1:, n1:] += hess_block(i2, b2)
        # Newton step restricted to the null space of the trace equality
        hr = null.T @ h @ null
        gr = null.T @ g
        dx = null @ np.linalg.solve(hr, -gr)
        return dx, float(-g @ dx)

    # strictly feasible start: equal-trace multiples of the identity
    lam = float(np.linalg.eigvalsh(s)[0])
    alpha = 0.5 * lam
    x = np.concatenate([np.linalg.lstsq(b1.real, (alpha / k1) * np.eye(k1).ravel(order="F").real, rcond=None)[0],
                        np.linalg.lstsq(b2.real, (alpha / k2) * np.eye(k2).ravel(order="F").real, rcond=None)[0]])
    m = 2 * k
    t = m / max(alpha, 1e-300)
    scale = max(1.0, float(np.trace(s).real) * max(1.0, *np.abs(obj)))
    while m / t > BARRIER_GAP * scale:
        for _ in range(NEWTON_STEPS):
            try:
                dx, dec = newton(x, t)
            except np.linalg.LinAlgError:
                # numerically on the boundary; the current iterate is as good as it gets
                return _barrier_result(mats(x))
            if dec / 2.0 <= 1e-12:
                break
            # damped Newton step keeps the iterate inside the Dikin ellipsoid
            f0, step = phi(x, t), 1.0 / (1.0 + math.sqrt(dec)) if dec > 0.0625 else 1.0
            while phi(x + step * dx, t) > f0 - 0.25 * step * dec:
                step *= 0.5
                if step < 1e-14:
                    break
            if step < 1e-14:
                break
            x = x + step * dx
        t *= 8.0
    return _barrier_result(mats(x))


def _barrier_result(parts):
    x1, x2, _ = parts
    return herm(x1), herm(x2)


def upsilon(pi1, pi2, sigma, r: float, *, rank_tol: float = RANK_TOL) -> UpsilonResult:
    """One-shot evaluation of the two-subspace maximum at ``r``."""
    return Upsilon(pi1, pi2, sigma, rank_tol=rank_tol)(r)


# acceptance --------------------------------------------------------------


def acceptance_from_params(instance: ProblemInstance, params) -> tuple[float, float]:
    """Acceptance pair predicted by the parameters alone.

    Needs an explicit ``c``; the densities do not enter.
    """
    if params.c is None:
        raise CaseMismatch("acceptance from parameters needs an explicit c")
    c = float(params.c)
    case = classify(instance)
    tol = instance.tolerances.rank_tol
    if isinstance(params, (Unequal1, Unequal2, Unequal3)):
        if case.equal_support:
            raise CaseMismatch("unequal-support parameters on an equal-support instance")
        if isinstance(params, Unequal1):
            return c, 0.0
        if isinstance(params, Unequal2):
            return 0.0, c
        return c * params.c_r, c * (1.0 - params.c_r)
    wanted = {EqualC1: CaseLabel.C1, EqualC2: CaseLabel.C2, EqualC3: CaseLabel.C3, EqualDegenerate: CaseLabel.C3}
    if wanted.get(type(params)) is not case:
        raise CaseMismatch(f"{type(params).__name__} does not match case {case.value}")
    if isinstance(params, EqualDegenerate):
        return c, c
    hi = r_max(instance.rho, instance.sigma, tol)
    if isinstance(params, EqualC1):
        return c * hi, c
    lo = r_min(instance.rho, instance.sigma, tol)
    if isinstance(params, EqualC2):
        return c * lo, c
    return c * (params.c_r * hi + (1.0 - params.c_r) * lo), c


def _report(instance, lr, ls, c_r, method) -> AcceptanceReport:
    m = validate_measurement(herm(lr), herm(ls), instance.tolerances)
    acc = m.accept
    return AcceptanceReport(
        trace_product(acc, instance.rho.matrix),
        trace_product(acc, instance.sigma.matrix),
        m,
        c_r,
        method,
    )


def _refine(objective, grid: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Golden-section polish around the best grid point."""
    i = int(np.argmax(values))
    best_x, best_v = float(grid[i]), float(values[i])
    if 0 < i < len(grid) - 1:
        try:
            res = minimize_scalar(
                lambda x: -objective(x),
                bracket=(grid[i - 1], grid[i], grid[i + 1]),
                method="golden",
                options={"xtol": 1e-10},
            )
        except ValueError:
            return best_x, best_v
        if grid[i - 1] <= res.x <= grid[i + 1] and -res.fun > best_v:
            best_x, best_v = float(res.x), float(-res.fun)
    return best_x, best_v


def max_acceptance_equal(instance: ProblemInstance) -> MaxAcceptance:
    """Largest acceptance of each state over all error-minimizing measurements."""
    tols = instance.tolerances
    case = classify(instance)
    if not case.equal_support:
        raise UnequalSupports(f"instance has unequal supports ({case.value})")
    sub = extremal_subspaces(instance.rho, instance.sigma, tols)
    sigma = instance.sigma.matrix
    zero = np.zeros_like(sigma)
    hi = r_max(instance.rho, instance.sigma, tols.rank_tol)
    lo = r_min(instance.rho, instance.sigma, tols.rank_tol)

    if case is CaseLabel.C1 or (case is CaseLabel.C3 and sub.degenerate):
        p = sub.p_max.matrix
        rep = _report(instance, p, zero, 1.0 if case is CaseLabel.C3 else None, Method.CLOSED_FORM)
        t = trace_product(p, sigma)
        return MaxAcceptance(case, hi * t, t, rep, rep)
    if case is CaseLabel.C2:
        p = sub.p_min.matrix
        rep = _report(instance, zero, p, None, Method.CLOSED_FORM)
        t = trace_product(p, sigma)
        return MaxAcceptance(case, lo * t, t, rep, rep)

    half = pseudo_power(sigma, 0.5, tols.rank_tol).matrix
    neg = pseudo_power(sigma, -0.5, tols.rank_tol).matrix
    both = support_projector(sub.p_max.matrix + sub.p_min.matrix, tols.rank_tol).matrix
    reduced = herm(half @ both @ half)
    ups = Upsilon(sub.t_max, sub.t_min, reduced, rank_tol=tols.rank_tol)

    def weight(x):
        return x * hi + (1.0 - x) * lo

    def achieving(c_r, res=None):
        res = res or ups(c_r)
        c = res.value
        lr = c * c_r * (neg @ res.psi1 @ neg) if c_r > 0 else zero
        ls = c * (1.0 - c_r) * (neg @ res.psi2 @ neg) if c_r < 1 else zero
        return _report(instance, lr, ls, c_r, res.method)

    if ups.numeric:
        reps = []
        for w1, w2 in ((hi, lo), (1.0, 1.0)):
            value, c_r, psi1, psi2 = ups.best_weighted(w1, w2)
            c = value / (c_r * w1 + (1.0 - c_r) * w2)
            method = Method.NUMERIC if 0.0 < c_r < 1.0 else Method.CLOSED_FORM
            reps.append((value, achieving(c_r, UpsilonResult(c, method, "direct", psi1, psi2, ups.upper_bound(c_r)))))
        (v_rho, rep_rho), (v_sig, rep_sig) = reps
        return MaxAcceptance(case, v_rho, v_sig, rep_rho, rep_sig)

    grid = np.linspace(0.0, 1.0, GRID_POINTS)
    ups_vals = np.array([ups(x).value for x in grid])
    c_rho, v_rho = _refine(lambda x: weight(x) * ups(x).value, grid, weight(grid) * ups_vals)
    c_sig, v_sig = _refine(lambda x: ups(x).value, grid, ups_vals)

    return MaxAcceptance(case, v_rho, v_sig, achieving(c_rho), achieving(c_sig))


def max_acceptance_unequal(instance: ProblemInstance) -> MaxAcceptance:
    """Closed-form maxima when zero error is reachable."""
    tol = instance.tolerances.rank_tol
    rho, sigma = instance.rho.matrix, instance.sigma.matrix
    rel = support_relation(rho, sigma, tol)
    if rel is SupportRelation.EQUAL:
        raise EqualSupports("use max_acceptance_equal for equal supports")
    ps = support_projector(sigma, tol).matrix
    pr = support_projector(rho, tol).matrix
    pu = support_projector(rho + sigma, tol).matrix
    zero = np.zeros_like(rho)
    a_rho = 0.0 if rel is SupportRelation.RHO_INSIDE_SIGMA else 1.0 - trace_product(ps, rho)
    a_sig = 0.0 if rel is SupportRelation.SIGMA_INSIDE_RHO else 1.0 - trace_product(pr, sigma)
    rep_rho = _report(instance, herm(pu - ps), zero, None, Method.CLOSED_FORM) if a_rho > 0 else None
    rep_sig = _report(instance, zero, herm(pu - pr), None, Method.CLOSED_FORM) if a_sig > 0 else None
    rep_rho = rep_rho or rep_sig
    rep_sig = rep_sig or rep_rho
    return MaxAcceptance(CaseLabel(rel.value), a_rho, a_sig, rep_rho, rep_sig)


def max_acceptance(instance: ProblemInstance) -> MaxAcceptance:
    if classify(instance).equal_support:
        return max_acceptance_equal(instance)
    return max_acceptance_unequal(instance)
