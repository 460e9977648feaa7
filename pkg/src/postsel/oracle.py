"""Brute-force cross-checks that do not rely on the closed forms.

Every routine is seeded through :func:`postsel.states.derive_seed`, so a
given configuration always yields the same report.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .construction import (
    EqualC1,
    EqualC2,
    EqualC3,
    EqualDegenerate,
    Unequal1,
    Unequal2,
    Unequal3,
    construct,
    extremal_subspaces,
)
from .errors import PostselError, UndefinedError
from .linalg import (
    Extremum,
    HermitianOperator,
    eig,
    extremal_projector,
    herm,
    membership_defect,
    norm_inf,
    pseudo_power,
    support_projector,
    trace_product,
)
from .metrics import CaseLabel, acceptance, classify, min_postselected_error, postselected_error
from .states import ProblemInstance, ThreeOutcomeMeasurement, derive_seed, random_density, validate_measurement

LEMMAS = ("MaxTraceBound", "MinTraceBound", "SingleMin", "GenProjEquivalence", "ProjectorSubset")
LEMMA_TOL = {
    "MaxTraceBound": 1e-9,
    "MinTraceBound": 1e-9,
    "SingleMin": 1e-8,
    "GenProjEquivalence": 1e-8,
    "ProjectorSubset": 1e-8,
}


@dataclass(frozen=True)
class OracleConfig:
    trials: int = 2000
    seed: int = 0
    refine_steps: int = 64
    tol: float = 1e-8

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.refine_steps < 0:
            raise ValueError("refine_steps must be >= 0")


@dataclass(frozen=True)
class OracleReport:
    target: str
    trials: int
    worst_violation: float
    best_value: float
    seed: int
    passed: bool = True

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "trials": self.trials,
            "worst_violation": self.worst_violation,
            "best_value": self.best_value,
            "seed": self.seed,
            "passed": self.passed,
        }


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def _factor_psd(rng: np.random.Generator, dim: int, rank: int) -> np.ndarray:
    if rank == 0:
        return np.zeros((dim, dim), dtype=np.complex128)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    return herm(g @ g.conj().T)


def sample_measurement(dim: int, seed: int, s: float | None = None) -> ThreeOutcomeMeasurement:
    """Random valid measurement: PSD A, B rescaled so that A + B <= s I.

    Factor ranks are drawn too (B may vanish), which keeps low-rank effects
    in the sample rather than only generic full-rank ones.
    """
    rng = _rng(seed)
    a = _factor_psd(rng, dim, int(rng.integers(1, dim + 1)))
    b = _factor_psd(rng, dim, int(rng.integers(0, dim + 1)))
    top = eig(a + b).eigenvalues[0]
    scale = 1.0 - rng.random() if s is None else float(s)
    k = scale / top
    # valid by construction: both factors PSD and lambda_max(k (A + B)) = s <= 1
    return ThreeOutcomeMeasurement(HermitianOperator(k * a), HermitianOperator(k * b))


def _error_or_none(instance, m):
    try:
        return postselected_error(instance, m)
    except UndefinedError:
        return None


def _rotate(m: ThreeOutcomeMeasurement, seed: int, eta: float) -> ThreeOutcomeMeasurement:
    """Conjugate both effects by exp(i eta H) for a random unit-norm Hermitian H.

    Convex mixing cannot help here: the error of a mixture is a mediant of the
    two errors. A small rotation keeps validity and moves the effects locally.
    """
    rng = _rng(seed)
    g = rng.standard_normal(m.lambda_rho.matrix.shape) + 1j * rng.standard_normal(m.lambda_rho.matrix.shape)
    h = herm(g)
    h = h / norm_inf(h)
    u = expm(1j * eta * h)
    lr = herm(u @ m.lambda_rho.matrix @ u.conj().T)
    ls = herm(u @ m.lambda_sigma.matrix @ u.conj().T)
    return ThreeOutcomeMeasurement(HermitianOperator(lr), HermitianOperator(ls))


def _seed_measurements(instance: ProblemInstance) -> list[ThreeOutcomeMeasurement]:
    """Support-complement projectors; reach zero error when supports differ."""
    if classify(instance).equal_support:
        return []
    tol = instance.tolerances.rank_tol
    rho, sigma = instance.rho.matrix, instance.sigma.matrix
    pu = support_projector(rho + sigma, tol).matrix
    out = []
    zero = np.zeros_like(rho)
    for lr, ls in (
        (pu - support_projector(sigma, tol).matrix, zero),
        (zero, pu - support_projector(rho, tol).matrix),
    ):
        if norm_inf(herm(lr + ls)) > 0.5:
            out.append(validate_measurement(herm(lr), herm(ls)))
    return out


def oracle_min_error(instance: ProblemInstance, cfg: OracleConfig = OracleConfig()) -> OracleReport:
    """Random search, then ``refine_steps`` of local rotation search on the best point
    (the rotation angle halves after every failed step)."""
    best, best_m = math.inf, None
    for m in _seed_measurements(instance):
        e = _error_or_none(instance, m)
        if e is not None and e < best:
            best, best_m = e, m
    for i in range(cfg.trials):
        m = sample_measurement(instance.dim, derive_seed(cfg.seed, i))
        e = _error_or_none(instance, m)
        if e is not None and e < best:
            best, best_m = e, m
    eta = 0.5
    for step in range(cfg.refine_steps):
        cand = _rotate(best_m, derive_seed(cfg.seed, cfg.trials + step), eta)
        e = _error_or_none(instance, cand)
        if e is not None and e < best:
            best, best_m = e, cand
        else:
            eta /= 2
    theory = min_postselected_error(instance).e_s
    violation = max(0.0, theory - best)
    return OracleReport("min_error", cfg.trials, violation, best, cfg.seed, violation <= cfg.tol)


def _sample_density_in(space: np.ndarray, rng: np.random.Generator) -> np.ndarray | None:
    """Density in range(space): Gaussian with random rank, or a flat random sub-projector."""
    es = eig(space)
    basis = es.eigenvectors[:, es.eigenvalues > 0.5]
    k = basis.shape[1]
    if k == 0:
        return None
    rank = int(rng.integers(1, k + 1))
    g = rng.standard_normal((k, rank)) + 1j * rng.standard_normal((k, rank))
    if rng.random() < 0.5:
        q, _ = np.linalg.qr(g)
        inner = q @ q.conj().T
    else:
        inner = g @ g.conj().T
    m = herm(basis @ inner @ basis.conj().T)
    return m / np.trace(m).real


def _random_params(instance: ProblemInstance, case: CaseLabel, rng, c_r: float):
    tol = instance.tolerances
    eye = np.eye(instance.dim)
    if case.equal_support:
        sub = extremal_subspaces(instance.rho, instance.sigma, tol)
        outside = eye - sub.sigma_support.matrix
        a = _sample_density_in(outside + sub.p_max.matrix, rng)
        b = _sample_density_in(outside + sub.p_min.matrix, rng)
        if case is CaseLabel.C1:
            return EqualC1(a)
        if case is CaseLabel.C2:
            return EqualC2(b)
        if sub.degenerate:
            return EqualDegenerate(a, _sample_density_in(outside + sub.p_max.matrix, rng), c_r)
        return EqualC3(a, b, c_r)
    rho, sigma = instance.rho.matrix, instance.sigma.matrix
    a = _sample_density_in(eye - support_projector(sigma, tol.rank_tol).matrix, rng)
    b = _sample_density_in(eye - support_projector(rho, tol.rank_tol).matrix, rng)
    if case is CaseLabel.SIGMA_INSIDE_RHO:
        return Unequal1(a)
    if case is CaseLabel.RHO_INSIDE_SIGMA:
        return Unequal2(b)
    return (Unequal1(a), Unequal2(b), Unequal3(a, b, c_r))[int(rng.integers(0, 3))]


def oracle_max_acceptance(instance: ProblemInstance, cfg: OracleConfig = OracleConfig()) -> tuple[float, float]:
    """Best acceptances over sampled error-minimizing members (c at its bound)."""
    case = classify(instance)
    grid = np.linspace(0.0, 1.0, 21)
    best_r = best_s = 0.0
    for i in range(cfg.trials):
        rng = _rng(derive_seed(cfg.seed, i))
        params = _random_params(instance, case, rng, float(grid[i % grid.size]))
        try:
            m = construct(instance, params)
        except PostselError:
            continue
        a_r, a_s = acceptance(instance, m)
        best_r, best_s = max(best_r, a_r), max(best_s, a_s)
    return best_r, best_s


# lemma checkers ------------------------------------------------------------


def _random_psd(dim: int, seed: int, rank: int | None = None) -> np.ndarray:
    rng = _rng(seed)
    rank = int(rng.integers(1, dim + 1)) if rank is None else rank
    scale = 0.1 + 3.0 * rng.random()
    return scale * random_density(dim, rank, derive_seed(seed, 1)).matrix


def _degenerate_psd(dim: int, seed: int) -> np.ndarray:
    """PSD matrix with a repeated top and bottom eigenvalue."""
    rng = _rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, _ = np.linalg.qr(g)
    w = np.sort(rng.random(dim) * 2)[::-1]
    if dim >= 2:
        w[1] = w[0]
    if dim >= 4:
        w[-1] = w[-2]
    return herm((q * w) @ q.conj().T)


def _random_subprojector(space: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    es = eig(space)
    basis = es.eigenvectors[:, es.eigenvalues > 0.5]
    k = basis.shape[1]
    rank = int(rng.integers(1, k + 1))
    g = rng.standard_normal((k, rank)) + 1j * rng.standard_normal((k, rank))
    q, _ = np.linalg.qr(g)
    v = basis @ q
    return herm(v @ v.conj().T)


def _density_in(space, seed):
    return _sample_density_in(space, _rng(seed))


def _in(x, p, tol):
    return membership_defect(x, p) <= tol * max(1.0, norm_inf(x))


def _lemma_max_trace(dim, seed, trials):
    worst, best = 0.0, 0.0
    for t in range(trials):
        s = derive_seed(seed, t)
        nu = _degenerate_psd(dim, s) if t % 2 else _random_psd(dim, s)
        top = norm_inf(nu)
        zeta = random_density(dim, dim, derive_seed(s, 2)).matrix
        worst = max(worst, trace_product(zeta, nu) - top)
        pmax = extremal_projector(nu, Extremum.MAX).matrix
        z = _density_in(pmax, derive_seed(s, 3))
        gap = abs(trace_product(z, nu) - top)
        worst = max(worst, gap)
        best = max(best, top)
    return max(worst, 0.0), best


def _lemma_min_trace(dim, seed, trials):
    worst, best = 0.0, math.inf
    for t in range(trials):
        s = derive_seed(seed, t)
        nu = _degenerate_psd(dim, s) if t % 2 else _random_psd(dim, s)
        w = eig(nu).eigenvalues
        low = float(w[w > 1e-10 * max(1.0, w[0])].min())
        zeta = _density_in(support_projector(nu).matrix, derive_seed(s, 2))
        worst = max(worst, low - trace_product(zeta, nu))
        pmin = extremal_projector(nu, Extremum.MIN_NONZERO).matrix
        z = _density_in(pmin, derive_seed(s, 3))
        worst = max(worst, abs(trace_product(z, nu) - low))
        best = min(best, low)
    return max(worst, 0.0), best


def _lemma_single_min(dim, seed, trials, samples=20):
    """min over psi in S(I - Pi_sigma + P) of ||psi / Tr(psi sigma)|| equals 1 / Tr(P sigma)."""
    worst, best = 0.0, math.inf
    eye = np.eye(dim)
    for t in range(trials):
        s = derive_seed(seed, t)
        rng = _rng(s)
        sigma = random_density(dim, int(rng.integers(1, dim + 1)), derive_seed(s, 1)).matrix
        supp = support_projector(sigma).matrix
        pi = _random_subprojector(supp, rng)
        neg = pseudo_power(sigma, -0.5).matrix
        p = support_projector(herm(neg @ pi @ neg)).matrix
        target = 1.0 / trace_product(p, sigma)
        space = eye - supp + p
        achieved = norm_inf((p / np.trace(p).real) / trace_product(p / np.trace(p).real, sigma))
        worst = max(worst, abs(achieved - target))
        for k in range(samples):
            psi = _sample_density_in(space, rng)
            ov = trace_product(psi, sigma)
            if ov <= 1e-12:
                continue
            worst = max(worst, target - norm_inf(psi / ov))
        best = min(best, achieved)
    return max(worst, 0.0), best


def _lemma_gen_proj(dim, seed, trials):
    """For Pi inside supp(nu), with P the support of nu^{-1/2} Pi nu^{-1/2}, these co-hold:
    (1) nu^{1/2} z nu^{1/2} in P(Pi); (2) Pi_nu z Pi_nu in P(P); (3) z in P(I - Pi_nu + P).
    Returns the number of samples where they disagree.
    """
    mismatches = 0
    worst = 0.0
    eye = np.eye(dim)
    for t in range(trials):
        s = derive_seed(seed, t)
        rng = _rng(s)
        nu = _random_psd(dim, s)
        supp = support_projector(nu).matrix
        pi = _random_subprojector(supp, rng)
        neg = pseudo_power(nu, -0.5).matrix
        half = pseudo_power(nu, 0.5).matrix
        p = support_projector(herm(neg @ pi @ neg)).matrix
        space = eye - supp + p
        if t % 2 == 0:
            z = _sample_density_in(space, rng) * (0.1 + rng.random())
        else:
            z = _factor_psd(rng, dim, int(rng.integers(1, dim + 1)))
        d1 = membership_defect(herm(half @ z @ half), pi) / max(1.0, norm_inf(half @ z @ half))
        d2 = membership_defect(herm(supp @ z @ supp), p) / max(1.0, norm_inf(supp @ z @ supp))
        d3 = membership_defect(z, space) / max(1.0, norm_inf(z))
        flags = [d <= 1e-8 for d in (d1, d2, d3)]
        if len(set(flags)) != 1:
            mismatches += 1
        if flags[2]:
            worst = max(worst, d1, d2)
    return float(mismatches) + worst, float(mismatches)


def _lemma_projector_subset(dim, seed, trials):
    """For projector Pi and PSD z: Pi z Pi = 0, Pi z = 0 and z in P(I - Pi) co-hold;
    for PSD nu: Tr(z nu) = 0 iff z in P(I - Pi_nu)."""
    mismatches = 0
    worst = 0.0
    eye = np.eye(dim)
    for t in range(trials):
        s = derive_seed(seed, t)
        rng = _rng(s)
        nu = _random_psd(dim, s, rank=int(rng.integers(1, dim)) if dim > 1 else 1)
        pi = support_projector(nu).matrix
        comp = eye - pi
        if t % 2 == 0 and np.trace(comp).real > 0.5:
            z = _sample_density_in(comp, rng)
        else:
            z = _factor_psd(rng, dim, int(rng.integers(1, dim + 1)))
        a = norm_inf(herm(pi @ z @ pi))
        b = float(np.abs(pi @ z).max())
        c = membership_defect(z, comp) / max(1.0, norm_inf(z))
        d = abs(trace_product(z, nu))
        flags = [x <= 1e-8 for x in (a, b, c, d)]
        if len(set(flags)) != 1:
            mismatches += 1
        if flags[2]:
            worst = max(worst, a, b, d)
    return float(mismatches) + worst, float(mismatches)


_CHECKERS = {
    "MaxTraceBound": _lemma_max_trace,
    "MinTraceBound": _lemma_min_trace,
    "SingleMin": _lemma_single_min,
    "GenProjEquivalence": _lemma_gen_proj,
    "ProjectorSubset": _lemma_projector_subset,
}


def check_lemma(name: str, dim: int, seed: int, trials: int) -> OracleReport:
    """Run one randomized lemma check; failures are data in the report."""
    if name not in _CHECKERS:
        raise ValueError(f"unknown lemma {name!r}; expected one of {LEMMAS}")
    if not 1 <= dim <= 8:
        raise ValueError("lemma checks support 1 <= dim <= 8")
    worst, best = _CHECKERS[name](dim, seed, trials)
    return OracleReport(name, trials, worst, best, seed, worst <= LEMMA_TOL[name])
