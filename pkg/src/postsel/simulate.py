"""Monte Carlo estimates of error and acceptance from Born-rule sampling."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import binomtest

from . import _backend
from .linalg import as_matrix, trace_product
from .states import DensityOperator, ProblemInstance, ThreeOutcomeMeasurement

NEG_ALLOWANCE = 1e-9


@dataclass(frozen=True, eq=False)
class SimReport:
    """Rows of ``counts`` are the hidden state (rho, sigma); columns the outcome
    (accept rho, accept sigma, reject). ``ci95`` holds Wilson-score half-widths
    and ``intervals`` the matching (low, high) bounds."""

    n: int
    seed: int
    counts: np.ndarray
    e_hat: float | None
    a_rho_hat: float | None
    a_sigma_hat: float | None
    ci95: dict
    intervals: dict
    no_accepts: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "counts": self.counts.tolist(),
            "e_hat": self.e_hat,
            "a_rho_hat": self.a_rho_hat,
            "a_sigma_hat": self.a_sigma_hat,
            "ci95": self.ci95,
            "intervals": self.intervals,
            "no_accepts": self.no_accepts,
        }


def outcome_distribution(state, m: ThreeOutcomeMeasurement) -> tuple[float, float, float]:
    """Born probabilities of (accept rho, accept sigma, reject)."""
    s = state.matrix if isinstance(state, DensityOperator) else as_matrix(state)
    probs = []
    for p in (trace_product(m.lambda_rho, s), trace_product(m.lambda_sigma, s)):
        if p < -NEG_ALLOWANCE:
            raise ValueError(f"negative outcome probability {p:.3e}")
        probs.append(min(max(p, 0.0), 1.0))
    rest = 1.0 - probs[0] - probs[1]
    if rest < -NEG_ALLOWANCE:
        raise ValueError(f"accept probabilities sum to {1.0 - rest!r}")
    probs.append(min(max(rest, 0.0), 1.0))
    return tuple(probs)


def _wilson(k: int, n: int) -> tuple[float | None, tuple[float, float] | None]:
    if n == 0:
        return None, None
    ci = binomtest(k, n).proportion_ci(confidence_level=0.95, method="wilson")
    return (ci.high - ci.low) / 2, (float(ci.low), float(ci.high))


def simulate(instance: ProblemInstance, m: ThreeOutcomeMeasurement, n: int, seed: int) -> SimReport:
    """Draw ``n`` hidden states from the prior and one outcome each."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pr = outcome_distribution(instance.rho, m)
    ps = outcome_distribution(instance.sigma, m)
    counts = np.asarray(_backend.mc_counts(seed, n, instance.p_rho, pr, ps), dtype=np.int64)
    n_rho, n_sigma = int(counts[0].sum()), int(counts[1].sum())
    acc_rho = int(counts[0, 0] + counts[0, 1])
    acc_sigma = int(counts[1, 0] + counts[1, 1])
    accepts = acc_rho + acc_sigma
    wrong = int(counts[1, 0] + counts[0, 1])
    ci95, intervals = {}, {}
    for key, k, tot in (
        ("e_hat", wrong, accepts),
        ("a_rho_hat", acc_rho, n_rho),
        ("a_sigma_hat", acc_sigma, n_sigma),
    ):
        ci95[key], intervals[key] = _wilson(k, tot)
    return SimReport(
        n=n,
        seed=seed,
        counts=counts,
        e_hat=wrong / accepts if accepts else None,
        a_rho_hat=acc_rho / n_rho if n_rho else None,
        a_sigma_hat=acc_sigma / n_sigma if n_sigma else None,
        ci95=ci95,
        intervals=intervals,
        no_accepts=accepts == 0,
    )
