"""Seeded random problem instances for every support relation."""
import numpy as np

from postsel import critical_prior, make_instance


def _unitary(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _density_on(rng, basis):
    k = basis.shape[1]
    g = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    inner = g @ g.conj().T
    m = basis @ inner @ basis.conj().T
    m = (m + m.conj().T) / 2
    return m / np.trace(m).real


def equal_support(seed, dim=None, p=None):
    """Equal supports, possibly rank-deficient. ``p='star'`` selects the critical prior."""
    rng = np.random.default_rng(seed)
    n = dim or int(rng.integers(2, 5))
    k = int(rng.integers(max(2, n - 1), n + 1)) if n > 2 else 2
    q = _unitary(rng, n)[:, :k]
    rho, sigma = _density_on(rng, q), _density_on(rng, q)
    if p == "star":
        p = critical_prior(rho, sigma)[0]
    return make_instance(rho, sigma, 0.5 if p is None else p)


def unequal_support(seed, relation, dim=None, p=0.5):
    """relation in {'SigmaInsideRho', 'RhoInsideSigma', 'Incomparable'}."""
    rng = np.random.default_rng(seed)
    n = dim or int(rng.integers(2, 5))
    q = _unitary(rng, n)
    if relation == "Incomparable":
        # first a columns vs last b columns, a, b < n: never nested
        a, b = int(rng.integers(1, n)), int(rng.integers(1, n))
        rho, sigma = _density_on(rng, q[:, :a]), _density_on(rng, q[:, n - b:])
    else:
        big = int(rng.integers(2, n + 1))
        small = int(rng.integers(1, big))
        outer, inner = _density_on(rng, q[:, :big]), _density_on(rng, q[:, :small])
        if relation == "SigmaInsideRho":
            rho, sigma = outer, inner
        else:
            rho, sigma = inner, outer
    return make_instance(rho, sigma, p)


RELATIONS = ("SigmaInsideRho", "RhoInsideSigma", "Incomparable")


def degenerate_extremes(seed, dim=4, top=2, bottom=2):
    """Equal full supports whose relative operator has a ``top``-fold largest and
    ``bottom``-fold smallest eigenvalue, at the critical prior (case C3)."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    sigma = g @ g.conj().T
    sigma = (sigma + sigma.conj().T) / 2
    sigma /= np.trace(sigma).real
    mid = dim - top - bottom
    vals = np.concatenate([np.full(top, 3.0), rng.uniform(1.2, 2.8, mid), np.full(bottom, 1.0)])
    u = _unitary(rng, dim)
    x = u @ np.diag(vals) @ u.conj().T
    w, v = np.linalg.eigh(sigma)
    half = v @ np.diag(np.sqrt(w)) @ v.conj().T
    rho = half @ x @ half
    rho = (rho + rho.conj().T) / 2
    rho /= np.trace(rho).real
    return make_instance(rho, sigma, critical_prior(rho, sigma)[0])
