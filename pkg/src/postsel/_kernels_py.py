"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""
import math

import numpy as np

BACKEND = "python"

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def _fmix_int(z):
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def mix64(seed, index):
    """64-bit child seed for ``(seed, index)``."""
    s = int(seed) & _MASK
    i = int(index) & _MASK
    return _fmix_int((_fmix_int((s + _GAMMA) & _MASK) + (i + 1) * _GAMMA) & _MASK)


def _fmix_arr(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def _mix_arr(seed, index):
    base = np.uint64(_fmix_int((int(seed) & _MASK) + _GAMMA & _MASK))
    return _fmix_arr(base + (index + np.uint64(1)) * np.uint64(_GAMMA))


def jacobi_eigh(a, tol, max_sweeps):
    """Same contract as the compiled ``jacobi_eigh``."""
    a = np.array(a, dtype=np.complex128, copy=True)
    n = a.shape[0]
    a[np.diag_indices(n)] = a.diagonal().real
    v = np.eye(n, dtype=np.complex128)
    off_mask = ~np.eye(n, dtype=bool)
    done = -1
    for sweep in range(max_sweeps + 1):
        if math.sqrt(float(np.sum(np.abs(a[off_mask]) ** 2))) <= tol:
            done = sweep
            break
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                e = apq.conjugate() / mag
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                colp = a[:, p].copy()
                colq = a[:, q] * e
                newp = c * colp - s * colq
                newq = s * colp + c * colq
                a[:, p] = newp
                a[:, q] = newq
                a[p, :] = newp.conj()
                a[q, :] = newq.conj()
                a[p, p] = app - t * mag
                a[q, q] = aqq + t * mag
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q] * e
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return a.diagonal().real.copy(), v, done


def mc_counts(seed, n, p_rho, probs_rho, probs_sigma, chunk=1 << 20):
    """Same contract as the compiled ``mc_counts``."""
    counts = np.zeros((2, 3), dtype=np.int64)
    scale = 1.0 / 9007199254740992.0
    bounds = np.array(
        [
            [probs_rho[0], probs_rho[0] + probs_rho[1]],
            [probs_sigma[0], probs_sigma[0] + probs_sigma[1]],
        ]
    )
    with np.errstate(over="ignore"):
        for start in range(0, n, chunk):
            k = np.arange(start, min(n, start + chunk), dtype=np.uint64)
            us = (_mix_arr(seed, np.uint64(2) * k) >> np.uint64(11)).astype(np.float64) * scale
            uo = (_mix_arr(seed, np.uint64(2) * k + np.uint64(1)) >> np.uint64(11)).astype(np.float64) * scale
            row = np.where(us < p_rho, 0, 1)
            b = bounds[row]
            col = np.where(uo < b[:, 0], 0, np.where(uo < b[:, 1], 1, 2))
            counts += np.bincount(row * 3 + col, minlength=6).reshape(2, 3)
    return counts
