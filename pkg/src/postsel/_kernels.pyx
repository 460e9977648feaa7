# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: cyclic complex Jacobi and Monte Carlo outcome counting.

Both functions mirror ``_kernels_py`` operation for operation so the two
backends agree to rounding.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, hypot
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

BACKEND = "compiled"

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t _fmix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _mix(uint64_t seed, uint64_t index) nogil:
    return _fmix(_fmix(seed + GAMMA) + (index + 1) * GAMMA)


def mix64(seed, index):
    """64-bit child seed for ``(seed, index)``."""
    cdef uint64_t s = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t i = <uint64_t>(int(index) & 0xFFFFFFFFFFFFFFFF)
    return int(_mix(s, i))


cdef inline double _off_norm(double[:, ::1] ar, double[:, ::1] ai, Py_ssize_t n) nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t p, q
    for p in range(n):
        for q in range(n):
            if p != q:
                acc += ar[p, q] * ar[p, q] + ai[p, q] * ai[p, q]
    return sqrt(acc)


def jacobi_eigh(a, double tol, int max_sweeps):
    """Diagonalize a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(w, v, sweeps)`` with unsorted eigenvalues ``w`` and eigenvectors
    in the columns of ``v``. ``sweeps`` is -1 when the off-diagonal norm is
    still above ``tol`` after ``max_sweeps`` sweeps.
    """
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] src = np.ascontiguousarray(a, dtype=np.complex128)
    cdef Py_ssize_t n = src.shape[0]
    cdef double[:, ::1] ar = np.ascontiguousarray(src.real)
    cdef double[:, ::1] ai = np.ascontiguousarray(src.imag)
    cdef double[:, ::1] vr = np.eye(n)
    cdef double[:, ::1] vi = np.zeros((n, n))
    cdef Py_ssize_t p, q, r
    cdef int sweep, done = -1
    cdef double x, y, mag, er, ei, tau, t, c, s
    cdef double app, aqq, xr, xi, yr, yi, zr, zi
    with nogil:
        for p in range(n):
            ai[p, p] = 0.0
        for sweep in range(max_sweeps + 1):
            if _off_norm(ar, ai, n) <= tol:
                done = sweep
                break
            if sweep == max_sweeps:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    x = ar[p, q]
                    y = ai[p, q]
                    mag = hypot(x, y)
                    if mag == 0.0:
                        continue
                    # e^{-i phi}
                    er = x / mag
                    ei = -y / mag
                    app = ar[p, p]
                    aqq = ar[q, q]
                    tau = (aqq - app) / (2.0 * mag)
                    if tau >= 0.0:
                        t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                    else:
                        t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                    c = 1.0 / sqrt(1.0 + t * t)
                    s = t * c
                    for r in range(n):
                        if r == p or r == q:
                            continue
                        xr = ar[r, p]
                        xi = ai[r, p]
                        # y = a_rq * e^{-i phi}
                        yr = ar[r, q] * er - ai[r, q] * ei
                        yi = ar[r, q] * ei + ai[r, q] * er
                        zr = c * xr - s * yr
                        zi = c * xi - s * yi
                        ar[r, p] = zr
                        ai[r, p] = zi
                        ar[p, r] = zr
                        ai[p, r] = -zi
                        zr = s * xr + c * yr
                        zi = s * xi + c * yi
                        ar[r, q] = zr
                        ai[r, q] = zi
                        ar[q, r] = zr
                        ai[q, r] = -zi
                    ar[p, p] = app - t * mag
                    ar[q, q] = aqq + t * mag
                    ar[p, q] = 0.0
                    ai[p, q] = 0.0
                    ar[q, p] = 0.0
                    ai[q, p] = 0.0
                    for r in range(n):
                        xr = vr[r, p]
                        xi = vi[r, p]
                        yr = vr[r, q] * er - vi[r, q] * ei
                        yi = vr[r, q] * ei + vi[r, q] * er
                        vr[r, p] = c * xr - s * yr
                        vi[r, p] = c * xi - s * yi
                        vr[r, q] = s * xr + c * yr
                        vi[r, q] = s * xi + c * yi
    w = np.array([ar[p, p] for p in range(n)], dtype=np.float64)
    v = np.asarray(vr) + 1j * np.asarray(vi)
    return w, v, done


def mc_counts(seed, Py_ssize_t n, double p_rho, probs_rho, probs_sigma):
    """2x3 outcome counts for ``n`` counter-seeded trials.

    Trial ``k`` draws the hidden state from ``mix64(seed, 2k)`` and the outcome
    from ``mix64(seed, 2k+1)`` by inverse CDF.
    """
    cdef uint64_t s = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef double r0 = probs_rho[0], r1 = probs_rho[0] + probs_rho[1]
    cdef double s0 = probs_sigma[0], s1 = probs_sigma[0] + probs_sigma[1]
    cdef int64_t[:, ::1] counts = np.zeros((2, 3), dtype=np.int64)
    cdef Py_ssize_t k
    cdef double us, uo, b0, b1
    cdef int row, col
    cdef double scale = 1.0 / 9007199254740992.0
    with nogil:
        for k in range(n):
            us = <double>(_mix(s, <uint64_t>(2 * k)) >> 11) * scale
            uo = <double>(_mix(s, <uint64_t>(2 * k + 1)) >> 11) * scale
            if us < p_rho:
                row = 0
                b0 = r0
                b1 = r1
            else:
                row = 1
                b0 = s0
                b1 = s1
            if uo < b0:
                col = 0
            elif uo < b1:
                col = 1
            else:
                col = 2
            counts[row, col] += 1
    return np.asarray(counts)
