# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sampling kernels: Philox4x64-10, Box-Muller and fused Welford moments.

Bit-for-bit the same random stream as ``_kernels_py``; see that module for
the block/shot layout.
"""

import numpy as np

from libc.math cimport cos, log, sin, sqrt
from libc.stdint cimport uint64_t

cdef extern from *:
    """
    static inline uint64_t phc_mulhilo(uint64_t a, uint64_t b, uint64_t *hi) {
        __uint128_t p = (__uint128_t)a * (__uint128_t)b;
        *hi = (uint64_t)(p >> 64);
        return (uint64_t)p;
    }
    """
    uint64_t phc_mulhilo(uint64_t a, uint64_t b, uint64_t *hi) nogil

cdef uint64_t PHILOX_M0 = 0xD2E7470EE14C6C93ULL
cdef uint64_t PHILOX_M1 = 0xCA5A826395121157ULL
cdef uint64_t PHILOX_W0 = 0x9E3779B97F4A7C15ULL
cdef uint64_t PHILOX_W1 = 0xBB67AE8584CAA73BULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0
cdef double TWO_PI = 6.283185307179586


cdef inline void philox_block(uint64_t k0, uint64_t k1, uint64_t c0, uint64_t c1,
                              uint64_t *out) noexcept nogil:
    cdef uint64_t x0 = c0, x1 = c1, x2 = 0, x3 = 0
    cdef uint64_t lo0, hi0, lo1, hi1
    cdef int r
    for r in range(10):
        if r > 0:
            k0 += PHILOX_W0
            k1 += PHILOX_W1
        lo0 = phc_mulhilo(PHILOX_M0, x0, &hi0)
        lo1 = phc_mulhilo(PHILOX_M1, x2, &hi1)
        x0 = hi1 ^ x1 ^ k0
        x1 = lo1
        x2 = hi0 ^ x3 ^ k1
        x3 = lo0
    out[0] = x0
    out[1] = x1
    out[2] = x2
    out[3] = x3


cdef inline void block_normals(uint64_t k0, uint64_t k1, uint64_t j, double *z) noexcept nogil:
    cdef uint64_t w[4]
    cdef double u1, u2, rad, theta
    cdef int h
    # counters below 2**64 only; word 1 carries nothing
    philox_block(k0, k1, j, 0, w)
    for h in range(2):
        u1 = <double>((w[2 * h] >> 11) + 1) * INV_2_53
        u2 = <double>(w[2 * h + 1] >> 11) * INV_2_53
        rad = sqrt(-2.0 * log(u1))
        theta = TWO_PI * u2
        z[2 * h] = rad * cos(theta)
        z[2 * h + 1] = rad * sin(theta)


def philox_blocks(uint64_t key0, uint64_t key1, uint64_t start, Py_ssize_t n):
    out = np.empty((n, 4), dtype=np.uint64)
    cdef uint64_t[:, ::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            philox_block(key0, key1, start + <uint64_t>i, 0, &o[i, 0])
    return out


def standard_normals(uint64_t key0, uint64_t key1, uint64_t start, Py_ssize_t n, Py_ssize_t m):
    cdef Py_ssize_t bps = (m + 3) // 4
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double z[4]
    cdef Py_ssize_t s, b, q, col
    with nogil:
        for s in range(n):
            col = 0
            for b in range(bps):
                block_normals(key0, key1, (start + <uint64_t>s) * bps + b, z)
                for q in range(4):
                    if col < m:
                        o[s, col] = z[q]
                        col += 1
    return out


def affine_moments(uint64_t key0, uint64_t key1, uint64_t start, Py_ssize_t n,
                   offset, B):
    """Welford mean and scatter matrix of ``offset + B z`` without materializing samples."""
    cdef const double[::1] off = np.ascontiguousarray(offset, dtype=np.float64)
    cdef const double[:, ::1] Bm = np.ascontiguousarray(B, dtype=np.float64)
    cdef Py_ssize_t k = Bm.shape[0], m = Bm.shape[1]
    cdef Py_ssize_t bps = (m + 3) // 4
    if off.shape[0] != k:
        raise ValueError("offset length must match the rows of B")
    mean_arr = np.zeros(k, dtype=np.float64)
    m2_arr = np.zeros((k, k), dtype=np.float64)
    cdef double[::1] mu = mean_arr
    cdef double[:, ::1] m2 = m2_arr
    zbuf_arr = np.empty(4 * bps, dtype=np.float64)
    ybuf_arr = np.empty(k, dtype=np.float64)
    dbuf_arr = np.empty(k, dtype=np.float64)
    cdef double[::1] zb = zbuf_arr
    cdef double[::1] y = ybuf_arr
    cdef double[::1] d = dbuf_arr
    cdef Py_ssize_t s, b, i, j
    cdef double acc, inv
    with nogil:
        for s in range(n):
            for b in range(bps):
                block_normals(key0, key1, (start + <uint64_t>s) * bps + b, &zb[4 * b])
            for i in range(k):
                acc = off[i]
                for j in range(m):
                    acc = acc + Bm[i, j] * zb[j]
                y[i] = acc
            inv = 1.0 / <double>(s + 1)
            for i in range(k):
                d[i] = y[i] - mu[i]
                mu[i] = mu[i] + d[i] * inv
            for i in range(k):
                for j in range(k):
                    m2[i, j] = m2[i, j] + d[i] * (y[j] - mu[j])
    return mean_arr, m2_arr
