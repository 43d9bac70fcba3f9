# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled counter-based sampling kernels (same bits as ``_kernels_py``)."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t
from scipy.special.cython_special cimport ndtri

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t STREAM_MUL = 0xD1B54A32D192ED03ULL
cdef double INV53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix(uint64_t z) noexcept nogil:
    z = z ^ (z >> 30)
    z = z * 0xBF58476D1CE4E5B9ULL
    z = z ^ (z >> 27)
    z = z * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t zc, uint64_t stream) noexcept nogil:
    cdef uint64_t z = _mix(zc + stream * STREAM_MUL)
    return (<double>(z >> 11) + 0.5) * INV53


def mix64(value):
    return int(_mix(<uint64_t>(value & 0xFFFFFFFFFFFFFFFF)))


cdef _fill(uint64_t key, coords, streams, int mode):
    cdef int64_t[::1] c = np.ascontiguousarray(coords, dtype=np.int64)
    cdef int64_t[::1] s = np.ascontiguousarray(streams, dtype=np.int64)
    cdef Py_ssize_t nc = c.shape[0], ns = s.shape[0], i, j
    out = np.empty((ns, nc), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef uint64_t zc
    cdef double u
    with nogil:
        for j in range(nc):
            zc = _mix(key + (<uint64_t>c[j]) * GOLDEN)
            for i in range(ns):
                u = _uniform(zc, <uint64_t>s[i])
                if mode == 0:
                    o[i, j] = u
                elif mode == 1:
                    o[i, j] = ndtri(u)
                else:
                    o[i, j] = -1.0 if u < 0.5 else 1.0
    return out


def counter_uniforms(key, coords, streams):
    return _fill(<uint64_t>(key & 0xFFFFFFFFFFFFFFFF), coords, streams, 0)


def standard_normals(key, coords, streams):
    return _fill(<uint64_t>(key & 0xFFFFFFFFFFFFFFFF), coords, streams, 1)


def rademacher_signs(key, coords, streams):
    return _fill(<uint64_t>(key & 0xFFFFFFFFFFFFFFFF), coords, streams, 2)
