"""Pure numpy implementation of the counter-based sampling kernels.

Every draw is a pure function of ``(key, coordinate, stream)``; nothing is
carried between calls, which is what makes truncations coherent.  The
compiled module ``_ckernels`` implements the same functions bit for bit.
"""
from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_STREAM_MUL = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_MASK = (1 << 64) - 1
_INV53 = 1.0 / 9007199254740992.0


def _mix(z):
    z = z ^ (z >> _S30)
    z = z * _M1
    z = z ^ (z >> _S27)
    z = z * _M2
    return z ^ (z >> _S31)


def mix64(value: int) -> int:
    """splitmix64 finalizer on a Python int (wrapped to 64 bits)."""
    z = np.array([value & _MASK], dtype=np.uint64)
    return int(_mix(z)[0])


def _bits(key: int, coords, streams):
    coords = np.asarray(coords, dtype=np.int64).view(np.uint64)
    streams = np.asarray(streams, dtype=np.int64).view(np.uint64)
    k = np.uint64(key & _MASK)
    with np.errstate(over="ignore"):
        zc = _mix(k + coords * _GOLDEN)
        z = _mix(zc[None, :] + streams[:, None] * _STREAM_MUL)
    return z


def counter_uniforms(key: int, coords, streams) -> np.ndarray:
    """Uniforms in the open interval (0, 1), shape ``(len(streams), len(coords))``."""
    z = _bits(key, coords, streams)
    return ((z >> _S11).astype(np.float64) + 0.5) * _INV53


def standard_normals(key: int, coords, streams) -> np.ndarray:
    return ndtri(counter_uniforms(key, coords, streams))


def rademacher_signs(key: int, coords, streams) -> np.ndarray:
    u = counter_uniforms(key, coords, streams)
    return np.where(u < 0.5, -1.0, 1.0)
