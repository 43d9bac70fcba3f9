"""Backend selection for the sampling kernels.

The compiled ``_ckernels`` module is used when it imports; otherwise the
numpy implementation in ``_kernels_py``.  Set ``VML_PURE_PYTHON=1`` to force
the fallback.  Both produce identical bits.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("VML_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

counter_uniforms = _impl.counter_uniforms
standard_normals = _impl.standard_normals
rademacher_signs = _impl.rademacher_signs
mix64 = _kernels_py.mix64


def derive_key(seed: int, *labels: int) -> int:
    """Fold integer labels into a 64-bit key; distinct labels give unrelated streams."""
    key = mix64(seed)
    for label in labels:
        key = mix64(key ^ mix64(label + 0x632BE59BD9B4E019))
    return key


# Key domains; keep these stable, they are part of the reproducibility contract.
DOMAIN_COORDS = 1
DOMAIN_CIRCLE = 2
DOMAIN_AUX = 3
