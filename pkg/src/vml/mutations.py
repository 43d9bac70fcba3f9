"""Deliberate-fault switches used by the mutation checks.

Production code consults :func:`active` at the exact spots where a sign or a
conjugation matters; the verification suite turns a switch on and expects at
least one check to fail.
"""
from __future__ import annotations

import contextlib

KNOWN = {
    "cm_sign": "flip the sign of the quadratic term of the Cameron-Martin log-density",
    "charfun_conj": "drop the conjugation when filling the lower triangle of a Gram matrix",
}

_active: set[str] = set()


def active(name: str) -> bool:
    return name in _active


@contextlib.contextmanager
def inject(name: str):
    if name not in KNOWN:
        raise KeyError(f"unknown mutation {name!r}")
    _active.add(name)
    try:
        yield
    finally:
        _active.discard(name)
