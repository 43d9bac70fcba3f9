"""Characteristic functionals ``xi(f) = E exp(i f(x))``.

Closed forms are products of coordinate characteristic functions (product
measures) or a quadrature over the circle parameter (circle measure).  The
Monte Carlo route evaluates partial sums on truncation-coherent samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import sympy

from . import mutations
from .errors import UnsupportedClosedFormError
from .linfun import CoeffSeq, evaluate
from .measure import CircleMeasure, Measure, ProductMeasure, cis_turns, sample_batch


@dataclass
class CharFunEstimate:
    value: complex
    std_error: float
    n_samples: int
    method: str  # closed_form | monte_carlo | quadrature
    tail_band: float | None = 0.0
    note: str = ""

    def to_dict(self):
        return {
            "re": float(self.value.real),
            "im": float(self.value.imag),
            "stderr": float(self.std_error),
            "method": self.method,
            "n_samples": self.n_samples,
            "tail_band": self.tail_band,
            "note": self.note,
        }


def _real_pairing(values):
    # the circle measure pairs complex coordinates; its real functional is the real part
    return np.real(values)


def closed_form(m: Measure, f: CoeffSeq, truncation: int = 64, resolution: int | None = None) -> CharFunEstimate:
    if isinstance(m, CircleMeasure):
        idx = m.indices(min(truncation, m.window))
        c = f.at(idx)
        R = resolution or max(4096, 16 * (int(np.max(np.abs(idx))) + 1))
        lam = (np.arange(R) + 0.5) / R
        phase = _real_pairing(cis_turns(np.multiply.outer(lam, idx.astype(float))) @ c)
        return CharFunEstimate(complex(np.mean(np.exp(1j * phase))), 0.0, 0, "quadrature", _tail_band(m, f, truncation))
    if not m.has_closed_form_cf:
        raise UnsupportedClosedFormError("custom law has no analytic characteristic function")
    n = np.arange(1, truncation + 1)
    fn = f.at(n)
    nz = fn != 0
    value = complex(np.prod(m.coordinate_cf(n[nz], np.real(fn[nz])))) if np.any(nz) else 1.0 + 0j
    band = _tail_band(m, f, truncation)
    note = "" if band is not None else "truncated, tail unbounded"
    return CharFunEstimate(value, 0.0, 0, "closed_form", band, note)


def _tail_band(m: Measure, f: CoeffSeq, N: int) -> float | None:
    """Bound on ``|xi(f) - xi_N(f)|`` from ``|1 - phi(t)| <= t^2 E xi^2 / 2``."""
    if f.support_max is not None and f.support_max <= N:
        return 0.0
    tail = f.tail_sq_bound(N)
    if tail is None:
        return None
    if isinstance(m, CircleMeasure):
        return 0.5 * tail
    var = m.variance_expr
    if var is None or not var.is_number or not m.symmetric:
        return None
    return 0.5 * float(var) * tail


def monte_carlo(m: Measure, f: CoeffSeq, truncation: int = 64, mc: int = 10_000, seed: int = 0) -> CharFunEstimate:
    x = sample_batch(m, truncation, mc, seed)
    S = _real_pairing(evaluate(f, x).value)
    e = np.exp(1j * S)
    se = math.sqrt((np.var(e.real) + np.var(e.imag)) / mc)
    return CharFunEstimate(complex(e.mean()), se, mc, "monte_carlo", None, "")


def char_functional(
    m: Measure, f: CoeffSeq, truncation: int = 64, method: str = "closed_form", mc: int = 10_000, seed: int = 0
) -> CharFunEstimate:
    """``xi(f)`` by ``method`` in {"closed_form", "monte_carlo"}.

    ``closed_form`` on the circle measure is a quadrature over the parameter.
    ``f = 0`` returns exactly 1 regardless of method.
    """
    if f.support_max == 0:
        return CharFunEstimate(1.0 + 0j, 0.0, 0, "closed_form", 0.0, "")
    if method == "closed_form":
        return closed_form(m, f, truncation)
    if method == "monte_carlo":
        return monte_carlo(m, f, truncation, mc, seed)
    raise ValueError(f"unknown method {method!r}")


@dataclass
class PSDReport:
    min_eigenvalue: float
    gram: np.ndarray
    propagated_error: float
    hermitian_defect: float
    tol: float
    labels: list = field(default_factory=list)

    @property
    def psd(self) -> bool:
        return self.hermitian_defect <= 1e-12 and self.min_eigenvalue >= -self.tol - 3 * self.propagated_error

    def to_dict(self):
        return {
            "min_eigenvalue": self.min_eigenvalue,
            "propagated_error": self.propagated_error,
            "hermitian_defect": self.hermitian_defect,
            "psd": self.psd,
            "gram_re": self.gram.real.tolist(),
            "gram_im": self.gram.imag.tolist(),
        }


def gram_matrix(m: Measure, fs: list[CoeffSeq], truncation=64, method="closed_form", mc=10_000, seed=0):
    """``G_jk = xi(f_j - f_k)``: one estimate per unordered pair, lower triangle by conjugation.

    Returns the matrix and the matrix of standard errors.
    """
    k = len(fs)
    G = np.eye(k, dtype=complex)
    E = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            est = char_functional(m, fs[i] - fs[j], truncation, method, mc, seed)
            G[i, j] = est.value
            G[j, i] = est.value if mutations.active("charfun_conj") else np.conj(est.value)
            E[i, j] = E[j, i] = est.std_error
    return G, E


def psd_check(m: Measure, fs: list[CoeffSeq], truncation=64, method="closed_form", mc=10_000, seed=0, tol=1e-8) -> PSDReport:
    """Minimum eigenvalue of the Gram matrix of ``xi`` on ``fs``.

    The verdict allows ``tol`` plus three propagated standard errors (the
    Frobenius norm of the entrywise errors bounds the spectral perturbation).
    """
    if len(fs) < 1:
        raise ValueError("need at least one functional")
    G, E = gram_matrix(m, fs, truncation, method, mc, seed)
    defect = float(np.max(np.abs(G - G.conj().T)))
    if defect == 0.0:
        lam = float(np.linalg.eigvalsh(G).min())
    else:
        lam = float(np.linalg.eigvals(G).real.min())
    return PSDReport(lam, G, float(np.sqrt(np.sum(E**2))), defect, tol, [f.label for f in fs])


def nondegeneracy_probe(m: Measure, fs: list[CoeffSeq], tol=1e-12, margin=1e-6, truncation=64, method="closed_form", mc=10_000, seed=0):
    """``|xi(f) - 1|`` for each probe; a probe is flagged when it is within ``margin`` of 0."""
    rows = []
    for f in fs:
        window = f.values(truncation)
        if not np.any(np.abs(window) > tol):
            raise ValueError(f"probe {f.label} is zero at the working truncation")
        est = char_functional(m, f, truncation, method, mc, seed)
        dist = abs(est.value - 1.0)
        rows.append({"label": f.label, "re": est.value.real, "im": est.value.imag, "distance_from_one": dist, "flagged": dist <= margin + 3 * est.std_error})
    return rows


def continuity_probe(m: Measure, f: CoeffSeq, directions: list[CoeffSeq], steps=(1e-1, 1e-2, 1e-3), truncation=64):
    """Finite-difference ratios ``|xi(f + s d) - xi(f)| / (s |d|)`` (closed forms)."""
    base = char_functional(m, f, truncation).value
    out = []
    for d in directions:
        norm = float(np.sqrt(np.sum(np.abs(d.values(truncation)) ** 2))) or 1.0
        for s in steps:
            val = char_functional(m, f + s * d, truncation).value
            out.append({"direction": d.label, "step": s, "ratio": abs(val - base) / (s * norm)})
    return out


__all__ = [
    "CharFunEstimate",
    "PSDReport",
    "char_functional",
    "closed_form",
    "continuity_probe",
    "gram_matrix",
    "monte_carlo",
    "nondegeneracy_probe",
    "psd_check",
]
