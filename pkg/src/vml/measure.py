"""Measures on R^infinity as consistent families of finite-dimensional laws.

Two families are supported:

* :class:`ProductMeasure` -- independent coordinates ``x_n`` (``n >= 1``) whose
  laws are given by a closed-form rule in ``n``.
* :class:`CircleMeasure` -- the image of Lebesgue measure on ``[0, 1)`` under
  ``lam -> (exp(2 pi i n lam))_n``, observed on a symmetric index window.

Infinite objects are never materialized; every operation takes a truncation.
Coordinate ``n`` of sample ``j`` is a pure function of ``(seed, n, j)``, so the
first ``N`` coordinates of a longer truncation equal the shorter one exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import sympy
from scipy import special

from . import kernels
from .errors import ConfigError, IndexWindowError, InvalidLawError, UnsupportedClosedFormError
from .expr import N_SYMBOL, Rule, compile_unary

LAW_KINDS = ("gaussian", "rademacher", "uniform", "custom")


# ---------------------------------------------------------------------------
# coordinate laws


def _sinc(x):
    # sin(x)/x with the removable singularity filled in
    return np.sinc(np.asarray(x) / np.pi)


@dataclass(frozen=True)
class CoordinateLaw:
    """Law of a single coordinate.

    ``scale`` is sigma for gaussian, the half width for uniform, and a
    multiplier of the base quantile for custom laws.
    """

    kind: str
    scale: float = 1.0
    quantile: Callable[[np.ndarray], np.ndarray] | None = None
    base_cf: Callable[[np.ndarray], np.ndarray] | None = None
    base_mean: float = 0.0
    base_variance: float = math.inf

    def __post_init__(self):
        if self.kind not in LAW_KINDS:
            raise InvalidLawError(f"unknown law kind {self.kind!r}")
        if self.kind in ("gaussian", "uniform") and not self.scale > 0:
            raise InvalidLawError(f"{self.kind} law needs a positive scale, got {self.scale}")
        if self.kind == "custom" and self.quantile is None:
            raise InvalidLawError("custom law needs a quantile function")

    @property
    def mean(self) -> float:
        return self.scale * self.base_mean if self.kind == "custom" else 0.0

    @property
    def variance(self) -> float:
        if self.kind == "gaussian":
            return self.scale**2
        if self.kind == "rademacher":
            return 1.0
        if self.kind == "uniform":
            return self.scale**2 / 3.0
        return self.scale**2 * self.base_variance

    def cf(self, t):
        return _law_cf(self.kind, self.scale, t, self.base_cf)

    def transform(self, u):
        return _law_transform(self.kind, self.scale, u, self.quantile)


def _law_cf(kind, scale, t, base_cf=None):
    t = np.asarray(t, dtype=float)
    if kind == "gaussian":
        return np.exp(-0.5 * (scale * t) ** 2) + 0j
    if kind == "rademacher":
        return np.cos(t) + 0j
    if kind == "uniform":
        return _sinc(scale * t) + 0j
    if base_cf is None:
        raise UnsupportedClosedFormError("custom law has no analytic characteristic function")
    return np.asarray(base_cf(scale * t), dtype=complex)


def _law_transform(kind, scale, u, quantile=None):
    if kind == "gaussian":
        return scale * special.ndtri(u)
    if kind == "rademacher":
        return np.where(u < 0.5, -1.0, 1.0)
    if kind == "uniform":
        return scale * (2.0 * u - 1.0)
    return scale * np.asarray(quantile(u), dtype=float)


def check_quantile(quantile: Callable[[np.ndarray], np.ndarray], points: int = 2049) -> None:
    """Raise InvalidLawError unless ``quantile`` is finite and nondecreasing on (0, 1)."""
    u = (np.arange(points) + 0.5) / points
    with np.errstate(all="ignore"):
        q = np.asarray(quantile(u), dtype=float)
    if q.shape != u.shape or not np.all(np.isfinite(q)):
        raise InvalidLawError("quantile function must return finite values on (0, 1)")
    if np.any(np.diff(q) < 0):
        raise InvalidLawError("quantile function is not monotone")


# ---------------------------------------------------------------------------
# samples


@dataclass(frozen=True)
class TruncatedSample:
    """One point of the space seen through a finite coordinate window."""

    values: np.ndarray
    indices: np.ndarray
    seed: int
    stream: int
    convention: str = "real"

    @property
    def truncation(self) -> int:
        return len(self.indices)

    def col(self, n: int):
        return _column(self.complex_values() if self.convention != "real" else self.values, self.indices, n)

    def complex_values(self) -> np.ndarray:
        return _as_complex(self.values, self.convention)


@dataclass(frozen=True)
class SampleBatch:
    """A block of samples sharing one coordinate window.

    ``values`` has shape ``(count, K)`` (real or complex convention) or
    ``(count, K, 2)`` for the real-pair circle convention.
    """

    values: np.ndarray
    indices: np.ndarray
    seed: int
    streams: np.ndarray
    convention: str = "real"

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def truncation(self) -> int:
        return len(self.indices)

    def complex_values(self) -> np.ndarray:
        return _as_complex(self.values, self.convention)

    def col(self, n: int) -> np.ndarray:
        data = self.values if self.convention == "real" else self.complex_values()
        return _column(data, self.indices, n, axis=1)

    def combine(self, a, other: "SampleBatch", b) -> "SampleBatch":
        """Row-wise ``a * self + b * other`` (scalars or per-row arrays)."""
        if not np.array_equal(self.indices, other.indices):
            raise IndexWindowError("cannot combine batches on different windows")
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        extra = (1,) * (self.values.ndim - 1)
        if a.ndim == 1:
            a = a.reshape((-1,) + extra)
        if b.ndim == 1:
            b = b.reshape((-1,) + extra)
        return SampleBatch(a * self.values + b * other.values, self.indices, self.seed, self.streams, self.convention)

    def shifted(self, h: np.ndarray) -> "SampleBatch":
        return SampleBatch(self.values + np.asarray(h)[None, :], self.indices, self.seed, self.streams, self.convention)

    def rows(self) -> list[TruncatedSample]:
        return [
            TruncatedSample(self.values[i], self.indices, self.seed, int(s), self.convention)
            for i, s in enumerate(self.streams)
        ]


def _as_complex(values, convention):
    if convention == "complex_pairs":
        return values[..., 0] + 1j * values[..., 1]
    return values


def _column(data, indices, n, axis=0):
    pos = np.searchsorted(indices, n)
    if pos >= len(indices) or indices[pos] != n:
        raise IndexWindowError(f"coordinate {n} outside the sample window")
    return data[pos] if axis == 0 else data[:, pos]


# ---------------------------------------------------------------------------
# measures


@dataclass(frozen=True, eq=False)
class ProductMeasure:
    """Product of independent coordinate laws of one kind.

    The per-coordinate parameter is ``scale_rule(n)``; see the factories
    :meth:`gaussian`, :meth:`rademacher`, :meth:`uniform`, :meth:`custom`.
    """

    kind: str
    scale_rule: Rule = field(default_factory=lambda: Rule("1"))
    label: str = ""
    quantile: Callable[[np.ndarray], np.ndarray] | None = None
    base_cf: Callable[[np.ndarray], np.ndarray] | None = None
    base_mean: float = 0.0
    base_variance: float = math.inf

    def __post_init__(self):
        if self.kind not in LAW_KINDS:
            raise InvalidLawError(f"unknown law kind {self.kind!r}")
        if self.kind == "custom":
            if self.quantile is None:
                raise InvalidLawError("custom law needs a quantile function")
            check_quantile(self.quantile)
        if not self.label:
            object.__setattr__(self, "label", f"{self.kind}({self.scale_rule.label})")

    # factories -------------------------------------------------------------
    @classmethod
    def gaussian(cls, sigma_rule="1", label=""):
        return cls("gaussian", _rule(sigma_rule), label)

    @classmethod
    def rademacher(cls, label=""):
        return cls("rademacher", Rule("1"), label)

    @classmethod
    def uniform(cls, half_width_rule="1", label=""):
        return cls("uniform", _rule(half_width_rule), label)

    @classmethod
    def custom(cls, quantile, cf=None, mean=0.0, variance=math.inf, scale_rule="1", label=""):
        return cls("custom", _rule(scale_rule), label, quantile, cf, float(mean), float(variance))

    # per-coordinate data ---------------------------------------------------
    def law(self, n: int) -> CoordinateLaw:
        return CoordinateLaw(
            self.kind, float(self.scales(np.array([n]))[0]), self.quantile, self.base_cf, self.base_mean, self.base_variance
        )

    def scales(self, n) -> np.ndarray:
        s = np.asarray(self.scale_rule(np.asarray(n)), dtype=float)
        if self.kind in ("gaussian", "uniform"):
            # a symbolically positive rule may still underflow to 0.0 far out
            bad = ~(s >= 0) if self._positive_rule else ~(s > 0)
            if np.any(bad):
                raise InvalidLawError(f"{self.kind} scale must be positive for every coordinate")
        return s

    @cached_property
    def _positive_rule(self) -> bool:
        e = self.scale_rule.sympy_expr
        return bool(e is not None and e.is_positive)

    def variances(self, n) -> np.ndarray:
        s = self.scales(n)
        if self.kind == "gaussian":
            return s**2
        if self.kind == "rademacher":
            return np.ones_like(s)
        if self.kind == "uniform":
            return s**2 / 3.0
        return s**2 * self.base_variance

    @property
    def variance_expr(self) -> sympy.Expr | None:
        """Closed form of the coordinate variance in ``n`` (None if unknown)."""
        if self.kind == "rademacher":
            return sympy.Integer(1)
        s = self.scale_rule.sympy_expr
        if s is None:
            return None
        if self.kind == "gaussian":
            return s**2
        if self.kind == "uniform":
            return s**2 / 3
        if not math.isfinite(self.base_variance):
            return None
        return s**2 * sympy.nsimplify(self.base_variance)

    @property
    def symmetric(self) -> bool:
        return self.kind != "custom"

    @property
    def has_closed_form_cf(self) -> bool:
        return self.kind != "custom" or self.base_cf is not None

    def coordinate_cf(self, n, t) -> np.ndarray:
        return _law_cf(self.kind, self.scales(n), t, self.base_cf)

    def draw(self, coords, streams, seed: int) -> np.ndarray:
        """Coordinates ``coords`` of samples ``streams``; shape ``(len(streams), len(coords))``."""
        coords = np.asarray(coords, dtype=np.int64)
        key = kernels.derive_key(seed, kernels.DOMAIN_COORDS)
        if self.kind == "rademacher":
            return kernels.rademacher_signs(key, coords, streams)
        if self.kind == "gaussian":
            return kernels.standard_normals(key, coords, streams) * self.scales(coords)[None, :]
        u = kernels.counter_uniforms(key, coords, streams)
        if self.kind == "uniform":
            return self.scales(coords)[None, :] * (2.0 * u - 1.0)
        return self.scales(coords)[None, :] * np.asarray(self.quantile(u), dtype=float)


def _rule(r) -> Rule:
    return r if isinstance(r, Rule) else Rule(r)


@dataclass(frozen=True, eq=False)
class CircleMeasure:
    """Image of Lebesgue measure on [0, 1) under ``lam -> (exp(2 pi i n lam))_n``.

    ``convention`` is ``"complex_pairs"`` (each index contributes
    ``(cos, sin)``) or ``"complex"``.
    """

    window: int = 64
    convention: str = "complex_pairs"
    label: str = "circle"

    def __post_init__(self):
        if self.convention not in ("complex_pairs", "complex"):
            raise ConfigError(f"unknown circle convention {self.convention!r}")
        if self.window < 0:
            raise ConfigError("circle window must be nonnegative")

    def indices(self, truncation: int | None = None) -> np.ndarray:
        N = self.window if truncation is None else int(truncation)
        if N > self.window:
            raise IndexWindowError(f"window {N} exceeds the measure's index range {self.window}")
        return np.arange(-N, N + 1, dtype=np.int64)

    def lambdas(self, streams, seed: int) -> np.ndarray:
        key = kernels.derive_key(seed, kernels.DOMAIN_CIRCLE)
        return kernels.counter_uniforms(key, [0], streams)[:, 0]

    def embed(self, lams, indices) -> np.ndarray:
        z = cis_turns(np.multiply.outer(np.asarray(lams, dtype=float), np.asarray(indices, dtype=float)))
        if self.convention == "complex_pairs":
            return np.stack([z.real, z.imag], axis=-1)
        return z

    def sample_at(self, lams, indices=None, seed: int = 0) -> SampleBatch:
        """Test hook: the batch for prescribed parameters ``lams``."""
        idx = self.indices() if indices is None else np.asarray(indices, dtype=np.int64)
        lams = np.atleast_1d(np.asarray(lams, dtype=float))
        return SampleBatch(self.embed(lams, idx), idx, seed, np.arange(len(lams)), self.convention)


def cis_turns(r) -> np.ndarray:
    """``exp(2 pi i r)`` with exact values at quarter turns."""
    r = np.asarray(r, dtype=float)
    r = r - np.floor(r)
    q = np.rint(4.0 * r)
    d = (4.0 * r - q) * (np.pi / 2.0)
    c, s = np.cos(d), np.sin(d)
    q = q.astype(np.int64) % 4
    re = np.choose(q, [c, -s, -c, s])
    im = np.choose(q, [s, c, -s, -c])
    return re + 1j * im


Measure = ProductMeasure | CircleMeasure


# ---------------------------------------------------------------------------
# operations


def _streams(count, stream_offset=0):
    if count < 1:
        raise ValueError("count must be >= 1")
    return np.arange(stream_offset, stream_offset + count, dtype=np.int64)


def sample_batch(measure: Measure, truncation: int, count: int, seed: int, stream_offset: int = 0) -> SampleBatch:
    """Draw ``count`` samples truncated to ``truncation`` coordinates (window for circles)."""
    if truncation < (0 if isinstance(measure, CircleMeasure) else 1):
        raise ValueError("truncation must be >= 1")
    streams = _streams(count, stream_offset)
    if isinstance(measure, CircleMeasure):
        idx = measure.indices(truncation)
        values = measure.embed(measure.lambdas(streams, seed), idx)
        return SampleBatch(values, idx, seed, streams, measure.convention)
    idx = np.arange(1, truncation + 1, dtype=np.int64)
    return SampleBatch(measure.draw(idx, streams, seed), idx, seed, streams, "real")


def sample(measure: Measure, truncation: int, count: int, seed: int, stream_offset: int = 0) -> list[TruncatedSample]:
    return sample_batch(measure, truncation, count, seed, stream_offset).rows()


def stream_sums(
    measure: ProductMeasure,
    coeffs: Callable[[np.ndarray], np.ndarray] | np.ndarray,
    checkpoints: Sequence[int],
    count: int,
    seed: int,
    power: int = 1,
    block: int = 512,
    stream_offset: int = 0,
) -> np.ndarray:
    """Partial sums ``sum_{n<=N} c_n x_n**power`` at each checkpoint ``N``.

    Coordinates are generated in blocks so memory stays ``O(count * block)``.
    Returns an array of shape ``(count, len(checkpoints))``.
    """
    checkpoints = [int(c) for c in checkpoints]
    if not checkpoints or min(checkpoints) < 1:
        raise ValueError("checkpoints must be positive")
    streams = _streams(count, stream_offset)
    top = max(checkpoints)
    total = np.zeros(count, dtype=float)
    out = np.empty((count, len(checkpoints)), dtype=float)
    edges = sorted(set(range(block, top + 1, block)) | set(checkpoints))
    lo = 1
    for edge in edges:
        idx = np.arange(lo, edge + 1, dtype=np.int64)
        cn = coeffs(idx) if callable(coeffs) else np.asarray(coeffs)[idx - 1]
        x = measure.draw(idx, streams, seed)
        total = total + (x**power) @ np.asarray(cn, dtype=float)
        for j, c in enumerate(checkpoints):
            if c == edge:
                out[:, j] = total
        lo = edge + 1
    return out


def marginal_cf(measure: Measure, coords: Sequence[int], t, resolution: int = 4096) -> complex:
    """Characteristic function of the marginal on ``coords`` at ``t``.

    Product measures use the analytic per-coordinate formulas.  For the circle
    measure ``t`` has one ``(t_cos, t_sin)`` pair per coordinate and the value
    is a midpoint quadrature over ``lam``.
    """
    coords = [int(c) for c in coords]
    if len(set(coords)) != len(coords):
        raise ValueError("coords must be distinct")
    t = np.asarray(t, dtype=float)
    if isinstance(measure, CircleMeasure):
        t = t.reshape(len(coords), 2)
        lam = (np.arange(resolution) + 0.5) / resolution
        z = cis_turns(np.multiply.outer(lam, np.asarray(coords, dtype=float)))
        phase = z.real @ t[:, 0] + z.imag @ t[:, 1]
        return complex(np.mean(np.exp(1j * phase)))
    if t.shape != (len(coords),):
        raise ValueError("t must have one entry per coordinate")
    if not len(coords):
        return 1.0 + 0j
    if np.all(t == 0):
        return 1.0 + 0j
    if not measure.has_closed_form_cf:
        raise UnsupportedClosedFormError("custom law without analytic cf; use Monte Carlo (charfun)")
    return complex(np.prod(measure.coordinate_cf(np.asarray(coords), t)))


def empirical_cf(measure: Measure, coords: Sequence[int], t, count: int, seed: int) -> tuple[complex, float]:
    """Monte Carlo mean of ``exp(i t.x)`` over the marginal, with its standard error."""
    t = np.asarray(t, dtype=float)
    if isinstance(measure, CircleMeasure):
        t = t.reshape(len(coords), 2)
        z = measure.embed(measure.lambdas(_streams(count), seed), np.asarray(coords))
        if measure.convention == "complex":
            z = np.stack([z.real, z.imag], axis=-1)
        phase = np.einsum("ikc,kc->i", z, t)
    else:
        x = measure.draw(np.asarray(coords), _streams(count), seed)
        phase = x @ t
    e = np.exp(1j * phase)
    se = math.sqrt((np.var(e.real) + np.var(e.imag)) / count)
    return complex(e.mean()), se


@dataclass
class ConsistencyReport:
    lo_coords: list
    hi_coords: list
    max_discrepancy: float
    tolerance: float
    quadrature_error: float = 0.0

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= self.tolerance + self.quadrature_error

    def to_dict(self) -> dict:
        return {
            "lo_coords": self.lo_coords,
            "hi_coords": self.hi_coords,
            "max_discrepancy": self.max_discrepancy,
            "tolerance": self.tolerance,
            "quadrature_error": self.quadrature_error,
            "passed": self.passed,
        }


def consistency_check(measure: Measure, lo_coords, hi_coords, grid, tol: float = 1e-12, resolution: int = 4096) -> ConsistencyReport:
    """Compare the high-dimensional marginal cf (zero on extra coordinates) with the low one.

    ``grid`` is a list of t-vectors for ``lo_coords``.  For circle measures each
    entry carries ``(t_cos, t_sin)`` pairs and the quadrature error is estimated
    by halving the resolution.
    """
    lo = [int(c) for c in lo_coords]
    hi = [int(c) for c in hi_coords]
    if not set(lo) <= set(hi):
        raise ValueError("lo_coords must be a subset of hi_coords")
    pos = [hi.index(c) for c in lo]
    worst = 0.0
    quad_err = 0.0
    width = 2 if isinstance(measure, CircleMeasure) else 1
    for t in grid:
        t = np.asarray(t, dtype=float).reshape(len(lo), width)
        t_hi = np.zeros((len(hi), width))
        t_hi[pos] = t
        if width == 1:
            t, t_hi = t[:, 0], t_hi[:, 0]
        a = marginal_cf(measure, lo, t, resolution=resolution)
        b = marginal_cf(measure, hi, t_hi, resolution=resolution)
        worst = max(worst, abs(a - b))
        if width == 2:
            coarse = marginal_cf(measure, lo, t, resolution=resolution // 2)
            quad_err = max(quad_err, abs(a - coarse))
    return ConsistencyReport(lo, hi, worst, tol, quad_err)


# ---------------------------------------------------------------------------
# configuration


def measure_from_config(cfg: dict) -> Measure:
    """Build a measure from its JSON descriptor (validated by :mod:`vml.schemas`)."""
    kind = cfg.get("kind")
    label = cfg.get("label", "")
    if kind == "circle":
        return CircleMeasure(int(cfg.get("window", 64)), cfg.get("convention", "complex_pairs"), label or "circle")
    if kind != "product":
        raise ConfigError(f"unknown measure kind {kind!r}", "/kind")
    law = cfg.get("law", {})
    typ = law.get("type")
    if typ == "gaussian":
        return ProductMeasure.gaussian(law.get("sigma_rule", "1"), label)
    if typ == "rademacher":
        return ProductMeasure.rademacher(label)
    if typ == "uniform":
        return ProductMeasure.uniform(law.get("half_width_rule", "1"), label)
    if typ == "custom":
        if "quantile" not in law:
            raise ConfigError("custom law needs a quantile expression in u", "/law/quantile")
        return ProductMeasure.custom(
            compile_unary(law["quantile"], "u"),
            mean=law.get("mean", 0.0),
            variance=law.get("variance", math.inf),
            scale_rule=law.get("scale_rule", "1"),
            label=label,
        )
    raise ConfigError(f"unknown law type {typ!r}", "/law/type")


__all__ = [
    "N_SYMBOL",
    "CircleMeasure",
    "ConsistencyReport",
    "CoordinateLaw",
    "ProductMeasure",
    "SampleBatch",
    "TruncatedSample",
    "check_quantile",
    "cis_turns",
    "consistency_check",
    "empirical_cf",
    "marginal_cf",
    "measure_from_config",
    "sample",
    "sample_batch",
    "stream_sums",
]
