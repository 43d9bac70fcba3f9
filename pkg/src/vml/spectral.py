"""Spectral measures of cyclic representations of a Hilbert space's additive group.

A positive-definite functional ``chi`` on H (coordinates in a fixed
orthonormal frame) is the Fourier transform of a measure ``mu`` living on a
larger space.  On every finite cylinder ``mu`` is recovered by Bochner
inversion; the representation acts on ``L^2(mu)`` by multiplicators

    (pi(g) F)(h) = exp(i <h, g>) F(h),

and ``<pi(g) 1, 1> = chi(g)``.  Whether ``mu`` is carried by a weighted
extension ``{h : sum w_n h_n^2 < inf}`` is probed by :func:`sazonov_diagnostic`.
"""
from __future__ import annotations

import base64
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .charfun import CharFunEstimate
from .errors import ConfigError, NotPositiveDefiniteError, VMLError
from .expr import Rule
from .linfun import CoeffSeq, Evaluator, evaluate, three_series_test
from .measure import (
    CircleMeasure,
    Measure,
    ProductMeasure,
    SampleBatch,
    TruncatedSample,
    marginal_cf,
    sample_batch,
    stream_sums,
)
from .series import classify

_CF_LAWS = {
    "gaussian": lambda: ProductMeasure.gaussian("1"),
    "cos": ProductMeasure.rademacher,
    "sinc": lambda: ProductMeasure.uniform("1"),
}
_CF_FUNCS = {
    "gaussian": lambda t: np.exp(-0.5 * t**2),
    "cos": np.cos,
    "sinc": lambda t: np.sinc(t / np.pi),
    "one": lambda t: np.ones_like(t),
}


class InconsistentModelError(VMLError):
    pass


@dataclass(frozen=True, eq=False)
class PositiveDefiniteFunctional:
    """``chi(g)`` for coefficient vectors ``g`` (last axis = coordinates).

    ``form_tag`` is ``"gaussian"`` (``exp(-scale^2 |g|^2 / 2)``), ``"product"``
    (``prod_n cf(g_n)`` for a named per-coordinate cf) or ``"custom"``.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    form_tag: str = "custom"
    scale: float = 1.0
    cf_name: str | None = None
    label: str = "chi"

    def __call__(self, g) -> np.ndarray:
        g = np.asarray(g, dtype=float)
        return np.asarray(self.evaluator(g), dtype=complex)

    @classmethod
    def gaussian(cls, scale: float = 1.0):
        s = float(scale)
        return cls(lambda g: np.exp(-0.5 * s**2 * np.sum(g**2, axis=-1)), "gaussian", s, None, f"gaussian({s:g})")

    @classmethod
    def product(cls, cf_name: str):
        if cf_name not in _CF_FUNCS:
            raise ConfigError(f"unknown per-coordinate cf {cf_name!r}", "/product/cf_rule")
        phi = _CF_FUNCS[cf_name]
        return cls(lambda g: np.prod(phi(g), axis=-1), "product", 1.0, cf_name, f"product({cf_name})")

    @classmethod
    def constant(cls):
        return cls.product("one")

    @classmethod
    def tabulated(cls, t: Sequence[float], re: Sequence[float], im: Sequence[float] | None = None, label="tabulated"):
        """Product of a tabulated one-dimensional cf (linear interpolation, 0 outside)."""
        t = np.asarray(t, dtype=float)
        vals = np.asarray(re, dtype=float) + 1j * (np.zeros_like(t) if im is None else np.asarray(im, dtype=float))
        order = np.argsort(t)
        t, vals = t[order], vals[order]

        def phi(x):
            return np.interp(x, t, vals.real, left=0, right=0) + 1j * np.interp(x, t, vals.imag, left=0, right=0)

        return cls(lambda g: np.prod(phi(g), axis=-1), "custom", 1.0, None, label)

    @property
    def measure(self) -> ProductMeasure | None:
        """The spectral measure as a sampleable product, for analytic tags."""
        if self.form_tag == "gaussian":
            return ProductMeasure.gaussian(repr(self.scale)) if self.scale > 0 else None
        if self.form_tag == "product" and self.cf_name in _CF_LAWS:
            return _CF_LAWS[self.cf_name]()
        return None

    @property
    def is_point_mass(self) -> bool:
        return (self.form_tag == "product" and self.cf_name == "one") or (self.form_tag == "gaussian" and self.scale == 0)

    def spot_check(self, dim: int = 4, trials: int = 16, seed: int = 0, tol: float = 1e-12) -> bool:
        key = kernels.derive_key(seed, kernels.DOMAIN_AUX, 41)
        g = 4 * kernels.counter_uniforms(key, np.arange(dim), np.arange(trials)) - 2
        ok0 = abs(self(np.zeros(dim)) - 1) <= tol
        return bool(ok0 and np.all(np.abs(self(-g) - np.conj(self(g))) <= tol))


def chi_from_config(cfg: dict) -> PositiveDefiniteFunctional:
    if "gaussian" in cfg:
        return PositiveDefiniteFunctional.gaussian(float(cfg["gaussian"].get("scale", 1.0)))
    if "product" in cfg:
        return PositiveDefiniteFunctional.product(cfg["product"].get("cf_rule", "cos"))
    if "custom" in cfg:
        c = cfg["custom"]
        return PositiveDefiniteFunctional.tabulated(c["t"], c["re"], c.get("im"), c.get("label", "tabulated"))
    raise ConfigError("chi descriptor needs one of gaussian, product, custom", "")


# ---------------------------------------------------------------------------
# gridded Bochner inversion


@dataclass
class GriddedDensity:
    """Density on the grid ``x_j = -L + j dx`` (``dx = 2L/M``) in every axis."""

    coords: tuple
    L: float
    M: int
    density: np.ndarray
    negativity_mass: float = 0.0
    normalization_defect: float = 0.0
    imag_defect: float = 0.0
    taper: float | None = None

    @property
    def dx(self) -> float:
        return 2 * self.L / self.M

    @property
    def axis(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.M)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def value_at(self, point) -> float:
        j = np.rint((np.atleast_1d(np.asarray(point, dtype=float)) + self.L) / self.dx).astype(int)
        return float(self.density[tuple(j)])

    def mass_in(self, lo, hi) -> float:
        """Mass of the cells whose centres lie in the box ``[lo, hi]``."""
        lo = np.broadcast_to(np.asarray(lo, dtype=float), (self.dim,))
        hi = np.broadcast_to(np.asarray(hi, dtype=float), (self.dim,))
        sel = tuple((self.axis >= a) & (self.axis <= b) for a, b in zip(lo, hi))
        return float(self.density[np.ix_(*sel)].sum() * self.dx**self.dim)

    def total_mass(self) -> float:
        return float(self.density.sum() * self.dx**self.dim)

    def marginal(self, sub_coords) -> "GriddedDensity":
        sub = tuple(sub_coords)
        axes = tuple(i for i, c in enumerate(self.coords) if c not in sub)
        dens = self.density.sum(axis=axes) * self.dx ** len(axes) if axes else self.density
        return GriddedDensity(sub, self.L, self.M, dens, taper=self.taper)

    def sample(self, count: int, seed: int) -> np.ndarray:
        """Inverse-CDF draws over cells, uniformly jittered within the cell."""
        key = kernels.derive_key(seed, kernels.DOMAIN_AUX, 57)
        u = kernels.counter_uniforms(key, np.arange(self.dim + 1), np.arange(count))
        p = self.density.ravel() * self.dx**self.dim
        cdf = np.cumsum(p)
        cell = np.minimum(np.searchsorted(cdf, u[:, 0] * cdf[-1]), len(p) - 1)
        pos = np.stack(np.unravel_index(cell, self.density.shape), axis=1)
        return -self.L + self.dx * (pos + u[:, 1:] - 0.5)

    def to_dict(self) -> dict:
        return {
            "coords": list(self.coords),
            "L": self.L,
            "M": self.M,
            "dtype": "float64",
            "shape": list(self.density.shape),
            "density_b64": base64.b64encode(np.ascontiguousarray(self.density, dtype="<f8").tobytes()).decode("ascii"),
            "negativity_mass": self.negativity_mass,
            "normalization_defect": self.normalization_defect,
            "imag_defect": self.imag_defect,
            "taper": self.taper,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GriddedDensity":
        arr = np.frombuffer(base64.b64decode(d["density_b64"]), dtype="<f8").reshape(d["shape"]).copy()
        return cls(tuple(d["coords"]), d["L"], d["M"], arr, d["negativity_mass"], d["normalization_defect"], d["imag_defect"], d["taper"])


def _dual_axis(L: float, M: int) -> np.ndarray:
    return (np.arange(M) - M // 2) * (np.pi / L)


def bochner_invert(
    chi: PositiveDefiniteFunctional,
    coords: Sequence[int],
    grid: tuple[float, int] = (12.0, 1024),
    taper: float | str | None = "auto",
    neg_bound: float = 1e-2,
    clip: float = 1e-6,
) -> GriddedDensity:
    """Density of the cylinder law on ``coords`` from samples of ``chi``.

    ``grid = (L, M)`` fixes the spatial grid ``[-L, L)`` with ``M`` points per
    axis (``M`` a power of two); the dual grid has spacing ``pi / L``.  ``chi``
    is multiplied by a Gaussian taper ``exp(-|t|^2 / (2 tau^2))`` before the
    inverse DFT, i.e. the law is smoothed by ``N(0, tau^-2)``, which suppresses
    leakage from truncating the dual grid.  ``"auto"`` takes ``tau`` as one
    fifth of the dual half-width; ``None`` disables the taper.  Cells more
    negative than ``-clip`` (in mass) count towards ``negativity_mass``; above
    ``neg_bound`` the input is rejected.  Negative cells are then zeroed and
    the density renormalized.
    """
    coords = tuple(int(c) for c in coords)
    L, M = float(grid[0]), int(grid[1])
    if M < 2 or M & (M - 1):
        raise ValueError("M must be a power of two")
    d = len(coords)
    if d == 0:
        return GriddedDensity((), L, M, np.array(1.0))
    if d > 3:
        raise ValueError("gridded inversion is limited to cylinders of dimension <= 3")
    t = _dual_axis(L, M)
    dt = np.pi / L
    K = max(coords)
    mesh = np.meshgrid(*([t] * d), indexing="ij")
    g = np.zeros(mesh[0].shape + (K,))
    for axis, c in enumerate(coords):
        g[..., c - 1] = mesh[axis]
    vals = chi(g)
    tau = None
    if taper == "auto":
        tau = (M // 2) * dt / 5.0
    elif taper is not None:
        tau = float(taper)
    if tau is not None:
        vals = vals * np.exp(-0.5 * sum(m**2 for m in mesh) / tau**2)
    sign = np.where(np.arange(M) % 2 == 0, 1.0, -1.0)
    for axis in range(d):
        shape = [1] * d
        shape[axis] = M
        vals = vals * sign.reshape(shape)
    spec = np.fft.fftn(vals)
    post = (-1.0) ** (M // 2) * sign
    for axis in range(d):
        shape = [1] * d
        shape[axis] = M
        spec = spec * post.reshape(shape)
    raw = spec * (dt / (2 * np.pi)) ** d
    dens = raw.real
    imag_defect = float(np.max(np.abs(raw.imag)) / max(np.max(np.abs(dens)), 1e-300))
    cell = (2 * L / M) ** d
    neg = -np.minimum(dens, 0.0) * cell
    negativity = float(neg[neg > clip].sum())
    if negativity > neg_bound:
        raise NotPositiveDefiniteError(f"negative mass {negativity:.3g} exceeds {neg_bound:g} at this resolution")
    dens = np.maximum(dens, 0.0)
    total = float(dens.sum() * cell)
    if not total > 0:
        raise NotPositiveDefiniteError("inverted density has no positive mass")
    return GriddedDensity(coords, L, M, dens / total, negativity, abs(total - 1.0), imag_defect, tau)


# ---------------------------------------------------------------------------
# spectral models


@dataclass
class AnalyticCylinder:
    coords: tuple
    descriptor: str

    def to_dict(self):
        return {"coords": list(self.coords), "analytic": self.descriptor}


@dataclass
class SpectralModel:
    chi: PositiveDefiniteFunctional
    cylinders: dict = field(default_factory=dict)
    weights: Rule = field(default_factory=lambda: Rule("1/n^2"))
    consistency_report: dict = field(default_factory=dict)
    tightness_report: dict = field(default_factory=dict)

    @property
    def measure(self) -> ProductMeasure | None:
        return self.chi.measure

    @property
    def sampleable(self) -> bool:
        return self.measure is not None or self.chi.is_point_mass

    def sample(self, truncation: int, count: int, seed: int, stream_offset: int = 0) -> SampleBatch:
        if self.chi.is_point_mass:
            idx = np.arange(1, truncation + 1)
            return SampleBatch(np.zeros((count, truncation)), idx, seed, np.arange(stream_offset, stream_offset + count))
        if self.measure is None:
            return self._sample_gridded(truncation, count, seed)
        return sample_batch(self.measure, truncation, count, seed, stream_offset)

    def _sample_gridded(self, truncation, count, seed):
        target = tuple(range(1, truncation + 1))
        law = self.cylinders.get(target)
        if not isinstance(law, GriddedDensity):
            raise VMLError(f"model has no gridded cylinder on coordinates {target}")
        return SampleBatch(law.sample(count, seed), np.array(target), seed, np.arange(count))

    def to_dict(self) -> dict:
        cyl = []
        for key, law in self.cylinders.items():
            cyl.append(law.to_dict())
        return {
            "chi": {"label": self.chi.label, "form_tag": self.chi.form_tag, "scale": self.chi.scale, "cf_name": self.chi.cf_name},
            "weights": self.weights.label,
            "cylinders": cyl,
            "consistency_report": self.consistency_report,
            "tightness_report": self.tightness_report,
        }

    @classmethod
    def from_dict(cls, d: dict, chi: PositiveDefiniteFunctional | None = None) -> "SpectralModel":
        meta = d["chi"]
        if chi is None:
            if meta["form_tag"] == "gaussian":
                chi = PositiveDefiniteFunctional.gaussian(meta["scale"])
            elif meta["form_tag"] == "product":
                chi = PositiveDefiniteFunctional.product(meta["cf_name"])
            else:
                chi = PositiveDefiniteFunctional(lambda g: np.full(np.shape(g)[:-1], np.nan + 0j), "custom", label=meta["label"])
        cylinders = {}
        for c in d["cylinders"]:
            law = GriddedDensity.from_dict(c) if "density_b64" in c else AnalyticCylinder(tuple(c["coords"]), c["analytic"])
            cylinders[tuple(c["coords"])] = law
        return cls(chi, cylinders, Rule(d["weights"]), d.get("consistency_report", {}), d.get("tightness_report", {}))


def auto_index_sets(k: int) -> list[tuple]:
    """Singletons ``(1)..(k)`` and consecutive pairs ``(j, j+1)``."""
    return [(j,) for j in range(1, k + 1)] + [(j, j + 1) for j in range(1, k)]


def _cf_grid(dim: int, points=(-2.0, -0.5, 0.0, 1.0, 2.5)) -> np.ndarray:
    mesh = np.meshgrid(*([np.asarray(points)] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def build_spectral_model(
    chi: PositiveDefiniteFunctional,
    index_sets: Sequence[Sequence[int]],
    grid: tuple[float, int] = (12.0, 1024),
    weights: Rule | str = "1/n^2",
    tol: float = 1e-3,
    N_grid: Sequence[int] = (2**8, 2**10, 2**12),
    mc: int = 4000,
    seed: int = 0,
    taper: float | str | None = "auto",
) -> SpectralModel:
    """Invert ``chi`` on every cylinder and cross-check nested cylinders.

    Analytic tags keep closed-form cylinder laws and compare the product cf
    against ``chi`` itself; custom tags are inverted on the grid, and nested
    cylinders are compared by marginalizing the larger density.
    """
    w = weights if isinstance(weights, Rule) else Rule(weights)
    sets = [tuple(sorted(int(c) for c in s)) for s in index_sets]
    model = SpectralModel(chi, {}, w)
    analytic = chi.measure is not None or chi.is_point_mass
    worst = 0.0
    pairs = []
    for s in sets:
        if analytic:
            model.cylinders[s] = AnalyticCylinder(s, chi.label)
            if s:
                for tv in _cf_grid(len(s)):
                    g = np.zeros(max(s))
                    g[np.asarray(s) - 1] = tv
                    law_cf = 1.0 if chi.is_point_mass else marginal_cf(chi.measure, s, tv)
                    worst = max(worst, abs(law_cf - complex(chi(g))))
        else:
            model.cylinders[s] = bochner_invert(chi, s, grid, taper)
    for hi in sets:
        for lo in sets:
            if lo != hi and set(lo) < set(hi):
                if analytic:
                    disc = 0.0
                    if lo:
                        for tv in _cf_grid(len(lo)):
                            t_hi = np.array([tv[lo.index(c)] if c in lo else 0.0 for c in hi])
                            a = 1.0 if chi.is_point_mass else marginal_cf(chi.measure, lo, tv)
                            b = 1.0 if chi.is_point_mass else marginal_cf(chi.measure, hi, t_hi)
                            disc = max(disc, abs(a - b))
                else:
                    big = model.cylinders[hi].marginal(lo)
                    disc = float(np.max(np.abs(big.density - model.cylinders[lo].density))) if lo else abs(big.total_mass() - 1)
                pairs.append({"lo": list(lo), "hi": list(hi), "discrepancy": disc})
                worst = max(worst, disc)
    model.consistency_report = {"max_discrepancy": worst, "tolerance": tol, "pairs": pairs, "passed": worst <= tol}
    if worst > tol:
        raise InconsistentModelError(f"cylinder laws disagree by {worst:.3g} > {tol:g}")
    if model.sampleable:
        model.tightness_report = sazonov_diagnostic(model, w, N_grid, mc, seed)
    else:
        model.tightness_report = {"verdict": "unavailable", "reason": "custom model is only known on its cylinders"}
    return model


def sazonov_diagnostic(
    model: SpectralModel,
    weights: Rule | str,
    N_grid: Sequence[int] = (2**8, 2**10, 2**12),
    mc: int = 4000,
    seed: int = 0,
    level: float = 0.99,
    stab_tol: float = 0.01,
) -> dict:
    """Quantiles of ``sum_{n<=N} w_n h_n^2`` under the spectral measure.

    ``tight`` when the ``level`` quantile changes by at most ``stab_tol``
    (relative) over the last grid step, ``escaping`` when it keeps growing.
    Gaussian and product tags also get the analytic series ``sum w_n Var(h_n)``.
    """
    w = weights if isinstance(weights, Rule) else Rule(weights)
    grid = [int(N) for N in N_grid]
    if model.chi.is_point_mass:
        S = np.zeros((mc, len(grid)))
    elif model.measure is not None:
        S = stream_sums(model.measure, lambda n: w(n), grid, mc, seed, power=2)
    else:
        return {"verdict": "unavailable", "reason": "model not sampleable beyond its cylinders"}
    q = np.quantile(S, level, axis=0)
    prev, last = float(q[-2]), float(q[-1])
    rel = 0.0 if last == prev else abs(last - prev) / max(abs(prev), 1e-300)
    if rel <= stab_tol:
        verdict = "tight"
    elif np.all(np.diff(q) > 0):
        verdict = "escaping"
    else:
        verdict = "inconclusive"
    report = {"grid": grid, "level": level, "quantiles": q.tolist(), "relative_change": rel, "stab_tol": stab_tol, "verdict": verdict}
    m = model.measure
    if m is not None and w.sympy_expr is not None and m.variance_expr is not None:
        cls = classify(w.sympy_expr * m.variance_expr)
        partial = [float(np.sum(w(np.arange(1, N + 1)) * m.variances(np.arange(1, N + 1)))) for N in grid]
        report["analytic"] = {"series": "sum w_n Var(h_n)", "verdict": cls.verdict, "reason": cls.reason, "partial_sums": partial}
    elif model.chi.is_point_mass:
        report["analytic"] = {"series": "sum w_n Var(h_n)", "verdict": "converges", "reason": "point mass", "partial_sums": [0.0] * len(grid)}
    return report


# ---------------------------------------------------------------------------
# the representation


def _as_vector(g) -> np.ndarray:
    if isinstance(g, CoeffSeq):
        raise TypeError("pass g as a finite coefficient vector")
    return np.atleast_1d(np.asarray(g, dtype=float))


def multiplicator(g, F: Evaluator, h: SampleBatch | TruncatedSample):
    """``(pi(g) F)(h) = exp(i <h, g>) F(h)``."""
    g = _as_vector(g)
    if len(g) > h.truncation:
        raise ValueError("g is supported beyond the sample truncation")
    phase = h.values[..., : len(g)] @ g
    return np.exp(1j * phase) * F(h)


def reconstruct_chi(model: SpectralModel, g, mc: int = 100_000, seed: int = 0) -> CharFunEstimate:
    """``<pi(g) 1, 1> = int exp(i <h, g>) dmu(h)``, which should reproduce ``chi(g)``."""
    g = _as_vector(g)
    h = model.sample(max(len(g), 1), mc, seed)
    e = multiplicator(g, lambda x: 1.0, h)
    se = math.sqrt((np.var(e.real) + np.var(e.imag)) / mc)
    return CharFunEstimate(complex(np.mean(e)), se, mc, "monte_carlo", None, "matrix element of the cyclic vector")


def homomorphism_unitarity_check(
    model: SpectralModel, g1, g2, F_set: dict[str, Evaluator], mc: int = 10_000, seed: int = 0, tol: float = 1e-12
) -> list[dict]:
    """Pointwise ``pi(g1 + g2) F = pi(g1) pi(g2) F`` and ``E|pi(g) F|^2 = E|F|^2``."""
    g1, g2 = _as_vector(g1), _as_vector(g2)
    k = max(len(g1), len(g2))
    g1 = np.pad(g1, (0, k - len(g1)))
    g2 = np.pad(g2, (0, k - len(g2)))
    h = model.sample(max(k, 2), mc, seed)
    rows = []
    for name, F in F_set.items():
        lhs = multiplicator(g1 + g2, F, h)
        rhs = multiplicator(g1, lambda x: multiplicator(g2, F, x), h)
        scale = np.maximum(1.0, np.abs(np.asarray(F(h))))
        hom = float(np.max(np.abs(lhs - rhs) / scale))
        d = np.abs(multiplicator(g1, F, h)) ** 2 - np.abs(np.asarray(F(h))) ** 2 * np.ones(mc)
        delta, se = float(abs(d.mean())), float(d.std() / math.sqrt(mc))
        rows.append(
            {
                "F": name,
                "homomorphism_max_dev": hom,
                "unitarity_delta": delta,
                "unitarity_se": se,
                "passed": hom <= tol and delta <= 3 * se + tol,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# realization in R^infinity


@dataclass
class Realization:
    samples: np.ndarray
    columns: list[str]
    injectivity: dict
    sampler: Callable[[int, int], np.ndarray]

    def to_dict(self):
        return {"columns": self.columns, "injectivity": self.injectivity, "n_samples": int(self.samples.shape[0])}


def realize_in_Rinfty(m: Measure, generating: Sequence[CoeffSeq], mc: int = 10_000, seed: int = 0, truncation: int = 256) -> Realization:
    """Push ``m`` forward under ``x -> (f_1(x), ..., f_k(x))``.

    Complex functionals (circle measure) contribute real and imaginary
    columns.  The map is linear by construction; the injectivity report gives
    ``E[min(1, |Y - Y'|)]`` between images of independent samples.
    """
    gens = list(generating)
    if not gens:
        raise ValueError("need at least one generating functional")
    for f in gens:
        if isinstance(m, ProductMeasure):
            verdict = three_series_test(f, m).verdict
        elif f.support_max is not None:
            verdict = "converges"
        else:
            verdict = classify(None if f.expr is None else f.expr**2).verdict
        if verdict != "converges":
            raise VMLError(f"rejected input: {f.label} is not a certified measurable functional ({verdict})")
    window = truncation
    if isinstance(m, CircleMeasure):
        window = min(m.window, truncation)
    complex_cols = isinstance(m, CircleMeasure)

    def sampler(count, s):
        x = sample_batch(m, window, count, s)
        cols = []
        for f in gens:
            v = evaluate(f, x).value
            cols.extend([np.real(v), np.imag(v)] if complex_cols else [np.real(v)])
        return np.stack(cols, axis=1)

    Y = sampler(mc, seed)
    names = []
    for f in gens:
        names.extend([f"re[{f.label}]", f"im[{f.label}]"] if complex_cols else [f.label])
    half = mc // 2
    d = np.minimum(1.0, np.linalg.norm(Y[:half] - Y[half : 2 * half], axis=1))
    inj = {"mean_pair_distance": float(d.mean()), "se": float(d.std() / math.sqrt(max(half, 1))), "min_pair_distance": float(d.min()) if half else 0.0}
    return Realization(Y, names, inj, sampler)


__all__ = [
    "AnalyticCylinder",
    "GriddedDensity",
    "InconsistentModelError",
    "PositiveDefiniteFunctional",
    "Realization",
    "SpectralModel",
    "auto_index_sets",
    "bochner_invert",
    "build_spectral_model",
    "chi_from_config",
    "homomorphism_unitarity_check",
    "multiplicator",
    "realize_in_Rinfty",
    "reconstruct_chi",
    "sazonov_diagnostic",
]
