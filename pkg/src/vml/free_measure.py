"""The free measure: Lebesgue measure on the circle pushed into R^Z.

Under ``I(lam) = (exp(2 pi i n lam))_n`` every square-integrable function of
``lam`` becomes, almost surely, a *linear* functional of the coordinates:

    f(lam) = sum_n fhat_n exp(-2 pi i n lam) = sum_m fhat_{-m} x_m,
    fhat_n = int_0^1 exp(+2 pi i n lam) f(lam) dlam.

Coefficients use this ``+`` sign convention throughout, so the functional
returned by :func:`linearize` has coefficient ``fhat_{-m}`` at index ``m``.
Nonlinear expressions collapse as well: ``x_m x_n = x_{m+n}`` on the image.
"""
from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ConfigError, IndexWindowError, ResolutionError
from .linfun import CoeffSeq
from .measure import CircleMeasure, cis_turns, sample_batch


@dataclass(frozen=True)
class CircleFunction:
    """A function of ``lam`` in [0, 1) with optional exact Fourier data.

    ``tag`` is ``"trig_polynomial"``, ``"piecewise_smooth"`` or
    ``"l2_generic"``; ``degree`` matters for the first, ``jumps`` for the second.
    ``known_coeffs(n)`` returns exact ``fhat_n`` and ``norm_sq`` is
    ``int |f|^2`` when known.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    tag: str = "l2_generic"
    degree: int | None = None
    jumps: tuple = ()
    known_coeffs: Callable[[np.ndarray], np.ndarray] | None = None
    norm_sq: float | None = None
    label: str = "f"

    def __call__(self, lam):
        return np.asarray(self.evaluator(np.asarray(lam, dtype=float)))


def const(value: float = 1.0) -> CircleFunction:
    return CircleFunction(
        lambda lam: np.full(np.shape(lam), value, dtype=float),
        "trig_polynomial",
        0,
        known_coeffs=lambda n: np.where(np.asarray(n) == 0, value, 0.0),
        norm_sq=value**2,
        label=f"const({value:g})",
    )


def harmonic(m: int) -> CircleFunction:
    """``exp(2 pi i m lam)``; its only coefficient sits at index ``-m``."""
    return CircleFunction(
        lambda lam: cis_turns(m * lam),
        "trig_polynomial",
        abs(m),
        known_coeffs=lambda n: np.where(np.asarray(n) == -m, 1.0 + 0j, 0j),
        norm_sq=1.0,
        label=f"harmonic({m})",
    )


def trig_polynomial(coeffs: dict[int, complex], label: str = "") -> CircleFunction:
    """``sum_k a_k exp(2 pi i k lam)``."""
    coeffs = {int(k): complex(v) for k, v in coeffs.items()}
    deg = max((abs(k) for k in coeffs), default=0)

    def ev(lam):
        lam = np.asarray(lam, dtype=float)
        out = np.zeros(lam.shape, dtype=complex)
        for k, a in coeffs.items():
            out += a * cis_turns(k * lam)
        return out

    def known(n):
        n = np.asarray(n)
        return np.array([coeffs.get(-int(k), 0j) for k in n.ravel()], dtype=complex).reshape(n.shape)

    return CircleFunction(ev, "trig_polynomial", deg, (), known, sum(abs(a) ** 2 for a in coeffs.values()), label or f"trig{deg}")


def square_wave() -> CircleFunction:
    """``sign(lam - 1/2)``: ``fhat_n = -2i / (pi n)`` for odd ``n``, else 0."""

    def known(n):
        n = np.asarray(n)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(n % 2 == 1, -2j / (np.pi * n), 0j)

    return CircleFunction(lambda lam: np.where(np.asarray(lam) % 1.0 < 0.5, -1.0, 1.0), "piecewise_smooth", None, (0.0, 0.5), known, 1.0, "square_wave")


def triangle_wave() -> CircleFunction:
    """``1 - 4 |lam - 1/2|``: ``fhat_n = -4 / (pi^2 n^2)`` for odd ``n``, else 0."""

    def known(n):
        n = np.asarray(n)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(n % 2 == 1, -4.0 / (np.pi**2 * n.astype(float) ** 2), 0.0) + 0j

    return CircleFunction(lambda lam: 1.0 - 4.0 * np.abs(np.asarray(lam) % 1.0 - 0.5), "piecewise_smooth", None, (0.5,), known, 1.0 / 3.0, "triangle_wave")


def tabulated(values: Sequence[float], label: str = "tabulated") -> CircleFunction:
    """Piecewise-constant function from equispaced samples on [0, 1)."""
    vals = np.asarray(values)
    R = len(vals)
    if R == 0:
        raise ConfigError("tabulated function needs at least one value")
    return CircleFunction(lambda lam: vals[np.minimum((np.asarray(lam) % 1.0 * R).astype(int), R - 1)], "piecewise_smooth", None, tuple(np.arange(R) / R), label=label)


BUILTINS = {"const": const, "harmonic": harmonic, "square_wave": square_wave, "triangle_wave": triangle_wave}


def circle_function_from_config(cfg: dict | str) -> CircleFunction:
    if isinstance(cfg, str):
        hit = re.fullmatch(r"harmonic\((-?\d+)\)", cfg.strip())
        cfg = {"name": "harmonic", "m": int(hit.group(1))} if hit else {"name": cfg.strip()}
    if "tabulated" in cfg:
        return tabulated(cfg["tabulated"], cfg.get("label", "tabulated"))
    name = cfg.get("name")
    if name == "const":
        return const(float(cfg.get("value", 1.0)))
    if name == "harmonic":
        return harmonic(int(cfg.get("m", 1)))
    if name == "trig":
        return trig_polynomial({int(k): complex(*v) if isinstance(v, list) else v for k, v in cfg["coeffs"].items()})
    if name in BUILTINS:
        return BUILTINS[name]()
    raise ConfigError(f"unknown circle function {name!r}", "/name")


# ---------------------------------------------------------------------------
# embedding and coefficients


def embed(lam: float, window: int) -> np.ndarray:
    """Coordinates ``exp(2 pi i n lam)`` for ``|n| <= window`` (complex convention)."""
    return cis_turns(lam * np.arange(-window, window + 1, dtype=float))


def default_resolution(f: CircleFunction, window: int) -> int:
    if f.tag == "trig_polynomial" and f.degree is not None:
        return max(64, 2 * (f.degree + window) + 2, 4 * window + 1)
    return max(8192, 256 * window)


def fourier_coeffs(f: CircleFunction, window: int, resolution: int | None = None) -> CoeffSeq:
    """``fhat_n = int_0^1 exp(2 pi i n lam) f(lam) dlam`` for ``|n| <= window``.

    Trigonometric polynomials use the equispaced rule (exact once the
    resolution exceeds ``degree + window``); everything else the midpoint rule.
    """
    R = default_resolution(f, window) if resolution is None else int(resolution)
    if R <= 4 * window:
        raise ResolutionError(f"resolution {R} must exceed 4*window = {4 * window}")
    trig = f.tag == "trig_polynomial" and f.degree is not None
    if trig and R <= f.degree + window:
        raise ResolutionError(f"resolution {R} aliases a degree-{f.degree} polynomial at window {window}")
    shift = 0.0 if trig else 0.5
    lam = (np.arange(R) + shift) / R
    vals = f(lam).astype(complex)
    spec = np.fft.ifft(vals)  # (1/R) sum_k v_k exp(+2 pi i k n / R)
    n = np.arange(-window, window + 1)
    coeffs = spec[n % R] * cis_turns(n * shift / R)
    if trig:
        coeffs = np.where(np.abs(coeffs) < 1e-15, 0, coeffs)
    return CoeffSeq(finite=dict(zip(n.tolist(), coeffs.tolist())), domain="integer", label=f"fhat[{f.label}]")


def linear_functional(fhat: CoeffSeq) -> CoeffSeq:
    """Index flip: the functional with coefficient ``fhat_{-m}`` at ``m``."""
    return CoeffSeq(finite={-k: v for k, v in (fhat.finite or {}).items()}, domain="integer", label=f"lin[{fhat.label}]")


@dataclass
class ReconstructionRow:
    function: str
    window: int
    l1_error: float
    l1_se: float
    l2_error: float
    l2_se: float
    parseval_tail: float

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class Linearization:
    coeffs: CoeffSeq
    rows: list[ReconstructionRow] = field(default_factory=list)


def parseval_tail(f: CircleFunction, fhat: CoeffSeq, window: int, resolution: int | None = None) -> float:
    """``(int |f|^2 - sum_{|n|<=N} |fhat_n|^2)^(1/2)``."""
    if f.norm_sq is not None:
        total = f.norm_sq
    else:
        R = resolution or max(8192, 256 * window)
        total = float(np.mean(np.abs(f((np.arange(R) + 0.5) / R)) ** 2))
    kept = sum(abs(v) ** 2 for v in fhat.finite.values())
    return math.sqrt(max(total - kept, 0.0))


def linearize(
    f: CircleFunction, windows: int | Sequence[int], mc: int = 20_000, seed: int = 0, resolution: int | None = None
) -> Linearization:
    """Linear functional ``x -> sum_m fhat_{-m} x_m`` matching ``f`` on the image of ``I``.

    For each window the report gives Monte Carlo estimates of
    ``E[min(1, |<c, I(lam)> - f(lam)|)]`` and of the L2 error, with the
    Parseval tail computed from the coefficients for comparison.
    """
    ws = [int(windows)] if np.ndim(windows) == 0 else [int(w) for w in windows]
    lam_measure = CircleMeasure(max(ws), "complex")
    x = sample_batch(lam_measure, max(ws), mc, seed)
    lams = lam_measure.lambdas(x.streams, seed)
    target = f(lams)
    rows = []
    coeffs = None
    for w in ws:
        fhat = fourier_coeffs(f, w, resolution)
        coeffs = linear_functional(fhat)
        sel = np.abs(x.indices) <= w
        approx = x.values[:, sel] @ coeffs.at(x.indices[sel])
        err = np.abs(approx - target)
        l1 = np.minimum(1.0, err)
        sq = err**2
        ms = float(sq.mean())
        l2 = math.sqrt(ms)
        l2_se = float(sq.std() / math.sqrt(mc)) / (2 * l2) if l2 > 0 else 0.0
        rows.append(
            ReconstructionRow(f.label, w, float(l1.mean()), float(l1.std() / math.sqrt(mc)), l2, l2_se, parseval_tail(f, fhat, w, resolution))
        )
    return Linearization(coeffs, rows)


def product_collapse_check(m: int, n: int, window: int, mc: int = 1000, seed: int = 0) -> float:
    """``max |x_m x_n - x_{m+n}|`` over ``mc`` samples of the free measure."""
    if max(abs(m), abs(n), abs(m + n)) > window:
        raise IndexWindowError(f"indices {m}, {n}, {m + n} need window >= {max(abs(m), abs(n), abs(m + n))}")
    x = sample_batch(CircleMeasure(window, "complex"), window, mc, seed)
    return float(np.max(np.abs(x.col(m) * x.col(n) - x.col(m + n))))


def relation_check(indices: Sequence[int], window: int, mc: int = 1000, seed: int = 0) -> float:
    """``max |prod_j x_{n_j} - x_{sum n_j}|`` over samples."""
    total = int(sum(indices))
    if max([abs(i) for i in indices] + [abs(total)]) > window:
        raise IndexWindowError("relation indices exceed the window")
    x = sample_batch(CircleMeasure(window, "complex"), window, mc, seed)
    prod = np.ones(mc, dtype=complex)
    for i in indices:
        prod = prod * x.col(int(i))
    return float(np.max(np.abs(prod - x.col(total))))


def freeness_demo(family: Iterable[CircleFunction], windows: Sequence[int], mc: int = 20_000, seed: int = 0) -> list[dict]:
    family = list(family)
    if not family:
        raise ValueError("family must be nonempty")
    rows = []
    for f in family:
        rows.extend(r.to_dict() for r in linearize(f, windows, mc, seed).rows)
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


__all__ = [
    "BUILTINS",
    "CircleFunction",
    "Linearization",
    "ReconstructionRow",
    "circle_function_from_config",
    "const",
    "embed",
    "fourier_coeffs",
    "freeness_demo",
    "harmonic",
    "linear_functional",
    "linearize",
    "parseval_tail",
    "product_collapse_check",
    "relation_check",
    "rows_to_csv",
    "square_wave",
    "tabulated",
    "triangle_wave",
    "trig_polynomial",
]
