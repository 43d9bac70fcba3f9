import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vml.errors import ConfigError, InvalidLawError, UnsupportedClosedFormError
from vml.expr import compile_unary
from vml.measure import (
    CircleMeasure,
    ProductMeasure,
    cis_turns,
    consistency_check,
    empirical_cf,
    marginal_cf,
    measure_from_config,
    sample,
    sample_batch,
    stream_sums,
)

MEASURES = [
    ProductMeasure.gaussian("1"),
    ProductMeasure.gaussian("1/n"),
    ProductMeasure.rademacher(),
    ProductMeasure.uniform("2"),
]


def test_rademacher_support():
    (s,) = sample(ProductMeasure.rademacher(), 3, 1, seed=5)
    assert set(np.abs(s.values)) == {1.0} and len(s.values) == 3


def test_circle_forced_lambda_zero():
    x = CircleMeasure(1, "complex_pairs").sample_at(np.array([0.0]), np.array([1]))
    assert np.array_equal(x.values[0, 0], [1.0, 0.0])


def test_gaussian_variance_large_truncation():
    x = sample_batch(ProductMeasure.gaussian("1"), 10_000, 10_000, seed=1)
    var = x.values[:, :50].var(axis=0)
    assert np.all(np.abs(var - 1) <= 3 * math.sqrt(2 / 10_000) * 1.5)
    assert abs(x.values.var() - 1) < 3 * math.sqrt(2 / 1e8) * 10


@pytest.mark.parametrize("m", MEASURES, ids=lambda m: f"{m.kind}")
def test_determinism_and_coherence(m):
    a = sample_batch(m, 40, 25, seed=9)
    b = sample_batch(m, 40, 25, seed=9)
    c = sample_batch(m, 12, 25, seed=9)
    assert a.values.tobytes() == b.values.tobytes()
    assert np.array_equal(a.values[:, :12], c.values)


def test_circle_samples_on_curve():
    m = CircleMeasure(8, "complex")
    x = sample_batch(m, 8, 500, seed=2)
    z = x.complex_values()
    assert np.allclose(np.abs(z), 1, atol=1e-15)
    lam = m.lambdas(x.streams, 2)
    assert np.allclose(z, np.exp(2j * np.pi * np.outer(lam, x.indices)), atol=1e-13)


@given(a=st.integers(-10, 10), b=st.integers(-10, 10))
def test_circle_relation(a, b):
    if abs(a + b) > 10:
        return
    x = sample_batch(CircleMeasure(10, "complex"), 10, 50, seed=3)
    assert np.max(np.abs(x.col(a) * x.col(b) - x.col(a + b))) < 1e-13


def test_cis_turns_exact_quarters():
    z = cis_turns(np.array([0.0, 0.25, 0.5, 0.75, 1.0]))
    assert np.array_equal(z, np.array([1, 1j, -1, -1j, 1]))


@pytest.mark.parametrize(
    "m, coords, t, expected",
    [
        (ProductMeasure.rademacher(), [1], [math.pi], -1.0),
        (ProductMeasure.gaussian("1"), [1], [1.0], math.exp(-0.5)),
        (ProductMeasure.uniform("1"), [3], [2.0], math.sin(2.0) / 2.0),
        (ProductMeasure.gaussian("1/n"), [1, 2, 3], [0.0, 0.0, 0.0], 1.0),
        (ProductMeasure.gaussian("1/n"), [2, 4], [1.0, 2.0], math.exp(-0.5 * (1 / 4 + 4 / 16))),
    ],
)
def test_marginal_cf_closed_forms(m, coords, t, expected):
    assert marginal_cf(m, coords, t) == pytest.approx(expected, abs=1e-15)


def test_marginal_cf_circle_bessel():
    from scipy.special import j0

    # E exp(i t cos(2 pi lam)) = J0(t) under the real-pair convention
    assert marginal_cf(CircleMeasure(2), [1], [1.0, 0.0]).real == pytest.approx(j0(1.0), abs=1e-12)


def test_custom_without_cf_raises():
    m = ProductMeasure.custom(compile_unary("u^3", "u"), mean=0.25, variance=1 / 7 - 1 / 16)
    with pytest.raises(UnsupportedClosedFormError):
        marginal_cf(m, [1], [1.0])


def test_non_monotone_quantile_rejected():
    with pytest.raises(InvalidLawError):
        ProductMeasure.custom(compile_unary("(u-0.5)^2", "u"))


@pytest.mark.parametrize("m", MEASURES, ids=lambda m: f"{m.kind}")
def test_empirical_cf_within_3se(m):
    for t in ([0.5, -1.0], [1.5, 0.3]):
        val, se = empirical_cf(m, [1, 2], t, 10_000, seed=4)
        assert abs(val - marginal_cf(m, [1, 2], t)) <= 3 * se


@pytest.mark.parametrize("m", MEASURES, ids=lambda m: f"{m.kind}")
def test_consistency_products_exact(m):
    grid = [[a] for a in (-2.0, -1.0, 0.0, 1.0, 2.0)]
    rep = consistency_check(m, [2], [1, 2, 3], grid)
    assert rep.max_discrepancy == 0.0 and rep.passed


def test_consistency_circle_quadrature():
    grid = [[a, b] for a in (-1.0, 0.5) for b in (0.0, 1.0)]
    rep = consistency_check(CircleMeasure(4), [1], [1, 2], grid, tol=1e-10)
    assert rep.passed


def test_stream_sums_matches_direct():
    m = ProductMeasure.gaussian("1/n")
    S = stream_sums(m, lambda n: 1.0 / n, [5, 700, 1500], 30, seed=8, block=256)
    x = sample_batch(m, 1500, 30, seed=8).values
    direct = np.cumsum(x / np.arange(1, 1501), axis=1)[:, [4, 699, 1499]]
    assert np.allclose(S, direct, rtol=1e-12, atol=1e-14)


def test_measure_from_config():
    m = measure_from_config({"kind": "product", "law": {"type": "gaussian", "sigma_rule": "1/n"}})
    assert m.law(4).variance == pytest.approx(1 / 16)
    c = measure_from_config({"kind": "circle", "window": 64})
    assert isinstance(c, CircleMeasure) and c.window == 64
    with pytest.raises(ConfigError):
        measure_from_config({"kind": "product", "law": {"type": "cauchy"}})


def test_law_invariants():
    law = ProductMeasure.rademacher().law(7)
    assert (law.mean, law.variance) == (0.0, 1.0)
    with pytest.raises((InvalidLawError, ConfigError)):
        ProductMeasure.gaussian("-1").law(1)
