import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate
from scipy.stats import norm

from vml.errors import ConfigError
from vml.linfun import (
    CoeffSeq,
    almost_linearity_test,
    cauchy_in_measure_oracle,
    coeffs_from_config,
    coordinate,
    evaluate,
    functional,
    in_measure_distance,
    three_series_test,
)
from vml.measure import CircleMeasure, ProductMeasure, TruncatedSample, sample_batch

RAD = ProductMeasure.rademacher()
GAUSS = ProductMeasure.gaussian("1")


@pytest.mark.parametrize(
    "rule, m, verdict",
    [
        ("2^-n", RAD, "converges"),
        ("1/sqrt(n)", RAD, "diverges"),
        ("0", RAD, "converges"),
        ("1/n", GAUSS, "converges"),
        ("1/log(n+2)", GAUSS, "diverges"),
        ("1", ProductMeasure.uniform("1"), "diverges"),
        ("1", ProductMeasure.uniform("2^-n"), "converges"),
    ],
)
def test_three_series_verdicts(rule, m, verdict):
    rep = three_series_test(CoeffSeq(rule), m)
    assert rep.verdict == verdict
    d = rep.to_dict()
    assert set(d) >= {"verdict", "series", "cauchy"}


def test_three_series_zero_exact():
    rep = three_series_test(CoeffSeq.zero(), GAUSS)
    assert rep.verdict == "converges"
    assert all(s.partial_sum == 0 for s in rep.series)


def _sample(values):
    v = np.asarray(values, dtype=float)
    return TruncatedSample(v, np.arange(1, len(v) + 1), 0, 0, "real")


def test_evaluate_examples():
    assert evaluate(CoeffSeq.basis(1), _sample([3.5, 2.0, -1.0])).value == 3.5
    assert evaluate(CoeffSeq.zero(), _sample([1.0, 2.0])).value == 0
    assert evaluate(CoeffSeq("2^-n"), _sample(np.ones(20))).value == pytest.approx(1 - 2.0**-20, abs=1e-16)


def test_cauchy_geometric_is_exactly_zero():
    stats = cauchy_in_measure_oracle(CoeffSeq("2^-n"), RAD, 0.01, [10, 20, 40], 2000, 0)
    assert [s.prob for s in stats] == [0.0, 0.0]
    assert all(s.prob == 0 for s in cauchy_in_measure_oracle(CoeffSeq.zero(), GAUSS, 0.01, [4, 8], 100, 0))


def test_cauchy_divergent_matches_clt():
    stats = cauchy_in_measure_oracle(CoeffSeq("1/sqrt(n)"), RAD, 0.1, [2**10, 2**11], 10_000, 1)
    p = 2 * norm.sf(0.1 / math.sqrt(math.log(2)))
    assert abs(stats[0].prob - p) <= 4 * stats[0].std_error + 0.01


def test_almost_linearity_partial_sums_exact():
    rep = almost_linearity_test(functional(CoeffSeq("1/n")), GAUSS, trials=500)
    assert rep.max_scaled_violation < 1e-12


def test_almost_linearity_detects_square():
    rep = almost_linearity_test(lambda x: x.col(1) ** 2, GAUSS, trials=500)
    assert rep.fraction_exceeding > 0.95


def test_circle_relation_functional():
    m = CircleMeasure(8, "complex")
    # x1*x2 - x3 vanishes on every sample, but linear combinations of samples
    # leave the image curve, so the literal formula is not linear there
    literal = almost_linearity_test(lambda x: x.col(1) * x.col(2) - x.col(3), m, trials=300, truncation=8)
    assert literal.fraction_exceeding > 0.9
    x = sample_batch(m, 8, 300, 0)
    assert np.max(np.abs(x.col(1) * x.col(2) - x.col(3))) < 1e-14
    # its linear representative is 0, which is exactly linear
    rep = almost_linearity_test(lambda x: 0 * x.col(3), m, trials=300, truncation=8)
    assert rep.max_violation == 0


def test_in_measure_distance_gaussian():
    exact = integrate.quad(lambda z: min(1.0, abs(z)) * norm.pdf(z), -10, 10, points=[-1, 0, 1])[0]
    assert exact == pytest.approx(2 * (norm.pdf(0) - norm.pdf(1)) + 2 * norm.sf(1), abs=1e-10)
    val, se = in_measure_distance(coordinate(1), lambda x: 0.0, GAUSS, mc=20_000, seed=3)
    assert abs(val - exact) <= 3 * se


def test_in_measure_distance_identities():
    F = functional(CoeffSeq("1/n"))
    assert in_measure_distance(F, F, GAUSS, mc=100)[0] == 0
    f = CoeffSeq("2^-n")
    s10 = lambda x: x.values[:, :10] @ (2.0 ** -np.arange(1, 11))
    s40 = lambda x: x.values[:, :40] @ (2.0 ** -np.arange(1, 41))
    assert in_measure_distance(s10, s40, RAD, mc=2000, truncation=40)[0] <= 2.0**-10


@given(
    a=st.lists(st.floats(-5, 5), min_size=1, max_size=6),
    b=st.lists(st.floats(-5, 5), min_size=1, max_size=6),
    c=st.floats(-3, 3),
)
def test_coeff_arithmetic(a, b, c):
    fa, fb = CoeffSeq(finite=a), CoeffSeq(finite=b)
    n = np.arange(1, 8)
    assert np.allclose((fa + fb * c).at(n), fa.at(n) + c * fb.at(n))
    assert np.allclose((fa - fa).at(n), 0)
    assert np.allclose((-fa).at(n), -fa.at(n))


def test_rule_arithmetic_keeps_symbolic_form():
    f = CoeffSeq("1/n") + CoeffSeq("2^-n") * 2
    assert f.expr is not None
    assert f.at(np.array([1]))[0] == pytest.approx(2.0)


def test_coeffs_from_config():
    f = coeffs_from_config({"finite": {"-1": [0, 1], "2": 3}, "domain": "integer"})
    assert f.at(np.array([-1, 2, 0])).tolist() == [1j, 3, 0]
    with pytest.raises(ConfigError):
        coeffs_from_config({})


def test_batch_evaluation_matches_rows():
    x = sample_batch(GAUSS, 16, 5, seed=2)
    f = CoeffSeq("1/n")
    vals = evaluate(f, x).value
    rows = [evaluate(f, r).value for r in x.rows()]
    assert np.allclose(vals, rows)


def test_cauchy_oracle_exact_gaussian_probability():
    # under N(0,1) coordinates S_1024 - S_512 ~ N(0, sum_{513}^{1024} n^-2) exactly
    sd = math.sqrt(np.sum(1.0 / np.arange(513, 1025) ** 2))
    exact = 2 * norm.sf(0.05 / sd)
    stats = cauchy_in_measure_oracle(CoeffSeq("1/n"), GAUSS, 0.05, [512, 1024], 10_000, 0)
    assert exact > 0.1
    assert abs(stats[0].prob - exact) <= 4 * stats[0].std_error
