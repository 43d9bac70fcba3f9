import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vml import mutations
from vml.errors import UnsupportedMeasureError
from vml.kernel_qi import (
    DensityModel,
    cameron_martin_norm,
    hellinger_dichotomy,
    kernel_mass_proxy,
    quasi_invariance_check,
    shift_action_on_linfun,
    standard_tests,
    translate_density,
)
from vml.linfun import CoeffSeq
from vml.measure import ProductMeasure, sample_batch

GAUSS = ProductMeasure.gaussian("1")


def test_cm_norm_basel():
    r = cameron_martin_norm(CoeffSeq("1/n"), GAUSS)
    assert r.membership == "member"
    assert r.norm_sq == pytest.approx(math.pi**2 / 6, abs=1e-9)
    assert r.norm_sq - r.partial_sum <= r.tail_bound


def test_cm_norm_weighted_measure():
    # sigma_n = 1/n, h_n = 1/n^2 -> sum 1/n^2
    r = cameron_martin_norm(CoeffSeq("1/n^2"), ProductMeasure.gaussian("1/n"))
    assert r.norm_sq == pytest.approx(math.pi**2 / 6, abs=1e-8)


def test_cm_nonmember():
    r = cameron_martin_norm(CoeffSeq("1/sqrt(n)"), GAUSS)
    assert r.membership == "non_member" and r.norm_sq == math.inf


def test_cm_requires_gaussian():
    with pytest.raises(UnsupportedMeasureError):
        cameron_martin_norm(CoeffSeq("1/n"), ProductMeasure.rademacher())


def test_density_zero_shift_is_one():
    x = sample_batch(GAUSS, 16, 100, 0)
    assert np.all(translate_density(DensityModel(CoeffSeq.zero(), GAUSS, 16), x) == 1)


def test_density_closed_form_one_coordinate():
    x = sample_batch(GAUSS, 4, 50, 1)
    rho = translate_density(DensityModel(CoeffSeq.basis(1), GAUSS, 4), x)
    assert np.allclose(rho, np.exp(x.col(1) - 0.5))


@pytest.mark.parametrize("h", [CoeffSeq.basis(1), CoeffSeq("1/n"), CoeffSeq("3*2^-n")], ids=["e1", "1/n", "geom"])
def test_quasi_invariance_battery(h):
    model = DensityModel(h, GAUSS, 64)
    for name, g in standard_tests().items():
        assert quasi_invariance_check(model, g, 50_000, seed=3, name=name).passed


def test_sign_mutation_breaks_mean():
    model = DensityModel(CoeffSeq("1/n"), GAUSS, 64)
    assert quasi_invariance_check(model, standard_tests()["one"], 20_000, 1).passed
    with mutations.inject("cm_sign"):
        r = quasi_invariance_check(model, standard_tests()["one"], 20_000, 1)
    assert not r.passed and r.lhs > 2


def test_hellinger_analytic_limit():
    r = hellinger_dichotomy(CoeffSeq("1/n"), GAUSS, N_grid=(10_000,))
    assert r.limit == "positive"
    assert abs(r.products[0] - math.exp(-math.pi**2 / 48)) < 1e-3
    assert r.limit_estimate == pytest.approx(math.exp(-math.pi**2 / 48), abs=1e-6)


def test_hellinger_zero_limit():
    r = hellinger_dichotomy(CoeffSeq("1/sqrt(n)"), GAUSS)
    assert r.limit == "zero" and r.n_below > 1e20


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=6))
def test_hellinger_finite_support(values):
    h = CoeffSeq(finite=values)
    r = hellinger_dichotomy(h, GAUSS, N_grid=(16,), diag_max_log2=8)
    assert r.limit == "positive"
    assert r.limit_estimate == pytest.approx(math.exp(-sum(v * v for v in values) / 8), rel=1e-12)


def test_shift_action_constant():
    a = shift_action_on_linfun(CoeffSeq("2^-n"), CoeffSeq("2^-n"), GAUSS)
    assert a.constant == pytest.approx(1 / 3, abs=1e-12)


def test_kernel_mass_proxy_grows_linearly():
    # E sum_{n<=N} x_n^2 = N: samples leave every ball of the kernel
    out = kernel_mass_proxy(GAUSS, [16, 64, 256], mc=500, seed=0)
    assert np.allclose(out["mean"], [16, 64, 256], rtol=0.1)
    assert out["fraction_bounded"] == 0.0
