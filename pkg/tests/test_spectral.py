import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vml.errors import NotPositiveDefiniteError
from vml.linfun import CoeffSeq, coordinate
from vml.measure import CircleMeasure, ProductMeasure, TruncatedSample
from vml.spectral import (
    GriddedDensity,
    InconsistentModelError,
    PositiveDefiniteFunctional,
    SpectralModel,
    auto_index_sets,
    bochner_invert,
    build_spectral_model,
    chi_from_config,
    homomorphism_unitarity_check,
    multiplicator,
    realize_in_Rinfty,
    reconstruct_chi,
    sazonov_diagnostic,
)

GAUSS_CHI = PositiveDefiniteFunctional.gaussian(1.0)
COS_CHI = PositiveDefiniteFunctional.product("cos")


def brute_force_density(chi, L, M, xs, tau):
    """Direct Riemann sum of (1/2pi) int chi(t) w(t) e^{-itx} dt on the dual grid."""
    dt = math.pi / L
    t = (np.arange(M) - M // 2) * dt
    vals = chi(t[:, None]) * np.exp(-0.5 * (t / tau) ** 2)
    return np.array([(vals * np.exp(-1j * t * x)).sum().real * dt / (2 * math.pi) for x in xs])


@pytest.mark.parametrize("chi", [GAUSS_CHI, COS_CHI, PositiveDefiniteFunctional.product("sinc")], ids=["gauss", "cos", "sinc"])
def test_fft_matches_direct_sum(chi):
    L, M = 8.0, 256
    d = bochner_invert(chi, [1], grid=(L, M))
    raw_total = 1 + d.normalization_defect
    idx = np.array([0, 17, 100, 128, 200, 255])
    direct = brute_force_density(chi, L, M, d.axis[idx], d.taper)
    clipped = np.maximum(direct, 0.0)
    assert np.allclose(d.density[idx] * raw_total, clipped, atol=1e-12)


def test_gaussian_density_at_zero():
    d = bochner_invert(GAUSS_CHI, [1], grid=(12.0, 1024))
    assert abs(d.value_at(0.0) - 1 / math.sqrt(2 * math.pi)) < 1e-3
    assert d.total_mass() == pytest.approx(1.0, abs=1e-12)
    assert np.all(d.density >= 0)


def test_cos_inverts_to_atoms():
    d = bochner_invert(COS_CHI, [1], grid=(12.0, 1024))
    assert d.mass_in(0.5, 1.5) == pytest.approx(0.5, abs=1e-3)
    assert d.mass_in(-1.5, -0.5) == pytest.approx(0.5, abs=1e-3)


def test_constant_is_point_mass():
    d = bochner_invert(PositiveDefiniteFunctional.constant(), [1], grid=(12.0, 1024), taper=None)
    assert d.mass_in(0, 0) == pytest.approx(1.0, abs=1e-12)


def test_gaussian_2d_and_marginal():
    d = bochner_invert(GAUSS_CHI, [1, 2], grid=(12.0, 1024))
    assert d.value_at([0, 0]) == pytest.approx(1 / (2 * math.pi), abs=1e-3)
    m = d.marginal((2,))
    assert m.value_at(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-3)


def test_not_positive_definite_rejected():
    t = np.linspace(-50, 50, 20001)
    rect = PositiveDefiniteFunctional.tabulated(t, (np.abs(t) <= 1).astype(float))
    with pytest.raises(NotPositiveDefiniteError):
        bochner_invert(rect, [1], grid=(12.0, 1024), taper=None)


def test_preconditions():
    with pytest.raises(ValueError):
        bochner_invert(GAUSS_CHI, [1, 2, 3, 4])
    with pytest.raises(ValueError):
        bochner_invert(GAUSS_CHI, [1], grid=(12.0, 1000))


def test_spot_check():
    assert GAUSS_CHI.spot_check() and COS_CHI.spot_check()
    bad = PositiveDefiniteFunctional(lambda g: np.exp(1j * np.sum(g, axis=-1)) * 2, "custom")
    assert not bad.spot_check()


def test_analytic_models():
    m = build_spectral_model(GAUSS_CHI, auto_index_sets(4), mc=300)
    assert m.consistency_report["max_discrepancy"] < 1e-15
    r = build_spectral_model(COS_CHI, auto_index_sets(4), mc=300)
    assert r.consistency_report["max_discrepancy"] == 0.0
    assert r.measure.kind == "rademacher"
    e = build_spectral_model(GAUSS_CHI, [()], mc=300)
    assert e.consistency_report["passed"] and e.consistency_report["pairs"] == []


def test_gridded_model_consistency_and_roundtrip():
    t = np.linspace(-40, 40, 8001)
    chi = PositiveDefiniteFunctional.tabulated(t, np.exp(-0.5 * t**2) * np.cos(t))
    m = build_spectral_model(chi, [(1,), (2,), (1, 2)], grid=(12.0, 1024))
    assert m.consistency_report["max_discrepancy"] <= 1e-3
    assert m.tightness_report["verdict"] == "unavailable"
    blob = json.dumps(m.to_dict())
    back = SpectralModel.from_dict(json.loads(blob), chi)
    assert np.array_equal(back.cylinders[(1, 2)].density, m.cylinders[(1, 2)].density)
    x = back.sample(2, 20_000, seed=0).values
    assert np.mean(x[:, 0] ** 2) == pytest.approx(2.0, abs=0.1)


def test_inconsistent_cylinders_rejected():
    # chi(g1, g2) that does not restrict to the same law on each axis
    chi = PositiveDefiniteFunctional(
        lambda g: np.exp(-0.5 * g[..., 0] ** 2 - 0.5 * g[..., 1] ** 2) if g.shape[-1] > 1 else np.exp(-2.0 * g[..., 0] ** 2),
        "custom",
    )
    with pytest.raises(InconsistentModelError):
        build_spectral_model(chi, [(1,), (1, 2)], grid=(12.0, 256))


def test_sazonov_examples():
    m = build_spectral_model(GAUSS_CHI, [(1,)], mc=200)
    flat = sazonov_diagnostic(m, "1", mc=2000)
    assert flat["verdict"] == "escaping"
    assert flat["analytic"]["partial_sums"] == [256.0, 1024.0, 4096.0]
    w = sazonov_diagnostic(m, "1/n^2", mc=4000)
    assert w["verdict"] == "tight" and w["relative_change"] <= 0.01
    assert w["analytic"]["verdict"] == "converges"
    assert w["analytic"]["partial_sums"][-1] == pytest.approx(math.pi**2 / 6, abs=1e-3)
    point = build_spectral_model(PositiveDefiniteFunctional.constant(), [(1,)], mc=100)
    assert sazonov_diagnostic(point, "1", mc=100)["quantiles"] == [0.0, 0.0, 0.0]


def test_multiplicator_examples():
    h = TruncatedSample(np.array([math.pi, 0.3]), np.array([1, 2]), 0, 0)
    one = lambda x: 1.0
    assert multiplicator([1.0], one, h) == pytest.approx(-1.0)
    assert multiplicator([0.0, 0.0], coordinate(1), h) == pytest.approx(math.pi)
    with pytest.raises(ValueError):
        multiplicator([1.0, 1.0, 1.0], one, h)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=4), st.lists(st.floats(-5, 5), min_size=4, max_size=4))
def test_multiplicator_unimodular(g, hv):
    h = TruncatedSample(np.array(hv), np.arange(1, 5), 0, 0)
    F = lambda x: x.values[0] + 2j
    assert abs(multiplicator(g, F, h)) == pytest.approx(abs(F(h)), rel=1e-14)


def test_reconstruct_examples():
    gm = build_spectral_model(GAUSS_CHI, [(1,)], mc=200)
    est = reconstruct_chi(gm, [1.0], mc=100_000, seed=1)
    assert abs(est.value - math.exp(-0.5)) <= 3 * est.std_error
    assert reconstruct_chi(gm, [0.0, 0.0], mc=1000).value == 1
    rm = build_spectral_model(COS_CHI, [(1,)], mc=200)
    assert reconstruct_chi(rm, [math.pi, math.pi], mc=1000).value == pytest.approx(1.0, abs=1e-12)


def test_homomorphism_and_unitarity():
    gm = build_spectral_model(GAUSS_CHI, [(1,)], mc=200)
    rng = np.random.default_rng(0)
    g1 = rng.normal(size=3)
    F = {"one": lambda h: np.ones(len(h)), "h1": coordinate(1)}
    rows = homomorphism_unitarity_check(gm, g1, -g1, F, mc=5000)
    assert all(r["homomorphism_max_dev"] < 1e-12 and r["passed"] for r in rows)
    rows = homomorphism_unitarity_check(gm, g1, rng.normal(size=3), F, mc=5000)
    assert all(r["passed"] for r in rows)


def test_realize_identity_and_collinear():
    g = ProductMeasure.gaussian("1")
    r = realize_in_Rinfty(g, [CoeffSeq.basis(1), CoeffSeq.basis(2)], mc=500, seed=3)
    from vml.measure import sample_batch

    x = sample_batch(g, 256, 500, 3)
    assert np.array_equal(r.samples, x.values[:, :2])
    c = realize_in_Rinfty(g, [CoeffSeq.basis(1), CoeffSeq.basis(1, 2.0)], mc=500)
    assert np.array_equal(c.samples[:, 1], 2 * c.samples[:, 0])


def test_realize_circle_unit_circle():
    r = realize_in_Rinfty(CircleMeasure(4, "complex"), [CoeffSeq(finite={1: 1.0}, domain="integer")], mc=20_000, seed=0)
    assert r.columns == ["re[finite[1]]", "im[finite[1]]"]
    assert np.allclose(np.hypot(r.samples[:, 0], r.samples[:, 1]), 1, atol=1e-14)
    angle = np.mod(np.arctan2(r.samples[:, 1], r.samples[:, 0]), 2 * np.pi) / (2 * np.pi)
    hist, _ = np.histogram(angle, bins=10, range=(0, 1))
    assert np.all(np.abs(hist / 20_000 - 0.1) < 0.01)


def test_realize_rejects_divergent():
    from vml.errors import VMLError

    with pytest.raises(VMLError):
        realize_in_Rinfty(ProductMeasure.gaussian("1"), [CoeffSeq("1/sqrt(n)")], mc=10)


def test_chi_config():
    assert chi_from_config({"gaussian": {"scale": 2.0}}).scale == 2.0
    assert chi_from_config({"product": {"cf_rule": "cos"}}).cf_name == "cos"
    c = chi_from_config({"custom": {"t": [-1, 0, 1], "re": [0.5, 1, 0.5]}})
    assert c(np.zeros(1)) == 1


def test_gridded_density_serialization():
    d = bochner_invert(GAUSS_CHI, [1], grid=(6.0, 64))
    back = GriddedDensity.from_dict(json.loads(json.dumps(d.to_dict())))
    assert back.density.tobytes() == d.density.tobytes() and back.coords == d.coords
