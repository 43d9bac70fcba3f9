import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import j0

from vml import mutations
from vml.charfun import char_functional, continuity_probe, gram_matrix, nondegeneracy_probe, psd_check
from vml.expr import compile_unary
from vml.linfun import CoeffSeq
from vml.measure import CircleMeasure, ProductMeasure

RAD = ProductMeasure.rademacher()
GAUSS = ProductMeasure.gaussian("1")


def test_closed_form_examples():
    assert char_functional(RAD, CoeffSeq.basis(1, math.pi)).value == pytest.approx(-1.0, abs=1e-15)
    assert char_functional(GAUSS, CoeffSeq.basis(1)).value == pytest.approx(math.exp(-0.5), abs=1e-15)


@pytest.mark.parametrize("method", ["closed_form", "monte_carlo"])
@pytest.mark.parametrize("m", [RAD, GAUSS, CircleMeasure(8)], ids=["rad", "gauss", "circle"])
def test_zero_is_exactly_one(m, method):
    est = char_functional(m, CoeffSeq.zero(), method=method)
    assert est.value == 1 and est.std_error == 0


def test_monte_carlo_gaussian_within_3se():
    est = char_functional(GAUSS, CoeffSeq.basis(1), method="monte_carlo", mc=20_000, seed=4)
    assert abs(est.value - math.exp(-0.5)) <= 3 * est.std_error


def test_infinite_support_gaussian():
    # sum (1/n)^2 = pi^2/6
    est = char_functional(GAUSS, CoeffSeq("1/n"), truncation=4096)
    assert est.value.real == pytest.approx(math.exp(-math.pi**2 / 12), abs=2 * est.tail_band + 1e-12)


def test_circle_quadrature_matches_bessel():
    f = CoeffSeq(finite={1: 1.0}, domain="integer")
    assert char_functional(CircleMeasure(4), f).value.real == pytest.approx(j0(1.0), abs=1e-12)


def test_exponential_law_cf():
    m = ProductMeasure.custom(compile_unary("-log(1-u)", "u"), cf=lambda t: 1 / (1 - 1j * t), mean=1.0, variance=1.0)
    est = char_functional(m, CoeffSeq.basis(1), method="monte_carlo", mc=40_000, seed=2)
    assert abs(est.value - (0.5 + 0.5j)) <= 3 * est.std_error


def test_psd_examples():
    rep = psd_check(RAD, [CoeffSeq.zero(), CoeffSeq.basis(1)])
    assert rep.min_eigenvalue == pytest.approx(1 - math.cos(1), abs=1e-14)
    assert np.allclose(rep.gram, [[1, math.cos(1)], [math.cos(1), 1]])
    assert psd_check(GAUSS, [CoeffSeq.zero()]).min_eigenvalue == 1


@given(st.lists(st.lists(st.floats(-2, 2), min_size=1, max_size=5), min_size=2, max_size=8))
def test_gram_psd_property(vectors):
    fs = [CoeffSeq(finite=v) for v in vectors]
    rep = psd_check(GAUSS, fs, truncation=8)
    assert rep.psd and rep.min_eigenvalue >= -1e-8


def test_gram_hermitian_for_circle():
    fs = [CoeffSeq(finite={k: 1.0 + 0.5j}, domain="integer") for k in (-2, 1, 3)]
    G, _ = gram_matrix(CircleMeasure(4), fs)
    assert np.allclose(G, G.conj().T, atol=1e-14)
    assert np.abs(G.imag).max() > 1e-6


def test_conjugation_mutation_detected():
    fs = [CoeffSeq(finite={1: 1.0 + 1.0j}, domain="integer"), CoeffSeq(finite={2: 0.5j}, domain="integer"), CoeffSeq.zero("integer")]
    assert psd_check(CircleMeasure(4), fs).psd
    with mutations.inject("charfun_conj"):
        assert not psd_check(CircleMeasure(4), fs).psd


def test_nondegeneracy():
    rows = nondegeneracy_probe(RAD, [CoeffSeq.basis(1, 2 * math.pi)])
    assert rows[0]["flagged"]
    rows = nondegeneracy_probe(GAUSS, [CoeffSeq.basis(1)])
    assert rows[0]["distance_from_one"] == pytest.approx(1 - math.exp(-0.5), abs=1e-14)
    with pytest.raises(ValueError):
        nondegeneracy_probe(GAUSS, [CoeffSeq.zero()])


def test_continuity_ratios_bounded():
    rows = continuity_probe(GAUSS, CoeffSeq("1/n"), [CoeffSeq.basis(2)])
    # |d/ds exp(-|f+sd|^2/2)| <= sup |f+sd| * exp(...) <= 1
    assert all(r["ratio"] <= 1.0 for r in rows)
