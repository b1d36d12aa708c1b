import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fiberloop.errors import DimensionError, ZeroProbabilityError
from fiberloop.mps import build, canonicalize, product_state
from fiberloop.observables import (
    area_law_bound,
    correlation_series,
    entanglement_entropy,
    entropy_bits,
    entropy_profile,
    expectation_number,
    fit_correlation_length,
    loop_mean_occupation,
    loop_occupation_series,
    occupations,
    saturation_index,
    thermal_schmidt,
    two_point,
)
from fiberloop.oracle import evolve_dense, reduced_entropy

from conftest import single


def test_entropy_bits_simple():
    assert entropy_bits([1.0]) == 0.0
    assert entropy_bits([math.sqrt(0.5)] * 2) == pytest.approx(1.0)
    assert entropy_bits([0.5] * 4) == pytest.approx(2.0)


def test_area_law_bound_values():
    assert area_law_bound(0) == 0.0
    assert area_law_bound(1) == pytest.approx(2.0)
    # g(1/2) = 1.5 log2 1.5 + 0.5
    assert area_law_bound(0.5) == pytest.approx(1.5 * math.log2(1.5) + 0.5)
    with pytest.raises(ValueError):
        area_law_bound(-1)


@settings(max_examples=50, deadline=None)
@given(n=st.floats(0.01, 20.0))
def test_thermal_spectrum_saturates_bound(n):
    lam = thermal_schmidt(n, 4000)
    assert np.sum(lam ** 2) == pytest.approx(1.0, abs=1e-6)
    assert entropy_bits(lam) == pytest.approx(area_law_bound(n), abs=1e-4)
    # mean occupation of the spectrum is n
    assert np.sum(np.arange(4000) * lam ** 2) == pytest.approx(n, rel=1e-4)


def test_thermal_spectrum_ratio():
    lam = thermal_schmidt(1.0, 6)
    np.testing.assert_allclose(lam[1:] / lam[:-1], math.sqrt(0.5))
    np.testing.assert_allclose(thermal_schmidt(0.0, 3), [1, 0, 0])


def test_occupation_recurrence_matches_mps():
    spec = single(0.2, (1, 2, 0, 1, 1, 0), 6)
    m = build(spec)
    series = loop_occupation_series(spec)
    assert series[0] == 0.0
    # the final loop site holds n(N)
    assert expectation_number(m, m.num_sites - 1) == pytest.approx(series[-1], abs=1e-10)
    assert loop_mean_occupation(spec, 3) == pytest.approx(series[3])
    # photon number is conserved
    assert occupations(m).sum() == pytest.approx(spec.total_photons, abs=1e-10)
    with pytest.raises(DimensionError):
        loop_mean_occupation(spec, 7)


def test_entropy_profile_matches_dense():
    spec = single(0.33, (1, 1, 2, 0), 4, phi=0.2)
    c = canonicalize(build(spec))
    s = evolve_dense(spec)
    prof = entropy_profile(c)
    for cut in range(1, 5):
        # first `cut` bins in dense axes are 1..cut
        ref = reduced_entropy(s, range(1, cut + 1))
        assert prof[cut - 1] == pytest.approx(ref, abs=1e-10)
        assert entanglement_entropy(c, cut) == prof[cut - 1]


def test_two_point_matches_dense():
    spec = single(0.22, (1, 2, 1, 0, 1), 5)
    m = build(spec)
    psi = evolve_dense(spec).to_mps_order()
    p = np.abs(psi) ** 2
    grids = np.indices(p.shape)
    for i, x in [(0, 1), (1, 2), (0, 4), (2, 3)]:
        j = i + x
        raw = np.sum(p * grids[i] * grids[j])
        ni, nj = np.sum(p * grids[i]), np.sum(p * grids[j])
        tp = two_point(m, i, x)
        assert tp.raw == pytest.approx(raw, abs=1e-10)
        assert tp.C == pytest.approx(abs(raw - ni * nj), abs=1e-10)
        assert tp.g2 == pytest.approx(raw / ni ** 2, abs=1e-10)
    series = correlation_series(m, 0, [1, 2, 3, 4])
    for x, rec in zip([1, 2, 3, 4], series):
        assert rec.raw == pytest.approx(two_point(m, 0, x).raw, abs=1e-12)


def test_two_point_zero_mean():
    m = product_state([0, 1, 1], 3)
    assert two_point(m, 0, 1).g2 is None
    with pytest.raises(ZeroProbabilityError):
        two_point(m, 0, 1, require_g2=True)
    with pytest.raises(DimensionError):
        two_point(m, 0, 0)
    with pytest.raises(DimensionError):
        two_point(m, 1, 5)


def test_fit_recovers_exponent():
    pts = [(x, 0.3 * math.exp(-0.7 * x)) for x in range(1, 9)]
    fit = fit_correlation_length(pts)
    assert fit.zeta_inv == pytest.approx(0.7, abs=1e-12)
    assert fit.prefactor == pytest.approx(0.3, rel=1e-12)
    assert fit.residual < 1e-12
    with pytest.raises(ValueError):
        fit_correlation_length([(1, 1.0), (2, 0.0), (3, -1.0)])


def test_saturation_index():
    assert saturation_index([0.1, 0.5, 0.96, 1.0]) == 3


def test_area_law_bound_n4():
    assert area_law_bound(4) == pytest.approx(5 * math.log2(5) - 8, abs=1e-12)


def test_one_photon_entropy_and_occupation():
    spec = single(0.25, (1,), 4)
    m = build(spec)
    c = canonicalize(m)
    assert entanglement_entropy(c, 1) == pytest.approx(1.0, abs=1e-12)
    assert expectation_number(m, 0) == pytest.approx(0.5, abs=1e-12)
    assert loop_mean_occupation(spec, 1) == pytest.approx(0.5)


def test_occupation_fixed_point():
    spec = single(0.2, (2,) * 200, 3)
    assert loop_mean_occupation(spec, 200) == pytest.approx(2.0, abs=1e-9)


def test_occupation_bookkeeping():
    """n(i) equals the photons sent in minus those that came out."""
    spec = single(0.15, (1, 1, 0, 1, 1, 1), 6)
    m = build(spec)
    n_bins = [expectation_number(m, k) for k in range(spec.num_bins)]
    for i in range(spec.num_bins + 1):
        audit = sum(spec.photons_per_bin[:i]) - sum(n_bins[:i])
        assert loop_mean_occupation(spec, i) == pytest.approx(audit, abs=1e-8)


def test_vacuum_observables():
    m = build(single(0.25, (0, 0, 0), 3))
    assert np.allclose(occupations(m), 0)
    tp = two_point(m, 0, 1)
    assert tp.raw == 0 and tp.C == 0


def test_two_point_four_bin_example():
    spec = single(0.25, (1,) * 4, 4)
    m = build(spec)
    p = np.abs(evolve_dense(spec).to_mps_order()) ** 2
    g = np.indices(p.shape)
    for i in range(4):
        for j in range(i + 1, 4):
            assert two_point(m, i, j - i).raw == pytest.approx(np.sum(p * g[i] * g[j]), abs=1e-10)


def test_fit_examples():
    fit = fit_correlation_length([(x, 0.3 * 0.5 ** x) for x in range(1, 11)])
    assert fit.zeta_inv == pytest.approx(math.log(2), abs=1e-12)
    assert fit.residual < 1e-12
    assert fit_correlation_length([(x, 0.2) for x in range(1, 6)]).zeta_inv == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("theta", [0.1, 0.25, 0.4])
def test_entropy_saturates_and_respects_bounds(theta):
    spec = single(theta, (1,) * 120, 12)
    prof = entropy_profile(canonicalize(build(spec)))
    n = loop_occupation_series(spec)
    bins = prof[: spec.num_bins]
    assert np.all(np.diff(bins) >= -1e-9)
    for i, e in enumerate(bins, start=1):
        assert e <= area_law_bound(n[i]) + 1e-6
        assert e <= area_law_bound(1) + 1e-6
    assert abs(bins[-1] - bins[-51]) < 1e-3


def test_schmidt_ratios_below_one():
    c = canonicalize(build(single(0.1, (1,) * 150, 12)))
    lam = c.schmidt_values(100)
    assert np.all(lam[1:] / lam[:-1] < 1)
