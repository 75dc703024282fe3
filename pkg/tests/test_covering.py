import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockdom.covering import (build_covering, cardinality_in_disk, harmonic_approximation, overlap_count,
                              overlap_ladder, summability_sum, uncovered_points)
from fockdom.errors import DomainTooSmall, EmptyGrid, ExponentTooSmall, IllConditionedFit
from fockdom.weights import abs2, abs2_re, abs_pow, re_weight

RHO = 1 / (2 * math.sqrt(math.pi))


@pytest.fixture(scope="module")
def cov():
    return build_covering(abs2(), (-4, -4, 4, 4), 0.25, 120)


@settings(max_examples=12)
@given(st.floats(1.0, 3.0), st.floats(0.5, 2.0), st.sampled_from([0.1, 0.25, 0.5]))
def test_net_is_separated_and_covering(wd, ht, delta):
    c = build_covering(abs2(), (-wd, -1, wd, -1 + ht), delta, 60)
    assert c.min_separation_ratio() >= 1 - 1e-12
    assert uncovered_points(c) == 0
    # maximal over a candidate lattice of pitch delta*rho/2
    assert c.r0_effective <= delta * (1 + 1 / (2 * math.sqrt(2))) * (1 + 1e-6)


def test_variable_rho_covering():
    c = build_covering(abs_pow(3.0), (-2, -2, 2, 2), 0.25, 80)
    assert c.min_separation_ratio() >= 1 - 1e-9
    assert uncovered_points(c) == 0
    assert c.rhos.max() > 1.5 * c.rhos.min()
    assert c.kappa == pytest.approx(1 / 3, abs=2e-3)


def test_degenerate_domain():
    with pytest.raises(DomainTooSmall):
        build_covering(abs2(), (1, 0, 0, 1))
    with pytest.raises(ValueError):
        build_covering(abs2(), (0, 0, 1, 1), delta=0.9)


def test_kappa_abs2(cov):
    assert cov.kappa == 0.5


def test_small_s_overlap_is_one(cov):
    # disks of radius delta*rho/2 are pairwise disjoint
    assert overlap_count(cov, 0.1).n_measured == 1


def test_overlap_grows_and_fits(cov):
    lad = overlap_ladder(cov, [1, 2, 4], probe_n=80)
    n = [r.n_measured for r in lad.reports]
    assert n == sorted(n) and n[0] >= 1
    assert lad.holds()
    assert lad.slope <= lad.bound_exponent
    assert lad.bound_exponent == pytest.approx(1 + 2 + 0.5 * 0.1 / 1.5)


def test_overlap_against_brute_count(cov):
    s = 2.0
    rep = overlap_count(cov, s, probe_n=40)
    x0, x1, nx, y0, y1, ny = rep.probe_grid
    z = (np.linspace(x0, x1, nx)[None, :] + 1j * np.linspace(y0, y1, ny)[:, None]).ravel()
    cnt = (np.abs(z[:, None] - cov.centers[None, :]) < s * cov.rhos[None, :]).sum(axis=1)
    assert rep.n_measured == cnt.max()


def test_overlap_empty_grid(cov):
    with pytest.raises(EmptyGrid):
        overlap_count(cov, 100.0)


def test_cardinality(cov):
    z, s = 0.3 + 0.2j, 3.0
    res = cardinality_in_disk(cov, z, s)
    assert res.count == int(np.sum(np.abs(cov.centers - z) < s * RHO))
    assert not res.boundary_truncated
    assert cardinality_in_disk(cov, 3.9, 3.0).boundary_truncated
    with pytest.raises(ValueError):
        cardinality_in_disk(cov, 0, 1.0)


def test_summability_direct_sum(cov):
    rep = summability_sum(cov, 0.1j, 2.0, 4.0)
    d = np.abs(cov.centers - 0.1j)
    keep = d >= 2.0 * RHO
    assert rep.sum_value == pytest.approx(np.sum((cov.rhos[keep] / d[keep]) ** 4), rel=1e-12)
    assert rep.n_terms == keep.sum()
    assert 0 < rep.truncation_tail_bound < np.inf


def test_summability_monotone(cov):
    sums = [summability_sum(cov, 0, r, 4.0).sum_value for r in (1, 2, 4, 8)]
    assert all(b <= a for a, b in zip(sums, sums[1:]))


@pytest.mark.parametrize("m", [3.0, 2.0])
def test_summability_exponent_too_small(cov, m):
    with pytest.raises(ExponentTooSmall):
        summability_sum(cov, 0, 2.0, m)


@pytest.mark.parametrize("sigma", [0.5, 1, 2, 4])
def test_harmonic_abs2(sigma):
    # |z|^2 - |a|^2 = 2 Re(conj(a)(z-a)) + |z-a|^2 and |z-a|^2 is orthogonal to the harmonic span
    h = harmonic_approximation(abs2(), 1 - 0.5j, sigma)
    assert h.a_sigma == pytest.approx(sigma ** 2 / (4 * math.pi), abs=1e-9)
    assert h.h_coeffs[0] == pytest.approx([2.0, -1.0], abs=1e-9)  # (2 Re a, 2 Im a)


def test_harmonic_perturbation_is_absorbed():
    a = harmonic_approximation(abs2(), 0.5j, 2.0)
    b = harmonic_approximation(abs2_re(0.3), 0.5j, 2.0)
    assert b.a_sigma == pytest.approx(a.a_sigma, abs=1e-9)


def test_harmonic_weight_exact():
    h = harmonic_approximation(re_weight(), 2 + 1j, 3.0)
    assert h.a_sigma <= 1e-10


def test_holomorphic_completion():
    h = harmonic_approximation(abs_pow(3.0), 0.7 + 0.1j, 1.0, degree=5)
    z = h.center + 0.5 * h.scale * np.exp(1j * np.linspace(0, 6, 40))
    np.testing.assert_allclose(h.H(z).real, h.h(z), atol=1e-10)
    assert abs(h.H(h.center)) < 1e-14


def test_harmonic_preconditions():
    with pytest.raises(ValueError):
        harmonic_approximation(abs2(), 0, 1.0, degree=0)
    with pytest.raises(IllConditionedFit):
        harmonic_approximation(abs2(), 0, 1.0, degree=12, cond_max=1.0001)
