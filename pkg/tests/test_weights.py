import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from fockdom.errors import (ConfigParseError, InsufficientSamples, MassNeverReachesOne, PairOutsideDisk)
from fockdom.weights import (abs2, abs2_re, abs_pow, adapted_mass, disk_mass, doubling_constant, growth_exponent,
                             re_weight, rho, rho_comparison_check, rho_field, weight_from_name)

RHO_ABS2 = 1.0 / (2.0 * math.sqrt(math.pi))


def flux_mass(alpha, z, t):
    """mu(D(z,t)) for |z|^alpha as the outward flux of grad w through the circle."""
    def integrand(th):
        e = complex(math.cos(th), math.sin(th))
        zeta = z + t * e
        r = abs(zeta)
        if r == 0:
            return 0.0
        grad = alpha * r ** (alpha - 2) * zeta
        return (grad.conjugate() * e).real * t
    val, _ = quad(integrand, 0, 2 * math.pi, limit=400, epsabs=1e-13, epsrel=1e-13,
                  points=[math.pi] if abs(abs(z) - t) < 1e-12 else None)
    return val


def test_abs2_rho_value():
    assert abs(rho(abs2(), 0j) - RHO_ABS2) < 1e-10


@given(st.floats(0.1, 10.0))
def test_scaled_abs2_rho(a):
    assert math.isclose(rho(abs2(a), 1 + 2j), 1 / (2 * math.sqrt(a * math.pi)), rel_tol=1e-9)


@pytest.mark.parametrize("alpha", [1.0, 3.0])
def test_abs_pow_rho_at_origin(alpha):
    assert abs(rho(abs_pow(alpha), 0j) - (2 * math.pi * alpha) ** (-1 / alpha)) < 1e-8


@pytest.mark.parametrize("alpha", [1.0, 1.5, 3.0])
@pytest.mark.parametrize("z,t", [(0.7 + 0.2j, 0.3), (0.5, 0.5), (0.3, 1.2), (2 - 1j, 0.8)])
def test_disk_mass_against_flux_oracle(alpha, z, t):
    assert abs(disk_mass(abs_pow(alpha), z, t) - flux_mass(alpha, complex(z), t)) < 1e-9


def test_rho_solves_unit_mass():
    w = abs_pow(3.0)
    for z in [0.5, 1 + 1j, -2.5j]:
        r = rho(w, z)
        assert abs(disk_mass(w, z, r) - 1.0) < 1e-8


def test_rho_field_matches_pointwise():
    w = abs_pow(3.0)
    pts = np.array([0, 0.3, 1 + 1j, -2.2 + 0.4j, 3j])
    ref = np.array([rho(w, p) for p in pts])
    np.testing.assert_allclose(rho_field(w, pts), ref, rtol=1e-6)
    np.testing.assert_allclose(rho_field(abs2(), pts), RHO_ABS2, rtol=1e-10)


def test_harmonic_weight_has_no_rho():
    with pytest.raises(MassNeverReachesOne):
        rho(re_weight(), 0j)


def test_harmonic_perturbation_leaves_rho():
    assert math.isclose(rho(abs2_re(0.3), 2 + 1j), RHO_ABS2, rel_tol=1e-10)


@given(st.complex_numbers(max_magnitude=20), st.sampled_from([1.5, 2.0, 4.0, 8.0]))
def test_adapted_mass_is_r_squared(z, r):
    assert math.isclose(adapted_mass(abs2(), z, r), r * r, rel_tol=1e-6)


def test_growth_exponent_abs2():
    rep = growth_exponent(abs2(), [0, 3 + 1j, -5j], [1.5, 2, 4, 8])
    assert rep.kappa_fit == 0.5
    assert math.isclose(rep.c_mu_estimate, 4.0, rel_tol=1e-12)


def test_growth_exponent_abs_pow3():
    # mu(D^r(0)) = r^3 so kappa = 1/3
    rep = growth_exponent(abs_pow(3.0), [0], [1.5, 2, 4, 8])
    assert rep.kappa_fit == pytest.approx(1 / 3, abs=1e-3)


def test_growth_exponent_needs_radii():
    with pytest.raises(InsufficientSamples):
        growth_exponent(abs2(), [0], [2, 4])
    with pytest.raises(ValueError):
        growth_exponent(abs2(), [0], [0.5, 2, 4])


def test_doubling_constant_abs2():
    assert doubling_constant(abs2(), [0, 1j], [0.1, 1, 3]) == pytest.approx(4.0)


def test_rho_comparison_pairs():
    rep = rho_comparison_check(abs_pow(3.0), [(1.0, 1.1, 1.0), (0.5j, 0.6j, 2.0)], kappa=1 / 3)
    assert rep["worst_ratio"] <= 1.0 + 1e-9
    with pytest.raises(PairOutsideDisk):
        rho_comparison_check(abs2(), [(0, 5, 1.0)], kappa=0.5)


def test_weight_names():
    assert weight_from_name("abs_pow:alpha=3").params["alpha"] == 3.0
    assert weight_from_name("abs2").name == "abs2"
    for bad in ["nope", "abs_pow:alpha", "abs_pow:alpha=x", "abs2:foo=1"]:
        with pytest.raises(ConfigParseError):
            weight_from_name(bad)
