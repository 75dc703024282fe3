import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gammainc

from fockdom.errors import ConfigParseError, HypothesisUnsatisfied, InvalidLevel
from fockdom.regions import Complement, Disk, Empty, Full, HalfPlane, parse_region
from fockdom.sampling import build_truncation
from fockdom.toeplitz import (SymbolFunction, assemble_toeplitz, const, inverse_norm_bound, invertibility_check,
                              level_scan, mix, parse_symbol)
from fockdom.weights import abs2


@pytest.fixture(scope="module")
def t10():
    return build_truncation(abs2(), 10)


def test_identity_symbol(t10):
    v = const(1)
    T = assemble_toeplitz(t10, v)
    rep = invertibility_check(T, v, 1.0, "auto", t10)
    assert rep.inv_norm == pytest.approx(1.0, abs=1e-8)
    assert rep.bound == pytest.approx(1.0, abs=1e-6)  # sqrt(1 - C^2) amplifies round-off in C
    assert rep.bound_holds and rep.step_holds


def test_half_constant_symbol(t10):
    # T = I/2: inverse norm 2, and the bound at s = v_max with C = 1 is 1/v_max = 2
    v = const(0.5)
    rep = invertibility_check(assemble_toeplitz(t10, v), v, 0.5, "auto", t10)
    assert rep.inv_norm == pytest.approx(2.0, abs=1e-8)
    assert rep.bound == pytest.approx(2.0)


@pytest.mark.parametrize("base,R", [(0.2, 0.5), (0.6, 1.0), (0.0, 1.5)])
def test_radial_mixture_is_diagonal(t10, base, R):
    v = mix(base, Complement(Disk(0, 0, R)))
    T = assemble_toeplitz(t10, v).T
    P = gammainc(np.arange(11) + 1, 2 * R * R)
    np.testing.assert_allclose(np.diag(T).real, base * P + (1 - P), atol=1e-9)
    assert np.max(np.abs(T - np.diag(np.diag(T)))) < 1e-9


@settings(max_examples=10)
@given(st.floats(0.1, 5.0))
def test_scaling_is_exact(t10, alpha):
    v = mix(0.3, HalfPlane(0.2))
    a = assemble_toeplitz(t10, v, check_area=False).T
    b = assemble_toeplitz(t10, v.scaled(alpha), check_area=False).T
    np.testing.assert_allclose(b, alpha * a, rtol=1e-14, atol=1e-15)


def test_spectrum_within_symbol_range(t10):
    v = SymbolFunction(((0.9, Disk(0.2, 0, 0.6)), (0.4, HalfPlane(0))), 0.1)
    ev = np.linalg.eigvalsh(assemble_toeplitz(t10, v).T)
    assert ev[0] >= 0.1 - 1e-9 and ev[-1] <= 0.9 + 1e-9


def test_first_piece_wins():
    v = SymbolFunction(((1.0, Disk(0, 0, 1)), (0.5, Disk(0, 0, 2))), 0.0)
    np.testing.assert_array_equal(v(np.array([0, 1.5, 3])), [1.0, 0.5, 0.0])
    assert v.level_region(0.75).expr() == "disk(0, 0, 1)"
    assert isinstance(v.level_region(0.0), Full)
    assert isinstance(v.level_region(2.0), Empty)


def test_level_region_uses_closed_sublevel():
    v = mix(0.5, Disk(0, 0, 1))
    assert isinstance(v.level_region(0.5), Full)


@pytest.mark.parametrize("src", ["const(1)", "mix(0.3, complement(disk(0, 0, 0.5)), top=1)",
                                 "pieces(0.1, 0.9, disk(0, 0, 1), 0.5, halfplane(0))",
                                 "scaled(2.5, mix(0.2, disk(1, 0, 0.5), top=1))"])
def test_symbol_round_trip(src):
    v = parse_symbol(src)
    assert parse_symbol(v.expr()).expr() == v.expr()


@pytest.mark.parametrize("bad", ["const(-1)", "mix(0.3)", "blob(1)", "scaled(0, const(1))", "const(", "pieces(1, 2)"])
def test_symbol_errors(bad):
    with pytest.raises(ConfigParseError):
        parse_symbol(bad)


def test_invalid_levels(t10):
    v = mix(0.2, Disk(0, 0, 1))
    T = assemble_toeplitz(t10, v)
    for s in (0.0, -1.0, 1.5):
        with pytest.raises(InvalidLevel):
            invertibility_check(T, v, s, "auto", t10)
    far = mix(0.2, Disk(50, 50, 0.1))
    with pytest.raises(InvalidLevel):
        invertibility_check(assemble_toeplitz(t10, far, check_area=False), far, 1.0, "auto", t10)


def test_bound_formula():
    assert inverse_norm_bound(1.0, 1.0, 1.0) == 1.0
    assert inverse_norm_bound(2.0, 1.0, 0.0) == math.inf
    x = 0.6
    assert inverse_norm_bound(1.0, x, 1.0) == pytest.approx(1 / (1 - math.sqrt(1 - x * x)))
    with pytest.raises(HypothesisUnsatisfied):
        inverse_norm_bound(1.0, 1.0, 1.2)


def test_supplied_constant(t10):
    v = mix(0.4, Complement(Disk(0, 0, 0.5)))
    T = assemble_toeplitz(t10, v)
    auto = invertibility_check(T, v, 1.0, "auto", t10)
    given_ = invertibility_check(T, v, 1.0, auto.C)
    assert given_.bound == auto.bound and given_.C_source == "supplied"
    with pytest.raises(ValueError):
        invertibility_check(T, v, 1.0, "auto")


def test_level_scan_skips_invalid(t10):
    v = mix(0.3, parse_region("complement(disk(0, 0, 0.5))"))
    reps = level_scan(t10, v, [0.1, 0.3, 0.7, 1.0, 2.0])
    assert [r.s for r in reps] == [0.1, 0.3, 0.7, 1.0]
    assert all(r.bound_holds and r.step_holds for r in reps)
