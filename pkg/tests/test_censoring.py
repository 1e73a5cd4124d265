from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcgof.censoring import (
    CensoringScheme,
    catalog_lookup,
    catalog_table6,
    expected_uniform,
    format_removals,
    gamma_coefficients,
    parse_removals,
    scheme_family,
    validate_scheme,
)
from pcgof.exceptions import EmptyScheme, IndivisibleM, ParseError, SchemeInconsistent
from pcgof.simulate import sample_uniform_progressive

WIRE_R = (0, 2, 1, 0, 3, 0, 0, 2, 0, 2)


def exact_mu(n, r):
    """E[U_i] as 1 - prod_{j<=i} E[V_j] with V_j ~ Beta(gamma_j, 1)."""
    out, prod, left = [], Fraction(1), n
    for ri in r:
        prod *= Fraction(left, left + 1)
        out.append(1 - prod)
        left -= 1 + ri
    return out


@st.composite
def schemes(draw, max_m=12, max_r=5):
    r = draw(st.lists(st.integers(0, max_r), min_size=1, max_size=max_m))
    return CensoringScheme(len(r) + sum(r), len(r), tuple(r))


class TestValidation:
    def test_inconsistent(self):
        with pytest.raises(SchemeInconsistent):
            validate_scheme(10, 3, [1, 1, 1])

    def test_wrong_length(self):
        with pytest.raises(SchemeInconsistent):
            validate_scheme(10, 3, [7])

    def test_negative_removal(self):
        with pytest.raises(SchemeInconsistent):
            validate_scheme(5, 2, [-1, 4])

    def test_empty(self):
        with pytest.raises(EmptyScheme):
            validate_scheme(3, 0, [])

    def test_valid(self):
        s = validate_scheme(20, 10, WIRE_R)
        assert s.n == 20 and s.m == 10 and not s.is_complete


def test_gamma_wire():
    s = CensoringScheme(20, 10, WIRE_R)
    np.testing.assert_array_equal(gamma_coefficients(s), [20, 19, 16, 14, 13, 9, 8, 7, 4, 3])


def test_gamma_complete():
    np.testing.assert_array_equal(gamma_coefficients(CensoringScheme(5, 5, (0,) * 5)), [5, 4, 3, 2, 1])


def test_mu_complete_closed_form():
    m = 9
    mu = expected_uniform(CensoringScheme(m, m, (0,) * m))
    np.testing.assert_allclose(mu, np.arange(1, m + 1) / (m + 1), rtol=0, atol=1e-15)


def test_mu_wire_values():
    mu = expected_uniform(CensoringScheme(20, 10, WIRE_R))
    printed = [0.0476, 0.0952, 0.1485, 0.2052, 0.2620, 0.3358, 0.4096, 0.4834, 0.5867, 0.6900]
    np.testing.assert_allclose(mu, printed, atol=5e-5)


@given(schemes())
@settings(max_examples=60, deadline=None)
def test_mu_matches_exact_rational(s):
    mu = expected_uniform(s)
    ref = np.array([float(v) for v in exact_mu(s.n, s.r)])
    np.testing.assert_allclose(mu, ref, rtol=1e-13, atol=1e-15)
    assert mu[0] == pytest.approx(1 / (s.n + 1), rel=1e-14)
    assert np.all(np.diff(mu) > 0) and mu[-1] < 1


@pytest.mark.parametrize("label", ["[1]", "[6]", "[15]"])
def test_mu_monte_carlo(label):
    s = catalog_lookup(label)
    u = sample_uniform_progressive(s, np.random.default_rng(7), size=40_000)
    se = u.std(axis=0, ddof=1) / np.sqrt(u.shape[0])
    assert np.all(np.abs(u.mean(axis=0) - expected_uniform(s)) < 4 * se)


def test_catalog():
    cat = catalog_table6()
    assert len(cat) == 27
    for label, s in cat:
        assert s.m + sum(s.r) == s.n
        assert s.label == label
    assert catalog_lookup("21").r[9] == 20
    assert catalog_lookup("[24]").r[:4] == (1, 0, 1, 0)
    with pytest.raises(KeyError):
        catalog_lookup("[28]")


@pytest.mark.parametrize("family,m,n", [(1, 25, 50), (2, 10, 65), (3, 20, 230), (4, 50, 60), (5, 50, 50)])
def test_families(family, m, n):
    s = scheme_family(family, m)
    assert (s.m, s.n) == (m, n)


def test_family4_needs_multiple_of_five():
    with pytest.raises(IndivisibleM):
        scheme_family(4, 12)


def test_removal_round_trip():
    assert parse_removals(format_removals(WIRE_R)) == WIRE_R
    with pytest.raises(ParseError):
        parse_removals("1,a")


def test_key_is_stable_and_ignores_label():
    a = CensoringScheme(20, 10, WIRE_R, "x")
    b = CensoringScheme(20, 10, WIRE_R, "y")
    assert a == b and a.key() == b.key()
    assert a.key() != CensoringScheme(20, 10, WIRE_R[::-1]).key()
