import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from pcgof.censoring import CensoringScheme, catalog_lookup, expected_uniform, gamma_coefficients
from pcgof.distributions import logistic, normal
from pcgof.exceptions import DegenerateDenominator, DomainError, ParseError
from pcgof.gof import (
    ALL_STATISTICS,
    H,
    balakrishnan_t,
    balakrishnan_t_uniform,
    compute_all,
    edf_statistics,
    expected_normal_scores,
    from_uniforms,
    greenwood,
    h_kernel,
    parse_statistic,
    spacings,
    spacings_k,
    statistics_batch,
    transform,
)
from pcgof.mle import fit_normal
from pcgof.simulate import CensoredSample, sample_progressive

TABLE10 = {
    "C+": 0.0946, "C-": 0.0893, "C": 0.0946, "K": 0.1839, "T1": 0.0021, "T2": 0.0352,
    "G": 6.8499, "Q": 10.9208, "G2": 26.7465, "G3": 63.8562, "T": 0.4568,
}


def exact_normal_scores(scheme, dps=40):
    """E[Z_i] from the mixture-of-powers density of U_i, in high precision."""
    gam = [int(g) for g in gamma_coefficients(scheme)]
    with mpmath.workdps(dps):
        out = []
        for i in range(1, scheme.m + 1):
            c = mpmath.fprod(gam[:i])
            total = mpmath.mpf(0)
            for k in range(i):
                a = mpmath.fprod([mpmath.mpf(1) / (gam[j] - gam[k]) for j in range(i) if j != k])
                g = gam[k]
                f = lambda x, g=g: x * mpmath.npdf(x) * mpmath.ncdf(-x) ** (g - 1)
                total += a * mpmath.quad(f, [-mpmath.inf, -3, 0, 3, mpmath.inf])
            out.append(float(c * total))
    return np.array(out)


class TestTable10:
    def test_statistics(self, wire):
        got = compute_all(wire, [s for s in ALL_STATISTICS if s != H])
        for name, ref in TABLE10.items():
            assert got[name] == pytest.approx(ref, abs=0.005), name

    def test_h_decimal_slip(self, wire):
        # the printed 0.3220 reads 0.0322 once the decimal point is restored
        assert compute_all(wire, [H])["H"] == pytest.approx(0.0322, abs=5e-4)

    def test_u_against_independent_phi(self, wire):
        fit = fit_normal(wire)
        t = transform(wire, fit)
        with mpmath.workdps(30):
            ref = [float(mpmath.ncdf((x - fit.mu_hat) / fit.sigma_hat)) for x in wire.x]
        np.testing.assert_allclose(t.u, ref, rtol=0, atol=1e-10)

    def test_k_step_convention(self, wire):
        # indices past m read as 1; the alternative (repeat u_m) misses the printed G2, G3
        t = transform(wire, fit_normal(wire))
        g = gamma_coefficients(wire.scheme)
        for k, ref in ((2, 26.7465), (3, 63.8562)):
            ext = np.concatenate([[0.0], t.u, np.full(k - 1, t.u[-1])])
            alt = float(np.sum((g * (ext[k:k + t.m] - ext[:t.m])) ** 2))
            assert abs(alt - ref) > 1.0
            assert float(np.sum(spacings_k(t, k) ** 2)) == pytest.approx(ref, abs=0.005)

    def test_t_variants(self, wire):
        # the raw-spacing T reproduces the printed value; the transformed-scale one does not
        assert balakrishnan_t(wire) == pytest.approx(0.4568, abs=0.001)
        assert abs(balakrishnan_t_uniform(transform(wire, fit_normal(wire))) - 0.4568) > 0.005


class TestClosedForms:
    def test_k_is_sum(self, wire):
        e = edf_statistics(transform(wire, fit_normal(wire)))
        assert e["K"] == e["C+"] + e["C-"]
        assert e["C"] == max(e["C+"], e["C-"])

    def test_t_half_for_proportional_spacings(self):
        s = catalog_lookup("[6]")
        x = 3.0 + 2.0 * expected_normal_scores(s)
        assert balakrishnan_t(CensoredSample(s, x)) == pytest.approx(0.5, abs=1e-14)

    def test_perfect_fit_is_zero(self):
        s = catalog_lookup("[15]")
        t = from_uniforms(s, expected_uniform(s))
        e = edf_statistics(t)
        assert e["C+"] == pytest.approx(0.0, abs=1e-15) and e["T1"] == pytest.approx(0.0, abs=1e-30)
        assert float(np.mean(h_kernel(t.u / t.mu))) == pytest.approx(0.0, abs=1e-28)

    def test_h_kernel(self):
        assert h_kernel(1.0) == 0.0
        assert h_kernel(2.0) == pytest.approx(0.2)
        assert h_kernel(1e9) == pytest.approx(1.0, abs=1e-8)
        with pytest.raises(DomainError):
            h_kernel(0.0)

    def test_t_degenerate(self):
        s = CensoringScheme(4, 4, (0,) * 4)
        with pytest.raises(DegenerateDenominator):
            balakrishnan_t(CensoredSample(s, [1.0, 1.0, 1.0, 1.0]))
        with pytest.raises(DomainError):
            balakrishnan_t(CensoredSample(CensoringScheme(2, 2, (0, 0)), [0.0, 1.0]))


@pytest.mark.parametrize("scheme", [
    CensoringScheme(20, 10, (0, 2, 1, 0, 3, 0, 0, 2, 0, 2)),
    CensoringScheme(20, 8, (12,) + (0,) * 7),
    CensoringScheme(5, 5, (0,) * 5),
    CensoringScheme(12, 6, (0, 1, 2, 0, 0, 3)),
], ids=["wire", "first", "complete5", "mixed"])
def test_normal_scores_against_exact(scheme):
    np.testing.assert_allclose(expected_normal_scores(scheme), exact_normal_scores(scheme), atol=1e-11)


def test_normal_scores_complete_known():
    # expected maximum of five standard normals
    assert expected_normal_scores(CensoringScheme(5, 5, (0,) * 5))[-1] == pytest.approx(1.1629644736, abs=1e-9)


@st.composite
def uniform_samples(draw):
    r = draw(st.lists(st.integers(0, 4), min_size=2, max_size=15))
    s = CensoringScheme(len(r) + sum(r), len(r), tuple(r))
    u = np.sort(draw(st.lists(st.floats(1e-6, 1 - 1e-6), min_size=s.m, max_size=s.m)))
    return s, u


@given(uniform_samples())
@settings(max_examples=200, deadline=None)
def test_spacing_sum_identity(data):
    s, u = data
    t = from_uniforms(s, u)
    total = spacings(t).sum()
    assert total == pytest.approx(float(np.sum((s.removals + 1) * t.u)), abs=1e-12)
    assert greenwood(spacings(t)) >= 0
    assert np.all(spacings_k(t, 1) == spacings(t))


@given(a=st.floats(1e-3, 1e3), b=st.floats(-1e4, 1e4), seed=st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_affine_invariance(a, b, seed):
    s = catalog_lookup(["[1]", "[6]", "[12]", "[15]"][seed % 4])
    smp = sample_progressive(s, logistic(), np.random.default_rng(seed))
    base = compute_all(smp)
    moved = compute_all(smp.affine(a, b))
    for name, v in base.items():
        assert moved[name] == pytest.approx(v, abs=1e-4), name


def test_batch_matches_single():
    s = catalog_lookup("[9]")
    x = sample_progressive(s, normal(), np.random.default_rng(4), size=20)
    values, ok = statistics_batch(x, s)
    assert ok.all()
    for i in (0, 11):
        single = compute_all(CensoredSample(s, x[i]))
        for name, v in single.items():
            assert values[name][i] == pytest.approx(v, rel=1e-12, abs=1e-15), name


def test_batch_degenerate_row_is_nan():
    s = CensoringScheme(6, 3, (1, 1, 1))
    values, ok = statistics_batch(np.array([[1.0, 1.0, 1.0], [0.0, 0.5, 2.0]]), s)
    assert not ok[0] and np.isnan(values["H"][0]) and ok[1] and np.isfinite(values["H"][1])


def test_statistics_large_under_alternatives():
    # mean H grows when the data are heavy tailed
    s = catalog_lookup("[15]")
    from pcgof.distributions import student_t
    h0 = statistics_batch(sample_progressive(s, normal(), np.random.default_rng(5), size=2000), s, [H])[0]["H"]
    h1 = statistics_batch(sample_progressive(s, student_t(1), np.random.default_rng(5), size=2000), s, [H])[0]["H"]
    assert h1.mean() > 1.5 * h0.mean()


@pytest.mark.parametrize("text,name", [("H", "H"), ("c+", "C+"), ("CMinus", "C-"), ("g4", "G4"),
                                       ("Greenwood", "G"), ("qm", "Q"), ("T", "T"), ("t1", "T1")])
def test_parse_statistic(text, name):
    assert parse_statistic(text).name == name


def test_parse_statistic_unknown():
    with pytest.raises(ParseError):
        parse_statistic("AD")


def test_two_sided_flag():
    assert [k.name for k in ALL_STATISTICS if k.two_sided] == ["T"]
