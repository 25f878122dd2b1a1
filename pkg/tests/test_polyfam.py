from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wml.errors import (
    ConstantPolynomial,
    DuplicatePolynomial,
    EmptyFamily,
    KOutOfRange,
    NuOutOfRange,
    ParseError,
    WeightTableTooShort,
)
from wml.polyfam import (
    IntPolynomial,
    PolynomialFamily,
    WeightSpec,
    classical_family,
    exponent_report,
    format_fraction,
    individual_bound,
    parse_family,
    parse_polynomial,
    wronskian,
)

T = IntPolynomial.monomial(1)


def test_parse_quadratic_family():
    fam = parse_family("T^2; T")
    assert fam.d == 2
    assert fam.degrees == (2, 1)


def test_parse_classical_cubic():
    fam = parse_family("T; T^2; T^3")
    assert fam == classical_family(3)
    assert fam.is_classical()


def test_parse_rejects_constant():
    with pytest.raises(ConstantPolynomial):
        parse_family("5; T")


def test_parse_rejects_duplicates_and_empty():
    with pytest.raises(DuplicatePolynomial):
        parse_family("T; 1*T")
    with pytest.raises(EmptyFamily):
        parse_family("  ")
    with pytest.raises(ParseError):
        parse_family("T^; x")


def test_parse_coefficients():
    p = parse_polynomial("3T^2 - 2*T + 1")
    assert p.coefficients == (1, -2, 3)
    assert p(2) == 9
    assert str(parse_polynomial("-T^3 + T")) == "-T^3 + T"


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=5), st.integers(-20, 20))
def test_polynomial_evaluation_and_shift(coeffs, K):
    p = IntPolynomial(tuple(coeffs))
    q = p.shift(K)
    for n in range(-3, 4):
        assert q(n) == p(n + K)
    assert p.values(K, 4) == [p(K + i) for i in range(1, 5)]


@given(
    st.lists(st.integers(-9, 9), min_size=1, max_size=4),
    st.lists(st.integers(-9, 9), min_size=1, max_size=4),
)
def test_ring_operations(a, b):
    p, q = IntPolynomial(tuple(a)), IntPolynomial(tuple(b))
    for n in range(-2, 3):
        assert (p + q)(n) == p(n) + q(n)
        assert (p - q)(n) == p(n) - q(n)
        assert (p * q)(n) == p(n) * q(n)
    # product rule
    assert (p * q).derivative() == p.derivative() * q + p * q.derivative()


def test_wronskian_examples():
    assert wronskian(parse_family("T; T^2")) == IntPolynomial.monomial(2)
    assert wronskian(parse_family("T; T^2; T^3")) == IntPolynomial.monomial(3, 2)
    assert wronskian(parse_family("T; 2T")).is_zero()


@pytest.mark.parametrize("d", range(1, 9))
def test_wronskian_classical_nonzero(d):
    assert not wronskian(classical_family(d)).is_zero()


@given(st.integers(1, 4), st.integers(-5, 5).filter(lambda c: c != 0), st.integers(1, 3))
def test_wronskian_vanishes_for_proportional_pair(deg, c, extra):
    p = IntPolynomial.monomial(deg)
    fam = PolynomialFamily((p, p * c, IntPolynomial.monomial(deg + extra)) if c != 1 else (p, p * -1))
    assert wronskian(fam).is_zero()


def test_exponent_examples():
    rep = exponent_report(parse_family("T^2; T"), 1)
    assert (rep.s, rep.sigma_k, rep.mu) == (3, 1, Fraction(5, 7))
    assert 2 * rep.mu == Fraction(10, 7)
    rep3 = exponent_report(parse_family("T^3; T^2; T"), 1)
    assert rep3.mu == Fraction(11, 14) and 4 * rep3.mu == Fraction(22, 7)
    assert rep3.mu_d == Fraction(11, 14)
    assert exponent_report(classical_family(2), 1).mu_d == Fraction(5, 7)


@pytest.mark.parametrize("d", range(1, 7))
def test_k_equals_d_recovers_vinogradov(d):
    rep = exponent_report(classical_family(d), d)
    assert rep.sigma_k == 0 and rep.mu == Fraction(1, 2)
    assert rep.mu * 2 * rep.s == rep.s


@pytest.mark.parametrize("d", range(1, 7))
def test_nontrivial_iff_sigma_below_s(d):
    fam = classical_family(d)
    for k in range(1, d + 1):
        rep = exponent_report(fam, k)
        assert (rep.mu < 1) == (rep.sigma_k < rep.s)
        assert rep.delta_CS < rep.delta_W
        assert rep.rho_max == 2 * rep.s + d - k
        # recomputing from the parts is bit-for-bit identical
        assert rep.mu == (rep.s + rep.sigma_k + d - k) / (2 * rep.s + d - k)


def test_sigma_tilde_dominates_every_ordering():
    base = list(classical_family(4).polys)
    for perm in permutations(base):
        fam = PolynomialFamily(tuple(perm))
        for k in range(1, 5):
            rep = exponent_report(fam, k)
            assert rep.sigma_tilde_k >= rep.sigma_k


def test_mu_d_only_for_full_degree_set():
    assert exponent_report(parse_family("T^2; T^3"), 1).mu_d is None


def test_k_out_of_range():
    with pytest.raises(KOutOfRange):
        exponent_report(classical_family(2), 3)
    with pytest.raises(KOutOfRange):
        exponent_report(classical_family(2), 0)


def test_degenerate_family_warns():
    rep = exponent_report(parse_family("T; 2T"), 1)
    assert not rep.wronskian_nonzero and rep.warnings


def test_report_renders_fractions():
    out = exponent_report(parse_family("T^2; T"), 1).as_dict()
    assert out["mu"] == "5/7" and out["s"] == "3"
    assert format_fraction(Fraction(4, 2)) == "2"


def test_theta_exponent():
    rep = exponent_report(classical_family(2), 1, Fraction(1, 2))
    # (s + sigma_0 + d - (delta+1) theta k) / (2s + d - k theta)
    assert rep.mu_theta == Fraction(3 + 3 + 2 - 1, 6 + 2 - Fraction(1, 2))


def test_individual_bound():
    assert individual_bound(3, 2, 1000, 1000) == pytest.approx(379.77, abs=0.01)
    assert individual_bound(2, 2, 31, 100) == pytest.approx(21.3, abs=0.05)
    assert individual_bound(3, 2, 1, 500) >= 500
    with pytest.raises(NuOutOfRange):
        individual_bound(3, 4, 10, 10)


def test_weight_tables():
    w = WeightSpec.from_table([1, 2j, -1])
    assert list(w.values(0, 3)) == [1, 2j, -1]
    assert w.abs_sum(0, 3) == 4
    with pytest.raises(WeightTableTooShort):
        w.values(1, 3)
    assert list(WeightSpec.unit().values(10, 2)) == [1, 1]
