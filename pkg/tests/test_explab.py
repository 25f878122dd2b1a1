import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wml.errors import BoxBudgetExceeded, DegenerateLadder, RhoExceedsB, ValidityWarning
from wml.explab import (
    TrigPolynomial,
    box_count_experiment,
    box_counts,
    ceil_power,
    dilation_invariance_check,
    discrepancy_moment_estimate,
    fit_exponent,
    level_set_moment_exponent,
    measure_from_samples,
    measure_superlevel,
    moment_estimate,
    moment_from_samples,
    pointwise_majorant,
    sample_sup,
    short_moment_estimate,
    torus_grid_moment,
    uniform_points,
)
from wml.explab.majorant import majorant_ratio
from wml.explab.sampling import parallel_chunks
from wml.polyfam import WeightSpec, classical_family, parse_family
from wml.supopt import BudgetSpec, sup_short

UNIT = WeightSpec.unit()
QUAD = parse_family("T^2; T")
LINEAR = parse_family("T")


# -- sampling ---------------------------------------------------------------


@given(st.integers(0, 2**40), st.integers(0, 500), st.integers(1, 300), st.integers(1, 9))
def test_points_do_not_depend_on_chunking(seed, start, count, dim):
    whole = uniform_points(seed, 0, start + count, dim)
    part = uniform_points(seed, start, start + count, dim)
    assert np.array_equal(whole[start:], part)
    assert np.all((part >= 0) & (part < 1))


def test_parallel_chunks_keep_order():
    out = parallel_chunks(lambda a, b: list(range(a, b)), 1000, threads=4, chunk=7)
    assert [i for c in out for i in c] == list(range(1000))


def test_thread_count_does_not_change_samples():
    a = sample_sup(QUAD, UNIT, 1, 40, 300, seed=9, threads=1)
    b = sample_sup(QUAD, UNIT, 1, 40, 300, seed=9, threads=4)
    assert np.array_equal(a.lower, b.lower) and np.array_equal(a.upper, b.upper)


# -- moments ----------------------------------------------------------------


def test_quartic_quadrature_is_44():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        est = moment_estimate(LINEAR, UNIT, 1, 4, 4, method="quadrature", quadrature_points=20000)
    assert est.mean_lower == pytest.approx(44, abs=1e-4)
    assert est.mean_upper == est.mean_lower


def test_rho_beyond_validity_warns():
    with pytest.warns(ValidityWarning):
        moment_estimate(LINEAR, UNIT, 1, 4, 4, samples=10, seed=1)


@pytest.mark.parametrize("fam", [parse_family("T"), parse_family("T; T^2"), parse_family("T^2; T^3")])
def test_square_moment_is_sum_of_squares(fam):
    a = [1.0, -0.5j, 2.0, 0.25, 1 + 1j, 0.5, -1.0, 0.3]
    w = WeightSpec.from_table(a)
    N = len(a)
    M = 2 * max(abs(p(N)) for p in fam.polys) + 1
    got = torus_grid_moment(fam, w, 2, N, M)
    assert got == pytest.approx(sum(abs(c) ** 2 for c in a), abs=1e-9)


def test_n_equals_one_is_one():
    for k in (1, 2):
        est = moment_estimate(QUAD, UNIT, k, 3.0, 1, samples=50, seed=3)
        assert est.mean_lower == pytest.approx(1) and est.mean_upper == pytest.approx(1)
    assert short_moment_estimate(3, 2, 1, samples=20, seed=1).mean_upper == pytest.approx(1)
    assert discrepancy_moment_estimate(LINEAR, 1, 1, 1, samples=20, seed=2).mean_lower == pytest.approx(1)


def test_moment_invariants():
    samp = sample_sup(QUAD, UNIT, 1, 30, 200, seed=4)
    for rho in (0.5, 1, 2, 5):
        est = moment_from_samples(samp, rho)
        assert 0 <= est.mean_lower <= est.mean_upper <= 30**rho * (1 + 1e-12)


def test_power_mean_monotone():
    samp = sample_sup(QUAD, UNIT, 1, 24, 300, seed=5)
    rhos = [0.5, 1, 1.5, 2, 3, 4]
    for side in ("lower", "upper"):
        means = [getattr(moment_from_samples(samp, r), f"mean_{side}") ** (1 / r) for r in rhos]
        assert all(a <= b * (1 + 1e-12) for a, b in zip(means, means[1:]))


def test_discrepancy_moment_bounds():
    est = discrepancy_moment_estimate(QUAD, 1, 2, 16, samples=30, seed=8)
    assert est.mean_upper <= 16**2
    with pytest.raises(ValueError):
        discrepancy_moment_estimate(QUAD, 1, 0.5, 16, samples=3, seed=8)


def test_short_moment_majorises_integer_shifts():
    d, N = 2, 16
    rng = np.random.default_rng(2)
    for u in rng.random((5, 2)):
        best = sup_short(float(u[1]), d, N)
        from wml.sumeval import eval_sum

        for K in range(-5, 6):
            v = abs(eval_sum(classical_family(2), UNIT, u, (), N, K))
            assert v <= best.upper + 1e-9


# -- measures ---------------------------------------------------------------


def test_measure_examples():
    low, high = measure_superlevel(QUAD, UNIT, 1, 64, [1.0, 64.0], 200, seed=12)
    assert low.fraction_lower == 1.0
    assert high.fraction_upper <= 0.02
    with pytest.raises(ValueError):
        measure_superlevel(QUAD, UNIT, 1, 64, 0.5, 10, seed=1)


def test_measure_antitone():
    samp = sample_sup(QUAD, UNIT, 1, 48, 300, seed=6)
    levels = np.linspace(1, 48, 25)
    ests = [measure_from_samples(samp, t) for t in levels]
    for a, b in zip(ests, ests[1:]):
        assert b.fraction_lower <= a.fraction_lower and b.fraction_upper <= a.fraction_upper
    for e in ests:
        assert 0 <= e.fraction_lower <= e.fraction_upper <= 1


# -- box counting -----------------------------------------------------------


def test_box_widths_from_ceiling_formula():
    fam = parse_family("T; T^2")
    assert box_counts(fam, 16, 0.75, 0.05) == (37, 589)
    assert ceil_power(16, Fraction(1, 2)) == 4
    assert ceil_power(10, Fraction(1, 2)) == 4
    rep = box_count_experiment(fam, UNIT, 16, 0.75, levels=0)
    assert rep.U == 21793 and rep.zeta == (Fraction(1, 37), Fraction(1, 589))


def test_box_count_invariants():
    fam = parse_family("T; T^2")
    for alpha in (0.5, 0.7):
        rep = box_count_experiment(fam, UNIT, 6, alpha)
        assert rep.marked_lower <= rep.marked <= rep.U
    rep = box_count_experiment(fam, UNIT, 6, 0.5, levels=0)
    assert rep.bound >= rep.U


def test_box_marking_is_a_superset():
    # a dense check: every probe above the threshold falls in a marked box
    fam = parse_family("T; T^2")
    N, alpha = 6, 0.7
    rep = box_count_experiment(fam, UNIT, N, alpha, levels=2)
    c1, c2 = (z.denominator for z in rep.zeta)
    from wml.explab.boxcount import _center_values

    rng = np.random.default_rng(0)
    U = rng.random((20000, 2))
    from wml.sumeval import eval_points

    vals, _ = eval_points(fam, UNIT, U, N)
    hot = U[np.abs(vals) >= N**alpha]
    boxes = {(int(a * c1), int(b * c2)) for a, b in hot}
    assert len(boxes) <= rep.marked


def test_box_budget():
    with pytest.raises(BoxBudgetExceeded):
        box_count_experiment(parse_family("T; T^2"), UNIT, 64, 0.6, cap=1000)
    with pytest.raises(ValueError):
        box_count_experiment(parse_family("T; T^2"), UNIT, 8, 1.2)


# -- fitting ----------------------------------------------------------------


def test_fit_examples():
    assert fit_exponent([(2, 4), (4, 16), (8, 64)]).slope == pytest.approx(2.0, abs=1e-12)
    assert fit_exponent([(2, 2), (4, 4), (8, 8)]).slope == pytest.approx(1.0, abs=1e-12)
    for bad in ([(2, 4), (4, 16)], [(2, 4), (2, 5), (8, 1)], [(2, 4), (4, 0), (8, 1)]):
        with pytest.raises(DegenerateLadder):
            fit_exponent(bad)


@given(
    st.floats(-3, 3),
    st.floats(0.01, 100),
    st.lists(st.integers(2, 10**6), min_size=3, max_size=8, unique=True),
)
def test_fit_reproduces_power_laws(p, c, Ns):
    Ns = sorted(Ns)
    fit = fit_exponent([(N, c * N**p) for N in Ns])
    assert fit.slope == pytest.approx(p, abs=1e-9)


@given(st.lists(st.floats(0.1, 1e3), min_size=3, max_size=8), st.floats(1e-3, 1e3))
def test_fit_scale_invariance(vals, c):
    pts = [(2**i, v) for i, v in enumerate(vals, 1)]
    a = fit_exponent(pts)
    b = fit_exponent([(N, c * v) for N, v in pts])
    assert b.slope == pytest.approx(a.slope, abs=1e-9)
    # the stored points reproduce the slope
    xs = np.array([p[0] for p in a.points])
    ys = np.array([p[1] for p in a.points])
    assert np.polyfit(xs, ys, 1)[0] == pytest.approx(a.slope, abs=1e-12)


def test_level_set_examples():
    assert level_set_moment_exponent(2, 4, 2) == 1
    assert level_set_moment_exponent(5, 7, 2) == Fraction(10, 7)
    assert level_set_moment_exponent(5, 7, 7) == 5
    with pytest.raises(RhoExceedsB):
        level_set_moment_exponent(5, 7, 8)
    with pytest.raises(ValueError):
        level_set_moment_exponent(7, 5, 1)


@given(
    st.fractions(Fraction(1, 10), 10),
    st.fractions(Fraction(1, 10), 10),
    st.fractions(Fraction(1, 100), 1),
    st.fractions(Fraction(1, 10), 10),
)
def test_level_set_linear_and_homogeneous(a, gap, t, c):
    b = a + gap
    rho = t * b
    e = level_set_moment_exponent(a, b, rho)
    assert level_set_moment_exponent(a, b, rho / 2) * 2 == e
    assert level_set_moment_exponent(c * a, c * b, rho) == e if rho <= c * b else True


# -- dilation, majorants ----------------------------------------------------


@pytest.mark.parametrize("g", [2, 3, 5, -4])
def test_dilation_invariance(g):
    F = TrigPolynomial.from_terms({1: 1, 2: 1}).abs_square()
    orig, dil = dilation_invariance_check(g, F, 4096)
    assert orig == pytest.approx(2, abs=1e-9) and dil == pytest.approx(2, abs=1e-9)


def test_dilation_examples():
    assert abs(dilation_invariance_check(3, {1: 1}).original) < 1e-12
    assert abs(dilation_invariance_check(3, {1: 1}).dilated) < 1e-12
    check = dilation_invariance_check(7, TrigPolynomial.constant(1.0))
    assert check.original == pytest.approx(1) and check.dilated == pytest.approx(1)
    two_dim = TrigPolynomial.from_terms({(1, 2): 1, (0, 0): 0.5, (-1, 3): 2})
    assert dilation_invariance_check(3, two_dim, 64).difference < 1e-12
    with pytest.raises(ValueError):
        dilation_invariance_check(0, {1: 1})


def test_majorant_examples():
    N = 16
    assert pointwise_majorant(0.5, N, 2) == N + N * N
    assert pointwise_majorant(0.0, N, 2) == N + N * N
    x = math.sqrt(2) - 1
    est = sup_short(x, 2, 64)
    maj = pointwise_majorant(x, 64, 2)
    assert math.isfinite(maj) and maj > 0
    assert majorant_ratio(est.lower, x, 64, 2) == pytest.approx(est.lower**2 / maj)
    assert pointwise_majorant(0.0, 5, 3) == 5**3 + 5 * 4 * 25 * 5
    with pytest.raises(ValueError):
        pointwise_majorant(0.1, 5, 4)


def test_majorant_uses_exact_distances():
    # 2h * (1/4) is a half-integer for odd h and an integer for even h
    N = 8
    expected = N + sum(2.0 if h % 2 else N for h in range(1, N + 1))
    assert pointwise_majorant(Fraction(1, 4), N, 2) == expected
