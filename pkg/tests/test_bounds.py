import math

import mpmath
import numpy as np
import pytest

from copgambler import bounds
from copgambler.bounds import (
    bound_report,
    cost_function,
    evasion_cap,
    golden_section,
    lemma1_maximize,
    lemma1_value,
    lemma2_finite_cap,
    lemma2_quadratic_argmax,
    optimize_constant,
    overall_bound,
)
from copgambler.errors import DomainError, InvalidCase
from copgambler.sweep import DEFAULT_C


def explicit_lemma2(x, a, f11, f12, f22):
    """The two-vertex evasion expansion written out term by term."""
    u, v = 1 - x, 1 - a + x
    return u * v * f11 + u * u * v * f12 + u * v * v * f12 + u * u * v * v * f22


def test_golden_section_quadratic():
    x, y = golden_section(lambda t: (t - 0.3) ** 2 + 1, -2, 5)
    # value comparisons resolve the minimiser only to ~sqrt(machine eps)
    assert x == pytest.approx(0.3, abs=1e-7) and y == pytest.approx(1.0)


def test_lemma1_value():
    assert lemma1_value(0, 0) == 1
    assert lemma1_value(1, 0.4) == 0
    assert lemma1_value(0.366, 0.366) == pytest.approx(0.161569, abs=1e-6)
    with pytest.raises(DomainError):
        lemma1_value(1.2, 0)


def test_lemma1_maximize_reference_threshold():
    arg, val = lemma1_maximize(0.732)
    assert arg == pytest.approx(0.366, abs=1e-6)
    assert val == pytest.approx(0.161569, abs=1e-6)
    assert val < 0.162


def test_lemma1_maximize_against_grid():
    xs = np.linspace(0, 1, 10**6 + 1)
    g = (1 - xs) ** 2 * (xs - 1) ** 2
    assert xs[np.argmax(g)] == 0.0 and g.max() == 1.0
    assert lemma1_maximize(2.0) == (0.0, 1.0)


@pytest.mark.parametrize("a0", [0.1, 0.5, 0.732, 0.9, 1.0])
def test_lemma1_symmetric_argmax(a0):
    assert lemma1_maximize(a0)[0] == pytest.approx(a0 / 2, abs=1e-6)


def test_evasion_cap():
    assert evasion_cap(DEFAULT_C) < 0.17745
    assert evasion_cap(0) == pytest.approx(0.367879, abs=1e-6)
    assert evasion_cap(1) == pytest.approx(0.135335, abs=1e-6)


def test_lemma2_finite_cap():
    assert lemma2_finite_cap(1, DEFAULT_C) == 0.0
    assert lemma2_finite_cap(4, DEFAULT_C) == pytest.approx(0.75**7, rel=1e-14)
    assert 0.75**7 == pytest.approx(0.133484, abs=1e-6)
    assert lemma2_finite_cap(10**6, DEFAULT_C) == pytest.approx(evasion_cap(DEFAULT_C), abs=1e-5)


def test_finite_cap_below_limit():
    for n in list(range(1, 300)) + [10**4, 10**5]:
        assert lemma2_finite_cap(n, DEFAULT_C) <= evasion_cap(DEFAULT_C)


def test_cost_function():
    assert cost_function(2.72912) == pytest.approx(1.95328, abs=1e-5)
    mpmath.mp.dps = 40
    hi = mpmath.mpf(2) / (1 - mpmath.e ** -1) - 1
    assert cost_function(2) == pytest.approx(float(hi), rel=1e-14)
    assert cost_function(2) == pytest.approx(2.163953, abs=1e-6)
    assert cost_function(1 + 1e-9) > 1e6
    with pytest.raises(DomainError):
        cost_function(1.0)


def test_optimize_constant():
    x, f, c = optimize_constant()
    assert x == pytest.approx(2.72912, abs=1e-4)
    assert f == pytest.approx(1.95328, abs=1e-4)
    assert c == pytest.approx(0.72912, abs=1e-4)
    assert cost_function(2.5) > f and cost_function(3.0) > f
    xs = np.random.default_rng(0).uniform(1, 100, 10**4)
    xs = xs[xs > 1]
    assert all(f <= cost_function(x) for x in xs)


def test_overall_bound_reference_constants():
    ob = overall_bound(None, DEFAULT_C, bounds.ROUNDED_Q)
    assert ob.expected_sweeps < 1.21574
    assert ob.e_x < 0.58879
    assert ob.e_y == pytest.approx(1.36456, abs=1e-12)
    assert ob.total < 1.95335


def test_overall_bound_plain_dfs():
    ob = overall_bound(None, 0.0)
    assert ob.q == pytest.approx(math.exp(-1))
    assert ob.expected_sweeps == pytest.approx(1.58198, abs=1e-5)
    assert ob.total == pytest.approx(cost_function(2.0), rel=1e-12)


@pytest.mark.parametrize("n", [1, 2, 5, 17, 64, 1000])
def test_overall_bound_finite_n(n):
    ob = overall_bound(n, DEFAULT_C)
    assert ob.total >= 1
    assert ob.total / n < 1.95335
    assert abs(ob.total / n - cost_function(2 + DEFAULT_C)) <= 2 / n


def test_lemma2_examples():
    arg, concave = lemma2_quadratic_argmax(0.5, 1, 0, 0)
    assert arg == pytest.approx(0.25, abs=1e-9) and concave
    arg, concave = lemma2_quadratic_argmax(0.8, 0.5, 0.5, 0)
    assert arg == pytest.approx(0.4, abs=1e-9) and concave


def test_lemma2_against_explicit_grid():
    a, f11, f12, f22 = 0.7, 0.3, 0.2, 0.1
    xs = np.linspace(0, a, 700_001)
    grid_arg = xs[np.argmax(explicit_lemma2(xs, a, f11, f12, f22))]
    assert grid_arg == pytest.approx(0.35, abs=1e-6)
    arg, concave = lemma2_quadratic_argmax(a, f11, f12, f22)
    assert arg == pytest.approx(0.35, abs=1e-6) and concave
    assert 2 * a**2 + 4 * a - 4 == pytest.approx(-0.22)


def test_lemma2_case_split():
    with pytest.raises(InvalidCase):
        lemma2_quadratic_argmax(0.8, 0.1, 0.1, 0.1)
    with pytest.raises(DomainError):
        lemma2_quadratic_argmax(1.5, 0.1, 0.1, 0)
    with pytest.raises(DomainError):
        lemma2_quadratic_argmax(0.5, -0.1, 0.1, 0)


def test_report_checks_at_reference_constants():
    checks = bound_report().check()
    assert all(ok for _, _, ok in checks.values()), checks


def test_report_skips_c_dependent_checks_elsewhere():
    report = bound_report(0.0)
    assert report.total_coeff == pytest.approx(2.16395, abs=1e-5)
    assert "total_coeff" not in report.check()
