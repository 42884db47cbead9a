import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coagfrag import (
    complete_monotonicity_check,
    equilibrium_for_mass,
    equilibrium_sequence,
    small_size_indicator,
    solve_m0,
    stationarity_defect,
)
from coagfrag.errors import RecursionBreakdown


def cubic_root(ratio):
    """Root in (0,1) of x = ratio (1-x)^3, via 50-digit polynomial roots."""
    # ratio*(1-x)^3 - x = -ratio x^3 + 3 ratio x^2 - (3 ratio + 1) x + ratio
    with mpmath.workdps(50):
        r = mpmath.mpf(ratio)
        roots = mpmath.polyroots([-r, 3 * r, -(3 * r + 1), r], maxsteps=200, extraprec=200)
        real = [float(z.real) for z in roots if abs(mpmath.im(z)) < 1e-30 and 0 < z.real < 1]
    assert len(real) == 1
    return real[0]


def recursion_loop(m0, M):
    """Plain-Python transcription of the forward recursion."""
    b = 0.5 * (m0 - m0 * m0)
    f = []
    for i in range(1, M + 1):
        conv = math.fsum(f[j - 1] * f[i - j - 1] for j in range(1, i))
        fi = (2 * b + conv) / (1 + 2 * m0)
        f.append(fi)
        b -= fi / (i + 1)
    return np.array(f)


# -- solve_m0 -----------------------------------------------------------------

def test_m0_unit_case():
    assert solve_m0(1.0, 1.0) == pytest.approx(0.3177, abs=1e-4)
    assert solve_m0(1.0, 1.0) == pytest.approx(cubic_root(1.0), abs=1e-14)


def test_m0_small_ratio():
    assert solve_m0(1e-12, 1.0) <= 1.1e-12


def test_m0_small_h_leading_order():
    gap = 1.0 - solve_m0(1.0, 5e-5)
    assert gap == pytest.approx((5e-5) ** (1 / 3), rel=0.10)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 1e3), st.floats(1e-4, 10))
def test_m0_matches_polynomial_root(m1, h):
    m0 = solve_m0(m1, h)
    assert 0 < m0 < 1
    assert m0 == pytest.approx(cubic_root(m1 / h), abs=1e-12)


@pytest.mark.parametrize("m1,h", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0)])
def test_m0_rejects_nonpositive(m1, h):
    with pytest.raises(ValueError):
        solve_m0(m1, h)


# -- recursion ----------------------------------------------------------------

def test_first_term_closed_form():
    m0 = solve_m0(1.0, 1.0)
    seq = equilibrium_sequence(m0, 1.0, 5)
    assert seq.values[0] == pytest.approx(m0 * (1 - m0) / (1 + 2 * m0), rel=1e-15)
    assert seq.values[0] == pytest.approx(0.13256, abs=1e-4)


def test_matches_plain_loop():
    m0 = solve_m0(1.0, 0.1)
    seq = equilibrium_sequence(m0, 0.1, 200)
    assert np.allclose(seq.values, recursion_loop(m0, 200), rtol=1e-12, atol=0)


def test_moments_converge():
    m0 = solve_m0(1.0, 1.0)
    seq = equilibrium_sequence(m0, 1.0, 10_000)
    assert abs(seq.number() - m0) <= 1e-6
    assert seq.mass() == pytest.approx(1.0, rel=1e-4)
    longer = equilibrium_sequence(m0, 1.0, 20_000)
    assert abs(longer.number() - seq.number()) <= 1e-12


def test_high_precision_agrees_with_double():
    m0 = solve_m0(1.0, 1.0)
    lo = equilibrium_sequence(m0, 1.0, 150)
    hi = equilibrium_sequence(m0, 1.0, 150, dps=40)
    assert np.allclose(lo.values[:100], hi.values[:100], rtol=1e-9, atol=0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99), st.sampled_from([1.0, 0.1, 0.01]), st.integers(1, 300))
def test_nonnegative_and_nonincreasing(m0, h, M):
    seq = equilibrium_sequence(m0, h, M)
    v = seq.values
    assert np.all(v >= 0)
    assert np.all(v[1:] <= v[:-1] * (1 + 1e-12))
    assert seq.b_tail >= -1e-13


def test_complete_monotonicity_order_three():
    seq = equilibrium_for_mass(1.0, 1.0, 1000)
    assert complete_monotonicity_check(seq.values, 3).order_satisfied >= 3


@pytest.mark.parametrize("h,m1", [(1.0, 1.0), (0.1, 1.0), (0.01, 2.0)])
def test_stationarity_identities(h, m1):
    N = 300
    seq = equilibrium_for_mass(m1, h, N + 200)
    dist = seq.to_distribution(N)
    assert dist.grid.L == pytest.approx(N * h)
    f = dist.values * h  # back to the sequence scale
    b = 0.5 * (seq.m0 - seq.m0**2)
    scale = seq.values[0]
    for i in range(1, N + 1):
        conv = math.fsum(f[j - 1] * f[i - j - 1] for j in range(1, i))
        assert abs(conv - (2 * seq.m0 + 1) * f[i - 1] + 2 * b) <= 1e-12 * max(scale, 1.0)
        b -= f[i - 1] / (i + 1)
    assert np.max(np.abs(stationarity_defect(seq, N))) <= 1e-12


def test_debug_mode_is_quiet_for_healthy_runs(recwarn):
    equilibrium_for_mass(1.0, 0.1, 500, debug=True)
    assert not [w for w in recwarn if "drift" in str(w.message)]


@pytest.mark.parametrize("m0,h,M", [(0.0, 1.0, 5), (1.0, 1.0, 5), (0.5, 0.0, 5), (0.5, 1.0, 0), (0.5, 1.0, 2.5)])
def test_sequence_rejects_bad_input(m0, h, M):
    with pytest.raises(ValueError):
        equilibrium_sequence(m0, h, M)


def test_breakdown_error_is_a_solver_error():
    from coagfrag import SolverError

    assert issubclass(RecursionBreakdown, SolverError)


# -- decay law ----------------------------------------------------------------

def decay_ratio(seq, n):
    z = 1 + 4 * seq.h / (27 * seq.m1)
    C = 9 / 8 * math.sqrt(seq.m1 * z / (seq.h * math.pi))
    return seq.values[n - 1] * z**n * n**1.5 / C


def test_decay_ratio_error_shrinks():
    seq = equilibrium_for_mass(1.0, 1.0, 400, dps=50)
    errs = [abs(decay_ratio(seq, n) - 1) for n in (50, 100, 200, 400)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


# -- small-size indicator -----------------------------------------------------

def test_indicator_at_unit_h():
    ind = small_size_indicator(1.0, 1.0)
    assert ind.f1_exact == pytest.approx(0.13256, abs=1e-4)
    assert ind.f1_leading == pytest.approx(1 / 3)


def test_indicator_small_h():
    assert abs(small_size_indicator(5e-5, 1.0).ratio - 1) <= 0.15


def test_indicator_ratio_tends_to_one():
    ratios = [small_size_indicator(h, 1.0).ratio for h in (1e-2, 1e-3, 1e-4, 1e-5)]
    errs = [abs(r - 1) for r in ratios]
    assert all(b < a for a, b in zip(errs, errs[1:]))
