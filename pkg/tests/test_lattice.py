import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plrf import lattice


# ---------------------------------------------------------------------------
# brute-force oracles (independent of the counting engine)


def brute_unordered(X, pis):
    k = len(pis)
    count = 0
    # coordinates can never exceed X^(1/a) individually
    caps = [int(math.floor(X ** (1.0 / a) + 1e-9)) for a in pis]

    def rec(depth, prod):
        nonlocal count
        if depth == k:
            count += 1 if prod <= X * (1 + 1e-12) else 0
            return
        for s in range(1, caps[depth] + 1):
            val = prod * s ** pis[depth]
            if val > X * (1 + 1e-12):
                break
            rec(depth + 1, val)

    rec(0, 1.0)
    return count


def brute_ordered(X, pis, bound=None):
    k = len(pis)
    count = 0
    hi = bound if bound is not None else int(math.floor(X ** (1.0 / min(pis)) + 1e-9)) + 1

    def rec(depth, start, prod):
        nonlocal count
        if depth == k:
            count += 1
            return
        for s in range(start, hi + 1):
            val = prod * s ** pis[depth]
            if val > X * (1 + 1e-12):
                break
            rec(depth + 1, s + 1, val)

    rec(0, 1, 1.0)
    return count


# ---------------------------------------------------------------------------
# exact counting


def test_count_unordered_examples():
    assert lattice.count_unordered(4, (1, 1)).count == 8
    assert lattice.count_unordered(10, (2, 1)).count == 13
    assert lattice.count_unordered(0.5, (1, 1, 1)).count == 0


def test_count_ordered_examples():
    assert lattice.count_ordered(6, (1, 1)).count == 6
    assert lattice.count_ordered(6, (1, 1), bound_v=3).count == 3
    # X <= v: the box constraint is inactive
    assert lattice.count_ordered(6, (1, 1), bound_v=7).count == 6


def test_count_matches_bruteforce_integer_exponents():
    for pis in ((1, 1), (2, 1), (1, 2), (3, 1, 1), (1, 1, 1), (2,)):
        for X in (1, 2, 7.5, 30, 100):
            assert lattice.count_unordered(X, pis).count == brute_unordered(X, pis), (pis, X)
            assert lattice.count_ordered(X, pis).count == brute_ordered(X, pis), (pis, X)


def test_count_matches_bruteforce_real_exponents():
    for pis in ((1.5, 1.0), (2.31, 1.31), (0.7, 0.7)):
        for X in (3.0, 12.7, 64.0):
            assert lattice.count_unordered(X, pis).count == brute_unordered(X, pis), (pis, X)
            assert lattice.count_ordered(X, pis).count == brute_ordered(X, pis), (pis, X)


def test_count_bounded_matches_bruteforce():
    for v in (2, 3, 5, 10):
        for X in (5, 25, 60):
            got = lattice.count_ordered(X, (1, 1, 1), bound_v=v).count
            assert got == brute_ordered(X, (1, 1, 1), bound=v), (v, X)


@settings(deadline=None, max_examples=60)
@given(
    X=st.floats(min_value=0.25, max_value=400.0),
    pis=st.lists(st.sampled_from([0.5, 1.0, 1.31, 2.0, 3.0]), min_size=1, max_size=3),
)
def test_count_engine_equals_bruteforce(X, pis):
    pis = tuple(pis)
    assert lattice.count_unordered(X, pis).count == brute_unordered(X, pis)
    assert lattice.count_ordered(X, pis).count == brute_ordered(X, pis)


def test_count_boundary_inclusion():
    # exact boundary products must be included (ties resolve toward inclusion)
    assert lattice.count_unordered(8, (3,)).count == 2  # 1^3, 2^3 = 8
    assert lattice.count_unordered(27, (3,)).count == 3
    assert lattice.count_ordered(36, (2, 1)).count == brute_ordered(36, (2, 1))


def test_ordered_times_factorial_below_unordered():
    for pis, factor in (((1, 1), 2), ((1, 1, 1), 6)):
        for X in (10, 100, 1000, 10000):
            ordered = lattice.count_ordered(X, pis).count
            unordered = lattice.count_unordered(X, pis).count
            assert factor * ordered <= unordered


def test_count_monotone_in_X_and_v():
    prev = -1
    for X in (1, 5, 10, 50, 100, 500):
        c = lattice.count_unordered(X, (2, 1)).count
        assert c >= prev
        prev = c
    prev = -1
    for v in (1, 2, 4, 8, 16):
        c = lattice.count_ordered(100, (1, 1), bound_v=v).count
        assert c >= prev
        prev = c


def test_bounded_below_unbounded():
    for v in (2, 5, 20):
        assert (
            lattice.count_ordered(50, (1, 1), bound_v=v).count
            <= lattice.count_ordered(50, (1, 1)).count
        )


def test_count_budget_error():
    with pytest.raises(lattice.BudgetExceededError) as err:
        lattice.count_unordered(1e18, (1, 1, 1))
    assert err.value.estimate > lattice.ITERATION_BUDGET
    with pytest.raises(lattice.BudgetExceededError):
        lattice.count_unordered(1e12, (1.0, 1.5))


def test_count_input_validation():
    with pytest.raises(ValueError):
        lattice.count_unordered(10, (1, 1, 1, 1, 1))
    with pytest.raises(ValueError):
        lattice.count_unordered(float("inf"), (1, 1))
    with pytest.raises(ValueError):
        lattice.Exponents((1.0, -2.0))


# ---------------------------------------------------------------------------
# zeta


def test_zeta_known_values():
    assert lattice.zeta(2.0) == pytest.approx(math.pi**2 / 6, abs=1e-12)
    assert lattice.zeta(4.0) == pytest.approx(math.pi**4 / 90, abs=1e-12)


def test_zeta_series_oracle():
    # oracle: ten million terms plus integral tail
    N = 10**7
    n = np.arange(1, N + 1, dtype=float)
    s = 3.0
    oracle = float(np.sum(n**-s)) + float(N) ** (1 - s) / (s - 1)
    assert lattice.zeta(3.0) == pytest.approx(oracle, abs=1e-10)


def test_zeta_large_and_near_one():
    assert lattice.zeta(30.0) == pytest.approx(1.0 + 2.0**-30, rel=1e-12)
    # near the pole: zeta(s) = 1/(s-1) + gamma + O(s-1)
    s = 1.0 + 1e-5
    assert lattice.zeta(s) == pytest.approx(1.0 / (s - 1.0) + 0.5772156649015329, abs=1e-4)


def test_zeta_domain_error():
    for s in (1.0, 0.5, -2.0, 1.0 + 1e-7):
        with pytest.raises(ValueError):
            lattice.zeta(s)


# ---------------------------------------------------------------------------
# asymptotics


def test_asymptotic_unordered_equal_exponents():
    X = 1234.5
    assert lattice.asymptotic_unordered(X, (1, 1)) == pytest.approx(X * math.log(X), rel=1e-12)
    assert lattice.asymptotic_unordered(X, (2, 2)) == pytest.approx(
        0.5 * math.sqrt(X) * math.log(X), rel=1e-12
    )


def test_asymptotic_unordered_mixed():
    X = 500.0
    assert lattice.asymptotic_unordered(X, (2, 1)) == pytest.approx(
        lattice.zeta(2.0) * X, rel=1e-12
    )
    # (3, 1): zeta(3) X; minimum exponent 1 with multiplicity 1
    assert lattice.asymptotic_unordered(X, (3, 1)) == pytest.approx(
        lattice.zeta(3.0) * X, rel=1e-12
    )


def test_asymptotic_matches_exact_at_large_X():
    X = 10**6
    exact = lattice.count_unordered(X, (1, 1)).count
    asym = lattice.asymptotic_unordered(X, (1, 1))
    assert 0.8 <= exact / asym <= 1.2


def test_ordered_shape_examples():
    s = lattice.ordered_shape((1, 1, 1))
    assert s.theta_star == pytest.approx(1.0)
    assert s.mu == 3
    s = lattice.ordered_shape((2, 1))
    assert s.theta_star == pytest.approx(1.0)
    assert s.mu == 1
    assert s.partial_sums == (1.0, 3.0)
    s = lattice.ordered_shape((3,))
    assert s.theta_star == pytest.approx(1.0 / 3.0)
    assert s.mu == 1


def test_asymptotic_ordered_equal_examples():
    X = 777.0
    assert lattice.asymptotic_ordered_equal(X, 1.0, 3) == pytest.approx(
        X * math.log(X) ** 2 / 12.0, rel=1e-12
    )
    assert lattice.asymptotic_ordered_equal(X, 1.0, 2) == pytest.approx(
        0.5 * X * math.log(X), rel=1e-12
    )
    assert lattice.asymptotic_ordered_equal(X, 1.0, 1) == pytest.approx(X, rel=1e-12)


def test_ordered_upper_bound_shape_is_bounded():
    # measured constants over X in [1e2, 1e6]: the ratio to X^theta* log^(mu-1) X
    # stays bounded (and modest); bands pinned from the oracle run
    for pis, cap in (((2, 1), 2.0), ((3, 1, 1), 1.5)):
        shape = lattice.ordered_shape(pis)
        for X in (100, 1000, 10**4, 10**5, 10**6):
            n = lattice.count_ordered(X, pis).count
            bound = X**shape.theta_star * math.log(X) ** (shape.mu - 1)
            assert n / bound <= cap, (pis, X, n / bound)


# ---------------------------------------------------------------------------
# inversion


def test_invert_count_equal_identity_case():
    assert lattice.invert_count_equal(100.0, 1.0, 1) == pytest.approx(100.0, rel=1e-9)


def test_invert_count_equal_round_trip():
    X0 = 1e4
    N = lattice.asymptotic_ordered_equal(X0, 1.0, 2)
    assert lattice.invert_count_equal(N, 1.0, 2) == pytest.approx(X0, rel=1e-6)


def test_invert_count_equal_forward_residual():
    X = lattice.invert_count_equal(1e5, 1.0, 3)
    forward = lattice.asymptotic_ordered_equal(X, 1.0, 3)
    assert abs(forward / 1e5 - 1.0) <= 1e-4


def test_invert_count_equal_validation():
    with pytest.raises(ValueError):
        lattice.invert_count_equal(2.0, 1.0, 2)


# ---------------------------------------------------------------------------
# types


def test_exponents_properties():
    e = lattice.Exponents((2.0, 1.0, 1.0))
    assert e.k == 3
    assert e.pi_star == 1.0
    assert e.multiplicity == 2


def test_count_result_fields():
    r = lattice.count_ordered(6, (1, 1), bound_v=3)
    assert (r.count, r.X, r.ordered, r.bound_v) == (3, 6.0, True, 3)
    assert r.exponents.values == (1.0, 1.0)
