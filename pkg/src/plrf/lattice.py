"""Lattice-point counting for product constraints s_1^{a_1} ... s_k^{a_k} <= X.

Exact counts over positive integer tuples (unordered, or strictly increasing,
optionally box-bounded), the Riemann zeta function by Euler-Maclaurin
summation, and the leading-order growth laws

    unordered:   A_k(X) ~ a_*^(1-m)/Gamma(m) * prod_{a_i > a_*} zeta(a_i/a_*)
                           * X^(1/a_*) * (log X)^(m-1)
    increasing:  N(X)   ~ a^(1-k) / (Gamma(k) Gamma(k+1)) * X^(1/a) (log X)^(k-1)
                 (equal exponents a),

where a_* is the smallest exponent and m its multiplicity.  For unequal
exponents the increasing count grows like X^theta* (log X)^(mu-1) with
theta* = max_r r / (a_k + ... + a_{k-r+1}) and mu its multiplicity;
`ordered_shape` computes that growth shape.  `invert_count_equal` solves
N(X) = N for X by monotone bisection.

Exact counting replaces the innermost loop by the arithmetic count
floor((X/prefix)^(1/a_k)) and prunes prefixes whose best completion already
exceeds X; all-ones exponents take an O(sqrt X)-per-level divisor-sum fast
path (hyperbola method).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "BudgetExceededError",
    "Exponents",
    "OrderedShape",
    "CountResult",
    "count_unordered",
    "count_ordered",
    "zeta",
    "asymptotic_unordered",
    "ordered_shape",
    "asymptotic_ordered_equal",
    "invert_count_equal",
]

ITERATION_BUDGET = 10**9
_INCLUSION_GUARD = 1.0 + 1e-12  # boundary ties resolve toward inclusion
_EQ_RTOL = 1e-9  # exponents closer than this are treated as equal


class BudgetExceededError(ValueError):
    """Exact counting would exceed the iteration budget."""

    def __init__(self, estimate: float):
        self.estimate = estimate
        super().__init__(
            f"estimated {estimate:.3g} iterations exceeds the budget of {ITERATION_BUDGET:.0e}"
        )


@dataclass(frozen=True)
class Exponents:
    """Positive real exponents (a_1, ..., a_k) of the product constraint."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        values = tuple(float(a) for a in self.values)
        if not values:
            raise ValueError("need at least one exponent")
        if any(not (a > 0 and math.isfinite(a)) for a in values):
            raise ValueError(f"exponents must be positive and finite, got {values}")
        object.__setattr__(self, "values", values)

    @property
    def k(self) -> int:
        return len(self.values)

    @property
    def pi_star(self) -> float:
        """Smallest exponent."""
        return min(self.values)

    @property
    def multiplicity(self) -> int:
        """How many exponents attain the minimum (up to relative 1e-9)."""
        lo = self.pi_star
        return sum(1 for a in self.values if math.isclose(a, lo, rel_tol=_EQ_RTOL))


def _as_exponents(exponents) -> Exponents:
    if isinstance(exponents, Exponents):
        return exponents
    return Exponents(tuple(exponents))


@dataclass(frozen=True)
class OrderedShape:
    """Growth shape X^theta* (log X)^(mu-1) of the strictly increasing count."""

    theta_star: float
    mu: int
    partial_sums: tuple[float, ...]  # tail sums a_k, a_k + a_{k-1}, ...


@dataclass(frozen=True)
class CountResult:
    count: int
    X: float
    exponents: Exponents
    ordered: bool
    bound_v: int | None = None


def _max_coordinate(x: float, power: float) -> int:
    """Largest integer n >= 0 with n**power <= x, robust at float boundaries.

    Integer exponents with integer-valued x are resolved exactly; otherwise a
    relative 1e-12 guard band rounds boundary ties toward inclusion.
    """
    if x * _INCLUSION_GUARD < 1.0:
        return 0
    n = int(x ** (1.0 / power))
    if power == int(power) and x < 2**53 and float(x).is_integer():
        p, xi = int(power), int(x)
        while (n + 1) ** p <= xi:
            n += 1
        while n >= 1 and n**p > xi:
            n -= 1
        return n
    lim = x * _INCLUSION_GUARD
    while (n + 1) ** power <= lim:
        n += 1
    while n >= 1 and n**power > lim:
        n -= 1
    return n


def _divisor_sum(X: int) -> int:
    """sum_{s <= X} floor(X/s), via the hyperbola method in O(sqrt X)."""
    if X <= 0:
        return 0
    r = math.isqrt(X)
    return 2 * sum(X // s for s in range(1, r + 1)) - r * r


def _count_ones(X: int, k: int) -> int:
    """Unordered count for all exponents equal to 1 (s_1 ... s_k <= X)."""
    if X <= 0:
        return 0
    if k == 1:
        return X
    if k == 2:
        return _divisor_sum(X)
    return sum(_count_ones(X // s, k - 1) for s in range(1, X + 1))


def _count_general(
    pis: tuple[float, ...], X: float, prefix: float, start: int, strict: bool, bound: int | None
) -> int:
    pi0 = pis[0]
    rest = pis[1:]
    if not rest:
        n = _max_coordinate(X / prefix, pi0)
        if bound is not None:
            n = min(n, bound)
        return max(0, n - start + 1)
    rest_sum = sum(rest)
    lim = X * _INCLUSION_GUARD
    total = 0
    s = start
    s_cap = None if bound is None else (bound - len(rest) if strict else bound)
    while s_cap is None or s <= s_cap:
        value = prefix * s**pi0
        # best completion: remaining coords are >= s+1 (strict) or >= 1
        completion = float(s + 1) ** rest_sum if strict else 1.0
        if value * completion > lim:
            break
        total += _count_general(rest, X, value, s + 1 if strict else 1, strict, bound)
        s += 1
    return total


def _budget_or_raise(exps: Exponents, X: float, strict: bool) -> None:
    if exps.k == 1 or X <= 1.0:
        return
    head = exps.values[:-1]
    logx = max(1.0, math.log(X))
    if strict:
        # prefix enumeration grows like the increasing count with the last
        # two exponents fused (the completion bound absorbs the final coord)
        fused = head[:-1] + (head[-1] + exps.values[-1],)
        shape = ordered_shape(fused)
        est = X**shape.theta_star * logx ** (shape.mu - 1)
    elif all(a == 1.0 for a in exps.values):
        # divisor-sum fast path costs ~sqrt(X) per level below k=2
        est = {2: 2 * math.sqrt(X), 3: 2 * X, 4: 2 * X * logx}[exps.k]
    else:
        est = X ** (1.0 / min(head)) * logx ** (len(head) - 1)
    if est > ITERATION_BUDGET:
        raise BudgetExceededError(est)


def count_unordered(X: float, exponents) -> CountResult:
    """Exact #{(s_1,...,s_k) in N^k : s_1^{a_1} ... s_k^{a_k} <= X}."""
    exps = _as_exponents(exponents)
    if exps.k > 4:
        raise ValueError(f"exact counting supports k <= 4, got k={exps.k}")
    Xf = float(X)
    if not math.isfinite(Xf):
        raise ValueError(f"X must be finite, got {X}")
    if Xf * _INCLUSION_GUARD < 1.0:
        return CountResult(0, Xf, exps, ordered=False)
    _budget_or_raise(exps, Xf, strict=False)
    if all(a == 1.0 for a in exps.values) and Xf < 2**53 and Xf.is_integer():
        count = _count_ones(int(Xf), exps.k)
    else:
        count = _count_general(exps.values, Xf, 1.0, 1, strict=False, bound=None)
    return CountResult(count, Xf, exps, ordered=False)


def count_ordered(X: float, exponents, bound_v: int | None = None) -> CountResult:
    """Exact #{1 <= s_1 < ... < s_k : s_1^{a_1} ... s_k^{a_k} <= X}, coords <= bound_v if given.

    Strict ordering throughout; the exponent a_1 applies to the smallest
    coordinate.  Equals the unbounded count whenever X <= bound_v.
    """
    exps = _as_exponents(exponents)
    if exps.k > 4:
        raise ValueError(f"exact counting supports k <= 4, got k={exps.k}")
    if bound_v is not None and bound_v < 1:
        raise ValueError(f"bound_v must be >= 1, got {bound_v}")
    Xf = float(X)
    if not math.isfinite(Xf):
        raise ValueError(f"X must be finite, got {X}")
    if Xf * _INCLUSION_GUARD < 1.0:
        return CountResult(0, Xf, exps, ordered=True, bound_v=bound_v)
    _budget_or_raise(exps, Xf, strict=True)
    count = _count_general(exps.values, Xf, 1.0, 1, strict=True, bound=bound_v)
    return CountResult(count, Xf, exps, ordered=True, bound_v=bound_v)


# Euler-Maclaurin: B_{2k} / (2k)! for 2k = 2, 4, ..., 12
_EM_COEFFS = (
    1.0 / 12,
    -1.0 / 720,
    1.0 / 30240,
    -1.0 / 1209600,
    1.0 / 47900160,
    -691.0 / 1307674368000,
)
_ZETA_N = 64


def zeta(s: float) -> float:
    """Riemann zeta(s) for s > 1 by Euler-Maclaurin summation.

    Partial sum to N-1 plus N^(1-s)/(s-1) + N^(-s)/2 plus six Bernoulli
    correction terms; truncation error far below 1e-12 for s >= 1 + 1e-6.
    """
    s = float(s)
    if not s > 1.0 + 1e-6:
        raise ValueError(f"zeta(s) requires s > 1 + 1e-6, got {s}")
    N = _ZETA_N
    out = sum(n ** -s for n in range(1, N))
    out += N ** (1.0 - s) / (s - 1.0) + 0.5 * N**-s
    rising = s  # s (s+1) ... (s + 2k - 2)
    power = N ** (-s - 1.0)  # N^(-s - 2k + 1)
    for i, c in enumerate(_EM_COEFFS, start=1):
        out += c * rising * power
        rising *= (s + 2 * i - 1) * (s + 2 * i)
        power /= N * N
    return out


def asymptotic_unordered(X: float, exponents) -> float:
    """Leading-order value of the unordered count A_k(X) as X grows."""
    exps = _as_exponents(exponents)
    if X <= 1.0:
        raise ValueError(f"asymptotic defined for X > 1, got {X}")
    a_star = exps.pi_star
    m = exps.multiplicity
    const = a_star ** (1.0 - m) / math.exp(math.lgamma(m))
    zprod = 1.0
    for a in exps.values:
        if not math.isclose(a, a_star, rel_tol=_EQ_RTOL):
            zprod *= zeta(a / a_star)
    return const * zprod * X ** (1.0 / a_star) * math.log(X) ** (m - 1)


def ordered_shape(exponents) -> OrderedShape:
    """Growth shape of the strictly increasing count for arbitrary exponents.

    Uses tail sums P_r = a_k + ... + a_{k-r+1}, theta_r = r / P_r,
    theta* = max_r theta_r and mu = #{r : theta_r = theta*}.
    """
    exps = _as_exponents(exponents)
    vals = exps.values
    tails: list[float] = []
    acc = 0.0
    for a in reversed(vals):
        acc += a
        tails.append(acc)
    thetas = [(r + 1) / t for r, t in enumerate(tails)]
    theta_star = max(thetas)
    mu = sum(1 for t in thetas if math.isclose(t, theta_star, rel_tol=1e-12))
    return OrderedShape(theta_star, mu, tuple(tails))


def asymptotic_ordered_equal(X: float, pi_common: float, k: int) -> float:
    """Leading-order strictly increasing count for k equal exponents.

    N(X) ~ a^(1-k) / (Gamma(k) Gamma(k+1)) * X^(1/a) * (log X)^(k-1).
    """
    if X <= 1.0:
        raise ValueError(f"asymptotic defined for X > 1, got {X}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    a = float(pi_common)
    if a <= 0:
        raise ValueError(f"exponent must be positive, got {a}")
    const = a ** (1.0 - k) / math.exp(math.lgamma(k) + math.lgamma(k + 1))
    return const * X ** (1.0 / a) * math.log(X) ** (k - 1)


def invert_count_equal(
    N: float, pi_common: float, k: int, *, rel_tol: float = 1e-9, max_iter: int = 200
) -> float:
    """Solve asymptotic_ordered_equal(X) = N for X by monotone bisection.

    Seeded at (N / log(N)^(k-1))^a; converges to |N(X)/N - 1| <= rel_tol.
    """
    if N < 3:
        raise ValueError(f"N >= 3 required, got {N}")
    a = float(pi_common)

    def f(x: float) -> float:
        return asymptotic_ordered_equal(x, a, k)

    seed = (N / math.log(N) ** (k - 1)) ** a
    lo = max(math.e, seed / 4.0)
    while f(lo) > N:
        if lo <= math.e:
            raise ValueError(f"no solution with X > e: N={N} below the asymptotic at X=e")
        lo = max(math.e, lo / 4.0)
    hi = max(2.0 * lo, seed * 4.0)
    doublings = 0
    while f(hi) < N:
        hi *= 2.0
        doublings += 1
        if doublings > 2000:
            raise RuntimeError("bracket expansion failed")
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        val = f(mid)
        if abs(val / N - 1.0) <= rel_tol:
            return mid
        if val < N:
            lo = mid
        else:
            hi = mid
    raise RuntimeError(f"bisection did not converge after {max_iter} steps (residual at X={mid})")
