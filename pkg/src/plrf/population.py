"""Population spectra of tuple-product covariances over a power-law base.

For a decreasing base spectrum H and an exponent composition (a_1, ..., a_l),
the induced diagonal operator carries one entry H_{i_1}^{a_1} ... H_{i_l}^{a_l}
per strictly increasing index tuple i_1 < ... < i_l, with a_1 applied to the
smallest index.  This module enumerates the top of that spectrum by threshold
search with branch pruning, counts entries above a threshold, evaluates the
(log^(p-1)(j+1)/j)^alpha eigenvalue envelope, and builds the
zero-free-parameter counting curves N(u) for monomial degrees 1-3, whose
inversion predicts eigenvalues eps_j = C u_j^(-alpha).
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import lattice
from .combinatorics import Composition

__all__ = [
    "PowerLawSpectrum",
    "TupleEigenvalue",
    "TopTuples",
    "CountingCurve",
    "hpi_top_k",
    "hpi_count_above",
    "envelope",
    "theory_curve",
    "predicted_spectrum",
]

_TIE_GUARD = 1.0 - 1e-12  # values this close to the threshold count as above
MAX_TUPLE_LENGTH = 4
MAX_TOP_K = 10**7


@dataclass(frozen=True)
class PowerLawSpectrum:
    """Decreasing positive base spectrum; defaults to H_j = j^(-alpha)."""

    alpha: float
    v: int
    eigenvalues: np.ndarray | None = None

    def __post_init__(self) -> None:
        if not self.alpha > 1.0:
            raise ValueError(f"alpha > 1 required, got {self.alpha}")
        if self.v < 1:
            raise ValueError(f"dimension v must be >= 1, got {self.v}")
        if self.eigenvalues is None:
            eig = np.arange(1, self.v + 1, dtype=float) ** -self.alpha
        else:
            eig = np.array(self.eigenvalues, dtype=float)
            if eig.shape != (self.v,):
                raise ValueError(f"expected {self.v} eigenvalues, got shape {eig.shape}")
            if not np.all(eig > 0):
                raise ValueError("eigenvalues must be strictly positive")
            if np.any(np.diff(eig) > 0):
                raise ValueError("eigenvalues must be nonincreasing")
        eig.flags.writeable = False
        object.__setattr__(self, "eigenvalues", eig)


@dataclass(frozen=True)
class TupleEigenvalue:
    """One diagonal entry: the index tuple and its product value."""

    indices: tuple[int, ...]
    value: float


class TopTuples(Sequence):
    """Descending list of TupleEigenvalue with a truncation marker.

    `truncated` is set when the requested k exceeded the number of tuples, in
    which case all of them are returned.
    """

    def __init__(self, entries: Iterable[TupleEigenvalue], truncated: bool = False):
        self._entries = list(entries)
        self.truncated = bool(truncated)

    def __getitem__(self, i):
        return self._entries[i]

    def __len__(self) -> int:
        return len(self._entries)

    def values(self) -> np.ndarray:
        return np.array([e.value for e in self._entries])

    def __repr__(self) -> str:
        return f"TopTuples(n={len(self)}, truncated={self.truncated})"


def _as_composition(composition) -> Composition:
    if isinstance(composition, Composition):
        return composition
    return Composition(tuple(composition))


def hpi_count_above(H: PowerLawSpectrum, composition, eps: float) -> int:
    """#{i_1 < ... < i_l <= v : H_{i_1}^{a_1} ... H_{i_l}^{a_l} >= eps}.

    Counts by depth-first prefix search: a prefix is pruned when even the best
    completion (all remaining factors at the next index) falls below eps, and
    the innermost coordinate is resolved by binary search on the sorted base.
    Ties within relative 1e-12 of eps count as above.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    comp = _as_composition(composition)
    parts = comp.parts
    l = comp.length
    v = H.v
    if l > v:
        return 0
    eig = H.eigenvalues
    floor_eps = eps * _TIE_GUARD
    # suffix exponent sums for the completion bound
    tail = [0.0] * (l + 1)
    for t in range(l - 1, -1, -1):
        tail[t] = tail[t + 1] + parts[t]

    def innermost_max(start: int, prefix: float, a: float) -> int:
        # largest index j in [start, v] with prefix * H_j^a >= floor_eps, else start-1
        if prefix * eig[start - 1] ** a < floor_eps:
            return start - 1
        if prefix * eig[v - 1] ** a >= floor_eps:
            return v
        lo, hi = start, v  # predicate true at lo, false at hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if prefix * eig[mid - 1] ** a >= floor_eps:
                lo = mid
            else:
                hi = mid
        return lo

    def rec(depth: int, start: int, prefix: float) -> int:
        a = parts[depth]
        if depth == l - 1:
            return max(0, innermost_max(start, prefix, a) - start + 1)
        total = 0
        i = start
        last = v - (l - 1 - depth)
        while i <= last:
            value = prefix * eig[i - 1] ** a
            if value * eig[i] ** tail[depth + 1] < floor_eps:
                break  # products only shrink as i grows
            total += rec(depth + 1, i + 1, value)
            i += 1
        return total

    return rec(0, 1, 1.0)


def _enumerate_above(H: PowerLawSpectrum, comp: Composition, eps: float) -> list[TupleEigenvalue]:
    parts = comp.parts
    l = comp.length
    v = H.v
    eig = H.eigenvalues
    floor_eps = eps * _TIE_GUARD
    tail = [0.0] * (l + 1)
    for t in range(l - 1, -1, -1):
        tail[t] = tail[t + 1] + parts[t]
    out: list[TupleEigenvalue] = []
    idx = [0] * l

    def rec(depth: int, start: int, prefix: float) -> None:
        a = parts[depth]
        last = v - (l - 1 - depth)
        i = start
        while i <= last:
            value = prefix * eig[i - 1] ** a
            if depth == l - 1:
                if value < floor_eps:
                    break
                idx[depth] = i
                out.append(TupleEigenvalue(tuple(idx), value))
            else:
                if value * eig[i] ** tail[depth + 1] < floor_eps:
                    break
                idx[depth] = i
                rec(depth + 1, i + 1, value)
            i += 1

    rec(0, 1, 1.0)
    return out


def hpi_top_k(H: PowerLawSpectrum, composition, k: int) -> TopTuples:
    """The k largest products H_{i_1}^{a_1} ... H_{i_l}^{a_l}, descending.

    Threshold search: shrink a cutoff geometrically until at least k entries
    qualify (refining toward a count <= 4k when the value distribution
    allows), enumerate everything above it with prefix pruning, then sort.
    Ties are broken by lexicographic index tuple.  Equals full enumeration
    plus sort, without materialising all C(v, l) tuples.
    """
    comp = _as_composition(composition)
    if not 1 <= k <= MAX_TOP_K:
        raise ValueError(f"k must lie in [1, {MAX_TOP_K}], got {k}")
    l = comp.length
    if l > MAX_TUPLE_LENGTH:
        raise ValueError(f"composition length <= {MAX_TUPLE_LENGTH} supported, got {l}")
    if l > H.v:
        raise ValueError(f"need v >= {l} base entries, got v={H.v}")
    total = math.comb(H.v, l)
    k_eff = min(k, total)
    truncated = k > total

    eig = H.eigenvalues
    top_val = math.prod(float(eig[t]) ** comp.parts[t] for t in range(l))
    min_val = math.prod(float(eig[H.v - l + t]) ** comp.parts[t] for t in range(l))

    eps = top_val
    count = hpi_count_above(H, comp, eps)
    while count < k_eff:
        if eps <= min_val:
            break  # everything qualifies now
        eps = max(eps / 2.0, min_val)
        count = hpi_count_above(H, comp, eps)
    if count > 4 * k_eff:
        # geometric bisection toward the [k, 4k] window; value plateaus may
        # leave more than 4k qualifiers, which only costs enumeration time
        lo, hi = eps, min(eps * 2.0, top_val)
        for _ in range(80):
            if hi / lo <= 1.0 + 1e-9:
                break
            mid = math.sqrt(lo * hi)
            c = hpi_count_above(H, comp, mid)
            if c >= k_eff:
                lo, count = mid, c
                if c <= 4 * k_eff:
                    break
            else:
                hi = mid
        eps = lo

    entries = _enumerate_above(H, comp, eps)
    entries.sort(key=lambda e: (-e.value, e.indices))
    return TopTuples(entries[:k_eff], truncated)


def envelope(j: int, alpha: float, p: int) -> float:
    """Eigenvalue envelope (log^(p-1)(j+1) / j)^alpha."""
    if j < 1:
        raise ValueError(f"index j must be >= 1, got {j}")
    return float((math.log(j + 1.0) ** (p - 1) / j) ** alpha)


@dataclass(frozen=True)
class CountingCurve:
    """Eigenvalue counting curve N(u) for a monomial degree p in {1, 2, 3}.

    N(u) = principal_weight * u * (log u)^(p-1) + b_theory * u, where b_theory
    sums the non-diagonal subleading weights; the diagonal term is O(u^(1/3))
    and is recorded but dropped from evaluation.  Inverting N at integer
    heights and applying eps_j = C * u_j^(-alpha) predicts the spectrum.
    """

    p: int
    alpha: float
    principal_weight: float
    subleading_terms: tuple[tuple[float, tuple[int, ...], str], ...]
    scale: float  # the anchor constant C relating thresholds to u^(-alpha)

    @property
    def b_theory(self) -> float:
        return sum(w for w, _, kind in self.subleading_terms if kind != "diagonal")

    def evaluate(self, u: float) -> float:
        if not u > 0:
            raise ValueError(f"curve defined for u > 0, got {u}")
        return self.principal_weight * u * math.log(u) ** (self.p - 1) + self.b_theory * u


def theory_curve(p: int, alpha: float) -> CountingCurve:
    """Zero-free-parameter counting curve for monomial degree p.

    p=1: N(u) = u.  p=2: N(u) = u log(u) / 2 with no linear correction.
    p=3: N(u) = u log^2(u) / 12 + b u with b = zeta(2)/2^(1/alpha) + 4^(-1/alpha);
    the diagonal O(u^(1/3)) term is recorded with kind "diagonal" and dropped.
    """
    if p == 1:
        return CountingCurve(1, alpha, 1.0, (), 1.0)
    if p == 2:
        return CountingCurve(2, alpha, 0.5, (), 2.0)
    if p == 3:
        sub = (
            (lattice.zeta(2.0) / 2.0 ** (1.0 / alpha), (2, 1), "unordered"),
            (4.0 ** (-1.0 / alpha), (1,), "linear"),
            (6.0 ** (-1.0 / (3.0 * alpha)), (3,), "diagonal"),
        )
        return CountingCurve(3, alpha, 1.0 / 12.0, sub, 36.0)
    raise ValueError(f"theory curves are available for p in {{1, 2, 3}}, got p={p}")


def predicted_spectrum(curve: CountingCurve, C: float, j_range) -> np.ndarray:
    """Predicted eigenvalues eps_j = C * u_j^(-alpha) with N(u_j) = j.

    `j_range` is an iterable of indices in [1, 1e7].  Each u_j is solved by
    bisection to |N(u_j) - j| <= 1e-8 j (closed form for p=1); the output is
    strictly decreasing.
    """
    if not C > 0:
        raise ValueError(f"scale C must be positive, got {C}")
    js = [int(j) for j in j_range]
    if not js:
        return np.empty(0)
    if min(js) < 1 or max(js) > 10**7:
        raise ValueError("indices must lie within [1, 1e7]")
    if any(b <= a for a, b in zip(js, js[1:])):
        raise ValueError("j_range must be strictly increasing")

    us = np.empty(len(js))
    for pos, j in enumerate(js):
        if curve.p == 1:
            u = float(j)
        else:
            lo = 1.0 if curve.p == 2 else 1e-9
            hi = max(4.0, 2.0 * lo)
            expansions = 0
            while curve.evaluate(hi) < j:
                hi *= 2.0
                expansions += 1
                if expansions > 4000:
                    raise RuntimeError("bisection bracket failure (upper bound)")
            if curve.evaluate(lo) > j:
                raise RuntimeError(f"bisection bracket failure at j={j}")
            u = 0.5 * (lo + hi)
            for _ in range(200):
                u = 0.5 * (lo + hi)
                val = curve.evaluate(u)
                if abs(val - j) <= 1e-8 * j:
                    break
                if val < j:
                    lo = u
                else:
                    hi = u
            else:
                raise RuntimeError(f"bisection did not converge at j={j}")
        us[pos] = u
    out = C * us ** -curve.alpha
    if np.any(np.diff(out) >= 0):
        raise RuntimeError("predicted spectrum is not strictly decreasing")
    return out
