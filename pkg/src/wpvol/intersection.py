"""Exact normalized intersection numbers through Mirzakhani-type recursions.

The bracket [tau_{d_1}...tau_{d_n}]_{g,n} is the normalized psi/WP-class
intersection number.  Values live in Q[pi^2]; in fact each bracket is a
single monomial q * pi^(2(3g+n-3-|d|)) with q > 0.  The production engine
exploits this: it recurses on raw (degree, Fraction) pairs and asserts the
degree bookkeeping at every accumulation, so any convention error would
explode immediately rather than silently.

Production paths:

* base cases (g,n) in {(0,3), (1,1)};
* n >= 1: the A + B + C recursion with the first (largest) entry of the
  canonical descending multiset as the distinguished index;
* n == 0: the closed-surface bracket [ ]_{g,0} = V_g through the
  (2g-2+n)-weighted recursion over [tau_l]_{g,1}.

Sums over l truncate automatically by the vanishing convention
(|d| > 3g+n-3 => bracket = 0); brackets with a negative index or an
unstable signature contribute 0.  The identities behind
:func:`recursion_i_residual`, :func:`recursion_ii_residual` and
:func:`recursion_iii_residual` are verification-only and must vanish
exactly; they are the independent oracle that pins the base table and all
sign/weight conventions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import CacheError, DomainError
from .exact import PiPoly, a_coeff_fraction
from .store import MemoStore

try:  # GMP-backed rationals make the deep recursions ~6x faster
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - gmpy2 is a soft dependency
    _Q = Fraction

_HALF = _Q(1, 2)

Mono = tuple[int, "_Q"]  # (power of pi^2, rational coefficient)


def _to_fraction(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


@dataclass(frozen=True, order=True)
class TauIndex:
    """Canonical key (g, n, d) with d a descending tuple of size n."""

    g: int
    n: int
    d: tuple[int, ...]

    @staticmethod
    def make(g: int, n: int, d: Sequence[int]) -> "TauIndex":
        d = tuple(sorted((int(x) for x in d), reverse=True))
        if len(d) != n:
            raise DomainError(f"expected {n} indices, got {len(d)}")
        if g < 0 or n < 0 or (d and d[-1] < 0):
            raise DomainError("genus, marked points and indices must be >= 0")
        return TauIndex(g, n, d)

    @property
    def total(self) -> int:
        return sum(self.d)

    @property
    def dimension(self) -> int:
        """Complex dimension 3g + n - 3 of the compactified moduli space."""
        return 3 * self.g + self.n - 3

    @property
    def complexity(self) -> int:
        return 2 * self.g - 2 + self.n

    def is_stable(self) -> bool:
        return self.complexity >= 1

    def key(self) -> tuple[int, int, tuple[int, ...]]:
        return (self.g, self.n, self.d)


def base_table() -> list[tuple[TauIndex, PiPoly]]:
    """The base cases the recursion bottoms out on (complexity 1)."""
    return [
        (TauIndex.make(0, 3, (0, 0, 0)), PiPoly.one()),
        (TauIndex.make(1, 1, (0,)), PiPoly.monomial(Fraction(1, 12), 1)),
        (TauIndex.make(1, 1, (1,)), PiPoly.from_rational(Fraction(1, 2))),
    ]


_BASE_MONO: dict[tuple[int, int, tuple[int, ...]], Mono] = {
    (0, 3, (0, 0, 0)): (0, _Q(1)),
    (1, 1, (0,)): (1, _Q(1, 12)),
    (1, 1, (1,)): (0, _Q(1, 2)),
}

_a_frac_q: list["_Q"] = []


def _a_coeff_q(max_l: int) -> list["_Q"]:
    """GMP copies of the zeta weights a_0..a_max_l (grown on demand)."""
    while len(_a_frac_q) <= max_l:
        f = a_coeff_fraction(len(_a_frac_q))
        _a_frac_q.append(_Q(f.numerator, f.denominator))
    return _a_frac_q

#: Shared in-process store used when callers do not pass one.
DEFAULT_STORE = MemoStore()


def _mono_cache(store: MemoStore) -> dict:
    """Per-store cache of raw monomials, seeded from persisted entries."""
    cache = getattr(store, "_mono_cache", None)
    if cache is None:
        cache = {}
        for key, value in store._data.items():
            mono = value.as_monomial()
            if mono is None:
                raise CacheError(f"non-monomial bracket stored for {key}")
            cache[key] = (mono[0], _Q(mono[1].numerator, mono[1].denominator))
        store._mono_cache = cache
    return cache


def _insert_desc(t: tuple[int, ...], v: int) -> tuple[int, ...]:
    """Insert v into a descending tuple, keeping it descending."""
    for i, x in enumerate(t):
        if v >= x:
            return t[:i] + (v,) + t[i:]
    return t + (v,)


def intersection_number(
    idx: TauIndex | tuple[int, int, Sequence[int]],
    store: MemoStore | None = None,
) -> PiPoly:
    """Exact value of the bracket at ``idx`` (memoized in ``store``)."""
    if not isinstance(idx, TauIndex):
        idx = TauIndex.make(*idx)
    else:
        idx = TauIndex.make(idx.g, idx.n, idx.d)
    if not idx.is_stable():
        raise DomainError(f"unstable index (g, n) = ({idx.g}, {idx.n})")
    if store is None:
        store = DEFAULT_STORE
    mono = _bracket_mono(idx.g, idx.n, idx.d, store, _mono_cache(store))
    if mono is None:
        return PiPoly.zero()
    return PiPoly.monomial(_to_fraction(mono[1]), mono[0])


def _bracket_mono(
    g: int, n: int, d: tuple[int, ...], store: MemoStore, cache: dict
) -> Mono | None:
    """Monomial of the bracket, or None when it vanishes.

    Assumes d descending and (g, n) stable.
    """
    if sum(d) > 3 * g + n - 3:
        return None
    key = (g, n, d)
    hit = cache.get(key)
    if hit is not None:
        store.hits += 1
        return hit
    base = _BASE_MONO.get(key)
    if base is not None:
        return base
    store.misses += 1
    if n == 0:
        mono = _closed_mono(g, store, cache)
    else:
        mono = _recursion_iv(g, n, d, store, cache)
    cache[key] = mono
    store.insert(key, PiPoly.monomial(_to_fraction(mono[1]), mono[0]))
    return mono


def _sub_mono(
    g: int, n: int, d_desc: tuple[int, ...], store: MemoStore, cache: dict
) -> Mono | None:
    """Bracket with the zero conventions of the recursions (None = zero)."""
    if g < 0 or 2 * g - 2 + n < 1:
        return None
    return _bracket_mono(g, n, d_desc, store, cache)


def _recursion_iv(
    g: int, n: int, d: tuple[int, ...], store: MemoStore, cache: dict
) -> Mono:
    """[prod tau]_{g,n} = A + B + C with the first index distinguished.

    The B and C sums depend on the distinguished index only through
    m = l + d_1 - 2, so their inner convolutions are memoized per
    (g, n, rest, m) and shared by every multiset with the same tail.
    """
    d1 = d[0]
    rest = d[1:]
    total = sum(d)
    degree = 3 * g + n - 3 - total
    l_max = degree  # beyond this every sub-bracket vanishes
    a_frac = _a_coeff_q(l_max)
    acc = _Q(0)

    # A: merge the distinguished index with one other marked point.
    seen: dict[int, int] = {}
    for dj in rest:
        seen[dj] = seen.get(dj, 0) + 1
    rest_idx = {}
    for pos, dj in enumerate(rest):
        rest_idx.setdefault(dj, pos)
    for dj, mult in seen.items():
        pos = rest_idx[dj]
        others = rest[:pos] + rest[pos + 1 :]
        weight = 8 * mult * (2 * dj + 1)
        for l in range(l_max + 1):
            t = d1 + dj + l - 1
            if t < 0:
                continue
            sub = _sub_mono(g, n - 1, _insert_desc(others, t), store, cache)
            if sub is not None:
                assert sub[0] + l == degree
                acc += weight * a_frac[l] * sub[1]

    # B + C through the shared pair-convolution kernel.
    kernels = getattr(store, "_kernel_cache", None)
    if kernels is None:
        kernels = store._kernel_cache = {}
    for l in range(l_max + 1):
        m = l + d1 - 2
        if m < 0:
            continue
        key = (g, n, rest, m)
        kern = kernels.get(key)
        if kern is None:
            kern = _bc_kernel(g, n, rest, m, store, cache)
            kernels[key] = kern
        if kern[1]:
            assert kern[0] + l == degree
            acc += 16 * a_frac[l] * kern[1]

    return (degree, acc)


def _bc_kernel(
    g: int, n: int, rest: tuple[int, ...], m: int, store: MemoStore, cache: dict
) -> Mono:
    """sum_{k1+k2=m} ( [tau_{k1} tau_{k2} rest]_{g-1,n+1}
    + sum over stable ordered splits of [tau_{k1} rest_I][tau_{k2} rest_J] ).

    Homogeneous of pi^2-degree 3g + n - 5 - |rest| - m.
    """
    rest_total = sum(rest)
    kdeg = 3 * g + n - 5 - rest_total - m
    acc = _Q(0)

    # pair insertion at genus g-1
    if g >= 1 and rest_total + m <= 3 * (g - 1) + (n + 1) - 3:
        for k1 in range(m // 2 + 1):
            k2 = m - k1
            sub = _sub_mono(
                g - 1, n + 1, _insert_desc(_insert_desc(rest, k2), k1), store, cache
            )
            if sub is not None:
                assert sub[0] == kdeg
                acc += sub[1] if 2 * k1 == m else 2 * sub[1]

    # splittings; ordered (piece, complement) terms come in equal mirror
    # pairs, so only masks containing the first position are walked, doubled.
    n_rest = n - 1
    if n_rest == 0:
        masks: Iterator[int] = iter((0,))
        double = 1
    else:
        masks = iter(range(1, 1 << n_rest, 2))  # bit 0 set
        double = 2
    sums = [0] * (1 << n_rest)
    for mask in range(1, 1 << n_rest):
        low = mask & -mask
        sums[mask] = sums[mask ^ low] + rest[low.bit_length() - 1]
    for mask in masks:
        n_i = mask.bit_count()
        n_j = n_rest - n_i
        sum_i = sums[mask]
        sum_j = rest_total - sum_i
        d_i: tuple[int, ...] | None = None
        d_j: tuple[int, ...] | None = None
        for g1 in range(g + 1):
            g2 = g - g1
            if 2 * g1 + n_i < 2 or 2 * g2 + n_j < 2:
                continue
            room1 = 3 * g1 + n_i - 2 - sum_i
            room2 = 3 * g2 + n_j - 2 - sum_j
            if room1 < 0 or room2 < 0:
                continue
            k_lo = max(0, m - room2)
            k_hi = min(m, room1)
            if k_lo > k_hi:
                continue
            if d_i is None:
                d_i = tuple(rest[p] for p in range(n_rest) if mask >> p & 1)
                d_j = tuple(rest[p] for p in range(n_rest) if not mask >> p & 1)
            for k1 in range(k_lo, k_hi + 1):
                v1 = _sub_mono(g1, n_i + 1, _insert_desc(d_i, k1), store, cache)
                if v1 is None:
                    continue
                v2 = _sub_mono(g2, n_j + 1, _insert_desc(d_j, m - k1), store, cache)
                if v2 is None:
                    continue
                assert v1[0] + v2[0] == kdeg
                acc += double * v1[1] * v2[1]

    return (kdeg, acc)


def _closed_mono(g: int, store: MemoStore, cache: dict) -> Mono:
    """[ ]_{g,0} = V_g via the weighted recursion over [tau_l]_{g,1}."""
    if g < 2:
        raise DomainError("closed bracket requires g >= 2")
    degree = 3 * g - 3
    acc = _Q(0)
    for l in range(1, 3 * g - 2 + 1):
        sub = _sub_mono(g, 1, (l,), store, cache)
        if sub is None:
            continue
        assert sub[0] + l - 1 == degree
        acc += _HALF * _Q((-1) ** (l - 1) * l, math.factorial(2 * l + 1)) * sub[1]
    return (degree, acc / (2 * g - 2))


# ---------------------------------------------------------------------------
# verification-only identities (contract: exactly zero)
# ---------------------------------------------------------------------------

def _value(g: int, n: int, d: Sequence[int], store: MemoStore) -> PiPoly:
    """Bracket with the zero conventions of the recursions, as a PiPoly."""
    if g < 0 or 2 * g - 2 + n < 1 or min(d, default=0) < 0:
        return PiPoly.zero()
    return intersection_number((g, n, d), store)


def recursion_iii_residual(
    g: int, n: int, d: Sequence[int], store: MemoStore | None = None
) -> PiPoly:
    """LHS - RHS of the (2g-2+n)-weighted recursion; contract: zero."""
    store = store or DEFAULT_STORE
    lhs = _value(g, n, d, store).scale(2 * g - 2 + n)
    rhs = PiPoly.zero()
    for l in range(1, 3 * g - 2 + n + 1):
        sub = _value(g, n + 1, tuple(d) + (l,), store)
        if sub.is_zero():
            continue
        coeff = _HALF * Fraction((-1) ** (l - 1) * l, math.factorial(2 * l + 1))
        rhs = rhs + sub.mul_monomial(coeff, l - 1)
    return lhs - rhs


def _split_sum(
    g: int,
    d: tuple[int, ...],
    extra_i: tuple[int, ...],
    extra_j: tuple[int, ...],
    store: MemoStore,
) -> PiPoly:
    """sum over ordered I | J = positions(d) and g1 + g2 = g of
    [tau_{extra_i} tau_{d_I}] [tau_{extra_j} tau_{d_J}]."""
    n = len(d)
    total = PiPoly.zero()
    for mask in range(1 << n):
        d_i = tuple(d[p] for p in range(n) if mask >> p & 1)
        d_j = tuple(d[p] for p in range(n) if not mask >> p & 1)
        for g1 in range(g + 1):
            v1 = _value(g1, len(d_i) + len(extra_i), d_i + extra_i, store)
            if v1.is_zero():
                continue
            v2 = _value(g - g1, len(d_j) + len(extra_j), d_j + extra_j, store)
            if v2.is_zero():
                continue
            total = total + v1 * v2
    return total


def recursion_i_residual(
    g: int, n: int, d: Sequence[int], store: MemoStore | None = None
) -> PiPoly:
    """Residual of [tau_0 tau_1 prod]_{g,n+2} =
    [tau_0^4 prod]_{g-1,n+4} + 6 sum [tau_0^2 prod_I][tau_0^2 prod_J]."""
    store = store or DEFAULT_STORE
    d = tuple(sorted(d, reverse=True))
    lhs = _value(g, n + 2, d + (0, 1), store)
    rhs = _value(g - 1, n + 4, d + (0, 0, 0, 0), store)
    rhs = rhs + _split_sum(g, d, (0, 0), (0, 0), store).scale(6)
    return lhs - rhs


def recursion_ii_residual(
    g: int, n: int, d: Sequence[int], ell: int, store: MemoStore | None = None
) -> PiPoly:
    """Residual of [tau_0^2 tau_{l+1} prod]_{g,n+3} =
    [tau_0^4 tau_l prod]_{g-1,n+5} + 8 sum [tau_0^2 tau_l][tau_0^2]
    + 4 sum [tau_0 tau_l][tau_0^3]."""
    if ell < 0:
        raise DomainError("ell must be >= 0")
    store = store or DEFAULT_STORE
    d = tuple(sorted(d, reverse=True))
    lhs = _value(g, n + 3, d + (0, 0, ell + 1), store)
    rhs = _value(g - 1, n + 5, d + (0, 0, 0, 0, ell), store)
    rhs = rhs + _split_sum(g, d, (0, 0, ell), (0, 0), store).scale(8)
    rhs = rhs + _split_sum(g, d, (0, ell), (0, 0, 0), store).scale(4)
    return lhs - rhs


# ---------------------------------------------------------------------------
# enumeration helpers
# ---------------------------------------------------------------------------

def descending_tuples(n: int, max_sum: int) -> Iterator[tuple[int, ...]]:
    """All descending tuples of length n with entries >= 0 and sum <= max_sum."""
    if n == 0:
        yield ()
        return

    def rec(remaining: int, bound: int, prefix: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        if remaining == 0:
            yield prefix
            return
        budget = max_sum - sum(prefix)
        for v in range(min(bound, budget), -1, -1):
            yield from rec(remaining - 1, v, prefix + (v,))

    yield from rec(n, max_sum, ())


def stable_signatures(max_complexity: int) -> Iterator[tuple[int, int]]:
    """All stable (g, n) with 3g - 3 + n <= max_complexity (closed included)."""
    g = 0
    while 3 * g - 3 <= max_complexity:
        n_min = max(0, 3 - 2 * g)
        for n in range(n_min, max_complexity - 3 * g + 3 + 1):
            if 2 * g - 2 + n >= 1:
                yield (g, n)
        g += 1


def stable_indices(max_complexity: int) -> Iterator[TauIndex]:
    """All stable (g, n, d) with 3g - 3 + n <= max_complexity and |d| <= dim."""
    for g, n in stable_signatures(max_complexity):
        dim = 3 * g + n - 3
        for d in descending_tuples(n, dim):
            yield TauIndex(g, n, d)
