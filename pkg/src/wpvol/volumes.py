"""Volume polynomials V_{g,n}(x), closed volumes V_g, ratio quantities and
the boundary-length weight appearing in the integration formula.

The expansion

    V_{g,n}(x) = sum_d [prod tau_{d_i}]_{g,n} prod (x_i/2)^(2 d_i) / (2 d_i + 1)!

gives every coefficient exactly in Q[pi^2]; evaluation at rational boundary
lengths therefore stays exact.  Ratio quantities (which leave Q[pi^2]) are
returned as exact numerator/denominator pairs plus an interval enclosure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Sequence

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, NumericsError
from .exact import Interval, PiPoly, eval_interval
from .intersection import (
    DEFAULT_STORE,
    TauIndex,
    descending_tuples,
    intersection_number,
)
from .store import MemoStore

RationalVector = Sequence[Fraction | int]


def _distinct_permutations(items: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    """All distinct permutations of a multiset (standard prefix recursion)."""
    counts = {}
    for x in items:
        counts[x] = counts.get(x, 0) + 1
    keys = sorted(counts)
    n = len(items)

    def rec(prefix: list[int]) -> Iterator[tuple[int, ...]]:
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for k in keys:
            if counts[k]:
                counts[k] -= 1
                prefix.append(k)
                yield from rec(prefix)
                prefix.pop()
                counts[k] += 1

    yield from rec([])


@dataclass(frozen=True)
class VolumePolynomial:
    """V_{g,n}(x) as a map from descending exponent multisets to coefficients.

    ``coeffs[d]`` multiplies the monomial orbit sum_{distinct perms p of d}
    prod x_i^(2 p_i); every coefficient is a nonnegative element of Q[pi^2]
    and only multisets with |d| <= 3g + n - 3 appear.
    """

    g: int
    n: int
    coeffs: Mapping[tuple[int, ...], PiPoly]

    def constant(self) -> PiPoly:
        """V_{g,n}(0) = [tau_0^n]_{g,n}."""
        return self.coeffs.get((0,) * self.n, PiPoly.zero())

    def evaluate(self, x: RationalVector) -> PiPoly:
        """Exact value at rational boundary lengths."""
        if len(x) != self.n:
            raise DomainError(f"expected {self.n} lengths, got {len(x)}")
        xs = [Fraction(v) for v in x]
        if any(v < 0 for v in xs):
            raise DomainError("boundary lengths must be >= 0")
        sq = [v * v for v in xs]
        total = PiPoly.zero()
        for d, coeff in self.coeffs.items():
            orbit = Fraction(0)
            for p in _distinct_permutations(d):
                term = Fraction(1)
                for xi2, e in zip(sq, p):
                    if e:
                        term *= xi2**e
                orbit += term
            if orbit:
                total = total + coeff.scale(orbit)
        return total

    def evaluate_float(self, x: Sequence[float], precision: int = 128) -> float:
        """Float value (coefficients rounded once through an enclosure)."""
        table = self.float_coeffs(precision)
        total = 0.0
        sq = [float(v) ** 2 for v in x]
        for d, c in table.items():
            orbit = 0.0
            for p in _distinct_permutations(d):
                term = 1.0
                for xi2, e in zip(sq, p):
                    term *= xi2**e
                orbit += term
            total += c * orbit
        return total

    def float_coeffs(self, precision: int = 128) -> dict[tuple[int, ...], float]:
        return {
            d: eval_interval(c, precision).to_float() for d, c in self.coeffs.items()
        }

    def total_degree(self) -> int:
        return 2 * max((sum(d) for d in self.coeffs), default=0)


def volume_polynomial(
    g: int, n: int, store: MemoStore | None = None
) -> VolumePolynomial:
    """Complete coefficient map of V_{g,n}(x) for stable (g, n) with n >= 1."""
    if n < 1:
        raise DomainError("volume_polynomial requires n >= 1 (use closed_volume)")
    if 2 * g - 2 + n < 1:
        raise DomainError(f"unstable signature (g, n) = ({g}, {n})")
    store = store or DEFAULT_STORE
    dim = 3 * g + n - 3
    coeffs: dict[tuple[int, ...], PiPoly] = {}
    for d in descending_tuples(n, dim):
        bracket = intersection_number((g, n, d), store)
        if bracket.is_zero():
            continue
        norm = Fraction(1, 4 ** sum(d))
        for di in d:
            norm /= math.factorial(2 * di + 1)
        coeffs[d] = bracket.scale(norm)
    return VolumePolynomial(g, n, coeffs)


def closed_volume(g: int, store: MemoStore | None = None) -> PiPoly:
    """V_g = V_{g,0}, g >= 2 (produced via the n = 0 recursion path)."""
    if g < 2:
        raise DomainError("closed volume requires g >= 2")
    return intersection_number((g, 0, ()), store or DEFAULT_STORE)


def volume_value(g: int, n: int, store: MemoStore | None = None) -> PiPoly:
    """V_{g,n} = V_{g,n}(0) for any stable (g, n)."""
    store = store or DEFAULT_STORE
    if n == 0:
        return closed_volume(g, store)
    return intersection_number((g, n, (0,) * n), store)


def volume_at(
    g: int, n: int, x: RationalVector, store: MemoStore | None = None
) -> PiPoly:
    """Exact V_{g,n}(x) at rational boundary lengths x >= 0."""
    return volume_polynomial(g, n, store).evaluate(x)


@dataclass(frozen=True)
class ExactRatio:
    """Quotient of two Q[pi^2] values, kept exact with an interval view."""

    numerator: PiPoly
    denominator: PiPoly

    def interval(self, precision: int = 128) -> Interval:
        num = eval_interval(self.numerator, precision)
        den = eval_interval(self.denominator, precision)
        if den.lo <= 0 <= den.hi:
            raise NumericsError("denominator enclosure straddles zero")
        candidates = [
            num.lo / den.lo,
            num.lo / den.hi,
            num.hi / den.lo,
            num.hi / den.hi,
        ]
        return Interval(min(candidates), max(candidates), precision)

    def to_float(self, precision: int = 128) -> float:
        return self.interval(precision).to_float()


def mz_ratio(g: int, n: int, store: MemoStore | None = None) -> ExactRatio:
    """4 pi^2 (2g - 2 + n) V_{g,n} / V_{g,n+1}."""
    store = store or DEFAULT_STORE
    num = volume_value(g, n, store).mul_monomial(4 * (2 * g - 2 + n), 1)
    den = volume_value(g, n + 1, store)
    return ExactRatio(num, den)


def a4_ratio(g: int, n: int, store: MemoStore | None = None) -> ExactRatio:
    """V_{g-1,n+2} / V_{g,n}."""
    if g < 1 or 2 * (g - 1) - 2 + (n + 2) < 1 or 2 * g - 2 + n < 1:
        raise DomainError(f"a4_ratio undefined at (g, n) = ({g}, {n})")
    store = store or DEFAULT_STORE
    return ExactRatio(volume_value(g - 1, n + 2, store), volume_value(g, n, store))


def w_r(r: int, store: MemoStore | None = None) -> PiPoly:
    """W_r: V_{r/2+1} for even r, V_{(r+1)/2, 1} for odd r (r >= 2)."""
    if r < 2:
        raise DomainError("w_r requires r >= 2")
    store = store or DEFAULT_STORE
    if r % 2 == 0:
        return closed_volume(r // 2 + 1, store)
    return volume_value((r + 1) // 2, 1, store)


# ---------------------------------------------------------------------------
# splittings and the boundary weight
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitIndex:
    """One way of attaching q stable pieces to n0 boundary circles.

    ``blocks`` partitions {0, ..., n0-1} into q non-empty tuples (ordered by
    their minimum element); ``genera[i]`` is the genus of the piece that
    carries ``blocks[i]``.  Conditions: 2 g_i + n_i - 2 >= 1 per piece and
    sum(2 g_i - 2 + n_i) = 2g - 2 g0 - n0.
    """

    genera: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]

    @property
    def q(self) -> int:
        return len(self.genera)


def _set_partitions(items: tuple[int, ...]) -> Iterator[tuple[tuple[int, ...], ...]]:
    """All partitions of ``items`` into non-empty blocks (min-element order)."""
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + ((first,) + part[i],) + part[i + 1 :]
        yield ((first,),) + part


def enumerate_splits(g: int, g0: int, n0: int) -> list[SplitIndex]:
    """Complete enumeration of the splitting set for the weight function."""
    if not (2 * g0 + n0 >= 3 or (g0, n0) == (0, 2)):
        raise DomainError("need 2*g0 + n0 >= 3 or (g0, n0) = (0, 2)")
    if g <= g0:
        raise DomainError("need g > g0")
    budget = 2 * g - 2 * g0 - n0  # = sum over pieces of (2 g_i - 2 + n_i)
    out: list[SplitIndex] = []
    if budget < 0:
        return out
    for blocks in _set_partitions(tuple(range(n0))):
        blocks = tuple(sorted(blocks, key=lambda b: b[0]))
        sizes = [len(b) for b in blocks]
        q = len(blocks)
        two_g_total = budget - sum(sizes) + 2 * q
        if two_g_total < 0 or two_g_total % 2:
            continue
        g_total = two_g_total // 2

        def genus_choices(i: int, remaining: int, acc: tuple[int, ...]) -> None:
            if i == q:
                if remaining == 0:
                    out.append(SplitIndex(acc, blocks))
                return
            g_min = max(0, -(-(3 - sizes[i]) // 2))  # 2 g_i + n_i >= 3
            for gi in range(g_min, remaining + 1):
                if 2 * gi + sizes[i] - 2 >= 1:
                    genus_choices(i + 1, remaining - gi, acc + (gi,))

        genus_choices(0, g_total, ())
    return out


def phi(
    g: int,
    g0: int,
    n0: int,
    x: RationalVector,
    store: MemoStore | None = None,
) -> ExactRatio:
    """Boundary weight x_1...x_{n0} V_{g0,n0}(x) sum_splits prod V_{g_i}(x^(i)),
    divided by V_g; returned as an exact numerator / V_g pair.

    For the cylinder case (g0, n0) = (0, 2) the unstable factor V_{0,2}(x)
    is taken to be 1.
    """
    store = store or DEFAULT_STORE
    if len(x) != n0:
        raise DomainError(f"expected {n0} lengths, got {len(x)}")
    xs = [Fraction(v) for v in x]
    if any(v < 0 for v in xs):
        raise DomainError("boundary lengths must be >= 0")
    prefactor = Fraction(1)
    for v in xs:
        prefactor *= v
    if prefactor == 0:
        return ExactRatio(PiPoly.zero(), closed_volume(g, store))
    if (g0, n0) == (0, 2):
        v0 = PiPoly.one()
    else:
        v0 = volume_at(g0, n0, xs, store)
    split_sum = PiPoly.zero()
    for split in enumerate_splits(g, g0, n0):
        term = PiPoly.one()
        for gi, block in zip(split.genera, split.blocks):
            term = term * volume_at(gi, len(block), [xs[p] for p in block], store)
            if term.is_zero():
                break
        split_sum = split_sum + term
    return ExactRatio((v0 * split_sum).scale(prefactor), closed_volume(g, store))


# ---------------------------------------------------------------------------
# expected number of simple geodesics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error: float
    richardson_delta: float


def _poly_in_length(poly: VolumePolynomial, diag: bool, precision: int = 192) -> np.ndarray:
    """Coefficient array in ell^2 of V(ell) (n = 1) or V(ell, ell) (n = 2)."""
    table = poly.float_coeffs(precision)
    top = max((sum(d) for d in table), default=0)
    out = np.zeros(top + 1)
    for d, c in table.items():
        mult = len(set(_distinct_permutations(d))) if diag else 1
        out[sum(d)] += c * mult
    return out


def simple_expectation(
    g: int,
    f: Callable[[float], float],
    length_cap: float,
    store: MemoStore | None = None,
    tol: float = 1e-10,
) -> QuadratureResult:
    """Expected value of sum_{simple geodesics} f(length) at genus g.

    The volume ratios are exact polynomials (rounded once to float64); only
    the length integral is numeric: adaptive Gauss-Kronrod to ``tol``,
    cross-checked by composite Gauss-Legendre with node doubling.
    """
    if g < 2:
        raise DomainError("simple_expectation requires g >= 2")
    if length_cap <= 0:
        raise DomainError("length cap must be positive")
    store = store or DEFAULT_STORE

    vg = eval_interval(closed_volume(g, store), 192).to_float()
    polys: list[np.ndarray] = []
    polys.append(_poly_in_length(volume_polynomial(g - 1, 2, store), diag=True))
    for i in range(1, g // 2 + 1):
        a = _poly_in_length(volume_polynomial(i, 1, store), diag=False)
        b = _poly_in_length(volume_polynomial(g - i, 1, store), diag=False)
        polys.append(np.convolve(a, b))
    weight = np.zeros(max(len(p) for p in polys))
    for p in polys:
        weight[: len(p)] += p
    weight /= vg

    def integrand(ell: float) -> float:
        ell2 = ell * ell
        acc = 0.0
        for c in weight[::-1]:
            acc = acc * ell2 + c
        return acc * f(ell) * ell

    value, err = quad(integrand, 0.0, length_cap, epsabs=tol, epsrel=0.0, limit=200)

    def gauss(nodes: int) -> float:
        xg, wg = np.polynomial.legendre.leggauss(nodes)
        t = 0.5 * length_cap * (xg + 1.0)
        return 0.5 * length_cap * float(sum(w * integrand(x) for x, w in zip(t, wg)))

    coarse, fine = gauss(160), gauss(320)
    delta = abs(fine - coarse)
    if abs(fine - value) > max(100 * tol, 1e-8 * abs(value)):
        raise NumericsError(
            f"quadrature paths disagree: {value} vs {fine} (delta {abs(fine - value)})"
        )
    return QuadratureResult(value=value, abs_error=err, richardson_delta=delta)


def leading_simple_integral(
    f: Callable[[float], float], length_cap: float
) -> QuadratureResult:
    """Large-genus limit integral 4 sinh^2(ell/2) / ell * f(ell)."""

    def integrand(ell: float) -> float:
        if ell == 0.0:
            return 0.0
        return 4.0 * math.sinh(ell / 2.0) ** 2 / ell * f(ell)

    value, err = quad(integrand, 0.0, length_cap, epsabs=1e-12, epsrel=0.0, limit=200)
    xg, wg = np.polynomial.legendre.leggauss(320)
    t = 0.5 * length_cap * (xg + 1.0)
    fine = 0.5 * length_cap * float(sum(w * integrand(x) for x, w in zip(t, wg)))
    return QuadratureResult(value=value, abs_error=err, richardson_delta=abs(fine - value))
