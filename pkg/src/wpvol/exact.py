"""Exact scalar arithmetic: the ring Q[pi^2], rigorous enclosures, zeta data.

Every volume and intersection number in this package is an element of
Q[pi^2], represented by :class:`PiPoly`.  Inequalities between such values
are decided through :class:`Interval` enclosures whose endpoints are exact
rationals; the only transcendental input is an enclosure of pi computed
internally by Machin's formula with integer directed rounding, so results
are reproducible bit for bit at every precision.

Conventions:

* ``bernoulli`` uses the B_1 = -1/2 convention.
* ``zeta_even(i)`` returns zeta(2i) = (-1)^(i+1) B_{2i} (2 pi)^(2i) / (2 (2i)!)
  as an exact monomial in pi^2.
* ``a_coeff(i)`` returns (1 - 2^(1-2i)) zeta(2i); a_0 = 1/2 via zeta(0) = -1/2.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from threading import Lock
from typing import Iterable, Sequence, Union

from .errors import DomainError, PrecisionExhausted

RationalLike = Union[int, Fraction]

#: Hard cap (bits) for interval refinement in :func:`compare`.
PRECISION_CAP = 16384

_ZERO = Fraction(0)
_ONE = Fraction(1)


# ---------------------------------------------------------------------------
# pi enclosure (Machin's formula, integer arithmetic, directed rounding)
# ---------------------------------------------------------------------------

def _atan_inv_scaled(x: int, scale_bits: int) -> tuple[int, int]:
    """Integer bounds ``lo <= atan(1/x) * 2^scale_bits <= hi`` for x >= 2.

    Alternating Gregory series; every floor division contributes at most one
    unit of slack which is charged to the corresponding bound, and the
    truncated tail (smaller than the first omitted term, itself below one
    unit) is charged to both sides.
    """
    one = 1 << scale_bits
    lo = 0
    hi = 0
    k = 0
    power = x  # x^(2k+1)
    x2 = x * x
    while True:
        t = one // ((2 * k + 1) * power)
        if t == 0:
            break
        if k % 2 == 0:
            lo += t
            hi += t + 1
        else:
            lo -= t + 1
            hi -= t
        k += 1
        power *= x2
    # first omitted term is < 1 unit in absolute value
    return lo - 1, hi + 1


def pi_bounds(precision: int) -> tuple[Fraction, Fraction]:
    """Exact rational enclosure of pi of width <= 2^(-precision).

    pi = 16 atan(1/5) - 4 atan(1/239).  The raw integer enclosure is
    computed with 64 guard bits, then rounded outward onto the dyadic grid
    2^(-precision-2) with one extra ulp of padding on each side.  The
    padding guarantees that enclosures at precisions p2 >= p + 2 are nested
    inside the enclosure at precision p, deterministically.
    """
    if precision < 1:
        raise DomainError("precision must be >= 1 bit")
    scale = precision + 64
    a5_lo, a5_hi = _atan_inv_scaled(5, scale)
    a239_lo, a239_hi = _atan_inv_scaled(239, scale)
    raw_lo = 16 * a5_lo - 4 * a239_hi
    raw_hi = 16 * a5_hi - 4 * a239_lo
    grid = precision + 2
    shift = scale - grid  # > 0
    lo = (raw_lo >> shift) - 1            # floor to grid, pad one ulp
    hi = -((-raw_hi) >> shift) + 1        # ceil to grid, pad one ulp
    denom = 1 << grid
    return Fraction(lo, denom), Fraction(hi, denom)


def exp_bounds(q: RationalLike, precision: int) -> tuple[Fraction, Fraction]:
    """Exact rational enclosure of exp(q) for rational q.

    Taylor series with the standard tail bound |R_N| <= 2 |q|^N / N! once
    N >= 2|q|; negative arguments go through 1/exp(|q|) to keep the bounds
    one-sided and exact.
    """
    q = Fraction(q)
    if q < 0:
        lo, hi = exp_bounds(-q, precision)
        return 1 / hi, 1 / lo
    target = Fraction(1, 1 << (precision + 2))
    s = _ONE
    term = _ONE
    n = 0
    while True:
        n += 1
        term = term * q / n
        s += term
        if term == 0 or (n >= 2 * q and 2 * term <= target):
            break
        if n > 100000:  # pragma: no cover - defensive
            raise PrecisionExhausted("exp series did not converge")
    tail = 2 * term
    return s, s + tail


# ---------------------------------------------------------------------------
# intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """Enclosure [lo, hi] with exact rational endpoints.

    ``precision`` records the pi-enclosure precision (bits) used to build
    the interval; refining it never widens the result because higher
    precision pi enclosures are nested (see :func:`pi_bounds`).
    """

    lo: Fraction
    hi: Fraction
    precision: int

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise DomainError("interval endpoints out of order")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, value: RationalLike) -> bool:
        return self.lo <= value <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def to_float(self) -> float:
        return float(self.midpoint())

    def float_bounds(self) -> tuple[float, float]:
        """Outward-rounded float endpoints (safe for float comparisons)."""
        lo = float(self.lo)
        if lo > self.lo:
            lo = math.nextafter(lo, -math.inf)
        hi = float(self.hi)
        if hi < self.hi:
            hi = math.nextafter(hi, math.inf)
        return lo, hi

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        lo, hi = self.float_bounds()
        return f"Interval({lo!r}, {hi!r}, bits={self.precision})"


# ---------------------------------------------------------------------------
# the ring Q[pi^2]
# ---------------------------------------------------------------------------

def _trim(coeffs: Iterable[RationalLike]) -> tuple[Fraction, ...]:
    out = [Fraction(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class PiPoly:
    """Element of Q[pi^2]: ``coeffs[j]`` multiplies pi^(2j).

    The representation is canonical (no trailing zero coefficients; the
    zero element has ``coeffs == ()``), so equality and hashing are exact
    and structural.  Instances are immutable and safe to share.
    """

    coeffs: tuple[Fraction, ...] = ()

    @staticmethod
    def from_rational(q: RationalLike) -> "PiPoly":
        return PiPoly(_trim([q]))

    @staticmethod
    def monomial(c: RationalLike, power: int) -> "PiPoly":
        """c * pi^(2*power)."""
        if power < 0:
            raise DomainError("negative pi^2 power")
        c = Fraction(c)
        if c == 0:
            return PiPoly()
        return PiPoly(tuple([_ZERO] * power) + (c,))

    @staticmethod
    def zero() -> "PiPoly":
        return PiPoly()

    @staticmethod
    def one() -> "PiPoly":
        return PiPoly((_ONE,))

    # -- structure ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int:
        """Degree in pi^2; -1 for the zero element."""
        return len(self.coeffs) - 1

    def constant(self) -> Fraction:
        return self.coeffs[0] if self.coeffs else _ZERO

    def as_monomial(self) -> tuple[int, Fraction] | None:
        """(power, coefficient) if exactly one coefficient is nonzero."""
        nz = [(j, c) for j, c in enumerate(self.coeffs) if c]
        if len(nz) == 1:
            return nz[0]
        return None

    # -- ring operations ----------------------------------------------------
    def __add__(self, other: "PiPoly") -> "PiPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for j, c in enumerate(b):
            out[j] += c
        return PiPoly(_trim(out))

    def __neg__(self) -> "PiPoly":
        return PiPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "PiPoly") -> "PiPoly":
        return self + (-other)

    def __mul__(self, other: "PiPoly") -> "PiPoly":
        if not self.coeffs or not other.coeffs:
            return PiPoly()
        mono = other.as_monomial()
        if mono is not None:
            return self.mul_monomial(mono[1], mono[0])
        mono = self.as_monomial()
        if mono is not None:
            return other.mul_monomial(mono[1], mono[0])
        out = [_ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if b:
                    out[i + j] += a * b
        return PiPoly(_trim(out))

    def scale(self, q: RationalLike) -> "PiPoly":
        q = Fraction(q)
        if q == 0:
            return PiPoly()
        return PiPoly(tuple(c * q for c in self.coeffs))

    def mul_monomial(self, c: RationalLike, power: int) -> "PiPoly":
        """Fast path for multiplication by c * pi^(2*power)."""
        c = Fraction(c)
        if c == 0 or not self.coeffs:
            return PiPoly()
        return PiPoly(tuple([_ZERO] * power) + tuple(a * c for a in self.coeffs))

    # -- serialization -------------------------------------------------------
    def to_strings(self) -> list[str]:
        """JSON-friendly list of "p/q" strings (index = power of pi^2)."""
        return [f"{c.numerator}/{c.denominator}" for c in self.coeffs]

    def to_json(self) -> str:
        return json.dumps(self.to_strings())

    @staticmethod
    def from_strings(items: Sequence[str]) -> "PiPoly":
        return PiPoly(_trim(parse_rational(s) for s in items))

    @staticmethod
    def from_json(text: str) -> "PiPoly":
        items = json.loads(text)
        if not isinstance(items, list):
            raise DomainError("PiPoly JSON must be a list of 'p/q' strings")
        return PiPoly.from_strings(items)

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        if not self.coeffs:
            return "PiPoly<0>"
        parts = []
        for j, c in enumerate(self.coeffs):
            if not c:
                continue
            if j == 0:
                parts.append(str(c))
            elif j == 1:
                parts.append(f"{c}*pi^2")
            else:
                parts.append(f"{c}*pi^{2 * j}")
        return "PiPoly<" + " + ".join(parts) + ">"


def format_rational(q: RationalLike) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    num, _, den = text.partition("/")
    if not den:
        den = "1"
    return Fraction(int(num), int(den))


# ---------------------------------------------------------------------------
# evaluation and comparison
# ---------------------------------------------------------------------------

def eval_interval(value: PiPoly, precision: int = 64) -> Interval:
    """Enclosure of ``sum coeffs[j] * pi^(2j)`` at the given precision.

    Exact rational coefficients combined with the pi enclosure through
    exact interval arithmetic; the width tends to 0 as precision grows.
    """
    if precision < 32:
        raise DomainError("precision must be >= 32 bits")
    if value.is_zero():
        return Interval(_ZERO, _ZERO, precision)
    pi_lo, pi_hi = pi_bounds(precision)
    sq_lo, sq_hi = pi_lo * pi_lo, pi_hi * pi_hi  # pi > 0
    lo = hi = _ZERO
    pow_lo, pow_hi = _ONE, _ONE  # (pi^2)^j
    for j, c in enumerate(value.coeffs):
        if j:
            pow_lo, pow_hi = pow_lo * sq_lo, pow_hi * sq_hi
        if c > 0:
            lo += c * pow_lo
            hi += c * pow_hi
        elif c < 0:
            lo += c * pow_hi
            hi += c * pow_lo
    return Interval(lo, hi, precision)


def compare(u: PiPoly, v: PiPoly, start_precision: int = 64) -> int:
    """Exact ordering of two Q[pi^2] values: -1, 0 or +1.

    Equality is decided symbolically (canonical coefficients).  Strict
    order is decided by interval refinement with doubling precision; since
    pi is transcendental, u != v implies a nonzero gap, so refinement
    terminates.  The cap ``PRECISION_CAP`` guards against pathological
    ties and raises :class:`PrecisionExhausted` if hit.
    """
    if u == v:
        return 0
    diff = u - v
    precision = max(32, start_precision)
    while precision <= PRECISION_CAP:
        box = eval_interval(diff, precision)
        if box.lo > 0:
            return 1
        if box.hi < 0:
            return -1
        precision *= 2
    raise PrecisionExhausted(
        f"could not separate values within {PRECISION_CAP} bits"
    )


def is_nonnegative(value: PiPoly, precision: int = 64) -> bool:
    return value.is_zero() or compare(value, PiPoly.zero(), precision) >= 0


# ---------------------------------------------------------------------------
# Bernoulli numbers and zeta constants
# ---------------------------------------------------------------------------

_bernoulli_cache: dict[int, Fraction] = {0: _ONE, 1: Fraction(-1, 2)}
_bernoulli_lock = Lock()


def bernoulli(n: int) -> Fraction:
    """n-th Bernoulli number (B_1 = -1/2 convention).

    Binomial recurrence sum_{k=0}^{n} C(n+1, k) B_k = 0, memoized; reads
    are lock-free, insertion is serialized.
    """
    if n < 0:
        raise DomainError("Bernoulli index must be >= 0")
    cached = _bernoulli_cache.get(n)
    if cached is not None:
        return cached
    if n > 1 and n % 2 == 1:
        with _bernoulli_lock:
            _bernoulli_cache[n] = _ZERO
        return _ZERO
    with _bernoulli_lock:
        known = max(k for k in _bernoulli_cache if k <= n)
        for m in range(known + 1, n + 1):
            if m in _bernoulli_cache:
                continue
            if m % 2 == 1:
                _bernoulli_cache[m] = _ZERO
                continue
            acc = _ZERO
            for k in range(m):
                b = _bernoulli_cache[k]
                if b:
                    acc += math.comb(m + 1, k) * b
            _bernoulli_cache[m] = -acc / (m + 1)
        return _bernoulli_cache[n]


def zeta_even(i: int) -> PiPoly:
    """zeta(2i) as an exact monomial (1/q) * pi^(2i), for i >= 1."""
    if i < 1:
        raise DomainError("zeta_even requires i >= 1")
    k = 2 * i
    c = (-1) ** (i + 1) * bernoulli(k) * Fraction(2 ** (k - 1), math.factorial(k))
    return PiPoly.monomial(c, i)


_a_cache: dict[int, PiPoly] = {}
_a_lock = Lock()


def a_coeff(i: int) -> PiPoly:
    """a_i = (1 - 2^(1-2i)) zeta(2i); a_0 = (1 - 2) * (-1/2) = 1/2."""
    if i < 0:
        raise DomainError("a_coeff requires i >= 0")
    cached = _a_cache.get(i)
    if cached is not None:
        return cached
    if i == 0:
        value = PiPoly.from_rational(Fraction(1, 2))
    else:
        value = zeta_even(i).scale(1 - Fraction(1, 2 ** (2 * i - 1)))
    with _a_lock:
        _a_cache.setdefault(i, value)
    return value


def a_coeff_fraction(i: int) -> Fraction:
    """The rational part of a_i (a_i = a_coeff_fraction(i) * pi^(2i))."""
    mono = a_coeff(i).as_monomial()
    assert mono is not None and mono[0] == i
    return mono[1]
