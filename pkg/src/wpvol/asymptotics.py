"""Truncated 1/(g-m) expansions with explicit error budgets, plus the
empirical fitting utilities used by the large-genus verifier suites.

An :class:`Expansion` asserts the semantic contract

    |A(g) - sum_{t<=k} coeffs[t] / (g-base)^t| <= error / (g-base)^(k+1)

for every g > g_min.  The algebra (products, products with leading zeros,
base shifts) propagates both the coefficients and the error constant; the
error side is an upper bound evaluated at g = g_min, which is valid for all
larger g because every g-dependent factor in the bounds is decreasing.

Coefficients may be exact (Fraction) or float.  Error constants are plain
nonnegative numbers; when inputs are exact the bound is computed exactly
and only rounded outward at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iter_product
from typing import Sequence

import numpy as np

from .errors import DomainError
from .exact import PiPoly, a_coeff, eval_interval

Number = Fraction | float | int


def _round_up(x: Number) -> float:
    """Smallest float >= x (keeps error constants valid after rounding)."""
    f = float(x)
    if f < x:
        f = math.nextafter(f, math.inf)
    return f


@dataclass(frozen=True)
class Expansion:
    """Truncated series in 1/(g - base) with an error constant.

    ``coeffs[t]`` multiplies (g - base)^(-t); ``error`` bounds the remainder
    at order k+1 for all g > g_min (see module docstring).
    """

    base: int
    coeffs: tuple[Number, ...]
    error: Number
    g_min: int

    def __post_init__(self) -> None:
        if not self.coeffs:
            raise DomainError("expansion needs at least the constant term")
        if self.error < 0:
            raise DomainError("error constant must be >= 0")
        if self.g_min <= self.base:
            raise DomainError("g_min must exceed the base offset")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def truncation(self, g: int) -> Number:
        """sum_t coeffs[t] / (g - base)^t."""
        u = g - self.base
        if u <= 0:
            raise DomainError("g must exceed the base offset")
        inv = Fraction(1, u) if isinstance(u, int) else 1.0 / u
        acc: Number = 0
        for c in reversed(self.coeffs):
            acc = acc * inv + c
        return acc

    def contract_holds(self, g: int, value: Number) -> bool:
        """Check |value - truncation(g)| <= error/(g-base)^(k+1), exactly
        when value, coefficients and error are all rational."""
        u = g - self.base
        exact = isinstance(value, (int, Fraction)) and all(
            isinstance(c, (int, Fraction)) for c in self.coeffs
        )
        if exact:
            lhs = abs(Fraction(value) - Fraction(self.truncation(g)))
            err = (
                Fraction(self.error)
                if isinstance(self.error, (int, Fraction))
                else Fraction(_round_up(self.error))
            )
            return lhs <= err / Fraction(u) ** (self.order + 1)
        lhs_f = abs(float(value) - float(self.truncation(g)))
        return lhs_f <= float(self.error) / float(u) ** (self.order + 1)


def pad_with_zeros(e: Expansion, k: int) -> Expansion:
    """Reinterpret an order-j expansion as order k > j with zero tail.

    This is a caller assertion, not a derivation: it is valid exactly when
    the caller knows the coefficients j+1..k vanish *and* the remainder
    already obeys the order-k bound with the same constant (true for the
    synthetic rational-function instances the verifier suites build).
    """
    if e.order >= k:
        return e
    return Expansion(e.base, e.coeffs + (0,) * (k - e.order), e.error, e.g_min)


def truncate(e: Expansion, s: int) -> Expansion:
    """Drop coefficients above order s, inflating the error soundly.

    |A - S_s| <= |A - S_k| + sum_{t>s} |a_t|/(g-m)^t, and after scaling by
    (g-m)^(s+1) every term is decreasing in g, so evaluating the bracket at
    g_min gives a valid constant for all g > g_min.
    """
    if e.order <= s:
        return e
    u = Fraction(e.g_min - e.base)
    err = Fraction(_round_up(e.error)) / u ** (e.order - s)
    for t in range(s + 1, e.order + 1):
        err += abs(Fraction(e.coeffs[t])) * u ** (s + 1 - t)
    return Expansion(e.base, e.coeffs[: s + 1], _round_up(err), e.g_min)


def _abs_coeffs(e: Expansion) -> list[Fraction]:
    return [abs(Fraction(c)) if not isinstance(c, float) else Fraction(abs(c)) for c in e.coeffs]


def expansion_product(inputs: Sequence[Expansion]) -> Expansion:
    """Product of expansions sharing a base offset.

    Output coefficients are the Cauchy convolutions; the error constant is
    the full product-rule bound (leading remainder terms, the order-(k+1)
    coefficient block, the multi-remainder cross terms, the truncated
    high-order tail), with every g-dependent factor evaluated at g_min.
    """
    if not inputs:
        raise DomainError("need at least one factor")
    base = inputs[0].base
    if any(e.base != base for e in inputs):
        raise DomainError("mismatched base offsets")
    k = inputs[0].order
    if any(e.order != k for e in inputs):
        raise DomainError("factors must share a common order (see pad_with_zeros)")
    g_min = max(e.g_min for e in inputs)
    n = len(inputs)
    if n == 1:
        return inputs[0]

    exact = all(
        all(isinstance(c, (int, Fraction)) for c in e.coeffs) for e in inputs
    )

    def conv(coeff_lists: list[Sequence[Number]], top: int) -> list[Number]:
        out: list[Number] = [Fraction(0) if exact else 0.0] * (top + 1)
        for picks in iter_product(*(range(k + 1) for _ in coeff_lists)):
            t = sum(picks)
            if t > top:
                continue
            prod: Number = 1 if exact else 1.0
            for lst, m in zip(coeff_lists, picks):
                prod *= lst[m]
            out[t] += prod
        return out

    coeffs = tuple(conv([e.coeffs for e in inputs], k))

    errs = [Fraction(_round_up(e.error)) for e in inputs]
    absc = [_abs_coeffs(e) for e in inputs]
    u = Fraction(g_min - base)

    # group 1a: single remainder against the leading coefficients
    bound = sum(
        errs[i] * math.prod(absc[j][0] for j in range(n) if j != i)
        for i in range(n)
    )
    # group 1b: the order-(k+1) coefficient block
    abs_conv = conv(absc, n * k)
    if len(abs_conv) > k + 1:
        bound += Fraction(abs_conv[k + 1])
    # group 2: two or more remainders (|I| <= n-2 partial products)
    tails = [sum(c / u**t for t, c in enumerate(a)) for a in absc]
    for r in range(2, n + 1):  # r factors contribute remainders
        for subset in _subsets(n, n - r):
            term = math.prod(tails[i] for i in subset)
            rem = math.prod(
                errs[j] / u ** (k + 1) for j in range(n) if j not in subset
            )
            bound += term * rem * u ** (k + 1)
    # group 3: single remainder against higher coefficient terms
    for i in range(n):
        others = conv([absc[j] for j in range(n) if j != i] or [[Fraction(1)]], (n - 1) * k)
        s = sum(Fraction(c) / u**t for t, c in enumerate(others) if t >= 1)
        bound += errs[i] * s
    # group 4: truncated coefficient tail beyond order k+1
    for t in range(k + 2, n * k + 1):
        bound += Fraction(abs_conv[t]) / u ** (t - (k + 1))

    return Expansion(base, coeffs, _round_up(bound), g_min)


def _subsets(n: int, size: int) -> list[tuple[int, ...]]:
    from itertools import combinations

    return list(combinations(range(n), size))


def expansion_product_leading_zeros(
    first: Expansion, rest: Sequence[Expansion], r: int, s: int
) -> Expansion:
    """Product where ``first`` starts at order r+1 (its coefficients 0..r
    vanish) and is known through order s+r+1, while every factor in
    ``rest`` is known through order k >= s.

    The result starts at order r+1 and is valid through order s+r+1 with a
    remainder scaling like 1/g^(s+r+2).  Index window: the construction is
    meaningful for k-(r+1) <= s <= k.  The bound follows the reduction
    behind the statement: divide out (g-m)^(r+1) from ``first``, apply the
    product rule at order s, and move the power back.
    """
    if r < 0 or s < 0:
        raise DomainError("r and s must be >= 0")
    if not rest:
        return first
    k = max(e.order for e in rest)
    if not (k - (r + 1) <= s <= k):
        raise DomainError(f"index window violated: need {k - (r + 1)} <= s={s} <= {k}")
    if first.order != s + r + 1:
        raise DomainError("first factor must be given through order s+r+1")
    if any(Fraction(c) != 0 for c in first.coeffs[: r + 1]):
        raise DomainError("first factor must have zero coefficients through order r")
    base = first.base
    if any(e.base != base for e in rest):
        raise DomainError("mismatched base offsets")

    # A1 * (g-m)^(r+1) has a plain order-s expansion with the same constant.
    shifted = Expansion(base, first.coeffs[r + 1 :], first.error, first.g_min)
    inner = expansion_product([shifted] + [truncate(e, s) for e in rest])
    coeffs = (0,) * (r + 1) + tuple(inner.coeffs)
    return Expansion(base, coeffs, inner.error, inner.g_min)


def shift_coefficients(
    coeffs: Sequence[Fraction | int], m: int
) -> tuple[Fraction, ...]:
    """Coefficient transform from base m to base 0 (exact, any integer m).

    Sends sum a_i/(g-m)^i to sum b'_t/g^t with
    b'_t = sum_{i=1}^t C(t-1, i-1) m^(t-i) a_i (t >= 1), b'_0 = a_0.
    Truncation at the input length; exact on polynomial instances.
    """
    k = len(coeffs) - 1
    out = [Fraction(coeffs[0])]
    for t in range(1, k + 1):
        bt = sum(
            Fraction(math.comb(t - 1, i - 1)) * Fraction(m) ** (t - i) * Fraction(coeffs[i])
            for i in range(1, t + 1)
        )
        out.append(bt)
    return tuple(out)


def shift_base(e: Expansion, m: int | None = None) -> Expansion:
    """Re-expand a base-m expansion around base 0 with the shift bound.

    Requires m <= k+1 <= g_min^(1/3) (m = 0 is the identity).  The new
    error constant is 3*C_k + 3*k^2*e^m*a~_k where a~ is the monotone
    envelope making a~_i/(i-1)! non-decreasing.
    """
    if m is None:
        m = e.base
    if m != e.base:
        raise DomainError("shift amount must equal the expansion base")
    if m == 0:
        return e
    if m < 0:
        raise DomainError("shift_base requires base m >= 0 (see shift_coefficients)")
    k = e.order
    if not (m <= k + 1 and (k + 1) ** 3 <= e.g_min):
        raise DomainError("hypothesis m <= k+1 <= g_min^(1/3) violated")
    coeffs = shift_coefficients([Fraction(c) for c in e.coeffs], m)
    # monotone envelope: a~_i = (i-1)! * max_{j<=i} |a_j|/(j-1)!
    env = Fraction(0)
    for i in range(1, k + 1):
        cand = abs(Fraction(e.coeffs[i])) / math.factorial(i - 1)
        env = max(env, cand)
    a_tilde_k = env * math.factorial(k - 1) if k >= 1 else Fraction(0)
    err = 3 * Fraction(_round_up(e.error)) + 3 * k * k * Fraction(_round_up(math.exp(m))) * a_tilde_k
    return Expansion(0, coeffs, _round_up(err), e.g_min)


# ---------------------------------------------------------------------------
# zeta-weight tail sums and the coefficient-product inequality
# ---------------------------------------------------------------------------

def tail_zeta_bound(r: int, terms: int | None = None) -> tuple[float, float]:
    """(partial sum, rigorous total bound) for sum_i (a_{i+1} - a_i) i^r.

    The partial sum over i <= I is exact (interval-evaluated at the end);
    the tail uses |a_{i+1} - a_i| < 4^(-i) and a geometric majorant.  The
    total is asserted to be <= 2 * r!.
    """
    if r < 0:
        raise DomainError("r must be >= 0")
    cutoff = terms if terms is not None else max(64, 4 * r)
    partial = PiPoly.zero()
    for i in range(1, cutoff + 1):
        partial = partial + (a_coeff(i + 1) - a_coeff(i)).scale(i**r)
    partial_value = eval_interval(partial, 192)
    # tail: sum_{i>I} i^r/4^i <= (I+1)^r/4^(I+1) * 1/(1 - ratio), with the
    # term ratio ((i+1)/i)^r / 4 <= ((I+2)/(I+1))^r / 4 <= 1/2 for I >= 4r
    head = Fraction((cutoff + 1) ** r, 4 ** (cutoff + 1))
    tail = 2 * head
    total = float(partial_value.hi + tail)
    bound = 2.0 * math.factorial(r)
    if total > bound:
        raise DomainError(f"tail sum {total} exceeds 2*{r}! = {bound}")
    return float(partial_value.midpoint()), total


def coeff_product_bound(
    t: Sequence[int], b: int, c: int
) -> tuple[int, int]:
    """Exact (LHS, RHS) of the coefficient-product inequality

        prod_q sum_{p=1}^{t_q} C(t_q-1, p-1) b^(t_q-p) (c t_q)^(c p)
            <= (c (t_1+...+t_k) + b)^(c (t_1+...+t_k))

    for integer b, c > 1; asserts LHS <= RHS.
    """
    if not t or any(x < 1 for x in t):
        raise DomainError("t must be a non-empty list of positive integers")
    if not (isinstance(b, int) and isinstance(c, int) and b > 1 and c > 1):
        raise DomainError("b and c must be integers > 1")
    lhs = 1
    for tq in t:
        inner = 0
        for p in range(1, tq + 1):
            inner += math.comb(tq - 1, p - 1) * b ** (tq - p) * (c * tq) ** (c * p)
        lhs *= inner
    total = sum(t)
    rhs = (c * total + b) ** (c * total)
    if lhs > rhs:
        raise DomainError(f"coefficient-product inequality failed for t={t}, b={b}, c={c}")
    return lhs, rhs


# ---------------------------------------------------------------------------
# empirical expansion fitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitReport:
    coefficients: tuple[float, ...]
    residuals: tuple[float, ...]
    condition_number: float
    decay_exponent: float | None
    ill_conditioned: bool


def fit_expansion(samples: Sequence[tuple[float, float]], k: int) -> FitReport:
    """Least-squares fit of samples (g, value) to sum_{j<=k} c_j g^(-j).

    Needs at least k+3 distinct g values.  The decay exponent is the
    log-log slope of |residual| against g (close to -(k+1) when the data
    really has an order-k expansion); a large design condition number is
    reported, not fatal.
    """
    gs = [float(g) for g, _ in samples]
    if len(set(gs)) < k + 3:
        raise DomainError(f"need at least {k + 3} distinct g values")
    values = np.array([v for _, v in samples], dtype=float)
    design = np.array([[g ** (-j) for j in range(k + 1)] for g in gs])
    coeffs, _, _, svals = np.linalg.lstsq(design, values, rcond=None)
    cond = float(svals[0] / svals[-1]) if svals[-1] > 0 else math.inf
    fitted = design @ coeffs
    residuals = values - fitted
    decay = None
    nz = [(g, abs(r)) for g, r in zip(gs, residuals) if abs(r) > 1e-300]
    if len(nz) >= 2:
        lg = np.log([g for g, _ in nz])
        lr = np.log([r for _, r in nz])
        slope = np.polyfit(lg, lr, 1)[0]
        decay = float(slope)
    return FitReport(
        coefficients=tuple(float(c) for c in coeffs),
        residuals=tuple(float(r) for r in residuals),
        condition_number=cond,
        decay_exponent=decay,
        ill_conditioned=cond > 1e12,
    )
