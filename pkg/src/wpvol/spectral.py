"""Test-function pipeline, trace-formula coefficients and spectral windows.

The pair at the center is (f0, f): f0 is an even nonnegative bump with
support exactly (-1, 1), built as the self-convolution of a smooth bump g0
on (-1/2, 1/2), and f is its Fourier transform under the convention
fhat(r) = integral e^{-irx} f(x) dx.  The construction makes

    f(rho)  = g0hat(rho)^2  >= 0      on the real line,
    f(it)   = (integral e^{tx} g0 dx)^2 >= 0, increasing in t on [0, 1/2],

with f(0) = 1 after normalizing the mass of g0 to 1.  The function whose
transform equals f is f0 itself, so its convolution powers f0^{*t} are the
geometric-side weights; their mass is f(0)^t = 1.

All integrals are over compact supports (geometric side) or cut where the
super-polynomial decay of f makes the tail negligible (spectral side, with
the cut validated by a doubling check).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.signal import fftconvolve

from .errors import DomainError, NumericsError

_ARCSINH1 = math.asinh(1.0)


# ---------------------------------------------------------------------------
# the bump and its self-convolution
# ---------------------------------------------------------------------------

def _raw_bump(u: np.ndarray) -> np.ndarray:
    """exp(-1/(1-u^2)) on (-1, 1), zero outside (unnormalized, unit half-width)."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ui * ui))
    return out


@lru_cache(maxsize=8)
def _gl_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


@dataclass(frozen=True)
class TestFunction:
    """Sampled f0 = g0 * g0 on a uniform grid over [-2w, 2w] = [-1, 1].

    ``g0_grid``/``g0_values`` hold the normalized inner bump; f0 is its
    discrete self-convolution.  The bump is flat to all orders at its
    support endpoints, so uniform trapezoid sums over it (which is what
    both the convolution and the transforms below reduce to) converge
    root-exponentially - effectively to machine precision at these sizes.
    """

    grid: np.ndarray
    values: np.ndarray
    bump_width: float
    grid_points: int
    g0_grid: np.ndarray
    g0_values: np.ndarray
    _spline: CubicSpline = field(repr=False)

    def f0(self, x) -> np.ndarray:
        """Pointwise f0 (cubic spline through the convolution samples)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        s = 2 * self.bump_width
        inside = np.abs(x) < s
        out = np.zeros_like(x)
        out[inside] = self._spline(x[inside])
        return out


def _g0_samples(grid_points: int, bump_width: float) -> tuple[np.ndarray, np.ndarray]:
    u = np.linspace(-bump_width, bump_width, grid_points + 1)
    g = _raw_bump(u / bump_width)
    h = u[1] - u[0]
    g /= float(np.trapezoid(g, dx=h))  # unit mass => f(0) = 1
    return u, g


def build_test_function(grid_points: int = 2**13, bump_width: float = 0.5) -> TestFunction:
    """Construct f0 = g0 * g0 with g0 the smooth bump on (-bump_width, bump_width).

    The default width 1/2 makes the support of f0 exactly (-1, 1).  g0 is
    normalized to unit mass so that f(0) = integral f0 = 1.
    """
    if grid_points < 2**12:
        raise DomainError("grid_points must be >= 4096")
    if bump_width <= 0:
        raise DomainError("bump width must be positive")
    u, g = _g0_samples(grid_points, bump_width)
    h = u[1] - u[0]
    values = np.maximum(fftconvolve(g, g) * h, 0.0)
    grid = h * np.arange(-grid_points, grid_points + 1)
    return TestFunction(
        grid=grid,
        values=values,
        bump_width=bump_width,
        grid_points=grid_points,
        g0_grid=u,
        g0_values=g,
        _spline=CubicSpline(grid, values),
    )


@dataclass(frozen=True)
class ConvolutionPower:
    """Sampled f0^{*t} on a uniform grid over [-t, t] (t in bump-width pairs)."""

    power: int
    grid: np.ndarray
    values: np.ndarray
    spline: CubicSpline = field(repr=False)

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        lo, hi = self.grid[0], self.grid[-1]
        out = np.where((u >= lo) & (u <= hi), self.spline(np.clip(u, lo, hi)), 0.0)
        return out

    @property
    def mass(self) -> float:
        h = self.grid[1] - self.grid[0]
        return float(np.trapezoid(self.values, dx=h))

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))


class SpectralFunction:
    """Evaluators for f = f0hat on the real line and the imaginary segment."""

    def __init__(self, tf: TestFunction):
        self.test_function = tf
        self._conv_cache: dict[int, ConvolutionPower] = {}
        self._a0_cache: dict[int, float] = {}
        self.support = 2 * tf.bump_width
        # trapezoid weights over the inner bump; f = (g0hat)^2 keeps the
        # transform nonnegative exactly and accurate in relative terms even
        # where it is ~1e-30 (the square of a ~1e-15-accurate number)
        h = tf.g0_grid[1] - tf.g0_grid[0]
        self._gu = tf.g0_grid
        self._gw = tf.g0_values * h
        self._gw_half = self._gw.copy()
        self._gw_half[0] *= 0.5
        self._gw_half[-1] *= 0.5
        self.f_zero = self.eval_imag(0.0)
        self.f_half = self.eval_imag(0.5)

    # -- transforms ---------------------------------------------------------
    def g0_hat(self, rho) -> np.ndarray:
        """Transform of the inner bump: integral cos(rho u) g0(u) du."""
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        return np.cos(np.outer(rho, self._gu)) @ self._gw_half

    def eval_real(self, rho) -> np.ndarray:
        """f(rho) = g0hat(rho)^2 >= 0 (the transform of f0 = g0 * g0)."""
        return self.g0_hat(rho) ** 2

    def eval_imag(self, t) -> np.ndarray | float:
        """f(it) = (integral e^{tu} g0(u) du)^2 = (integral cosh(tu) g0)^2."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        base = np.cosh(np.outer(t_arr, self._gu)) @ self._gw_half
        out = base**2
        return float(out[0]) if np.isscalar(t) or np.asarray(t).ndim == 0 else out

    # -- convolution powers ---------------------------------------------------
    def conv_power(self, t: int) -> ConvolutionPower:
        """f0^{*t} by iterated discrete convolution with a doubling check."""
        if t < 1:
            raise DomainError("convolution power must be >= 1")
        hit = self._conv_cache.get(t)
        if hit is not None:
            return hit
        fine = self._conv_values(t, self.test_function.grid_points)
        coarse = self._conv_values(t, self.test_function.grid_points // 2)
        probe = np.linspace(fine[0][0], fine[0][-1], 501)
        sp_f = CubicSpline(fine[0], fine[1])
        sp_c = CubicSpline(coarse[0], coarse[1])
        delta = float(np.max(np.abs(sp_f(probe) - sp_c(probe))))
        if delta > 1e-9:
            raise NumericsError(f"convolution power {t} not converged: delta={delta}")
        cp = ConvolutionPower(t, fine[0], fine[1], sp_f)
        self._conv_cache[t] = cp
        return cp

    def _conv_values(self, t: int, n: int) -> tuple[np.ndarray, np.ndarray]:
        _, g = _g0_samples(n, self.test_function.bump_width)
        h = 2 * self.test_function.bump_width / n
        vals = fftconvolve(g, g) * h
        out = vals
        for _ in range(t - 1):
            out = fftconvolve(out, vals) * h
        out = np.maximum(out, 0.0)  # fft round-off can dip ~ -1e-17
        half_len = (len(out) - 1) // 2
        grid_t = h * np.arange(-half_len, half_len + 1)
        return grid_t, out

    # -- spectral-side coefficient -------------------------------------------
    def _decay_cut(self, t: int, target: float = 1e-14) -> float:
        """Radius beyond which |f(rho)|^t tanh(pi rho) 2 rho is below target.

        f decays root-exponentially, so once the pointwise envelope is below
        ``target`` the remaining tail integral is of the same order; the cut
        is additionally validated by the doubling check in :meth:`a0`.
        """
        rho = 5.0
        while rho < 700.0:
            probe = np.linspace(rho, rho + 5.0, 41)
            mag = np.max(np.abs(self.eval_real(probe)) ** t * 2.0 * (probe + 5.0))
            if mag < target:
                return rho + 5.0
            rho += 5.0
        raise NumericsError("could not find a spectral cut radius")

    def a0(self, t: int, tol: float = 1e-8) -> float:
        """Identity-term coefficient: integral over the tempered spectrum of
        f(sqrt(r - 1/4))^t tanh(pi sqrt(r - 1/4)) dr from r = 1/4.

        Computed in the r variable (adaptive) and in the substituted
        rho variable (composite Gauss-Legendre, rho = sqrt(r - 1/4)); the
        two must agree to ``tol``.
        """
        if t < 1:
            raise DomainError("t must be >= 1")
        cached = self._a0_cache.get(t)
        if cached is not None:
            return cached
        cut = self._decay_cut(t)

        def integrand_r(r: float) -> float:
            rho = math.sqrt(max(r - 0.25, 0.0))
            return float(self.eval_real(rho)[0]) ** t * math.tanh(math.pi * rho)

        # adaptive quadrature in the r variable, split dyadically so the
        # endpoint square-root behaviour and the long decaying tail each
        # meet the absolute tolerance without excessive subdivision
        rho_edges = [0.0, 1.0]
        while rho_edges[-1] < cut:
            rho_edges.append(min(2.0 * rho_edges[-1], cut))
        path_r = 0.0
        for ra, rb in zip(rho_edges[:-1], rho_edges[1:]):
            part, _ = quad(
                integrand_r,
                0.25 + ra * ra,
                0.25 + rb * rb,
                epsabs=1e-12,
                epsrel=0.0,
                limit=200,
            )
            path_r += part

        def path_rho_value(radius: float, panels: int) -> float:
            edges = np.linspace(0.0, radius, panels + 1)
            nodes, weights = _gl_nodes(64)
            total = 0.0
            for a, b in zip(edges[:-1], edges[1:]):
                x = 0.5 * (b - a) * (nodes + 1.0) + a
                fx = self.eval_real(x) ** t
                total += 0.5 * (b - a) * float(np.sum(weights * fx * np.tanh(np.pi * x) * 2.0 * x))
            return total

        panels = max(8, int(cut))
        path_rho = path_rho_value(cut, panels)
        refined = path_rho_value(cut, 2 * panels)
        if abs(refined - path_rho) > 1e-10 * max(1.0, abs(path_rho)):
            raise NumericsError("rho-path quadrature did not stabilize")
        if abs(path_r - path_rho) > tol:
            raise NumericsError(
                f"a0({t}) dual quadratures disagree: {path_r} vs {path_rho}"
            )
        value = 0.5 * (path_r + path_rho)
        self._a0_cache[t] = value
        return value

    # -- geometric-side coefficient --------------------------------------------
    def a1_terms(
        self, t: int, k_from: int = 1, tail_target: float = 1e-10
    ) -> tuple[float, float, float]:
        """(sum over k >= k_from, k=1 term, rigorous k-tail bound) for

            sum_k (1/k) integral 2 sinh(u/2k)^2 / sinh(u/2) f0^{*t}(u) du,

        the substituted form of the length-spectrum coefficient.  The tail
        over k > K uses sinh(u/2k) <= (u/2k) cosh(u/2K) and
        u^2/sinh(u/2) <= 2u, giving sum_{k>K} <= cosh^2(.)*M1 / (2 K^2) with
        M1 = integral u f0^{*t}; K is chosen to push it below tail_target.
        """
        if t < 1:
            raise DomainError("t must be >= 1")
        cp = self.conv_power(t)
        s_top = t * self.support
        nodes, weights = _gl_nodes(400)
        u = 0.5 * s_top * (nodes + 1.0)
        fu = cp(u)
        wfu = weights * fu * 0.5 * s_top
        m1 = float(np.sum(wfu * u))
        k_cap = max(1000, int(math.sqrt(max(m1, 1e-30) / (2.0 * tail_target * 0.9))) + 1)
        tail = math.cosh(s_top / (2 * k_cap)) ** 2 * m1 / (2.0 * k_cap**2)

        sinh_half = np.sinh(u / 2.0)
        base = np.where(u > 0, 2.0 / np.where(u > 0, sinh_half, 1.0), 0.0) * wfu
        total = 0.0
        first = 0.0
        batch = 20000
        for start in range(k_from, k_cap + 1, batch):
            ks = np.arange(start, min(start + batch, k_cap + 1), dtype=float)
            block = np.sinh(u[None, :] / (2.0 * ks[:, None])) ** 2 * base[None, :]
            sums = block.sum(axis=1) / ks
            total += float(sums.sum())
            if start == k_from and k_from == 1:
                first = float(sums[0])
        return total, first, tail

    def a1(self, t: int, tail_target: float = 1e-10) -> float:
        """Length-spectrum coefficient (k-sum with certified tail)."""
        total, _, tail = self.a1_terms(t, tail_target=tail_target)
        return total + 0.5 * tail

    # -- point-mass functionals --------------------------------------------------
    def nu_tilde1_quadrature(self, j: int) -> float:
        """integral e^{r/2} f0^{*(j+1)}(r) dr (equals f(i/2)^(j+1))."""
        cp = self.conv_power(j + 1)
        s_top = (j + 1) * self.support
        nodes, weights = _gl_nodes(600)
        r = s_top * nodes  # symmetric interval [-s_top, s_top]
        vals = cp(r) * np.exp(r / 2.0)
        return s_top * float(np.sum(weights * vals))

    def nu_tilde1(self, poly: Sequence[float], tol: float = 1e-6) -> float:
        """f(i/2) * P(f(i/2)) for P(x) = sum_j poly[j] x^j, verified against
        the convolution-power quadrature term by term."""
        point = sum(s * self.f_half ** (j + 1) for j, s in enumerate(poly))
        quad_path = sum(
            s * self.nu_tilde1_quadrature(j) for j, s in enumerate(poly) if s
        )
        scale = max(1.0, abs(point))
        if abs(point - quad_path) > tol * scale:
            raise NumericsError(
                f"point-mass functional paths disagree: {point} vs {quad_path}"
            )
        return point

    def nu1_monomial(self, p: int) -> float:
        """nu_1(x^p); by definition the coefficient a1 at power p+1."""
        if p < 0:
            raise DomainError("monomial degree must be >= 0")
        return self.a1(p + 1)

    def support_difference(self, p: int) -> float:
        """(nu_1 - nu~_1)(x^p) in the cancellation-free form

            -2 integral_0^inf e^{-r/2} f0^{*(p+1)} dr  +  (k >= 2 terms),

        avoiding the subtraction of two exponentially large numbers."""
        cp = self.conv_power(p + 1)
        s_top = (p + 1) * self.support
        nodes, weights = _gl_nodes(600)
        r = 0.5 * s_top * (nodes + 1.0)
        neg = -2.0 * 0.5 * s_top * float(np.sum(weights * cp(r) * np.exp(-r / 2.0)))
        k_ge2, _, tail = self.a1_terms(p + 1, k_from=2)
        return neg + k_ge2 + 0.5 * tail


@lru_cache(maxsize=4)
def default_spectral(grid_points: int = 2**13, bump_width: float = 0.5) -> SpectralFunction:
    """Shared spectral pipeline for the standard test function."""
    return SpectralFunction(build_test_function(grid_points, bump_width))


# ---------------------------------------------------------------------------
# support check and sinh inequality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SupportCheck:
    p: int
    difference: float
    bound: float

    @property
    def margin(self) -> float:
        return self.bound - abs(self.difference)

    @property
    def passed(self) -> bool:
        return self.margin >= 0.0


def sinh_inequality_holds(x: float, k: int) -> bool:
    """sinh(x/2k)^2 <= sinh(x/2)/k for x >= 0, k >= 2."""
    return math.sinh(x / (2 * k)) ** 2 <= math.sinh(x / 2.0) / k + 1e-300


def support_check(
    p_max: int, sf: SpectralFunction | None = None, slack: float = 1e-6
) -> list[SupportCheck]:
    """|(nu_1 - nu~_1)(x^p)| <= (pi^2/6) f(0)^(p+1) (1 + slack) for p <= p_max."""
    if p_max > 12:
        raise DomainError("support check calibrated for p <= 12")
    sf = sf or default_spectral()
    out = []
    for p in range(p_max + 1):
        diff = sf.support_difference(p)
        bound = (math.pi**2 / 6.0) * sf.f_zero ** (p + 1) * (1.0 + slack)
        rec = SupportCheck(p=p, difference=diff, bound=bound)
        if not rec.passed:
            raise NumericsError(
                f"support bound failed at p={p}: |{diff}| > {bound}"
            )
        out.append(rec)
    return out


# ---------------------------------------------------------------------------
# geodesic kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeodesicKernels:
    t: int
    grid: np.ndarray
    full: np.ndarray       # G_t, all windings
    truncated: np.ndarray  # R_t, windings k <= ceil(t / (2 arcsinh 1))
    k_cut: int


def geodesic_kernels(
    t: int, sf: SpectralFunction | None = None, samples: int = 2000
) -> GeodesicKernels:
    """Sampled G_t and R_t on (0, t * support]:

        G_t(l) = sum_{k>=1} l/(2 sinh(kl/2)) f0^{*t}(kl),
        R_t    = the same sum truncated at k = ceil(t/(2 arcsinh 1)),

    both supported in [0, t * support] since f0^{*t} lives in [-t s, t s].
    """
    if t < 1:
        raise DomainError("t must be >= 1")
    sf = sf or default_spectral()
    cp = sf.conv_power(t)
    s_top = t * sf.support
    grid = np.linspace(s_top / samples, s_top, samples)
    k_cut = math.ceil(t / (2.0 * _ARCSINH1))
    full = np.zeros_like(grid)
    truncated = np.zeros_like(grid)
    for i, ell in enumerate(grid):
        k_max = int(s_top / ell) + 1
        ks = np.arange(1, k_max + 1, dtype=float)
        terms = ell / (2.0 * np.sinh(ks * ell / 2.0)) * cp(ks * ell)
        full[i] = terms.sum()
        truncated[i] = terms[: min(k_cut, k_max)].sum()
    return GeodesicKernels(t=t, grid=grid, full=full, truncated=truncated, k_cut=k_cut)


# ---------------------------------------------------------------------------
# cosine analysis
# ---------------------------------------------------------------------------

def chebyshev_coeffs(
    samples: np.ndarray, tol: float = 1e-9, alias_tol: float = 1e-6
) -> np.ndarray:
    """Cosine-series coefficients of an even 2*pi-periodic sampled function.

    ``samples`` are w(2 pi j / N), j = 0..N-1.  Returns a_k with
    w(theta) = sum_k a_k cos(k theta); reconstruction on the grid must be
    accurate to ``tol``, and energy in the top decile of modes beyond
    ``alias_tol`` (relative) raises — the sampling is too coarse.
    """
    w = np.asarray(samples, dtype=float)
    n = len(w)
    if n < 8:
        raise DomainError("need at least 8 samples")
    if n % 2:
        raise DomainError("need an even number of samples")
    sym = np.max(np.abs(w[1:] - w[1:][::-1]))
    if sym > 1e-8 * max(1.0, np.max(np.abs(w))):
        raise DomainError("samples are not even around theta = 0")
    spec = np.fft.rfft(w) / n
    coeffs = np.concatenate(([spec[0].real], 2.0 * spec[1:].real))
    coeffs[-1] /= 2.0 if n % 2 == 0 else 1.0  # Nyquist mode counted once
    total = float(np.sum(coeffs**2))
    top = float(np.sum(coeffs[-max(1, len(coeffs) // 10) :] ** 2))
    if total > 0 and top / total > alias_tol:
        raise NumericsError("aliasing detected: refine the sampling grid")
    theta = 2.0 * np.pi * np.arange(n) / n
    recon = sum(a * np.cos(k * theta) for k, a in enumerate(coeffs))
    err = float(np.max(np.abs(recon - w)))
    if err > tol:
        raise NumericsError(f"cosine reconstruction error {err} exceeds {tol}")
    return coeffs


# ---------------------------------------------------------------------------
# the spectral window and its derivative norms
# ---------------------------------------------------------------------------

def _smoothstep(s: np.ndarray) -> np.ndarray:
    """C^infinity step: 0 for s <= 0, 1 for s >= 1."""
    s = np.asarray(s, dtype=float)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        a = np.where(s > 0, np.exp(-1.0 / np.maximum(s, 1e-300)), 0.0)
        b = np.where(s < 1, np.exp(-1.0 / np.maximum(1.0 - s, 1e-300)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class Window:
    """Smooth indicator of the spectral detection window.

    h = 1 on [f(i sqrt(eps)), f(i t_hi_plateau)], h = 0 outside
    (f(0), f(i t_hi_cut)); the lower transition is mollified at scale
    delta_lo ~ sqrt(eps) (valid while that fits inside the transition
    interval, i.e. eps >= eps_floor), which realizes the eps^(-m/2)
    derivative-norm law of the construction.  Outside the validity window
    the scale clips to the transition width and the law degrades.
    """

    epsilon: float
    x_lo_zero: float
    x_lo_one: float
    x_hi_one: float
    x_hi_zero: float
    delta_lo: float
    delta_hi: float
    f_half: float

    def h(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        up = _smoothstep((x - (self.x_lo_one - self.delta_lo)) / self.delta_lo)
        down = _smoothstep(((self.x_hi_one + self.delta_hi) - x) / self.delta_hi)
        return up * down

    def w(self, theta) -> np.ndarray:
        """h(f(i/2) cos theta) / (f(i/2) cos theta) with the removable zero."""
        theta = np.asarray(theta, dtype=float)
        x = self.f_half * np.cos(theta)
        hx = self.h(x)
        out = np.zeros_like(x)
        nz = hx != 0.0
        out[nz] = hx[nz] / x[nz]
        return out


_FD_STENCILS: dict[int, tuple[np.ndarray, int]] = {
    1: (np.array([-0.5, 0.0, 0.5]), 1),
    2: (np.array([1.0, -2.0, 1.0]), 1),
    3: (np.array([-0.5, 1.0, 0.0, -1.0, 0.5]), 2),
    4: (np.array([1.0, -4.0, 6.0, -4.0, 1.0]), 2),
    5: (np.array([-0.5, 2.0, -2.5, 0.0, 2.5, -2.0, 0.5]), 3),
    6: (np.array([1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0]), 3),
}


def _fd_sup(
    fn: Callable[[np.ndarray], np.ndarray],
    centers: np.ndarray,
    m: int,
    feature: float,
) -> float:
    """sup over ``centers`` of the order-2 central difference for w^(m).

    The step balances truncation (h^2/feature^(m+2)) against round-off
    (eps/h^m): h = feature * eps^(1/(m+2)) keeps both around eps^(2/(m+2))
    relative, which is ample for factor-level scaling tests.
    """
    h = feature * (2.2e-16) ** (1.0 / (m + 2))
    stencil, reach = _FD_STENCILS[m]
    acc = np.zeros_like(centers)
    for off, c in zip(range(-reach, reach + 1), stencil):
        if c:
            acc += c * fn(centers + off * h)
    return float(np.max(np.abs(acc))) / h**m


def build_window(
    epsilon: float,
    sf: SpectralFunction | None = None,
    hi_plateau_t: float = math.sqrt(0.25 - 0.0024),
    hi_cut_t: float = math.sqrt(0.25 - 0.0023),
    eps_floor: float = 2e-3,
    max_order: int = 6,
) -> tuple[Window, dict[int, float]]:
    """Construct the window and finite-difference norms of w^(m), m <= max_order.

    Raises :class:`DomainError` when the plateau would overlap the cutoffs
    (epsilon too large, or hi parameters out of order).
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    sf = sf or default_spectral()
    t_lo = math.sqrt(epsilon)
    if not (t_lo < hi_plateau_t < hi_cut_t <= 0.5):
        raise DomainError("transitions overlapping: need sqrt(eps) < hi plateau < hi cut <= 1/2")
    x_lo_zero = sf.f_zero
    x_lo_one = float(sf.eval_imag(t_lo))
    x_hi_one = float(sf.eval_imag(hi_plateau_t))
    x_hi_zero = float(sf.eval_imag(hi_cut_t))
    width_lo = x_lo_one - x_lo_zero
    width_hi = x_hi_zero - x_hi_one
    if width_lo <= 0 or width_hi <= 0 or x_lo_one >= x_hi_one:
        raise DomainError("transitions overlapping")
    delta_lo = 0.95 * width_lo * min(1.0, math.sqrt(eps_floor / epsilon))
    delta_hi = 0.95 * width_hi
    win = Window(
        epsilon=epsilon,
        x_lo_zero=x_lo_zero,
        x_lo_one=x_lo_one,
        x_hi_one=x_hi_one,
        x_hi_zero=x_hi_zero,
        delta_lo=delta_lo,
        delta_hi=delta_hi,
        f_half=sf.f_half,
    )

    # sup of |w^(m)| over theta: coarse global sweep plus zooms around the
    # two transition bands (theta = arccos(x / f(i/2))), with an FD step
    # matched to each band's feature scale.
    norms: dict[int, float] = {}
    bands: list[tuple[np.ndarray, float]] = [
        (np.linspace(0.0, 2.0 * math.pi, 20001), 2.0 * math.pi / 20000)
    ]
    for a, b in (
        (x_lo_one - delta_lo, x_lo_one),
        (x_hi_one, x_hi_one + delta_hi),
    ):
        th_hi = math.acos(max(-1.0, min(1.0, a / sf.f_half)))
        th_lo = math.acos(max(-1.0, min(1.0, b / sf.f_half)))
        width = th_hi - th_lo
        pad = 2.0 * width
        centers = np.linspace(max(0.0, th_lo - pad), min(math.pi, th_hi + pad), 4001)
        bands.append((centers, width))
    for m in range(1, max_order + 1):
        norms[m] = max(_fd_sup(win.w, centers, m, feat) for centers, feat in bands)
    return win, norms


def gap_probability_report(g: float, epsilon: float, m: int, fitted_c: float) -> float:
    """The reporting-only bound value C * eps^(-m/2) / g."""
    if g <= 0 or epsilon <= 0 or m < 0 or fitted_c < 0:
        raise DomainError("inputs must be positive")
    return fitted_c * epsilon ** (-m / 2.0) / g
