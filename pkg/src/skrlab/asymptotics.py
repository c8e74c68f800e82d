"""High-order Bessel evaluation and weighted averages of Bessel functions.

Two summation formulas are implemented and validated against direct
summation.  The first averages a single Bessel function J_{k-1}(x) over
weights k in an arithmetic progression mod 4; the answer is a smooth term
w(x) plus an oscillatory term built from the transform

    wcheck(v) = int_0^oo w(sqrt(u)) / sqrt(2 pi u) e^{iuv} du.

The second treats the genuinely bilinear sum

    S(alpha, beta) = sum_{k odd} i^k J_k(4 pi alpha) J_{2k-1}(4 pi beta) w(k),

whose asymptotic expansion is a pair of conjugate stationary-phase main
terms H_{+-}(beta sqrt(1-gamma^2), gamma) / sqrt(alpha) with
gamma = beta / (4 alpha), valid for gamma < 1.

The weight w is a fixed smooth bump supported on (K, 2K); its derivatives
are obtained by exact symbolic differentiation, so the Taylor-series
constants of the expansion can be used at full accuracy.
"""

import math
import cmath
from functools import lru_cache

import mpmath
import numpy as np
import sympy


TWO_PI = 2.0 * math.pi

# Constants of the stationary-phase main term.  The coefficient a_j of the
# Taylor expansion is fixed by matching e(-+ 4 pi^2 alpha c t^2) against
# a_j (alpha c)^j (2 pi i t)^{2j}, giving a_j = (-+ 2 pi i)^j / j! with
# a_0 = 1.  With the -1/2 prefactor carried inside W, the weight of the
# stationary-phase integral is e(-u) du/dv = (sqrt(1-v^2) - iv)
# / (2 pi sqrt(1-v^2)) = C1 + (C2/(8 pi)) v / sqrt(1-v^2), which yields C1
# and C2 below once the second piece is rewritten through h(x) = K W(x)/x.
# (Splitting off -1/2 a second time here would halve and flip the main
# term; the direct-sum oracle pins the normalization used here.)
C1 = 1.0 / (2.0 * math.pi)
C2 = -4.0j


@lru_cache(maxsize=64)
def _leggauss(n):
    return np.polynomial.legendre.leggauss(n)


def _gl_integrate(fn, a, b, n):
    """Gauss-Legendre quadrature; returns (integral, L1 mass of the terms)."""
    nodes, weights = _leggauss(n)
    x = 0.5 * (b - a) * nodes + 0.5 * (b + a)
    terms = 0.5 * (b - a) * weights * fn(x)
    return np.sum(terms), float(np.sum(np.abs(terms)))


def _gl_adaptive(fn, a, b, tol, n0=64, nmax=1 << 14):
    """Doubles the node count until two refinements agree.

    The agreement threshold never drops below the roundoff floor set by the
    L1 mass of the quadrature terms, which is where a spectrally converged
    rule stops improving.
    """
    n = n0
    prev, mass = _gl_integrate(fn, a, b, n)
    while n < nmax:
        n *= 2
        cur, mass = _gl_integrate(fn, a, b, n)
        if abs(cur - prev) <= max(tol, 64.0 * np.finfo(float).eps * mass):
            return cur
        prev = cur
    raise RuntimeError("quadrature did not reach the requested tolerance")


class WeightFunction:
    """Smooth bump w(x) = exp(-1/(1-t^2) + 1), t = (2x-3K)/K, on (K, 2K).

    Derivatives w^{(j)} come from symbolic differentiation of the closed
    form.  The recorded constants C_j = K^j max |w^{(j)}| certify the
    derivative bounds |w^{(j)}| <= C_j K^{-j} that both summation formulas
    assume.
    """

    def __init__(self, K, max_order=26):
        if K < 1:
            raise ValueError("scale K must be at least 1")
        self.K = float(K)
        self.max_order = max_order
        # Writing w(x) = R(t) e^{1 - 1/(1-t^2)} with t = (2x-3K)/K, each
        # x-derivative maps R to (2/K)(R' + R g') with g = -1/(1-t^2).  The
        # rational prefactors R_j stay compact after cancellation, unlike
        # repeated blind differentiation of the full closed form.
        self._sym_t = sympy.Symbol("t")
        self._gprime = sympy.cancel(
            sympy.diff(-1 / (1 - self._sym_t ** 2), self._sym_t))
        self._rats = [sympy.Integer(1)]
        self._funcs = {}
        # interior cutoff: outside |t| <= tmax the bump is below exp(-600)
        # and the rational prefactors of high derivatives dominate floats
        self._tmax = math.sqrt(1.0 - 1.0 / 600.0)

    def _rat_coeffs(self, j):
        if j not in self._funcs:
            while len(self._rats) <= j:
                r = self._rats[-1]
                self._rats.append(sympy.cancel(
                    sympy.diff(r, self._sym_t) + r * self._gprime))
            num, den = sympy.fraction(sympy.together(self._rats[j]))
            cn = [float(c) for c in sympy.Poly(num, self._sym_t).all_coeffs()]
            cd = [float(c) for c in sympy.Poly(den, self._sym_t).all_coeffs()]
            self._funcs[j] = (np.array(cn), np.array(cd))
        return self._funcs[j]

    def deriv(self, j, x):
        """w^{(j)}(x), elementwise over arrays, zero outside the support."""
        if j < 0 or j > self.max_order:
            raise ValueError("derivative order outside the prepared range")
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.zeros_like(x)
        t = (2.0 * x - 3.0 * self.K) / self.K
        mask = np.abs(t) < self._tmax
        if mask.any():
            tm = t[mask]
            cn, cd = self._rat_coeffs(j)
            rat = np.polyval(cn, tm) / np.polyval(cd, tm)
            out[mask] = ((2.0 / self.K) ** j * rat
                         * np.exp(1.0 - 1.0 / (1.0 - tm * tm)))
        return float(out[0]) if scalar else out

    def __call__(self, x):
        return self.deriv(0, x)

    def deriv_bound(self, j, samples=4001):
        """Recorded constant C_j with |w^{(j)}| <= C_j K^{-j}."""
        grid = np.linspace(self.K, 2.0 * self.K, samples)
        return float(np.max(np.abs(self.deriv(j, grid))) * self.K ** j)

    def wcheck(self, v, tol=1e-14):
        """wcheck(v) = int_0^oo w(sqrt(u))/sqrt(2 pi u) e^{iuv} du.

        Substituting u = s^2 reduces this to
        sqrt(2/pi) int_K^{2K} w(s) e^{i s^2 v} ds over the support.
        """
        fn = lambda s: self.deriv(0, s) * np.exp(1j * s * s * v)
        n0 = min(max(64, 8 * int(abs(v) * self.K * self.K) + 8), 4096)
        val = _gl_adaptive(fn, self.K, 2.0 * self.K, tol, n0=n0)
        return complex(math.sqrt(2.0 / math.pi) * val)

    def hat(self, t, tol=1e-14):
        """Fourier transform what(t) = int w(x) e^{-2 pi i x t} dx."""
        fn = lambda x: self.deriv(0, x) * np.exp(-2j * math.pi * x * t)
        n0 = min(max(64, 8 * int(abs(t) * self.K) + 8), 4096)
        val = _gl_adaptive(fn, self.K, 2.0 * self.K, tol, n0=n0)
        return complex(val)


class BesselSumParams:
    """Parameters (alpha, beta, K) of the bilinear sum, with gamma = beta/(4 alpha)."""

    def __init__(self, alpha, beta, K):
        if alpha <= 0 or beta <= 0:
            raise ValueError("alpha and beta must be positive")
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.K = float(K)
        self.gamma = self.beta / (4.0 * self.alpha)

    @property
    def regime(self):
        if self.alpha < self.K / 100.0 or self.beta < self.K / 100.0:
            return "exponentially-small"
        if self.gamma >= 1.0:
            return "gamma-large"
        return "main-term"

    def __repr__(self):
        return ("BesselSumParams(alpha=%g, beta=%g, K=%g, gamma=%g)"
                % (self.alpha, self.beta, self.K, self.gamma))


def bessel_J(l, x, tol=1e-12):
    """J_l(x) by quadrature of int_{-1/2}^{1/2} e(lt) e^{-ix sin(2 pi t)} dt.

    The integrand is smooth and periodic, so the trapezoid rule on n
    equispaced points converges superexponentially once n resolves the
    oscillation; n is doubled until two refinements agree within tol.
    """
    if l < 0 or l > 10 ** 4:
        raise ValueError("order outside the supported envelope [0, 1e4]")
    if x < 0 or x > 10 ** 7:
        raise ValueError("argument outside the supported envelope [0, 1e7]")
    if abs(l - round(l)) > 1e-9:
        raise ValueError("the integral representation requires integer order")
    n = 64
    target = 2.0 * (abs(l) + abs(x)) + 32.0
    while n < target:
        n *= 2
    t = (np.arange(n) - n // 2) / float(n)
    prev = float(np.mean(np.cos(TWO_PI * l * t - x * np.sin(TWO_PI * t))))
    while n <= 1 << 22:
        n *= 2
        t = (np.arange(n) - n // 2) / float(n)
        cur = float(np.mean(np.cos(TWO_PI * l * t - x * np.sin(TWO_PI * t))))
        if abs(cur - prev) <= tol:
            return cur
        prev = cur
    raise RuntimeError("Bessel quadrature refinement did not converge")


def g_oscillatory(x, w, tol=1e-14):
    """g(x) = x^{-1/2} Im(e^{ix - pi i/4} wcheck(1/(2x)))."""
    if x <= 0:
        raise ValueError("x must be positive")
    phase = cmath.exp(1j * (x - math.pi / 4.0))
    return (phase * w.wcheck(1.0 / (2.0 * x), tol=tol)).imag / math.sqrt(x)


def single_bessel_sum(a, x, w, tol=1e-12):
    """Average of J_{k-1}(x) over weights k = a mod 4; returns (direct, formula).

    direct  = 4 sum_{k = a mod 4} w(k-1) J_{k-1}(x)
    formula = w(x) - i^a g(x)
    and the two agree up to O(x/K^3).
    """
    if a not in (0, 2):
        raise ValueError("the progression parameter a must be 0 or 2")
    if x <= 0:
        raise ValueError("x must be positive")
    K = w.K
    # far below the transition region the terms are exponentially small,
    # beneath the float quadrature noise floor, so switch to high precision
    exp_small = x < K / 100.0
    direct = mpmath.mpf(0) if exp_small else 0.0
    k = int(math.floor(K)) // 4 * 4 + a
    while k - 1 <= 2 * K:
        if k - 1 >= K:
            wk = w(float(k - 1))
            if wk != 0.0:
                if exp_small:
                    with mpmath.workdps(60):
                        direct += 4.0 * wk * mpmath.besselj(k - 1, x)
                else:
                    direct += 4.0 * wk * bessel_J(k - 1, x, tol=tol)
        k += 4
    direct = float(direct)
    sign = 1.0 if a == 0 else -1.0
    # g(x) is superpolynomially small for x far below K (it is bounded by
    # (x/K^2)^j for every j), so it is dropped there rather than chasing a
    # hugely oscillatory transform
    osc = 0.0 if exp_small else g_oscillatory(x, w)
    formula = w(x) - sign * osc
    return direct, formula


def even_bessel_sum(x, w, tol=1e-12):
    """Alternating even-weight average; returns (direct, formula).

    direct  = 2 sum_{k even} i^k w(k-1) J_{k-1}(x)
    formula = -g(x)
    The smooth terms of the two progressions k = 0, 2 mod 4 cancel and the
    oscillatory terms add, which pins the constant at -1 (combining the two
    mod-4 formulas with i^0 = 1 and i^2 = -1 gives (1/2)(-g - g) = -g).
    """
    d0, _ = single_bessel_sum(0, x, w, tol=tol)
    d2, _ = single_bessel_sum(2, x, w, tol=tol)
    direct = 0.5 * (d0 - d2)
    formula = -g_oscillatory(x, w)
    return direct, formula


def s_direct(p, w, tol=1e-12):
    """S(alpha, beta) = sum_{k odd} i^k J_k(4 pi alpha) J_{2k-1}(4 pi beta) w(k).

    i^k is handled exactly (k mod 4 = 1 gives +i, k mod 4 = 3 gives -i), so
    the result is purely imaginary; it is returned as a complex number.

    In the exponentially small regime (alpha or beta below K/100) the terms
    sit far under the noise floor of float quadrature, so the Bessel values
    are taken in arbitrary precision instead.
    """
    K = p.K
    exp_small = p.regime == "exponentially-small"
    x1 = 4.0 * math.pi * p.alpha
    x2 = 4.0 * math.pi * p.beta
    total = mpmath.mpf(0) if exp_small else 0.0
    k = int(math.floor(K)) | 1
    while k <= 2 * K:
        wk = w(float(k))
        if wk != 0.0:
            if exp_small:
                with mpmath.workdps(60):
                    term = wk * mpmath.besselj(k, x1) * mpmath.besselj(2 * k - 1, x2)
            else:
                term = wk * bessel_J(k, x1, tol=tol) * bessel_J(2 * k - 1, x2, tol=tol)
            total += term if k % 4 == 1 else -term
        k += 2
    return complex(0.0, float(total))


def _taylor_weight(w, alpha, x, base, J=12, cutoff=1e-18):
    """W(x) = -1/2 sum_{j <= J} a_j alpha^j w^{(2j)}(x), a_j = base^j / j!.

    The derivatives of the compact bump grow superfactorially, so the j-sum
    is an asymptotic series: it is summed only while the terms shrink, and
    stops at the smallest term (capped at J = 12 terms).
    """
    total = 0.0 + 0.0j
    coef = 1.0 + 0.0j
    last = None
    for j in range(J + 1):
        term = coef * w.deriv(2 * j, x)
        if last is not None and abs(term) >= last:
            break
        total += term
        last = abs(term)
        if last <= cutoff * (1.0 + abs(total)):
            break
        coef *= base * alpha / (j + 1)
    return -0.5 * total


def _h_minus(p, w, J=12):
    """H_-(x, y) at x = beta sqrt(1-gamma^2), y = gamma.

    H_-(x, y) = 8^{-1/2} e(1/8) (C1 W(2 pi x) + C2 (beta/4K) y h(2 pi x))
    with h(x) = K W(x) / x and the minus-branch Taylor base -2 pi i.
    """
    gamma = p.gamma
    x = p.beta * math.sqrt(1.0 - gamma * gamma)
    arg = TWO_PI * x
    W = _taylor_weight(w, p.alpha, arg, base=-TWO_PI * 1j, J=J)
    h = p.K * W / arg
    pref = cmath.exp(2j * math.pi / 8.0) / math.sqrt(8.0)
    return pref * (C1 * W + C2 * (p.beta / (4.0 * p.K)) * gamma * h)


def s_asymptotic(p, w, J=12):
    """Stationary-phase main terms for S(alpha, beta); requires gamma < 1.

    Returns sum_{+-} H_{+-}(beta sqrt(1-gamma^2), gamma) / sqrt(alpha)
    times e(+-(2 alpha + beta^2/(4 alpha))).  The plus branch is the
    conjugate of the minus branch with an overall sign, H_+ = -conj(H_-),
    which is what makes the two main terms combine to a purely imaginary
    value, matching the exact sum.
    """
    if p.gamma >= 1.0:
        raise ValueError("gamma >= 1: no main term, only the O(1/K) bound")
    if p.alpha > p.K ** 2:
        raise ValueError("alpha outside the K^2 envelope")
    hm = _h_minus(p, w, J=J)
    theta = 2.0 * p.alpha + p.beta ** 2 / (4.0 * p.alpha)
    zm = hm * cmath.exp(-2j * math.pi * theta)
    zp = (-hm.conjugate()) * cmath.exp(2j * math.pi * theta)
    return (zm + zp) / math.sqrt(p.alpha)


def ik_integral(u, alpha, sign, w, J=12, tol=1e-10):
    """Oscillatory inner integral and its expansion; returns (integral, expansion).

    integral  = int e(sign 2 alpha cos(2 pi (2u - t))) what(-t) dt
    expansion = e(sign 2 alpha c) sum_{j <= J} a_j (alpha c)^j
                  w^{(2j)}(-sign 4 pi alpha s),
    with c = cos(4 pi u), s = sin(4 pi u), and the two differ by O(1/K).
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if alpha < 0 or alpha > w.K ** 2:
        raise ValueError("alpha outside the regime of the expansion")
    K = w.K
    # what decays superpolynomially once |t| K >> 1; truncate accordingly
    T = 80.0 / K
    nodes, weights = _leggauss(2048)
    xs = 0.5 * K * nodes + 1.5 * K
    wx = (0.5 * K * weights * w(xs)).astype(complex)

    def fn(ts):
        # what(-t) = int w(x) e^{2 pi i x t} dx, evaluated for all ts at once
        hat = np.empty(ts.shape, dtype=complex)
        for i in range(0, len(ts), 2048):
            chunk = ts[i:i + 2048]
            hat[i:i + 2048] = np.exp(2j * math.pi * np.outer(chunk, xs)) @ wx
        phase = np.exp(sign * 2j * TWO_PI * alpha
                       * np.cos(TWO_PI * (2.0 * u - ts)))
        return phase * hat

    # the integrand decays to the noise floor at the truncation ends, so
    # trapezoid refinement converges quickly; double until two grids agree
    n = 4096
    ts = np.linspace(-T, T, n + 1)
    prev = np.trapezoid(fn(ts), ts)
    integral = None
    while n <= 1 << 18:
        n *= 2
        ts = np.linspace(-T, T, n + 1)
        cur = np.trapezoid(fn(ts), ts)
        if abs(cur - prev) <= tol:
            integral = cur
            break
        prev = cur
    if integral is None:
        raise RuntimeError("inner-integral refinement did not converge")

    c = math.cos(2.0 * TWO_PI * u)
    s = math.sin(2.0 * TWO_PI * u)
    expansion = 0.0 + 0.0j
    coef = 1.0 + 0.0j
    last = None
    for j in range(J + 1):
        term = coef * w.deriv(2 * j, -sign * TWO_PI * 2.0 * alpha * s)
        if last is not None and abs(term) >= last:
            break
        expansion += term
        last = abs(term)
        coef *= (sign * TWO_PI * 1j) * (alpha * c) / (j + 1)
    expansion *= cmath.exp(sign * 2j * math.pi * 2.0 * alpha * c)
    return complex(integral), complex(expansion)
