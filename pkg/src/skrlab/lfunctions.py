"""Numerical L-values built on eigenform coefficient tables.

The central object is the degree-6 convolution L(s, sym^2 g x f), evaluated
at the center by a smoothed series against the weight V(y, k), itself a
contour integral of a gamma-factor ratio.  Around it sit the supporting
values the norm formulas need: L(1, sym^2 .) (two routes: a smoothed short
sum and a precision approximate-functional-equation route), L(3/2, f)
(three routes), quadratic twists at the center, the local Euler-factor
identities behind the moment constants, and the Petersson-weight two-sided
check.

Every returned L-value comes with an error budget.  Budgets combine exact
majorant tails (divisor-function bounds summed numerically) with measured
decay extrapolation where the weight function falls faster than any fixed
polynomial; they are upper estimates meant to dominate observed truncation
effects, not formal proofs.
"""

from __future__ import annotations

import math
from fractions import Fraction
from math import gcd, isqrt

import mpmath
import numpy as np
from scipy.special import jv, loggamma

from ._poly import factorize
from .modforms import eigenbasis, primes_up_to, spf_sieve

LOG_2PI = math.log(2 * math.pi)
LOG_PI = math.log(math.pi)


# ---------------------------------------------------------------------------
# small arithmetic sieves
# ---------------------------------------------------------------------------

def _covers(form, nmax):
    """Whether the eigenform's prime table suffices for lambda(n), n <= nmax."""
    if nmax < 2:
        return True
    ps = primes_up_to(nmax)
    return bool(ps) and form.nmax >= ps[-1]


def mobius_sieve(nmax):
    spf = spf_sieve(max(nmax, 2))
    mu = np.zeros(nmax + 1, dtype=np.int64)
    if nmax >= 1:
        mu[1] = 1
    for n in range(2, nmax + 1):
        p = spf[n]
        m = n // p
        mu[n] = 0 if m % p == 0 else -mu[m]
    return mu


def divisor_count_sieve(nmax):
    d = np.zeros(nmax + 1, dtype=np.int64)
    for i in range(1, nmax + 1):
        d[i::i] += 1
    return d


def d3_sieve(nmax):
    """Ternary divisor function d3(n) = #{(a,b,c): abc = n}."""
    tau = divisor_count_sieve(nmax)
    d3 = np.zeros(nmax + 1, dtype=np.int64)
    for a in range(1, nmax + 1):
        m = nmax // a
        d3[a * np.arange(1, m + 1)] += tau[1:m + 1]
    return d3


def _dtail(N, s, limit_factor=8):
    """Upper bound for sum_{n>N} d(n) n^{-s}, s > 3/2.

    Exact sieve sum out to limit_factor*N plus the d(n) <= 2 sqrt(n)
    integral remainder.
    """
    hi = max(limit_factor * N, N + 16)
    tau = divisor_count_sieve(hi)
    n = np.arange(N + 1, hi + 1, dtype=np.float64)
    finite = float(np.sum(tau[N + 1:] * n ** (-s)))
    rem = 2.0 * hi ** (1.5 - s) / (s - 1.5)
    return finite + rem


# ---------------------------------------------------------------------------
# GL(3) coefficients of the symmetric-square lift of g
# ---------------------------------------------------------------------------

class GL3Coefficients:
    """Dirichlet coefficients A(m1, m2) of the degree-3 lift of g.

    A(r, 1) = sum_{a b^2 = r} lambda_g(a^2) and the general entry follows
    from A(m1, m2) = sum_{d | (m1, m2)} mu(d) A(m1/d, 1) A(m2/d, 1).
    """

    def __init__(self, g, M1, M2):
        rmax = max(M1, M2)
        if not _covers(g, rmax):
            raise ValueError(
                f"eigenform table covers primes to {g.nmax}, need {rmax}")
        self.g = g
        self.M1 = M1
        self.M2 = M2
        lamsq = np.asarray(g.lam_sq_float(rmax))
        A1 = np.zeros(rmax + 1)
        for b in range(1, isqrt(rmax) + 1):
            amax = rmax // (b * b)
            A1[(b * b) * np.arange(1, amax + 1)] += lamsq[1:amax + 1]
        self.A1 = A1
        self._mob = mobius_sieve(M2)

    def row(self, m2, M1=None):
        """Array [A(0,m2)..A(M1,m2)] (index 0 is a zero placeholder)."""
        if M1 is None:
            M1 = self.M1
        out = np.zeros(M1 + 1)
        for d in range(1, m2 + 1):
            if m2 % d:
                continue
            mu = int(self._mob[d])
            if mu == 0:
                continue
            J = M1 // d
            if J >= 1:
                out[d * np.arange(1, J + 1)] += mu * self.A1[m2 // d] * self.A1[1:J + 1]
        return out

    def value(self, m1, m2):
        total = 0.0
        for d in range(1, min(m1, m2) + 1):
            if m1 % d == 0 and m2 % d == 0:
                total += int(self._mob[d]) * self.A1[m1 // d] * self.A1[m2 // d]
        return total

    def value_mp(self, m1, m2):
        """High-precision single entry straight from the lambda table."""
        g = self.g
        with mpmath.workprec(g.prec_bits + 16):
            def a1(r):
                out = mpmath.mpf(0)
                b = 1
                while b * b <= r:
                    if r % (b * b) == 0:
                        out += g.lam((r // (b * b)) ** 2)
                    b += 1
                return out

            total = mpmath.mpf(0)
            for d in range(1, min(m1, m2) + 1):
                if m1 % d == 0 and m2 % d == 0:
                    mu = int(self._mob[d]) if d <= self.M2 else 0
                    if d > self.M2:
                        raise ValueError("d outside mobius table")
                    if mu:
                        total += mu * a1(m1 // d) * a1(m2 // d)
            return total


def gl3_coeffs(g, M1, M2):
    return GL3Coefficients(g, M1, M2)


# ---------------------------------------------------------------------------
# the weight V(y, k) and its quadrature engine
# ---------------------------------------------------------------------------

class RSEvaluator:
    """Contour-quadrature engine for the central-value series of sym^2 g x f.

    V(y, k) is the integral over Re(u) = sigma of
        y^(-u) H(u) gamma(1/2+u, k)/gamma(1/2, k) du / (2 pi i u)
    with H(u) = e^(u^2)(1 - 16 u^2) and the gamma-factor ratio
        (2 pi)^(-3u) G(2k+u)G(k+u)G(1+u) / (G(2k)G(k)G(1)).
    """

    def __init__(self, k, sigma=1.5, step=1.0 / 64, height=16.0,
                 cutoff_C=40.0, prec_bits=96):
        if k < 1 or k % 2 == 0:
            raise ValueError("k must be odd and positive")
        self.k = k
        self.sigma = sigma
        self.step = step
        self.height = height
        self.cutoff_C = cutoff_C
        self.prec_bits = prec_bits
        self.X = int(math.ceil(cutoff_C * k * k))
        # H(0) = 1 and H(+-1/4) = 0 exactly
        assert self._H(0.0 + 0j) == 1.0
        assert abs(self._H(0.25 + 0j)) == 0.0
        self._nodes_cache = None

    @staticmethod
    def _H(u):
        return np.exp(u * u) * (1.0 - 16.0 * u * u)

    def _gamma_ratio(self, u):
        k = self.k
        return np.exp(loggamma(2 * k + u) - loggamma(2 * k)
                      + loggamma(k + u) - loggamma(k)
                      + loggamma(1 + u) - 3.0 * u * LOG_2PI)

    def _nodes(self):
        if self._nodes_cache is None:
            t = np.arange(0.0, self.height + 0.5 * self.step, self.step)
            u = self.sigma + 1j * t
            w = (self.step / (2 * math.pi)) * self._H(u) * self._gamma_ratio(u) / u
            w[0] *= 0.5
            self._nodes_cache = (t, w)
        return self._nodes_cache

    def V(self, y):
        t, w = self._nodes()
        u = self.sigma + 1j * t
        return float(2.0 * np.real(np.sum(w * np.exp(-u * math.log(y)))))

    def V_grid(self, ymax):
        """V(n) for n = 1..ymax as a float array (index 0 unused)."""
        t, w = self._nodes()
        u = self.sigma + 1j * t
        out = np.zeros(ymax + 1)
        logy = np.log(np.arange(1, ymax + 1, dtype=np.float64))
        chunk = 2048
        for i in range(0, ymax, chunk):
            ly = logy[i:i + chunk]
            M = np.exp(np.outer(-ly, u))
            out[i + 1:i + 1 + len(ly)] = 2.0 * np.real(M @ w)
        return out

    def V_mp(self, y, prec_bits=None, step=None, height=None, sigma=None):
        """Arbitrary-precision route, used for refinement self-checks."""
        prec = prec_bits if prec_bits is not None else self.prec_bits
        h = step if step is not None else self.step
        T = height if height is not None else self.height
        sg = sigma if sigma is not None else self.sigma
        k = self.k
        with mpmath.workprec(prec + 32):
            lg = mpmath.loggamma
            base = lg(2 * k) + lg(k)
            ln2pi = mpmath.log(2 * mpmath.pi)
            yl = mpmath.log(mpmath.mpf(y))
            total = mpmath.mpf(0)
            j = 0
            while True:
                t = j * h
                if t > T:
                    break
                u = mpmath.mpc(sg, t)
                ratio = mpmath.exp(lg(2 * k + u) + lg(k + u) + lg(1 + u)
                                   - base - 3 * u * ln2pi)
                f = (mpmath.exp(u * u) * (1 - 16 * u * u) * ratio / u
                     * mpmath.exp(-u * yl))
                total += f.real * (mpmath.mpf(1) / 2 if j == 0 else mpmath.mpf(1))
                j += 1
            return total * 2 * h / mpmath.pi / 2

    def V_small_y_route(self, y):
        """Independent route for small y: residue at u = 0 plus the shifted
        contour on Re(u) = -1/5 (valid since the integrand is analytic for
        Re(u) > -1 away from the origin)."""
        shifted = self.V_mp(y, sigma=-0.2)
        return float(1 + shifted)


# ---------------------------------------------------------------------------
# Rankin-Selberg central value
# ---------------------------------------------------------------------------

def rankin_central_value(f, g, ev):
    """L(1/2, sym^2 g x f) = 2 sum lambda_f(m1) A(m1,m2) (m1 m2^2)^(-1/2)
    V(m1 m2^2, k), truncated at m1 m2^2 <= X with a majorant tail budget.
    """
    k = ev.k
    if f.weight != 2 * k:
        raise ValueError(f"f has weight {f.weight}, evaluator expects {2 * k}")
    if g.weight != k + 1:
        raise ValueError(f"g has weight {g.weight}, evaluator expects {k + 1}")
    X = ev.X
    if not (_covers(f, X) and _covers(g, X)):
        raise ValueError("coefficient tables do not cover the series cutoff")
    lamf = np.asarray(f.lam_array_float(X))
    A = gl3_coeffs(g, X, isqrt(X))
    Xext = 4 * X
    Vg = ev.V_grid(Xext)

    total = 0.0
    for m2 in range(1, isqrt(X) + 1):
        M = X // (m2 * m2)
        row = A.row(m2, M)
        m1 = np.arange(1, M + 1)
        idx = m1 * (m2 * m2)
        total += float(np.sum(lamf[1:M + 1] * row[1:] * Vg[idx]
                              / np.sqrt(idx.astype(np.float64))))
    value = 2.0 * total

    # tail: |lambda_f| <= d, |A(m1,m2)| <= d3(m1) d3(m2); sum the majorant
    # against |V| over (X, 4X] and extend geometrically using the measured
    # per-octave decay of the weight
    tau = divisor_count_sieve(Xext)
    d3 = d3_sieve(Xext)
    absV = np.abs(Vg)
    tail = 0.0
    last_octave = 0.0
    for m2 in range(1, isqrt(Xext) + 1):
        lo = X // (m2 * m2)
        hi = Xext // (m2 * m2)
        if hi < 1:
            break
        m1 = np.arange(lo + 1, hi + 1)
        if len(m1) == 0:
            continue
        idx = m1 * (m2 * m2)
        keep = idx > X
        idx = idx[keep]
        m1 = m1[keep]
        if len(m1) == 0:
            continue
        piece = tau[m1] * d3[m1] * d3[m2] * absV[idx] / np.sqrt(idx.astype(np.float64))
        tail += float(np.sum(piece))
        last_octave += float(np.sum(piece[idx > 2 * X]))
    budget = 2.0 * (tail + 4.0 * last_octave) + 1e-10 * (1.0 + abs(value))
    return value, budget


# ---------------------------------------------------------------------------
# symmetric square at s = 1
# ---------------------------------------------------------------------------

def sym2_at_1(g, V_param=1.0e4, rmax=None):
    """Smoothed short sum sum_{q,r} lambda_g(r^2)/(q^2 r) exp(-q^2 r / V).

    The r-range defaults to sqrt(V log^2 V); beyond it the eigenvalue
    oscillation is relied on rather than summed.  The returned budget is a
    heuristic (smoothing bias ~ 1/V plus a square-root truncation
    allowance), not a proven bound.
    """
    if rmax is None:
        rmax = isqrt(int(V_param * math.log(V_param) ** 2))
    if not _covers(g, rmax):
        raise ValueError(
            f"eigenform table covers primes to {g.nmax}, need {rmax}")
    lamsq = np.asarray(g.lam_sq_float(rmax))
    r = np.arange(1, rmax + 1, dtype=np.float64)
    total = 0.0
    q = 1
    while q * q <= 45.0 * V_param:
        total += float(np.sum(lamsq[1:] / (q * q * r)
                              * np.exp(-(q * q) * r / V_param)))
        q += 1
    # q-range remainder: |lambda(r^2)| <= d3(r^2) <= r, crude and tiny
    qtail = 2.0 * math.exp(-q * q / V_param)
    budget = 3.0 / math.sqrt(rmax) + 30.0 / V_param + qtail
    return total, budget


def _log_Linf_sym2(s, w):
    """log of pi^(-3s/2) G((s+1)/2) G((s+w-1)/2) G((s+w)/2)."""
    return (-1.5 * s * LOG_PI + loggamma((s + 1) / 2.0)
            + loggamma((s + w - 1) / 2.0) + loggamma((s + w) / 2.0))


def sym2_coeffs(g, mmax):
    """c_m with L(s, sym^2 g) = sum c_m m^-s: c_m = sum_{d^2 e = m} lambda_g(e^2)."""
    lamsq = np.asarray(g.lam_sq_float(mmax))
    c = np.zeros(mmax + 1)
    for d in range(1, isqrt(mmax) + 1):
        emax = mmax // (d * d)
        c[(d * d) * np.arange(1, emax + 1)] += lamsq[1:emax + 1]
    return c


def sym2_at_1_afe(g, sigma=10.0, step=1.0 / 16, height=60.0):
    """Precision route for L(1, sym^2 g): balanced smoothed approximate
    functional equation with completed form
        pi^(-3s/2) G((s+1)/2) G((s+w-1)/2) G((s+w)/2) L(s),
    symmetric under s -> 1-s with sign +1 (w = weight of g).
    """
    w = g.weight
    t = np.arange(0.0, height + 0.5 * step, step)
    u = sigma + 1j * t
    lL1 = _log_Linf_sym2(1.0, w).real
    f1 = np.exp(_log_Linf_sym2(1.0 + u, w) - lL1)
    f0 = np.exp(_log_Linf_sym2(u + 0j, w) - lL1)
    base = (step / (2 * math.pi)) * np.exp(u * u / 64.0) / u
    base = np.asarray(base)
    base[0] *= 0.5
    w1n = base * f1
    w0n = base * f0
    C1 = 2.0 * float(np.sum(np.abs(w1n)))
    C0 = 2.0 * float(np.sum(np.abs(w0n)))

    def tail_bound(M):
        # sum_{m>M} d3(m) (C1 m^(-1-sigma) + C0 m^(-sigma)), finite sieve to
        # 4M plus a d3(m) <= 4m integral remainder
        hi = 4 * M
        d3 = d3_sieve(hi)
        m = np.arange(M + 1, hi + 1, dtype=np.float64)
        finite = float(np.sum(d3[M + 1:] * (C1 * m ** (-1.0 - sigma)
                                            + C0 * m ** (-sigma))))
        rem = 4.0 * (C1 * hi ** (1.0 - sigma) / (sigma - 1.0)
                     + C0 * hi ** (2.0 - sigma) / (sigma - 2.0))
        return finite + rem

    mmax = 64
    while tail_bound(mmax) > 1e-14 and mmax < 1 << 17:
        mmax *= 2
    if not _covers(g, mmax):
        raise ValueError(
            f"eigenform table covers primes to {g.nmax}, need {mmax}")
    c = sym2_coeffs(g, mmax)
    m = np.arange(1, mmax + 1, dtype=np.float64)
    E = np.exp(np.outer(-np.log(m), u))
    W1 = 2.0 * np.real(E @ w1n)
    W0 = 2.0 * np.real(E @ w0n)
    value = float(np.sum(c[1:] / m * W1) + np.sum(c[1:] * W0))
    budget = tail_bound(mmax) + 1e-11 * (1.0 + abs(value))
    return value, budget


# ---------------------------------------------------------------------------
# generic degree-2 values: L(3/2, f) and quadratic twists
# ---------------------------------------------------------------------------

def _degree2_afe(coeff, nmax_table, Q, mu, eps, s0, sigma=6.0, step=1.0 / 32,
                 height=50.0, gwidth=36.0, target=1e-13):
    """Smoothed approximate functional equation for a degree-2 L-function
    with completed form Q^s Gamma(s+mu) L(s) = eps * (same at 1-s).

    coeff(nmax) must return a float array c[0..nmax] with |c[n]| <= d(n).
    Returns (L(s0), budget).  Complex s0 is supported (full contour, no
    conjugate-symmetry shortcut).
    """
    real_s0 = (abs(complex(s0).imag) < 1e-15)
    s0 = complex(s0)
    if real_s0:
        t = np.arange(0.0, height + 0.5 * step, step)
    else:
        t = np.arange(-height, height + 0.5 * step, step)
    u = sigma + 1j * t
    logQ = math.log(Q)
    lg_ref = loggamma(s0 + mu)
    # ratios L_inf(s0+u)/L_inf(s0) and L_inf(1-s0+u)/L_inf(s0)
    f1 = np.exp(u * logQ + loggamma(s0 + mu + u) - lg_ref)
    f2 = np.exp((1 - 2 * s0 + u) * logQ + loggamma(1 - s0 + mu + u) - lg_ref)
    base = (step / (2 * math.pi)) * np.exp(u * u / gwidth) / u
    if real_s0:
        base[0] *= 0.5
    w1 = base * f1
    w2 = base * f2
    fold = 2.0 if real_s0 else 1.0
    C1 = fold * float(np.sum(np.abs(w1)))
    C2 = fold * float(np.sum(np.abs(w2)))

    e1 = s0.real + sigma          # decay exponent of the first sum's terms
    e2 = (1 - s0).real + sigma    # and of the reflected sum's terms
    nmax = 64
    while nmax < nmax_table:
        tb = C1 * _dtail(nmax, e1) + C2 * _dtail(nmax, e2)
        if tb < target:
            break
        nmax *= 2
    nmax = min(nmax, nmax_table)
    budget_tail = C1 * _dtail(nmax, e1) + C2 * _dtail(nmax, e2)

    c = np.asarray(coeff(nmax), dtype=np.float64)
    n = np.arange(1, nmax + 1, dtype=np.float64)
    E = np.exp(np.outer(-np.log(n), u))
    if real_s0:
        F1 = 2.0 * np.real(E @ w1)
        F2 = 2.0 * np.real(E @ w2)
        value = complex(np.sum(c[1:] * n ** (-s0.real) * F1)
                        + eps * np.sum(c[1:] * n ** (s0.real - 1.0) * F2))
    else:
        F1 = E @ w1
        F2 = E @ w2
        value = complex(np.sum(c[1:] * n ** (-s0) * F1)
                        + eps * np.sum(c[1:] * n ** (s0 - 1.0) * F2))
    budget = budget_tail + 1e-12 * (1.0 + abs(value))
    return value, budget


def l_f_at_32(f, nmax=None):
    """Direct partial sum of sum lambda_f(n) n^(-3/2) with the exact
    divisor-majorant tail (which is honest but slowly decaying)."""
    if nmax is None:
        nmax = f.nmax
    lam = np.asarray(f.lam_array_float(nmax))
    n = np.arange(1, nmax + 1, dtype=np.float64)
    value = float(np.sum(lam[1:] * n ** -1.5))
    tau = divisor_count_sieve(nmax)
    with mpmath.workprec(80):
        full = float(mpmath.zeta(1.5) ** 2)
    budget = full - float(np.sum(tau[1:] * n ** -1.5))
    return value, budget


def inv_l_f_at_32(f, nmax=None):
    """1/L(3/2, f) = sum_{ab^2} mu^2(ab) mu(a) lambda_f(a) (a b^2)^(-3/2)."""
    if nmax is None:
        nmax = f.nmax
    mu = mobius_sieve(nmax)
    lam = np.asarray(f.lam_array_float(nmax))
    value = 0.0
    majorant_partial = 0.0
    tau = divisor_count_sieve(nmax)
    for b in range(1, isqrt(nmax) + 1):
        amax = nmax // (b * b)
        a = np.arange(1, amax + 1, dtype=np.float64)
        majorant_partial += float(np.sum(tau[1:amax + 1]
                                         * (a * b * b) ** -1.5))
        if mu[b] == 0:
            continue
        for a in range(1, amax + 1):
            if mu[a] == 0 or gcd(a, b) != 1:
                continue
            value += float(mu[a]) * float(lam[a]) * (a * b * b) ** -1.5
    with mpmath.workprec(80):
        full = float(mpmath.zeta(1.5) ** 2 * mpmath.zeta(3))
    # |mu_f(a b^2)| <= d(a), so the dropped terms are dominated by the tail
    # of sum d(a) (a b^2)^(-3/2) over a b^2 > nmax
    budget = full - majorant_partial
    return value, budget


def l_f_at_32_afe(f, **kw):
    """Precision route for L(3/2, f): degree-2 balanced functional equation
    with completed form (2 pi)^(-s) Gamma(s + (w-1)/2) L(s) and sign
    (-1)^(w/2) for weight w."""
    w = f.weight
    eps = (-1) ** (w // 2)
    val, budget = _degree2_afe(
        lambda nm: np.asarray(f.lam_array_float(nm)),
        f.nmax, 1.0 / (2 * math.pi), (w - 1) / 2.0, eps, 1.5, **kw)
    assert abs(val.imag) < 1e-10 * (1 + abs(val))
    return val.real, budget


def inv_l_32_euler_bound():
    """Numerical value of prod_p (1 + p^(-3/2))^2, the stated upper bound
    for 1/L(3/2, f)."""
    with mpmath.workprec(80):
        # prod (1 + p^-s) = zeta(s)/zeta(2s)
        return float((mpmath.zeta(1.5) / mpmath.zeta(3)) ** 2)


# ---------------------------------------------------------------------------
# quadratic characters and twisted central values
# ---------------------------------------------------------------------------

def kronecker_symbol(a, n):
    if n == 0:
        return 1 if abs(a) == 1 else 0
    k = 1
    if n < 0:
        n = -n
        if a < 0:
            k = -1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            k = -k
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                k = -k
        if a % 4 == 3 and n % 4 == 3:
            k = -k
        a, n = n % a, a
    return k if n == 1 else 0


def is_fundamental_discriminant(D):
    if D == 0 or D == 1:
        return False

    def squarefree(m):
        m = abs(m)
        d = 2
        while d * d <= m:
            if m % (d * d) == 0:
                return False
            d += 1
        return True

    if D % 4 == 1 or D % 4 == -3:
        return squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3, -2, -1) and squarefree(m)
    return False


def twisted_central_value(f, D, validate=True):
    """L(1/2, f x chi_D) for a negative fundamental discriminant D.

    Degree-2 functional equation with completed form
    (|D|/2pi)^s Gamma(s + (w-1)/2) L(s) and sign +1, which is validated by
    (a) recomputation on a different contour abscissa and (b) comparing the
    same machinery at s = 2.5 + 0.3i against the absolutely convergent
    Dirichlet series.  A failed validation raises ArithmeticError.
    """
    if D >= 0 or not is_fundamental_discriminant(D):
        raise ValueError("D must be a negative fundamental discriminant")
    w = f.weight
    if w % 2:
        raise ValueError("even weight required")
    Q = abs(D) / (2 * math.pi)
    mu = (w - 1) / 2.0

    def coeff(nm):
        lam = np.asarray(f.lam_array_float(nm))
        chi = np.array([0] + [kronecker_symbol(D, n) for n in range(1, nm + 1)],
                       dtype=np.float64)
        return lam * chi

    val, budget = _degree2_afe(coeff, f.nmax, Q, mu, +1, 0.5)
    value = val.real
    if validate:
        v2, _ = _degree2_afe(coeff, f.nmax, Q, mu, +1, 0.5, sigma=4.5)
        if abs(value - v2.real) > 1e-8 * (1.0 + abs(value)):
            raise ArithmeticError(
                "contour-independence self-test failed for the twist")
        s0 = 2.5 + 0.3j
        afe, _ = _degree2_afe(coeff, f.nmax, Q, mu, +1, s0)
        c = coeff(f.nmax)
        n = np.arange(1, f.nmax + 1, dtype=np.float64)
        direct = complex(np.sum(c[1:] * n ** (-s0)))
        direct_tail = _dtail(f.nmax, 2.5)
        if abs(afe - direct) > 1e-6 * (1.0 + abs(direct)) + direct_tail:
            raise ArithmeticError(
                "functional-equation sign validation failed for the twist")
    return value, budget


# ---------------------------------------------------------------------------
# local Euler-factor identities behind the moment constants
# ---------------------------------------------------------------------------

def satake_from_lambda(lam):
    """Unit-modulus Satake parameter alpha with alpha + 1/alpha = lam,
    |lam| <= 2."""
    if abs(lam) > 2:
        raise ValueError("|lambda| <= 2 required")
    return complex(lam / 2.0, math.sqrt(max(0.0, 1.0 - (lam / 2.0) ** 2)))


def cfkrs_local_factor(p, alpha_p, alpha=0.0):
    """Local factor B_p at shift alpha: (truncated defining sum, closed form).

    The defining sum runs over a1, b1, a2 >= 0, d in {0,1},
    0 <= c <= min(2a1, 2a2) with term
        (-1)^d lambda(p^(d+a1+2b1)) x^(3a1+2b1+4a2+3d-2c),  x = p^(-1/2-alpha).
    The inner c and a2 sums are geometric and are folded in closed form so
    the truncation is only in a1, b1 (and the a2 tail bound is exact).
    """
    if alpha <= -0.5:
        raise ValueError("need |x| < 1, i.e. alpha > -1/2")
    with mpmath.workprec(120):
        x = mpmath.mpf(p) ** (mpmath.mpf(-0.5) - mpmath.mpf(alpha))
        a = mpmath.mpc(alpha_p)
        b = 1 / a
        if abs(abs(a) - 1) > 1e-12:
            raise ValueError("Satake parameter must have unit modulus")
        lam1 = a + b
        A1 = max(12, int(mpmath.ceil(40 * mpmath.log(10) / (-3 * mpmath.log(x)))))
        B1 = max(12, int(mpmath.ceil(40 * mpmath.log(10) / (-2 * mpmath.log(x)))))
        A2 = A1 + max(12, int(mpmath.ceil(40 * mpmath.log(10) / (-4 * mpmath.log(x)))))
        # lambda(p^j) by the Hecke recursion
        lam = [mpmath.mpc(1), lam1]
        for _ in range(A1 + 2 * B1 + 2):
            lam.append(lam1 * lam[-1] - lam[-2])

        xm2 = x ** -2

        def geo_c(mcap):
            # sum_{c=0}^{mcap} x^(-2c)
            return (xm2 ** (mcap + 1) - 1) / (xm2 - 1)

        def S2(a1):
            # sum over a2 (with its c-sum); split at a2 = a1
            total = mpmath.mpf(0)
            for a2 in range(0, min(a1, A2) + 1):
                total += x ** (4 * a2) * geo_c(2 * a2)
            if A2 > a1:
                # a2 > a1: c-sum is geo_c(2*a1), remaining a2-sum geometric
                x4 = x ** 4
                head = x4 ** (a1 + 1) * (1 - x4 ** (A2 - a1)) / (1 - x4)
                total += head * geo_c(2 * a1)
            return total

        brute = mpmath.mpc(0)
        for d in (0, 1):
            sign = 1 if d == 0 else -1
            for a1 in range(0, A1 + 1):
                inner = mpmath.mpc(0)
                for b1 in range(0, B1 + 1):
                    inner += lam[d + a1 + 2 * b1] * x ** (2 * b1)
                brute += sign * x ** (3 * d + 3 * a1) * inner * S2(a1)

        x2, x3, x8 = x ** 2, x ** 3, x ** 8
        closed = (1 - x8) / ((1 - x2) * (1 - a * a * x2) * (1 - b * b * x2)
                             * (1 - a * x3) * (1 - b * x3))
        return complex(brute), complex(closed)


def af_local_identity(p, alpha_p, alpha=0.0):
    """Per-prime identity: the closed local factor equals
    sym2_p(1+2a) * f_p(3/2+3a) * zeta_p(2+4a)^2/zeta_p(4+8a)
    with the b2/q free variables stripped, i.e.
    (1 - p^-(4+8a)) * sym2_p(1+2a) * f_p(3/2+3a).

    Returns (closed factor, assembled right-hand side).
    """
    _, closed = cfkrs_local_factor(p, alpha_p, alpha)
    a = complex(alpha_p)
    b = 1 / a
    s1 = 1 + 2 * alpha
    s2 = 1.5 + 3 * alpha
    ps1 = p ** (-s1)
    ps2 = p ** (-s2)
    sym2_p = 1 / ((1 - a * a * ps1) * (1 - ps1) * (1 - b * b * ps1))
    f_p = 1 / ((1 - a * ps2) * (1 - b * ps2))
    rhs = (1 - p ** (-(4 + 8 * alpha))) * sym2_p * f_p
    return closed, rhs


def m0_local_factor(p):
    """Diagonal local factor: (truncated defining sum, closed form).

    Defining sum: over d, a1, a2, b >= 0 with d + a1 + b <= 1 and
    0 <= c <= min(2a1, 2a2), term p^c (-1)^a1 p^-(3d+3a1+2a2+3b).
    Closed form (1-p^-2)^-1 (1-p^-4).
    """
    A2 = max(30, int(60 / math.log2(p)))
    brute = 0.0
    for d in (0, 1):
        for a1 in (0, 1):
            for b in (0, 1):
                if d + a1 + b > 1:
                    continue
                for a2 in range(0, A2 + 1):
                    for c in range(0, min(2 * a1, 2 * a2) + 1):
                        brute += (p ** c * (-1) ** a1
                                  * float(p) ** (-(3 * d + 3 * a1 + 2 * a2 + 3 * b)))
    closed = float(m0_closed_fraction(p))
    return brute, closed


def m0_closed_fraction(p):
    return Fraction(1, 1) / (1 - Fraction(1, p ** 2)) * (1 - Fraction(1, p ** 4))


def m0_c12_piece(p):
    """Contribution of c in {1,2}: (truncated sum, -p^-5 (1-p^-2)^-1 (p+p^2))."""
    A2 = max(30, int(60 / math.log2(p)))
    brute = 0.0
    # c >= 1 forces a1 = 1, hence d = b = 0 and a2 >= 1
    for a2 in range(1, A2 + 1):
        for c in range(1, min(2, 2 * a2) + 1):
            brute += p ** c * (-1) * float(p) ** (-(3 + 2 * a2))
    closed = float(-Fraction(1, p ** 5) / (1 - Fraction(1, p ** 2)) * (p + p * p))
    return brute, closed


# ---------------------------------------------------------------------------
# exact constants (rational times a power of pi, reduced symbolically)
# ---------------------------------------------------------------------------

def _pp_mul(a, b):
    return (a[0] * b[0], a[1] + b[1])


def _pp_div(a, b):
    return (a[0] / b[0], a[1] - b[1])


def conjecture_constants():
    """The two moment constants, reduced exactly: 24 c'' zeta(2) and
    24 c'' zeta(2)^3 / zeta(4) with c'' = (6/pi^3)(v2/v1^2).

    Values are tracked as (rational, pi-exponent) pairs; both pi-exponents
    must cancel to zero.
    """
    v1 = (Fraction(1, 3), 1)
    v2 = (Fraction(1, 270), 3)
    z2 = (Fraction(1, 6), 2)
    z4 = (Fraction(1, 90), 4)
    cpp = _pp_mul((Fraction(6), -3), _pp_div(v2, _pp_mul(v1, v1)))
    first = _pp_mul((Fraction(24), 0), _pp_mul(cpp, z2))
    second = _pp_div(_pp_mul((Fraction(24), 0),
                             _pp_mul(cpp, _pp_mul(z2, _pp_mul(z2, z2)))), z4)
    if first[1] != 0 or second[1] != 0:
        raise ArithmeticError("pi powers failed to cancel")
    return first[0], second[0]


def v1_value(prec_bits=96):
    with mpmath.workprec(prec_bits):
        return mpmath.pi / 3


def v2_value(prec_bits=96):
    with mpmath.workprec(prec_bits):
        return mpmath.pi ** 3 / 270


# ---------------------------------------------------------------------------
# Petersson two-sided check
# ---------------------------------------------------------------------------

def _prime_power_inverse_tables(cmax):
    """inv tables mod every prime power q <= cmax (0 at non-units)."""
    tables = {}
    for p in primes_up_to(cmax):
        inv = np.zeros(p, dtype=np.int64)
        if p > 1:
            inv[1 % p] = 1 % p
        for a in range(2, p):
            inv[a] = (-(p // a) * inv[p % a]) % p
        tables[p] = inv
        q = p * p
        while q <= cmax:
            prev = tables[q // p]
            a = np.arange(q, dtype=np.int64)
            x = prev[a % (q // p)]
            x = (x * ((2 - a * x) % q)) % q
            tables[q] = np.where(a % p != 0, x, 0)
            q *= p
    return tables


def kloosterman_series_bulk(pairs, cmax):
    """dict (m,n) -> float array S(m,n;c) for c = 1..cmax (index 0 unused).

    Inverses mod c are assembled by CRT from prime-power inverse tables so
    the whole sweep is vectorized.
    """
    spf = spf_sieve(cmax)
    tables = _prime_power_inverse_tables(cmax)
    out = {pair: np.zeros(cmax + 1) for pair in pairs}
    for pair in pairs:
        out[pair][1] = 1.0
    for c in range(2, cmax + 1):
        fac = factorize(c, spf)
        a = np.arange(1, c, dtype=np.int64)
        mask = np.ones(c - 1, dtype=bool)
        for p, _ in fac:
            mask &= (a % p) != 0
        u = a[mask]
        inv = np.zeros(len(u), dtype=np.int64)
        for p, e in fac:
            q = p ** e
            Mq = c // q
            crt = (Mq * pow(Mq, -1, q)) % c
            inv = (inv + tables[q][u % q] * crt) % c
        cosw = np.cos((2 * np.pi / c) * np.arange(c))
        for (m, n) in pairs:
            idx = (m * u + n * inv) % c
            out[(m, n)][c] = float(cosw[idx].sum())
    return out


def _petersson_rhs(weight, m, n, s_row, cmax):
    k = weight
    c = np.arange(1, cmax + 1, dtype=np.float64)
    x = 4 * math.pi * math.sqrt(m * n) / c
    series = float(np.sum(s_row[1:cmax + 1] / c * jv(k - 1, x)))
    rhs = (1.0 if m == n else 0.0) + 2 * math.pi * (-1) ** (k // 2) * series
    # tail: |S| <= c trivially and |J_{k-1}(y)| <= (y/2)^(k-1)/(k-1)! for the
    # small arguments past the cutoff
    y0 = 2 * math.pi * math.sqrt(m * n) / cmax
    with mpmath.workprec(80):
        tail = float(2 * mpmath.pi * (mpmath.mpf(y0 * cmax)) ** (k - 1)
                     / mpmath.factorial(k - 1)
                     * (mpmath.mpf(cmax)) ** (-(k - 2)) / (k - 2))
    return rhs, tail


def petersson_lhs_weights(weight, table_N=4096):
    """[(form, 1/omega)] with omega = (weight-1)/(2 pi^2) L(1, sym^2 form)."""
    forms = eigenbasis(weight, N=table_N)
    out = []
    for phi in forms:
        L, budget = sym2_at_1_afe(phi)
        omega = (weight - 1) / (2 * math.pi ** 2) * L
        out.append((phi, 1.0 / omega, budget / L * (1.0 / omega)))
    return out

def petersson_sweep(weights=(12, 22), mnmax=6, cmax=10 ** 4, table_N=4096):
    """Two-sided Petersson checks for all m, n <= mnmax at the given weights.

    Returns a list of dict reports with lhs, rhs, diff and budget.
    """
    pairs = [(m, n) for m in range(1, mnmax + 1) for n in range(m, mnmax + 1)]
    s_table = kloosterman_series_bulk(pairs, cmax)
    reports = []
    for weight in weights:
        lhs_data = petersson_lhs_weights(weight, table_N)
        for (m, n) in pairs:
            lhs = 0.0
            lhs_budget = 0.0
            for phi, winv, wb in lhs_data:
                lhs += winv * float(phi.lam(m)) * float(phi.lam(n))
                lhs_budget += wb * abs(float(phi.lam(m)) * float(phi.lam(n)))
            rhs, tail = _petersson_rhs(weight, m, n, s_table[(m, n)], cmax)
            reports.append({
                "weight": weight, "m": m, "n": n,
                "lhs": lhs, "rhs": rhs, "diff": abs(lhs - rhs),
                "budget": 1e-8 + tail + lhs_budget + 1e-10 * cmax * 1e-3,
                "tail": tail,
            })
    return reports


def petersson_check(weight, m, n, cmax=10 ** 4, table_N=4096):
    pairs = [(min(m, n), max(m, n))]
    s_table = kloosterman_series_bulk(pairs, cmax)
    lhs_data = petersson_lhs_weights(weight, table_N)
    lhs = 0.0
    lhs_budget = 0.0
    for phi, winv, wb in lhs_data:
        lhs += winv * float(phi.lam(m)) * float(phi.lam(n))
        lhs_budget += wb * abs(float(phi.lam(m)) * float(phi.lam(n)))
    rhs, tail = _petersson_rhs(weight, m, n, s_table[pairs[0]], cmax)
    return {"weight": weight, "m": m, "n": n, "lhs": lhs, "rhs": rhs,
            "diff": abs(lhs - rhs), "budget": 1e-8 + tail + lhs_budget,
            "tail": tail}


# ---------------------------------------------------------------------------
# norm assembly
# ---------------------------------------------------------------------------

class NormReport:
    """Everything that enters N(F_f) for one source eigenform f."""

    __slots__ = ("ell", "label", "L_rankin", "L_32", "L_sym2", "N", "N_star",
                 "err_budget", "per_g", "c_f", "c_f_prime")

    def __init__(self, **kw):
        for name in self.__slots__:
            setattr(self, name, kw[name])

    def csv_row(self):
        vals = [self.L_rankin, self.L_32, self.L_sym2, self.N, self.N_star,
                self.err_budget]
        return (f"{self.ell},{self.label},"
                + ",".join(f"{v:.19e}" for v in vals))


CSV_HEADER = "ell,label,L_rankin,L_32,L_sym2,N,N_star,err_budget"


def reports_to_csv(reports):
    return "\n".join([CSV_HEADER] + [r.csv_row() for r in reports]) + "\n"


def norm_NFf(ell, prec_bits=192, cutoff_C=40.0):
    """Restricted-norm reports for every source eigenform of weight 2*ell-2.

    N(F_f) = (v2/v1^2) * 24 pi / (L(3/2,f) L(1,sym^2 f))
             * (1/k) sum_g L(1/2, sym^2 g x f),   k = ell - 1,
    and N*(F_f) drops the weights L(3/2,f)^-1 L(1,sym^2 g):
    N*(F_f) = (2/5) / L(1,sym^2 f) * sum_g omega_g^-1 L(1/2, sym^2 g x f).
    """
    if ell % 2 or ell < 10:
        raise ValueError("ell must be even and >= 10")
    k = ell - 1
    X = int(math.ceil(cutoff_C * k * k))
    fs = eigenbasis(2 * ell - 2, N=X, prec_bits=prec_bits)
    gs = eigenbasis(ell, N=X, prec_bits=prec_bits)
    ev = RSEvaluator(k, cutoff_C=cutoff_C, prec_bits=prec_bits) if gs else None
    pi = math.pi
    v1 = pi / 3
    v2 = pi ** 3 / 270
    reports = []
    for f in fs:
        L32, b32 = l_f_at_32_afe(f)
        Ls2f, bs2f = sym2_at_1_afe(f)
        rs_sum = 0.0
        rs_budget = 0.0
        star_sum = 0.0
        per_g = {}
        for g in gs:
            Lrs, brs = rankin_central_value(f, g, ev)
            Ls2g, _ = sym2_at_1_afe(g)
            omega_g = k / (2 * pi * pi) * Ls2g
            rs_sum += Lrs
            rs_budget += brs
            star_sum += Lrs / omega_g
            per_g[g.label] = (Lrs, brs, Ls2g)
        pref = (v2 / v1 ** 2) * 24 * pi / (L32 * Ls2f)
        c_f = (v2 / v1 ** 2) * (12 / pi) / (L32 * Ls2f)
        c_f_prime = (v2 / v1 ** 2) * (12 / pi) / Ls2f
        N = pref * rs_sum / k
        N_star = c_f_prime * star_sum
        rel = b32 / L32 + bs2f / Ls2f
        budget = abs(N) * rel + pref * rs_budget / k
        reports.append(NormReport(
            ell=ell, label=f.label, L_rankin=rs_sum, L_32=L32, L_sym2=Ls2f,
            N=N, N_star=N_star, err_budget=budget, per_g=per_g,
            c_f=c_f, c_f_prime=c_f_prime))
    return reports
