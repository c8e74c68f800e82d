"""Exact exponential sums: Kloosterman, Ramanujan, and the quadratic sum T(c).

Brute-force routes iterate residues directly (vectorized with numpy where the
sweeps are large); closed forms are exact integers.  T(c) equals
phi(c) sqrt(c) when c is a perfect square and 0 otherwise, so its exact value
is always an integer.
"""

from __future__ import annotations

import math
from math import gcd, isqrt

import mpmath
import numpy as np

from ._poly import factorize, smallest_prime_factor_sieve
from .modforms import spf_sieve


def _units_and_inverses(c):
    units = np.array([a for a in range(1, c + 1) if gcd(a, c) == 1], dtype=np.int64)
    inv = np.array([pow(int(a), -1, c) for a in units], dtype=np.int64) if c > 1 else np.array([0], dtype=np.int64)
    if c == 1:
        units = np.array([0], dtype=np.int64)
    return units, inv


_UNIT_CACHE = {}


def units_mod(c):
    if c not in _UNIT_CACHE:
        _UNIT_CACHE[c] = _units_and_inverses(c)
    return _UNIT_CACHE[c]


def kloosterman(m, n, c, prec_bits=96):
    """S(m,n;c) = sum_{a abar = 1 mod c} e((ma + n abar)/c), exact real sum.

    Returns an mpf; the imaginary part is asserted negligible.
    """
    if c < 1:
        raise ValueError("c >= 1 required")
    if c == 1:
        return mpmath.mpf(1)
    units, inv = units_mod(c)
    with mpmath.workprec(prec_bits + 16):
        two_pi = 2 * mpmath.pi
        re = mpmath.mpf(0)
        im = mpmath.mpf(0)
        for a, abar in zip(units.tolist(), inv.tolist()):
            arg = two_pi * ((m * a + n * abar) % c) / c
            re += mpmath.cos(arg)
            im += mpmath.sin(arg)
        assert abs(im) < mpmath.mpf(2) ** (-(prec_bits - len(units).bit_length() - 8)), \
            "Kloosterman sum has unexpected imaginary part"
        return re


def kloosterman_float(m, n, c):
    """float64 Kloosterman sum (vectorized), for bulk sweeps."""
    if c == 1:
        return 1.0
    units, inv = units_mod(c)
    args = ((m * units + n * inv) % c).astype(np.float64) * (2 * math.pi / c)
    return float(np.cos(args).sum())


def divisor_count(c):
    out = 1
    for _, e in factorize(c, spf_sieve(c)):
        out *= e + 1
    return out


def weil_check(m, n, c):
    """|S(m,n;c)| <= (m,n,c)^{1/2} c^{1/2} tau(c)."""
    s = kloosterman_float(m, n, c)
    bound = math.sqrt(gcd(gcd(m, n), c)) * math.sqrt(c) * divisor_count(c)
    return abs(s) <= bound + 1e-6


def euler_phi(c):
    out = c
    for p, _ in factorize(c, spf_sieve(c)):
        out -= out // p
    return out


def mobius(c):
    out = 1
    for _, e in factorize(c, spf_sieve(c)):
        if e > 1:
            return 0
        out = -out
    return out


def ramanujan(n, c):
    """Ramanujan sum: brute unit sum checked against sum_{b|(n,c)} b mu(c/b)."""
    if c < 1:
        raise ValueError("c >= 1 required")
    closed = 0
    for b in range(1, c + 1):
        if c % b == 0 and n % b == 0:
            closed += b * mobius(c // b)
    if c == 1:
        brute = 1.0
    else:
        units, _ = units_mod(c)
        args = ((n * units) % c).astype(np.float64) * (2 * math.pi / c)
        brute = float(np.cos(args).sum())
    assert abs(brute - closed) < 1e-6 * max(1, c), (n, c, brute, closed)
    return closed


def gauss_T_closed(c):
    """phi(c) sqrt(c) when c is a perfect square, else 0 — exact integer."""
    r = isqrt(c)
    if r * r != c:
        return 0
    return euler_phi(c) * r


def gauss_T(c):
    """(brute double sum, closed form); equality is asserted.

    Brute force: T(c) = sum*_{h mod c} sum_{a mod c} e(h a^2 / c).
    """
    if c < 1:
        raise ValueError("c >= 1 required")
    closed = gauss_T_closed(c)
    if c == 1:
        brute = 1.0
    else:
        sq = np.bincount((np.arange(c, dtype=np.int64) ** 2) % c, minlength=c)
        h = np.array([x for x in range(1, c) if gcd(x, c) == 1], dtype=np.int64)
        r = np.arange(c, dtype=np.int64)
        phases = (h[:, None] * r[None, :]) % c
        brute = float((np.cos(phases * (2 * math.pi / c)) * sq[None, :]).sum())
    if abs(brute - closed) > 1e-5 * max(1.0, c):
        raise ArithmeticError(f"Gauss-sum identity failed at c={c}: {brute} vs {closed}")
    return closed


def gauss_T_r2_form(c, r2, sign=1):
    """The pre-change-of-variables form: sum_a S(a^2, r2^2; c) e(+-2 a r2 / c)."""
    if c == 1:
        return 1.0
    units, inv = units_mod(c)
    a = np.arange(c, dtype=np.int64)
    # S(a^2, r2^2; c) for all a at once: matrix over (a, unit)
    ph = (a[:, None] * a[:, None] % c * units[None, :] + (r2 * r2 % c) * inv[None, :]) % c
    svals = np.cos(ph * (2 * math.pi / c)).sum(axis=1)
    outer = np.exp(2j * math.pi * sign * (2 * a * r2 % c) / c)
    total = (svals * outer).sum()
    assert abs(total.imag) < 1e-6 * c * c
    return float(total.real)


def gauss_T_r2_independence(c, r2_list, sign=1):
    """All pre-change-of-variables values agree with gauss_T(c)."""
    target = gauss_T(c)
    for r2 in r2_list:
        val = gauss_T_r2_form(c, r2, sign)
        if abs(val - target) > 1e-5 * max(1.0, c * math.sqrt(c)):
            return False
    return True


def kloosterman_twisted_mult_check(m, n, c, q):
    """S(m,n;cq) = S(qbar m, qbar n; c) S(cbar m, cbar n; q), (c,q)=1."""
    assert gcd(c, q) == 1
    lhs = kloosterman_float(m, n, c * q)
    qbar = pow(q, -1, c) if c > 1 else 0
    cbar = pow(c, -1, q) if q > 1 else 0
    rhs = kloosterman_float(qbar * m, qbar * n, c) * kloosterman_float(cbar * m, cbar * n, q)
    return abs(lhs - rhs) <= 1e-6 * max(1.0, c * q)
