"""Dense integer power-series kernels.

Truncated power series are plain Python lists of ints indexed by q-power.
Multiplication uses Kronecker substitution: coefficients are packed into one
big integer per series, multiplied with GMP, and the convolution digits are
read back.  This keeps N ~ 1e5-length integer series with several-hundred-bit
coefficients cheap enough for pure Python.
"""

from __future__ import annotations

import gmpy2


def poly_add(a, b):
    n = max(len(a), len(b))
    out = [0] * n
    for i, c in enumerate(a):
        out[i] = c
    for i, c in enumerate(b):
        out[i] += c
    return out


def poly_scale(a, s):
    return [s * c for c in a]


def _pack_nonneg(coeffs, width_bytes):
    buf = bytearray(width_bytes * len(coeffs))
    for i, c in enumerate(coeffs):
        if c:
            buf[i * width_bytes:(i + 1) * width_bytes] = c.to_bytes(width_bytes, "little")
    return int.from_bytes(buf, "little")


def poly_mul(a, b, nmax=None):
    """Convolution of int lists a, b truncated to degree nmax (inclusive)."""
    if not a or not b:
        return []
    full_deg = len(a) + len(b) - 2
    deg = full_deg if nmax is None else min(full_deg, nmax)
    a = a[:deg + 1]
    b = b[:deg + 1]
    ma = max(1, max(a), -min(a))
    mb = max(1, max(b), -min(b))
    bound = ma * mb * min(len(a), len(b))
    # one digit must hold any signed convolution coefficient plus the bias
    bits = bound.bit_length() + 2
    width_bytes = (bits + 7) // 8
    B = 8 * width_bytes

    ap = _pack_nonneg([c if c > 0 else 0 for c in a], width_bytes)
    an = _pack_nonneg([-c if c < 0 else 0 for c in a], width_bytes)
    bp = _pack_nonneg([c if c > 0 else 0 for c in b], width_bytes)
    bn = _pack_nonneg([-c if c < 0 else 0 for c in b], width_bytes)

    prod = int(gmpy2.mpz(ap - an) * gmpy2.mpz(bp - bn))

    ndig = len(a) + len(b) - 1
    bias = 1 << (B - 1)
    ones = ((1 << (B * ndig)) - 1) // ((1 << B) - 1)
    shifted = prod + bias * ones
    assert shifted >= 0
    raw = shifted.to_bytes(width_bytes * ndig + width_bytes, "little")
    out = []
    for i in range(deg + 1):
        d = int.from_bytes(raw[i * width_bytes:(i + 1) * width_bytes], "little")
        out.append(d - bias)
    return out


def poly_pow(a, e, nmax):
    """a**e truncated to degree nmax, by binary powering."""
    if e == 0:
        return [1]
    result = None
    base = a[:nmax + 1]
    while e:
        if e & 1:
            result = base[:] if result is None else poly_mul(result, base, nmax)
        e >>= 1
        if e:
            base = poly_mul(base, base, nmax)
    return result


def divisor_power_sieve(power, nmax):
    """sigma_power(n) for 0 <= n <= nmax (entry 0 is 0)."""
    sig = [0] * (nmax + 1)
    for d in range(1, nmax + 1):
        dp = d ** power
        for m in range(d, nmax + 1, d):
            sig[m] += dp
    return sig


def smallest_prime_factor_sieve(nmax):
    """spf[n] = least prime factor of n (spf[1] = 1)."""
    spf = list(range(nmax + 1))
    i = 2
    while i * i <= nmax:
        if spf[i] == i:
            for j in range(i * i, nmax + 1, i):
                if spf[j] == j:
                    spf[j] = i
        i += 1
    return spf


def factorize(n, spf):
    """[(p, e), ...] using a smallest-prime-factor sieve."""
    out = []
    while n > 1:
        p = spf[n]
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out.append((p, e))
    return out
