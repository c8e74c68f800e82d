"""Index-one Jacobi cusp forms and the lifts they generate.

A Jacobi form of weight l and index 1 has Fourier coefficients depending only
on the discriminant D = 4n - r^2, so each form is stored as a pair of exact
integer (or high-precision) coefficient lists: c(4t) and c(4t - 1).  The two
generators of the cusp ring over M_* are built from theta-quotient component
series, cross-checked against a direct two-variable theta computation, and
everything downstream (Maass coefficients, V_q, restriction to z = 0, the
diagonal eigen-expansion, Kohnen-Zagier ratios) works from the c(D) tables.
"""

from __future__ import annotations

import math
from fractions import Fraction
from math import gcd, isqrt

import mpmath
import sympy

from ._poly import poly_mul, poly_pow
from .lfunctions import kronecker_symbol, sym2_at_1_afe, twisted_central_value
from .modforms import (
    QSeries,
    delta,
    dim_cusp,
    dim_modular,
    eigenbasis,
    space_basis,
)

MP_PREC = 256


# ---------------------------------------------------------------------------
# univariate helpers (exact integer series)
# ---------------------------------------------------------------------------

def _euler_function(N):
    """prod (1 - q^n) to precision N via the pentagonal number expansion."""
    out = [0] * (N + 1)
    out[0] = 1
    j = 1
    while True:
        g1 = j * (3 * j - 1) // 2
        g2 = j * (3 * j + 1) // 2
        if g1 > N and g2 > N:
            break
        s = 1 if j % 2 == 0 else -1
        if g1 <= N:
            out[g1] += s
        if g2 <= N:
            out[g2] += s
        j += 1
    return out


def _inv_series(a, N):
    """Series inverse of a (a[0] = +-1) to precision N, Newton iteration."""
    if a[0] not in (1, -1):
        raise ValueError("leading coefficient must be a unit")
    x = [a[0]]
    prec = 0
    while prec < N:
        prec = min(2 * prec + 1, N)
        ax = poly_mul(a[:prec + 1], x, prec)
        corr = [-c for c in ax]
        corr[0] += 2
        x = poly_mul(x, corr, prec)
    return x + [0] * (N + 1 - len(x))


def _sq_supported(exps, N):
    """Series sum_{e in exps, e <= N} coeff q^e given (exponent, coeff) pairs."""
    out = [0] * (N + 1)
    for e, c in exps:
        if e <= N:
            out[e] += c
    return out


# ---------------------------------------------------------------------------
# weak Jacobi generators as component series
#
# Index-1 forms decompose as c(D) with D = 4n - r^2; the two component series
# (D = 0 mod 4 from even r, D = 3 mod 4 from odd r) of the weight -2 and
# weight 0 weak forms reduce to quotients of one-variable theta constants:
#   P = sum_{s even} q^{s^2/4},  I = sum_{s odd} q^{s^2/4} = 2 q^{1/4} It(q).
# ---------------------------------------------------------------------------

def _weak_components(T):
    """Component lists (even, odd) of the weight -2 and weight 0 weak forms.

    even[t] = c(4t), odd[t] = c(4t - 1), for t <= T.
    """
    N = T + 1
    E = _euler_function(N)
    e6inv = _inv_series(poly_pow(E, 6, N), N)
    # weight -2 form from theta_1^2 / eta^6: components are
    #   even: -2 (sum q^{m(m+1)}) / E^6,  odd: (1 + 2 sum q^{m^2}) / E^6
    tri = _sq_supported(((m * m + m, 1) for m in range(isqrt(N) + 1)), N)
    sqs = _sq_supported(((m * m, 2) for m in range(1, isqrt(N) + 1)), N)
    sqs[0] += 1
    a_even = [-2 * c for c in poly_mul(tri, e6inv, N)]
    a_odd = poly_mul(sqs, e6inv, N)

    # weight 0 form 4 sum_i theta_i(z)^2/theta_i(0)^2 via theta constants on
    # the quarter-exponent grid (index j means q^{j/4})
    L = 4 * T + 4
    P = _sq_supported(((4 * m * m, 2) for m in range(1, isqrt(L) + 1)), L)
    P[0] += 1
    Iser = _sq_supported((((2 * m + 1) ** 2, 2) for m in range(isqrt(L) + 1)), L)
    It = _sq_supported(((m * m + m, 1) for m in range(isqrt(L) + 1)), L)
    P2 = poly_mul(P, P, L)
    I2 = poly_mul(Iser, Iser, L)
    plus_inv = _inv_series([P2[j] + I2[j] for j in range(L + 1)], L)
    minus_inv = _inv_series([P2[j] - I2[j] for j in range(L + 1)], L)
    # even-r component: 4 [1/(2P) + P/(P^2+I^2) + P/(P^2-I^2)]
    even_q4 = [2 * c for c in _inv_series(P, L)]
    for term in (poly_mul(P, plus_inv, L), poly_mul(P, minus_inv, L)):
        for j in range(L + 1):
            even_q4[j] += 4 * term[j]
    # odd-r component: 4 [1/(2I) + I/(P^2+I^2) - I/(P^2-I^2)], with
    # 1/(2I) = q^{-1/4} It^{-1} / 4; shift by one quarter-power so index j
    # holds the coefficient of q^{(4j-1)/4}, i.e. c(4j-1)
    it_inv = _inv_series(It, T + 1)
    odd_q4 = [0] * (L + 2)
    for j, c in enumerate(it_inv):
        if 4 * j <= L + 1:
            odd_q4[4 * j] += c
    tp = poly_mul(Iser, plus_inv, L)
    tm = poly_mul(Iser, minus_inv, L)
    for j in range(L + 1):
        odd_q4[j + 1] += 4 * (tp[j] - tm[j])
    b_even = []
    b_odd = []
    for t in range(T + 1):
        assert all(even_q4[4 * t + s] == 0 for s in (1, 2, 3) if 4 * t + s <= L), \
            "even component has off-grid terms"
        assert all(odd_q4[4 * t + s] == 0 for s in (1, 2, 3) if 4 * t + s <= L + 1), \
            "odd component has off-grid terms"
        b_even.append(even_q4[4 * t])
        b_odd.append(odd_q4[4 * t])
    return (a_even[:T + 1], a_odd[:T + 1]), (b_even, b_odd)


# ---------------------------------------------------------------------------
# brute-force two-variable route (construction self-check)
# ---------------------------------------------------------------------------

def _biv_mul(a, b, nmax):
    out = {}
    for (n1, r1), c1 in a.items():
        if n1 > nmax or c1 == 0:
            continue
        for (n2, r2), c2 in b.items():
            if n1 + n2 > nmax or c2 == 0:
                continue
            key = (n1 + n2, r1 + r2)
            out[key] = out.get(key, 0) + c1 * c2
    return {k: v for k, v in out.items() if v != 0}


def _weak_a_bivariate(nv):
    """(zeta - 2 + 1/zeta) prod (1-q^j zeta)^2 (1-q^j/zeta)^2 / E(q)^4."""
    cur = {(0, 1): 1, (0, 0): -2, (0, -1): 1}
    for j in range(1, nv + 1):
        for sgn in (1, -1):
            fac = {(0, 0): 1, (j, sgn): -2, (2 * j, 2 * sgn): 1}
            cur = _biv_mul(cur, fac, nv)
    e4inv = _inv_series(poly_pow(_euler_function(nv), 4, nv), nv)
    out = {}
    for (n, r), c in cur.items():
        for j in range(nv + 1 - n):
            if e4inv[j]:
                key = (n + j, r)
                out[key] = out.get(key, 0) + c * e4inv[j]
    return out


def _weak_b_bivariate(nv):
    """4 sum_i theta_i(tau,z)^2 / theta_i(tau,0)^2 by direct double sums."""
    L = 4 * nv  # quarter-exponent cap
    M = isqrt(2 * L) + 2
    total = {}
    for kind in (2, 3, 4):
        num = {}   # {(quarter_exp, r): int}
        den = [0] * (L + 1)
        for m in range(-M, M + 1):
            for n in range(-M, M + 1):
                if kind == 2:
                    a, b = 2 * m + 1, 2 * n + 1
                    j4 = (a * a + b * b) // 2
                    r = m + n + 1
                    sgn = 1
                else:
                    j4 = 2 * (m * m + n * n)
                    r = m + n
                    sgn = (-1 if (m + n) % 2 else 1) if kind == 4 else 1
                if j4 > L:
                    continue
                num[(j4, r)] = num.get((j4, r), 0) + sgn
                den[j4] += sgn
        o = next(j for j in range(L + 1) if den[j])
        cols = {}
        for (j4, r), c in num.items():
            cols.setdefault(r, {})[j4] = c
        for r, col in cols.items():
            # divide the zeta^r column by den; quotient starts at offset -o
            quo = {}
            for j in range(L - o + 1):
                val = Fraction(col.get(j + o, 0))
                for i, qv in quo.items():
                    if i < j:
                        val -= qv * den[j - i + o]
                quo[j] = val / den[o]
            for j, qv in quo.items():
                if qv:
                    key = (j, r)
                    total[key] = total.get(key, 0) + 4 * qv
    out = {}
    for (j4, r), c in total.items():
        if c == 0 or j4 > L - 4:  # zero keys, and the truncation edge
            continue
        assert j4 % 4 == 0 and Fraction(c).denominator == 1, \
            "theta-quotient sum is not an integer q-series"
        out[(j4 // 4, r)] = out.get((j4 // 4, r), 0) + int(c)
    return {k: v for k, v in out.items() if v != 0}


# ---------------------------------------------------------------------------
# JacobiForm
# ---------------------------------------------------------------------------

class JacobiForm:
    """Index-1 form as two component lists: even[t] = c(4t), odd[t] = c(4t-1)."""

    __slots__ = ("weight", "index", "even", "odd", "Dmax", "block")

    def __init__(self, weight, even, odd, block=None):
        self.weight = weight
        self.index = 1
        self.even = list(even)
        self.odd = list(odd)
        self.Dmax = 4 * (min(len(self.even), len(self.odd)) - 1)
        self.block = block

    def c(self, D):
        if D > self.Dmax:
            raise ValueError(f"c({D}) beyond held discriminant range {self.Dmax}")
        if D < 0:
            return 0
        if D % 4 == 0:
            return self.even[D // 4]
        if D % 4 == 3:
            return self.odd[(D + 1) // 4]
        return 0

    def coefficient(self, n, r):
        """Fourier coefficient of q^n zeta^r."""
        D = 4 * n - r * r
        return self.c(D) if D >= 0 else 0

    def restriction(self, N):
        """Coefficients of phi(tau, 0) = sum_n (sum_{r^2 <= 4n} c(4n-r^2)) q^n."""
        out = []
        for n in range(N + 1):
            tot = self.c(4 * n)
            r = 1
            while r * r <= 4 * n:
                tot = tot + 2 * self.c(4 * n - r * r)
                r += 1
            out.append(tot)
        return out

    def scaled(self, s):
        return JacobiForm(self.weight, [s * c for c in self.even],
                          [s * c for c in self.odd], block=self.block)


def _modform_times(series_coeffs, phi, weight_add):
    """Multiply a level-1 modular form (q-series coefficients) by phi."""
    T = min(len(series_coeffs) - 1, phi.Dmax // 4)
    s = [int(c) for c in series_coeffs[:T + 1]]
    even = poly_mul(s, phi.even[:T + 1], T)
    odd = poly_mul(s, phi.odd[:T + 1], T)
    return JacobiForm(phi.weight + weight_add, even, odd)


_GEN_CACHE = {}


def _generators(N):
    """phi_10 = Delta * (weight -2 weak form), phi_12 = Delta * (weight 0)."""
    cached = _GEN_CACHE.get("gen")
    if cached is not None and cached[0] >= N:
        return cached[1], cached[2]
    T = N + 1
    (a_even, a_odd), (b_even, b_odd) = _weak_components(T)
    dl = delta(T).coeffs
    phi10 = JacobiForm(10, poly_mul(dl, a_even, N), poly_mul(dl, a_odd, N))
    phi12 = JacobiForm(12, poly_mul(dl, b_even, N), poly_mul(dl, b_odd, N))

    # construction self-checks
    nv = min(6, N)
    biv10 = _biv_mul({(n, 0): c for n, c in enumerate(dl[:nv + 1])},
                     _weak_a_bivariate(nv), nv)
    biv12 = _biv_mul({(n, 0): c for n, c in enumerate(dl[:nv + 2])},
                     _weak_b_bivariate(nv + 1), nv)
    for phi, biv in ((phi10, biv10), (phi12, biv12)):
        for n in range(nv + 1):
            r = 0
            while r * r <= 4 * n + 4:
                want = biv.get((n, r), 0)
                if phi.coefficient(n, r) != want or phi.coefficient(n, -r) != want:
                    raise ArithmeticError(
                        "component-series and two-variable theta routes "
                        f"disagree at (n, r) = ({n}, {r})")
                r += 1
    if any(phi10.restriction(N)):
        raise ArithmeticError("phi_10 generator does not vanish at z = 0")
    if phi12.restriction(N) != [12 * c for c in dl[:N + 1]]:
        raise ArithmeticError("phi_12 generator does not restrict to 12*Delta")
    if phi10.coefficient(1, 1) != 1:
        raise ArithmeticError("phi_10 normalization c(3) = 1 failed")
    _GEN_CACHE["gen"] = (N, phi10, phi12)
    return phi10, phi12


def _sliced(phi, N):
    if phi.Dmax == 4 * N:
        return phi
    return JacobiForm(phi.weight, phi.even[:N + 1], phi.odd[:N + 1],
                      block=phi.block)


def phi_10_1(N):
    if N < 2:
        raise ValueError("N >= 2 required")
    return _sliced(_generators(N)[0], N)


def phi_12_1(N):
    if N < 2:
        raise ValueError("N >= 2 required")
    return _sliced(_generators(N)[1], N)


def jacobi_cusp_basis(ell, N):
    """Basis of J^cusp_{ell,1}: M_{ell-10} phi_10 plus M_{ell-12} phi_12."""
    if ell % 2 or ell < 10:
        raise ValueError("even ell >= 10 required")
    phi10, phi12 = _generators(N)
    out = []
    for s in space_basis(ell - 10, False, N).series:
        form = _modform_times(s.coeffs, phi10, ell - 10)
        form.block = "phi10"
        out.append(form)
    for s in space_basis(ell - 12, False, N).series:
        form = _modform_times(s.coeffs, phi12, ell - 12)
        form.block = "phi12"
        out.append(form)
    assert len(out) == dim_modular(ell - 10) + dim_modular(ell - 12)
    return out


# ---------------------------------------------------------------------------
# Kohnen T(p^2) and eigenforms
# ---------------------------------------------------------------------------

def kohnen_hecke_Tp2(h, p):
    """T(p^2) on the Kohnen-side coefficients: a new (even, odd) table.

    (T h)(n) = c(p^2 n) + p^{l-2} ((-1)^{l-1} n | p) c(n) + p^{2l-3} c(n/p^2).
    """
    ell = h.weight
    T = h.Dmax // (4 * p * p)
    if T < 1:
        raise ValueError("coefficient table does not cover p^2 * D")
    even = []
    odd = []
    for t in range(T + 1):
        for D, dest in ((4 * t, even), (4 * t - 1, odd)):
            if D < 0:
                dest.append(0)
                continue
            val = h.c(p * p * D) \
                + p ** (ell - 2) * kronecker_symbol((-1) ** (ell - 1) * D, p) * h.c(D)
            if D % (p * p) == 0:
                val = val + p ** (2 * ell - 3) * h.c(D // (p * p))
            dest.append(val)
    return JacobiForm(ell, even, odd, block=h.block)


def _allowed_discriminants():
    t = 0
    while True:
        t += 1
        yield 4 * t - 1
        yield 4 * t


def _pivot_discriminants(basis):
    """Smallest discriminants where the basis coefficient matrix is invertible."""
    dim = len(basis)
    pivots = []
    cols = []
    gen = _allowed_discriminants()
    while len(pivots) < dim:
        D = next(gen)
        cand = cols + [[b.c(D) for b in basis]]
        if sympy.Matrix(cand).rank() > len(cols):
            pivots.append(D)
            cols = cand
    return pivots, sympy.Matrix(cols).T  # dim x dim, rows = basis index


def _hecke_matrix(basis, p):
    """Exact rational matrix of T(p^2) on the given basis, with closure check."""
    pivots, P = _pivot_discriminants(basis)
    images = [kohnen_hecke_Tp2(b, p) for b in basis]
    cols = []
    for img in images:
        t = sympy.Matrix([img.c(D) for D in pivots])
        x = P.T.solve(t)
        cols.append(x)
    M = sympy.Matrix.hstack(*cols)
    # closure: the image must equal the combination at every held D
    for img, x in zip(images, cols):
        for D in range(3, img.Dmax + 1):
            if D % 4 in (1, 2):
                continue
            want = sum(x[i] * basis[i].c(D) for i in range(len(basis)))
            if img.c(D) != want:
                raise ArithmeticError(
                    f"T({p}^2) image leaves the cusp space at D = {D}")
    return M


_EIGEN_JACOBI_CACHE = {}


def jacobi_eigenforms(ell, N):
    """Hecke eigenforms of J^cusp_{ell,1} (T(4) eigenvectors), mp coefficients.

    Each returned form is normalized so its first nonzero c(D) equals 1 and
    carries the eigenvector coordinates in the cusp basis as form.block.
    """
    key = ell
    cached = _EIGEN_JACOBI_CACHE.get(key)
    if cached is not None and cached[0] >= N:
        return cached[1]
    basis = jacobi_cusp_basis(ell, N)
    dim = len(basis)
    if dim == 0:
        _EIGEN_JACOBI_CACHE[key] = (N, [])
        return []
    M = _hecke_matrix(basis, 2)
    charpoly = M.charpoly()
    coeffs = [sympy.Rational(c) for c in charpoly.all_coeffs()]
    with mpmath.workprec(MP_PREC + 64):
        poly = [mpmath.mpf(c.p) / mpmath.mpf(c.q) for c in coeffs]
        roots = mpmath.polyroots(poly, maxsteps=200, extraprec=MP_PREC)
        roots = [r.real if isinstance(r, mpmath.mpc) else mpmath.mpf(r)
                 for r in roots]
        roots.sort(reverse=True)
        for i in range(len(roots) - 1):
            if abs(roots[i] - roots[i + 1]) < (1 + abs(roots[i])) * mpmath.mpf(2) ** -60:
                raise ArithmeticError("T(4) eigenvalues too close to separate")
        Mm = mpmath.matrix(dim, dim)
        for i in range(dim):
            for j in range(dim):
                Mm[i, j] = mpmath.mpf(M[i, j].p) / mpmath.mpf(M[i, j].q)
        out = []
        for root in roots:
            if dim == 1:
                v = [mpmath.mpf(1)]
            else:
                A = Mm - root * mpmath.eye(dim)
                sub = mpmath.matrix(dim - 1, dim - 1)
                rhs = mpmath.matrix(dim - 1, 1)
                for i in range(dim - 1):
                    rhs[i] = -A[i, 0]
                    for j in range(dim - 1):
                        sub[i, j] = A[i, j + 1]
                sol = mpmath.lu_solve(sub, rhs)
                v = [mpmath.mpf(1)] + [sol[i] for i in range(dim - 1)]
            Tlen = min(len(b.even) for b in basis)
            even = [mpmath.fsum(v[i] * basis[i].even[t] for i in range(dim))
                    for t in range(Tlen)]
            odd = [mpmath.fsum(v[i] * basis[i].odd[t] for i in range(dim))
                   for t in range(Tlen)]
            lead = next(c for c in (odd[1], even[1]) if abs(c) > 0)
            form = JacobiForm(ell, [c / lead for c in even],
                              [c / lead for c in odd])
            form.block = [vi / lead for vi in v]
            out.append(form)
    _EIGEN_JACOBI_CACHE[key] = (N, out)
    return out


# ---------------------------------------------------------------------------
# the lift
# ---------------------------------------------------------------------------

class SKLift:
    """Degree-2 lift determined by one index-1 Jacobi eigenform."""

    __slots__ = ("ell", "phi", "f", "label", "coords", "basis_blocks")

    def __init__(self, ell, phi, f, coords, basis_blocks):
        self.ell = ell
        self.phi = phi
        self.f = f
        self.label = f.label
        self.coords = coords
        self.basis_blocks = basis_blocks

    def c(self, D):
        return self.phi.c(D)

    def A(self, n, r, m):
        """Fourier coefficient A(n,r,m) by the divisor relation from c(D)."""
        D = 4 * n * m - r * r
        if D < 0:
            raise ValueError("negative discriminant request")
        g = gcd(gcd(n, abs(r)), m)
        total = 0
        for d in range(1, g + 1):
            if g % d == 0:
                total = total + d ** (self.ell - 1) * self.phi.c(D // (d * d))
        return total


def _tp2_eigenvalue(h, p):
    img = kohnen_hecke_Tp2(h, p)
    D0 = next(D for D in (3, 4, 7, 8, 11, 12) if abs(h.c(D)) > 0)
    return img.c(D0) / h.c(D0)


def match_lifts(ell, N=120):
    """Pair each Jacobi eigenform with its source form in S_{2 ell - 2}.

    Matching is by T(p^2)-eigenvalue = a_f(p) for p in {2, 3, 5}; every p must
    agree, and a second candidate within tolerance is a hard error.
    """
    if ell % 2 or ell < 10:
        raise ValueError("even ell >= 10 required")
    hs = jacobi_eigenforms(ell, N)
    fs = eigenbasis(2 * ell - 2)
    if len(hs) != len(fs):
        raise ArithmeticError("Jacobi and elliptic eigenspace dimensions differ")
    lifts = []
    with mpmath.workprec(MP_PREC + 64):
        tol = mpmath.mpf(10) ** -20
        for h in hs:
            evs = {p: _tp2_eigenvalue(h, p) for p in (2, 3, 5)}
            matches = []
            for f in fs:
                if all(abs(evs[p] - f.a(p)) <= tol * (1 + abs(evs[p]))
                       for p in (2, 3, 5)):
                    matches.append(f)
            if len(matches) != 1:
                raise ArithmeticError(
                    f"eigenvalue match at ell={ell} found {len(matches)} "
                    f"candidates for T(4) eigenvalue {evs[2]}")
            blocks = ["phi10"] * dim_modular(ell - 10) + \
                     ["phi12"] * dim_modular(ell - 12)
            lifts.append(SKLift(ell, h, matches[0], h.block, blocks))
    lifts.sort(key=lambda F: F.label)
    return lifts


def maass_coefficient(F, n, r, m):
    return F.A(n, r, m)


def vq_apply(phi, q, nmax=None):
    """Index-q Fourier-Jacobi coefficient table of the lift: phi | V_q.

    Returns {(n, r): coefficient} for 0 <= n <= nmax, 4nq - r^2 >= 0, computed
    from the double-coset sum: for each factorization q = a d, the slash
    summand contributes a^{l-1} c(n d / a, r / a), which survives the b-average
    exactly when a divides both n and r.
    """
    ell = phi.weight
    if q < 1:
        raise ValueError("q >= 1 required")
    if nmax is None:
        nmax = phi.Dmax // (4 * q)
    if 4 * nmax * q > phi.Dmax:
        raise ValueError("coefficient table does not cover 4 n q")
    out = {}
    for n in range(nmax + 1):
        rmax = isqrt(4 * n * q)
        for r in range(-rmax, rmax + 1):
            val = 0
            for a in range(1, q + 1):
                if q % a:
                    continue
                if r % a or n % a:
                    continue
                val = val + a ** (ell - 1) * phi.c((4 * n * q - r * r) // (a * a))
            out[(n, r)] = val
    return out


# ---------------------------------------------------------------------------
# restriction to z = 0 and the diagonal expansion
# ---------------------------------------------------------------------------

class RestrictionData:
    """b(n,m) table of F(tau, 0, tau') plus the structural vanishing flag."""

    __slots__ = ("ell", "N", "b", "vanishing")

    def __init__(self, ell, N, b, vanishing):
        self.ell = ell
        self.N = N
        self.b = b
        self.vanishing = vanishing


def restrict_z0(F, N):
    """b(n, m) = sum_{r^2 <= 4nm} A(n, r, m) for n, m <= N, with certificate.

    The structural route declares the restriction zero iff the phi_12
    component of the source Jacobi form vanishes; both routes must agree.
    """
    if 4 * N * N > F.phi.Dmax:
        raise ValueError("coefficient table does not cover 4 N^2")
    with mpmath.workprec(MP_PREC):
        scale = max(abs(c) for c in F.coords)
        comp12 = [abs(c) for c, blk in zip(F.coords, F.basis_blocks)
                  if blk == "phi12"]
        vanishing = (not comp12) or max(comp12) < scale * mpmath.mpf(2) ** -100
        b = [[mpmath.mpf(0)] * (N + 1) for _ in range(N + 1)]
        bmax = mpmath.mpf(0)
        for n in range(1, N + 1):
            for m in range(n, N + 1):
                tot = F.A(n, 0, m)
                r = 1
                while r * r <= 4 * n * m:
                    tot = tot + 2 * F.A(n, r, m)
                    r += 1
                b[n][m] = b[m][n] = tot
                bmax = max(bmax, abs(tot))
        numeric_zero = bmax < mpmath.mpf(2) ** -80 * (1 + abs(F.c(3)) + abs(F.c(4)))
        if numeric_zero != vanishing:
            raise ArithmeticError(
                "restriction table and structural certificate disagree "
                f"at ell={F.ell}")
    return RestrictionData(F.ell, N, b, vanishing)


def _gnorm(g):
    """Petersson norm <g, g> via L(1, sym^2 g), weight factors explicit."""
    k = g.weight
    L, _ = sym2_at_1_afe(g)
    return math.exp(math.lgamma(k) - (k - 1) * math.log(4 * math.pi)) \
        * L / (2 * math.pi ** 2)


def ichino_diagonal_expansion(F, N=None):
    """Least-squares expansion b(n,m) = sum_{g1,g2} u a_{g1}(n) a_{g2}(m).

    Returns the diagonal coefficients against L2-normalized products
    (e_g = u_gg <g,g>), the relative off-diagonal residual, and a condition
    estimate for the normal equations.
    """
    ell = F.ell
    gs = eigenbasis(ell, N=4096)  # tables sized for the sym^2 values in _gnorm
    dim = len(gs)
    if dim == 0:
        raise ValueError("S_ell is trivial; nothing to expand against")
    if N is None:
        N = 2 * dim + 2
    data = restrict_z0(F, N)
    pairs = [(i, j) for i in range(dim) for j in range(i, dim)]
    with mpmath.workprec(MP_PREC):
        coeff = [[mpmath.mpf(0)] + [mpmath.mpf(g.a(n)) if isinstance(g.a(n), int)
                                    else g.a(n) for n in range(1, N + 1)]
                 for g in gs]
        rows = []
        rhs = []
        for n in range(1, N + 1):
            for m in range(n, N + 1):
                row = []
                for (i, j) in pairs:
                    v = coeff[i][n] * coeff[j][m]
                    if i != j:
                        v = v + coeff[j][n] * coeff[i][m]
                    row.append(v)
                rows.append(row)
                rhs.append(data.b[n][m])
        nun = len(pairs)
        G = mpmath.matrix(nun, nun)
        t = mpmath.matrix(nun, 1)
        for r, y in zip(rows, rhs):
            for i in range(nun):
                for j in range(nun):
                    G[i, j] += r[i] * r[j]
                t[i] += r[i] * y
        Ginv = mpmath.inverse(G)
        cond = mpmath.mnorm(G, 1) * mpmath.mnorm(Ginv, 1)
        if cond > mpmath.mpf(2) ** (MP_PREC // 2):
            raise ArithmeticError(f"normal equations ill-conditioned: {cond}")
        u = Ginv * t
        sol = {pairs[i]: u[i] for i in range(nun)}
        diag = {i: sol[(i, i)] for i in range(dim)}
        dmax = max(abs(v) for v in diag.values())
        off = mpmath.mpf(0)
        if dmax > 0:
            for (i, j) in pairs:
                if i != j:
                    off = max(off, abs(sol[(i, j)]) / dmax)
    e = {gs[i].label: float(diag[i]) * _gnorm(gs[i]) for i in range(dim)}
    return {
        "e": e,
        "raw_diagonal": {gs[i].label: float(diag[i]) for i in range(dim)},
        "offdiag_rel": float(off),
        "cond": float(cond),
        "N": N,
    }


def nv1_census(ell, nrows=None):
    """(dim of the vanishing-restriction subspace, dim M_{ell-10})."""
    if ell % 2 or ell < 10:
        raise ValueError("even ell >= 10 required")
    basis = jacobi_cusp_basis(ell, (nrows or 0) + dim_modular(ell - 10)
                              + dim_modular(ell - 12) + 6)
    dimj = len(basis)
    if nrows is None:
        nrows = dimj + 4
    rows = [b.restriction(nrows)[1:] for b in basis]
    rank = sympy.Matrix(rows).rank() if dimj else 0
    return (dimj - rank, dim_modular(ell - 10))


def kz_ratio_test(F, D1, D2):
    """(|c(|D1|)|^2/|c(|D2|)|^2, (|D1|/|D2|)^{l-3/2} L(1/2,f x chi_D1)/L(...)).

    Scale-free Kohnen-Zagier proportionality check; the two entries should
    agree within the quoted twisted-value budgets.
    """
    c1 = F.c(abs(D1))
    c2 = F.c(abs(D2))
    if c1 == 0 or c2 == 0:
        raise ValueError("zero coefficient in the Kohnen-Zagier ratio")
    lhs = float(abs(c1) ** 2 / abs(c2) ** 2)
    f = next(g for g in eigenbasis(2 * F.ell - 2, N=4096)
             if g.label == F.f.label)
    L1, _ = twisted_central_value(f, D1)
    L2, _ = twisted_central_value(f, D2)
    if L2 == 0:
        raise ValueError("vanishing twisted value in the denominator")
    rhs = (abs(D1) / abs(D2)) ** (F.ell - 1.5) * L1 / L2
    return lhs, rhs
