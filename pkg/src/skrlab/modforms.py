"""Exact q-expansions for level-1 modular forms and Hecke eigenforms.

Series arithmetic is exact (integers, or rationals where unavoidable).
Space bases are echelonized monomial bases in E4, E6; eigenforms come from
the exact integer matrix of T_2 on the cusp basis, its exact characteristic
polynomial, and root isolation at configurable bit precision.
"""

from __future__ import annotations

import os
from fractions import Fraction

import mpmath
import sympy

from ._poly import (
    divisor_power_sieve,
    factorize,
    poly_mul,
    poly_pow,
    smallest_prime_factor_sieve,
)

DEFAULT_PREC_BITS = 192


class QSeries:
    """Truncated power series in q with exact coefficients (int/Fraction).

    ``prec`` is the largest q-power held; arithmetic never claims more
    coefficients than the minimum precision of its inputs.
    """

    __slots__ = ("coeffs", "prec")

    def __init__(self, coeffs, prec=None):
        coeffs = list(coeffs)
        if prec is None:
            prec = len(coeffs) - 1
        if len(coeffs) < prec + 1:
            coeffs = coeffs + [0] * (prec + 1 - len(coeffs))
        else:
            coeffs = coeffs[:prec + 1]
        self.coeffs = [self._norm(c) for c in coeffs]
        self.prec = prec

    @staticmethod
    def _norm(c):
        if isinstance(c, Fraction) and c.denominator == 1:
            return int(c)
        return c

    def __getitem__(self, n):
        if n < 0 or n > self.prec:
            raise IndexError(f"coefficient q^{n} beyond held precision {self.prec}")
        return self.coeffs[n]

    def truncate(self, prec):
        if prec > self.prec:
            raise ValueError("cannot extend precision by truncation")
        return QSeries(self.coeffs[:prec + 1], prec)

    def is_integral(self):
        return all(isinstance(c, int) for c in self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        n = min(self.prec, other.prec)
        return self.coeffs[:n + 1] == other.coeffs[:n + 1] and self.prec == other.prec

    def __neg__(self):
        return QSeries([-c for c in self.coeffs], self.prec)

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            out = list(self.coeffs)
            out[0] = out[0] + other
            return QSeries(out, self.prec)
        prec = min(self.prec, other.prec)
        return QSeries(
            [self.coeffs[i] + other.coeffs[i] for i in range(prec + 1)], prec
        )

    __radd__ = __add__

    def __sub__(self, other):
        return self.__add__(-other if isinstance(other, QSeries) else -other)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QSeries([c * other for c in self.coeffs], self.prec)
        prec = min(self.prec, other.prec)
        if self.is_integral() and other.is_integral():
            out = poly_mul(self.coeffs, other.coeffs, prec)
        else:
            out = [Fraction(0)] * (prec + 1)
            for i, a in enumerate(self.coeffs[:prec + 1]):
                if a == 0:
                    continue
                for j in range(0, prec + 1 - i):
                    b = other.coeffs[j]
                    if b:
                        out[i + j] += a * b
        return QSeries(out, prec)

    __rmul__ = __mul__

    def __pow__(self, e):
        if not isinstance(e, int) or e < 0:
            raise ValueError("only nonnegative integer powers")
        if e == 0:
            return QSeries([1], self.prec)
        if self.is_integral():
            return QSeries(poly_pow(self.coeffs, e, self.prec), self.prec)
        result = QSeries([1], self.prec)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __repr__(self):
        head = ", ".join(str(c) for c in self.coeffs[:6])
        return f"QSeries(prec={self.prec}, coeffs=[{head}, ...])"


def eisenstein(k, N):
    """E_k to precision N: constant term 1, n-th term -(2k/B_k) sigma_{k-1}(n)."""
    if k < 4 or k % 2:
        raise ValueError("eisenstein requires even k >= 4")
    bk = Fraction(sympy.bernoulli(k).p, sympy.bernoulli(k).q)
    factor = Fraction(-2 * k) / bk
    sig = divisor_power_sieve(k - 1, N)
    coeffs = [factor * sig[n] for n in range(N + 1)]
    coeffs[0] = 1
    return QSeries(coeffs, N)


def _eta_powerless(N):
    """prod (1-q^n) to precision N by the pentagonal number theorem."""
    coeffs = [0] * (N + 1)
    coeffs[0] = 1
    m = 1
    while True:
        p1 = m * (3 * m - 1) // 2
        p2 = m * (3 * m + 1) // 2
        if p1 > N and p2 > N:
            break
        s = -1 if m % 2 else 1
        if p1 <= N:
            coeffs[p1] += s
        if p2 <= N:
            coeffs[p2] += s
        m += 1
    return coeffs


def delta(N):
    """Delta = q prod (1-q^n)^24 to precision N, exact integers."""
    if N < 1:
        raise ValueError("need N >= 1")
    body = poly_pow(_eta_powerless(N - 1), 24, N - 1)
    return QSeries([0] + body, N)


def dim_modular(k):
    """dim M_k for level 1."""
    if k < 0 or k % 2:
        return 0
    return k // 12 if k % 12 == 2 else k // 12 + 1


def dim_cusp(k):
    """dim S_k for level 1."""
    return max(dim_modular(k) - 1, 0)


class SpaceBasis:
    """Echelonized exact basis of M_k or S_k."""

    def __init__(self, weight, cuspidal, series):
        self.weight = weight
        self.cuspidal = cuspidal
        self.series = series
        self.dim_modular = dim_modular(weight)
        self.dim_cusp = dim_cusp(weight)

    def __len__(self):
        return len(self.series)


_MONOMIAL_CACHE = {}


def _echelon_rows(k, N):
    """Integer echelon rows of M_k to precision N (leading identity block)."""
    key = k
    cached = _MONOMIAL_CACHE.get(key)
    if cached is not None and cached[0] >= N:
        return [row[:N + 1] for row in cached[1]]
    d = dim_modular(k)
    if d == 0:
        return []
    if N + 1 < d:
        raise ValueError(f"precision {N} too small for dim {d}")
    if k == 0:
        rows = [[1] + [0] * N]
        _MONOMIAL_CACHE[key] = (N, rows)
        return [row[:] for row in rows]
    e4 = eisenstein(4, N).coeffs if k >= 4 else None
    e6 = eisenstein(6, N).coeffs if k >= 6 else None
    monomials = []
    pow4 = {0: [1]}
    pow6 = {0: [1]}

    def power(base, cache, e):
        if e not in cache:
            cache[e] = poly_mul(power(base, cache, e - 1), base, N)
        return cache[e]

    for b in range(k // 6 + 1):
        if (k - 6 * b) % 4 == 0:
            a = (k - 6 * b) // 4
            pa = power(e4, pow4, a) if a else [1]
            pb = power(e6, pow6, b) if b else [1]
            mono = poly_mul(pa, pb, N) if (a and b) else (pa if a else pb)
            mono = mono + [0] * (N + 1 - len(mono))
            monomials.append(mono)
    assert len(monomials) == d, (k, len(monomials), d)

    lead = sympy.Matrix([[monomials[j][i] for i in range(d)] for j in range(d)])
    t = lead.inv()  # exact rational inverse; rows of t give the echelon combos
    rows = []
    for i in range(d):
        dens = [t[i, j].q for j in range(d)]
        common = 1
        for q in dens:
            common = common * q // sympy.gcd(common, q)
        ints = [int(t[i, j] * common) for j in range(d)]
        row = [0] * (N + 1)
        for j, c in enumerate(ints):
            if c:
                mj = monomials[j]
                for idx in range(N + 1):
                    row[idx] += c * mj[idx]
        for idx in range(N + 1):
            val = row[idx]
            q, r = divmod(val, common)
            assert r == 0, "echelon basis unexpectedly non-integral"
            row[idx] = q
        rows.append(row)
    _MONOMIAL_CACHE[key] = (N, rows)
    return [row[:] for row in rows]


def space_basis(k, cuspidal, N):
    """Echelonized exact basis of M_k (or S_k) to precision N."""
    if k % 2 or k < 0:
        return SpaceBasis(k, cuspidal, [])
    rows = _echelon_rows(k, N) if dim_modular(k) else []
    if cuspidal:
        rows = rows[1:]  # echelon rows with leading power >= 1
    return SpaceBasis(k, cuspidal, [QSeries(r, N) for r in rows])


def hecke_Tn(s, k, n, out_prec=None):
    """T_n on a weight-k q-expansion: b(m) = sum_{d|(m,n)} d^{k-1} a(mn/d^2)."""
    if n < 1:
        raise ValueError("n >= 1 required")
    max_out = s.prec // n
    if out_prec is None:
        out_prec = max_out
    elif out_prec > max_out:
        raise ValueError(
            f"insufficient precision: need {out_prec * n} coefficients, have {s.prec}"
        )
    divisors = [d for d in range(1, n + 1) if n % d == 0]
    out = [0] * (out_prec + 1)
    for m in range(out_prec + 1):
        acc = 0
        for d in divisors:
            if m % d == 0:
                acc += d ** (k - 1) * s.coeffs[m * n // (d * d)]
        out[m] = acc
    return QSeries(out, out_prec)


_SPF_CACHE = {"n": 0, "spf": None}


def spf_sieve(nmax):
    if _SPF_CACHE["n"] < nmax:
        _SPF_CACHE["spf"] = smallest_prime_factor_sieve(max(nmax, 2 * _SPF_CACHE["n"]))
        _SPF_CACHE["n"] = len(_SPF_CACHE["spf"]) - 1
    return _SPF_CACHE["spf"]


def primes_up_to(nmax):
    spf = spf_sieve(nmax)
    return [p for p in range(2, nmax + 1) if spf[p] == p]


class Eigenform:
    """Normalized Hecke eigenform of even weight k.

    Coefficients at primes are held exactly (ints) when dim S_k = 1 and as
    high-precision reals otherwise; lambda(n) = a(n)/n^((k-1)/2) extends by
    Hecke multiplicativity.
    """

    def __init__(self, weight, label, a_primes, a_dense, prec_bits, exact):
        self.weight = weight
        self.label = label
        self.a_primes = a_primes      # dict p -> a(p), int or mpf
        self.a_dense = a_dense        # dict n -> a(n) straight from basis rows
        self.prec_bits = prec_bits
        self.exact = exact
        self.nmax = max(a_primes) if a_primes else 0
        self._lam_pp = {}             # (p, e) -> lambda(p^e) as mpf

    # -- normalized eigenvalues ------------------------------------------
    def lam_p(self, p):
        return self._lam_power(p, 1)

    def _lam_power(self, p, e):
        if e == 0:
            return mpmath.mpf(1)
        key = (p, e)
        got = self._lam_pp.get(key)
        if got is not None:
            return got
        with mpmath.workprec(self.prec_bits + 16):
            if (p, 1) not in self._lam_pp:
                ap = self.a_primes.get(p)
                if ap is None:
                    raise KeyError(f"a({p}) outside tabulated range (nmax={self.nmax})")
                self._lam_pp[(p, 1)] = mpmath.mpf(ap) / mpmath.mpf(p) ** (
                    mpmath.mpf(self.weight - 1) / 2
                )
            lam1 = self._lam_pp[(p, 1)]
            prev2, prev1 = mpmath.mpf(1), lam1
            for j in range(2, e + 1):
                if (p, j) in self._lam_pp:
                    prev2, prev1 = prev1, self._lam_pp[(p, j)]
                    continue
                cur = lam1 * prev1 - prev2
                self._lam_pp[(p, j)] = cur
                prev2, prev1 = prev1, cur
        return self._lam_pp[(p, e)]

    def lam(self, n):
        """lambda(n) by multiplicativity; needs primes of n tabulated."""
        if n < 1:
            raise ValueError("n >= 1")
        spf = spf_sieve(n)
        with mpmath.workprec(self.prec_bits + 16):
            out = mpmath.mpf(1)
            for p, e in factorize(n, spf):
                out *= self._lam_power(p, e)
        return out

    def a(self, n):
        """a(n) = lambda(n) n^((k-1)/2) (exact int path when available)."""
        if self.exact:
            spf = spf_sieve(n)
            out = 1
            for p, e in factorize(n, spf):
                out *= self._a_power_exact(p, e)
            return out
        with mpmath.workprec(self.prec_bits + 16):
            return self.lam(n) * mpmath.mpf(n) ** (mpmath.mpf(self.weight - 1) / 2)

    def _a_power_exact(self, p, e):
        ap = self.a_primes[p]
        prev2, prev1 = 1, ap
        for _ in range(e - 1):
            prev2, prev1 = prev1, ap * prev1 - p ** (self.weight - 1) * prev2
        return prev1 if e >= 1 else 1

    def lam_float(self, n):
        return float(self.lam(n))

    def lam_array_float(self, nmax):
        """numpy-free float list lambda(1..nmax) (index 0 unused)."""
        spf = spf_sieve(nmax)
        out = [0.0] * (nmax + 1)
        out[1] = 1.0
        pf = {}
        for p in primes_up_to(nmax):
            pf[(p, 1)] = float(self.lam_p(p))
        for n in range(2, nmax + 1):
            p = spf[n]
            e = 1
            m = n // p
            while m % p == 0:
                m //= p
                e += 1
            key = (p, e)
            if key not in pf:
                lam1 = pf[(p, 1)]
                prev2, prev1, j = 1.0, lam1, 1
                while j < e:
                    if (p, j + 1) in pf:
                        prev2, prev1 = prev1, pf[(p, j + 1)]
                    else:
                        prev2, prev1 = prev1, lam1 * prev1 - prev2
                        pf[(p, j + 1)] = prev1
                    j += 1
            out[n] = pf[key] * out[m] if m > 1 else pf[key]
        return out

    def lam_sq_float(self, rmax):
        """float list lambda(r^2) for r = 0..rmax (index 0 unused)."""
        spf = spf_sieve(rmax)
        out = [0.0] * (rmax + 1)
        if rmax >= 1:
            out[1] = 1.0
        pf = {}

        def lam_pp(p, e):
            if (p, e) not in pf:
                lam1 = float(self.lam_p(p))
                prev2, prev1 = 1.0, lam1
                pf[(p, 1)] = lam1
                for j in range(2, e + 1):
                    prev2, prev1 = prev1, lam1 * prev1 - prev2
                    pf[(p, j)] = prev1
            return pf[(p, e)]

        for r in range(2, rmax + 1):
            val = 1.0
            for p, e in factorize(r, spf):
                val *= lam_pp(p, 2 * e)
            out[r] = val
        return out


_EIGEN_CACHE = {}


def eigenbasis(k, N=None, prec_bits=DEFAULT_PREC_BITS, small_n=120):
    """Complete list of normalized eigenforms of S_k, labeled by lambda(2) desc.

    ``N`` bounds the tabulated prime range for a(p).
    """
    d = dim_cusp(k)
    if d == 0:
        return []
    if N is None:
        N = max(200, 4 * d)
    N = max(N, 4 * d, small_n)
    key = (k, prec_bits)
    cached = _EIGEN_CACHE.get(key)
    if cached is not None and cached[0] >= N:
        return cached[1]

    rows = [s.coeffs for s in space_basis(k, True, N).series]

    # exact integer matrix of T_2 on the echelon cusp basis
    mat = [[0] * d for _ in range(d)]
    for j in range(d):
        for i in range(d):
            m = i + 1
            val = rows[j][2 * m]
            if m % 2 == 0:
                val += 2 ** (k - 1) * rows[j][m // 2]
            mat[i][j] = val

    forms = []
    if d == 1:
        a2 = mat[0][0]
        a_primes = {p: rows[0][p] for p in primes_up_to(N)}
        a_dense = {n: rows[0][n] for n in range(1, min(small_n, N) + 1)}
        assert a_primes[2] == a2
        forms.append(Eigenform(k, "a", a_primes, a_dense, prec_bits, exact=True))
    else:
        sym_mat = sympy.Matrix(mat)
        charpoly = sym_mat.charpoly()
        coeffs = [int(c) for c in charpoly.all_coeffs()]
        with mpmath.workprec(prec_bits + 64):
            roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=prec_bits)
            roots = [mpmath.mpf(r.real) if isinstance(r, mpmath.mpc) else mpmath.mpf(r) for r in roots]
            # verify each root against the exact characteristic polynomial
            for r in roots:
                val = mpmath.polyval(coeffs, r)
                scale = sum(abs(mpmath.mpf(c)) * abs(r) ** (len(coeffs) - 1 - i)
                            for i, c in enumerate(coeffs))
                if abs(val) > scale * mpmath.mpf(2) ** (-(prec_bits - 10)):
                    raise ArithmeticError("characteristic-polynomial roots too close "
                                          "for working precision")
            roots.sort(reverse=True)
            for idx, r in enumerate(roots):
                a_mat = mpmath.matrix(mat) - r * mpmath.eye(d)
                # v_1 = 1; solve the first d-1 equations for v_2..v_d
                sub = mpmath.matrix(d - 1, d - 1)
                rhs = mpmath.matrix(d - 1, 1)
                for i in range(d - 1):
                    rhs[i] = -a_mat[i, 0]
                    for j in range(d - 1):
                        sub[i, j] = a_mat[i, j + 1]
                tail = mpmath.lu_solve(sub, rhs)
                v = [mpmath.mpf(1)] + [tail[i] for i in range(d - 1)]
                resid = max(abs(sum(a_mat[i, j] * v[j] for j in range(d)))
                            for i in range(d))
                vscale = max(abs(x) for x in v) * max(abs(r), 1)
                assert resid <= vscale * mpmath.mpf(2) ** (-(prec_bits - 24)), \
                    "eigenvector residual too large"
                a_primes = {}
                for p in primes_up_to(N):
                    a_primes[p] = sum(v[i] * mpmath.mpf(rows[i][p]) for i in range(d))
                a_dense = {
                    n: sum(v[i] * mpmath.mpf(rows[i][n]) for i in range(d))
                    for n in range(1, min(small_n, N) + 1)
                }
                forms.append(Eigenform(k, "?", a_primes, a_dense, prec_bits,
                                       exact=False))

    # deterministic labeling: descending lambda(2), ties by lambda(3)
    forms.sort(key=lambda f: (-f.lam_p(2), -f.lam_p(3)))
    for i, f in enumerate(forms):
        f.label = chr(ord("a") + i)
    _EIGEN_CACHE[key] = (N, forms)
    return forms


# -- coefficient cache on disk -------------------------------------------

def cache_path(cache_dir, weight, label):
    return os.path.join(cache_dir, f"eigenform_w{weight}_{label}.txt")


def save_eigenform(cache_dir, form, n_values=None):
    """Write `n a(n)` lines under a self-describing header; append-only."""
    os.makedirs(cache_dir, exist_ok=True)
    if n_values is None:
        n_values = sorted(set(form.a_dense) | set(form.a_primes))
    path = cache_path(cache_dir, form.weight, form.label)
    with mpmath.workprec(form.prec_bits + 16):
        with open(path, "w") as fh:
            fh.write(f"# weight={form.weight} label={form.label} "
                     f"prec_bits={form.prec_bits} n_max={max(n_values)}\n")
            for n in n_values:
                a = form.a_dense.get(n)
                if a is None:
                    a = form.a_primes.get(n)
                if a is None:
                    a = form.a(n)
                if isinstance(a, int):
                    fh.write(f"{n} {a}\n")
                else:
                    fh.write(f"{n} {mpmath.nstr(a, 58)}\n")
    return path


class CacheError(Exception):
    pass


def load_eigenform(path):
    """Load a cached coefficient table, re-validating three Hecke relations."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# weight="):
            raise CacheError("missing header")
        fields = dict(part.split("=") for part in header[2:].split())
        weight = int(fields["weight"])
        prec_bits = int(fields["prec_bits"])
        label = fields["label"]
        table = {}
        exact = True
        for line in fh:
            n_s, a_s = line.split()
            n = int(n_s)
            if "." in a_s or "e" in a_s or "E" in a_s:
                exact = False
                with mpmath.workprec(prec_bits + 16):
                    table[n] = mpmath.mpf(a_s)
            else:
                table[n] = int(a_s)
    spf = spf_sieve(max(table))
    a_primes = {n: v for n, v in table.items() if n >= 2 and spf[n] == n}
    form = Eigenform(weight, label, a_primes, table, prec_bits, exact)
    # three Hecke relations re-checked before the table is trusted
    checks = [((2, 3), [(1, 6)]), ((2, 2), [(1, 4), (2 ** (weight - 1), 1)]),
              ((2, 4), [(1, 8), (2 ** (weight - 1), 2)])]
    with mpmath.workprec(prec_bits + 16):
        tol = mpmath.mpf(2) ** (-(prec_bits - 32))
        for (m, n), rhs_terms in checks:
            needed = [m, n] + [idx for _, idx in rhs_terms]
            if any(x not in table for x in needed):
                raise CacheError("cache too short to validate Hecke relations")
            lhs = mpmath.mpf(table[m]) * mpmath.mpf(table[n])
            rhs = sum(mpmath.mpf(c) * mpmath.mpf(table[idx]) for c, idx in rhs_terms)
            scale = max(abs(lhs), abs(rhs), mpmath.mpf(1))
            if abs(lhs - rhs) > tol * scale:
                raise CacheError(f"Hecke relation failed for (m,n)=({m},{n})")
    return form
