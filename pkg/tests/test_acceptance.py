"""End-to-end acceptance runs, one summary line per criterion.

Each test prints `ACCEPTANCE <n> <name>: PASS|FAIL` so a log scrape shows
the verdicts; tolerances are stated inline next to each assertion.
"""

import math
import os

import mpmath
import pytest

from skrlab import asymptotics, expsums, lfunctions, modforms, sk_lift


def _report(num, name, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {num} {name}: {tag}{suffix}")
    assert ok, f"criterion {num} {name}{suffix}"


# 1. published-norm reproduction -------------------------------------------

TABLE_VALUES = {12: [0.83], 16: [0.64, 0.49], 18: [0.043, 1.2],
                20: [0.88, 0.44]}


def test_criterion_1_norm_table():
    worst = 0.0
    ok = True
    for ell, refs in TABLE_VALUES.items():
        reports = lfunctions.norm_NFf(ell, prec_bits=192, cutoff_C=40.0)
        got = sorted(float(r.N) for r in reports)
        for val, ref in zip(got, sorted(refs)):
            rel = abs(val - ref) / ref
            worst = max(worst, rel)
            ok = ok and rel <= 0.15
    for ell in (10, 14):
        for r in lfunctions.norm_NFf(ell):
            ok = ok and float(r.N) == 0.0
    _report(1, "norm table set-wise <=15%", ok, f"worst rel {worst:.3g}")


# 2-3. exact exponential sums ----------------------------------------------

def test_criterion_2_gauss_sums():
    ok = True
    for c in range(1, 501):
        try:
            expsums.gauss_T(c)
        except ArithmeticError:
            ok = False
    for c in range(1, 101):
        ok = ok and expsums.gauss_T_r2_independence(c, list(range(1, 11)))
    for c1 in range(1, 21):
        for c2 in range(1, 400 // c1 + 1):
            if math.gcd(c1, c2) == 1:
                ok = ok and (expsums.gauss_T(c1) * expsums.gauss_T(c2)
                             == expsums.gauss_T(c1 * c2))
    _report(2, "gauss identity/independence/multiplicativity", ok)


def test_criterion_3_weil_bound():
    ok = all(expsums.weil_check(m, n, c)
             for c in range(1, 201)
             for m in range(1, 21) for n in range(1, 21))
    _report(3, "weil bound m,n<=20 c<=200", ok)


# 4. two-sided Petersson check ----------------------------------------------

def test_criterion_4_petersson():
    reports = lfunctions.petersson_sweep(weights=(12, 22), mnmax=6,
                                         cmax=10 ** 4)
    worst = max(r["diff"] - r["budget"] for r in reports)
    ok = all(r["diff"] <= r["budget"] for r in reports)
    _report(4, "petersson weights 12,22 m,n<=6 within 1e-8+tail", ok,
            f"worst excess {worst:.3g}")


# 5. Bessel-sum asymptotics --------------------------------------------------

def test_criterion_5_bessel_asymptotics():
    ok = True
    ratios = {}
    for K in (64, 128, 256):
        w = asymptotics.WeightFunction(K)
        worst = 0.0
        for gamma in (0.2, 0.5, 0.8):
            beta = 1.5 * K / (2.0 * math.pi * math.sqrt(1.0 - gamma ** 2))
            p = asymptotics.BesselSumParams(beta / (4.0 * gamma), beta, K)
            resid = abs(asymptotics.s_direct(p, w)
                        - asymptotics.s_asymptotic(p, w))
            ok = ok and resid <= 10.0 * math.log(K) / K
            worst = max(worst, resid * K / math.log(K))
        ratios[K] = worst
    ok = ok and ratios[256] <= ratios[64]  # residual constant non-growing

    w128 = asymptotics.WeightFunction(128)
    p = asymptotics.BesselSumParams(128.0 / 200.0, 128.0, 128.0)
    ok = ok and abs(asymptotics.s_direct(p, w128)) <= math.exp(-64.0)

    fitted = {}
    for K in (128, 256):
        w = asymptotics.WeightFunction(K)
        c = 0.0
        for xf in (1.3, 1.5, 1.7):
            x = xf * K
            for a in (0, 2):
                direct, formula = asymptotics.single_bessel_sum(a, x, w)
                resid = abs(direct - formula)
                ok = ok and resid <= 100.0 * x / K ** 3
                c = max(c, resid / (x / K ** 3))
        fitted[K] = c
    reduction = 4.0 * fitted[128] / fitted[256]
    ok = ok and 4.0 <= reduction <= 16.0  # 8x per doubling, factor-2 slack
    _report(5, "bilinear/single bessel sums", ok,
            f"worst ratio {max(ratios.values()):.3g}, scaling {reduction:.2f}")


# 6. constant identities ------------------------------------------------------

def test_criterion_6_euler_constants():
    c1, c2 = lfunctions.conjecture_constants()
    ok = (c1.numerator, c1.denominator) == (4, 5)
    ok = ok and (c2.numerator, c2.denominator) == (2, 1)
    import random
    rng = random.Random(20260823)
    for _ in range(5):
        theta = rng.uniform(0.0, math.pi)
        ap = complex(math.cos(theta), math.sin(theta))
        for p in (2, 3, 5):
            trunc, closed = lfunctions.cfkrs_local_factor(p, ap, 0.01)
            ok = ok and abs(trunc - closed) <= 1e-12
            lhs, rhs = lfunctions.af_local_identity(p, ap, 0.01)
            ok = ok and abs(lhs - rhs) <= 1e-12
    for p in (2, 3, 5):
        brute, closed = lfunctions.m0_local_factor(p)
        ok = ok and abs(brute - closed) <= 1e-12
    m0_2 = lfunctions.m0_closed_fraction(2)
    ok = ok and (m0_2.numerator, m0_2.denominator) == (5, 4)
    _report(6, "euler/local-factor constants", ok)


# 7. structural lift suite ----------------------------------------------------

def test_criterion_7_sk_structural():
    ok = True
    p10 = sk_lift.phi_10_1(50)
    p12 = sk_lift.phi_12_1(50)
    ok = ok and p10.restriction(50) == [0] * 51
    ok = ok and p12.restriction(50) == [12 * c for c in
                                        modforms.delta(50).coeffs]
    for D in range(p12.Dmax + 1):
        if D % 4 in (1, 2):
            ok = ok and p12.c(D) == 0 and p10.c(D) == 0

    for ell in (10, 12, 16):
        for F in sk_lift.match_lifts(ell, N=450):
            for n in range(1, 21):
                for m in range(1, 21):
                    for r in range(0, int(math.isqrt(4 * n * m)) + 1):
                        ok = ok and F.A(n, r, m) == F.A(m, r, n)
            for q in range(1, 21):
                tbl = sk_lift.vq_apply(F.phi, q, 20)
                for (n, r), v in tbl.items():
                    if n >= 1:
                        ok = ok and abs(v - F.A(n, r, q)) <= 1e-18 * (1 + abs(v))

    for ell in range(10, 32, 2):
        van, target = sk_lift.nv1_census(ell)
        ok = ok and van == target

    with mpmath.workprec(320):
        for ell in (12, 16, 18, 20, 24):
            for F in sk_lift.match_lifts(ell):
                for p in (2, 3, 5):
                    img = sk_lift.kohnen_hecke_Tp2(F.phi, p)
                    D0 = 3 if abs(F.c(3)) > 0 else 4
                    ev = img.c(D0) / F.c(D0)
                    ok = ok and abs(ev - F.f.a(p)) <= 1e-20 * (1 + abs(ev))
    _report(7, "plus-space/maass/V_q/census/kohnen", ok)


# 8. diagonal-restriction cross-check ----------------------------------------

def test_criterion_8_ichino_weight_24():
    ell = 24
    ev = lfunctions.RSEvaluator(ell - 1)
    fs = {f.label: f for f in modforms.eigenbasis(2 * ell - 2, N=ev.X)}
    gs = list(modforms.eigenbasis(ell, N=ev.X))
    ok = True
    worst = 0.0
    for F in sk_lift.match_lifts(ell):
        res = sk_lift.ichino_diagonal_expansion(F)
        ok = ok and res["offdiag_rel"] <= 1e-8
        l1, _ = lfunctions.rankin_central_value(fs[F.label], gs[0], ev)
        l2, _ = lfunctions.rankin_central_value(fs[F.label], gs[1], ev)
        lhs = float((res["e"][gs[0].label] / res["e"][gs[1].label]) ** 2)
        rel = abs(lhs - l1 / l2) / abs(l1 / l2)
        worst = max(worst, rel)
        ok = ok and rel <= 0.01
    _report(8, "ichino e^2 ratio vs rankin ratio at ell=24", ok,
            f"worst rel {worst:.3g}")


# 9. coefficient-ratio identity ----------------------------------------------

def test_criterion_9_kohnen_zagier():
    F = sk_lift.match_lifts(12)[0]
    lhs, rhs = sk_lift.kz_ratio_test(F, -4, -3)
    rel = abs(lhs - rhs) / abs(rhs)
    ok = rel <= 0.01
    ok = ok and abs(F.c(4) + 2 * F.c(3)) > 0
    _report(9, "coefficient ratio vs twisted central values", ok,
            f"rel {rel:.3g}")


# non-gating trend report ------------------------------------------------------

@pytest.mark.skipif("SKR_TREND" not in os.environ,
                    reason="exploratory trend report; set SKR_TREND=1 to run")
def test_trend_report_larger_weights():
    """Exploratory only: prints N for even weights 22..40; never fails."""
    for ell in range(22, 42, 2):
        try:
            for r in lfunctions.norm_NFf(ell):
                print(f"TREND ell={ell} label={r.label} N={float(r.N):.4f}")
        except Exception as exc:  # noqa: BLE001 - report and move on
            print(f"TREND ell={ell} skipped: {exc}")
