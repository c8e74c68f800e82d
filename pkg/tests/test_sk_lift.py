"""Jacobi forms, lifted Fourier coefficients, restriction, and ratio checks."""

import mpmath
import pytest

from skrlab.modforms import delta, dim_modular, eigenbasis
from skrlab.sk_lift import (
    JacobiForm,
    ichino_diagonal_expansion,
    jacobi_cusp_basis,
    jacobi_eigenforms,
    kohnen_hecke_Tp2,
    kz_ratio_test,
    maass_coefficient,
    match_lifts,
    nv1_census,
    phi_10_1,
    phi_12_1,
    restrict_z0,
    vq_apply,
)


@pytest.fixture(scope="module")
def lift12():
    return match_lifts(12)[0]


@pytest.fixture(scope="module")
def lift10():
    return match_lifts(10)[0]


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def test_generators_construct_and_anchor():
    p10 = phi_10_1(50)
    p12 = phi_12_1(50)
    # z = 0 anchors to 50 coefficients (also asserted during construction)
    assert p10.restriction(50) == [0] * 51
    assert p12.restriction(50) == [12 * c for c in delta(50).coeffs]
    assert p10.coefficient(1, 1) == 1
    assert p12.coefficient(1, 1) == 1 and p12.coefficient(1, 0) == 10


def test_generator_small_n_guard():
    with pytest.raises(ValueError):
        phi_10_1(1)


def test_plus_space_support():
    p12 = phi_12_1(30)
    for D in range(p12.Dmax + 1):
        if D % 4 in (1, 2):
            assert p12.c(D) == 0


def test_coefficient_depends_only_on_discriminant():
    p10 = phi_10_1(40)
    for n in range(1, 12):
        for r in range(0, 8):
            D = 4 * n - r * r
            if D >= 0:
                assert p10.coefficient(n, r) == p10.c(D)
                assert p10.coefficient(n, -r) == p10.c(D)


def test_table_range_error():
    p10 = phi_10_1(10)
    with pytest.raises(ValueError):
        p10.c(1000)


def test_cusp_basis_dimensions():
    for ell in range(10, 32, 2):
        basis = jacobi_cusp_basis(ell, 20)
        assert len(basis) == dim_modular(ell - 10) + dim_modular(ell - 12)
    assert len(jacobi_cusp_basis(10, 20)) == 1
    assert len(jacobi_cusp_basis(12, 20)) == 1
    assert len(jacobi_cusp_basis(16, 20)) == 2
    with pytest.raises(ValueError):
        jacobi_cusp_basis(11, 20)


# ---------------------------------------------------------------------------
# Kohnen Hecke action and matching
# ---------------------------------------------------------------------------

def test_kohnen_t4_eigenvalue_is_a2(lift12):
    h = lift12.phi
    img = kohnen_hecke_Tp2(h, 2)
    ev = img.c(3) / h.c(3)
    assert abs(ev - (-288)) < 1e-40
    assert lift12.f.a(2) == -288


def test_kohnen_preserves_support(lift12):
    img = kohnen_hecke_Tp2(lift12.phi, 3)
    for D in range(img.Dmax + 1):
        if D % 4 in (1, 2):
            assert img.c(D) == 0


def test_kohnen_table_range():
    with pytest.raises(ValueError):
        kohnen_hecke_Tp2(phi_12_1(3), 5)


def test_match_lifts_eigenvalues():
    for ell in (12, 16, 18, 20):
        lifts = match_lifts(ell)
        fs = eigenbasis(2 * ell - 2)
        assert len(lifts) == len(fs)
        assert sorted(F.label for F in lifts) == sorted(f.label for f in fs)
        with mpmath.workprec(320):
            for F in lifts:
                for p in (2, 3, 5):
                    img = kohnen_hecke_Tp2(F.phi, p)
                    D0 = 3 if abs(F.c(3)) > 0 else 4
                    ev = img.c(D0) / F.c(D0)
                    assert abs(ev - F.f.a(p)) <= 1e-20 * (1 + abs(ev))


def test_eigenform_count_matches_cusp_dimension():
    for ell in (12, 16, 24):
        assert len(jacobi_eigenforms(ell, 30)) == len(eigenbasis(2 * ell - 2))


# ---------------------------------------------------------------------------
# Maass coefficients and V_q
# ---------------------------------------------------------------------------

def test_maass_symmetry_and_base_case(lift12):
    F = lift12
    for n in range(1, 7):
        for m in range(1, 7):
            for r in range(0, 5):
                if 4 * n * m - r * r < 0:
                    continue
                assert F.A(n, r, m) == F.A(m, r, n)
                assert F.A(n, r, m) == F.A(n, -r, m)
    for n in range(1, 10):
        for r in range(0, 4):
            if 4 * n - r * r >= 0:
                assert F.A(n, r, 1) == F.c(4 * n - r * r)
    assert maass_coefficient(F, 2, 1, 3) == maass_coefficient(F, 3, 1, 2)
    with pytest.raises(ValueError):
        F.A(1, 5, 1)


def test_vq_identity_and_maass_consistency(lift12):
    F = lift12
    tbl1 = vq_apply(F.phi, 1, 8)
    for (n, r), v in tbl1.items():
        assert v == F.phi.coefficient(n, r)
    for q in (2, 3, 4, 6, 12):
        tbl = vq_apply(F.phi, q, 8)
        for (n, r), v in tbl.items():
            if n >= 1:
                assert abs(v - F.A(n, r, q)) <= 1e-20 * (1 + abs(v))


def test_vq_preserves_z0_vanishing(lift10):
    # the weight-10 generator vanishes at z = 0; so must every phi | V_q
    for q in (2, 3, 5):
        tbl = vq_apply(lift10.phi, q, 8)
        for n in range(1, 9):
            tot = sum(v for (nn, r), v in tbl.items() if nn == n)
            assert abs(tot) < 1e-30


def test_vq_coverage_error(lift12):
    with pytest.raises(ValueError):
        vq_apply(lift12.phi, 4, 10 ** 6)


# ---------------------------------------------------------------------------
# restriction and census
# ---------------------------------------------------------------------------

def test_restriction_symmetric_and_q1_row(lift12):
    data = restrict_z0(lift12, 6)
    assert not data.vanishing
    c3, c4 = lift12.c(3), lift12.c(4)
    assert abs(data.b[1][1] - (c4 + 2 * c3)) < 1e-30
    assert abs(c4 + 2 * c3) > 1  # the q^1 nonvanishing certificate
    for n in range(1, 7):
        for m in range(1, 7):
            assert data.b[n][m] == data.b[m][n]


def test_restriction_vanishing_lift(lift10):
    data = restrict_z0(lift10, 6)
    assert data.vanishing
    for n in range(1, 7):
        for m in range(1, 7):
            assert abs(data.b[n][m]) < 1e-30


def test_restriction_vanishing_equivalence_on_bases():
    # exact-rational route: basis elements vanish at z = 0 exactly when they
    # have no phi_12 part
    for ell in range(10, 32, 2):
        for form in jacobi_cusp_basis(ell, 16):
            vanishes = not any(form.restriction(10))
            assert vanishes == (form.block == "phi10")


def test_nv1_census_pairs():
    for ell in range(10, 32, 2):
        van, target = nv1_census(ell)
        assert van == target
    assert nv1_census(10) == (1, 1)
    assert nv1_census(12) == (0, 0)
    assert nv1_census(22) == (2, 2)  # dim M_12 = 2


# ---------------------------------------------------------------------------
# diagonal expansion and Kohnen-Zagier ratio
# ---------------------------------------------------------------------------

def test_ichino_offdiagonal_and_scale(lift12):
    res = ichino_diagonal_expansion(lift12)
    assert res["offdiag_rel"] <= 1e-8
    assert len(res["e"]) == 1
    assert res["cond"] < 1e20
    assert set(res["e"]) == {"a"}


def test_ichino_rejects_trivial_space(lift10):
    with pytest.raises(ValueError):
        ichino_diagonal_expansion(lift10)


def test_kz_ratio(lift12):
    lhs, rhs = kz_ratio_test(lift12, -4, -3)
    assert lhs == pytest.approx(100.0, abs=1e-10)
    assert lhs == pytest.approx(rhs, rel=1e-6)
    same1, same2 = kz_ratio_test(lift12, -3, -3)
    assert same1 == pytest.approx(1.0) and same2 == pytest.approx(1.0)
    with pytest.raises(ValueError):
        kz_ratio_test(lift12, -4, -5)


def test_kz_scale_invariance(lift12):
    lhs, _ = kz_ratio_test(lift12, -4, -3)
    F7 = match_lifts(12)[0]
    F7.phi = F7.phi.scaled(7)
    lhs7, _ = kz_ratio_test(F7, -4, -3)
    assert lhs7 == pytest.approx(lhs, rel=1e-25)
