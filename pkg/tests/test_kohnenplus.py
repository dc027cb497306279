from fractions import Fraction

import pytest
from mpmath import mpf

from lvalues.eigenforms import charpoly, hecke_matrix
from lvalues.exactseries import dim_cusp_forms, victor_miller_basis
from lvalues.kohnenplus import (GAMMA0_4_COSETS, PlusSpaceError, hecke_plus, hecke_plus_matrix,
                                petersson_norm_gamma0_4, plus_allowed, plus_space_basis, shimura_match,
                                waldspurger_norm_check, waldspurger_ratio_check)


def kz_weight_13_2(nmax):
    # 60 (2 G4(4z) D theta - theta (D G4)(4z)), D = q d/dq, G4 = 1/240 + sum sigma_3(n) q^n
    def s3(n):
        return sum(d ** 3 for d in range(1, n + 1) if n % d == 0)
    th = [0] * (nmax + 1)
    j = 0
    while j * j <= nmax:
        th[j * j] += 1 if j == 0 else 2
        j += 1
    dth = [n * c for n, c in enumerate(th)]
    g4 = [Fraction(0)] * (nmax + 1)
    dg4 = [0] * (nmax + 1)
    g4[0] = Fraction(1, 240)
    for n in range(1, nmax // 4 + 1):
        g4[4 * n] = Fraction(s3(n))
        dg4[4 * n] = n * s3(n)
    out = []
    for n in range(nmax + 1):
        a = sum(g4[i] * dth[n - i] for i in range(n + 1))
        b = sum(th[i] * dg4[n - i] for i in range(n + 1))
        out.append(60 * (2 * a - b))
    return out


def test_plus_form_k12_against_rankin_cohen():
    (g,) = plus_space_basis(12, 60)
    ref = kz_weight_13_2(60)
    assert ref[:10] == [0, 1, 0, 0, -56, 120, 0, 0, -240, 9]
    scale = g[1]
    assert [c / scale for c in g.coeffs] == ref


def test_dimensions():
    assert len(plus_space_basis(12)) == 1
    assert plus_space_basis(14) == []


@pytest.mark.parametrize("k", range(12, 42, 2))
def test_plus_conditions(k):
    basis = plus_space_basis(k)
    assert len(basis) == dim_cusp_forms(k)
    for g in basis:
        assert g[0] == 0 and g.plus_flag
        for n in range(g.nmax + 1):
            if not plus_allowed(k, n):
                assert g[n] == 0


def test_dimension_assertion_is_hard(monkeypatch):
    import lvalues.kohnenplus as kp

    assert issubclass(PlusSpaceError, AssertionError)
    monkeypatch.setattr(kp, "dim_cusp_forms", lambda k: 2)
    with pytest.raises(PlusSpaceError):
        kp.plus_space_basis(12, 200)


@pytest.mark.parametrize("k", [24, 36])
def test_hecke_plus_spectrum(k):
    d = dim_cusp_forms(k)
    basis = plus_space_basis(k, 9 * (4 * d + 8) + 9)
    for p in (3, 5):
        need = p * p * (4 * d + 8)
        basis = plus_space_basis(k, need)
        M = hecke_plus_matrix(basis, p)
        T = hecke_matrix(k, p, p * d + p, victor_miller_basis(k, p * d + p))
        assert charpoly(M) == charpoly(T)


def test_shimura_k12_k16():
    (g,) = shimura_match(12)
    assert g.eigenvalues[3] == 252
    assert g.shimura_partner == 0
    (h,) = shimura_match(16)
    assert h.shimura_partner == 0
    assert h.eigenvalues[3] == -3348
    # the eigen property holds coefficient by coefficient
    img = hecke_plus(g, 3, 20)
    assert all(img[n] == 252 * g[n] for n in range(1, 21))


@pytest.mark.parametrize("k", [24, 28])
def test_partner_independent_of_prime(k):
    g3 = shimura_match(k, p=3)
    g5 = shimura_match(k, p=5)
    assert sorted(g.shimura_partner for g in g3) == list(range(dim_cusp_forms(k)))
    for a in g3:
        b = next(x for x in g5 if x.shimura_partner == a.shimura_partner)
        n0 = next(n for n in range(1, 40) if abs(a[n]) > 1e-20)
        ra = [mpf(a[n]) / mpf(a[n0]) for n in range(1, 40)]
        rb = [mpf(b[n]) / mpf(b[n0]) for n in range(1, 40)]
        assert all(abs(x - y) < mpf(10) ** -20 * (1 + abs(x)) for x, y in zip(ra, rb))


def test_ratio_identity_same_D():
    assert waldspurger_ratio_check(12, 5, 5).residual == 0


@pytest.mark.parametrize("k,D1,D2", [(12, 5, 13), (12, 5, 17), (16, 13, 21), (20, 5, 17), (18, -3, -7)])
def test_ratio(k, D1, D2):
    r = waldspurger_ratio_check(k, D1, D2)
    assert r.residual <= 1e-6 or r.vacuous


def test_ratio_rescale_invariant():
    (g,) = shimura_match(12, 200)
    a = waldspurger_ratio_check(12, 5, 13, g=g)
    b = waldspurger_ratio_check(12, 5, 13, g=g.scaled(Fraction(7, 3)))
    assert abs(a.residual - b.residual) < 1e-20
    assert b.scale_tag.endswith("7/3")


def test_ratio_rejects_bad_discriminants():
    with pytest.raises(ValueError):
        waldspurger_ratio_check(12, -3, 5)
    with pytest.raises(ValueError):
        waldspurger_ratio_check(12, 8, 5)


def _same_coset(g, h):
    # g h^{-1} in Gamma_0(4)
    a, b, c, d = g
    e, f, gg, hh = h
    return (c * hh - d * gg) % 4 == 0


# other representatives of the same six cosets, chosen so that Im(gamma z) stays moderate
ALT_COSETS = ((1, 1, 0, 1), (0, -1, 1, 4), (0, 1, -1, -5), (0, -1, 1, 6), (0, -1, 1, 7), (1, 2, 2, 5))


def test_norm_independent_of_coset_representatives():
    for g0, g1 in zip(GAMMA0_4_COSETS, ALT_COSETS):
        assert _same_coset(g0, g1)
    (g,) = plus_space_basis(12, 1600)
    base, err = petersson_norm_gamma0_4(g, height=8.0)
    val, err2 = petersson_norm_gamma0_4(g, height=8.0, cosets=ALT_COSETS)
    assert abs(val - base) <= 10 * (err + err2) + 1e-9 * base


def test_norm_check_k12():
    r = waldspurger_norm_check(12, 5)
    assert r.corrected_rel_err <= 1e-3
    assert r.norm_err <= 1e-6 * r.norm_sq
    s = waldspurger_norm_check(12, 5, scale=Fraction(7, 3))
    assert abs(s.norm_sq / r.norm_sq - (7 / 3) ** 2) < 1e-12
    assert abs(s.c_normalized_sq - r.c_normalized_sq) < 1e-12 * r.c_normalized_sq
    assert isinstance(r.exceeds_threshold, bool)
