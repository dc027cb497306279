from fractions import Fraction

import pytest
from mpmath import mpf

from lvalues.eigenforms import (EigenDistinctnessError, HeckeEigenform, charpoly, deligne_excess, eigenforms,
                                hecke_matrix, hecke_residual, small_primes)
from lvalues.exactseries import delta, dim_cusp_forms, eisenstein, victor_miller_basis


def det(M):
    # cofactor expansion; small matrices only
    n = len(M)
    if n == 1:
        return M[0][0]
    return sum((-1) ** j * M[0][j] * det([row[:j] + row[j + 1:] for row in M[1:]]) for j in range(n))


def charpoly_by_det(M, x):
    n = len(M)
    return det([[(x if i == j else 0) - M[i][j] for j in range(n)] for i in range(n)])


def brute_t2_k24(nmax=8):
    # basis Delta*E4^3 and Delta^2 (not echelon), T_2 from a(2n) + 2^23 a(n/2), solved exactly
    d, e4 = delta(2 * nmax), eisenstein(4, 2 * nmax)
    f1, f2 = d * e4 ** 3, d * d
    imgs = []
    for f in (f1, f2):
        imgs.append([f[2 * n] + (2 ** 23 * f[n // 2] if n % 2 == 0 else 0) for n in (1, 2)])
    # coordinates in (f1, f2) from the coefficients at q^1, q^2
    A = [[Fraction(f1[1]), Fraction(f2[1])], [Fraction(f1[2]), Fraction(f2[2])]]
    dA = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    inv = [[A[1][1] / dA, -A[0][1] / dA], [-A[1][0] / dA, A[0][0] / dA]]
    cols = [[inv[i][0] * img[0] + inv[i][1] * img[1] for i in range(2)] for img in imgs]
    return [[cols[j][i] for j in range(2)] for i in range(2)]


def test_hecke_matrix_examples():
    assert hecke_matrix(12, 2, 4) == [[-24]]
    assert hecke_matrix(12, 3, 6) == [[252]]
    with pytest.raises(ValueError):
        hecke_matrix(12, 4, 10)
    with pytest.raises(ValueError):
        hecke_matrix(24, 2, 3)


def test_t2_k24_against_brute_basis():
    T = hecke_matrix(24, 2, 8)
    B = brute_t2_k24()
    for x in range(-3, 4):
        assert charpoly_by_det(T, x) == charpoly_by_det(B, x)
    cp = charpoly(T)
    assert cp == [1, -(T[0][0] + T[1][1]), det(T)] or cp[::-1] == [1, -(T[0][0] + T[1][1]), det(T)]


@pytest.mark.parametrize("k", [24, 36, 48])
def test_charpoly_against_determinant(k):
    T = hecke_matrix(k, 2, 2 * dim_cusp_forms(k) + 2)
    cp = charpoly(T)
    lead_first = cp[0] == 1
    coeffs = cp if lead_first else cp[::-1]
    n = len(coeffs) - 1
    for x in (-2, 0, 1, 5):
        assert sum(c * x ** (n - i) for i, c in enumerate(coeffs)) == charpoly_by_det(T, x)


def test_eigen_examples():
    (f,) = eigenforms(12, 10)
    assert abs(f(2) - mpf(-24) / mpf(2) ** mpf(5.5)) < 1e-30
    assert abs(f(2) + mpf("0.5303300859")) < 1e-10
    (g,) = eigenforms(16, 10)
    assert abs(g(2) - mpf(216) / mpf(2) ** mpf(7.5)) < 1e-30
    assert abs(g(2) - mpf("1.1932426933")) < 1e-10
    assert f(1) == 1 and g(1) == 1
    assert eigenforms(14, 10) == []


def test_tau_values():
    (f,) = eigenforms(12, 30)
    d = delta(30)
    for n in range(1, 31):
        assert abs(f(n) * mpf(n) ** mpf(5.5) - d[n]) < mpf(10) ** -25 * abs(d[n]) + f.err(n) * n ** 6


@pytest.mark.parametrize("k", [24, 36, 60])
def test_trace_sum_rule(k):
    fs = eigenforms(k, 4 * dim_cusp_forms(k))
    T = hecke_matrix(k, 2, 2 * dim_cusp_forms(k))
    tr = sum(T[i][i] for i in range(len(T)))
    s = sum(f(2) for f in fs) * mpf(2) ** (mpf(k - 1) / 2)
    assert abs(s - tr) < abs(tr) * mpf(2) ** -100 + 1


@pytest.mark.parametrize("k", [24, 38, 60])
def test_eigenvector_consistency(k):
    d = dim_cusp_forms(k)
    fs = eigenforms(k, 6 * d + 6)
    basis = victor_miller_basis(k, 6 * d + 6)
    for p in (2, 3, 5):
        T = hecke_matrix(k, p, p * d + p, basis)
        for f in fs:
            v = [f(i) * mpf(i) ** (mpf(k - 1) / 2) for i in range(1, d + 1)]
            mu = f(p) * mpf(p) ** (mpf(k - 1) / 2)
            for i in range(d):
                lhs = sum(mpf(T[i][j].numerator) / T[i][j].denominator * v[j] for j in range(d))
                assert abs(lhs - mu * v[i]) <= abs(mu * v[i]) * mpf(2) ** -90 + mpf(2) ** -60


def test_ordering_by_lambda2():
    fs = eigenforms(48, 20)
    assert [f.eigen_index for f in fs] == list(range(len(fs)))
    assert all(a(2) < b(2) for a, b in zip(fs, fs[1:]))


@pytest.mark.parametrize("k", range(12, 42, 2))
def test_hecke_residual(k):
    for f in eigenforms(k, 100):
        assert hecke_residual(f, 100) <= mpf(2) ** -64


@pytest.mark.parametrize("k", range(12, 62, 2))
def test_deligne(k):
    for f in eigenforms(k, 200):
        assert deligne_excess(f, 200) <= mpf(2) ** -64


def test_residual_detects_defect():
    (f,) = eigenforms(12, 100)
    lam = list(f.lam)
    lam[4] += mpf("0.1")
    g = HeckeEigenform(12, tuple(lam), f.lam_err)
    assert hecke_residual(g, 100) >= 0.09


def test_residual_synthetic_multiplicative():
    # lambda(n) = d(n) / ... no: the constant-one Hecke system at every prime is lambda(p^j) = j + 1
    vals = []
    for n in range(1, 61):
        m, out = n, 1
        for p in small_primes(n):
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out *= e + 1
        vals.append(out)
    f = HeckeEigenform.synthetic(12, vals)
    assert hecke_residual(f) == 0


def test_normalization_enforced():
    with pytest.raises(ValueError):
        HeckeEigenform.synthetic(12, [2, 1])
    (f,) = eigenforms(12, 10)
    with pytest.raises(IndexError):
        f(11)


def test_distinctness_error_type():
    assert issubclass(EigenDistinctnessError, ArithmeticError)
