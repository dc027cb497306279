import math
import random

import mpmath
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mpf

from lvalues.characters import chi
from lvalues.eigenforms import HeckeEigenform
from lvalues.lcentral import forms_for, central_values_for
from lvalues.petersson import trace_lhs
from lvalues.resonance import (ResonatorSpec, count_extreme, diagonal_classification_check, euler_products,
                               extreme_threshold, fourth_moment_check, parametrize, rankin_tail_check,
                               ratio_exponent_trend, resonate, resonator_coeffs, sigma, sigma_identity_check,
                               squarefree_upto, trend_is_nonincreasing)


def window23(N=7, D=1, L=1.0):
    return ResonatorSpec(N, D, L=L, p_lo=2, p_hi=3)


def test_spec_validation():
    with pytest.raises(ValueError):
        ResonatorSpec(2)
    with pytest.raises(ValueError):
        ResonatorSpec(10, L=-1)
    assert not ResonatorSpec(100).override
    assert window23().override


def test_coeff_examples():
    assert resonator_coeffs(ResonatorSpec(100)) == {1: 1}
    assert sorted(resonator_coeffs(window23())) == [1, 2, 3, 6]
    s = ResonatorSpec(30, 5, L=1.0, p_lo=2, p_hi=7)
    assert s.r_prime(5) == 0
    assert 5 not in resonator_coeffs(s)


def test_coeffs_against_definition():
    # brute: every m <= N, multiplicative on squarefree window-smooth m
    s = ResonatorSpec(200, -3, L=2.5, p_lo=2, p_hi=13)
    r = resonator_coeffs(s)
    for m in range(1, 201):
        sf = all(m % (p * p) for p in range(2, 15))
        ps = [p for p in (2, 3, 5, 7, 11, 13) if m % p == 0]
        smooth = math.prod(ps) == m
        if not (sf and smooth):
            assert m not in r
            continue
        val = mpf(1)
        for p in ps:
            val *= chi(-3, p) * mpf(2.5) / (mpmath.sqrt(p) * mpmath.log(p))
        assert abs(r.get(m, mpf(0)) - val) < mpf(10) ** -30


def test_resonate_examples():
    (f,) = forms_for(12, 200)
    assert resonate(f, ResonatorSpec(100)).value == 1
    ones = HeckeEigenform.synthetic(12, [1] * 10)
    a, b = mpf("0.3"), mpf("-0.7")
    s = ResonatorSpec(7, L=1, prime_values={2: a, 3: b})
    assert abs(resonate(ones, s).value - (1 + a + b + a * b)) < mpf(10) ** -40
    w = ResonatorSpec(150, L=3.0, p_lo=2, p_hi=11)
    direct = sum(v * f(m) for m, v in resonator_coeffs(w).items())
    assert abs(resonate(f, w).value - direct) < mpf(10) ** -20


@settings(max_examples=30)
@given(st.lists(st.floats(-2, 2), min_size=4, max_size=4), st.lists(st.floats(-2, 2), min_size=4, max_size=4))
def test_resonate_linear(u, v):
    (f,) = forms_for(12, 200)
    ps = (2, 3, 5, 7)
    su = ResonatorSpec(60, L=1, prime_values=dict(zip(ps, u)))
    sv = ResonatorSpec(60, L=1, prime_values=dict(zip(ps, v)))
    ru, rv = resonator_coeffs(su), resonator_coeffs(sv)
    keys = set(ru) | set(rv)
    summed = {m: ru.get(m, 0) + rv.get(m, 0) for m in keys}
    a = resonate(f, su, summed)
    b, c = resonate(f, su, ru), resonate(f, sv, rv)
    assert abs(a.value - b.value - c.value) <= a.err + b.err + c.err + mpf(10) ** -30 * (1 + abs(a.value))


def test_euler_products():
    assert euler_products(ResonatorSpec(100)) == (1, 2, 2)
    assert euler_products(ResonatorSpec(100, L=1, prime_values={3: 0})) == (1, 2, 2)
    r = mpf("0.4")
    s, b, q = euler_products(ResonatorSpec(100, L=1, prime_values={3: r}))
    assert abs(s - (1 + r * r)) < mpf(10) ** -35
    assert abs(b - 2 * (1 + r * r * (1 + mpf(1) / 3) + 2 * r / mpmath.sqrt(3))) < mpf(10) ** -35


def test_trend_windows():
    rows = ratio_exponent_trend([1e9, 1e12, 1e6])
    L9 = math.sqrt(math.log(1e9) * math.log(math.log(1e9)))
    assert abs(float(rows[0].window[0]) - L9 ** 2) < 1e-9
    assert abs(float(rows[0].window[1]) - math.exp(math.log(L9) ** 2)) < 1e-6
    assert rows[0].primes == (67, 71)
    lo, hi = rows[1].window
    assert abs(lo - 92) < 1 and abs(hi - 165) < 1
    assert rows[1].primes[0] == 97 and rows[1].primes[-1] == 163
    assert rows[2].empty and rows[2].deviation is None
    # direct sieve oracle for the prime sum at 1e9
    L = mpf(L9)
    direct = sum(2 * L / (p * mpmath.log(p)) - L ** 2 / (p * mpmath.log(p)) ** 2 for p in (67, 71))
    assert abs(rows[0].prime_sum - direct) < 1e-12


def test_trend_nonincreasing():
    assert trend_is_nonincreasing(ratio_exponent_trend([1e9, 1e10, 1e11, 1e12]))


def brute_sigma_sides(N, pv, D):
    def r(m):
        if m == 1:
            return 1.0
        out, x = 1.0, m
        for p in range(2, m + 1):
            if x % p == 0:
                x //= p
                if x % p == 0:
                    return 0.0
                out *= pv.get(p, 0.0)
        return out
    lhs = sum(r(a) * r(b) * chi(D, a * b) * sigma(math.gcd(a, b)) / math.sqrt(a * b)
              for a in range(1, N + 1) for b in range(1, N + 1))
    rhs = sum(r(d) ** 2 * sum(r(t) * chi(D, t) / math.sqrt(t) for t in range(1, N // d + 1)
                              if math.gcd(t, d) == 1) ** 2 for d in range(1, N + 1))
    return lhs, rhs


@pytest.mark.parametrize("D", [1, 5])
def test_sigma_identity_examples(D):
    ok, resid, lhs, rhs = sigma_identity_check(30, {}, D)
    assert ok and lhs == 1 and rhs == 1
    rng = random.Random(7)
    pv = {p: rng.uniform(-1, 1) for p in (2, 3, 5)}
    if D == 5:
        pv[5] = 0
    ok, resid, lhs, rhs = sigma_identity_check(30, pv, D)
    assert ok and resid <= 1e-12
    bl, br = brute_sigma_sides(30, pv, D)
    assert abs(float(lhs) - bl) < 1e-9 and abs(float(rhs) - br) < 1e-9


def test_sigma_identity_rejects_bad_rule():
    with pytest.raises(ValueError):
        sigma_identity_check(30, {5: 0.5}, 5)


@settings(max_examples=40)
@given(st.integers(2, 200), st.sampled_from([1, 5, -3]),
       st.dictionaries(st.sampled_from([2, 3, 5, 7, 11, 13]), st.floats(-1, 1), max_size=6))
def test_sigma_identity_property(N, D, pv):
    pv = {p: (0.0 if D % p == 0 else v) for p, v in pv.items()}
    assert sigma_identity_check(N, pv, D)[0]


def brute_diagonal(N):
    # direct quadruple enumeration against the witness definition and the parametrization
    sf = squarefree_upto(N)
    for m1 in sf:
        for m2 in sf:
            for m3 in sf:
                for m4 in sf:
                    g1, g2 = math.gcd(m1, m2), math.gcd(m3, m4)
                    wit = [(d1, d2) for d1 in range(1, g1 + 1) if g1 % d1 == 0
                           for d2 in range(1, g2 + 1) if g2 % d2 == 0
                           if m1 * m2 * d2 * d2 == m3 * m4 * d1 * d1]
                    par = parametrize(m1 * m2, g1, m3 * m4, g2)
                    if bool(wit) != (par is not None):
                        return False
    return True


def test_diagonal_brute_small():
    assert brute_diagonal(12)
    assert diagonal_classification_check(12).passed


def test_diagonal_examples():
    assert parametrize(6, 1, 6, 1) == (6, 1, 1, 1)
    for m in squarefree_upto(30):
        assert parametrize(m * m, m, m * m, m) is not None
    with pytest.raises(ValueError):
        diagonal_classification_check(101)


def test_diagonal_full():
    rep = diagonal_classification_check(100)
    assert rep.passed and not rep.counterexamples
    assert rep.quadruples == len(squarefree_upto(100)) ** 4


def test_rankin():
    for spec in (ResonatorSpec(10 ** 4, L=3.0, p_lo=2, p_hi=50), ResonatorSpec(500, -3, L=2.0, p_lo=3, p_hi=40),
                 ResonatorSpec(10 ** 9), ResonatorSpec(10 ** 6, L=5.0, p_lo=5, p_hi=100)):
        rep = rankin_tail_check(spec)
        assert rep.holds
        assert rep.partial <= rep.product * (1 + mpf(2) ** -100)


def test_fourth_moment():
    lhs, bound, ratio = fourth_moment_check(12, ResonatorSpec(100))
    assert bound == 1
    assert abs(lhs.value - trace_lhs(12, 1, 1).value) < mpf(10) ** -30
    s1 = ResonatorSpec(50, L=1, prime_values={2: 0.2, 3: 0.1})
    s2 = ResonatorSpec(50, L=1, prime_values={2: 0.5, 3: 0.1})
    _, b1, r1 = fourth_moment_check(12, s1)
    _, b2, _ = fourth_moment_check(12, s2)
    assert b2 > b1
    assert 0 < r1 <= 10


def test_extreme():
    assert abs(extreme_threshold(100) - 11.57) < 1e-2
    x = mpf(100)
    assert abs(extreme_threshold(100) - mpmath.exp(mpf("1.41") * mpmath.sqrt(mpmath.log(x) / mpmath.log(mpmath.log(x))))) < 1e-10
    assert extreme_threshold(20, 5) == extreme_threshold(100)
    rep = count_extreme(14)
    assert rep.count == 0 and rep.dim == 0


@pytest.mark.parametrize("k", [12, 24, 48])
def test_count_monotone_in_constant(k):
    vals = central_values_for(k)
    counts = [count_extreme(k, constant=c, values=vals).count for c in (0.0, 0.3, 0.6, 1.0, 1.41)]
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    assert counts[0] <= len(vals)
    rep = count_extreme(k, values=vals)
    assert rep.count == len(rep.members) <= rep.dim
    assert all(v.value >= rep.threshold - v.err for _, v in rep.members)
