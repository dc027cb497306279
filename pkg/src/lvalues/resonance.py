"""Resonator coefficients, resonated sums, Euler products and the exact identities behind them.

The default prime window [L^2, exp(log^2 L)] with L = sqrt(log N log log N) is
empty until N is in the hundreds of millions, so every check here also accepts
an explicit window or explicit prime values.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import mpmath
from mpmath import mp, mpf

from .characters import KroneckerChar, parity_matches
from .eigenforms import HeckeEigenform, small_primes
from .exactseries import dim_cusp_forms
from .specialfn import DEFAULT_PREC, ErrBoundedReal


@dataclass(frozen=True)
class ResonatorSpec:
    N: int
    D: int = 1
    L: float | None = None
    p_lo: float | None = None
    p_hi: float | None = None
    prime_values: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be positive")
        KroneckerChar(self.D)
        if self.L is None:
            if self.N < 3 or math.log(math.log(self.N)) <= 0:
                raise ValueError(f"default L needs log log N > 0; N = {self.N} is too small")
        elif self.L <= 0:
            raise ValueError("L must be positive")

    @property
    def override(self) -> bool:
        return self.L is not None or self.p_lo is not None or self.p_hi is not None or self.prime_values is not None

    @property
    def L_value(self) -> mpf:
        if self.L is not None:
            return mpf(self.L)
        lnN = mpmath.log(self.N)
        return mpmath.sqrt(lnN * mpmath.log(lnN))

    @property
    def window(self) -> tuple[mpf, mpf]:
        L = self.L_value
        lo = mpf(self.p_lo) if self.p_lo is not None else L ** 2
        hi = mpf(self.p_hi) if self.p_hi is not None else mpmath.exp(mpmath.log(L) ** 2)
        return lo, hi

    def primes(self) -> list[int]:
        if self.prime_values is not None:
            return sorted(self.prime_values)
        lo, hi = self.window
        if hi < 2:
            return []
        return [p for p in small_primes(int(mpmath.floor(hi))) if p >= lo]

    def r_prime(self, p: int) -> mpf:
        """r_D(p); chi_D(p) is folded in, so p | D gives 0."""
        c = KroneckerChar(self.D)(p)
        if self.prime_values is not None:
            return mpf(self.prime_values.get(p, 0)) * c
        lo, hi = self.window
        if not lo <= p <= hi:
            return mpf(0)
        return c * self.L_value / (mpmath.sqrt(p) * mpmath.log(p))


def resonator_coeffs(spec: ResonatorSpec, prec_bits: int = DEFAULT_PREC) -> dict[int, mpf]:
    """Nonzero r_D(m) for m <= N: squarefree products of window primes."""
    with mp.workprec(prec_bits + 16):
        rp = [(p, spec.r_prime(p)) for p in spec.primes()]
        rp = [(p, v) for p, v in rp if v != 0 and p <= spec.N]
        out = {1: mpf(1)}

        def walk(i, m, val):
            for j in range(i, len(rp)):
                p, v = rp[j]
                if m * p > spec.N:
                    break
                out[m * p] = val * v
                walk(j + 1, m * p, val * v)

        walk(0, 1, mpf(1))
    return dict(sorted(out.items()))


def resonate(f: HeckeEigenform, spec: ResonatorSpec, coeffs=None, prec_bits: int = DEFAULT_PREC) -> ErrBoundedReal:
    """R(f x chi_D) = sum_{m <= N} r_D(m) lambda_f(m)."""
    r = coeffs if coeffs is not None else resonator_coeffs(spec, prec_bits)
    top = max(r)
    if top > f.nmax:
        raise ValueError(f"resonator support reaches {top}; eigen-data only to {f.nmax}")
    with mp.workprec(prec_bits + 16):
        s = mpf(0)
        e = mpf(0)
        for m, v in r.items():
            s += v * f.lam[m]
            e += abs(v) * (f.lam_err[m] + abs(f.lam[m]) * mpf(2) ** (-prec_bits))
    return ErrBoundedReal(s, e)


def euler_products(spec: ResonatorSpec, prec_bits: int = DEFAULT_PREC) -> tuple[mpf, mpf, mpf]:
    """(prod (1 + r^2), 2 prod (1 + r^2 (1 + 1/p) + 2 r chi(p)/sqrt p), their ratio)."""
    chi = KroneckerChar(spec.D)
    with mp.workprec(prec_bits):
        small = mpf(1)
        big = mpf(2)
        for p in spec.primes():
            r = spec.r_prime(p)
            small *= 1 + r * r
            big *= 1 + r * r * (1 + mpf(1) / p) + 2 * r * chi(p) / mpmath.sqrt(p)
        return small, big, big / small


@dataclass(frozen=True)
class TrendRow:
    N: int
    prime_sum: mpf
    target: mpf
    deviation: mpf | None
    window: tuple
    primes: tuple
    empty: bool
    log_ratio: mpf


def ratio_exponent_trend(N_list, D: int = 1, prec_bits: int = 64) -> list[TrendRow]:
    """Prime sum of 2L/(p log p) - L^2/(p^2 log^2 p) against sqrt(4 log N / log log N)."""
    rows = []
    for N in N_list:
        spec = ResonatorSpec(int(N), D)
        with mp.workprec(prec_bits):
            L = spec.L_value
            ps = spec.primes()
            s = mpf(0)
            for p in ps:
                lp = mpmath.log(p)
                s += 2 * L / (p * lp) - L ** 2 / (p ** 2 * lp ** 2)
            lnN = mpmath.log(N)
            target = mpmath.sqrt(4 * lnN / mpmath.log(lnN))
            dev = abs(s - target) / target if ps else None
            _, _, ratio = euler_products(spec, prec_bits)
            rows.append(TrendRow(int(N), s, target, dev, spec.window, tuple(ps), not ps, mpmath.log(ratio / 2)))
    return rows


def trend_is_nonincreasing(rows: list[TrendRow]) -> bool:
    devs = [r.deviation for r in rows if not r.empty]
    return all(b <= a for a, b in zip(devs, devs[1:]))


# ---------------------------------------------------------------------------
# the divisor-sum identity


def sigma(n: int) -> int:
    return sum(d for d in range(1, n + 1) if n % d == 0)


def sigma_identity_check(N: int, prime_values: dict, D: int = 1, prec_bits: int = DEFAULT_PREC,
                         rel_tol: float = 1e-10):
    """Both sides of

        sum_{m1, m2 <= N} r(m1) r(m2) chi_D(m1 m2) sigma((m1, m2)) / sqrt(m1 m2)
          = sum_{d <= N} r(d)^2 (sum_{t <= N/d, (t, d) = 1} r(t) chi_D(t) / sqrt t)^2

    for the multiplicative, squarefree-supported r with the given prime values.
    Returns (passed, residual / scale, lhs, rhs).
    """
    chi = KroneckerChar(D)
    for p, v in prime_values.items():
        if v and D % p == 0:
            raise ValueError(f"r must vanish on p | D; r({p}) = {v}")
    # chi is applied explicitly below, so the coefficient map must not carry it
    spec = ResonatorSpec(N, 1, L=1, prime_values={p: v for p, v in prime_values.items() if D % p})
    r = resonator_coeffs(spec, prec_bits)
    supp = list(r)
    with mp.workprec(prec_bits + 32):
        w = {m: r[m] * chi(m) / mpmath.sqrt(m) for m in supp}
        lhs = mpf(0)
        scale = mpf(0)
        for m1 in supp:
            for m2 in supp:
                term = w[m1] * w[m2] * sigma(math.gcd(m1, m2))
                lhs += term
                scale += abs(term)
        rhs = mpf(0)
        for d in supp:
            inner = mpf(0)
            for t in supp:
                if t * d > N:
                    break
                if math.gcd(t, d) == 1:
                    inner += w[t]
            rhs += r[d] ** 2 * inner ** 2
        resid = abs(lhs - rhs) / max(scale, mpf(1))
    return resid <= rel_tol, resid, lhs, rhs


# ---------------------------------------------------------------------------
# diagonal classification


def squarefree_upto(N: int) -> list[int]:
    out = []
    for m in range(1, N + 1):
        if all(m % (p * p) for p in range(2, math.isqrt(m) + 1)):
            out.append(m)
    return out


def _divisors(n: int) -> list[int]:
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _is_square(n: int) -> bool:
    return math.isqrt(n) ** 2 == n


def _split_square(g: int) -> tuple[int, int]:
    """g = s t^2 with s squarefree and (s, t) = 1, for g whose prime exponents are at most 2."""
    s = t = 1
    m = g
    p = 2
    while p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e == 1:
            s *= p
        elif e == 2:
            t *= p
        elif e > 2:
            raise ValueError(f"{g} has a prime power beyond the square")
        p += 1
    if m > 1:
        s *= m
    return s, t


def parametrize(P1: int, G1: int, P2: int, G2: int):
    """The (s, t, u1, v1) description of a diagonal pair, or None when it does not exist.

    P = m1 m2 and G = gcd(m1, m2) for each of the two pairs.
    """
    s, t = _split_square(math.gcd(P1, P2))
    u, v = P1 // (s * t * t), P2 // (s * t * t)
    if math.gcd(u, v) != 1 or math.gcd(u, t) != 1 or math.gcd(v, t) != 1 or math.gcd(s, t) != 1:
        return None
    if not (_is_square(u) and _is_square(v)):
        return None
    u1, v1 = math.isqrt(u), math.isqrt(v)
    d1, d2 = u1 * t, v1 * t
    if G1 % d1 or G2 % d2:
        return None
    return s, t, u1, v1


def _tau(n: int) -> int:
    return len(_divisors(n))


@dataclass
class DiagonalReport:
    N: int
    passed: bool
    quadruples: int
    diagonal: int
    counterexamples: list


def diagonal_classification_check(N: int, budget: int = 100, max_examples: int = 20) -> DiagonalReport:
    """Exhaustive check over squarefree m1..m4 <= N that

        exists d1 | (m1, m2), d2 | (m3, m4) with m1 m2 / d1^2 = m3 m4 / d2^2
        <=> the (s, t, u1, v1) parametrization exists,

    and that in that case the number of witnesses (d1, d2) is sigma_0(t).
    Pairs (m1, m2) only enter through (m1 m2, gcd(m1, m2)), so the sweep runs over
    those classes and weights each verdict by the class sizes.
    """
    if N > budget:
        raise ValueError(f"N = {N} exceeds the brute-force budget {budget}")
    sf = squarefree_upto(N)
    classes = defaultdict(int)
    for a in sf:
        for b in sf:
            classes[(a * b, math.gcd(a, b))] += 1
    keys = sorted(classes)
    reduced = {key: {key[0] // (d * d): d for d in _divisors(key[1])} for key in keys}
    bad = []
    total = diag = 0
    for i, k1 in enumerate(keys):
        S1 = reduced[k1]
        for k2 in keys[i:]:
            S2 = reduced[k2]
            mult = classes[k1] * classes[k2] * (1 if k1 == k2 else 2)
            total += mult
            common = S1.keys() & S2.keys()
            par = parametrize(k1[0], k1[1], k2[0], k2[1])
            ok = bool(common) == (par is not None)
            if ok and par is not None:
                ok = len(common) == _tau(par[1])
                s, t, u1, v1 = par
                ok = ok and (k1[0] // (u1 * t) ** 2 == s == k2[0] // (v1 * t) ** 2)
                diag += mult
            if not ok and len(bad) < max_examples:
                bad.append({"pair1": k1, "pair2": k2, "witnesses": sorted(common), "param": par})
    return DiagonalReport(N, not bad, total, diag, bad)


# ---------------------------------------------------------------------------
# Rankin tail, fourth moment, extreme counts


@dataclass(frozen=True)
class RankinReport:
    partial: mpf
    product: mpf
    gap: mpf
    tail_bound: mpf
    alpha: mpf
    holds: bool


def rankin_tail_check(spec: ResonatorSpec, alpha=None, prec_bits: int = DEFAULT_PREC) -> RankinReport:
    """sum_{n <= N} r(n)^2 <= prod (1 + r(p)^2), with gap <= N^{-alpha} prod (1 + r(p)^2 p^alpha)."""
    with mp.workprec(prec_bits + 16):
        if alpha is None:
            lL = mpmath.log(spec.L_value)
            if lL <= 0:
                raise ValueError("alpha = (log L)^-3 needs L > 1")
            alpha = lL ** -3
        alpha = mpf(alpha)
        r = resonator_coeffs(spec, prec_bits)
        partial = mpmath.fsum(v * v for v in r.values())
        prod = mpf(1)
        prod_a = mpf(1)
        for p in spec.primes():
            rp = spec.r_prime(p)
            prod *= 1 + rp * rp
            prod_a *= 1 + rp * rp * mpf(p) ** alpha
        gap = prod - partial
        bound = mpf(spec.N) ** (-alpha) * prod_a
        slack = prod * mpf(2) ** (-prec_bits + 8)
        holds = partial <= prod + slack and gap <= bound + slack
    return RankinReport(partial, prod, gap, bound, alpha, bool(holds))


def fourth_moment_check(k: int, spec: ResonatorSpec, prec_bits: int = DEFAULT_PREC):
    """((12/(k-1)) sum_f R^4 / omega*, prod (1 + r^2)(1 + 2 r^2), ratio).  The ratio is a regression value."""
    from .lcentral import forms_for, weights_for

    r = resonator_coeffs(spec, prec_bits)
    with mp.workprec(prec_bits + 16):
        bound = mpf(1)
        for p in spec.primes():
            rp = spec.r_prime(p)
            bound *= (1 + rp * rp) * (1 + 2 * rp * rp)
        if dim_cusp_forms(k) == 0:
            lhs = ErrBoundedReal.exact(0)
        else:
            forms = forms_for(k, max(r), prec_bits)
            weights = weights_for(k, prec_bits)
            s = ErrBoundedReal.exact(0)
            for f, w in zip(forms, weights):
                R = resonate(f, spec, r, prec_bits)
                s = s + R ** 4 / w.omega_star
            lhs = ErrBoundedReal.exact(mpf(12) / (k - 1)) * s
        return lhs, bound, lhs.value / bound


def extreme_threshold(k: int, D: int = 1, constant: float = 1.41) -> mpf:
    x = mpf(k) if D == 1 else mpf(k * abs(D))
    lx = mpmath.log(x)
    # decimal constants mean what they say, not their nearest double
    c = mpf(repr(constant)) if isinstance(constant, float) else mpf(constant)
    return mpmath.exp(c * mpmath.sqrt(lx / mpmath.log(lx)))


@dataclass(frozen=True)
class ExtremeCountReport:
    k: int
    D: int
    threshold: mpf
    members: list
    count: int
    dim: int
    max_value: mpf | None
    constant: float


def count_extreme(k: int, D: int = 1, constant: float = 1.41, cutoff_mult: float = 2.0,
                  prec_bits: int = DEFAULT_PREC, values=None) -> ExtremeCountReport:
    """Forms f in H_k with L(1/2, f x chi_D) at or above exp(c sqrt(log x / log log x))."""
    from .lcentral import ParityError, central_values_for

    thr = extreme_threshold(k, D, constant)
    if dim_cusp_forms(k) == 0:
        return ExtremeCountReport(k, D, thr, [], 0, 0, None, constant)
    if not parity_matches(D, k):
        raise ParityError(f"chi_{D}(-1) != i^{k}")
    if values is None:
        values = central_values_for(k, D, cutoff_mult, prec_bits)
    members = [(cv.eigen_index, cv.value) for cv in values if cv.value.value >= thr - cv.value.err]
    top = max((cv.value.value for cv in values), default=None)
    return ExtremeCountReport(k, D, thr, members, len(members), dim_cusp_forms(k), top, constant)
