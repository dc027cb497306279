"""Kloosterman sums and both sides of the Petersson trace formula at level one."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
from mpmath import mp, mpf

from .exactseries import dim_cusp_forms
from .specialfn import DEFAULT_PREC, ErrBoundedReal, bessel_j


def kloosterman(m: int, n: int, c: int, prec_bits: int = DEFAULT_PREC) -> ErrBoundedReal:
    """S(m, n; c) = sum over x in (Z/c)^* of cos(2 pi (m x + n xbar) / c)."""
    if m < 1 or n < 1 or c < 1:
        raise ValueError("m, n, c must be positive")
    counts = [0] * c
    for x in range(c):
        if math.gcd(x, c) == 1:
            xb = pow(x, -1, c) if c > 1 else 0
            counts[(m * x + n * xb) % c] += 1
    with mp.workprec(prec_bits + 16):
        s = mpf(0)
        used = 0
        for r, cnt in enumerate(counts):
            if cnt:
                s += cnt * mpmath.cospi(mpf(2 * r) / c)
                used += cnt
        err = used * mpf(2) ** (-prec_bits)
    # S is an algebraic integer fixed by conjugation, hence a real number; exact when it is rational
    return ErrBoundedReal(s, err)


def bessel_tail_bound(k: int, m: int, n: int, cmax: int, q: int = 1) -> mpf:
    """Bound for 2 pi |sum_{c > cmax} S(m,n;cq)/(cq) J_{k-1}(4 pi sqrt(mn)/(cq))|.

    Uses |S| <= cq and |J_nu(x)| <= (x/2)^nu / nu!, then sum_{c > C} c^{-(k-1)} <= C^{-(k-2)}/(k-2).
    """
    nu = k - 1
    with mp.workprec(64):
        a = 2 * mp.pi * mpmath.sqrt(m * n) / q
        lead = 2 * mp.pi * mpmath.exp(nu * mpmath.log(a) - mpmath.loggamma(nu + 1))
        if cmax == 0:
            zsum = 1 + mpf(1) / (k - 2)
        else:
            zsum = mpf(cmax) ** (-(k - 2)) / (k - 2)
        return lead * zsum * (1 + mpf(2) ** -40)


def trace_rhs(k: int, m: int, n: int, q: int = 1, cmax: int = 100,
              prec_bits: int = DEFAULT_PREC) -> tuple[ErrBoundedReal, mpf]:
    """(delta_{m,n} + 2 pi i^k sum_{c <= cmax} S(m,n;cq)/(cq) J_{k-1}(4 pi sqrt(mn)/(cq)), tail bound)."""
    if k % 2:
        raise ValueError("weight must be even")
    if cmax < 0:
        raise ValueError("cmax must be nonnegative")
    sign = 1 if k % 4 == 0 else -1
    with mp.workprec(prec_bits + 32):
        x0 = 4 * mp.pi * mpmath.sqrt(m * n)
        part = ErrBoundedReal.exact(0)
        for c in range(1, cmax + 1):
            cq = c * q
            S = kloosterman(m, n, cq, prec_bits + 16)
            if S.value == 0 and S.err == 0:
                continue
            J = bessel_j(k - 1, x0 / cq, prec_bits + 16, allow_extended=True)
            part = part + S * J / cq
        total = ErrBoundedReal.exact(1 if m == n else 0) + 2 * mp.pi * sign * part
    return total, bessel_tail_bound(k, m, n, cmax, q)


def trace_lhs(k: int, m: int, n: int, forms=None, weights=None, reverse: bool = False,
              prec_bits: int = DEFAULT_PREC) -> ErrBoundedReal:
    """(12/(k-1)) sum_{f in H_k} lambda_f(m) lambda_f(n) / omega(f)*."""
    if dim_cusp_forms(k) == 0:
        return ErrBoundedReal.exact(0)
    from .lcentral import forms_for, weights_for

    if forms is None:
        forms = forms_for(k, max(m, n), prec_bits)
    if weights is None:
        weights = weights_for(k, prec_bits)
    pairs = list(zip(forms, weights))
    if reverse:
        pairs.reverse()
    with mp.workprec(prec_bits + 32):
        s = ErrBoundedReal.exact(0)
        for f, w in pairs:
            lm = ErrBoundedReal(f(m), f.err(m))
            ln = ErrBoundedReal(f(n), f.err(n))
            s = s + lm * ln / w.omega_star
        return ErrBoundedReal.exact(mpf(12) / (k - 1)) * s


@dataclass(frozen=True)
class TraceReport:
    k: int
    m: int
    n: int
    q: int
    lhs: ErrBoundedReal
    rhs_delta: int
    rhs_bessel_tail: ErrBoundedReal
    cmax: int
    tail_bound: mpf
    discrepancy: mpf
    in_regime: bool = False
    regime_excess: mpf | None = None
    regime_bound: mpf | None = None
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def regime_ok(self) -> bool | None:
        if not self.in_regime:
            return None
        return self.regime_excess <= self.regime_bound


def in_pet_regime(k: int, m: int, n: int, q: int = 1) -> bool:
    return math.sqrt(m * n) <= k * q / (40 * math.pi)


def trace_check(k: int, m: int, n: int, cmax: int = 100, prec_bits: int = DEFAULT_PREC,
                slack: float = 10.0) -> TraceReport:
    lhs = trace_lhs(k, m, n, prec_bits=prec_bits)
    rhs, tail = trace_rhs(k, m, n, cmax=cmax, prec_bits=prec_bits)
    delta = 1 if m == n else 0
    with mp.workprec(prec_bits + 32):
        bessel = rhs - delta
        disc = abs(lhs.value - rhs.value)
        reg = in_pet_regime(k, m, n)
        excess = bound = None
        if reg:
            excess = abs(lhs.value - delta)
            bound = slack * mpmath.exp(-k) + lhs.err
    return TraceReport(k, m, n, 1, lhs, delta, bessel, cmax, tail, disc, reg, excess, bound)
