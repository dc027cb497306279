"""Central values L(1/2, f x chi_D), harmonic weights omega(f)*, moment sums.

Harmonic weight methods
-----------------------
``norm``
    omega(f)* = 12 (4 pi)^(k-1) <f, f> / Gamma(k), with the Petersson norm
    integrated over the standard fundamental domain of SL2(Z): the part
    above y = 1 in closed form (Parseval in x, incomplete gamma in y), the
    sliver between the unit arc and y = 1 by tensor Gauss-Legendre.  This is
    the default and does not touch the trace formula.
``series``
    The smoothed sum of lambda(n^2)/n e^{-n/X}, at X and 2X.  It converges
    like a negative power of X, so its error bar is wide; use it as a coarse
    cross-check only.
``trace-inverted``
    Dimension one only: solve the m = n = 1 trace formula for the weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from mpmath import mp, mpf

from .characters import KroneckerChar, parity_matches
from .eigenforms import HeckeEigenform, small_primes
from .exactseries import dim_cusp_forms
from .specialfn import DEFAULT_PREC, ErrBoundedReal, gammaincc_int
from . import store

OMEGA_METHODS = ("norm", "series", "trace-inverted")


class ParityError(ValueError):
    """chi_D(-1) != i^k: the central value vanishes for structural reasons."""


@dataclass(frozen=True)
class CentralValue:
    k: int
    eigen_index: int
    D: int
    value: ErrBoundedReal
    cutoff: int
    cutoff_mult: float

    @property
    def tail_bound(self):
        return self.value.err


@dataclass(frozen=True)
class HarmonicWeight:
    k: int
    eigen_index: int
    omega_star: ErrBoundedReal
    method_tag: str


# ---------------------------------------------------------------------------
# central values


def afe_cutoff(k: int, D: int, cutoff_mult: float = 2.0) -> int:
    return int(math.ceil(cutoff_mult * k * abs(D)))


@lru_cache(maxsize=256)
def _v_table(k: int, absD: int, cutoff: int, prec_bits: int):
    a = k // 2
    out = [None]
    with mp.workprec(prec_bits + 32):
        step = 2 * mp.pi / absD
        for n in range(1, cutoff + 1):
            out.append(gammaincc_int(a, step * n, prec_bits + 16))
    return tuple(out)


def afe_tail_bound(k: int, D: int, cutoff: int, prec_bits: int = DEFAULT_PREC) -> mpf:
    """Bound for 2 sum_{n > cutoff} |lambda(n)| n^{-1/2} V(n/|D|), using |lambda(n)| <= d(n) <= 2 sqrt(n).

    Q(a, y) <= e^{-y} y^{a-1} / (a-1)! / (1 - (a-1)/y) for integer a and y > a-1; past the
    point where consecutive bounds shrink geometrically the remainder is summed in closed form.
    """
    a = k // 2
    q = abs(D)
    with mp.workprec(prec_bits + 32):
        c = 2 * mp.pi / q
        lg = mpmath.loggamma(a)
        total = mpf(0)
        n = cutoff + 1
        for _ in range(100000):
            y = c * n
            if y > 2 * (a - 1) + 1:
                ratio = mpmath.exp(-c) * (1 + mpf(1) / n) ** (a - 1)
                # both the ratio and the correction factor decrease in n, so one check covers the rest
                if ratio < mpf(9) / 10:
                    term = 4 * mpmath.exp(-y + (a - 1) * mpmath.log(y) - lg) / (1 - (a - 1) / y)
                    return total + term / (1 - ratio)
            # direct (trivially valid) term: Q <= 1
            total += 4 * min(mpf(1), gammaincc_int(a, y, prec_bits).value * (1 + mpf(2) ** (-prec_bits + 8)))
            n += 1
    raise ArithmeticError("tail bound did not reach its geometric regime")


def central_value(f: HeckeEigenform, D: int = 1, cutoff_mult: float = 2.0,
                  prec_bits: int | None = None) -> CentralValue:
    """L(1/2, f x chi_D) = 2 sum_n lambda(n) chi_D(n) n^{-1/2} V(n/|D|), with certified tail."""
    k = f.k
    chi = KroneckerChar(D)
    if not parity_matches(D, k):
        raise ParityError(f"chi_{D}(-1) != i^{k}: central value vanishes identically")
    N = afe_cutoff(k, D, cutoff_mult)
    if f.nmax < N:
        raise ValueError(f"eigen-data up to {f.nmax} but the cutoff needs {N}")
    prec = prec_bits or f.prec_bits
    Vt = _v_table(k, abs(D), N, prec)
    ch = chi.table(N)
    with mp.workprec(prec + 32):
        s = mpf(0)
        err = mpf(0)
        for n in range(1, N + 1):
            c = ch[n]
            if not c:
                continue
            v = Vt[n]
            w = c / mpmath.sqrt(n)
            lam = f.lam[n]
            s += lam * v.value * w
            err += (abs(lam) * v.err + f.lam_err[n] * v.value) * abs(w)
        val = 2 * s
        err = 2 * err + abs(val) * N * mpf(2) ** (-(prec + 24))
        err += afe_tail_bound(k, D, N, prec)
    return CentralValue(k, f.eigen_index, D, ErrBoundedReal(val, err), N, cutoff_mult)


# ---------------------------------------------------------------------------
# harmonic weights


def norm_nmax(k: int, cut: float = 45.0) -> int:
    """Number of Fourier coefficients the norm quadrature needs at weight k."""
    half = (k - 1) / 2
    y0 = math.sqrt(3) / 2
    amp = lambda n: half * math.log(n) - 2 * math.pi * n * y0
    peak = max(amp(n) for n in range(1, 4 * k + 10))
    n = max(2, int(half / (2 * math.pi * y0)))
    while amp(n) > peak - cut or n < 8:
        n += 1
    # the closed-form part above y = 1 needs Q(k-1, 4 pi n) to be negligible as well
    m = int((k + 12 * math.sqrt(k) + 60) / (4 * math.pi)) + 2
    return max(n, m)


def _gauss(nodes: int, a: float, b: float):
    t, w = np.polynomial.legendre.leggauss(nodes)
    return (b - a) / 2 * t + (a + b) / 2, (b - a) / 2 * w


def _sliver_integral(lam: np.ndarray, k: int, nx: int, ny: int) -> float:
    """(12 (4pi)^(k-1)/Gamma(k)) * integral of |f|^2 y^(k-2) over {|x| <= 1/2, sqrt(1-x^2) <= y <= 1}."""
    n = np.arange(1, len(lam), dtype=float)
    lamv = lam[1:]
    const = 0.5 * (math.log(12) + (k - 1) * math.log(4 * math.pi) - math.lgamma(k))
    xs, wx = _gauss(nx, 0.0, 0.5)
    total = 0.0
    tn, tw = np.polynomial.legendre.leggauss(ny)
    for x, w in zip(xs, wx):
        y0 = math.sqrt(1 - x * x)
        ys = (1 - y0) / 2 * tn + (1 + y0) / 2
        wy = (1 - y0) / 2 * tw
        logamp = const + 0.5 * (k - 2) * np.log(ys)[:, None] + 0.5 * (k - 1) * np.log(n)[None, :] \
            - 2 * math.pi * np.outer(ys, n)
        amp = np.exp(logamp) * lamv[None, :]
        phase = np.exp(2j * math.pi * n * x)
        vals = amp @ phase
        total += w * float(np.dot(wy, np.abs(vals) ** 2))
    return 2 * total


@lru_cache(maxsize=64)
def _q_table(k: int, nn: int):
    with mp.workprec(96):
        return (None,) + tuple(gammaincc_int(k - 1, 4 * mp.pi * n, 80).value for n in range(1, nn + 1))


def _omega_norm(f: HeckeEigenform, depth: int = 1) -> ErrBoundedReal:
    k = f.k
    nn = norm_nmax(k)
    if f.nmax < nn:
        raise ValueError(f"norm quadrature at weight {k} needs lambda up to {nn}, have {f.nmax}")
    qt = _q_table(k, nn)
    with mp.workprec(96):
        upper = mpf(0)
        for n in range(1, nn + 1):
            upper += f.lam[n] ** 2 * qt[n]
        upper *= mpf(12) / (k - 1)
    lam = np.array([0.0] + [float(f.lam[n]) for n in range(1, nn + 1)])
    nx = (max(48, 2 * int(k / (2 * math.pi)) + 48)) * depth
    ny = (16 + k // 10) * depth
    s1 = _sliver_integral(lam, k, nx, ny)
    s2 = _sliver_integral(lam, k, 2 * nx, 2 * ny)
    total = float(upper) + s2
    err = abs(s2 - s1) + 1e-13 * total + float(upper) * 1e-25
    return ErrBoundedReal(mpf(total), mpf(err))


def _lambda_prime_powers(f: HeckeEigenform, limit: int):
    """lambda(p^j) for p <= limit by the Hecke recursion from lambda(p) (level one)."""
    table = {}
    for p in small_primes(limit):
        vals = [mpf(1), f(p)]
        pj = p
        while pj * p <= limit * limit:
            vals.append(f(p) * vals[-1] - vals[-2])
            pj *= p
        table[p] = vals
    return table


def _lambda_square(n: int, table) -> mpf:
    out = mpf(1)
    m = n
    for p, vals in table.items():
        if p * p > m:
            break
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e:
            out *= vals[2 * e]
    if m > 1:
        out *= table[m][2]
    return out


def _square_lookup(f: HeckeEigenform, M: int, multiplicative: bool):
    """n -> lambda(n^2) for n <= M: stored values where n^2 <= nmax, Hecke recursion beyond."""
    table = _lambda_prime_powers(f, M) if multiplicative else None

    def get(n):
        if n * n <= f.nmax:
            return f.lam[n * n]
        return _lambda_square(n, table)

    return get


def smoothed_square_sum(f: HeckeEigenform, X, multiplicative: bool = True) -> mpf:
    """sum_n lambda(n^2) / n * exp(-n / X) over the range the eigen-data supports."""
    M = f.nmax if multiplicative else math.isqrt(f.nmax)
    get = _square_lookup(f, M, multiplicative)
    s = mpf(0)
    for n in range(1, M + 1):
        s += get(n) / n * mpmath.exp(-mpf(n) / X)
    return s


def _omega_series(f: HeckeEigenform, X=None, multiplicative: bool = True, tol: float = 0.25) -> ErrBoundedReal:
    """Smoothed sum at 2X, with twice the X-to-2X change as the error estimate.

    Without ``multiplicative`` only stored lambda(n^2) are used, so n runs to sqrt(nmax).
    """
    M = f.nmax if multiplicative else math.isqrt(f.nmax)
    if X is None:
        X = mpf(M) / 100
    X = mpf(X)
    if M < 40 * X:
        raise ValueError(f"series method with X={X} needs the sum to reach {int(40 * X)}, it reaches {M}")
    with mp.workprec(f.prec_bits):
        s1 = smoothed_square_sum(f, X, multiplicative)
        s2 = smoothed_square_sum(f, 2 * X, multiplicative)
        diff = abs(s2 - s1)
        if diff > tol * abs(s2):
            raise ArithmeticError(f"smoothed sums at X and 2X disagree by {mpmath.nstr(diff, 4)}; X too small")
        # |lambda(n^2)| <= d(n^2) <= 4n bounds the discarded range
        r = mpmath.exp(-1 / (2 * X))
        tail = 4 * r ** (M + 1) / (1 - r)
        err = 2 * diff + tail + abs(s2) * M * mpf(2) ** (-f.prec_bits + 8)
    return ErrBoundedReal(s2, err)


def _omega_trace_inverted(f: HeckeEigenform, cmax: int = 100) -> ErrBoundedReal:
    from .petersson import trace_rhs

    k = f.k
    if dim_cusp_forms(k) != 1:
        raise ValueError("trace inversion of the m = n = 1 formula needs dim S_k(1) = 1")
    with mp.workprec(f.prec_bits + 32):
        rhs, tail = trace_rhs(k, 1, 1, cmax=cmax, prec_bits=f.prec_bits)
        total = rhs + ErrBoundedReal(mpf(0), tail)
        w = ErrBoundedReal.exact(mpf(12) / (k - 1)) / total
    return w


def omega_star(f: HeckeEigenform, method: str = "norm", **kw) -> HarmonicWeight:
    if method == "norm":
        w = _omega_norm(f, **kw)
    elif method == "series":
        w = _omega_series(f, **kw)
    elif method == "trace-inverted":
        w = _omega_trace_inverted(f, **kw)
    else:
        raise ValueError(f"unknown method {method!r}; choose from {OMEGA_METHODS}")
    if w.value <= 0:
        raise ArithmeticError("harmonic weight came out nonpositive")
    return HarmonicWeight(f.k, f.eigen_index, w, method)


# ---------------------------------------------------------------------------
# data-level helpers


def forms_for(k: int, need: int = 0, prec_bits: int = DEFAULT_PREC) -> list[HeckeEigenform]:
    """H_k with enough coefficients for weights and for the AFE at |D| <= 1 plus ``need``."""
    if dim_cusp_forms(k) == 0:
        return []
    return store.get_eigenforms(k, max(need, norm_nmax(k), 2 * k, 3 * dim_cusp_forms(k)), prec_bits)


_omega_cache: dict = {}


def weights_for(k: int, prec_bits: int = DEFAULT_PREC) -> list[HarmonicWeight]:
    key = (k, prec_bits)
    if key not in _omega_cache:
        _omega_cache[key] = [omega_star(f, "norm") for f in forms_for(k, prec_bits=prec_bits)]
    return _omega_cache[key]


def central_values_for(k: int, D: int = 1, cutoff_mult: float = 2.0,
                       prec_bits: int = DEFAULT_PREC) -> list[CentralValue]:
    N = afe_cutoff(k, D, cutoff_mult)
    return [central_value(f, D, cutoff_mult) for f in forms_for(k, N, prec_bits)]


def moment_sum(k: int, r: int, weighted: bool = False, D: int = 1, cutoff_mult: float = 2.0,
               prec_bits: int = DEFAULT_PREC, subset=None) -> ErrBoundedReal:
    """sum over f in H_k (or the eigen_index subset) of L(1/2, f x chi_D)^r, optionally / omega(f)*."""
    if r not in (1, 2, 3):
        raise ValueError("moment order must be 1, 2 or 3")
    if dim_cusp_forms(k) == 0:
        return ErrBoundedReal.exact(0)
    if not parity_matches(D, k):
        raise ParityError(f"chi_{D}(-1) != i^{k}")
    vals = central_values_for(k, D, cutoff_mult, prec_bits)
    weights = weights_for(k, prec_bits) if weighted else None
    with mp.workprec(prec_bits + 32):
        total = ErrBoundedReal.exact(0)
        for i, cv in enumerate(vals):
            if subset is not None and cv.eigen_index not in subset:
                continue
            term = cv.value ** r
            if weighted:
                term = term / weights[i].omega_star
            total = total + term
    return total
