"""Hecke eigenforms of level one from the exact Victor Miller basis.

The Hecke matrix is exact (integral, since the echelon basis is integral and
unipotent).  Eigenvalues come from the exact characteristic polynomial:
approximate roots are Newton-refined and then certified by a sign change of
the exact polynomial at dyadic endpoints.  Eigenvectors are solved twice, at
two working precisions, and the difference is carried into the per-entry
error of lambda_f(n).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm, log2
from typing import Sequence

import mpmath
from mpmath import mp, mpf

from .exactseries import QSeries, dim_cusp_forms, victor_miller_basis
from .specialfn import DEFAULT_PREC


class EigenDistinctnessError(ArithmeticError):
    """Two eigenvalues of the diagonalized operator are numerically indistinguishable."""


def small_primes(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [i for i in range(n + 1) if sieve[i]]


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, int(p**0.5) + 1))


@dataclass(frozen=True)
class HeckeEigenform:
    """lambda_f(n) = a_f(n) / n^((k-1)/2) for 1 <= n <= nmax, with absolute errors."""

    k: int
    lam: tuple  # lam[n] for n = 0..nmax; lam[0] is 0 by convention
    lam_err: tuple
    eigen_index: int = 0
    prec_bits: int = DEFAULT_PREC
    fricke_sign: int = 1
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.lam) != len(self.lam_err):
            raise ValueError("lambda values and error bounds differ in length")
        if len(self.lam) > 1 and self.lam[1] != 1:
            raise ValueError("eigenform must be normalized with lambda(1) = 1")

    @property
    def nmax(self) -> int:
        return len(self.lam) - 1

    def __call__(self, n: int):
        if not 1 <= n <= self.nmax:
            raise IndexError(f"lambda({n}) requested; eigen-data known up to n={self.nmax}")
        return self.lam[n]

    def err(self, n: int):
        if not 1 <= n <= self.nmax:
            raise IndexError(f"lambda({n}) requested; eigen-data known up to n={self.nmax}")
        return self.lam_err[n]

    @classmethod
    def synthetic(cls, k: int, values: Sequence, errors: Sequence | None = None, **kw) -> "HeckeEigenform":
        lam = (mpf(0),) + tuple(mpf(v) for v in values)
        errs = (mpf(0),) + tuple(mpf(e) for e in (errors or [0] * len(values)))
        return cls(k, lam, errs, **kw)


# ---------------------------------------------------------------------------
# exact linear algebra


def hecke_matrix(k: int, p: int, nmax: int, basis: Sequence[QSeries] | None = None) -> list[list[Fraction]]:
    """Matrix of a(n) -> a(pn) + p^(k-1) a(n/p) on the echelon basis (column j = image of f_j)."""
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    d = dim_cusp_forms(k)
    if nmax < p * d:
        raise ValueError(f"nmax={nmax} < p*dim = {p * d}: insufficient truncation")
    if basis is None:
        basis = victor_miller_basis(k, nmax)
    pk = p ** (k - 1)
    M = [[Fraction(0)] * d for _ in range(d)]
    for j, f in enumerate(basis):
        for i in range(1, d + 1):
            v = f[p * i]
            if i % p == 0:
                v += pk * f[i // p]
            M[i - 1][j] = Fraction(v)
    return M


def charpoly(M: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    """Characteristic polynomial det(xI - M), coefficients from x^d down to x^0 (Berkowitz)."""
    n = len(M)
    if n == 0:
        return [Fraction(1)]
    vect = [Fraction(1), -M[0][0]]
    for r in range(1, n):
        # Toeplitz column built from the r-th leading principal block
        R = [M[r][j] for j in range(r)]
        C = [M[i][r] for i in range(r)]
        A = [row[:r] for row in M[:r]]
        a_rr = M[r][r]
        col = [Fraction(1), -a_rr]
        X = C[:]
        for _ in range(r):
            col.append(-sum(R[i] * X[i] for i in range(r)))
            X = [sum(A[i][j] * X[j] for j in range(r)) for i in range(r)]
        # multiply the (r+2)x(r+1) lower-triangular Toeplitz matrix by vect
        new = []
        for i in range(r + 2):
            s = Fraction(0)
            for j in range(min(i, r) + 1):
                if i - j < len(col):
                    s += col[i - j] * vect[j]
            new.append(s)
        vect = new
    return vect


def _poly_sign_at(coeffs: Sequence[int], m: int, e: int) -> int:
    """Sign of P(m * 2^e) for an integer polynomial (coeffs high to low), exactly."""
    if e >= 0:
        x = m << e
        acc = 0
        for c in coeffs:
            acc = acc * x + c
        return (acc > 0) - (acc < 0)
    # P(m/2^t) * 2^(t d) = sum_i c_i m^(d-i) 2^(t i), index i counted from the top
    t = -e
    acc = 0
    for i, c in enumerate(coeffs):
        acc = acc * m + (c << (t * i))
    return (acc > 0) - (acc < 0)


def _mpf_dyadic(x: mpf) -> tuple[int, int]:
    sign, man, exp, _ = x._mpf_
    m = int(man)
    return (-m if sign else m), int(exp)


def _isolate_roots(cp: Sequence[Fraction], scale_exp: int, bits: int) -> list[tuple[mpf, mpf]]:
    """Certified real roots of cp (assumed squarefree, all real) as (center, radius) pairs.

    Works on y = x / 2^scale_exp so that roots are O(1).
    """
    d = len(cp) - 1
    den = 1
    for c in cp:
        den = lcm(den, c.denominator)
    icoef = [int(c * den) for c in cp]
    # scaled polynomial in y: sum icoef[i] 2^(scale_exp*(d-i)) y^(d-i), divided by 2^(scale_exp*d)
    scoef = [c << (scale_exp * (d - i)) for i, c in enumerate(icoef)]
    top = scoef[0]
    cbits = max(abs(int(c)).bit_length() for c in scoef) + 8
    with mp.workprec(cbits + 64):
        norm = [mpf(c) / mpf(top) for c in scoef]
        approx = mpmath.polyroots(norm, maxsteps=400, extraprec=4 * cbits // 3 + 200)
    roots = sorted(mpmath.re(r) for r in approx)
    W = bits + cbits + 32
    refined = []
    with mp.workprec(W):
        poly = [mpf(c) for c in scoef]
        dpoly = [c * (d - i) for i, c in enumerate(poly[:-1])]
        for r in roots:
            y = mpf(r)
            for _ in range(200):
                step = mpmath.polyval(poly, y) / mpmath.polyval(dpoly, y)
                y -= step
                if abs(step) <= abs(y) * mpf(2) ** (-(bits + 16)) + mpf(2) ** (-(bits + 16)):
                    break
            refined.append(y)
    # certify with exact sign changes
    out = []
    rad_exp = -(bits + 8)
    for attempt in range(6):
        ok = True
        out = []
        with mp.workprec(W):
            for y in refined:
                rad = mpf(2) ** (rad_exp + 8 * attempt) * max(1, abs(y))
                lo = y - rad
                hi = y + rad
                m1, e1 = _mpf_dyadic(lo)
                m2, e2 = _mpf_dyadic(hi)
                s1 = _poly_sign_at(scoef, m1, e1)
                s2 = _poly_sign_at(scoef, m2, e2)
                if s1 * s2 >= 0:
                    ok = False
                    break
                out.append((y, rad))
        if ok:
            break
    if not ok:
        raise ArithmeticError("failed to certify the eigenvalues of the Hecke matrix")
    for (a, ra), (b, rb) in zip(out, out[1:]):
        if a + ra >= b - rb:
            raise EigenDistinctnessError("certified eigenvalue intervals overlap")
    if len(out) != d:
        raise ArithmeticError("root count mismatch")
    return out


# ---------------------------------------------------------------------------
# eigenforms


def _solve_eigenvector(M: Sequence[Sequence[Fraction]], mu: mpf, prec: int) -> list[mpf]:
    d = len(M)
    with mp.workprec(prec):
        A = mpmath.matrix(d, d)
        for i in range(d):
            for j in range(d):
                A[i, j] = mpf(M[i][j].numerator) / M[i][j].denominator
            A[i, i] -= mu
        if d == 1:
            return [mpf(1)]
        # v_1 = 1; drop one equation (the others determine v exactly)
        best = None
        for drop in range(d):
            rows = [i for i in range(d) if i != drop]
            B = mpmath.matrix(d - 1, d - 1)
            rhs = mpmath.matrix(d - 1, 1)
            for a, i in enumerate(rows):
                for b in range(1, d):
                    B[a, b - 1] = A[i, b]
                rhs[a] = -A[i, 0]
            try:
                sol = mpmath.lu_solve(B, rhs)
            except ZeroDivisionError:
                continue
            best = [mpf(1)] + [sol[i] for i in range(d - 1)]
            break
        if best is None:
            raise ArithmeticError("eigenvector system is singular")
        return best


def _guard_bits(k: int, basis: Sequence[QSeries]) -> int:
    d = len(basis)
    half = (k - 1) / 2
    g = 0.0
    for f in basis:
        for n in range(1, f.nmax + 1):
            c = f[n]
            if c:
                g = max(g, abs(int(c)).bit_length() - half * log2(n))
    return int(g + half * log2(max(d, 1))) + 8


def eigenforms(k: int, nmax: int, prec_bits: int = DEFAULT_PREC, primes: Sequence[int] = (2,)) -> list[HeckeEigenform]:
    """All normalized Hecke eigenforms in S_k(1), ordered by ascending lambda(2)."""
    if k % 2:
        raise ValueError("weight must be even")
    d = dim_cusp_forms(k)
    if d == 0:
        return []
    pmax = max(primes)
    if nmax < max(pmax * d, 2):
        raise ValueError(f"nmax={nmax} too small; need at least {pmax * d}")
    basis = victor_miller_basis(k, nmax)
    M = None
    for p in primes:
        T = hecke_matrix(k, p, nmax, basis)
        M = T if M is None else [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(M, T)]
    cp = charpoly(M)
    scale_exp = (k - 1) // 2
    try:
        roots = _isolate_roots(cp, scale_exp, prec_bits + 32)
        sep = min((b[0] - a[0] for a, b in zip(roots, roots[1:])), default=mpf(1))
        # scale-free separation, compared with the distinctness threshold
        if sep < mpf(2) ** (-(prec_bits // 4)):
            raise EigenDistinctnessError(f"eigenvalue gap {mpmath.nstr(sep, 5)} below threshold")
    except EigenDistinctnessError:
        if tuple(primes) == (2,):
            return eigenforms(k, nmax, prec_bits, primes=(2, 3))
        raise
    guard = _guard_bits(k, basis)
    W = prec_bits + guard + 64
    half = mpf(k - 1) / 2
    out_prec = prec_bits + 32
    # shared across forms: integer coefficient rows and n^{-(k-1)/2}
    rows = [[int(f[n]) for f in basis] for n in range(nmax + 1)]
    with mp.workprec(W + 48):
        scales = [mpf(0)] + [mpmath.exp(-half * mpmath.log(n)) for n in range(1, nmax + 1)]
        ulp = mpf(2) ** (-W)
    forms = []
    for y, rad in roots:
        with mp.workprec(W + 64):
            mu = y * mpf(2) ** scale_exp
        v1 = _solve_eigenvector(M, mu, W)
        v2 = _solve_eigenvector(M, mu, W + 48)
        with mp.workprec(W + 48):
            # fixed point: v ~ vi / 2^W with |v - vi / 2^W| <= di / 2^W
            vi = [int(mpmath.nint(b * 2 ** W)) for b in v2]
            di = [int(mpmath.ceil((abs(a - b) + abs(b) * ulp) * 2 ** W)) + 1 for a, b in zip(v1, v2)]
            lam = [mpf(0)]
            errs = [mpf(0)]
            for n in range(1, nmax + 1):
                row = rows[n]
                a = sum(v * c for v, c in zip(vi, row))
                e = sum(dj * abs(c) for dj, c in zip(di, row))
                scale = scales[n]
                val = mpf(a) * ulp * scale
                with mp.workprec(out_prec):
                    lv = +val
                lam.append(lv)
                errs.append(mpf(e) * ulp * scale + abs(val - lv) + abs(val) * ulp)
            lam[1] = mpf(1)
            errs[1] = mpf(0)
        forms.append((lam, errs, mu))
    forms.sort(key=lambda t: t[0][2] if nmax >= 2 else 0)
    return [
        HeckeEigenform(k, tuple(l), tuple(e), eigen_index=i, prec_bits=prec_bits,
                       meta={"primes": tuple(primes), "eigenvalue": mu, "work_prec": W})
        for i, (l, e, mu) in enumerate(forms)
    ]


def hecke_residual(f: HeckeEigenform, limit: int | None = None):
    """max over m*n <= limit of |lambda(m) lambda(n) - sum_{d|(m,n)} lambda(mn/d^2)|."""
    from math import gcd

    N = f.nmax if limit is None else min(limit, f.nmax)
    worst = mpf(0)
    with mp.workprec(f.prec_bits + 32):
        for m in range(1, N + 1):
            for n in range(m, N // m + 1):
                g = gcd(m, n)
                s = mpf(0)
                for d in range(1, g + 1):
                    if g % d == 0:
                        s += f(m * n // (d * d))
                r = abs(f(m) * f(n) - s)
                if r > worst:
                    worst = r
    return worst


def deligne_excess(f: HeckeEigenform, pmax: int | None = None):
    """max over primes p <= pmax of |lambda(p)| - 2 (nonpositive when Deligne holds)."""
    P = f.nmax if pmax is None else min(pmax, f.nmax)
    return max((abs(f(p)) - 2 for p in small_primes(P)), default=mpf(-2))
