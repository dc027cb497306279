"""The plus space of weight k + 1/2 on Gamma_0(4), Shimura partners, Waldspurger checks.

The plus space is cut out of the span of theta^a F^b (a + 4b = k + 1) by the
coefficient conditions and c(0) = 0; that the result has the dimension of
S_k(1) is asserted every time.  Petersson norms on Gamma_0(4) are integrated
over the six translates gamma F of the SL2(Z) fundamental domain, evaluating
the q-expansion at gamma z directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mp, mpf

from .characters import is_fundamental, kronecker
from .eigenforms import charpoly, hecke_matrix
from .exactseries import dim_cusp_forms, eis_F, theta, victor_miller_basis
from .specialfn import DEFAULT_PREC


class PlusSpaceError(AssertionError):
    """The constructed space does not have the dimension of S_k(1)."""


class ShimuraMatchError(ArithmeticError):
    pass


@dataclass(frozen=True)
class HalfIntegralForm:
    k: int
    coeffs: tuple
    plus_flag: bool = True
    shimura_partner: int | None = None
    scale_tag: str = "free"
    eigenvalues: dict = field(default_factory=dict, compare=False)

    @property
    def nmax(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int):
        if not 0 <= n <= self.nmax:
            raise IndexError(f"c({n}) requested; expansion known up to {self.nmax}")
        return self.coeffs[n]

    def scaled(self, t) -> "HalfIntegralForm":
        return replace(self, coeffs=tuple(t * c for c in self.coeffs), scale_tag=f"{self.scale_tag}*{t}")


def plus_allowed(k: int, n: int) -> bool:
    """(-1)^{k/2} n = 0, 1 mod 4."""
    return ((-1) ** (k // 2) * n) % 4 in (0, 1)


def _rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    m = [list(r) for r in rows]
    piv = []
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        sel = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if sel is None:
            continue
        m[r], m[sel] = m[sel], m[r]
        inv = 1 / Fraction(m[r][c])
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                fac = m[i][c]
                m[i] = [a - fac * b for a, b in zip(m[i], m[r])]
        piv.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], piv


def _nullspace(rows: list[list[Fraction]], ncols: int) -> list[list[Fraction]]:
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    red, piv = _rref(rows)
    free = [c for c in range(ncols) if c not in piv]
    out = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for row, pc in zip(red, piv):
            v[pc] = -row[fc]
        out.append(v)
    return out


def plus_space_basis(k: int, nmax: int | None = None) -> list[HalfIntegralForm]:
    """Reduced-echelon basis of S^+_{k+1/2}(4), exact rational coefficients to nmax."""
    if k % 2 or k < 2:
        raise ValueError("k must be even and positive")
    d = dim_cusp_forms(k)
    monos = [(k + 1 - 4 * b, b) for b in range(k // 4 + 1)]
    if nmax is None:
        nmax = 8 * len(monos) + 16
    if nmax < 4 * d + 8:
        raise ValueError(f"nmax={nmax} too small; need at least {4 * d + 8}")
    th, F = theta(nmax), eis_F(nmax)
    series = [th ** a * F ** b for a, b in monos]
    cons = [0] + [n for n in range(1, nmax + 1) if not plus_allowed(k, n)]
    rows = [[Fraction(s[n]) for s in series] for n in cons]
    null = _nullspace(rows, len(series))
    if len(null) != d:
        raise PlusSpaceError(f"plus space at k={k} came out with dimension {len(null)}, expected {d}")
    if d == 0:
        return []
    vecs = [[sum(v[j] * series[j][n] for j in range(len(series))) for n in range(nmax + 1)] for v in null]
    red, _ = _rref(vecs)
    forms = [HalfIntegralForm(k, tuple(Fraction(c) for c in row)) for row in red]
    for g in forms:
        if g[0] != 0 or any(g[n] != 0 for n in range(nmax + 1) if not plus_allowed(k, n)):
            raise PlusSpaceError("basis element violates the plus condition")
    return forms


def pivots(forms: list[HalfIntegralForm]) -> list[int]:
    return [next(n for n, c in enumerate(g.coeffs) if c != 0) for g in forms]


def hecke_plus(g: HalfIntegralForm, p: int, limit: int) -> list:
    """(T(p^2) g)(n) for 1 <= n <= limit:  c(p^2 n) + ((-1)^{k/2} n | p) p^{k/2-1} c(n) + p^{k-1} c(n/p^2)."""
    k = g.k
    if p == 2:
        raise ValueError("p = 2 is excluded at level 4")
    if p * p * limit > g.nmax:
        raise ValueError(f"T({p * p}) up to n={limit} needs coefficients to {p * p * limit}")
    sgn = (-1) ** (k // 2)
    out = [0]
    for n in range(1, limit + 1):
        v = g[p * p * n] + kronecker(sgn * n, p) * p ** (k // 2 - 1) * g[n]
        if n % (p * p) == 0:
            v += p ** (k - 1) * g[n // (p * p)]
        out.append(v)
    return out


def hecke_plus_matrix(basis: list[HalfIntegralForm], p: int) -> list[list[Fraction]]:
    """Matrix of T(p^2) in the echelon basis, checked exactly on every available coefficient."""
    piv = pivots(basis)
    limit = basis[0].nmax // (p * p)
    if limit < max(piv):
        raise ValueError("not enough coefficients to read T(p^2) off the pivots")
    images = [hecke_plus(g, p, limit) for g in basis]
    M = [[Fraction(images[j][piv[i]]) for j in range(len(basis))] for i in range(len(basis))]
    for j, img in enumerate(images):
        for n in range(1, limit + 1):
            if img[n] != sum(M[i][j] * basis[i][n] for i in range(len(basis))):
                raise PlusSpaceError(f"T({p * p}) does not preserve the plus space at n={n}")
    return M


def _needed_nmax(k: int, p: int, extra: int = 0) -> int:
    d = dim_cusp_forms(k)
    base = max(8 * (k // 4 + 1) + 16, 4 * d + 8, extra)
    return p * p * base


def shimura_match(k: int, nmax: int | None = None, p: int = 3, prec_bits: int = DEFAULT_PREC,
                  tol_bits: int = 40) -> list[HalfIntegralForm]:
    """Hecke eigenbasis of the plus space, each paired with its Shimura partner in H_k."""
    from .lcentral import forms_for

    d = dim_cusp_forms(k)
    if d == 0:
        return []
    nmax = nmax or _needed_nmax(k, p)
    basis = plus_space_basis(k, nmax)
    M = hecke_plus_matrix(basis, p)
    # Kohnen's isomorphism: same characteristic polynomial as T_p on S_k(1)
    T = hecke_matrix(k, p, p * d + p, victor_miller_basis(k, p * d + p))
    if charpoly(M) != charpoly(T):
        raise ShimuraMatchError(f"T({p * p}) on the plus space and T_{p} on S_{k}(1) have different spectra")
    fs = forms_for(k, p, prec_bits)
    out = []
    with mp.workprec(prec_bits + 64):
        for f in fs:
            a_p = f(p) * mpmath.power(p, mpf(k - 1) / 2)
            if d == 1:
                m00 = mpf(M[0][0].numerator) / M[0][0].denominator
                if abs(m00 - a_p) > mpf(2) ** (-tol_bits) * abs(a_p):
                    raise ShimuraMatchError(f"T({p * p}) eigenvalue {M[0][0]} != a_f({p}) = {a_p}")
                coeffs = basis[0].coeffs
                ev = {p: M[0][0]}
            else:
                A = mpmath.matrix([[mpf(x.numerator) / x.denominator for x in row] for row in M]) - a_p * mpmath.eye(d)
                _, S, V = mpmath.svd_r(A)
                if S[d - 1] > mpf(2) ** (-tol_bits) * (1 + abs(a_p)):
                    raise ShimuraMatchError(f"no plus-space eigenvector for a_f({p}) = {mpmath.nstr(a_p, 12)}")
                v = [V[d - 1, j] for j in range(d)]
                v = [x / v[0] for x in v] if v[0] != 0 else v
                coeffs = tuple(sum(v[i] * basis[i][n] for i in range(d)) for n in range(nmax + 1))
                ev = {p: a_p}
            out.append(HalfIntegralForm(k, tuple(coeffs), True, f.eigen_index, "free", ev))
    if sorted(g.shimura_partner for g in out) != list(range(d)):
        raise ShimuraMatchError("partner assignment is not a bijection")
    return out


# ---------------------------------------------------------------------------
# Waldspurger checks


def _require_pair_ok(k: int, D: int):
    if not is_fundamental(D) or D % 2 == 0:
        raise ValueError(f"{D} is not an odd fundamental discriminant")
    if ((-1) ** (k // 2)) * D <= 0:
        raise ValueError(f"the plus space at k={k} pairs with discriminants of sign {(-1) ** (k // 2)}")


@dataclass(frozen=True)
class RatioReport:
    k: int
    D1: int
    D2: int
    eigen_index: int
    lhs: mpf
    rhs: mpf
    residual: mpf
    vacuous: bool
    scale_tag: str


def waldspurger_ratio_check(k: int, D1: int, D2: int, eigen_index: int = 0, g: HalfIntegralForm | None = None,
                            prec_bits: int = DEFAULT_PREC) -> RatioReport:
    """c(|D1|)^2 |D2|^{(k-1)/2} L(1/2, f x chi_D2)  vs  c(|D2|)^2 |D1|^{(k-1)/2} L(1/2, f x chi_D1)."""
    from .lcentral import central_value, forms_for

    _require_pair_ok(k, D1)
    _require_pair_ok(k, D2)
    if g is None:
        g = next(h for h in shimura_match(k, _needed_nmax(k, 3, max(abs(D1), abs(D2)))) if h.shimura_partner == eigen_index)
    f = forms_for(k, 4 * k * max(abs(D1), abs(D2)), prec_bits)[g.shimura_partner]
    with mp.workprec(prec_bits + 32):
        c1 = mpf(g[abs(D1)].numerator) / g[abs(D1)].denominator if isinstance(g[abs(D1)], Fraction) else mpf(g[abs(D1)])
        c2 = mpf(g[abs(D2)].numerator) / g[abs(D2)].denominator if isinstance(g[abs(D2)], Fraction) else mpf(g[abs(D2)])
        L1 = central_value(f, D1).value.value
        L2 = central_value(f, D2).value.value
        e = mpf(k - 1) / 2
        lhs = c1 ** 2 * mpf(abs(D2)) ** e * L2
        rhs = c2 ** 2 * mpf(abs(D1)) ** e * L1
        if lhs == 0 and rhs == 0:
            return RatioReport(k, D1, D2, g.shimura_partner, lhs, rhs, mpf(0), True, g.scale_tag)
        if (c1 == 0) != (c2 == 0) and L1 > 0 and L2 > 0:
            raise ShimuraMatchError(f"c_g vanishes at exactly one of |{D1}|, |{D2}| while both L-values are positive")
        resid = abs(lhs - rhs) / max(abs(lhs), abs(rhs))
    return RatioReport(k, D1, D2, g.shimura_partner, lhs, rhs, resid, False, g.scale_tag)


# Gamma_0(4) \ SL2(Z): the identity, S T^j (cusp 0, width 4) and the cusp 1/2
GAMMA0_4_COSETS = ((1, 0, 0, 1), (0, -1, 1, 0), (0, -1, 1, 1), (0, -1, 1, 2), (0, -1, 1, 3), (1, 0, 2, 1))


def _gauss(nodes: int, a: float, b: float):
    t, w = np.polynomial.legendre.leggauss(nodes)
    return (b - a) / 2 * t + (a + b) / 2, (b - a) / 2 * w


def _domain_mesh(depth: int, height: float):
    """Gauss nodes and weights (including dx dy / y^2) on {|x| <= 1/2, |z| >= 1, y <= height}."""
    nx = 40 * depth
    ny = 16 * depth
    zs, ws = [], []
    xs, wx = _gauss(nx, -0.5, 0.5)
    tn, tw = np.polynomial.legendre.leggauss(ny)
    for x, w in zip(xs, wx):
        y0 = math.sqrt(1 - x * x)
        ys = (1 - y0) / 2 * tn + (1 + y0) / 2
        zs.append(x + 1j * ys)
        ws.append(w * (1 - y0) / 2 * tw / ys ** 2)
    edges = [1.0]
    while edges[-1] * 2 < height:
        edges.append(edges[-1] * 2)
    edges.append(height)
    for a, b in zip(edges, edges[1:]):
        ys, wy = _gauss(ny, a, b)
        Z = xs[:, None] + 1j * ys[None, :]
        zs.append(Z.ravel())
        ws.append((wx[:, None] * (wy / ys ** 2)[None, :]).ravel())
    return np.concatenate(zs), np.concatenate(ws)


def _eval_series(coeffs: np.ndarray, tau: np.ndarray) -> np.ndarray:
    n = np.arange(len(coeffs))
    out = np.zeros(tau.shape, dtype=complex)
    for lo in range(0, len(tau), 2048):
        t = tau[lo:lo + 2048]
        out[lo:lo + 2048] = np.exp(2j * np.pi * np.outer(t, n)) @ coeffs
    return out


def petersson_norm_gamma0_4(g: HalfIntegralForm, depth: int = 1, height: float = 16.0,
                            cosets=GAMMA0_4_COSETS) -> tuple[float, float]:
    """(integral over Gamma_0(4) \\ H of |g|^2 y^{(k+1)/2} dx dy / y^2, error estimate from a doubled mesh)."""
    w = (g.k + 1) / 2
    vals = []
    for dep in (depth, 2 * depth):
        zs, ws = _domain_mesh(dep, height)
        ymin = min(float(np.min(zs.imag / np.abs(c * zs + d) ** 2)) for a, b, c, d in cosets)
        need = int((80 + w * math.log(1 / ymin + 2)) / (2 * math.pi * ymin)) + 1
        if need > g.nmax:
            raise ValueError(f"norm quadrature needs c(n) to n={need}, have {g.nmax}")
        cf = np.array([float(c) for c in g.coeffs[:need + 1]])
        scale = float(np.max(np.abs(cf)))
        cf = cf / scale
        total = 0.0
        for a, b, c, d in cosets:
            tau = (a * zs + b) / (c * zs + d)
            gv = _eval_series(cf, tau)
            total += float(np.dot(ws, np.abs(gv) ** 2 * tau.imag ** w))
        vals.append(total * scale * scale)
    # above the truncation height |g|gamma|^2 decays like exp(-pi y) at worst (cusp width 4)
    tail = vals[1] * math.exp(-math.pi * (height - 1)) * height ** w
    return vals[1], abs(vals[1] - vals[0]) + tail + 1e-12 * vals[1]


def plus_norm_nmax(k: int, depth: int = 1, height: float = 16.0) -> int:
    w = (k + 1) / 2
    zs, _ = _domain_mesh(2 * depth, height)
    ymin = min(float(np.min(zs.imag / np.abs(c * zs + d) ** 2)) for a, b, c, d in GAMMA0_4_COSETS)
    return int((80 + w * math.log(1 / ymin + 2)) / (2 * math.pi * ymin)) + 2


# <g, g> in Kohnen-Zagier's normalization is 1/6 of the integral over Gamma_0(4) \ H
KZ_INDEX = 6


@dataclass(frozen=True)
class NormReport:
    k: int
    D: int
    eigen_index: int
    norm_sq: float
    norm_err: float
    c_normalized_sq: float
    literal_rhs: float
    literal_rel_err: float
    corrected_rhs: float
    corrected_rel_err: float
    f_norm: float
    threshold_rhs: float
    exceeds_threshold: bool
    scale_tag: str


def waldspurger_norm_check(k: int, D: int, integration_depth: int = 1, eigen_index: int = 0,
                           scale=1, height: float = 16.0, prec_bits: int = DEFAULT_PREC) -> NormReport:
    """Both sides of c_g(|D|)^2 = Gamma(k/2)/pi^{k/2} |D|^{(k-1)/2} L(1/2, f x chi_D) with ||g|| = 1.

    ``literal`` compares exactly that.  ``corrected`` divides the right side by
    KZ_INDEX * <f, f> (Petersson norm of f over SL2(Z) \\ H), the Kohnen-Zagier form.
    """
    from .lcentral import central_value, forms_for, omega_star
    from .resonance import extreme_threshold

    _require_pair_ok(k, D)
    nn = max(plus_norm_nmax(k, integration_depth, height), _needed_nmax(k, 3, abs(D)))
    g = next(h for h in shimura_match(k, nn) if h.shimura_partner == eigen_index)
    if scale != 1:
        g = g.scaled(Fraction(scale) if isinstance(scale, (int, Fraction)) else scale)
    N, Nerr = petersson_norm_gamma0_4(g, integration_depth, height)
    f = forms_for(k, 4 * k * abs(D), prec_bits)[eigen_index]
    L = central_value(f, D).value.value
    om = omega_star(f, "norm").omega_star.value
    with mp.workprec(prec_bits):
        c = g[abs(D)]
        c = mpf(c.numerator) / c.denominator if isinstance(c, Fraction) else mpf(c)
        cn2 = c * c / N
        base = mpmath.gamma(mpf(k) / 2) / mp.pi ** (mpf(k) / 2) * mpf(abs(D)) ** (mpf(k - 1) / 2)
        literal = base * L
        f_norm = om * mpmath.gamma(k) / (12 * (4 * mp.pi) ** (k - 1))
        corrected = literal / (KZ_INDEX * f_norm)
        thr = base * extreme_threshold(k, D)
    return NormReport(k, D, eigen_index, N, Nerr, float(cn2), float(literal), float(abs(cn2 - literal) / literal),
                      float(corrected), float(abs(cn2 - corrected) / corrected), float(f_norm),
                      float(thr), bool(cn2 >= thr), g.scale_tag)
