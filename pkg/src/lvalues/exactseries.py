"""Exact truncated q-series and the level-one / level-four generators.

Coefficients are Python ints or ``fractions.Fraction``; nothing in this
module ever rounds.  Products of integer series go through Kronecker
substitution on ``gmpy2`` integers, which keeps the Victor Miller basis
cheap up to a few thousand coefficients at weight 300.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Iterable, Sequence

import gmpy2

Number = int | Fraction


def _norm(c: Number) -> Number:
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


class QSeries:
    """Truncated power series ``sum_{n<=nmax} c_n q^n`` with exact coefficients."""

    __slots__ = ("_c", "weight_tag")

    def __init__(self, coeffs: Iterable[Number], weight_tag: Fraction | int | None = None):
        c = tuple(_norm(x) if isinstance(x, Fraction) else int(x) for x in coeffs)
        if not c:
            raise ValueError("a q-series needs at least the constant coefficient")
        self._c = c
        self.weight_tag = Fraction(weight_tag) if weight_tag is not None else None

    @property
    def nmax(self) -> int:
        return len(self._c) - 1

    @property
    def coeffs(self) -> tuple[Number, ...]:
        return self._c

    def __getitem__(self, n: int) -> Number:
        if not 0 <= n <= self.nmax:
            raise IndexError(f"coefficient q^{n} requested, series known up to q^{self.nmax}")
        return self._c[n]

    def __len__(self) -> int:
        return len(self._c)

    def __iter__(self):
        return iter(self._c)

    def __eq__(self, other) -> bool:
        return isinstance(other, QSeries) and self._c == other._c

    def __hash__(self) -> int:
        return hash(self._c)

    def __repr__(self) -> str:
        terms = []
        for n, c in enumerate(self._c):
            if c:
                terms.append(f"{c}" if n == 0 else f"{c}*q^{n}")
        body = " + ".join(terms) if terms else "0"
        return f"QSeries({body} + O(q^{self.nmax + 1}))"

    def is_integral(self) -> bool:
        return all(type(c) is int for c in self._c)

    def truncate(self, nmax: int) -> "QSeries":
        if nmax > self.nmax:
            raise IndexError(f"cannot extend a series known to q^{self.nmax} up to q^{nmax}")
        return QSeries(self._c[: nmax + 1], self.weight_tag)

    def _tag(self, other: "QSeries", mul: bool) -> Fraction | None:
        if self.weight_tag is None or other.weight_tag is None:
            return None
        if mul:
            return self.weight_tag + other.weight_tag
        return self.weight_tag if self.weight_tag == other.weight_tag else None

    def __add__(self, other):
        if not isinstance(other, QSeries):
            return QSeries((self._c[0] + other,) + self._c[1:], self.weight_tag)
        n = min(self.nmax, other.nmax)
        return QSeries((a + b for a, b in zip(self._c[: n + 1], other._c)), self._tag(other, False))

    __radd__ = __add__

    def __neg__(self):
        return QSeries((-a for a in self._c), self.weight_tag)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, QSeries):
            n = min(self.nmax, other.nmax)
            return QSeries(_mul_exact(self._c[: n + 1], other._c[: n + 1]), self._tag(other, True))
        return QSeries((a * other for a in self._c), self.weight_tag)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers are not supported")
        result = QSeries([1] + [0] * self.nmax, 0 if self.weight_tag is not None else None)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result


# ---------------------------------------------------------------------------
# multiplication


def _mul_int(a: Sequence[int], b: Sequence[int]) -> list[int]:
    n = len(a)
    if n <= 24:
        out = [0] * n
        for i, x in enumerate(a):
            if x:
                for j in range(n - i):
                    out[i + j] += x * b[j]
        return out
    ma = max((abs(x) for x in a), default=0)
    mb = max((abs(x) for x in b), default=0)
    if ma == 0 or mb == 0:
        return [0] * n
    bits = ma.bit_length() + mb.bit_length() + n.bit_length() + 2
    nbytes = (bits + 7) // 8
    pa = _pack(a, nbytes)
    pb = _pack(b, nbytes)
    return _unpack(pa * pb, nbytes, n)


def _pack(a: Sequence[int], nbytes: int):
    pos = b"".join((x if x > 0 else 0).to_bytes(nbytes, "little") for x in a)
    neg = b"".join((-x if x < 0 else 0).to_bytes(nbytes, "little") for x in a)
    return gmpy2.mpz(int.from_bytes(pos, "little")) - gmpy2.mpz(int.from_bytes(neg, "little"))


def _unpack(r, nbytes: int, n: int) -> list[int]:
    # bias every digit by 2^(8*nbytes-1) so all digits become nonnegative
    half = (1 << (8 * nbytes - 1)).to_bytes(nbytes, "little")
    bias = gmpy2.mpz(int.from_bytes(half * (2 * n), "little"))
    raw = int(r + bias).to_bytes(2 * n * nbytes + 1, "little")
    h = 1 << (8 * nbytes - 1)
    return [int.from_bytes(raw[i * nbytes : (i + 1) * nbytes], "little") - h for i in range(n)]


def _mul_exact(a: Sequence[Number], b: Sequence[Number]) -> list[Number]:
    da = _common_den(a)
    db = _common_den(b)
    ia = [int(x * da) for x in a] if da != 1 else list(a)
    ib = [int(x * db) for x in b] if db != 1 else list(b)
    prod = _mul_int(ia, ib)
    if da == 1 and db == 1:
        return prod
    d = da * db
    return [_norm(Fraction(x, d)) for x in prod]


def _common_den(a: Sequence[Number]) -> int:
    d = 1
    for x in a:
        if isinstance(x, Fraction):
            d = lcm(d, x.denominator)
    return d


# ---------------------------------------------------------------------------
# arithmetic helpers


def divisor_sum_table(nmax: int, power: int) -> list[int]:
    """``sigma_power(n)`` for ``0 <= n <= nmax`` (entry 0 is 0)."""
    s = [0] * (nmax + 1)
    for d in range(1, nmax + 1):
        dp = d**power
        for m in range(d, nmax + 1, d):
            s[m] += dp
    return s


def dim_cusp_forms(k: int) -> int:
    """Dimension of S_k(SL2(Z)) for even k (0 for odd or small k)."""
    if k % 2 or k < 12:
        return 0
    d = k // 12
    return d - 1 if k % 12 == 2 else d


# ---------------------------------------------------------------------------
# level one generators


def eisenstein(weight: int, nmax: int) -> QSeries:
    if nmax < 0:
        raise ValueError("nmax must be nonnegative")
    if weight == 4:
        const, power = 240, 3
    elif weight == 6:
        const, power = -504, 5
    else:
        raise ValueError(f"unsupported Eisenstein weight {weight}; only 4 and 6")
    sig = divisor_sum_table(nmax, power)
    return QSeries([1] + [const * sig[n] for n in range(1, nmax + 1)], weight)


def _euler_product(nmax: int) -> list[int]:
    # prod (1 - q^n) via the pentagonal number theorem
    c = [0] * (nmax + 1)
    j = 0
    while True:
        sign = -1 if j % 2 else 1
        g1 = j * (3 * j - 1) // 2
        g2 = j * (3 * j + 1) // 2
        if g1 > nmax:
            break
        c[g1] += sign
        if j and g2 <= nmax:
            c[g2] += sign
        j += 1
    return c


def delta(nmax: int) -> QSeries:
    if nmax < 1:
        raise ValueError("delta needs nmax >= 1")
    eta = QSeries(_euler_product(nmax - 1))
    e8 = (eta * eta) ** 4 if nmax > 1 else eta
    e24 = e8 * e8 * e8
    return QSeries([0] + list(e24.coeffs), 12)


@lru_cache(maxsize=64)
def victor_miller_basis(k: int, nmax: int) -> tuple[QSeries, ...]:
    """Echelonized integral basis f_1..f_d of S_k(1): coefficient of q^i in f_j is delta_ij."""
    if k % 2:
        raise ValueError("weight must be even")
    if k < 12:
        raise ValueError("no cusp forms below weight 12")
    d = dim_cusp_forms(k)
    if d == 0:
        return ()
    if nmax < d:
        raise ValueError(f"nmax={nmax} too small to echelonize a {d}-dimensional space")
    e4 = eisenstein(4, nmax)
    b = 1 if (k - 12) % 4 == 2 else 0
    dl = delta(nmax)
    # monomials E4^a E6^b Delta^c, c descending; a grows by 3 as c drops by 1
    a_of = {c: (k - 12 * c - 6 * b) // 4 for c in range(1, d + 1)}
    base = e4 ** a_of[d]
    if b:
        base = base * eisenstein(6, nmax)
    e4cubed = e4**3
    delta_pows = {1: dl}
    for c in range(2, d + 1):
        delta_pows[c] = delta_pows[c - 1] * dl
    rows: dict[int, QSeries] = {}
    for c in range(d, 0, -1):
        if c < d:
            base = base * e4cubed
        rows[c] = base * delta_pows[c]
    for c in range(d, 0, -1):
        f = rows[c]
        for c2 in range(c + 1, d + 1):
            coef = f[c2]
            if coef:
                f = f - rows[c2] * coef
        rows[c] = QSeries(f.coeffs, k)
    return tuple(rows[c] for c in range(1, d + 1))


# ---------------------------------------------------------------------------
# level four generators


def theta(nmax: int) -> QSeries:
    if nmax < 0:
        raise ValueError("nmax must be nonnegative")
    c = [0] * (nmax + 1)
    c[0] = 1
    m = 1
    while m * m <= nmax:
        c[m * m] = 2
        m += 1
    return QSeries(c, Fraction(1, 2))


def eis_F(nmax: int) -> QSeries:
    """Weight-2 Eisenstein series on Gamma0(4): sum of sigma(n) q^n over odd n."""
    if nmax < 0:
        raise ValueError("nmax must be nonnegative")
    sig = divisor_sum_table(nmax, 1)
    return QSeries([0] + [sig[n] if n % 2 else 0 for n in range(1, nmax + 1)], 2)


def content(values: Sequence[Number]) -> Fraction:
    """Positive rational c such that values/c is a primitive integer vector."""
    den = _common_den(values)
    g = 0
    for x in values:
        g = gcd(g, int(x * den))
    if g == 0:
        return Fraction(1)
    return Fraction(g, den)
