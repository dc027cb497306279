"""High-precision kernels with explicit absolute error bounds.

Every kernel returns an :class:`ErrBoundedReal`.  The smoothing function of
the approximate functional equation is the regularized upper incomplete
gamma function Q(k/2, 2 pi x); for even k the order is an integer, so Q is
the finite, cancellation-free sum e^{-y} sum_{j<a} y^j / j!.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import mpmath
from mpmath import mp, mpf

DEFAULT_PREC = 128


@dataclass(frozen=True)
class ErrBoundedReal:
    value: mpf
    err: mpf

    def __post_init__(self):
        if self.err < 0:
            raise ValueError("error bound must be nonnegative")

    @classmethod
    def exact(cls, v) -> "ErrBoundedReal":
        return cls(mpf(v), mpf(0))

    @staticmethod
    def _lift(o) -> "ErrBoundedReal":
        return o if isinstance(o, ErrBoundedReal) else ErrBoundedReal(mpf(o), mpf(0))

    def __add__(self, o):
        o = self._lift(o)
        v = self.value + o.value
        return ErrBoundedReal(v, self.err + o.err + abs(v) * mp.eps)

    __radd__ = __add__

    def __neg__(self):
        return ErrBoundedReal(-self.value, self.err)

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        o = self._lift(o)
        v = self.value * o.value
        e = abs(self.value) * o.err + abs(o.value) * self.err + self.err * o.err
        return ErrBoundedReal(v, e + abs(v) * mp.eps)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._lift(o)
        if abs(o.value) <= o.err:
            raise ZeroDivisionError("divisor interval contains zero")
        v = self.value / o.value
        lo = abs(o.value) - o.err
        e = (self.err + abs(v) * o.err) / lo
        return ErrBoundedReal(v, e + abs(v) * mp.eps)

    def __rtruediv__(self, o):
        return self._lift(o) / self

    def __pow__(self, n: int):
        out = ErrBoundedReal.exact(1)
        for _ in range(n):
            out = out * self
        return out

    def __float__(self) -> float:
        return float(self.value)

    def contains(self, x, slack=0) -> bool:
        return abs(self.value - x) <= self.err + slack

    def __repr__(self) -> str:
        return f"{mpmath.nstr(self.value, 20)} ± {mpmath.nstr(self.err, 3)}"


def _eps(prec_bits: int) -> mpf:
    return mpf(2) ** (-prec_bits)


# ---------------------------------------------------------------------------
# incomplete gamma / V


def gammaincc_int(a: int, y, prec_bits: int = DEFAULT_PREC) -> ErrBoundedReal:
    """Q(a, y) for integer a >= 1 and y >= 0."""
    if a < 1 or int(a) != a:
        raise ValueError("order must be a positive integer")
    if y < 0:
        raise ValueError("y must be nonnegative")
    with mp.workprec(prec_bits + 32):
        y = mpf(y)
        term = mpf(1)
        s = mpf(1)
        for j in range(1, a):
            term = term * y / j
            s += term
        v = mpmath.exp(-y) * s
        err = abs(v) * (a + 4) * _eps(prec_bits + 24)
    return ErrBoundedReal(v, err)


def V(x, k: int, prec_bits: int = DEFAULT_PREC) -> ErrBoundedReal:
    """Smoothing weight of the approximate functional equation at weight k."""
    if k < 2 or k % 2:
        raise ValueError("k must be even and >= 2")
    if x <= 0:
        raise ValueError("V is defined for x > 0")
    with mp.workprec(prec_bits + 32):
        y = 2 * mp.pi * mpf(x)
    return gammaincc_int(k // 2, y, prec_bits)


def V_contour(x, k: int, c=1, prec_bits: int = 80):
    """V(x) straight from its Mellin-Barnes definition on Re(s) = c (validation only)."""
    if c <= 0:
        raise ValueError("contour must sit right of the pole at s = 0")
    with mp.workprec(prec_bits):
        x = mpf(x)
        c = mpf(c)
        a = mpf(k) / 2
        lg_a = mpmath.loggamma(a)
        logy = mpmath.log(2 * mp.pi * x)

        def integrand(t):
            s = mpmath.mpc(c, t)
            val = mpmath.exp(mpmath.loggamma(s + a) - lg_a - s * logy) / s
            return val.real

        # integrand is even in t for real x; Gamma decays like exp(-pi |t| / 2)
        tmax = 60 + 2 * k
        pts = [0, 1, 4, 10, 25] + [t for t in (60, 120, 240) if t < tmax] + [tmax]
        val = 2 * mpmath.quad(integrand, pts) / (2 * mp.pi)
    return val


# ---------------------------------------------------------------------------
# Bessel J of integer order


def bessel_j(order: int, x, prec_bits: int = DEFAULT_PREC, allow_extended: bool = False) -> ErrBoundedReal:
    """J_order(x) by the ascending series summed with enough guard bits.

    Refuses x > 4*order unless ``allow_extended``; past that point the
    alternating series cancels heavily and the guard bits grow like x/ln 2.
    """
    nu = int(order)
    if nu < 1 or nu != order:
        raise ValueError("order must be an integer >= 1")
    if x <= 0:
        raise ValueError("x must be positive")
    if x > 4 * nu and not allow_extended:
        raise ValueError(f"x={float(x):.4g} exceeds the supported domain x <= 4*order = {4 * nu}")
    with mp.workprec(64):
        xf = mpf(x)
        h = xf / 2
        lg0 = nu * mpmath.log(h) - mpmath.loggamma(nu + 1)
        # index of the largest term: (h^2)/((j)(nu+j)) ~ 1
        jpk = int(mpmath.floor((-nu + mpmath.sqrt(nu * nu + 4 * h * h)) / 2))
        lgmax = (nu + 2 * jpk) * mpmath.log(h) - mpmath.loggamma(jpk + 1) - mpmath.loggamma(nu + jpk + 1)
        # past the turning point J is of size sqrt(2/(pi x)) rather than its first term
        lg_size = min(lg0, -mpmath.log(xf) / 2)
        guard = max(0, int(ceil(float((lgmax - lg_size) / mpmath.log(2))))) + 24
    W = prec_bits + guard
    with mp.workprec(W):
        xf = mpf(x)
        h2 = (xf / 2) ** 2
        term = mpmath.exp(nu * mpmath.log(xf / 2) - mpmath.loggamma(nu + 1))
        s = term
        biggest = abs(term)
        j = 0
        while True:
            j += 1
            term = -term * h2 / (j * (nu + j))
            s += term
            biggest = max(biggest, abs(term))
            ratio = h2 / ((j + 1) * (nu + j + 1))
            if ratio < 1 and abs(term) * ratio < biggest * _eps(W):
                tail = abs(term) * ratio
                break
        err = tail + (j + 2) * biggest * _eps(W) + abs(s) * _eps(prec_bits)
    return ErrBoundedReal(+s, err)


def bessel_leading_bound(order: int, x) -> mpf:
    """|J_order(x)| <= (x/2)^order / order!  (valid for all real x)."""
    return mpmath.exp(order * mpmath.log(mpf(x) / 2) - mpmath.loggamma(order + 1))


# ---------------------------------------------------------------------------
# gamma and zeta


def log_gamma(x, prec_bits: int = DEFAULT_PREC) -> ErrBoundedReal:
    if x <= 0:
        raise ValueError("log_gamma is implemented for x > 0")
    with mp.workprec(prec_bits + 16):
        v = mpmath.loggamma(mpf(x))
    return ErrBoundedReal(v, (abs(v) + 1) * _eps(prec_bits))


def zeta(s, prec_bits: int = DEFAULT_PREC) -> ErrBoundedReal:
    if s <= 1:
        raise ValueError("zeta is implemented for real s > 1")
    with mp.workprec(prec_bits + 16):
        v = mpmath.zeta(mpf(s))
    return ErrBoundedReal(v, abs(v) * _eps(prec_bits))

