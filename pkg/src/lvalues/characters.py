"""Fundamental discriminants and the real primitive character chi_D."""

from __future__ import annotations

from dataclasses import dataclass


def _squarefree(n: int) -> bool:
    n = abs(n)
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        if n % p == 0:
            n //= p
        p += 1
    return True


def is_fundamental(D: int) -> bool:
    """True for fundamental discriminants; D = 1 is admitted as the trivial one."""
    if D == 0:
        raise ValueError("D = 0 is not a discriminant")
    if D % 4 == 1:
        return _squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n) for arbitrary integers."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a|n), n odd positive
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def chi(D: int, n: int) -> int:
    """chi_D(n) = (D|n); completely multiplicative, period |D|."""
    return kronecker(D, n)


def parity_matches(D: int, k: int) -> bool:
    """chi_D(-1) = i^k, i.e. sign(D) = (-1)^(k/2)."""
    if k % 2:
        raise ValueError("weight must be even")
    return (D > 0) == (k % 4 == 0)


@dataclass(frozen=True)
class KroneckerChar:
    D: int

    def __post_init__(self):
        if not is_fundamental(self.D):
            raise ValueError(f"{self.D} is not a fundamental discriminant")

    @property
    def parity(self) -> int:
        return 1 if self.D > 0 else -1

    @property
    def is_odd(self) -> bool:
        return self.D % 2 == 1

    @property
    def conductor(self) -> int:
        return abs(self.D)

    def __call__(self, n: int) -> int:
        return chi(self.D, n)

    def table(self, nmax: int) -> list[int]:
        """chi_D(n) for 0 <= n <= nmax, computed over one period."""
        q = abs(self.D)
        period = [chi(self.D, n) for n in range(q)]
        return [period[n % q] for n in range(nmax + 1)]
