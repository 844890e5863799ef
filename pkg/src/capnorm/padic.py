"""
Exact p-adic valuations of integers, factorials and binomial coefficients.

All routines work on Python integers, so precision is unbounded.

>>> valuation(28, 2)
2
>>> factorial_valuation(8, 2)
7
>>> binomial_valuation(16, 8, 2)
1
>>> [f_step(k, 2, 2) for k in (1, 2, 3)]
[2, 1, 1]
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "ValuedInteger",
    "binomial_row",
    "binomial_valuation",
    "check_prime",
    "digit_sum",
    "f_step",
    "factorial_valuation",
    "int_log",
    "is_prime",
    "valuation",
]


@lru_cache(maxsize=256)
def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def check_prime(p: int) -> int:
    if not isinstance(p, int) or not is_prime(p):
        raise ValueError(f"p must be a prime, got {p!r}")
    return p


def valuation(n: int, p: int) -> int:
    """Largest v with p^v dividing n. Zero is rejected rather than mapped to infinity."""
    check_prime(p)
    if n == 0:
        raise ValueError("valuation of 0 is undefined")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def digit_sum(m: int, p: int) -> int:
    """Sum of the base-p digits of m."""
    check_prime(p)
    if m < 0:
        raise ValueError("digit_sum needs m >= 0")
    s = 0
    while m:
        m, d = divmod(m, p)
        s += d
    return s


def factorial_valuation(m: int, p: int) -> int:
    """v_p(m!) by Legendre's digit formula (m - S_p(m)) / (p - 1)."""
    if m < 0:
        raise ValueError("factorial_valuation needs m >= 0")
    return (m - digit_sum(m, p)) // (p - 1)


def binomial_valuation(n: int, k: int, p: int) -> int:
    if n < 0 or not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    return factorial_valuation(n, p) - factorial_valuation(k, p) - factorial_valuation(n - k, p)


def int_log(k: int, p: int) -> int:
    """floor(log_p k) for k >= 1, in integer arithmetic."""
    if k < 1:
        raise ValueError("int_log needs k >= 1")
    s = 0
    while k >= p:
        k //= p
        s += 1
    return s


def f_step(k: int, N: int, p: int) -> int:
    """f(k) = N - s for k in [p^s, p^(s+1) - 1]."""
    check_prime(p)
    if N < 1:
        raise ValueError("N must be positive")
    if not 1 <= k <= p**N - 1:
        raise ValueError(f"k={k} outside [1, {p**N - 1}]")
    return N - int_log(k, p)


def binomial_row(n: int) -> list[int]:
    """[C(n, 0), ..., C(n, n)] by the multiplicative recurrence."""
    row = [1]
    for k in range(n):
        row.append(row[-1] * (n - k) // (k + 1))
    return row


@dataclass(frozen=True)
class ValuedInteger:
    """An integer stored as unit * p^valuation, with p not dividing unit.

    Zero is the instance with unit == 0 (and valuation 0).
    """

    p: int
    valuation: int
    unit: int

    def __post_init__(self):
        if self.unit == 0:
            if self.valuation != 0:
                raise ValueError("zero must have valuation 0")
        elif self.unit % self.p == 0 or self.valuation < 0:
            raise ValueError("unit must be prime to p and valuation >= 0")

    @classmethod
    def of(cls, n: int, p: int) -> ValuedInteger:
        if n == 0:
            return cls.zero(p)
        v = valuation(n, p)
        return cls(p, v, n // p**v)

    @classmethod
    def zero(cls, p: int) -> ValuedInteger:
        return cls(p, 0, 0)

    @property
    def is_zero(self) -> bool:
        return self.unit == 0

    def reconstruct(self) -> int:
        return self.unit * self.p**self.valuation

    def __int__(self):
        return self.reconstruct()
