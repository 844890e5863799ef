"""
The algebraic norm as a polynomial in x = sigma - 1.

nu = sum_{i=1}^{p^N} C(p^N, i) x^(i-1) = ((x+1)^(p^N) - 1) / x

Polynomials are dense tuples of Python ints, lowest degree first. The text
rendering keeps p symbolic the way the PARI decomposition program does:
a coefficient c is written u*p^v with p not dividing u.

>>> print(build_nu(2, 2))
x^3+p^2*x^2+3*p*x+p^2
>>> d = decompose(build_nu(2, 2), 2)
>>> d.f_k, format_poly(d.A, 2), format_poly(d.B, 2)
(1, 'x+p^2', '3*x+p')
"""

from __future__ import annotations

from dataclasses import dataclass

from .padic import ValuedInteger, binomial_row, check_prime, f_step, int_log, valuation

__all__ = [
    "MAX_DEGREE",
    "NormPolynomial",
    "NuDecomposition",
    "build_nu",
    "decompose",
    "format_poly",
    "is_smooth",
    "program_output",
    "reduce_mod_ideal",
]

MAX_DEGREE = 2**16


def _coeff_text(c: int, p: int) -> str:
    v = valuation(c, p)
    u = abs(c) // p**v
    parts = []
    if u != 1:
        parts.append(str(u))
    if v == 1:
        parts.append("p")
    elif v > 1:
        parts.append(f"p^{v}")
    return "*".join(parts)


def format_poly(coeffs, p: int) -> str:
    """Render an integer polynomial (low degree first) with p kept symbolic."""
    terms = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if c == 0:
            continue
        body = _coeff_text(c, p)
        xpart = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
        if body and xpart:
            term = f"{body}*{xpart}"
        else:
            term = body or xpart or "1"
        sign = "-" if c < 0 else "+"
        terms.append(term if not terms and sign == "+" else sign + term)
    return "".join(terms) if terms else "0"


@dataclass(frozen=True)
class NormPolynomial:
    p: int
    N: int
    coeffs: tuple  # of ValuedInteger; coeffs[i] is C(p^N, i+1)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def ints(self) -> list[int]:
        return [c.reconstruct() for c in self.coeffs]

    def evaluate(self, x: int) -> int:
        acc = 0
        for c in reversed(self.ints()):
            acc = acc * x + c
        return acc

    def __str__(self):
        return format_poly(self.ints(), self.p)


def build_nu(p: int, N: int) -> NormPolynomial:
    check_prime(p)
    if N < 1:
        raise ValueError("N must be positive")
    q = p**N
    if q > MAX_DEGREE:
        raise ValueError(f"p^N = {q} exceeds the supported size {MAX_DEGREE}")
    row = binomial_row(q)
    return NormPolynomial(p, N, tuple(ValuedInteger.of(c, p) for c in row[1:]))


@dataclass(frozen=True)
class NuDecomposition:
    """nu = x^k * A + p^f_k * B with deg B < k."""

    p: int
    N: int
    k: int
    f_k: int
    A: tuple
    B: tuple

    def reconstruct(self) -> list[int]:
        out = [0] * max(len(self.A) + self.k, len(self.B))
        for i, c in enumerate(self.A):
            out[i + self.k] += c
        scale = self.p**self.f_k
        for i, c in enumerate(self.B):
            out[i] += scale * c
        return out

    def lines(self) -> list[str]:
        return [
            f"P=x^{self.k}.A+p^{self.f_k}.B",
            f"A={format_poly(self.A, self.p)}",
            f"B={format_poly(self.B, self.p)}",
        ]


def decompose(nu: NormPolynomial, k: int) -> NuDecomposition:
    q = len(nu.coeffs)
    if not 1 <= k <= q - 1:
        raise ValueError(f"k={k} outside [1, {q - 1}]")
    c = nu.ints()
    low = c[:k]
    w = min(vi.valuation for vi in nu.coeffs[:k])
    expected = f_step(k, nu.N, nu.p)
    assert w == expected, (w, expected)
    scale = nu.p**w
    return NuDecomposition(nu.p, nu.N, k, w, tuple(c[k:]), tuple(x // scale for x in low))


def program_output(p: int, N: int, ks=None) -> list[str]:
    """Line-for-line output of the decomposition program for (p, N)."""
    nu = build_nu(p, N)
    out = [f"P={nu}"]
    for k in ks if ks is not None else range(1, p**N):
        out.append("")
        out.extend(decompose(nu, k).lines())
    return out


def reduce_mod_ideal(nu: NormPolynomial, m: int, e: int) -> tuple:
    """nu modulo (x^m, p^e), representatives in [0, p^e)."""
    if m < 1 or e < 1:
        raise ValueError("m and e must be positive")
    q = nu.p**e
    return tuple(c % q for c in nu.ints()[:m])


def is_smooth(m: int, e: int, N: int, p: int) -> bool:
    """Smooth complexity: m = 0, or m <= p^N - 1 and e <= N - floor(log_p m)."""
    if m < 0 or e < 0:
        raise ValueError("m and e must be non-negative")
    if m == 0:
        return True
    if m > p**N - 1:
        return False
    return e <= N - int_log(m, p)
