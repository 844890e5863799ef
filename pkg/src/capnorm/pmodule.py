"""
Finite abelian p-groups with an automorphism sigma of p-power order.

A module is H = Z/p^n_1 x ... x Z/p^n_r (n_1 >= ... >= n_r >= 1) with
sigma given through D = sigma - 1. Row j of D is the exponent vector of
h_j^(sigma-1); elements are row vectors and act as v -> v.D, with column t
reduced mod p^n_t. This is the layout of the PARI transcripts, so printed
rows paste in unchanged.

>>> mod = make_module(2, [1, 1, 1, 1],
...     [[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1]], N=1)
>>> filtration(mod).m
2
>>> nu_image(mod, base_valuation=2).kind.value
'None'
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import product

import numpy as np

from .errors import ModuleError
from .normpoly import build_nu, is_smooth
from .padic import check_prime, int_log

__all__ = [
    "CapitulationVerdict",
    "ENUMERATION_LIMIT",
    "Filtration",
    "Kind",
    "ModuleInvariants",
    "PGroupModule",
    "Rule",
    "analyze",
    "apply_poly",
    "check_sufficient_criterion",
    "element_capitulates",
    "element_invariants",
    "endomorphism_poly",
    "filtration",
    "howell_form",
    "invariants",
    "kernel_elements",
    "kernel_generators",
    "kernel_order",
    "make_module",
    "nu_image",
    "nu_matrix",
    "quotient_mod_pt",
    "span_order",
    "subgroup_elements",
    "verdict_line",
]

ENUMERATION_LIMIT = 2**20


# matrices over H ------------------------------------------------------------

def _reduce_rows(rows, moduli):
    return tuple(tuple(int(x) % q for x, q in zip(row, moduli)) for row in rows)


def _identity(r, moduli):
    return tuple(tuple(1 % moduli[t] if t == j else 0 for t in range(r)) for j in range(r))


def _vec_mat(v, A, moduli):
    r = len(moduli)
    return tuple(sum(v[u] * A[u][t] for u in range(r)) % moduli[t] for t in range(r))


def _mat_mul(A, B, moduli):
    return tuple(_vec_mat(row, B, moduli) for row in A)


def _mat_add(A, B, moduli):
    return tuple(tuple((a + b) % q for a, b, q in zip(ra, rb, moduli)) for ra, rb in zip(A, B))


def _mat_pow(A, e, moduli):
    R = _identity(len(moduli), moduli)
    while e:
        if e & 1:
            R = _mat_mul(R, A, moduli)
        A = _mat_mul(A, A, moduli)
        e >>= 1
    return R


def _is_zero(A):
    return all(x == 0 for row in A for x in row)


# the module -----------------------------------------------------------------

@dataclass(frozen=True)
class PGroupModule:
    p: int
    orders: tuple  # exponents n_j, non-increasing, all >= 1
    D: tuple  # r x r, reduced column-wise
    N: int

    @property
    def rank(self) -> int:
        return len(self.orders)

    @property
    def moduli(self) -> tuple:
        return tuple(self.p**n for n in self.orders)

    @property
    def log_order(self) -> int:
        return sum(self.orders)

    @property
    def size(self) -> int:
        return self.p**self.log_order

    @property
    def M(self):
        mod = self.moduli
        return _mat_add(_identity(self.rank, mod), self.D, mod)

    def act(self, v, A=None):
        return _vec_mat(v, self.D if A is None else A, self.moduli)

    def zero(self):
        return (0,) * self.rank

    def generator(self, j):
        return tuple(1 if t == j else 0 for t in range(self.rank))

    def reduce(self, v):
        if len(v) != self.rank:
            raise ModuleError(f"vector of length {len(v)} for a module of rank {self.rank}")
        return tuple(int(x) % q for x, q in zip(v, self.moduli))

    def power(self, i):
        """D^i."""
        return _mat_pow(self.D, i, self.moduli)


def _det_mod_p(A, p):
    A = [[x % p for x in row] for row in A]
    n = len(A)
    det = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c]), None)
        if piv is None:
            return 0
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det = det * A[c][c] % p
        inv = pow(A[c][c], -1, p)
        for i in range(c + 1, n):
            f = A[i][c] * inv % p
            if f:
                A[i] = [(a - f * b) % p for a, b in zip(A[i], A[c])]
    return det % p


def make_module(p, orders, sigma_delta, N) -> PGroupModule:
    """Validate and build a module; sigma = I + sigma_delta must be an automorphism of order dividing p^N."""
    check_prime(p)
    orders = tuple(int(n) for n in orders)
    if any(n < 1 for n in orders):
        raise ModuleError("generator orders must be positive exponents; drop trivial generators")
    if any(a < b for a, b in zip(orders, orders[1:])):
        raise ModuleError(f"orders must be non-increasing, got {list(orders)}")
    if N < 0:
        raise ModuleError("N must be non-negative")
    r = len(orders)
    if len(sigma_delta) != r or any(len(row) != r for row in sigma_delta):
        raise ModuleError(f"sigma_delta must be {r} x {r}")
    moduli = tuple(p**n for n in orders)
    D = _reduce_rows(sigma_delta, moduli)
    # row j is the image of an element of order p^n_j, so it must be killed by p^n_j
    for j in range(r):
        for t in range(r):
            if (moduli[j] * D[j][t]) % moduli[t]:
                raise ModuleError(f"row {j + 1} is not a homomorphic image: entry {t + 1} has order above p^{orders[j]}")
    mod = PGroupModule(p, orders, D, N)
    if r == 0:
        return mod
    M = mod.M
    if _det_mod_p(M, p) == 0:
        raise ModuleError("sigma = I + D is not invertible mod p")
    X = M
    for _ in range(N):
        X = _mat_pow(X, p, moduli)
    if X != _identity(r, moduli):
        raise ModuleError(f"sigma^(p^{N}) is not the identity")
    return mod


# polynomials in D -----------------------------------------------------------

def endomorphism_poly(module: PGroupModule, poly):
    """The matrix of poly(D), poly given low degree first."""
    mod = module.moduli
    r = module.rank
    I = _identity(r, mod)
    R = tuple((0,) * r for _ in range(r))
    for c in reversed(list(poly)):
        R = _mat_add(_mat_mul(R, module.D, mod), tuple(tuple(c * x for x in row) for row in I), mod)
        R = _reduce_rows(R, mod)
    return R


def apply_poly(module: PGroupModule, element, poly):
    """poly(sigma - 1) applied to an element, by Horner's rule."""
    v = module.reduce(element)
    acc = module.zero()
    for c in reversed(list(poly)):
        acc = module.act(acc)
        acc = tuple((a + c * x) % q for a, x, q in zip(acc, v, module.moduli))
    return acc


def nu_matrix(module: PGroupModule, method: str = "sum"):
    """nu = sum_{i < p^N} M^i, either summed directly ("sum") or as the norm polynomial in D ("poly")."""
    mod = module.moduli
    r = module.rank
    if method == "poly":
        if module.N == 0:
            return _identity(r, mod)
        return endomorphism_poly(module, build_nu(module.p, module.N).ints())
    if method != "sum":
        raise ValueError(f"unknown method {method!r}")
    # S_(p q) = S_q (I + M^q + ... + M^((p-1) q))
    S = _identity(r, mod)
    Mq = module.M
    for _ in range(module.N):
        block = _identity(r, mod)
        P = _identity(r, mod)
        for _ in range(module.p - 1):
            P = _mat_mul(P, Mq, mod)
            block = _mat_add(block, P, mod)
        S = _mat_mul(S, block, mod)
        Mq = _mat_mul(P, Mq, mod)
    return S


# kernels --------------------------------------------------------------------

def _all_elements(module: PGroupModule):
    grids = np.meshgrid(*[np.arange(q, dtype=np.int64) for q in module.moduli], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def kernel_elements(module: PGroupModule, E) -> set:
    """Brute-force kernel of v -> v.E: all elements, as tuples."""
    if module.rank == 0:
        return {()}
    if module.size > ENUMERATION_LIMIT:
        raise ModuleError(f"module of order {module.size} too large to enumerate")
    X = _all_elements(module)
    mod = np.array(module.moduli, dtype=object if max(module.moduli) ** 2 * module.rank >= 2**62 else np.int64)
    Y = X.astype(mod.dtype) @ np.array(E, dtype=mod.dtype)
    mask = np.all(Y % mod == 0, axis=1)
    return {tuple(int(x) for x in row) for row in X[mask]}


def _val(x, p):
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def howell_form(rows, p, k):
    """Reduced Howell form over Z/p^k of the span of the given rows.

    Pivots are normalized to powers of p. The span order is the product of
    p^(k - v) over pivot valuations v.
    """
    q = p**k
    pool = [[x % q for x in row] for row in rows]
    pool = [row for row in pool if any(row)]
    if not pool:
        return []
    ncols = len(pool[0])
    out = []
    for col in range(ncols):
        best, bestv = None, None
        for idx, row in enumerate(pool):
            if row[col]:
                v = _val(row[col], p)
                if bestv is None or v < bestv:
                    best, bestv = idx, v
        if best is None:
            continue
        piv = pool.pop(best)
        pv = p**bestv
        inv = pow(piv[col] // pv, -1, q)
        piv = [x * inv % q for x in piv]
        nxt = []
        for row in pool:
            if row[col]:
                f = row[col] // pv
                row = [(a - f * b) % q for a, b in zip(row, piv)]
            if any(row):
                nxt.append(row)
        if bestv:
            extra = [x * p ** (k - bestv) % q for x in piv]
            if any(extra):
                nxt.append(extra)
        pool = nxt
        for i, row in enumerate(out):
            f = row[col] // pv
            if f:
                out[i] = [(a - f * b) % q for a, b in zip(row, piv)]
        out.append(piv)
    return out


def _pivot_valuations(form, p):
    vals = []
    for row in form:
        lead = next(x for x in row if x)
        vals.append(_val(lead, p))
    return vals


def span_order(rows, p, k) -> int:
    """p-exponent of the order of the subgroup of (Z/p^k)^c spanned by rows."""
    return sum(k - v for v in _pivot_valuations(howell_form(rows, p, k), p))


def _lift(module, E):
    """Scale column t by p^(n_1 - n_t): H embeds in (Z/p^n_1)^r."""
    n1 = module.orders[0]
    return [[E[j][t] * module.p ** (n1 - module.orders[t]) for t in range(module.rank)] for j in range(len(E))]


def kernel_generators(module: PGroupModule, E):
    """Generators of ker(v -> v.E) via Howell form of [E' | I] over Z/p^n_1."""
    r = module.rank
    if r == 0:
        return []
    n1 = module.orders[0]
    Ep = _lift(module, E)
    aug = [Ep[j] + [1 if t == j else 0 for t in range(r)] for j in range(r)]
    form = howell_form(aug, module.p, n1)
    gens = []
    for row in form:
        if not any(row[:r]):
            g = module.reduce(row[r:])
            if any(g):
                gens.append(g)
    return gens


def kernel_order(module: PGroupModule, E, method: str = "auto") -> int:
    """p-exponent of #ker(E)."""
    if module.rank == 0:
        return 0
    if method == "auto":
        method = "enumerate" if module.size <= ENUMERATION_LIMIT else "echelon"
    if method == "enumerate":
        return _val(len(kernel_elements(module, E)), module.p)
    if method != "echelon":
        raise ValueError(f"unknown method {method!r}")
    # #ker = q^r / #image(E'), then divide out the lattice of the p^n_j e_j
    n1 = module.orders[0]
    image = span_order(_lift(module, E), module.p, n1)
    lattice = sum(n1 - n for n in module.orders)
    return n1 * module.rank - image - lattice


def subgroup_elements(module: PGroupModule, gens) -> set:
    """All elements of the subgroup generated by gens (closure under addition)."""
    mod = module.moduli
    seen = {module.zero()}
    frontier = [module.zero()]
    gens = [module.reduce(g) for g in gens]
    while frontier:
        nxt = []
        for v in frontier:
            for g in gens:
                w = tuple((a + b) % q for a, b, q in zip(v, g, mod))
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return seen


def subgroup_valuation(module: PGroupModule, vectors) -> int:
    """p-exponent of the order of the subgroup generated by the vectors."""
    if module.rank == 0 or not vectors:
        return 0
    return span_order(_lift(module, [module.reduce(v) for v in vectors]), module.p, module.orders[0])


# filtration and invariants --------------------------------------------------

@dataclass(frozen=True)
class Filtration:
    """H^i = ker((sigma-1)^i) for i = 0..m, orders as p-exponents."""

    p: int
    subgroup_orders: tuple  # v_p #H^i
    quotient_orders: tuple  # v_p #(H^(i+1)/H^i)
    m: int


def filtration(module: PGroupModule, method: str = "auto") -> Filtration:
    total = module.log_order
    subs = [0]
    A = _identity(module.rank, module.moduli)
    while subs[-1] < total:
        if len(subs) > total + 1:
            raise ModuleError("sigma - 1 is not nilpotent")
        A = _mat_mul(A, module.D, module.moduli)
        subs.append(kernel_order(module, A, method))
    quots = tuple(b - a for a, b in zip(subs, subs[1:]))
    return Filtration(module.p, tuple(subs), quots, len(subs) - 1)


@dataclass(frozen=True)
class ModuleInvariants:
    p: int
    order: int  # v_p #H
    p_rank: int
    e: int
    m: int
    s: int | None  # None for the trivial module


def invariants(module: PGroupModule, method: str = "auto") -> ModuleInvariants:
    m = filtration(module, method).m
    e = module.orders[0] if module.orders else 0
    s = int_log(m, module.p) if m >= 1 else None
    return ModuleInvariants(module.p, module.log_order, sum(1 for n in module.orders if n >= 1), e, m, s)


def element_invariants(module: PGroupModule, element):
    """(m, e) of a single element: nilpotency length of D on it and its order exponent."""
    v = module.reduce(element)
    e = 0
    for x, n in zip(v, module.orders):
        if x:
            e = max(e, n - _val(x, module.p))
    m = 0
    while any(v):
        v = module.act(v)
        m += 1
        if m > module.log_order + 1:
            raise ModuleError("sigma - 1 is not nilpotent")
    return m, e


# verdicts -------------------------------------------------------------------

class Kind(Enum):
    COMPLETE = "Complete"
    PARTIAL = "Partial"
    NONE = "None"


class Rule(Enum):
    NU_ANNIHILATION = "NuAnnihilation"
    SMOOTH_CRITERION = "SmoothCriterion"
    STABILITY_CRITERION = "StabilityCriterion"
    INGESTED_NORMS = "IngestedNorms"


_PHRASE = {Kind.COMPLETE: "Complete", Kind.PARTIAL: "Incomplete", Kind.NONE: "No"}


def verdict_line(kind: Kind, n: int, m: int, e: int) -> str:
    return f"{_PHRASE[kind]} capitulation, m(K{n})={m}, e(K{n})={e}"


@dataclass(frozen=True)
class CapitulationVerdict:
    """Outcome for H_K in the layer.

    image_order is v_p of the subgroup generated by the witnesses, which is
    J(H_K). When the base order is known, kernel_order = v_p #H_K - image_order
    is the capitulation kernel.
    """

    kind: Kind
    rule: Rule
    witnesses: tuple = ()
    image_order: int | None = None
    kernel_order: int | None = None


def classify(image_order: int, base_valuation: int | None) -> Kind:
    if image_order == 0:
        return Kind.COMPLETE
    if base_valuation is not None and image_order >= base_valuation:
        return Kind.NONE
    return Kind.PARTIAL


def _verdict_from_witnesses(module, witnesses, base_valuation, rule):
    a = subgroup_valuation(module, witnesses)
    kernel = None if base_valuation is None else max(base_valuation - a, 0)
    return CapitulationVerdict(classify(a, base_valuation), rule, tuple(witnesses), a, kernel)


def nu_image(module: PGroupModule, base_valuation: int | None = None, method: str = "sum") -> CapitulationVerdict:
    S = nu_matrix(module, method)
    return _verdict_from_witnesses(module, [tuple(row) for row in S], base_valuation, Rule.NU_ANNIHILATION)


def verdict_from_norms(module: PGroupModule, norms, base_valuation=None) -> CapitulationVerdict:
    """Verdict read off printed norm vectors instead of recomputing them."""
    return _verdict_from_witnesses(module, [module.reduce(v) for v in norms], base_valuation, Rule.INGESTED_NORMS)


def check_sufficient_criterion(module: PGroupModule, method: str = "auto") -> CapitulationVerdict | None:
    """Complete when (m, e) is of smooth complexity for N; None means the criterion is silent."""
    inv = invariants(module, method)
    if is_smooth(inv.m, inv.e, module.N, module.p):
        return CapitulationVerdict(Kind.COMPLETE, Rule.SMOOTH_CRITERION, image_order=0, kernel_order=None)
    return None


def analyze(module: PGroupModule, base_valuation: int | None = None) -> CapitulationVerdict:
    """Sufficient criterion first, then the nu-image."""
    v = check_sufficient_criterion(module)
    if v is not None:
        if base_valuation is not None:
            v = CapitulationVerdict(v.kind, v.rule, v.witnesses, 0, base_valuation)
        return v
    return nu_image(module, base_valuation)


def element_capitulates(module: PGroupModule, element) -> bool:
    m, e = element_invariants(module, element)
    if is_smooth(m, e, module.N, module.p):
        return True
    S = nu_matrix(module)
    return not any(module.act(module.reduce(element), S))


def quotient_mod_pt(module: PGroupModule, t: int) -> PGroupModule:
    """H / H^(p^t): orders capped at t, trivial generators dropped."""
    if t < 1:
        raise ValueError("t must be positive")
    orders = [min(n, t) for n in module.orders]
    D = [[module.D[j][u] % module.p ** orders[u] for u in range(module.rank)] for j in range(module.rank)]
    return PGroupModule(module.p, tuple(orders), tuple(tuple(row) for row in D), module.N)
