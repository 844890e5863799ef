from __future__ import annotations

import random
from pathlib import Path

import pytest

from capnorm.pmodule import PGroupModule, _identity, _mat_add, _mat_mul, make_module

FIXTURES = Path(__file__).parent / "fixtures"
TRANSCRIPTS = FIXTURES / "transcripts"
CORPUS = FIXTURES / "corpus"
GOLDEN_NU = FIXTURES / "golden_nu"

# per-criterion results collected by test_acceptance, printed at the end
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def read_fixture(name: str) -> str:
    return (TRANSCRIPTS / name).read_text()


def _sigma_log_order(p: int, D, moduli) -> int:
    """Smallest k with (I + D)^(p^k) = I."""
    n = len(D)
    M = _mat_add(_identity(n, moduli), D, moduli)
    ident = _identity(n, moduli)
    k = 0
    while M != ident:
        P = M
        for _ in range(p - 1):
            P = _mat_mul(P, M, moduli)
        M = P
        k += 1
    return k


def random_module(rng: random.Random, p: int, max_log: int, N: int | None = None) -> PGroupModule:
    """Random valid module with at most p^max_log elements.

    D = p R + U with U strictly upper triangular, so sigma is unipotent mod p.
    Entries below the diagonal carry the extra power of p that well-definedness
    needs. Generators of equal order are shuffled afterwards.
    """
    total = rng.randint(1, max_log)
    orders = []
    left = total
    while left:
        n = rng.randint(1, left)
        orders.append(n)
        left -= n
    orders.sort(reverse=True)
    r = len(orders)
    moduli = [p**n for n in orders]
    D = [[0] * r for _ in range(r)]
    for j in range(r):
        for t in range(r):
            if j < t:
                x = rng.randrange(moduli[t])
            else:
                need = max(1, orders[t] - orders[j])
                x = p**need * rng.randrange(moduli[t]) if need < orders[t] else 0
            D[j][t] = x % moduli[t]
    perm = list(range(r))
    for n in set(orders):
        idx = [i for i in range(r) if orders[i] == n]
        shuffled = idx[:]
        rng.shuffle(shuffled)
        for a, b in zip(idx, shuffled):
            perm[a] = b
    D = [[D[perm[j]][perm[t]] for t in range(r)] for j in range(r)]
    k = max(1, _sigma_log_order(p, D, moduli))
    return make_module(p, orders, D, k if N is None else max(N, k))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20261016)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for i in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[i]
        terminalreporter.write_line(f"criterion {i}: {'PASS' if ok else 'FAIL'}  {detail}")
