"""
Multi-layer analysis of a tower K = K_0 c K_1 c ... c K_N.

Everything here works with p-exponents of orders ("valuations"); raw
orders are never multiplied out.

>>> stability_index([4, 6, 6, 6])
1
>>> fit = iwasawa_fit([2, 4, 6, 8], 2)
>>> (fit.lam, fit.mu, fit.nu)
(Fraction(2, 1), Fraction(0, 1), Fraction(2, 1))
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import CapnormError, IngestError
from .pmodule import (
    CapitulationVerdict,
    Kind,
    ModuleInvariants,
    PGroupModule,
    Rule,
    analyze,
    classify,
    invariants,
    nu_matrix,
    span_order,
)

__all__ = [
    "GenusLedger",
    "GrowthRow",
    "IwasawaFit",
    "LayerRecord",
    "LedgerCheck",
    "NormCheck",
    "StabilityPrediction",
    "TowerData",
    "TowerReport",
    "analyze_tower",
    "chevalley_herbrand",
    "genus_ledger_check",
    "grandet_jaulent_check",
    "growth_table",
    "iwasawa_fit",
    "layer_verdict",
    "nocap_growth_check",
    "predict_from_stability",
    "stability_index",
    "torsion_valuation",
    "validate_tower",
    "verify_norm_vectors",
]


@dataclass(frozen=True)
class LayerRecord:
    """Data for K_n. module is None for structure-only layers (orders known, no sigma)."""

    n: int
    orders: tuple
    module: PGroupModule | None = None
    printed_norms: tuple | None = None
    label: str = ""
    verdicts: tuple = ()  # printed verdict lines, verbatim
    printed_powers: tuple = ()  # (i, j, vector) rows of (S-1)^i for i >= 2, j 0-based

    @property
    def order(self) -> int:
        return sum(self.orders)


@dataclass(frozen=True)
class TowerData:
    p: int
    N: int
    ell: int | None
    r: int | None
    base_orders: tuple
    layers: tuple
    tag: str = ""

    @property
    def base_order(self) -> int:
        return sum(self.base_orders)

    @property
    def e_base(self) -> int:
        return max(self.base_orders, default=0)

    def layer(self, n: int) -> LayerRecord:
        for rec in self.layers:
            if rec.n == n:
                return rec
        raise CapnormError(f"no layer {n} in tower")

    def order_sequence(self) -> list[int]:
        """[v_p #H_K, v_p #H_K1, ...]."""
        return [self.base_order] + [rec.order for rec in self.layers]

    def structures(self) -> list[tuple]:
        return [tuple(self.base_orders)] + [tuple(rec.orders) for rec in self.layers]


def validate_tower(tower: TowerData) -> TowerData:
    ns = [rec.n for rec in tower.layers]
    if ns != list(range(1, len(ns) + 1)):
        raise IngestError(f"layer indices must run 1, 2, ... without gaps, got {ns}")
    if tower.N < len(ns):
        raise IngestError(f"N={tower.N} is below the highest layer {len(ns)}")
    for rec in tower.layers:
        if rec.module is not None:
            if rec.module.p != tower.p:
                raise IngestError(f"layer {rec.n} uses p={rec.module.p}, tower uses p={tower.p}")
            if tuple(rec.module.orders) != tuple(rec.orders):
                raise IngestError(f"layer {rec.n}: module orders disagree with the structure")
            if rec.module.N != rec.n:
                raise IngestError(f"layer {rec.n}: sigma must have order dividing p^{rec.n}")
        if rec.printed_norms is not None and len(rec.printed_norms) != len(rec.orders):
            raise IngestError(f"layer {rec.n}: {len(rec.printed_norms)} norm vectors for {len(rec.orders)} generators")
    seq = tower.order_sequence()
    for i in range(1, len(seq)):
        if seq[i] < seq[i - 1]:
            raise IngestError(
                f"v_p #H_K{i} = {seq[i]} < v_p #H_K{i - 1} = {seq[i - 1]}: "
                "orders along the tower must be non-decreasing (increasing-order law)"
            )
    return tower


# stability --------------------------------------------------------------------

def _orders(t) -> list[int]:
    return t.order_sequence() if isinstance(t, TowerData) else list(t)


def stability_index(tower) -> int | None:
    """Smallest n0 with #H_K(n0+1) = #H_K(n0); None if orders grow throughout."""
    seq = _orders(tower)
    for n in range(len(seq) - 1):
        if seq[n + 1] == seq[n]:
            return n
    return None


@dataclass(frozen=True)
class StabilityPrediction:
    n0: int
    e_base: int
    schedule: tuple  # ((e, layer), ...): H_K[p^e] capitulates in K_layer
    complete_layer: int | None  # None when n0 + e(K) lies beyond the tower
    verdict: CapitulationVerdict | None
    caveat: str = (
        "stability is read off class-group orders; for logarithmic class groups "
        "stability can be fake without a ramification condition this tool cannot check"
    )


def predict_from_stability(tower: TowerData) -> StabilityPrediction | None:
    n0 = stability_index(tower)
    if n0 is None:
        return None
    eK = tower.e_base
    schedule = tuple((e, n0 + e) for e in range(1, eK + 1))
    target = n0 + eK
    if target <= tower.N:
        verdict = CapitulationVerdict(Kind.COMPLETE, Rule.STABILITY_CRITERION, image_order=0, kernel_order=tower.base_order)
        return StabilityPrediction(n0, eK, schedule, target, verdict)
    return StabilityPrediction(n0, eK, schedule, None, None)


# norms ------------------------------------------------------------------------

@dataclass(frozen=True)
class NormCheck:
    n: int
    status: str  # "match", "mismatch" or "skipped"
    mismatches: tuple = ()  # (j, printed, computed), j 1-based
    note: str = ""


def verify_norm_vectors(tower: TowerData) -> list[NormCheck]:
    out = []
    for rec in tower.layers:
        if rec.printed_norms is None:
            out.append(NormCheck(rec.n, "skipped", note="no printed norms"))
            continue
        if rec.module is None:
            out.append(NormCheck(rec.n, "skipped", note="no action data"))
            continue
        mod = rec.module
        if len(rec.printed_norms) != mod.rank:
            raise CapnormError(f"layer {rec.n}: {len(rec.printed_norms)} printed norms for rank {mod.rank}")
        S = nu_matrix(mod)
        bad = []
        for j, printed in enumerate(rec.printed_norms):
            got = tuple(S[j])
            if mod.reduce(printed) != got:
                bad.append((j + 1, tuple(printed), got))
        out.append(NormCheck(rec.n, "mismatch" if bad else "match", tuple(bad)))
    return out


def _norm_verdict(p, orders, norms, base):
    if not orders:
        return CapitulationVerdict(Kind.COMPLETE, Rule.INGESTED_NORMS, (), 0, base)
    k = orders[0]
    rows = [[v[t] * p ** (k - orders[t]) for t in range(len(orders))] for v in norms]
    a = span_order(rows, p, k)
    kernel = None if base is None else max(base - a, 0)
    return CapitulationVerdict(classify(a, base), Rule.INGESTED_NORMS, tuple(map(tuple, norms)), a, kernel)


def layer_verdict(tower: TowerData, rec: LayerRecord) -> CapitulationVerdict | None:
    """Criterion, then nu-image; printed norms only when sigma is unknown."""
    base = tower.base_order
    if rec.module is not None:
        return analyze(rec.module, base)
    if rec.printed_norms is not None:
        return _norm_verdict(tower.p, rec.orders, rec.printed_norms, base)
    return None


# Chevalley-Herbrand and the genus ledger -------------------------------------

def chevalley_herbrand(hK: int, r: int, n: int, norm_index: int) -> int:
    """v_p #H^G for K_n/K: hK + n(r-1) - norm_index."""
    if min(hK, n, norm_index) < 0 or r < 1:
        raise CapnormError("chevalley_herbrand needs hK, n, norm_index >= 0 and r >= 1")
    if norm_index > n * (r - 1):
        raise CapnormError(f"norm index p^{norm_index} exceeds #G^(r-1) = p^{n * (r - 1)}")
    return hK + n * (r - 1) - norm_index


@dataclass(frozen=True)
class GenusLedger:
    """Valuations entering #(J(H_K).H^ram) * #(E_K/N(E_L)) = #H_K * p^(n(r-1)).

    jram_order is v_p of the product subgroup J(H_K).H^ram when known;
    otherwise j_image + ram_order is used, which over-counts when the two
    subgroups meet.
    """

    hK: int
    ram_order: int
    unit_quotient: int
    norm_index: int
    n: int
    r: int
    j_image: int = 0
    jram_order: int | None = None


@dataclass(frozen=True)
class LedgerCheck:
    ok: bool
    residual: int  # lhs - rhs
    lhs: int
    rhs: int
    note: str = ""

    def __bool__(self):
        return self.ok


def genus_ledger_check(ledger: GenusLedger) -> LedgerCheck:
    vals = [ledger.hK, ledger.ram_order, ledger.unit_quotient, ledger.norm_index, ledger.n, ledger.j_image]
    if min(vals) < 0 or ledger.r < 1:
        raise CapnormError("ledger components must be non-negative and r >= 1")
    rhs = ledger.hK + ledger.n * (ledger.r - 1)
    if ledger.jram_order is not None:
        lhs = ledger.jram_order + ledger.unit_quotient
        note = ""
    else:
        lhs = ledger.j_image + ledger.ram_order + ledger.unit_quotient
        note = "J(H_K) and H^ram entered separately; their sum over-counts if they intersect"
    return LedgerCheck(lhs == rhs, lhs - rhs, lhs, rhs, note)


# growth ------------------------------------------------------------------------

def torsion_valuation(structure: Sequence[int], h: int) -> int:
    """v_p #X[p^h] for X of type (p^n_1, ..., p^n_r)."""
    return sum(min(n, h) for n in structure)


@dataclass(frozen=True)
class GrowthRow:
    n: int
    h: int
    lhs: int  # v_p #X_(n+h)
    rhs: int  # v_p #X_n + v_p #X_n[p^h]

    @property
    def slack(self) -> int:
        return self.lhs - self.rhs


def growth_table(orders: Sequence[int], torsion) -> list[GrowthRow]:
    """All rows of #X_(n+h) >= #X_n * #X_n[p^h].

    torsion is either a callable (n, h) -> v_p #X_n[p^h] or a list of
    structures (exponent lists) indexed by n.
    """
    if not callable(torsion):
        structs = list(torsion)
        torsion = lambda n, h: torsion_valuation(structs[n], h)  # noqa: E731
    rows = []
    for n in range(len(orders) - 1):
        for h in range(1, len(orders) - n):
            rows.append(GrowthRow(n, h, orders[n + h], orders[n] + torsion(n, h)))
    return rows


def nocap_growth_check(orders: Sequence[int], torsion) -> list[GrowthRow]:
    """Violations of the growth inequality. A violation certifies capitulation somewhere."""
    if len(orders) < 2:
        raise CapnormError("need at least two orders")
    return [row for row in growth_table(orders, torsion) if row.slack < 0]


# Iwasawa ------------------------------------------------------------------------

@dataclass(frozen=True)
class IwasawaFit:
    lam: Fraction
    mu: Fraction
    nu: Fraction
    residuals: tuple  # observed - fitted, per layer
    start: int = 0

    @property
    def exact(self) -> bool:
        return all(r == 0 for r in self.residuals)

    @property
    def integral(self) -> bool:
        return all(x.denominator == 1 for x in (self.lam, self.mu, self.nu))

    @property
    def nonnegative(self) -> bool:
        return self.lam >= 0 and self.mu >= 0

    def flags(self) -> list[str]:
        out = []
        if not self.integral:
            out.append("non-integral parameters")
        if not self.nonnegative:
            out.append("negative lambda or mu")
        if not self.exact:
            out.append("nonzero residuals on earlier layers")
        return out


def _solve3(A, b):
    A = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(A, b)]
    for c in range(3):
        piv = next((i for i in range(c, 3) if A[i][c] != 0), None)
        if piv is None:
            raise CapnormError("singular system in iwasawa_fit")
        A[c], A[piv] = A[piv], A[c]
        for i in range(3):
            if i != c and A[i][c] != 0:
                f = A[i][c] / A[c][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return [A[i][3] / A[i][i] for i in range(3)]


def iwasawa_fit(orders: Sequence[int], p: int, start: int = 0) -> IwasawaFit:
    """Solve lambda n + mu p^n + nu exactly on the last three layers.

    orders[i] is v_p #H_(K_(start+i)). Residuals cover every layer.
    """
    if len(orders) < 3:
        raise CapnormError("iwasawa_fit needs at least three layers")
    ns = [start + i for i in range(len(orders))]
    lam, mu, nu = _solve3([[n, p**n, 1] for n in ns[-3:]], orders[-3:])
    residuals = tuple(Fraction(o) - (lam * n + mu * p**n + nu) for n, o in zip(ns, orders))
    return IwasawaFit(lam, mu, nu, residuals, start)


@dataclass(frozen=True)
class GJResult:
    ok: bool
    rows: tuple  # (n, expected type, actual type)

    def __bool__(self):
        return self.ok


def grandet_jaulent_check(tower: TowerData, lam: int) -> GJResult:
    """Does type(H_Kn) = type(H_K) + (Z/p^n)^lambda hold on every layer?"""
    rows = []
    ok = True
    for rec in tower.layers:
        expected = tuple(sorted(list(tower.base_orders) + [rec.n] * int(lam), reverse=True))
        actual = tuple(sorted(rec.orders, reverse=True))
        ok = ok and expected == actual
        rows.append((rec.n, expected, actual))
    return GJResult(ok, tuple(rows))


# full report ------------------------------------------------------------------

@dataclass(frozen=True)
class LayerReport:
    n: int
    order: int
    invariants: ModuleInvariants | None
    verdict: CapitulationVerdict | None
    printed: str | None


@dataclass(frozen=True)
class TowerReport:
    tower: TowerData
    layers: tuple
    stability: int | None
    prediction: StabilityPrediction | None
    norm_checks: tuple
    growth: tuple
    fit: IwasawaFit | None
    ledgers: tuple = field(default=())


def analyze_tower(tower: TowerData, ledgers: Sequence[GenusLedger] = ()) -> TowerReport:
    layers = []
    for rec in tower.layers:
        inv = invariants(rec.module) if rec.module is not None else None
        layers.append(LayerReport(rec.n, rec.order, inv, layer_verdict(tower, rec), rec.verdicts[0] if rec.verdicts else None))
    seq = tower.order_sequence()
    fit = iwasawa_fit(seq, tower.p) if len(seq) >= 3 else None
    return TowerReport(
        tower,
        tuple(layers),
        stability_index(tower),
        predict_from_stability(tower),
        tuple(verify_norm_vectors(tower)),
        tuple(growth_table(seq, tower.structures())),
        fit,
        tuple((lg, genus_ledger_check(lg)) for lg in ledgers),
    )
