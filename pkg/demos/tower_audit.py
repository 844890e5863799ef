"""
Auditing a tower of class groups
================================

Given the p-class groups along K_1, K_2, ..., the tower module checks the
printed norms, finds a stability index (two equal consecutive orders),
derives the capitulation schedule that stability forces, and fits the
Iwasawa law lambda n + mu p^n + nu on the last layers.
"""

from pathlib import Path

from capnorm.ingest import load
from capnorm.tower import analyze_tower, grandet_jaulent_check, growth_table

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "transcripts"

# orders grow regularly: 2, 4, 6, 8
rep = analyze_tower(load((FIXTURES / "f703_l17.txt").read_text()))
print("orders:", rep.tower.order_sequence())
for lr in rep.layers:
    print(f"  K{lr.n}: {lr.verdict.kind.value:9s} m={lr.invariants.m} e={lr.invariants.e}")
print("fit:", rep.fit.lam, rep.fit.mu, rep.fit.nu, "residuals", [str(r) for r in rep.fit.residuals])

# orders stop growing between K2 and K3: stability
tower = load((FIXTURES / "f2689_l2.txt").read_text())
rep = analyze_tower(tower)
print("\norders:", tower.order_sequence(), " stability index:", rep.stability)
print("schedule (e, layer):", rep.prediction.schedule, " complete in K%d" % rep.prediction.complete_layer)
print("type check with lambda=1:", bool(grandet_jaulent_check(tower, 1)))

# the growth inequality #H_(n+h) >= #H_n * #H_n[p^h]
tower = load((FIXTURES / "im199_l19.txt").read_text())
for row in growth_table(tower.order_sequence(), tower.structures()):
    print(f"n={row.n} h={row.h}: p^{row.lhs} vs p^{row.rhs}  slack {row.slack}")
