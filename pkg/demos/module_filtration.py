"""
Filtration and capitulation of a single layer
==============================================

A layer is a finite abelian p-group H with generators h_j of order p^n_j
and the action of sigma - 1 written as a matrix D (row j is the image of
h_j). The filtration H^i = ker((sigma - 1)^i) has length m. The base
classes capitulate completely when nu kills H.
"""

from pathlib import Path

from capnorm.ingest import load
from capnorm.pmodule import check_sufficient_criterion, filtration, invariants, make_module, nu_image, nu_matrix

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "transcripts"

# layer 1 over the cubic field of conductor 1951, ell = 17
tower = load((FIXTURES / "f1951_l17.txt").read_text())
layer = tower.layer(1)
mod = layer.module
print("generator orders (p-exponents):", mod.orders)
print("sigma - 1 rows:", mod.D)

filt = filtration(mod)
print("v_p #H^i:", filt.subgroup_orders, " m =", filt.m)
inv = invariants(mod)
print("e =", inv.e, " s =", inv.s)

# the smooth criterion needs e <= N - s, which fails here since N = 1
print("criterion:", check_sufficient_criterion(mod))

# so we compute nu directly; its image is J(H_K)
v = nu_image(mod, tower.base_order)
print("verdict:", v.kind.value, "via", v.rule.value, " kernel p^%d" % v.kernel_order)
print("printed:", layer.verdicts[0])

# a hand-made module: Z/8 with sigma acting as multiplication by 3
mod = make_module(2, [3], [[2]], N=2)
print("\nZ/8, sigma = 3:", filtration(mod).subgroup_orders, "nu =", nu_matrix(mod))
