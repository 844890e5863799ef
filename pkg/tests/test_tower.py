from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from capnorm.errors import CapnormError, IngestError
from capnorm.ingest import load
from capnorm.pmodule import Kind, Rule
from capnorm.tower import (
    GenusLedger,
    LayerRecord,
    TowerData,
    analyze_tower,
    chevalley_herbrand,
    genus_ledger_check,
    grandet_jaulent_check,
    growth_table,
    iwasawa_fit,
    nocap_growth_check,
    predict_from_stability,
    stability_index,
    torsion_valuation,
    validate_tower,
    verify_norm_vectors,
)
from conftest import CORPUS, read_fixture


def structure_tower(p, base, layers, N=None):
    recs = tuple(LayerRecord(n, tuple(o)) for n, o in enumerate(layers, 1))
    return TowerData(p, N or len(layers), None, None, tuple(base), recs)


def test_stability_index():
    assert stability_index([2, 4, 6, 6]) == 2
    assert stability_index([2, 2]) == 0
    assert stability_index([1, 2, 3]) is None


def test_stability_prediction_f2689():
    tower = load(read_fixture("f2689_l2.txt"))
    pred = predict_from_stability(tower)
    assert pred.n0 == 2
    assert pred.schedule == ((1, 3),)
    assert pred.complete_layer == 3
    assert pred.verdict.rule is Rule.STABILITY_CRITERION
    # the printed verdict in K3 agrees
    assert tower.layer(3).verdicts[0].startswith("Complete capitulation")
    assert "fake" in pred.caveat


def test_stability_prediction_f6247():
    # printed: "Complete capitulation in K3 (stability from K1)"
    tower = load((CORPUS / "f6247_l17.txt").read_text())
    pred = predict_from_stability(tower)
    assert pred.n0 == 1 and pred.e_base == 2
    assert pred.schedule == ((1, 2), (2, 3))
    # K3 is beyond the two printed layers
    assert pred.complete_layer is None


def test_no_stability():
    assert predict_from_stability(load(read_fixture("f703_l17.txt"))) is None


def test_validate_decreasing_orders():
    tower = structure_tower(2, (2, 2), [(2, 2), (2,)], N=2)
    with pytest.raises(IngestError, match="increasing-order law"):
        validate_tower(tower)


def test_validate_gaps_and_N():
    recs = (LayerRecord(2, (1,)),)
    with pytest.raises(IngestError, match="without gaps"):
        validate_tower(TowerData(2, 3, None, None, (1,), recs))
    with pytest.raises(IngestError, match="below the highest layer"):
        validate_tower(structure_tower(2, (1,), [(1,), (1,)], N=1))


def test_norm_vectors_f31923():
    tower = load(read_fixture("f31923_l257.txt"))
    checks = verify_norm_vectors(tower)
    assert all(c.status == "match" for c in checks)
    assert tuple(tower.layer(1).printed_norms[2]) == (0, 1, 0, 0, 1, 0)


def test_norm_vectors_skipped_without_action():
    tower = load(read_fixture("im2_l257.txt"))
    assert {c.status for c in verify_norm_vectors(tower)} == {"skipped"}


def test_chevalley_herbrand():
    assert chevalley_herbrand(2, 3, 1, 1) == 3
    assert chevalley_herbrand(0, 1, 5, 0) == 0
    with pytest.raises(CapnormError):
        chevalley_herbrand(1, 2, 1, 2)
    with pytest.raises(CapnormError):
        chevalley_herbrand(-1, 2, 1, 0)


def test_genus_ledger_balanced():
    lg = GenusLedger(hK=2, ram_order=1, unit_quotient=1, norm_index=1, n=1, r=2, jram_order=2)
    chk = genus_ledger_check(lg)
    assert chk.ok and chk.residual == 0 and not chk.note


def test_genus_ledger_overcount():
    # entered separately, the two subgroups may meet, giving a positive residual
    lg = GenusLedger(hK=1, ram_order=1, unit_quotient=0, norm_index=0, n=1, r=1, j_image=1)
    chk = genus_ledger_check(lg)
    assert not chk.ok and chk.residual == 1 and "over-counts" in chk.note


def test_genus_ledger_rejects_negative():
    with pytest.raises(CapnormError):
        genus_ledger_check(GenusLedger(hK=-1, ram_order=0, unit_quotient=0, norm_index=0, n=1, r=1))


def test_torsion_valuation():
    assert torsion_valuation((3, 1), 1) == 2
    assert torsion_valuation((3, 1), 2) == 3
    assert torsion_valuation((), 4) == 0


def test_growth_im199_equality():
    # #H_K1 = #H_K * #H_K[3] for x^2+199, l=19
    tower = load(read_fixture("im199_l19.txt"))
    rows = growth_table(tower.order_sequence(), tower.structures())
    first = next(r for r in rows if (r.n, r.h) == (0, 1))
    assert first.slack == 0
    assert not nocap_growth_check(tower.order_sequence(), tower.structures())


def test_growth_violation_detected():
    # orders flat while the base has torsion: growth inequality fails
    bad = nocap_growth_check([1, 1], [(1,), (1,)])
    assert [(r.n, r.h, r.slack) for r in bad] == [(0, 1, -1)]


def test_growth_callable_torsion():
    rows = growth_table([0, 1, 2], lambda n, h: 0)
    assert all(r.slack >= 0 for r in rows)
    with pytest.raises(CapnormError):
        nocap_growth_check([1], [(1,)])


@given(
    st.integers(0, 5), st.integers(0, 3), st.integers(-5, 20),
    st.sampled_from([2, 3, 5]), st.integers(0, 3), st.integers(3, 6),
)
def test_iwasawa_fit_recovers_parameters(lam, mu, nu, p, start, length):
    orders = [lam * n + mu * p**n + nu for n in range(start, start + length)]
    fit = iwasawa_fit(orders, p, start)
    assert (fit.lam, fit.mu, fit.nu) == (lam, mu, nu)
    assert fit.exact and fit.integral and not fit.flags()


def test_iwasawa_fit_f703():
    fit = iwasawa_fit(load(read_fixture("f703_l17.txt")).order_sequence(), 2)
    assert (fit.lam, fit.mu, fit.nu) == (2, 0, 2)
    assert all(r == 0 for r in fit.residuals)


def test_iwasawa_fit_constant_and_flagged():
    fit = iwasawa_fit([4, 4, 4], 3)
    assert (fit.lam, fit.mu, fit.nu) == (0, 0, 4)
    fit = iwasawa_fit([0, 1, 3, 4], 2)
    # solve on the last three layers and substitute back
    for n, o in zip(range(1, 4), [1, 3, 4]):
        assert fit.lam * n + fit.mu * 2**n + fit.nu == o
    assert not fit.exact and fit.residuals[0] != 0
    assert "nonzero residuals on earlier layers" in fit.flags()
    assert "negative lambda or mu" in fit.flags()
    assert isinstance(fit.lam, Fraction)
    with pytest.raises(CapnormError):
        iwasawa_fit([1, 2], 2)


def test_grandet_jaulent():
    ok = structure_tower(2, (1,), [(1, 1), (2, 1)])
    assert grandet_jaulent_check(ok, 1)
    assert grandet_jaulent_check(structure_tower(2, (), [(), ()]), 0)
    res = grandet_jaulent_check(load(read_fixture("f2689_l2.txt")), 1)
    assert not res
    assert res.rows[0] == (1, (1, 1, 1), (2, 2))


def test_analyze_tower_report():
    rep = analyze_tower(load(read_fixture("f703_l17.txt")))
    assert [lr.verdict.kind for lr in rep.layers] == [Kind.NONE] * 3
    assert [lr.invariants.m for lr in rep.layers] == [2, 3, 4]
    assert rep.stability is None and rep.prediction is None
    assert rep.fit.exact
    assert all(c.status == "match" for c in rep.norm_checks)
