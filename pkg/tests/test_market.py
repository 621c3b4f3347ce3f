import json
import math

import numpy as np
import pytest

from databargain import bargain, market
from databargain.market import ScenarioConfig


def test_buyer_demand_sets(default_scenario):
    cats = default_scenario.corpus.categories
    d1 = market.buyer_demands(default_scenario.corpus, 1)
    assert d1["B1"] == {cats[0]}
    assert d1["B2"] == set(cats)
    assert d1["B3"] == set(cats) - {cats[0]}
    assert d1["B4"] == set(cats[:3])
    assert all(v == set(cats) for v in market.buyer_demands(default_scenario.corpus, 2).values())


def test_scenario_test_sets_disjoint_from_shards(default_scenario):
    owned = {d for s in default_scenario.shards for d in s.doc_ids}
    for b in default_scenario.buyers:
        assert b.test.test_doc_ids
        assert not owned & set(b.test.test_doc_ids)
    assert [b.model.name for b in default_scenario.buyers] == ["svm", "svm", "logreg", "knn"]


def test_utility_rows_normalized(default_scenario):
    xi = market.compute_utility(default_scenario)
    np.testing.assert_allclose(xi.xi.sum(axis=1), 1.0)
    assert np.all(xi.xi >= 0)
    # B1 only wants the monopolized category, which S1 alone holds
    np.testing.assert_allclose(xi.row("B1"), [1, 0, 0, 0])


@pytest.mark.parametrize("bad", [
    {"seller_assumption": 4}, {"buyer_demand": 3}, {"p1": 0.0}, {"eta": 1.0},
    {"oracle": "magic"}, {"budget_range": (5, 1)}, {"discount_k_choices": ()},
])
def test_scenario_validation(bad):
    with pytest.raises(market.ScenarioError):
        ScenarioConfig(**bad)


def test_seller_discount_rejection_sampling():
    for seed in range(20):
        d = market.draw_seller_discount(seed, 0.6, 0.9)
        assert d > 0.6 and 0.9 > d * 0.6
    assert market.draw_seller_discount(3, 0.6, 0.9) == market.draw_seller_discount(3, 0.6, 0.9)
    with pytest.raises(market.ScenarioError):
        market.draw_seller_discount(0, 0.999999, 0.9, max_draws=5)


def test_sample_parameters_ranges():
    cfg = ScenarioConfig()
    d = market.sample_parameters(cfg, np.random.default_rng(0))
    assert all(600 <= u <= 1000 for u in d.budgets)
    assert all(200 <= r <= 400 for r in d.reserves)
    assert all(0 <= a <= 1 for a in d.alphas)
    assert all(0 < p <= 0.9 for p in d.p2)
    assert set(d.k) <= {7.0, 10.0, 15.0, 20.0}


def test_run_market_accounting(default_scenario):
    draw = market.sample_parameters(default_scenario.config, np.random.default_rng(7))
    out = market.run_market(default_scenario, draw, 7)
    assert [r.id for r in out.records] == ["S1", "S2", "S3", "S4", "B1", "B2", "B3", "B4"]
    for sid, eq in out.equilibria.items():
        p = out.params[sid]
        assert p.delta_s > p.delta_eta_b
        assert eq.price == pytest.approx(bargain.equilibrium_price(p).price)
    # buyers' payments add up to what sellers are paid
    paid = sum(r.price_or_payment for r in out.records if r.kind == "buyer")
    assert paid == pytest.approx(sum(eq.price for eq in out.equilibria.values()))
    for sid, view in out.alliances.items():
        assert view.r_b == pytest.approx(float(out.utility.column(sid) @ np.array(draw.budgets)))


def test_run_seed_deterministic():
    cfg = ScenarioConfig()
    assert market.run_seed(cfg, 11) == market.run_seed(cfg, 11)
    assert market.run_seed(cfg, 11) != market.run_seed(cfg, 12)


def test_parallel_matches_serial():
    cfg = ScenarioConfig(seller_assumption=3)
    assert market.run_simulation(cfg, range(4), workers=2) == market.run_simulation(cfg, range(4))


def test_csv_roundtrip_and_summary():
    records = market.run_simulation(ScenarioConfig(), range(3))
    text = market.records_to_csv(records)
    assert text.splitlines()[0] == market.RUNRECORD_SCHEMA
    assert text.splitlines()[1] == ",".join(market.RUNRECORD_FIELDS)
    back = market.records_from_csv(text)
    assert [(r.seed, r.id) for r in back] == [(r.seed, r.id) for r in records]
    assert all(abs(a.extra_profit - b.extra_profit) < 1e-6 for a, b in zip(back, records))
    summary = market.aggregate(records)
    assert list(summary)[:4] == ["S1", "S2", "S3", "S4"]
    assert summary["S1"]["n"] == 3
    doc = json.loads(market.summary_to_json(summary, ScenarioConfig(), range(3)))
    assert doc["schema"] == market.SUMMARY_SCHEMA
    assert doc["seeds"] == [0, 1, 2]
    assert sorted(market.seller_ranking(summary)) == ["S1", "S2", "S3", "S4"]
    with pytest.raises(market.ScenarioError):
        market.aggregate([])


@pytest.mark.parametrize("which", ["quality", "alpha", "eta"])
def test_sweep_directions_hold(which):
    rows = market.sweep(market.SWEEP_BASE, which, market.default_grid(which),
                        r0=market.SWEEP_BASE_R0, delta_b=market.SWEEP_BASE_DELTA_B)
    assert len(rows) == 11
    assert not any(r.flag for r in rows)
    assert market.sweep_direction_ok(rows) == (True, True)


def test_sweep_flags_invalid_points():
    rows = market.sweep(market.SWEEP_BASE, "eta", [0.0, 0.6],
                        delta_b=market.SWEEP_BASE_DELTA_B)
    assert rows[0].flag == ""
    assert rows[1].flag.startswith("invalid")
    assert math.isnan(rows[1].seller_extra)
    with pytest.raises(market.ScenarioError):
        market.sweep(market.SWEEP_BASE, "beta", [1.0])


def test_sweep_csv_schema():
    rows = market.sweep(market.SWEEP_BASE, "alpha", [0.0, 0.5])
    lines = market.sweep_to_csv(rows).splitlines()
    assert lines[0] == market.SWEEP_SCHEMA
    assert lines[1] == "param,value,seller_extra,buyer_extra,flag"
    assert lines[2].startswith("alpha,0.000000,")
