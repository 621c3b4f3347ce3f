import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from databargain import bargain
from databargain.bargain import BargainParams

WORKED = BargainParams(r_s=300, r_b=800, delta_s=0.5, delta_eta_b=0.3, p1=0.9, p2=0.45, alpha=0.2)


def test_worked_example_frozen():
    # 300 + (0.7*800 + (0.2*(-0.1) + 0.3*(1 - 0.2*(-0.55)) - 1) * 300) / (0.9 - 0.15)
    res = bargain.equilibrium_price(WORKED)
    assert res.price == pytest.approx(771.8666666666667, abs=1e-9)
    assert res.seller_extra == pytest.approx(471.8666666666667, abs=1e-9)
    assert res.buyer_extra == pytest.approx(28.1333333333333, abs=1e-9)
    assert res.feasible


def test_oracle_matches_worked_example():
    assert bargain.fixed_point_oracle(WORKED) == pytest.approx(771.8666666666667, rel=1e-12)


def test_stage_continuation_differs_unless_p2_is_one():
    # the per-stage payoff continuation has denominator p1 - delta_s*delta_eta_b*p2
    assert bargain.fixed_point_oracle(WORKED, continuation="stage") == pytest.approx(
        725.1051051051052, rel=1e-12)
    p = WORKED.with_(p1=1.0, p2=1.0)
    assert bargain.fixed_point_oracle(p, continuation="stage") == pytest.approx(
        bargain.equilibrium_price(p).price, rel=1e-12)


def test_commission_reduces_seller_extra():
    res = bargain.equilibrium_price(WORKED.with_(tau=0.1))
    assert res.commission == pytest.approx(0.1 * res.price)
    assert res.seller_extra == pytest.approx(0.9 * res.price - 300)
    assert res.buyer_extra == pytest.approx(800 - res.price)


def test_infeasible_price_is_flagged_not_clipped():
    p = BargainParams(r_s=900, r_b=800, delta_s=0.5, delta_eta_b=0.3)
    res = bargain.equilibrium_price(p)
    assert not res.feasible
    assert res.buyer_extra == pytest.approx(800 - res.price)


def test_denominator_guard():
    p = BargainParams(r_s=1, r_b=2, delta_s=1.0, delta_eta_b=0.9, p1=0.5, p2=0.5)
    with pytest.raises(bargain.BargainError, match="p1 must exceed"):
        bargain.equilibrium_price(p)
    with pytest.raises(bargain.BargainError):
        bargain.fixed_point_oracle(p)


@pytest.mark.parametrize("kw", [
    {"delta_s": 1.2}, {"delta_eta_b": 1.0}, {"p2": 0.95}, {"p2": 0.0},
    {"alpha": -0.1}, {"tau": 1.0}, {"r_s": -1.0},
])
def test_param_validation(kw):
    with pytest.raises(bargain.BargainError):
        WORKED.with_(**kw)


def test_stage_payoffs():
    s1 = bargain.stage_payoffs(WORKED, 1, 700)
    assert s1.is_profit == pytest.approx(400)
    assert s1.ib_profit == pytest.approx(0.9 * 100 + 0.1 * (800 - 1.2 * 300))
    s3 = bargain.stage_payoffs(WORKED, 3, 700)
    assert s3.is_profit == pytest.approx(0.25 * 400)
    assert s3.ib_profit == pytest.approx(0.09 * (0.45 * 100 + 0.55 * 440))
    with pytest.raises(bargain.BargainError):
        bargain.stage_payoffs(WORKED, 4, 700)


def test_counteroffer_makes_seller_indifferent():
    p3 = 750.0
    p2 = bargain.buyer_counteroffer(WORKED, p3)
    assert bargain.stage_payoffs(WORKED, 2, p2).is_profit == pytest.approx(
        bargain.stage_payoffs(WORKED, 3, p3).is_profit)


def test_classical_shares():
    a, b = bargain.classical_rubinstein_shares(0.5, 0.5)
    assert a == pytest.approx(2 / 3)
    assert b == pytest.approx(1 / 3)
    with pytest.raises(bargain.BargainError):
        bargain.classical_rubinstein_shares(1.0, 1.0)


@st.composite
def valid_params(draw):
    p1 = draw(st.floats(0.05, 1.0))
    p2 = draw(st.floats(0.01, 1.0)) * p1
    assume(p2 > 0)
    ds = draw(st.floats(0, 1))
    db = draw(st.floats(0, 0.99))
    assume(p1 - ds * db > 1e-3)
    return BargainParams(draw(st.floats(0, 1e3)), draw(st.floats(0, 2e3)), ds, db, p1, p2,
                         draw(st.floats(0, 2)), draw(st.floats(0, 0.5)))


@settings(max_examples=200, deadline=None)
@given(valid_params())
def test_closed_form_is_fixed_point(p):
    price = bargain.equilibrium_price(p).price
    counter = bargain.buyer_counteroffer(p, price)
    low = p.r_b - (1 - p.p1) * (1 + p.alpha) * p.r_s
    target = p.delta_eta_b * (p.r_b - counter - (1 - p.p2) * p.alpha * p.r_s)
    assert (low - target) / p.p1 == pytest.approx(price, rel=1e-9, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(valid_params())
def test_extras_partition_surplus(p):
    res = bargain.equilibrium_price(p)
    assert res.seller_extra + res.buyer_extra + res.commission == pytest.approx(
        p.r_b - p.r_s, abs=1e-6 * max(1.0, abs(res.price)))
    assert math.isfinite(res.price)
