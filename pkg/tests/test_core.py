import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from dealer_sim.core import (
    DealOutcome,
    MarketState,
    apply_update,
    deal_condition,
    delta_baseline,
    delta_mingled,
    delta_premeditated,
    delta_unpremeditated,
    resolve_deal,
)
from dealer_sim.params import SellerTermMode

CC = SellerTermMode.COMPENSATION_CONSISTENT

bid_vectors = st.lists(st.floats(-3, 3, allow_nan=False), min_size=2, max_size=120)
greeds = st.floats(0.001, 0.999)


def _outcome(n_sellers, n_dealers=None):
    n_dealers = n_dealers or n_sellers + 2
    return DealOutcome(buyer=0, sellers=tuple(range(1, n_sellers + 1)), price=0.5), n_dealers


@pytest.mark.parametrize("bids, expected", [
    ([0.5, -0.6, 0.2], True),
    ([0.3, 0.3, 0.3], False),
    ([0.0, -1.0], True),
])
def test_deal_condition_examples(bids, expected):
    assert deal_condition(bids, 1.0) is expected


def test_deal_condition_rejects_empty():
    with pytest.raises(ValueError):
        deal_condition([], 1.0)


@pytest.mark.parametrize("bids, buyer, sellers", [
    ([0.5, -0.6, 0.2], 0, (1,)),
    ([0.5, -0.6, -0.7], 0, (1, 2)),
    ([0.5, 0.5, -0.6], 0, (2,)),
])
def test_resolve_deal_examples(bids, buyer, sellers):
    out = resolve_deal(bids, 1.0)
    assert out.buyer == buyer
    assert out.sellers == sellers
    assert out.price == 0.5


def test_resolve_deal_without_deal_raises():
    with pytest.raises(ValueError):
        resolve_deal([0.3, 0.3], 1.0)


@given(bid_vectors, st.floats(0.1, 2.0))
def test_resolve_deal_invariants(bids, spread):
    assume(deal_condition(bids, spread))
    out = resolve_deal(bids, spread)
    assert bids[out.buyer] == max(bids)
    assert all(bids[i] < max(bids) for i in range(out.buyer))
    assert out.buyer not in out.sellers
    assert out.n_sellers >= 1
    assert bids.index(min(bids)) in out.sellers
    # brute-force seller set
    expected = tuple(j for j in range(len(bids))
                     if j != out.buyer and out.price - bids[j] >= spread)
    assert out.sellers == expected
    assert out.price == max(bids)


def test_delta_baseline_examples():
    out, n = _outcome(2, 4)
    assert delta_baseline(out, 0.4, n) == [-0.4, 0.2, 0.2, 0.0]
    out, n = _outcome(1, 3)
    assert delta_baseline(out, 0.4, n) == [-0.4, 0.4, 0.0]
    out, n = _outcome(4, 5)
    d = delta_baseline(out, 0.4, n)
    assert d[1:] == [0.1] * 4
    assert math.fsum(d) == pytest.approx(0.0, abs=4 * math.ulp(0.4))


def test_delta_premeditated_examples():
    out, n = _outcome(2, 3)
    d = delta_premeditated(out, 0.4, -0.002, 0.0, CC, n)
    assert d == [pytest.approx(-0.3992, abs=1e-15), 0.2, 0.2]
    assert math.fsum(d) == pytest.approx(0.0008, abs=1e-15)
    strict = delta_premeditated(out, 0.4, -0.002, 0.0, SellerTermMode.STRICT_PAPER, n)
    assert strict == [pytest.approx(-0.3992, abs=1e-15), 0.0, 0.0]


@pytest.mark.parametrize("n_sellers", [1, 2, 3, 7, 40])
def test_premeditated_zero_eps_is_baseline(n_sellers):
    out, n = _outcome(n_sellers)
    assert delta_premeditated(out, 0.4, 0.0, 0.0, CC, n) == delta_baseline(out, 0.4, n)


def test_delta_unpremeditated_examples():
    out, n = _outcome(2, 3)
    d = delta_unpremeditated(out, 0.4, 3.0, n)
    assert d[0] == -0.4
    assert d[1] == d[2] == pytest.approx(0.4 / 3, abs=1e-16)
    assert math.fsum(d) == pytest.approx(-0.4 / 3, abs=1e-15)

    out, n = _outcome(3, 4)
    d = delta_unpremeditated(out, 0.4, 1.0, n)
    assert d[1:] == [0.4, 0.4, 0.4]
    assert math.fsum(d) == pytest.approx(0.8, abs=1e-15)


@pytest.mark.parametrize("n_sellers", [1, 2, 5, 13])
def test_unpremeditated_exact_mu_is_baseline(n_sellers):
    out, n = _outcome(n_sellers)
    assert delta_unpremeditated(out, 0.4, float(n_sellers), n) == delta_baseline(out, 0.4, n)


def test_delta_unpremeditated_rejects_small_mu():
    out, n = _outcome(2)
    with pytest.raises(ValueError):
        delta_unpremeditated(out, 0.4, 0.5, n)
    with pytest.raises(ValueError):
        delta_mingled(out, 0.4, 0.0, 0.99, n)


def test_delta_mingled_examples():
    out, n = _outcome(2, 3)
    d = delta_mingled(out, 0.4, -0.031, 2.0, n)
    assert d == [pytest.approx(-0.3876, abs=1e-15), 0.2, 0.2]
    assert delta_mingled(out, 0.4, 0.0, 2.7, n) == delta_unpremeditated(out, 0.4, 2.7, n)
    # hand evaluation: -0.4 * 1.002 = -0.4008, 0.4 / 4 = 0.1
    out, n = _outcome(1, 2)
    d = delta_mingled(out, 0.4, 0.002, 4.0, n)
    assert d[0] == pytest.approx(-0.4008, abs=1e-15)
    assert d[1] == 0.1


def test_apply_update_examples():
    assert apply_update([0.1], [0.0], [0.005]) == [pytest.approx(0.105, abs=1e-16)]
    assert apply_update([0.5, -0.6], [-0.4, 0.4], [0.0, 0.0]) == [
        pytest.approx(0.1, abs=1e-15), pytest.approx(-0.2, abs=1e-15)]
    # element-wise hand sums: 0.5-0.4+0.004 = 0.104, -0.6+0.4-0.004 = -0.204
    assert apply_update([0.5, -0.6], [-0.4, 0.4], [0.004, -0.004]) == [
        pytest.approx(0.104, abs=1e-15), pytest.approx(-0.204, abs=1e-15)]


def test_apply_update_length_mismatch():
    with pytest.raises(ValueError):
        apply_update([0.1, 0.2], [0.0], [0.0, 0.0])


@settings(max_examples=300)
@given(bid_vectors, greeds)
def test_baseline_sum_vanishes(bids, greed):
    assume(deal_condition(bids, 1.0))
    out = resolve_deal(bids, 1.0)
    d = delta_baseline(out, greed, len(bids))
    assert abs(math.fsum(d)) <= 4 * math.ulp(greed)


@settings(max_examples=300)
@given(bid_vectors, greeds, st.floats(-1, 0), st.floats(0, 1))
def test_premeditated_sum_law(bids, greed, eps_b, eps_s):
    assume(deal_condition(bids, 1.0))
    out = resolve_deal(bids, 1.0)
    d = delta_premeditated(out, greed, eps_b, eps_s, CC, len(bids))
    assert abs(math.fsum(d) - greed * (eps_s - eps_b)) <= 4 * math.ulp(greed)


@settings(max_examples=300)
@given(bid_vectors, greeds, st.floats(1, 50))
def test_unpremeditated_sum_law(bids, greed, mu):
    assume(deal_condition(bids, 1.0))
    out = resolve_deal(bids, 1.0)
    d = delta_unpremeditated(out, greed, mu, len(bids))
    # rounding of greed/mu is amplified n times, so scale by the sellers' total
    scale = max(greed, greed * out.n_sellers / mu)
    assert abs(math.fsum(d) - greed * (out.n_sellers / mu - 1)) <= 4 * math.ulp(scale)


@given(st.lists(st.tuples(st.floats(-2, 2), st.floats(-0.5, 0.5), st.floats(-0.02, 0.02)),
                min_size=1, max_size=50))
def test_apply_update_is_linear(rows):
    bids, deltas, exps = map(list, zip(*rows))
    two_pass = apply_update(apply_update(bids, deltas, [0.0] * len(bids)),
                            [0.0] * len(bids), exps)
    combined = apply_update(bids, [0.0] * len(bids), [d + a for d, a in zip(deltas, exps)])
    for (b, d, a), x, y in zip(rows, two_pass, combined):
        # one rounding at the magnitude of the largest intermediate
        assert abs(x - y) <= math.ulp(max(abs(b), abs(b + d), abs(d + a), abs(x), 1e-300))


def test_market_state_requires_zero_mean_expectations():
    with pytest.raises(ValueError):
        MarketState(bids=[0.0, 0.0], expectations=(0.01, 0.0), price=0.0)
    s = MarketState(bids=[0.0, 0.5], expectations=(0.01, -0.01), price=0.5)
    assert s.sell_price(1, 1.0) == 1.5
