"""Deal resolution and the post-deal bid adjustment rules.

Everything here is a pure function over plain sequences of floats. Sums
run in ascending dealer index so results are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .params import SellerTermMode


@dataclass(frozen=True)
class DealOutcome:
    buyer: int
    sellers: tuple[int, ...]
    price: float

    @property
    def n_sellers(self) -> int:
        return len(self.sellers)


@dataclass
class MarketState:
    """Mutable snapshot of the market between steps.

    Sell prices are never stored; dealer ``i`` sells at ``bids[i] + spread``.
    """

    bids: list[float]
    expectations: tuple[float, ...]
    price: float
    last_deal_step: int = -1
    seller_count_history: list[int] = field(default_factory=list)
    step: int = 0
    deals_done: int = 0

    def __post_init__(self):
        self.expectations = tuple(self.expectations)
        if len(self.bids) != len(self.expectations):
            raise ValueError("bids and expectations must have the same length")
        total = 0.0
        for a in self.expectations:
            total += a
        if abs(total) > 1e-12 * len(self.expectations):
            raise ValueError(f"expectations must sum to zero, got {total!r}")

    def copy(self) -> "MarketState":
        return MarketState(
            bids=list(self.bids),
            expectations=self.expectations,
            price=self.price,
            last_deal_step=self.last_deal_step,
            seller_count_history=list(self.seller_count_history),
            step=self.step,
            deals_done=self.deals_done,
        )

    def sell_price(self, i: int, spread: float) -> float:
        return self.bids[i] + spread


def deal_condition(bids: Sequence[float], spread: float) -> bool:
    if len(bids) == 0:
        raise ValueError("bid vector is empty")
    return max(bids) - min(bids) >= spread


def resolve_deal(bids: Sequence[float], spread: float) -> DealOutcome:
    """Pick the highest bidder (lowest index on ties) and every dealer at least
    ``spread`` below it."""
    if not deal_condition(bids, spread):
        raise ValueError("deal condition does not hold")
    top = max(bids)
    buyer = list(bids).index(top)
    sellers = tuple(j for j, b in enumerate(bids) if j != buyer and top - b >= spread)
    return DealOutcome(buyer=buyer, sellers=sellers, price=top)


def _deltas(outcome: DealOutcome, n_dealers: int, buyer_delta: float,
            seller_delta: float) -> list[float]:
    deltas = [0.0] * n_dealers
    deltas[outcome.buyer] = buyer_delta
    for s in outcome.sellers:
        deltas[s] = seller_delta
    return deltas


def delta_baseline(outcome: DealOutcome, greed: float, n_dealers: int) -> list[float]:
    return _deltas(outcome, n_dealers, -greed, greed / outcome.n_sellers)


def delta_premeditated(outcome: DealOutcome, greed: float, eps_buyer: float,
                       eps_seller: float, mode: SellerTermMode,
                       n_dealers: int) -> list[float]:
    if SellerTermMode(mode) is SellerTermMode.COMPENSATION_CONSISTENT:
        seller = greed * (1.0 + eps_seller) / outcome.n_sellers
    else:
        seller = greed * eps_seller / outcome.n_sellers
    return _deltas(outcome, n_dealers, -(greed * (1.0 + eps_buyer)), seller)


def delta_unpremeditated(outcome: DealOutcome, greed: float, mu_n: float,
                         n_dealers: int) -> list[float]:
    if not mu_n >= 1:
        raise ValueError(f"mu_n must be >= 1, got {mu_n!r}")
    return _deltas(outcome, n_dealers, -greed, greed / mu_n)


def delta_mingled(outcome: DealOutcome, greed: float, eps_buyer: float, mu_n: float,
                  n_dealers: int) -> list[float]:
    if not mu_n >= 1:
        raise ValueError(f"mu_n must be >= 1, got {mu_n!r}")
    return _deltas(outcome, n_dealers, -(greed * (1.0 + eps_buyer)), greed / mu_n)


def apply_update(bids: Sequence[float], deltas: Sequence[float],
                 expectations: Sequence[float]) -> list[float]:
    if not len(bids) == len(deltas) == len(expectations):
        raise ValueError(
            f"length mismatch: bids={len(bids)} deltas={len(deltas)} "
            f"expectations={len(expectations)}")
    return [b + d + a for b, d, a in zip(bids, deltas, expectations)]


def ordered_sum(values: Sequence[float]) -> float:
    total = 0.0
    for v in values:
        total += v
    return total
