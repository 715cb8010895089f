"""Seeded initialization, the time-step loop and per-deal recording."""

from __future__ import annotations

import hashlib
import logging
import struct
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import kernel
from .core import (
    MarketState,
    apply_update,
    deal_condition,
    delta_baseline,
    delta_mingled,
    delta_premeditated,
    delta_unpremeditated,
    ordered_sum,
    resolve_deal,
)
from .params import ModelParams, Policy, RunConfig
from .rng import ALGORITHM_ID, Xoshiro256

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DealRecord:
    deal_index: int
    step: int
    price: float
    buyer: int
    n_sellers: int
    mu_n_used: float
    sum_bids: float


@dataclass
class TickSeries:
    records: list[DealRecord]
    config_echo: RunConfig
    final_state_digest: str
    initial_sum_bids: float
    final_state: MarketState
    rng_algorithm: str = ALGORITHM_ID
    backend: str = ""
    step_prices: Optional[list[float]] = None
    warnings: list[str] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    @property
    def prices(self) -> list[float]:
        return [r.price for r in self.records]

    @property
    def seller_counts(self) -> list[int]:
        return [r.n_sellers for r in self.records]


def bids_digest(bids: Sequence[float]) -> str:
    """64-bit BLAKE2b digest of the bid vector as little-endian doubles."""
    payload = struct.pack(f"<{len(bids)}d", *bids)
    return hashlib.blake2b(payload, digest_size=8).hexdigest()


def init_dealers(seed: int, n_dealers: int, spread: float,
                 expectation_half_width: float) -> tuple[list[float], list[float]]:
    """Draw initial bids on (-spread, spread) and zero-mean expectations.

    Bids are drawn first, then expectations, from one generator stream.
    """
    if n_dealers < 1:
        raise ValueError("n_dealers must be positive")
    if expectation_half_width < 0:
        raise ValueError("expectation_half_width must be non-negative")
    rng = Xoshiro256(seed)
    bids = [rng.symmetric(spread) for _ in range(n_dealers)]
    raw = [rng.symmetric(expectation_half_width) for _ in range(n_dealers)]
    mean = ordered_sum(raw) / n_dealers
    expectations = [a - mean for a in raw]
    return bids, expectations


def mu_of_history(history: Sequence[int], window: Optional[int] = None) -> Optional[float]:
    """Mean seller count over past deals, or None when there are none."""
    if not history:
        return None
    tail = history if window is None else history[-window:]
    return sum(tail) / len(tail)


def initial_state(params: ModelParams) -> MarketState:
    bids, expectations = init_dealers(
        params.seed, params.n_dealers, params.spread, params.expectation_half_width)
    return MarketState(bids=bids, expectations=expectations, price=max(bids))


def step(state: MarketState, config: RunConfig) -> tuple[MarketState, Optional[DealRecord]]:
    """Advance one time step using the reference operations in ``core``.

    Returns a new state; the input is not modified.
    """
    p = config.params
    new = state.copy()
    if not deal_condition(state.bids, p.spread):
        new.bids = apply_update(state.bids, [0.0] * len(state.bids), state.expectations)
        new.step += 1
        return new, None

    outcome = resolve_deal(state.bids, p.spread)
    n = outcome.n_sellers
    mu = float(n)
    if p.policy in (Policy.UNPREMEDITATED, Policy.MINGLED):
        past = mu_of_history(state.seller_count_history, p.mu_window)
        if past is not None:
            mu = past

    if p.policy is Policy.BASELINE:
        deltas = delta_baseline(outcome, p.greed, p.n_dealers)
    elif p.policy is Policy.PREMEDITATED:
        deltas = delta_premeditated(outcome, p.greed, p.eps_buyer, p.eps_seller,
                                    p.seller_term_mode, p.n_dealers)
    elif p.policy is Policy.UNPREMEDITATED:
        deltas = delta_unpremeditated(outcome, p.greed, mu, p.n_dealers)
    else:
        deltas = delta_mingled(outcome, p.greed, p.eps_buyer, mu, p.n_dealers)

    new.bids = apply_update(state.bids, deltas, state.expectations)
    new.seller_count_history.append(n)
    new.price = outcome.price
    new.last_deal_step = state.step
    new.deals_done += 1
    new.step += 1
    record = DealRecord(
        deal_index=new.deals_done,
        step=state.step,
        price=outcome.price,
        buyer=outcome.buyer,
        n_sellers=n,
        mu_n_used=mu,
        sum_bids=ordered_sum(new.bids),
    )
    return new, record


def advance(state: MarketState, config: RunConfig, backend: Optional[str] = None):
    """Run the fast kernel from ``state`` until the config's stop condition.

    Returns ``(final_state, records, step_prices)``.
    """
    p = config.params
    if len(state.seller_count_history) != state.deals_done:
        raise ValueError("seller_count_history length must equal deals_done")
    out = kernel.run_loop(
        state.bids, state.expectations, state.price, state.seller_count_history,
        state.step, state.deals_done, state.last_deal_step,
        p.spread, p.greed, p.eps_buyer, p.eps_seller,
        p.policy.code, p.seller_term_mode.code, p.mu_window or 0,
        config.max_steps, -1 if config.target_deals is None else config.target_deals,
        config.record_every_step,
        backend=backend,
    )
    final = MarketState(
        bids=out["bids"],
        expectations=state.expectations,
        price=out["price"],
        last_deal_step=out["last_deal_step"],
        seller_count_history=out["history"],
        step=out["step"],
        deals_done=out["deals_done"],
    )
    first = state.deals_done + 1
    records = [
        DealRecord(first + k, s, pr, b, n, mu, sb)
        for k, (s, pr, b, n, mu, sb) in enumerate(zip(
            out["rec_step"], out["rec_price"], out["rec_buyer"],
            out["rec_n"], out["rec_mu"], out["rec_sum"]))
    ]
    return final, records, out["step_prices"]


def run(config: RunConfig, backend: Optional[str] = None) -> TickSeries:
    """Initialize from the seed and iterate until max_steps or target_deals."""
    state = initial_state(config.params)
    initial_sum = ordered_sum(state.bids)
    final, records, step_prices = advance(state, config, backend=backend)
    warnings = []
    if not records and config.target_deals != 0:
        msg = f"no deals occurred within {config.max_steps} steps"
        log.warning(msg)
        warnings.append(msg)
    return TickSeries(
        records=records,
        config_echo=config,
        final_state_digest=bids_digest(final.bids),
        initial_sum_bids=initial_sum,
        final_state=final,
        backend=kernel.get_backend(backend).BACKEND,
        step_prices=step_prices,
        warnings=warnings,
    )
