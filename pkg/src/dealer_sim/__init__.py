"""Deterministic threshold dealer-model market simulator."""

__version__ = "0.1.0"

from .core import (
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
from .engine import DealRecord, TickSeries, init_dealers, mu_of_history, run, step
from .kernel import BACKEND
from .params import ConfigError, ModelParams, Policy, RunConfig, SellerTermMode

__all__ = [
    "BACKEND",
    "ConfigError",
    "DealOutcome",
    "DealRecord",
    "MarketState",
    "ModelParams",
    "Policy",
    "RunConfig",
    "SellerTermMode",
    "TickSeries",
    "apply_update",
    "deal_condition",
    "delta_baseline",
    "delta_mingled",
    "delta_premeditated",
    "delta_unpremeditated",
    "init_dealers",
    "mu_of_history",
    "resolve_deal",
    "run",
    "step",
]
