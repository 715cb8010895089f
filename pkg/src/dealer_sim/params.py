"""Static model constants and run configuration."""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass
from typing import Optional


class ConfigError(ValueError):
    """Raised when parameters violate a model or run invariant."""


class Policy(str, enum.Enum):
    BASELINE = "baseline"
    PREMEDITATED = "premeditated"
    UNPREMEDITATED = "unpremeditated"
    MINGLED = "mingled"

    @property
    def code(self) -> int:
        return _POLICY_CODES[self]


_POLICY_CODES = {
    Policy.BASELINE: 0,
    Policy.PREMEDITATED: 1,
    Policy.UNPREMEDITATED: 2,
    Policy.MINGLED: 3,
}


class SellerTermMode(str, enum.Enum):
    """How the premeditated rule raises the sellers' bids.

    ``COMPENSATION_CONSISTENT`` gives each seller ``greed*(1+eps_seller)/n``
    so the bid sum moves by exactly ``greed*(eps_seller - eps_buyer)`` per
    deal. ``STRICT_PAPER`` gives ``greed*eps_seller/n``.
    """

    COMPENSATION_CONSISTENT = "compensation_consistent"
    STRICT_PAPER = "strict_paper"

    @property
    def code(self) -> int:
        return 0 if self is SellerTermMode.COMPENSATION_CONSISTENT else 1


@dataclass(frozen=True)
class ModelParams:
    n_dealers: int = 100
    spread: float = 1.0
    greed: float = 0.4
    expectation_half_width: float = 0.01
    eps_buyer: float = 0.0
    eps_seller: float = 0.0
    policy: Policy = Policy.BASELINE
    mu_window: Optional[int] = None
    seller_term_mode: SellerTermMode = SellerTermMode.COMPENSATION_CONSISTENT
    seed: int = 0

    def __post_init__(self):
        # accept plain strings for the enums (config files, CLI overrides)
        object.__setattr__(self, "policy", Policy(self.policy))
        object.__setattr__(self, "seller_term_mode", SellerTermMode(self.seller_term_mode))
        self.validate()

    def validate(self) -> None:
        if isinstance(self.n_dealers, bool) or not isinstance(self.n_dealers, int) or self.n_dealers < 2:
            raise ConfigError(f"n_dealers must be an integer >= 2, got {self.n_dealers!r}")
        if not self.spread > 0:
            raise ConfigError(f"spread must be positive, got {self.spread!r}")
        if not 0 < self.greed < self.spread:
            raise ConfigError(f"greed must satisfy 0 < greed < spread, got {self.greed!r}")
        if not self.expectation_half_width > 0:
            raise ConfigError(
                f"expectation_half_width must be positive, got {self.expectation_half_width!r}")
        if self.mu_window is not None and (
                isinstance(self.mu_window, bool) or not isinstance(self.mu_window, int)
                or self.mu_window < 1):
            raise ConfigError(f"mu_window must be a positive integer or None, got {self.mu_window!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        eb, es = self.eps_buyer, self.eps_seller
        if self.policy is Policy.PREMEDITATED:
            upward = -1.0 <= eb <= 0.0 and es >= 0.0
            downward = 0.0 <= eb <= 1.0 and es <= 0.0
            if not (upward or downward):
                raise ConfigError(
                    "premeditated epsilons must express one direction: "
                    "-1 <= eps_buyer <= 0 with eps_seller >= 0, or "
                    f"0 <= eps_buyer <= 1 with eps_seller <= 0; got ({eb}, {es})")
        elif self.policy is Policy.MINGLED:
            if not -1.0 <= eb <= 1.0:
                raise ConfigError(f"mingled eps_buyer must lie in [-1, 1], got {eb}")

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["policy"] = self.policy.value
        d["seller_term_mode"] = self.seller_term_mode.value
        return d


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    max_steps: int = 10**7
    target_deals: Optional[int] = None
    record_every_step: bool = False

    def __post_init__(self):
        if isinstance(self.max_steps, bool) or not isinstance(self.max_steps, int) or self.max_steps < 1:
            raise ConfigError(f"max_steps must be an integer >= 1, got {self.max_steps!r}")
        if self.target_deals is not None and (
                isinstance(self.target_deals, bool) or not isinstance(self.target_deals, int)
                or self.target_deals < 0):
            raise ConfigError(f"target_deals must be a non-negative integer, got {self.target_deals!r}")

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            **self.params.to_dict(),
            "max_steps": self.max_steps,
            "target_deals": self.target_deals,
            "record_every_step": self.record_every_step,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        """Build from a flat mapping of field names; unknown keys are rejected."""
        param_keys = {f.name for f in dataclasses.fields(ModelParams)}
        run_keys = {"max_steps", "target_deals", "record_every_step"}
        unknown = set(data) - param_keys - run_keys
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        try:
            params = ModelParams(**{k: v for k, v in data.items() if k in param_keys})
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return cls(params=params, **{k: v for k, v in data.items() if k in run_keys})
