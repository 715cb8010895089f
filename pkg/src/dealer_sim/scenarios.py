"""Named experiment presets and seed/epsilon sweeps."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from types import MappingProxyType
from typing import Sequence

from .params import ModelParams, Policy, RunConfig

DEFAULT_TARGET_DEALS = 15_000
DEFAULT_MAX_STEPS = 10**7


class ExpectedBehavior(str, enum.Enum):
    NO_TREND = "no_trend"
    MONOTONIC_UP = "monotonic_up"
    MONOTONIC_DOWN = "monotonic_down"
    EMERGENT_TRENDS = "emergent_trends"
    MINGLED = "mingled"


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    config: RunConfig
    expected_behavior: ExpectedBehavior
    notes: str


class UnknownPresetError(KeyError):
    def __str__(self):
        return self.args[0]


def _make(name, behavior, notes, **params) -> ScenarioPreset:
    cfg = RunConfig(
        params=ModelParams(n_dealers=100, spread=1.0, greed=0.4,
                           expectation_half_width=0.01, **params),
        max_steps=DEFAULT_MAX_STEPS,
        target_deals=DEFAULT_TARGET_DEALS,
    )
    return ScenarioPreset(name, cfg, behavior, notes)


def _catalog() -> dict[str, ScenarioPreset]:
    B = ExpectedBehavior
    entries = [
        _make("fig4-baseline", B.NO_TREND,
              "Fig. 4: exact compensation, price fluctuates without drift.",
              policy=Policy.BASELINE),
        _make("fig5-up", B.MONOTONIC_UP,
              "Fig. 5: eps_buyer=-0.002 gives a slow monotonic rise.",
              policy=Policy.PREMEDITATED, eps_buyer=-0.002, eps_seller=0.0),
        _make("fig5-down", B.MONOTONIC_DOWN,
              "Fig. 5: eps_buyer=+0.002 gives a slow monotonic fall.",
              policy=Policy.PREMEDITATED, eps_buyer=0.002, eps_seller=0.0),
        _make("fig7-unpremeditated", B.EMERGENT_TRENDS,
              "Fig. 7: sellers use the mean seller count over all past deals.",
              policy=Policy.UNPREMEDITATED),
        _make("fig7-windowed", B.EMERGENT_TRENDS,
              "Fig. 7 variant: mean over the last 100 deals.",
              policy=Policy.UNPREMEDITATED, mu_window=100),
    ]
    panels = {
        "a": {"omega": -0.031, "lambda": 0.031, "gamma": 0.0},
        "b": {"omega": -0.0021, "lambda": 0.0021},
        "c": {"omega": -0.002, "lambda": 0.002},
    }
    for panel, plots in panels.items():
        for plot, eps in plots.items():
            entries.append(_make(
                f"fig8{panel}-{plot}", B.MINGLED,
                f"Fig. 8({panel}) plot {plot}: mingled rule, eps_buyer={eps}.",
                policy=Policy.MINGLED, eps_buyer=eps))
    catalog = {p.name: p for p in entries}
    # short names for the Fig. 8(a) plots
    for plot in ("omega", "lambda", "gamma"):
        catalog[f"fig8-{plot}"] = catalog[f"fig8a-{plot}"]
    return catalog


CATALOG = MappingProxyType(_catalog())


def preset_names() -> list[str]:
    return sorted(CATALOG)


def preset(name: str) -> ScenarioPreset:
    try:
        return CATALOG[name]
    except KeyError:
        raise UnknownPresetError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}") from None


def check_sweep_lists(eps_values: Sequence[float], seeds: Sequence[int]) -> None:
    if not eps_values or not seeds:
        raise ValueError("sweep needs at least one eps value and one seed")
    if len(set(eps_values)) != len(eps_values) or len(set(seeds)) != len(seeds):
        raise ValueError("sweep values must not repeat")


def sweep(base: RunConfig, eps_values: Sequence[float], seeds: Sequence[int]) -> list[RunConfig]:
    """Cartesian product over eps_buyer (outer) and seed (inner)."""
    check_sweep_lists(eps_values, seeds)
    return [
        base.replace(params=base.params.replace(eps_buyer=float(eps), seed=int(seed)))
        for eps, seed in itertools.product(eps_values, seeds)
    ]
