"""Trend metrics, conservation audits and tick CSV loading."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .params import ModelParams, Policy, SellerTermMode

log = logging.getLogger(__name__)

TICK_COLUMNS = ("deal_index", "step", "price", "buyer", "n_sellers", "mu_n", "sum_bids")


class LoadError(ValueError):
    """A tick file could not be parsed; ``lines`` holds (line_no, reason) pairs."""

    def __init__(self, message: str, lines: Optional[list[tuple[int, str]]] = None):
        self.lines = list(lines or [])
        if self.lines:
            detail = "; ".join(f"line {no}: {why}" for no, why in self.lines[:20])
            if len(self.lines) > 20:
                detail += f"; ... ({len(self.lines) - 20} more)"
            message = f"{message} ({detail})"
        super().__init__(message)


@dataclass
class DealTable:
    """Column view of a deal series, from memory or from a tick CSV."""

    deal_index: np.ndarray
    price: np.ndarray
    step: Optional[np.ndarray] = None
    buyer: Optional[np.ndarray] = None
    n_sellers: Optional[np.ndarray] = None
    mu_n: Optional[np.ndarray] = None
    sum_bids: Optional[np.ndarray] = None
    initial_sum_bids: Optional[float] = None

    def __len__(self):
        return len(self.price)

    @classmethod
    def from_series(cls, series) -> "DealTable":
        recs = series.records
        return cls(
            deal_index=np.array([r.deal_index for r in recs], dtype=np.int64),
            step=np.array([r.step for r in recs], dtype=np.int64),
            price=np.array([r.price for r in recs], dtype=float),
            buyer=np.array([r.buyer for r in recs], dtype=np.int64),
            n_sellers=np.array([r.n_sellers for r in recs], dtype=np.int64),
            mu_n=np.array([r.mu_n_used for r in recs], dtype=float),
            sum_bids=np.array([r.sum_bids for r in recs], dtype=float),
            initial_sum_bids=series.initial_sum_bids,
        )


@dataclass(frozen=True)
class TrendReport:
    ols_slope: Optional[float]
    ols_intercept: Optional[float]
    r_squared: Optional[float]
    detrended_range: Optional[float]
    price_std: float
    n_deals: int
    seller_count_min: Optional[float] = None
    seller_count_max: Optional[float] = None
    seller_count_mean: Optional[float] = None
    mu_convergence: Optional[float] = None
    conservation_residual: Optional[float] = None
    degenerate: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def ols_fit(index, price) -> tuple[float, float, float]:
    """Least-squares line ``price ~ intercept + slope*index``.

    Returns (slope, intercept, r_squared); r_squared is 0 when the prices
    have zero variance.
    """
    x = np.asarray(index, dtype=float)
    y = np.asarray(price, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("index and price must be 1-d and the same length")
    if len(x) < 2:
        raise ValueError("need at least 2 points for a line fit")
    xm = x.mean()
    ym = y.mean()
    dx = x - xm
    dy = y - ym
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise ValueError("index has zero variance")
    sxy = float(dx @ dy)
    syy = float(dy @ dy)
    slope = sxy / sxx
    intercept = float(ym) - slope * float(xm)
    if syy == 0.0:
        r2 = 0.0
    else:
        r2 = min(1.0, max(0.0, sxy * sxy / (sxx * syy)))
    return slope, intercept, r2


def detrended_range(index, price) -> float:
    slope, intercept, _ = ols_fit(index, price)
    x = np.asarray(index, dtype=float)
    resid = np.asarray(price, dtype=float) - (intercept + slope * x)
    return float(resid.max() - resid.min())


def running_mean(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return np.cumsum(v) / np.arange(1, len(v) + 1)


def mu_convergence(n_sellers) -> float:
    """Spread of the running mean seller count over the last 90% of deals,
    relative to its value where that stretch starts."""
    mu = running_mean(n_sellers)
    start = max(1, len(mu) // 10) - 1
    tail = mu[start:]
    return float((tail.max() - tail.min()) / tail[0])


def predicted_drift(params: ModelParams) -> float:
    """Expected change of the bid sum per deal, for policies where it is fixed.

    Unpremeditated and mingled runs return 0; their conservation residual
    then reads as the realized imbalance.
    """
    if params.policy is Policy.PREMEDITATED:
        if params.seller_term_mode is SellerTermMode.COMPENSATION_CONSISTENT:
            return params.greed * (params.eps_seller - params.eps_buyer)
        return params.greed * (params.eps_seller - 1.0 - params.eps_buyer)
    return 0.0


def trend_report(series, predicted_drift_per_deal: float = 0.0) -> TrendReport:
    """Compute trend, seller-count and conservation metrics for a series.

    ``series`` is a ``TickSeries`` or a ``DealTable``. Conservation compares
    each recorded bid sum with ``initial + k * predicted_drift_per_deal``
    after deal ``k``.
    """
    table = series if isinstance(series, DealTable) else DealTable.from_series(series)
    k = len(table)
    if k == 0:
        raise ValueError("cannot report on an empty series")
    price = table.price
    degenerate = k < 2 or np.all(table.deal_index == table.deal_index[0])
    if degenerate:
        slope = intercept = r2 = drange = None
    else:
        slope, intercept, r2 = ols_fit(table.deal_index, price)
        drange = detrended_range(table.deal_index, price)

    fields = {}
    if table.n_sellers is not None:
        n = table.n_sellers
        fields.update(
            seller_count_min=float(n.min()),
            seller_count_max=float(n.max()),
            seller_count_mean=float(n.mean()),
            mu_convergence=mu_convergence(n),
        )
    if table.sum_bids is not None and table.initial_sum_bids is not None:
        expected = table.initial_sum_bids + table.deal_index * predicted_drift_per_deal
        fields["conservation_residual"] = float(np.max(np.abs(table.sum_bids - expected)))

    return TrendReport(
        ols_slope=slope,
        ols_intercept=intercept,
        r_squared=r2,
        detrended_range=drange,
        price_std=float(price.std()),
        n_deals=k,
        degenerate=bool(degenerate),
        **fields,
    )


def _is_number(text: str) -> bool:
    try:
        return math.isfinite(float(text))
    except ValueError:
        return False


@dataclass
class ExternalSeries:
    index: np.ndarray
    price: np.ndarray
    rejected_non_monotonic: int = 0
    skipped_malformed: int = 0

    @property
    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.index.tolist(), self.price.tolist()))

    def to_table(self) -> DealTable:
        return DealTable(deal_index=self.index, price=self.price)


def load_external_series(path: Union[str, Path], max_bad_fraction: float = 0.0) -> ExternalSeries:
    """Read a two-column (index or timestamp, price) CSV.

    A non-numeric first line is taken as a header. Rows whose index does not
    increase are dropped and counted. Malformed rows are tolerated up to
    ``max_bad_fraction`` of the data rows.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise LoadError(f"cannot read {path}: {exc}") from exc

    numbered = [(no, row) for no, row in enumerate(rows, start=1)
                if row and any(cell.strip() for cell in row)]
    if numbered and not all(_is_number(c) for c in numbered[0][1][:2]):
        numbered = numbered[1:]
    if not numbered:
        raise LoadError(f"{path} contains no data rows")

    bad = []
    index, price = [], []
    rejected = 0
    for no, row in numbered:
        cells = [c.strip() for c in row]
        if len(cells) != 2 or not (_is_number(cells[0]) and _is_number(cells[1])):
            bad.append((no, f"expected two numeric columns, got {row!r}"))
            continue
        i, p = float(cells[0]), float(cells[1])
        if index and i <= index[-1]:
            rejected += 1
            continue
        index.append(i)
        price.append(p)

    if len(bad) > max_bad_fraction * len(numbered):
        raise LoadError(f"{path}: {len(bad)} malformed rows", bad)
    if not index:
        raise LoadError(f"{path} contains no usable rows", bad)
    if rejected:
        log.warning("%s: dropped %d rows with non-increasing index", path, rejected)
    return ExternalSeries(np.array(index), np.array(price), rejected, len(bad))


def write_tick_csv(series, path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(TICK_COLUMNS) + "\n")
        for r in series.records:
            fh.write(f"{r.deal_index},{r.step},{r.price!r},{r.buyer},"
                     f"{r.n_sellers},{r.mu_n_used!r},{r.sum_bids!r}\n")


def read_tick_csv(path: Union[str, Path], initial_sum_bids: Optional[float] = None) -> DealTable:
    """Parse a tick CSV written by ``write_tick_csv``."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise LoadError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise LoadError(f"{path} is empty")
    if tuple(c.strip() for c in rows[0]) != TICK_COLUMNS:
        raise LoadError(f"{path}: header must be {','.join(TICK_COLUMNS)}", [(1, repr(rows[0]))])
    cols = {name: [] for name in TICK_COLUMNS}
    bad = []
    ints = {"deal_index", "step", "buyer", "n_sellers"}
    for no, row in enumerate(rows[1:], start=2):
        if len(row) != len(TICK_COLUMNS):
            bad.append((no, f"expected {len(TICK_COLUMNS)} fields, got {len(row)}"))
            continue
        try:
            values = [int(c) if name in ints else float(c) for name, c in zip(TICK_COLUMNS, row)]
        except ValueError as exc:
            bad.append((no, str(exc)))
            continue
        for name, v in zip(TICK_COLUMNS, values):
            cols[name].append(v)
    if bad:
        raise LoadError(f"{path}: {len(bad)} malformed rows", bad)
    return DealTable(
        deal_index=np.array(cols["deal_index"], dtype=np.int64),
        step=np.array(cols["step"], dtype=np.int64),
        price=np.array(cols["price"], dtype=float),
        buyer=np.array(cols["buyer"], dtype=np.int64),
        n_sellers=np.array(cols["n_sellers"], dtype=np.int64),
        mu_n=np.array(cols["mu_n"], dtype=float),
        sum_bids=np.array(cols["sum_bids"], dtype=float),
        initial_sum_bids=initial_sum_bids,
    )
