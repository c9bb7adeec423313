"""Time-series agent: forecast closes past the origin and chain them through
the trend mapping. Confidence is absent; forecasters emit point estimates."""
from __future__ import annotations

from datetime import date as Date, timedelta

from ..market_data import Dataset
from .signals import AgentSignal, trend_map


def time_series_signal(dataset: Dataset, origin: Date, h: int, forecaster) -> list[AgentSignal]:
    history = dataset.prices.up_to(origin)
    if not history:
        raise ValueError(f"no bars at or before {origin}")
    fc = forecaster.forecast(dataset.ticker, history, h)

    calendar = dataset.trading_calendar
    try:
        i = calendar.index(history[-1].date)
    except ValueError:
        i = -1
    signals = []
    prev = history[-1].close
    for step, pred in enumerate(fc.values, start=1):
        if 0 <= i and i + step < len(calendar):
            target = calendar[i + step]
        else:
            # past the known calendar: extrapolate one day per step
            target = history[-1].date + timedelta(days=step)
        signals.append(AgentSignal(
            agent="time", date=target, trend=trend_map(prev, pred),
            rationale=f"forecast close {pred:.4f} vs previous {prev:.4f}",
            provenance=(f"forecast:{fc.origin.isoformat()}+{step}",),
        ))
        prev = pred
    return signals
