"""Forecaster implementations behind one interface.

Every forecaster consumes only bars dated at or before the forecast origin;
the caller hands over a pre-sliced history, never the full series.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import date as Date
from typing import Protocol, Sequence

import requests

from ..errors import NonFiniteInput, ProviderError, TooShort
from ..market_data import PriceBar
from .arima import ArimaSpec, fit_arima, forecast_arima


@dataclass(frozen=True)
class PriceForecast:
    ticker: str
    origin: Date
    horizon: int
    values: tuple[float, ...]  # predicted closes for origin+1 .. origin+h

    def __post_init__(self):
        if len(self.values) != self.horizon:
            raise ValueError("forecast length must equal horizon")
        if any(not math.isfinite(v) for v in self.values):
            raise NonFiniteInput("forecast contains non-finite values")


class Forecaster(Protocol):
    def forecast(self, ticker: str, history: Sequence[PriceBar], h: int) -> PriceForecast: ...


def forecast_drift(history: Sequence[float], h: int) -> list[float]:
    """last + i * mean daily change; the reference forecaster."""
    if len(history) < 2:
        raise TooShort("drift needs at least two observations")
    drift = (history[-1] - history[0]) / (len(history) - 1)
    return [history[-1] + (i + 1) * drift for i in range(h)]


class DriftForecaster:
    def forecast(self, ticker: str, history: Sequence[PriceBar], h: int) -> PriceForecast:
        closes = [b.close for b in history]
        return PriceForecast(ticker=ticker, origin=history[-1].date, horizon=h,
                             values=tuple(forecast_drift(closes, h)))


class ArimaForecaster:
    def __init__(self, d: int = 2, p_max: int = 5, q_max: int = 5):
        self.d = d
        self.p_max = p_max
        self.q_max = q_max

    def forecast(self, ticker: str, history: Sequence[PriceBar], h: int) -> PriceForecast:
        closes = [b.close for b in history]
        spec = fit_arima(closes, d=self.d, p_max=self.p_max, q_max=self.q_max)
        return PriceForecast(ticker=ticker, origin=history[-1].date, horizon=h,
                             values=tuple(forecast_arima(spec, closes, h)))


class FixedSpecForecaster:
    """Forecasts from an already-fitted model; no refitting per origin."""

    def __init__(self, spec: ArimaSpec):
        self.spec = spec

    def forecast(self, ticker: str, history: Sequence[PriceBar], h: int) -> PriceForecast:
        closes = [b.close for b in history]
        return PriceForecast(ticker=ticker, origin=history[-1].date, horizon=h,
                             values=tuple(forecast_arima(self.spec, closes, h)))


class RemoteForecaster:
    """Adapter to an external forecasting HTTP service. The request carries
    open/high/low as exogenous covariates next to the close history; calls
    can be recorded and replayed through a plain JSON cassette."""

    def __init__(self, endpoint: str, cassette: dict | None = None,
                 mode: str = "passthrough", timeout: float = 60.0):
        self.endpoint = endpoint
        self.cassette = cassette if cassette is not None else {}
        self.mode = mode
        self.timeout = timeout

    def forecast(self, ticker: str, history: Sequence[PriceBar], h: int) -> PriceForecast:
        payload = {
            "ticker": ticker,
            "h": h,
            "close": [b.close for b in history],
            "covariates": {
                "open": [b.open for b in history],
                "high": [b.high for b in history],
                "low": [b.low for b in history],
            },
        }
        key = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        if self.mode == "replay":
            if key not in self.cassette:
                raise ProviderError(0, "no recorded forecast for request")
            values = self.cassette[key]
        else:
            resp = requests.post(self.endpoint, json=payload, timeout=self.timeout)
            if resp.status_code != 200:
                raise ProviderError(resp.status_code, resp.text[:500])
            values = resp.json()["values"]
            if self.mode == "record":
                self.cassette[key] = values
        return PriceForecast(ticker=ticker, origin=history[-1].date, horizon=h,
                             values=tuple(float(v) for v in values))
