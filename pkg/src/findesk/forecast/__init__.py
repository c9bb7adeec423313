from .arima import ArimaSpec, difference, fit_arima, forecast_arima, integrate
from .models import (
    ArimaForecaster,
    DriftForecaster,
    Forecaster,
    PriceForecast,
    RemoteForecaster,
    forecast_drift,
)

__all__ = [
    "ArimaSpec", "difference", "fit_arima", "forecast_arima", "integrate",
    "ArimaForecaster", "DriftForecaster", "Forecaster", "PriceForecast",
    "RemoteForecaster", "forecast_drift",
]
