"""ARIMA estimated by conditional sum of squares with AIC grid selection.

Estimation differences the series d times, then for each (p, q) cell
minimizes the CSS of the ARMA recursion with a quasi-Newton optimizer
(zero-initialized coefficients, pre-sample innovations zero, first p
observations conditioned on). AIC = 2k + n*ln(CSS/n) over the conditioned
sample; ties break to smaller p+q, then smaller p.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from ..errors import NonFiniteInput, OptimizerDiverged, TooShort

MIN_OBS_MARGIN = 30
SIGMA_FLOOR = 1e-12


@dataclass(frozen=True)
class ArimaSpec:
    p: int
    d: int
    q: int
    phi: tuple[float, ...] = ()
    theta: tuple[float, ...] = ()
    intercept: float = 0.0
    sigma2: float = SIGMA_FLOOR
    aic: float = math.nan
    bic: float = math.nan

    def __post_init__(self):
        if self.d < 0 or self.p < 0 or self.q < 0:
            raise ValueError("orders must be non-negative")
        if len(self.phi) != self.p or len(self.theta) != self.q:
            raise ValueError("coefficient count does not match order")

    def to_json(self) -> str:
        return json.dumps({
            "p": self.p, "d": self.d, "q": self.q,
            "phi": list(self.phi), "theta": list(self.theta),
            "intercept": self.intercept, "sigma2": self.sigma2,
            "aic": self.aic, "bic": self.bic,
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ArimaSpec":
        raw = json.loads(text)
        return cls(p=raw["p"], d=raw["d"], q=raw["q"],
                   phi=tuple(raw["phi"]), theta=tuple(raw["theta"]),
                   intercept=raw["intercept"], sigma2=raw["sigma2"],
                   aic=raw.get("aic", math.nan), bic=raw.get("bic", math.nan))


def difference(series: np.ndarray, d: int) -> np.ndarray:
    y = np.asarray(series, dtype=float)
    for _ in range(d):
        y = np.diff(y)
    return y


def integrate(forecast: np.ndarray, history: np.ndarray, d: int) -> np.ndarray:
    """Undo d rounds of differencing; exact inverse of difference() on the
    forecast extension of the original series."""
    levels = [np.asarray(history, dtype=float)]
    for _ in range(d):
        levels.append(np.diff(levels[-1]))
    out = np.asarray(forecast, dtype=float)
    for level in reversed(levels[:-1]):
        out = level[-1] + np.cumsum(out)
    return out


def _residuals(y: np.ndarray, p: int, q: int, params: np.ndarray) -> np.ndarray:
    """Innovations from t=p onward; the first p observations are conditioned
    on and pre-sample innovations are zero. The MA recursion
    e_t = z_t - sum_j theta_j e_{t-j} is an IIR filter."""
    from scipy.signal import lfilter

    c = params[0]
    phi = params[1:1 + p]
    theta = params[1 + p:1 + p + q]
    n = len(y)
    z = y[p:] - c
    for i in range(p):
        z = z - phi[i] * y[p - 1 - i:n - 1 - i]
    if q == 0:
        return z
    return lfilter([1.0], np.concatenate(([1.0], theta)), z)


def _min_root_modulus(coefs: np.ndarray, sign: float) -> float:
    """Smallest root modulus of 1 + sign*(c1 z + ... + ck z^k); stationarity
    (AR, sign=-1) and invertibility (MA, sign=+1) require it to exceed 1."""
    if len(coefs) == 0 or not np.any(coefs):
        return math.inf
    poly = np.concatenate(([1.0], sign * np.asarray(coefs)))
    roots = np.roots(poly[::-1])
    return float(np.min(np.abs(roots))) if len(roots) else math.inf


def _css(y: np.ndarray, p: int, q: int, params: np.ndarray) -> float:
    phi = params[1:1 + p]
    theta = params[1 + p:1 + p + q]
    # keep the search inside the stationary/invertible region; outside it the
    # CSS surface rewards explosive filters that merely memorize noise
    m = min(_min_root_modulus(phi, -1.0), _min_root_modulus(theta, 1.0))
    if m <= 1.0:
        return 1e10 * (2.0 - m)
    e = _residuals(y, p, q, params)
    s = float(np.dot(e, e))
    return s if math.isfinite(s) else 1e300


def fit_arima(series: Sequence[float], d: int = 2, p_max: int = 5, q_max: int = 5) -> ArimaSpec:
    x = np.asarray(list(series), dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("series contains non-finite values")
    if len(x) < MIN_OBS_MARGIN + d:
        raise TooShort(f"need at least {MIN_OBS_MARGIN + d} observations, got {len(x)}")
    y = difference(x, d)

    candidates: list[ArimaSpec] = []
    for p in range(p_max + 1):
        for q in range(q_max + 1):
            try:
                candidates.append(_fit_cell(y, p, d, q))
            except OptimizerDiverged:
                continue
    if not candidates:
        raise OptimizerDiverged(-1, -1)
    return min(candidates, key=lambda s: (s.aic, s.p + s.q, s.p))


def _fit_cell(y: np.ndarray, p: int, d: int, q: int) -> ArimaSpec:
    k = p + q + 1
    x0 = np.zeros(k)
    if p + q == 0:
        params = np.array([float(np.mean(y))]) if len(y) else x0
    else:
        result = minimize(lambda th: _css(y, p, q, th), x0, method="L-BFGS-B")
        if not np.all(np.isfinite(result.x)):
            raise OptimizerDiverged(p, q)
        params = result.x
    css = _css(y, p, q, params)
    n = len(y) - p
    if n <= 0 or css >= 1e300:
        raise OptimizerDiverged(p, q)
    sigma2 = max(css / n, SIGMA_FLOOR)
    aic = 2 * k + n * math.log(max(css / n, SIGMA_FLOOR))
    bic = k * math.log(n) + n * math.log(max(css / n, SIGMA_FLOOR))
    return ArimaSpec(p=p, d=d, q=q,
                     phi=tuple(params[1:1 + p]),
                     theta=tuple(params[1 + p:1 + p + q]),
                     intercept=float(params[0]),
                     sigma2=sigma2, aic=aic, bic=bic)


def forecast_arima(spec: ArimaSpec, history: Sequence[float], h: int) -> list[float]:
    """Recursive h-step forecast on the differenced scale, integrated back."""
    if h < 1:
        raise ValueError("horizon must be >= 1")
    x = np.asarray(list(history), dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("history contains non-finite values")
    if len(x) <= spec.d + spec.p:
        raise TooShort("history shorter than d + p")
    y = difference(x, spec.d)
    params = np.concatenate([[spec.intercept], spec.phi, spec.theta])
    e_tail = np.zeros(len(y))
    e_tail[spec.p:] = _residuals(y, spec.p, spec.q, params)

    y_ext = list(y)
    e_ext = list(e_tail)
    out = []
    for _ in range(h):
        t = len(y_ext)
        ar = sum(spec.phi[i] * y_ext[t - 1 - i] for i in range(spec.p))
        ma = sum(spec.theta[j] * e_ext[t - 1 - j] for j in range(spec.q) if t - 1 - j >= 0)
        nxt = spec.intercept + ar + ma
        y_ext.append(nxt)
        e_ext.append(0.0)
        out.append(nxt)
    return list(integrate(np.asarray(out), x, spec.d))
