"""Desk-scale experiment runner: next-day prediction scoring, the
retrieval-gating ablation, and the trading-simulation table, all fully
deterministic in replay mode."""
from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass, field, replace as dc_replace
from datetime import date as Date
from typing import Mapping, Optional

from .agents.news_agent import news_signal
from .agents.signals import DOWN, UP, AgentSignal
from .agents.statement import statement_signal
from .agents.time_series import time_series_signal
from .backtest import (
    accuracy,
    annualized_return,
    f1,
    max_drawdown,
    sharpe,
    simulate,
    strategy_brsf,
    strategy_from_signals,
    strategy_random,
)
from .errors import DegenerateSeries, SimulationInfeasible
from .expert import CorrectionState, RiskProfile, decide
from .forecast.models import DriftForecaster, Forecaster
from .gateway import Gateway
from .market_data import Dataset
from .news.cleaning import CleanArticle
from .retrieval import InfoSet, QueryCache, SearchClient, retrieve_if_needed, search


@dataclass(frozen=True)
class ExperimentConfig:
    tickers: tuple[str, ...]
    start: Optional[Date] = None
    end: Optional[Date] = None
    mode: str = "prediction"  # prediction | trading
    rag: str = "adaptive"  # adaptive | always | off
    attitude: Optional[str] = None
    profiles: tuple[str, ...] = ("Cons", "MCons", "MAgg", "Agg")
    seed: int = 0
    horizon: int = 1
    initial_capital: float = 100_000.0
    llm_mode: str = "replay"
    cassette_path: Optional[str] = None
    f1_averaging: str = "positive"


@dataclass
class ResultsTable:
    columns: tuple[str, ...]
    rows: list[dict] = field(default_factory=list)

    def add(self, label: str, values: Mapping[str, object]):
        self.rows.append({"label": label, **values})

    def aggregates(self) -> dict:
        """Mean and sample std per numeric column, recomputed from rows."""
        out = {}
        for col in self.columns:
            vals = [r[col] for r in self.rows
                    if isinstance(r.get(col), (int, float)) and math.isfinite(r[col])]
            if not vals:
                continue
            out[col] = {
                "mean": sum(vals) / len(vals),
                "std": statistics.stdev(vals) if len(vals) > 1 else 0.0,
            }
        return out


@dataclass
class RunContext:
    """Everything a run needs besides the config: the datasets and the
    deterministic back ends (gateway, query cache, search client)."""
    datasets: Mapping[str, Dataset]
    gateway: Gateway
    cache: QueryCache
    search_client: SearchClient
    forecaster: Forecaster = field(default_factory=DriftForecaster)


def _as_clean(article) -> CleanArticle:
    if isinstance(article, CleanArticle):
        return article
    return CleanArticle(original=article, cleaned_text=article.text)


def gather_signals(dataset: Dataset, origin: Date, target: Date, ctx: RunContext,
                   rag: str, statement_sig: Optional[AgentSignal]
                   ) -> dict[str, Optional[AgentSignal]]:
    """The three specialist signals for one target day; None marks abstention."""
    time_sig = time_series_signal(dataset, origin, 1, ctx.forecaster)[0]

    news_sig = None
    rep = next((a for a in dataset.news if a.date == origin), None)
    if rep is not None:
        clean = _as_clean(rep)
        info: Optional[InfoSet] = None
        if rag == "adaptive":
            _, info = retrieve_if_needed(clean, ctx.gateway, ctx.cache, ctx.search_client)
        elif rag == "always":
            query = clean.title or clean.cleaned_text[:80]
            info = search(query, 5, ctx.cache, ctx.search_client)
        news_sig = news_signal(dataset.ticker, clean, info, ctx.gateway, target)

    stmt = None
    if statement_sig is not None:
        stmt = dc_replace(statement_sig, date=target)
    return {"time": time_sig, "news": news_sig, "statement": stmt}


def run_prediction(config: ExperimentConfig, ctx: RunContext) -> ResultsTable:
    """Score next-day Up/Down calls against realized directions."""
    table = ResultsTable(columns=("acc", "f1", "days"))
    for ticker in config.tickers:
        preds, actuals = prediction_series(config, ctx, ticker)
        table.add(ticker, {
            "acc": accuracy(preds, actuals),
            "f1": f1(preds, actuals, averaging=config.f1_averaging),
            "days": len(preds),
        })
    return table


def prediction_series(config: ExperimentConfig, ctx: RunContext, ticker: str
                      ) -> tuple[list[str], list[str]]:
    dataset = ctx.datasets[ticker]
    calendar = dataset.trading_calendar
    profile = RiskProfile.named("Cons")  # prediction mode is profile-invariant
    state = CorrectionState()

    try:
        _, _, stmt_sig = statement_signal(dataset.statements, ctx.gateway, calendar[0])
    except Exception:
        stmt_sig = None

    preds: list[str] = []
    actuals: list[str] = []
    for i, (origin, target) in enumerate(zip(calendar, calendar[1:])):
        if config.start and origin < config.start:
            continue
        if config.end and target > config.end:
            break
        signals = gather_signals(dataset, origin, target, ctx, config.rag, stmt_sig)
        decision = decide(signals, state, profile, target, gateway=ctx.gateway,
                          mode="prediction", attitude=config.attitude)
        realized = UP if dataset.prices.bar_at(target).close > dataset.prices.bar_at(origin).close else DOWN
        preds.append(decision.prediction)
        actuals.append(realized)
    return preds, actuals


def run_rag_ablation(config: ExperimentConfig, ctx_factory) -> dict:
    """Two identical runs differing only in the retrieval gate; ctx_factory
    must build a fresh context per arm so caches and logs stay separate."""
    arms = {}
    for rag in ("adaptive", "off"):
        arm_config = dc_replace(config, rag=rag)
        arms[rag] = run_prediction(arm_config, ctx_factory(rag))
    deltas = ResultsTable(columns=("acc_delta", "f1_delta"))
    for row_on, row_off in zip(arms["adaptive"].rows, arms["off"].rows):
        deltas.add(row_on["label"], {
            "acc_delta": row_on["acc"] - row_off["acc"],
            "f1_delta": row_on["f1"] - row_off["f1"],
        })
    return {"adaptive": arms["adaptive"], "off": arms["off"], "delta": deltas}


def run_trading(config: ExperimentConfig, ctx: RunContext) -> ResultsTable:
    """AR/MD/SR for every (strategy x profile) cell."""
    table = ResultsTable(columns=("ar", "md", "sr"))
    for ticker in config.tickers:
        dataset = ctx.datasets[ticker]
        calendar = [d for d in dataset.trading_calendar
                    if (not config.start or d >= config.start)
                    and (not config.end or d <= config.end)]
        closes = {d: dataset.prices.bar_at(d).close for d in calendar}
        close_list = [closes[d] for d in calendar]

        preds, _ = prediction_series(config, ctx, ticker)
        # predictions target calendar[i+1]; decisions execute on the target day
        desk_days = [d for d in dataset.trading_calendar[1:]
                     if (not config.start or d >= config.start)
                     and (not config.end or d <= config.end)]
        desk = strategy_from_signals(list(zip(desk_days, preds)))

        strategies = {
            "Random": strategy_random(calendar, config.seed),
            "BRSF": strategy_brsf(calendar, close_list, streak=2),
            "Desk": desk,
        }
        for profile_kind in config.profiles:
            profile = RiskProfile.named(profile_kind)
            for name, decisions in strategies.items():
                label = f"{ticker}/{name}/{profile_kind}"
                try:
                    curve, _ = simulate(decisions, closes, profile, config.initial_capital)
                except SimulationInfeasible:
                    table.add(label, {"ar": "/", "md": "/", "sr": "/"})
                    continue
                try:
                    sr = sharpe(curve)
                except DegenerateSeries:
                    sr = math.nan
                table.add(label, {
                    "ar": annualized_return(curve),
                    "md": max_drawdown(curve),
                    "sr": sr,
                })
    return table


def emit_report(table: ResultsTable, format: str = "csv") -> str:
    """Stable, byte-reproducible rendering of a results table."""
    agg = table.aggregates()

    def fmt(v) -> str:
        if isinstance(v, float):
            return "nan" if math.isnan(v) else f"{v:.6f}"
        return str(v)

    if format == "csv":
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["label", *table.columns])
        for row in table.rows:
            w.writerow([row["label"], *[fmt(row.get(c, "")) for c in table.columns]])
        for stat in ("mean", "std"):
            w.writerow([stat, *[fmt(agg[c][stat]) if c in agg else "" for c in table.columns]])
        return out.getvalue()

    if format == "markdown":
        lines = ["| label | " + " | ".join(table.columns) + " |",
                 "|" + "---|" * (len(table.columns) + 1)]
        for row in table.rows:
            lines.append("| " + row["label"] + " | "
                         + " | ".join(fmt(row.get(c, "")) for c in table.columns) + " |")
        for stat in ("mean", "std"):
            lines.append("| " + stat + " | "
                         + " | ".join(fmt(agg[c][stat]) if c in agg else "" for c in table.columns)
                         + " |")
        return "\n".join(lines) + "\n"

    raise ValueError(f"unknown report format: {format}")
