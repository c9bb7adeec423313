"""Command-line entry points."""
from __future__ import annotations

import json
import sys
from datetime import date as Date

import click

from . import market_data
from .errors import FindeskError
from .experiment import (
    ExperimentConfig,
    RunContext,
    emit_report,
    run_prediction,
    run_rag_ablation,
    run_trading,
)
from .expert import RiskProfile
from .forecast import ArimaForecaster, DriftForecaster, fit_arima
from .gateway import Cassette, Gateway, OpenAIChatProvider
from .news.cleaning import BiasRuleSet
from .news.pipeline import preprocess
from .retrieval import QueryCache, StubSearchClient

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib


def build_gateway(llm_mode: str, cassette: str | None) -> Gateway:
    cas = Cassette(path=cassette) if cassette else Cassette()
    if llm_mode == "replay":
        return Gateway(cassette=cas, mode="replay")
    mode = "record" if llm_mode == "record" else "passthrough"
    return Gateway(provider=OpenAIChatProvider(), cassette=cas, mode=mode)


def llm_options(f):
    f = click.option("--llm-mode", type=click.Choice(["record", "replay", "live"]),
                     default="replay", show_default=True)(f)
    f = click.option("--cassette", type=click.Path(), default=None)(f)
    f = click.option("--seed", type=int, default=0, show_default=True)(f)
    return f


@click.group()
def main():
    """Multi-agent market analysis desk."""


@main.command("preprocess")
@click.option("--prices", required=True, type=click.Path(exists=True))
@click.option("--news", "news_path", required=True, type=click.Path(exists=True))
@click.option("--statements", required=True, type=click.Path(exists=True))
@click.option("--rules", required=True, type=click.Path(exists=True))
@click.option("--k", type=int, default=2, show_default=True)
@click.option("--out", type=click.Path(), default=None,
              help="Write the representative news JSON-lines here.")
@llm_options
def preprocess_cmd(prices, news_path, statements, rules, k, out, llm_mode, cassette, seed):
    """Clean news and keep one representative article per trading day."""
    try:
        dataset = market_data.build_dataset(
            market_data.load_prices(prices),
            market_data.load_news(news_path),
            market_data.load_statements(statements),
        )
        ruleset = BiasRuleSet.load(rules)
        gateway = build_gateway(llm_mode, cassette) if cassette or llm_mode == "live" else None
        cleaned, _ = preprocess(dataset, ruleset, gateway, k=k, seed=seed)
    except FindeskError as exc:
        _fail(exc)
    text = market_data.dump_news(cleaned.news)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


@main.command("fit-arima")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--d", type=int, default=2, show_default=True)
@click.option("--pmax", type=int, default=5, show_default=True)
@click.option("--qmax", type=int, default=5, show_default=True)
def fit_arima_cmd(input_path, d, pmax, qmax):
    """Grid-fit an ARIMA model to the close column of a prices CSV."""
    try:
        series = market_data.load_prices(input_path)
        spec = fit_arima(list(series.closes), d=d, p_max=pmax, q_max=qmax)
    except FindeskError as exc:
        _fail(exc)
    click.echo(spec.to_json())


@main.command("predict")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["csv", "markdown"]), default="csv")
def predict_cmd(config_path, fmt):
    """Run next-day prediction scoring from a TOML config."""
    config, ctx = _load_config(config_path)
    table = run_prediction(config, ctx)
    click.echo(emit_report(table, fmt), nl=False)


@main.command("backtest")
@click.option("--prices", required=True, type=click.Path(exists=True))
@click.option("--decisions", required=True, type=click.Path(exists=True),
              help="CSV with columns date,action")
@click.option("--profile", type=click.Choice(["Cons", "MCons", "MAgg", "Agg"]),
              default="Cons", show_default=True)
@click.option("--initial", type=float, default=100_000.0, show_default=True)
def backtest_cmd(prices, decisions, profile, initial):
    """Simulate a decisions file over a price path and print AR/SR/MD."""
    import csv as _csv

    from .backtest import annualized_return, max_drawdown, sharpe, simulate
    from .errors import DegenerateSeries

    try:
        series = market_data.load_prices(prices)
        with open(decisions, newline="", encoding="utf-8") as fh:
            rows = [(Date.fromisoformat(r["date"]), r["action"])
                    for r in _csv.DictReader(fh)]
        closes = {b.date: b.close for b in series.bars}
        curve, log = simulate(rows, closes, RiskProfile.named(profile), initial)
    except FindeskError as exc:
        _fail(exc)
    try:
        sr = sharpe(curve)
    except DegenerateSeries:
        sr = float("nan")
    click.echo(json.dumps({
        "ar": annualized_return(curve),
        "sr": sr,
        "md": max_drawdown(curve),
        "final_equity": curve.equities[-1],
        "trades": len(log.entries),
    }, indent=2))


@main.group("experiment")
def experiment_group():
    """Protocol runners."""


@experiment_group.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None, help="Run directory for outputs.")
@click.option("--format", "fmt", type=click.Choice(["csv", "markdown"]), default="csv")
def experiment_run(config_path, out, fmt):
    """Run the configured experiment and emit its results table."""
    config, ctx = _load_config(config_path)
    if config.mode == "trading":
        table = run_trading(config, ctx)
    elif config.mode == "ablation":
        raw = _read_config(config_path)
        tables = run_rag_ablation(config, lambda rag: _build_context(raw, config))
        table = tables["delta"]
    else:
        table = run_prediction(config, ctx)
    report = emit_report(table, fmt)
    if out:
        import os

        os.makedirs(out, exist_ok=True)
        with open(f"{out}/results.{fmt[:3] if fmt == 'markdown' else 'csv'}", "w") as fh:
            fh.write(report)
        with open(f"{out}/config.toml", "w") as fh:
            with open(config_path) as src:
                fh.write(src.read())
    click.echo(report, nl=False)


@main.command("serve")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--session-dir", type=click.Path(), default=None)
def serve_cmd(config_path, port, host, session_dir):
    """Start the human-in-the-loop session service."""
    import uvicorn

    from .service import create_app

    config, ctx = _load_config(config_path)
    app = create_app(ctx, session_dir=session_dir, initial_capital=config.initial_capital,
                     rag=config.rag)
    uvicorn.run(app, host=host, port=port)


def _read_config(path) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _load_config(path) -> tuple[ExperimentConfig, RunContext]:
    raw = _read_config(path)
    exp = raw.get("experiment", {})
    config = ExperimentConfig(
        tickers=tuple(raw.get("datasets", {}).keys()),
        start=Date.fromisoformat(exp["start"]) if "start" in exp else None,
        end=Date.fromisoformat(exp["end"]) if "end" in exp else None,
        mode=exp.get("mode", "prediction"),
        rag=exp.get("rag", "adaptive"),
        attitude=exp.get("attitude"),
        profiles=tuple(exp.get("profiles", ["Cons", "MCons", "MAgg", "Agg"])),
        seed=exp.get("seed", 0),
        initial_capital=exp.get("initial_capital", 100_000.0),
        llm_mode=exp.get("llm_mode", "replay"),
        cassette_path=exp.get("cassette"),
        f1_averaging=exp.get("f1_averaging", "positive"),
    )
    return config, _build_context(raw, config)


def _build_context(raw: dict, config: ExperimentConfig) -> RunContext:
    datasets = {}
    for ticker, paths in raw.get("datasets", {}).items():
        datasets[ticker] = market_data.build_dataset(
            market_data.load_prices(paths["prices"], ticker=ticker),
            market_data.load_news(paths["news"]),
            market_data.load_statements(paths["statements"], ticker=ticker),
        )
    gateway = build_gateway(config.llm_mode, config.cassette_path)
    retrieval_cfg = raw.get("retrieval", {})
    cache = QueryCache(path=retrieval_cfg.get("cache"))
    client = StubSearchClient(path=retrieval_cfg.get("fixture")) \
        if retrieval_cfg.get("fixture") else StubSearchClient()
    fc_cfg = raw.get("forecast", {})
    if fc_cfg.get("model") == "arima":
        forecaster = ArimaForecaster(d=fc_cfg.get("d", 2),
                                     p_max=fc_cfg.get("pmax", 5), q_max=fc_cfg.get("qmax", 5))
    else:
        forecaster = DriftForecaster()
    return RunContext(datasets=datasets, gateway=gateway, cache=cache,
                      search_client=client, forecaster=forecaster)


def _fail(exc: Exception):
    click.echo(json.dumps({"error": type(exc).__name__, "message": str(exc)}), err=True)
    sys.exit(1)


if __name__ == "__main__":
    main()
