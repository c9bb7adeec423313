import json
import os

from click.testing import CliRunner

from findesk.cli import main

GOLDEN = os.path.join(os.path.dirname(__file__), "fixtures", "golden")


def golden_config(tmp_path, mode="prediction"):
    text = f"""
[experiment]
mode = "{mode}"
start = "2024-01-02"
seed = 3
llm_mode = "replay"
cassette = "{os.path.join(GOLDEN, 'cassette.json')}"

[datasets.ACME]
prices = "{os.path.join(GOLDEN, 'acme_prices.csv')}"
news = "{os.path.join(GOLDEN, 'acme_news.jsonl')}"
statements = "{os.path.join(GOLDEN, 'acme_statements.json')}"

[retrieval]
fixture = "{os.path.join(GOLDEN, 'search_fixture.json')}"
"""
    path = tmp_path / f"config_{mode}.toml"
    path.write_text(text)
    return str(path)


def read_expected(name):
    with open(os.path.join(GOLDEN, name), encoding="utf-8") as fh:
        return fh.read()


def test_fit_arima_cli_emits_spec_json(tmp_path):
    from helpers import make_prices
    from findesk.market_data import dump_prices

    closes = [100.0 + 0.3 * i + 2.0 * ((i * 7) % 5) for i in range(120)]
    path = tmp_path / "long_prices.csv"
    path.write_text(dump_prices(make_prices(closes)))
    r = CliRunner().invoke(main, [
        "fit-arima", "--input", str(path),
        "--d", "1", "--pmax", "1", "--qmax", "1"])
    assert r.exit_code == 0, r.output
    spec = json.loads(r.output)
    assert spec["d"] == 1
    assert 0 <= spec["p"] <= 1 and 0 <= spec["q"] <= 1


def test_fit_arima_cli_reports_structured_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("date,open,high,low,close,volume\nnot-a-date,1,1,1,1,1\n")
    r = CliRunner().invoke(main, ["fit-arima", "--input", str(bad)])
    assert r.exit_code == 1
    err = json.loads(r.output.strip().splitlines()[-1])
    assert err["error"] == "MalformedRow"


def test_backtest_cli_hand_ledger(tmp_path):
    decisions = tmp_path / "decisions.csv"
    decisions.write_text("date,action\n2024-01-02,Buy\n2024-01-03,Hold\n")
    r = CliRunner().invoke(main, [
        "backtest", "--prices", os.path.join(GOLDEN, "acme_prices.csv"),
        "--decisions", str(decisions), "--profile", "Cons"])
    assert r.exit_code == 0, r.output
    out = json.loads(r.output)
    assert out["trades"] == 1
    # Buy at 102 with 50k: 490.19... shares; next close 101
    shares = 50_000.0 / 102.0
    assert out["final_equity"] == 50_000.0 + shares * 101.0


def test_experiment_run_cli_matches_golden(tmp_path):
    r = CliRunner().invoke(main, [
        "experiment", "run", "--config", golden_config(tmp_path)])
    assert r.exit_code == 0, r.output
    assert r.output == read_expected("expected_prediction.csv")


def test_experiment_run_cli_trading_and_out_dir(tmp_path):
    out_dir = tmp_path / "run1"
    r = CliRunner().invoke(main, [
        "experiment", "run", "--config", golden_config(tmp_path, mode="trading"),
        "--out", str(out_dir)])
    assert r.exit_code == 0, r.output
    assert r.output == read_expected("expected_trading.csv")
    assert (out_dir / "results.csv").read_text() == read_expected("expected_trading.csv")
    assert (out_dir / "config.toml").exists()


def test_predict_cli_markdown_format(tmp_path):
    r = CliRunner().invoke(main, [
        "predict", "--config", golden_config(tmp_path), "--format", "markdown"])
    assert r.exit_code == 0, r.output
    assert r.output.startswith("| label | acc | f1 | days |")
