"""Shared test plumbing: a deterministic stub LLM provider and dataset
builders. The stub keys off each call site's distinct system prompt so a
recorded cassette replays byte-identically."""
from __future__ import annotations

import hashlib
import json
import re
from datetime import date as Date, timedelta

from findesk.gateway import Completion, Gateway, Prompt
from findesk.market_data import (
    Dataset,
    Market,
    NewsArticle,
    PriceBar,
    PriceSeries,
    StatementBundle,
    build_dataset,
)

# marker token: articles containing it are "unfamiliar" and trigger search
UNKNOWN_TOKEN = "Zorvex"


def _digest(text: str) -> int:
    return int(hashlib.sha256(text.encode("utf-8")).hexdigest(), 16)


def stub_provider(prompt: Prompt) -> Completion:
    system = prompt.system
    user = prompt.user

    if "copy editor" in system:
        return Completion(text='{"bias_found": false}')

    if "decide whether a financial news article" in system:
        need = UNKNOWN_TOKEN in user
        queries = [f"what is {UNKNOWN_TOKEN}"] if need else []
        return Completion(text=json.dumps({
            "need_search": need, "queries": queries,
            "rationale": "unfamiliar entity" if need else "well-known context"}))

    if "financial news analyst" in system:
        up = _digest(user) % 2 == 0
        return Completion(text=json.dumps({
            "summary": "stub take on the article",
            "trend": "Up" if up else "Down",
            "confidence": 0.8 if up else 0.6}))

    if "fundamental analyst" in system:
        if "seasonal patterns" in user and "SEASONAL ANALYSIS" not in user:
            m = re.search(r"for the periods\s+(.+?)\. Identify", user, re.DOTALL)
            periods = [p.strip() for p in m.group(1).split(",")] if m else ["FY"]
            return Completion(text=json.dumps({
                "per_period": {p: f"stable operations in {p}" for p in periods},
                "summary": "mild seasonality, Q4-weighted revenue"}))
        if "comprehensive review" in user:
            return Completion(text=json.dumps({
                "review": "healthy balance sheet, improving cash generation",
                "stages": {"FY": "solid"}}))
        # trend step, with a logprob for the trend token
        return Completion(
            text=json.dumps({"per_period_trend": {"FY": "Up"}, "trend": "Up",
                             "confidence": 0.65}),
            token_logprobs=(("Up", -0.4),))

    if "arbitrate" in system:
        return Completion(text='{"trend": "Down"}')

    if "one-paragraph investment rationales" in system:
        return Completion(text="Signals summarized: stub rationale.")

    if "map an investor's stated risk preference" in system:
        lowered = user.lower()
        if "hate losing" in lowered or "cautious" in lowered:
            kind = "MCons"
        elif "yolo" in lowered or "maximum risk" in lowered:
            kind = "Agg"
        else:
            kind = "MAgg"
        return Completion(text=json.dumps({"kind": kind}))

    if "classify an investor's reaction" in system:
        verdict = "disagree" if "disagree" in user.lower() or "wrong" in user.lower() else "agree"
        return Completion(text=json.dumps({"verdict": verdict, "agent_overrides": {}}))

    raise AssertionError(f"stub provider has no rule for system prompt: {system[:60]!r}")


def make_gateway(mode: str = "record", cassette=None) -> Gateway:
    from findesk.gateway import Cassette

    return Gateway(provider=stub_provider if mode != "replay" else None,
                   cassette=cassette if cassette is not None else Cassette(),
                   mode=mode)


def weekdays(start: Date, n: int) -> list[Date]:
    out = []
    d = start
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d += timedelta(days=1)
    return out


def make_prices(closes, start: Date = Date(2024, 1, 1), ticker: str = "ACME") -> PriceSeries:
    days = weekdays(start, len(closes))
    bars = []
    for d, c in zip(days, closes):
        bars.append(PriceBar(date=d, open=c * 0.99, high=c * 1.02, low=c * 0.98,
                             close=c, volume=1000.0))
    return PriceSeries(ticker=ticker, market=Market.US, bars=tuple(bars))


def make_statements(ticker: str = "ACME") -> StatementBundle:
    return StatementBundle(ticker=ticker, periods={
        "Q1": {"revenue": 10.0, "net_income": 1.0},
        "Q2": {"revenue": 12.0, "net_income": 1.5},
        "Q3": {"revenue": 11.0, "net_income": 1.2},
        "FY": {"revenue": 46.0, "net_income": 5.0},
    })


def make_dataset(closes, news_texts=None, start: Date = Date(2024, 1, 1),
                 ticker: str = "ACME") -> Dataset:
    """news_texts: map day-index -> list of (title, text)."""
    prices = make_prices(closes, start=start, ticker=ticker)
    days = prices.dates
    news = []
    for idx, items in (news_texts or {}).items():
        for title, text in items:
            news.append(NewsArticle(title=title, date=days[idx], text=text))
    return build_dataset(prices, news, make_statements(ticker))


def run_service_script(client) -> dict:
    """The scripted human-in-the-loop conversation used by both the golden
    cassette recorder and the acceptance suite. Returns every response."""
    out = {}
    r = client.post("/sessions", json={"ticker": "ACME", "start_date": "2024-01-02"})
    sid = r.json()["session_id"]
    out["create"] = r
    out["decide_without_preference"] = client.post(f"/sessions/{sid}/decide", json={})
    out["preference"] = client.put(f"/sessions/{sid}/preference",
                                   json={"text": "conservative"})
    out["advance_before_decide"] = client.post(f"/sessions/{sid}/advance")
    out["decide1"] = client.post(f"/sessions/{sid}/decide", json={})
    out["feedback"] = client.post(f"/sessions/{sid}/feedback",
                                  json={"feedback": "disagree"})
    out["advance1"] = client.post(f"/sessions/{sid}/advance")
    out["decide2"] = client.post(f"/sessions/{sid}/decide", json={})
    out["advance2"] = client.post(f"/sessions/{sid}/advance")
    out["equity"] = client.get(f"/sessions/{sid}/equity")
    return out
