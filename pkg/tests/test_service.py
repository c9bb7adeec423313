import json
import os
from datetime import date as Date

import pytest
from fastapi.testclient import TestClient

from findesk.experiment import RunContext
from findesk.gateway import Cassette, Gateway
from findesk.market_data import build_dataset, load_news, load_prices, load_statements
from findesk.retrieval import QueryCache, StubSearchClient
from findesk.service import create_app

from helpers import stub_provider

GOLDEN = os.path.join(os.path.dirname(__file__), "fixtures", "golden")


def make_ctx():
    dataset = build_dataset(
        load_prices(os.path.join(GOLDEN, "acme_prices.csv"), ticker="ACME"),
        load_news(os.path.join(GOLDEN, "acme_news.jsonl")),
        load_statements(os.path.join(GOLDEN, "acme_statements.json"), ticker="ACME"),
    )
    gateway = Gateway(provider=stub_provider, cassette=Cassette(), mode="record")
    return RunContext(
        datasets={"ACME": dataset}, gateway=gateway, cache=QueryCache(),
        search_client=StubSearchClient(path=os.path.join(GOLDEN, "search_fixture.json")))


@pytest.fixture
def client(tmp_path):
    app = create_app(make_ctx(), session_dir=str(tmp_path / "sessions"))
    return TestClient(app)


def open_session(client, start="2024-01-02"):
    r = client.post("/sessions", json={"ticker": "ACME", "start_date": start})
    assert r.status_code == 200
    return r.json()["session_id"]


def test_unknown_ticker_and_session():
    client = TestClient(create_app(make_ctx()))
    assert client.post("/sessions", json={"ticker": "NOPE"}).status_code == 404
    assert client.post("/sessions/abc/decide", json={}).status_code == 404


def test_decide_requires_preference_first(client):
    sid = open_session(client)
    r = client.post(f"/sessions/{sid}/decide", json={})
    assert r.status_code == 403
    assert r.json()["code"] == "no_preference"


def test_preference_echoes_profile(client):
    sid = open_session(client)
    r = client.put(f"/sessions/{sid}/preference", json={"text": "moderately aggressive"})
    assert r.status_code == 200
    assert r.json() == {"kind": "MAgg", "buy_fraction": 1.0, "sell_fraction": 0.5}
    # free text goes through the model (stub maps loss-aversion to MCons)
    sid2 = open_session(client)
    r2 = client.put(f"/sessions/{sid2}/preference",
                    json={"text": "I hate losing money, keep me safe"})
    assert r2.json()["kind"] == "MCons"


def test_blank_preference_rejected(client):
    sid = open_session(client)
    r = client.put(f"/sessions/{sid}/preference", json={"text": "   "})
    assert r.status_code == 400


def test_advance_before_decide_conflicts(client):
    sid = open_session(client)
    client.put(f"/sessions/{sid}/preference", json={"text": "conservative"})
    r = client.post(f"/sessions/{sid}/advance")
    assert r.status_code == 409
    assert r.json()["code"] == "decide_first"


def test_decide_then_advance_moves_cursor_and_equity(client):
    sid = open_session(client)
    client.put(f"/sessions/{sid}/preference", json={"text": "conservative"})
    d = client.post(f"/sessions/{sid}/decide", json={}).json()
    assert d["prediction"] in ("Up", "Down")
    a = client.post(f"/sessions/{sid}/advance").json()
    assert a["cursor"] == d["date"]
    eq = client.get(f"/sessions/{sid}/equity").json()["points"]
    assert len(eq) == 2
    assert eq[0][1] == 100_000.0
    if d["action"] == "Buy":
        price = a["trade"]["price"]
        assert a["trade"]["side"] == "Buy"
        assert a["cash"] == pytest.approx(100_000.0 * 0.5)  # Cons spends half
        assert a["equity"] == pytest.approx(a["cash"] + a["shares"] * price)
    else:
        assert a["trade"] is None


def test_feedback_updates_weights(client):
    sid = open_session(client)
    client.put(f"/sessions/{sid}/preference", json={"text": "conservative"})
    d = client.post(f"/sessions/{sid}/decide", json={}).json()
    assert d["weights"] == {"time": 1.0, "news": 1.0, "statement": 1.0}
    f = client.post(f"/sessions/{sid}/feedback", json={"feedback": "disagree"}).json()
    assert f["history_length"] == 1
    assert any(w != 1.0 for w in f["weights"].values())
    assert all(0.1 <= w <= 10.0 for w in f["weights"].values())


def test_feedback_without_decision_conflicts(client):
    sid = open_session(client)
    client.put(f"/sessions/{sid}/preference", json={"text": "conservative"})
    r = client.post(f"/sessions/{sid}/feedback", json={"feedback": "agree"})
    assert r.status_code == 409


def test_signals_endpoint_is_idempotent(client):
    sid = open_session(client)
    client.put(f"/sessions/{sid}/preference", json={"text": "conservative"})
    first = client.get(f"/sessions/{sid}/signals").json()
    second = client.get(f"/sessions/{sid}/signals").json()
    assert first == second
    assert set(first["signals"]) == {"time", "news", "statement"}
    assert first["signals"]["time"]["agent"] == "time"
    assert first["intermediates"]["seasonal"] is not None


def test_full_walk_grows_equity_series(client):
    sid = open_session(client)
    client.put(f"/sessions/{sid}/preference", json={"text": "aggressive"})
    for step in range(4):
        assert client.post(f"/sessions/{sid}/decide", json={}).status_code == 200
        assert client.post(f"/sessions/{sid}/advance").status_code == 200
    points = client.get(f"/sessions/{sid}/equity").json()["points"]
    assert len(points) == 5
    dates = [p[0] for p in points]
    assert dates == sorted(dates)


def test_snapshot_written_after_each_mutation(tmp_path):
    sessions_dir = tmp_path / "sessions"
    app = create_app(make_ctx(), session_dir=str(sessions_dir))
    client = TestClient(app)
    sid = open_session(client)
    client.put(f"/sessions/{sid}/preference", json={"text": "conservative"})
    client.post(f"/sessions/{sid}/decide", json={})
    client.post(f"/sessions/{sid}/advance")
    path = sessions_dir / f"{sid}.json"
    assert path.exists()
    doc = json.loads(path.read_text())
    assert doc["id"] == sid
    assert doc["profile"]["kind"] == "Cons"
    assert len(doc["equity"]) == 2
    assert doc["cursor"] == doc["equity"][-1][0]


def test_decide_is_replayable_within_session(client):
    sid = open_session(client)
    client.put(f"/sessions/{sid}/preference", json={"text": "conservative"})
    d1 = client.post(f"/sessions/{sid}/decide", json={}).json()
    d2 = client.post(f"/sessions/{sid}/decide", json={}).json()
    assert (d1["prediction"], d1["action"], d1["score"]) == \
        (d2["prediction"], d2["action"], d2["score"])
