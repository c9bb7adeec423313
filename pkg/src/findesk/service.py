"""HTTP session service for the human-in-the-loop protocol.

State machine per session: set preference -> decide -> (feedback) -> advance.
Decisions are impossible without a preference (403); advancing without a
decision for the current day is a conflict (409). Requests within one
session serialize on a per-session lock; sessions snapshot to disk after
every mutation so a restarted service resumes losslessly.
"""
from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import asdict, dataclass, field
from datetime import date as Date
from typing import Optional

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .backtest import PortfolioState
from .errors import EmptyPreference, NoDecision
from .experiment import RunContext, gather_signals
from .expert import (
    CorrectionState,
    ExpertDecision,
    RiskProfile,
    apply_feedback,
    decide,
    parse_risk_preference,
)
from .agents.statement import statement_signal


@dataclass
class Session:
    id: str
    ticker: str
    cursor: Date  # current trading day (forecast origin)
    portfolio: PortfolioState
    profile: Optional[RiskProfile] = None
    state: CorrectionState = field(default_factory=CorrectionState)
    pending: Optional[ExpertDecision] = None
    decisions: list = field(default_factory=list)
    equity: list = field(default_factory=list)  # (iso date, equity)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    signal_cache: dict = field(default_factory=dict, repr=False)
    intermediates: dict = field(default_factory=dict, repr=False)


class PreferenceBody(BaseModel):
    text: str


class DecideBody(BaseModel):
    attitude: Optional[str] = None


class FeedbackBody(BaseModel):
    feedback: str


def _err(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def _signal_json(sig):
    if sig is None:
        return None
    return {"agent": sig.agent, "date": sig.date.isoformat(), "trend": sig.trend,
            "confidence": sig.confidence, "rationale": sig.rationale,
            "provenance": list(sig.provenance)}


def create_app(ctx: RunContext, session_dir: Optional[str] = None,
               initial_capital: float = 100_000.0, rag: str = "adaptive") -> FastAPI:
    app = FastAPI(title="findesk session service")
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()

    def snapshot(s: Session):
        if not session_dir:
            return
        os.makedirs(session_dir, exist_ok=True)
        doc = {
            "id": s.id, "ticker": s.ticker, "cursor": s.cursor.isoformat(),
            "cash": s.portfolio.cash, "shares": s.portfolio.shares,
            "profile": asdict(s.profile) if s.profile else None,
            "weights": dict(s.state.weights),
            "history": [list(h) for h in s.state.history],
            "decisions": s.decisions, "equity": s.equity,
        }
        path = os.path.join(session_dir, f"{s.id}.json")
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, default=str)
        os.replace(tmp, path)

    def statement_for(s: Session, target: Date):
        key = ("statement", s.ticker)
        if key not in s.intermediates:
            dataset = ctx.datasets[s.ticker]
            try:
                seasonal, review, sig = statement_signal(dataset.statements, ctx.gateway, target)
                s.intermediates[key] = {"seasonal": seasonal, "review": review, "signal": sig}
            except Exception as exc:  # abstain but keep the reason inspectable
                s.intermediates[key] = {"error": str(exc), "signal": None}
        return s.intermediates[key]

    def signals_for(s: Session, origin: Date):
        if origin in s.signal_cache:
            return s.signal_cache[origin]
        dataset = ctx.datasets[s.ticker]
        calendar = dataset.trading_calendar
        i = calendar.index(origin)
        if i + 1 >= len(calendar):
            raise IndexError("origin is the last trading day")
        target = calendar[i + 1]
        stmt = statement_for(s, target)
        prompt_mark = len(ctx.gateway.prompt_log)
        sigs = gather_signals(dataset, origin, target, ctx, rag, stmt.get("signal"))
        retrieval_prompts = [p.user for p in ctx.gateway.prompt_log[prompt_mark:]]
        s.signal_cache[origin] = {"target": target, "signals": sigs,
                                  "prompts": retrieval_prompts}
        return s.signal_cache[origin]

    @app.post("/sessions")
    def create_session(body: dict):
        ticker = body.get("ticker")
        if ticker not in ctx.datasets:
            return _err(404, "unknown_ticker", f"no dataset for {ticker!r}")
        dataset = ctx.datasets[ticker]
        start = body.get("start_date") or body.get("start-date")
        calendar = dataset.trading_calendar
        cursor = calendar[0]
        if start:
            wanted = Date.fromisoformat(start)
            cursor = next((d for d in calendar if d >= wanted), calendar[0])
        sid = uuid.uuid4().hex[:12]
        s = Session(id=sid, ticker=ticker, cursor=cursor,
                    portfolio=PortfolioState(cash=initial_capital))
        s.equity.append([cursor.isoformat(), initial_capital])
        with registry_lock:
            sessions[sid] = s
        snapshot(s)
        return {"session_id": sid, "cursor": cursor.isoformat()}

    def get_session(sid: str) -> Optional[Session]:
        return sessions.get(sid)

    @app.put("/sessions/{sid}/preference")
    def set_preference(sid: str, body: PreferenceBody):
        s = get_session(sid)
        if s is None:
            return _err(404, "unknown_session", sid)
        with s.lock:
            try:
                s.profile = parse_risk_preference(body.text, ctx.gateway)
            except EmptyPreference as exc:
                return _err(400, "bad_preference", str(exc))
            snapshot(s)
            return {"kind": s.profile.kind,
                    "buy_fraction": s.profile.buy_fraction,
                    "sell_fraction": s.profile.sell_fraction}

    @app.get("/sessions/{sid}/signals")
    def get_signals(sid: str, date: Optional[str] = None):
        s = get_session(sid)
        if s is None:
            return _err(404, "unknown_session", sid)
        origin = Date.fromisoformat(date) if date else s.cursor
        bundle = signals_for(s, origin)
        stmt = s.intermediates.get(("statement", s.ticker), {})
        seasonal = stmt.get("seasonal")
        review = stmt.get("review")
        return {
            "origin": origin.isoformat(),
            "target": bundle["target"].isoformat(),
            "signals": {k: _signal_json(v) for k, v in bundle["signals"].items()},
            "intermediates": {
                "seasonal": {"per_period": dict(seasonal.per_period),
                             "summary": seasonal.summary} if seasonal else None,
                "review": {"review": review.review,
                           "stages": list(review.stage_assessments)} if review else None,
            },
        }

    @app.post("/sessions/{sid}/decide")
    def post_decide(sid: str, body: DecideBody):
        s = get_session(sid)
        if s is None:
            return _err(404, "unknown_session", sid)
        with s.lock:
            if s.profile is None:
                return _err(403, "no_preference", "set a risk preference before deciding")
            bundle = signals_for(s, s.cursor)
            try:
                decision = decide(
                    bundle["signals"], s.state, s.profile, bundle["target"],
                    gateway=ctx.gateway, mode="trading", attitude=body.attitude,
                    holding=s.portfolio.shares > 0,
                    fully_invested=s.portfolio.cash <= 1e-9)
            except NoDecision as exc:
                return _err(409, "no_decision", str(exc))
            s.pending = decision
            snapshot(s)
            return {
                "date": decision.date.isoformat(),
                "prediction": decision.prediction,
                "action": decision.action,
                "score": decision.score,
                "rationale": decision.rationale,
                "weights": dict(s.state.weights),
            }

    @app.post("/sessions/{sid}/feedback")
    def post_feedback(sid: str, body: FeedbackBody):
        s = get_session(sid)
        if s is None:
            return _err(404, "unknown_session", sid)
        with s.lock:
            if s.pending is None:
                return _err(409, "no_decision", "nothing to give feedback on")
            s.state = apply_feedback(
                s.state, body.feedback, s.pending.inputs,
                decision_trend=s.pending.prediction, gateway=ctx.gateway,
                date=s.pending.date)
            snapshot(s)
            return {"weights": dict(s.state.weights),
                    "history_length": len(s.state.history)}

    @app.post("/sessions/{sid}/advance")
    def post_advance(sid: str):
        s = get_session(sid)
        if s is None:
            return _err(404, "unknown_session", sid)
        with s.lock:
            if s.pending is None:
                return _err(409, "decide_first", "advance requires a decision for today")
            decision = s.pending
            dataset = ctx.datasets[s.ticker]
            target = decision.date
            price = dataset.prices.bar_at(target).close
            trade = s.portfolio.execute(decision.action, price,
                                        s.profile, day=target)
            s.cursor = target
            equity = s.portfolio.equity(price)
            s.equity.append([target.isoformat(), equity])
            s.decisions.append({
                "date": target.isoformat(), "prediction": decision.prediction,
                "action": decision.action, "score": decision.score,
            })
            s.pending = None
            snapshot(s)
            return {
                "cursor": s.cursor.isoformat(),
                "cash": s.portfolio.cash,
                "shares": s.portfolio.shares,
                "equity": equity,
                "trade": {"side": trade.side, "shares": trade.shares,
                          "price": trade.price} if trade else None,
            }

    @app.get("/sessions/{sid}/equity")
    def get_equity(sid: str):
        s = get_session(sid)
        if s is None:
            return _err(404, "unknown_session", sid)
        return {"points": s.equity}

    return app
