"""Report agent / AI expert: risk-preference parsing, signal fusion, and the
feedback-evolved per-agent weights.

Fusion is deterministic arithmetic: score = sum over agents of
weight * direction * confidence (Up=+1, Down=-1, missing confidence=1).
The model is consulted only to break exact ties, to summarize rationales,
and to interpret free-text preference or feedback.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import date as Date
from typing import Mapping, Optional

from .agents.signals import DOWN, UP, AgentSignal
from .errors import EmptyPreference, NoDecision
from .gateway import FieldSpec, Gateway, Prompt, UnparseableAfterRepair

FEEDBACK_ETA = 0.1
WEIGHT_FLOOR = 0.1
WEIGHT_CEIL = 10.0

ATTITUDES = ("Sensitive", "Insensitive", "Optimistic")

# (buy fraction of idle cash, sell fraction of held shares)
NAMED_PROFILES = {
    "Cons": (0.5, 1.0),
    "MCons": (0.7, 1.0),
    "MAgg": (1.0, 0.5),
    "Agg": (1.0, 0.3),
}


@dataclass(frozen=True)
class RiskProfile:
    kind: str  # Cons | MCons | MAgg | Agg | Custom
    buy_fraction: float
    sell_fraction: float
    free_text: str = ""
    metrics: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 < self.buy_fraction <= 1.0 and 0.0 < self.sell_fraction <= 1.0):
            raise ValueError("fractions must lie in (0, 1]")
        if self.kind in NAMED_PROFILES and NAMED_PROFILES[self.kind] != (
                self.buy_fraction, self.sell_fraction):
            raise ValueError(f"fractions inconsistent with profile {self.kind}")

    @classmethod
    def named(cls, kind: str, free_text: str = "") -> "RiskProfile":
        buy, sell = NAMED_PROFILES[kind]
        return cls(kind=kind, buy_fraction=buy, sell_fraction=sell, free_text=free_text)


@dataclass(frozen=True)
class CorrectionState:
    weights: Mapping[str, float] = field(
        default_factory=lambda: {"time": 1.0, "news": 1.0, "statement": 1.0})
    history: tuple[tuple[str, str, tuple[tuple[str, float], ...]], ...] = ()

    def __post_init__(self):
        for agent, w in self.weights.items():
            if not (math.isfinite(w) and w > 0):
                raise ValueError(f"weight for {agent} must be finite and positive, got {w}")


@dataclass(frozen=True)
class ExpertDecision:
    date: Date
    prediction: str  # Up | Down
    action: str  # Buy | Sell | Hold
    score: float
    rationale: str
    inputs: Mapping[str, Optional[AgentSignal]]
    attitude: Optional[str] = None
    tiebreak_used: bool = False


_KEYWORD_PROFILES = (
    ("moderately conservative", "MCons"),
    ("moderately aggressive", "MAgg"),
    ("conservative", "Cons"),
    ("aggressive", "Agg"),
    ("m.cons", "MCons"),
    ("m.agg", "MAgg"),
    ("cons", "Cons"),
    ("agg", "Agg"),
)

_PREFERENCE_SCHEMA = {
    "kind": FieldSpec("enum", choices=("Cons", "MCons", "MAgg", "Agg", "Custom")),
    "buy_fraction": FieldSpec("number", lo=0.0, hi=1.0, required=False),
    "sell_fraction": FieldSpec("number", lo=0.0, hi=1.0, required=False),
}

_PREFERENCE_SYSTEM = (
    "You map an investor's stated risk preference to one of four profiles: "
    "Cons (buy 50% of idle cash, exit fully on risk), MCons (buy 70%, exit "
    "fully), MAgg (buy 100%, exit 50%), Agg (buy 100%, exit 30%), or Custom "
    "with explicit fractions."
)


def parse_risk_preference(text: str, gateway: Optional[Gateway] = None) -> RiskProfile:
    """Keywords map directly; anything else takes one structured model call."""
    if not text or not text.strip():
        raise EmptyPreference("a risk preference is required before any decision")
    lowered = text.strip().lower()
    for keyword, kind in _KEYWORD_PROFILES:
        if lowered == keyword or lowered == keyword.replace(" ", "_"):
            return RiskProfile.named(kind, free_text=text)
    if gateway is None:
        raise EmptyPreference(f"free-text preference {text!r} needs a gateway to interpret")
    prompt = Prompt(system=_PREFERENCE_SYSTEM, user=(
        f"Investor statement: {text!r}\n"
        'Reply with JSON {"kind": "Cons|MCons|MAgg|Agg|Custom", '
        '"buy_fraction": number, "sell_fraction": number} '
        "(fractions required only for Custom)."
    ))
    parsed = gateway.complete_structured(prompt, _PREFERENCE_SCHEMA)
    if parsed["kind"] != "Custom":
        return RiskProfile.named(parsed["kind"], free_text=text)
    buy = parsed.get("buy_fraction")
    sell = parsed.get("sell_fraction")
    if buy is None or sell is None or not (0 < buy <= 1 and 0 < sell <= 1):
        raise EmptyPreference(f"custom fractions out of range: buy={buy} sell={sell}")
    return RiskProfile(kind="Custom", buy_fraction=buy, sell_fraction=sell, free_text=text)


def vote_score(signals: Mapping[str, Optional[AgentSignal]], state: CorrectionState) -> float:
    score = 0.0
    for agent, signal in signals.items():
        if signal is None:
            continue
        direction = 1.0 if signal.trend == UP else -1.0
        conf = 1.0 if signal.confidence is None else signal.confidence
        score += state.weights.get(agent, 1.0) * direction * conf
    return score


def _action_for(prediction: str, holding: bool, fully_invested: bool) -> str:
    if prediction == UP and not fully_invested:
        return "Buy"
    if prediction == DOWN and holding:
        return "Sell"
    return "Hold"


_TIEBREAK_SCHEMA = {"trend": FieldSpec("enum", choices=(UP, DOWN))}


def decide(signals: Mapping[str, Optional[AgentSignal]], state: CorrectionState,
           profile: Optional[RiskProfile], date: Date,
           gateway: Optional[Gateway] = None, mode: str = "prediction",
           attitude: Optional[str] = None, holding: bool = False,
           fully_invested: bool = False) -> ExpertDecision:
    """Weighted vote over the non-abstaining signals; requires a profile."""
    if profile is None:
        raise EmptyPreference("decide requires a risk profile")
    if attitude is not None and attitude not in ATTITUDES:
        raise ValueError(f"unknown attitude: {attitude}")
    live = {a: s for a, s in signals.items() if s is not None}
    if not live:
        raise NoDecision(f"all agents abstained on {date}")

    score = vote_score(signals, state)
    tiebreak_used = False
    if score > 0:
        prediction = UP
    elif score < 0:
        prediction = DOWN
    else:
        prediction, tiebreak_used = _tiebreak(live, attitude, gateway), True

    rationale = _summarize(live, prediction, attitude, gateway)
    action = _action_for(prediction, holding, fully_invested) if mode == "trading" else "Hold"
    return ExpertDecision(date=date, prediction=prediction, action=action, score=score,
                          rationale=rationale, inputs=dict(signals), attitude=attitude,
                          tiebreak_used=tiebreak_used)


def _attitude_clause(attitude: Optional[str]) -> str:
    if attitude is None:
        return ""
    return (f"\nThe investor holds a {attitude.lower()} attitude toward the market; "
            "take that prior into account.")


def _tiebreak(live: Mapping[str, AgentSignal], attitude: Optional[str],
              gateway: Optional[Gateway]) -> str:
    if gateway is None:
        return DOWN  # flat score with no model available: treat as not-risen
    body = "\n".join(f"- {a}: {s.trend} ({s.rationale})" for a, s in sorted(live.items()))
    prompt = Prompt(
        system="You arbitrate between disagreeing market analysts.",
        user=("The weighted vote over these analyst signals is exactly zero:\n"
              f"{body}{_attitude_clause(attitude)}\n"
              'Pick the more plausible direction. Reply with JSON {"trend": "Up" or "Down"}.'))
    try:
        return gateway.complete_structured(prompt, _TIEBREAK_SCHEMA)["trend"]
    except UnparseableAfterRepair:
        return DOWN


def _summarize(live: Mapping[str, AgentSignal], prediction: str, attitude: Optional[str],
               gateway: Optional[Gateway]) -> str:
    if gateway is None:
        parts = [f"{a}: {s.trend}" for a, s in sorted(live.items())]
        return f"{prediction} by weighted vote ({'; '.join(parts)})"
    body = "\n".join(f"- {a}: {s.trend} — {s.rationale}" for a, s in sorted(live.items()))
    prompt = Prompt(
        system="You write one-paragraph investment rationales.",
        user=(f"The desk predicts {prediction} from these signals:\n{body}"
              f"{_attitude_clause(attitude)}\n"
              "Summarize the reasoning in at most three sentences."))
    return gateway.complete(prompt).text.strip()


_FEEDBACK_SCHEMA = {
    "verdict": FieldSpec("enum", choices=("agree", "disagree")),
    "agent_overrides": FieldSpec("map", required=False),
}


def apply_feedback(state: CorrectionState, feedback: str,
                   signals: Mapping[str, Optional[AgentSignal]],
                   realized: Optional[str] = None,
                   decision_trend: Optional[str] = None,
                   gateway: Optional[Gateway] = None,
                   eta: float = FEEDBACK_ETA,
                   date: Optional[Date] = None) -> CorrectionState:
    """Multiplicative update: agents whose trend matched the realized (or
    endorsed) direction gain x(1+eta), the rest lose x(1-eta); weights clamp
    to [0.1, 10]. Free text is mapped to agree/disagree by one model call."""
    overrides: dict[str, str] = {}
    verdict = feedback.strip().lower()
    if verdict not in ("agree", "disagree"):
        if gateway is None:
            raise ValueError("free-text feedback needs a gateway to interpret")
        prompt = Prompt(
            system="You classify an investor's reaction to a trading decision.",
            user=(f"The desk decided {decision_trend or 'n/a'}; the investor said: "
                  f"{feedback!r}\nReply with JSON "
                  '{"verdict": "agree" or "disagree", '
                  '"agent_overrides": {"time|news|statement": "agree|disagree"}} '
                  "(overrides only when the investor singles out an analyst)."))
        parsed = gateway.complete_structured(prompt, _FEEDBACK_SCHEMA)
        verdict = parsed["verdict"]
        overrides = {str(k): str(v) for k, v in parsed.get("agent_overrides", {}).items()}

    if realized is not None:
        endorsed = realized
    elif decision_trend is not None:
        endorsed = decision_trend if verdict == "agree" else _flip(decision_trend)
    else:
        endorsed = None

    new_weights = dict(state.weights)
    for agent, signal in signals.items():
        if signal is None:
            continue
        if agent in overrides:
            good = overrides[agent] == "agree"
        elif endorsed is not None:
            good = signal.trend == endorsed
        else:
            continue  # nothing to learn from
        factor = (1.0 + eta) if good else (1.0 - eta)
        w = new_weights.get(agent, 1.0) * factor
        new_weights[agent] = min(max(w, WEIGHT_FLOOR), WEIGHT_CEIL)

    event = ((date or Date.today()).isoformat(), feedback,
             tuple(sorted(new_weights.items())))
    return CorrectionState(weights=new_weights, history=state.history + (event,))


def _flip(trend: str) -> str:
    return DOWN if trend == UP else UP


def decision_log_line(decision: ExpertDecision, weights: Mapping[str, float]) -> str:
    return json.dumps({
        "date": decision.date.isoformat(),
        "prediction": decision.prediction,
        "action": decision.action,
        "score": decision.score,
        "weights": dict(sorted(weights.items())),
        "attitude": decision.attitude,
    }, ensure_ascii=False)
