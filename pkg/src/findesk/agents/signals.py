"""The shared per-day trend signal type and the price -> trend mapping."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import date as Date
from typing import Optional

from ..errors import NonFiniteInput

UP = "Up"
DOWN = "Down"
AGENT_KINDS = ("time", "news", "statement")


@dataclass(frozen=True)
class AgentSignal:
    agent: str  # 'time' | 'news' | 'statement'
    date: Date  # target trading day the prediction is for
    trend: str  # 'Up' | 'Down'
    confidence: Optional[float] = None
    rationale: str = ""
    provenance: tuple[str, ...] = ()

    def __post_init__(self):
        if self.agent not in AGENT_KINDS:
            raise ValueError(f"unknown agent kind: {self.agent}")
        if self.trend not in (UP, DOWN):
            raise ValueError(f"trend must be Up or Down, got {self.trend!r}")
        if self.confidence is not None and not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence outside [0,1]: {self.confidence}")

    def to_json(self) -> str:
        return json.dumps({
            "date": self.date.isoformat(), "agent": self.agent, "trend": self.trend,
            "confidence": self.confidence, "rationale": self.rationale,
        }, ensure_ascii=False)


def trend_map(prev_close: float, pred_close: float) -> str:
    """Up iff the predicted close strictly exceeds the previous one; a flat
    day counts as not-risen."""
    for v in (prev_close, pred_close):
        if not math.isfinite(v) or v <= 0:
            raise NonFiniteInput(f"close must be finite and positive, got {v}")
    return UP if pred_close > prev_close else DOWN
