"""Statement agent: a three-step reasoning chain over the year's statements.

Step 1 extracts seasonal patterns, step 2 reviews annual operations given
those patterns, step 3 predicts the long-term trend with a confidence level.
Every intermediate is retained so a user can inspect any step afterwards.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import date as Date
from importlib import resources
from typing import Mapping

from ..errors import FindeskError
from ..gateway import Completion, FieldSpec, Gateway, Prompt, parse_structured
from ..market_data import StatementBundle
from .signals import AgentSignal


class StatementChainError(FindeskError):
    def __init__(self, step: int, cause: Exception):
        self.step = step
        self.cause = cause
        super().__init__(f"statement chain failed at step {step}: {cause}")


@dataclass(frozen=True)
class SeasonalAnalysis:
    per_period: Mapping[str, str]
    summary: str


@dataclass(frozen=True)
class OperationalReview:
    review: str
    stage_assessments: tuple[tuple[str, str], ...]


STATEMENT_SYSTEM = (
    "You are a fundamental analyst working from a company's balance sheet, "
    "cash flow statement and income statement indicators."
)


def _template(name: str) -> str:
    text = resources.files("findesk.agents").joinpath(f"prompts/{name}.txt").read_text("utf-8")
    return text.split("---\n", 1)[1]


def _statements_block(bundle: StatementBundle) -> str:
    return json.dumps({p: dict(v) for p, v in bundle.periods.items()},
                      indent=2, sort_keys=True, ensure_ascii=False)


def trend_confidence(completion: Completion, trend: str, self_reported: float) -> float:
    """exp(logprob) of the trend token when the provider exposes logprobs,
    otherwise the model's self-reported number."""
    if completion.token_logprobs:
        for token, lp in completion.token_logprobs:
            if token.strip().strip('"') == trend:
                return math.exp(lp)
    return self_reported


def statement_signal(bundle: StatementBundle, gateway: Gateway, target_date: Date
                     ) -> tuple[SeasonalAnalysis, OperationalReview, AgentSignal]:
    """Exactly three chained completions; a failure aborts with the step index."""
    stmts = _statements_block(bundle)
    periods = ", ".join(bundle.periods)

    try:
        p1 = Prompt(system=STATEMENT_SYSTEM, user=_template("statement_seasonal").format(
            ticker=bundle.ticker, periods=periods, statements=stmts))
        step1 = gateway.complete_structured(p1, {
            "per_period": FieldSpec("map"),
            "summary": FieldSpec("text"),
        })
    except Exception as exc:  # noqa: BLE001 - chain contract reports the step
        raise StatementChainError(1, exc) from exc
    seasonal = SeasonalAnalysis(
        per_period={k: str(v) for k, v in step1["per_period"].items()},
        summary=step1["summary"])
    missing = set(bundle.periods) - set(seasonal.per_period)
    if missing:
        raise StatementChainError(1, ValueError(f"seasonal analysis missing periods {missing}"))

    try:
        p2 = Prompt(system=STATEMENT_SYSTEM, user=_template("statement_review").format(
            ticker=bundle.ticker, statements=stmts, seasonal=seasonal.summary))
        step2 = gateway.complete_structured(p2, {
            "review": FieldSpec("text"),
            "stages": FieldSpec("map", required=False),
        })
    except Exception as exc:  # noqa: BLE001
        raise StatementChainError(2, exc) from exc
    review = OperationalReview(
        review=step2["review"],
        stage_assessments=tuple((k, str(v)) for k, v in step2.get("stages", {}).items()))

    try:
        p3 = Prompt(system=STATEMENT_SYSTEM, user=_template("statement_trend").format(
            ticker=bundle.ticker, statements=stmts, seasonal=seasonal.summary,
            review=review.review))
        completion = gateway.complete(p3)
        step3 = parse_structured(completion.text, {
            "per_period_trend": FieldSpec("map", required=False),
            "trend": FieldSpec("enum", choices=("Up", "Down")),
            "confidence": FieldSpec("number", lo=0.0, hi=1.0),
        })
    except Exception as exc:  # noqa: BLE001
        raise StatementChainError(3, exc) from exc

    confidence = trend_confidence(completion, step3["trend"], step3["confidence"])
    signal = AgentSignal(
        agent="statement", date=target_date, trend=step3["trend"],
        confidence=confidence, rationale=review.review,
        provenance=tuple(f"statement:{p}" for p in bundle.periods),
    )
    return seasonal, review, signal
