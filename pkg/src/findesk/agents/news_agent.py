"""News agent: representative article (plus retrieved snippets when the
judgment gate fired) -> structured trend prediction."""
from __future__ import annotations

from datetime import date as Date
from importlib import resources
from typing import Optional

from ..errors import GatewayError, UnparseableAfterRepair
from ..gateway import FieldSpec, Gateway, Prompt
from ..news.cleaning import CleanArticle
from ..retrieval import InfoSet
from .signals import AgentSignal

NEWS_SYSTEM = (
    "You are a financial news analyst. You read one article about a company "
    "and predict whether its stock rises or falls the next trading day."
)

_SCHEMA = {
    "summary": FieldSpec("text"),
    "trend": FieldSpec("enum", choices=("Up", "Down")),
    "confidence": FieldSpec("number", lo=0.0, hi=1.0),
}


def _template(name: str) -> str:
    text = resources.files("findesk.agents").joinpath(f"prompts/{name}.txt").read_text("utf-8")
    return text.split("---\n", 1)[1]


def build_news_prompt(ticker: str, article: CleanArticle, info: Optional[InfoSet],
                      target_date: Date) -> Prompt:
    if info is not None and info.items:
        lines = "\n".join(f"- [{url}] {snippet}" for url, snippet in info.items)
        snippets_section = f"\nRETRIEVED CONTEXT:\n{lines}\n"
    else:
        snippets_section = ""
    user = _template("news_signal").format(
        ticker=ticker, date=article.original.date.isoformat(),
        article=article.cleaned_text, snippets_section=snippets_section,
    )
    return Prompt(system=NEWS_SYSTEM, user=user)


def news_signal(ticker: str, article: CleanArticle, info: Optional[InfoSet],
                gateway: Gateway, target_date: Date) -> Optional[AgentSignal]:
    """None means abstention: the model's output stayed unparseable after the
    repair round, or the gateway failed. The expert treats a missing signal
    as a gap, never as a vote."""
    if article.original.date >= target_date:
        raise ValueError("article must predate the target day")
    prompt = build_news_prompt(ticker, article, info, target_date)
    try:
        parsed = gateway.complete_structured(prompt, _SCHEMA)
    except (UnparseableAfterRepair, GatewayError):
        return None
    provenance = [f"article:{article.original.date.isoformat()}:{article.title[:40]}"]
    if info is not None:
        provenance.append(f"retrieval:{info.query}")
    return AgentSignal(
        agent="news", date=target_date, trend=parsed["trend"],
        confidence=parsed["confidence"], rationale=parsed["summary"],
        provenance=tuple(provenance),
    )
