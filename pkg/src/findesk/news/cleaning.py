"""Bias-information removal: ordered regex rules, then an LLM self-review.

The review is two calls: the first asks the model to list leftover boilerplate
spans with suggested edits, the second re-submits article plus suggestions for
the corrected text. A "NONE" answer from the first call skips the second.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace

from ..gateway import FieldSpec, Gateway, Prompt, parse_structured
from ..market_data import NewsArticle


@dataclass(frozen=True)
class BiasRule:
    pattern: str
    action: str  # 'delete' | 'replace'
    replacement: str = ""

    def __post_init__(self):
        if self.action not in ("delete", "replace"):
            raise ValueError(f"unknown action: {self.action}")
        re.compile(self.pattern)  # fail fast on bad patterns


@dataclass(frozen=True)
class BiasRuleSet:
    rules: tuple[BiasRule, ...]

    @classmethod
    def from_json(cls, text: str) -> "BiasRuleSet":
        raw = json.loads(text)
        return cls(rules=tuple(
            BiasRule(pattern=r["pattern"], action=r["action"],
                     replacement=r.get("replacement", ""))
            for r in raw
        ))

    @classmethod
    def load(cls, path) -> "BiasRuleSet":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


@dataclass(frozen=True)
class CleanArticle:
    original: NewsArticle
    cleaned_text: str
    removed_spans: tuple[tuple[int, int, str], ...] = ()  # (offset, length, source)
    warning: str = ""

    @property
    def date(self):
        return self.original.date

    @property
    def title(self):
        return self.original.title


def strip_bias(article: NewsArticle, rules: BiasRuleSet) -> CleanArticle:
    """Apply every rule once, in order; each rule sees the previous output.
    Offsets in removed_spans refer to the text as it stood when the span
    was cut."""
    text = article.text
    spans: list[tuple[int, int, str]] = []
    for idx, rule in enumerate(rules.rules):
        pattern = re.compile(rule.pattern)
        out = []
        last = 0
        for m in pattern.finditer(text):
            out.append(text[last:m.start()])
            if rule.action == "replace":
                out.append(rule.replacement)
            spans.append((m.start(), m.end() - m.start(), f"rule:{idx}"))
            last = m.end()
        out.append(text[last:])
        text = "".join(out)
    return CleanArticle(original=article, cleaned_text=text, removed_spans=tuple(spans))


_REVIEW_SCHEMA = {
    "bias_found": FieldSpec("bool"),
    "suggestions": FieldSpec("list", required=False),
}

REVIEW_PROMPT_VERSION = "v1"

_REVIEW_SYSTEM = (
    "You are a financial news copy editor. Boilerplate such as reporter "
    "bylines, advertisements and site navigation text must be flagged."
)

_REVIEW_USER = (
    "Review the article below for leftover boilerplate (bylines, ads, site "
    "chrome). Reply with a JSON object {{\"bias_found\": true|false, "
    "\"suggestions\": [{{\"span\": \"exact text\", \"edit\": \"replacement or "
    "empty to delete\"}}]}}. If nothing remains, reply {{\"bias_found\": false}}.\n"
    "\nARTICLE:\n{text}"
)

_APPLY_USER = (
    "Apply the following edits to the article and return a JSON object "
    "{{\"text\": \"corrected article\"}}.\n\nEDITS:\n{edits}\n\nARTICLE:\n{text}"
)


def reflect_clean(article: CleanArticle, gateway: Gateway) -> CleanArticle:
    """LLM self-review pass. Malformed suggestions leave the article
    unchanged with a warning rather than failing the pipeline."""
    review_prompt = Prompt(system=_REVIEW_SYSTEM,
                           user=_REVIEW_USER.format(text=article.cleaned_text))
    completion = gateway.complete(review_prompt)
    if completion.text.strip().upper() in ("NONE", "NO BIAS"):
        return article
    try:
        review = parse_structured(completion.text, _REVIEW_SCHEMA)
    except ValueError as exc:
        return replace(article, warning=f"unparseable review: {exc}")
    if not review["bias_found"]:
        return article
    suggestions = review.get("suggestions") or []
    missing = [s for s in suggestions
               if not isinstance(s, dict) or s.get("span") not in article.cleaned_text]
    if missing or not suggestions:
        return replace(article, warning="review suggestions reference absent text")

    edits = "\n".join(f"- replace {s['span']!r} with {s.get('edit', '')!r}" for s in suggestions)
    apply_prompt = Prompt(system=_REVIEW_SYSTEM,
                          user=_APPLY_USER.format(edits=edits, text=article.cleaned_text))
    corrected = gateway.complete(apply_prompt)
    try:
        parsed = parse_structured(corrected.text, {"text": FieldSpec("text")})
    except ValueError as exc:
        return replace(article, warning=f"unparseable correction: {exc}")
    new_spans = article.removed_spans + tuple(
        (article.cleaned_text.find(s["span"]), len(s["span"]), "llm") for s in suggestions
    )
    return CleanArticle(original=article.original, cleaned_text=parsed["text"],
                        removed_spans=new_spans)
