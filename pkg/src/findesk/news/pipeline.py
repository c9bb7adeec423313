"""End-to-end news pre-processing: strip known boilerplate, LLM self-review,
attribute articles to trading days, and keep one representative per day."""
from __future__ import annotations

from dataclasses import replace as dc_replace

from ..gateway import Gateway
from ..market_data import Dataset, NewsArticle
from .cleaning import BiasRuleSet, CleanArticle, reflect_clean, strip_bias
from .cluster import select_representative


def preprocess(dataset: Dataset, rules: BiasRuleSet, gateway: Gateway | None = None,
               k: int = 2, seed: int = 0) -> tuple[Dataset, dict]:
    """Returns the dataset with news replaced by one representative
    CleanArticle per attributed trading day, plus a per-day index."""
    cleaned: list[CleanArticle] = []
    for article in dataset.news:
        ca = strip_bias(article, rules)
        if gateway is not None:
            ca = reflect_clean(ca, gateway)
        cleaned.append(ca)

    by_day: dict = {}
    for ca in cleaned:
        day = dataset.attributed_date(ca.original.date)
        if day is None:
            continue
        by_day.setdefault(day, []).append(ca)

    representatives: dict = {}
    for day in sorted(by_day):
        representatives[day] = select_representative(by_day[day], k=k, seed=seed)

    new_news = tuple(
        NewsArticle(title=rep.title, date=day, text=rep.cleaned_text)
        for day, rep in sorted(representatives.items())
    )
    return dc_replace(dataset, news=new_news), representatives
