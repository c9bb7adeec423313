"""Loading and calendar alignment for the three market data modalities.

Prices arrive as CSV (date,open,high,low,close,volume), news as JSON-lines
with title/date/text, statements as a single JSON document keyed by period
then indicator. All loaders validate eagerly and return immutable values.
"""
from __future__ import annotations

import bisect
import csv
import io
import json
import math
import re
from dataclasses import dataclass, field
from datetime import date as Date
from datetime import datetime
from enum import Enum
from typing import Mapping, Sequence

from .errors import (
    DuplicateIndicator,
    MalformedRow,
    MissingField,
    NonMonotonicDates,
    NonPositivePrice,
    TickerMismatch,
    UnknownPeriod,
    UnparseableDate,
)

STATEMENT_PERIODS = ("Q1", "Q2", "Q3", "FY")
STATEMENT_SOURCES = ("balance", "cashflow", "income")


class Market(str, Enum):
    US = "US"
    ASHARE = "ASHARE"


@dataclass(frozen=True)
class PriceBar:
    date: Date
    open: float
    high: float
    low: float
    close: float
    volume: float

    def __post_init__(self):
        for name in ("open", "high", "low", "close"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise NonPositivePrice(f"{name}={v} on {self.date}")
        if self.volume < 0 or not math.isfinite(self.volume):
            raise NonPositivePrice(f"volume={self.volume} on {self.date}")
        if not (self.low <= self.open <= self.high and self.low <= self.close <= self.high):
            raise NonPositivePrice(
                f"OHLC inconsistent on {self.date}: "
                f"o={self.open} h={self.high} l={self.low} c={self.close}"
            )


@dataclass(frozen=True)
class PriceSeries:
    ticker: str
    market: Market
    bars: tuple[PriceBar, ...]

    def __post_init__(self):
        if not self.bars:
            raise MalformedRow(0, "empty price series")
        dates = [b.date for b in self.bars]
        if any(b >= a for a, b in zip(dates[1:], dates)):
            raise NonMonotonicDates(f"dates not strictly increasing for {self.ticker}")

    @property
    def dates(self) -> tuple[Date, ...]:
        return tuple(b.date for b in self.bars)

    @property
    def closes(self) -> tuple[float, ...]:
        return tuple(b.close for b in self.bars)

    def bar_at(self, d: Date) -> PriceBar:
        i = bisect.bisect_left(self.dates, d)
        if i == len(self.bars) or self.bars[i].date != d:
            raise KeyError(d)
        return self.bars[i]

    def up_to(self, d: Date) -> tuple[PriceBar, ...]:
        """Bars dated <= d. The only sanctioned history view for forecasting."""
        i = bisect.bisect_right(self.dates, d)
        return self.bars[:i]


@dataclass(frozen=True)
class NewsArticle:
    title: str
    date: Date
    text: str

    def __post_init__(self):
        if not self.text:
            raise MissingField("text")


@dataclass(frozen=True)
class StatementBundle:
    ticker: str
    periods: Mapping[str, Mapping[str, float]]
    sources: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.periods:
            raise UnknownPeriod("statement bundle has no periods")
        for period in self.periods:
            if period not in STATEMENT_PERIODS:
                raise UnknownPeriod(period)


@dataclass(frozen=True)
class Dataset:
    prices: PriceSeries
    news: tuple[NewsArticle, ...]
    statements: StatementBundle
    trading_calendar: tuple[Date, ...]
    stale_news: tuple[NewsArticle, ...] = ()

    @property
    def ticker(self) -> str:
        return self.prices.ticker

    def attributed_date(self, d: Date) -> Date | None:
        """Trading day a news item dated d informs: d itself if trading,
        else the next trading day; None past the calendar end."""
        i = bisect.bisect_left(self.trading_calendar, d)
        if i == len(self.trading_calendar):
            return None
        return self.trading_calendar[i]


# Accepted news date shapes, tried in order.
_DATE_FORMATS = (
    "%Y-%m-%d",
    "%Y/%m/%d",
    "%Y.%m.%d",
    "%m/%d/%Y",
    "%b %d, %Y",
    "%B %d, %Y",
    "%d %b %Y",
    "%d %B %Y",
)


def parse_date(raw: str) -> Date:
    s = re.sub(r"\s+", " ", str(raw)).strip()
    # tolerate a trailing time component
    s = re.split(r"[T ](?=\d{1,2}:)", s)[0]
    for fmt in _DATE_FORMATS:
        try:
            return datetime.strptime(s, fmt).date()
        except ValueError:
            continue
    raise UnparseableDate(raw)


def load_prices(path, ticker: str = "", market: Market = Market.US) -> PriceSeries:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_prices(fh.read(), ticker=ticker or _ticker_from_path(path), market=market)


def parse_prices(text: str, ticker: str, market: Market = Market.US) -> PriceSeries:
    reader = csv.DictReader(io.StringIO(text))
    expected = {"date", "open", "high", "low", "close", "volume"}
    if reader.fieldnames is None or not expected.issubset(set(reader.fieldnames)):
        raise MalformedRow(1, f"header must contain {sorted(expected)}")
    bars = []
    for line_no, row in enumerate(reader, start=2):
        try:
            bars.append(
                PriceBar(
                    date=parse_date(row["date"]),
                    open=float(row["open"]),
                    high=float(row["high"]),
                    low=float(row["low"]),
                    close=float(row["close"]),
                    volume=float(row["volume"]),
                )
            )
        except (TypeError, ValueError, UnparseableDate) as exc:
            raise MalformedRow(line_no, str(exc)) from exc
    if not bars:
        raise MalformedRow(1, "no data rows")
    dates = [b.date for b in bars]
    if sorted(set(dates)) != dates:
        if len(set(dates)) != len(dates):
            raise NonMonotonicDates(f"duplicate dates in {ticker}")
        bars.sort(key=lambda b: b.date)
    return PriceSeries(ticker=ticker, market=market, bars=tuple(bars))


def dump_prices(series: PriceSeries) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["date", "open", "high", "low", "close", "volume"])
    for b in series.bars:
        w.writerow([b.date.isoformat(),
                    _fmt(b.open), _fmt(b.high), _fmt(b.low), _fmt(b.close), _fmt(b.volume)])
    return out.getvalue()


def _fmt(x: float) -> str:
    return repr(x) if x != int(x) else str(int(x))


def load_news(path) -> list[NewsArticle]:
    with open(path, encoding="utf-8") as fh:
        return parse_news(fh.read())


def parse_news(text: str) -> list[NewsArticle]:
    articles = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRow(line_no, str(exc)) from exc
        for key in ("title", "date", "text"):
            if key not in record or record[key] in (None, ""):
                raise MissingField(key)
        articles.append(
            NewsArticle(title=record["title"], date=parse_date(record["date"]), text=record["text"])
        )
    return articles


def dump_news(articles: Sequence[NewsArticle]) -> str:
    lines = [
        json.dumps({"title": a.title, "date": a.date.isoformat(), "text": a.text},
                   ensure_ascii=False)
        for a in articles
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def load_statements(path, ticker: str = "") -> StatementBundle:
    with open(path, encoding="utf-8") as fh:
        return parse_statements(fh.read(), ticker=ticker or _ticker_from_path(path))


def parse_statements(text: str, ticker: str) -> StatementBundle:
    doc = json.loads(text)
    periods: dict[str, dict[str, float]] = {}
    sources: dict[str, tuple[str, ...]] = {}
    for period, indicators in doc.items():
        if period == "_sources":
            sources = {k: tuple(v) for k, v in indicators.items()}
            continue
        if period not in STATEMENT_PERIODS:
            raise UnknownPeriod(period)
        seen: dict[str, float] = {}
        for name, value in indicators.items():
            if name in seen:
                raise DuplicateIndicator(name)
            seen[name] = float(value)
        periods[period] = seen
    return StatementBundle(ticker=ticker, periods=periods, sources=sources)


def dump_statements(bundle: StatementBundle) -> str:
    doc: dict = {p: dict(v) for p, v in bundle.periods.items()}
    if bundle.sources:
        doc["_sources"] = {k: list(v) for k, v in bundle.sources.items()}
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def build_dataset(prices: PriceSeries, news: Sequence[NewsArticle],
                  statements: StatementBundle) -> Dataset:
    if statements.ticker and prices.ticker and statements.ticker != prices.ticker:
        raise TickerMismatch(f"{prices.ticker} != {statements.ticker}")
    calendar = tuple(b.date for b in prices.bars)
    last = calendar[-1]
    in_span = tuple(a for a in news if a.date <= last)
    stale = tuple(a for a in news if a.date > last)
    return Dataset(prices=prices, news=in_span, statements=statements,
                   trading_calendar=calendar, stale_news=stale)


def _ticker_from_path(path) -> str:
    import os

    return os.path.splitext(os.path.basename(str(path)))[0].upper()
