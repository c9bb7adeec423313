"""Daily trading simulator and the Acc/F1/AR/SR/MD metric suite.

Execution is at the same day's close with no costs or slippage (a cost hook
exists for later). Buy spends buy_fraction of idle cash; Sell liquidates
sell_fraction of held shares; fractional shares are the default.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from datetime import date as Date
from typing import Callable, Mapping, Optional, Sequence

from .agents.signals import DOWN, UP
from .errors import DecisionOutsideCalendar, DegenerateSeries, SimulationInfeasible
from .expert import RiskProfile

TRADING_DAYS_PER_YEAR = 252

Action = str  # 'Buy' | 'Sell' | 'Hold'


@dataclass
class PortfolioState:
    cash: float
    shares: float = 0.0

    def equity(self, price: float) -> float:
        return self.cash + self.shares * price

    def execute(self, action: Action, price: float, profile: RiskProfile,
                whole_shares: bool = False, day: Optional[Date] = None
                ) -> Optional[TradeEntry]:
        """Apply one decision at the given close. Returns the trade, or None
        for Hold / nothing executable."""
        if action == "Buy" and self.cash > 0:
            spend = self.cash * profile.buy_fraction
            qty = spend / price
            if whole_shares:
                qty = math.floor(qty)
                spend = qty * price
            if qty > 0:
                self.cash -= spend
                self.shares += qty
                return TradeEntry(day, "Buy", qty, price, self.cash)
        elif action == "Sell" and self.shares > 0:
            qty = self.shares * profile.sell_fraction
            if whole_shares:
                qty = math.floor(qty)
            if qty > 0:
                self.cash += qty * price
                self.shares -= qty
                return TradeEntry(day, "Sell", qty, price, self.cash)
        return None


@dataclass(frozen=True)
class TradeEntry:
    date: Optional[Date]
    side: str
    shares: float
    price: float
    cash_after: float


@dataclass(frozen=True)
class TradeLog:
    entries: tuple[TradeEntry, ...]


@dataclass(frozen=True)
class EquityCurve:
    points: tuple[tuple[Date, float], ...]

    @property
    def equities(self) -> list[float]:
        return [e for _, e in self.points]

    @property
    def returns(self) -> list[float]:
        eq = self.equities
        return [eq[i] / eq[i - 1] - 1.0 for i in range(1, len(eq))]


def simulate(decisions: Sequence[tuple[Date, Action]], closes_by_date: Mapping[Date, float],
             profile: RiskProfile, initial: float, whole_shares: bool = False,
             cost_hook: Optional[Callable[[str, float, float], float]] = None
             ) -> tuple[EquityCurve, TradeLog]:
    """Run the daily loop. closes_by_date must cover every decision date;
    equity is marked at each decision day's close, with one initial point."""
    if initial <= 0:
        raise ValueError("initial capital must be positive")
    decided = sorted(decisions, key=lambda t: t[0])
    for d, _ in decided:
        if d not in closes_by_date:
            raise DecisionOutsideCalendar(str(d))

    cash = float(initial)
    shares = 0.0
    points: list[tuple[Date, float]] = []
    entries: list[TradeEntry] = []
    traded = False
    if decided:
        points.append((decided[0][0], initial))  # start-of-window mark

    for day, action in decided:
        price = closes_by_date[day]
        if action == "Buy" and cash > 0:
            spend = cash * profile.buy_fraction
            qty = spend / price
            if whole_shares:
                qty = math.floor(qty)
                spend = qty * price
            if qty > 0:
                cost = cost_hook("Buy", qty, price) if cost_hook else 0.0
                cash -= spend + cost
                shares += qty
                entries.append(TradeEntry(day, "Buy", qty, price, cash))
                traded = True
        elif action == "Sell" and shares > 0:
            qty = shares * profile.sell_fraction
            if whole_shares:
                qty = math.floor(qty)
            if qty > 0:
                cost = cost_hook("Sell", qty, price) if cost_hook else 0.0
                cash += qty * price - cost
                shares -= qty
                entries.append(TradeEntry(day, "Sell", qty, price, cash))
                traded = True
        points.append((day, cash + shares * price))

    if whole_shares and not traded and any(a != "Hold" for _, a in decided):
        raise SimulationInfeasible("no decision produced an executable trade")
    return EquityCurve(points=tuple(points)), TradeLog(entries=tuple(entries))


# --- baseline strategies ---

def strategy_random(calendar: Sequence[Date], seed: int) -> list[tuple[Date, Action]]:
    rng = random.Random(seed)
    return [(d, rng.choice(["Buy", "Sell", "Hold"])) for d in calendar]


def strategy_brsf(dates: Sequence[Date], closes: Sequence[float], streak: int = 2
                  ) -> list[tuple[Date, Action]]:
    """Buy after `streak` consecutive up closes, sell after `streak`
    consecutive down closes; a flat close resets both counters."""
    decisions: list[tuple[Date, Action]] = []
    ups = downs = 0
    prev = None
    for day, close in zip(dates, closes):
        if prev is not None:
            if close > prev:
                ups, downs = ups + 1, 0
            elif close < prev:
                ups, downs = 0, downs + 1
            else:
                ups = downs = 0
        if ups >= streak:
            decisions.append((day, "Buy"))
        elif downs >= streak:
            decisions.append((day, "Sell"))
        else:
            decisions.append((day, "Hold"))
        prev = close
    return decisions


def strategy_from_signals(predictions: Sequence[tuple[Date, Optional[str]]]
                          ) -> list[tuple[Date, Action]]:
    """Up -> Buy, Down -> Sell, abstention -> Hold."""
    out = []
    for day, trend in predictions:
        if trend == UP:
            out.append((day, "Buy"))
        elif trend == DOWN:
            out.append((day, "Sell"))
        else:
            out.append((day, "Hold"))
    return out


# --- metrics ---

def accuracy(pred: Sequence[str], actual: Sequence[str]) -> float:
    if len(pred) != len(actual):
        raise ValueError("length mismatch")
    if not pred:
        raise ValueError("empty prediction sequence")
    return sum(p == a for p, a in zip(pred, actual)) / len(pred)


def _f1_for_class(pred: Sequence[str], actual: Sequence[str], positive: str) -> float:
    tp = sum(p == positive and a == positive for p, a in zip(pred, actual))
    fp = sum(p == positive and a != positive for p, a in zip(pred, actual))
    fn = sum(p != positive and a == positive for p, a in zip(pred, actual))
    if 2 * tp + fp + fn == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)


def f1(pred: Sequence[str], actual: Sequence[str], positive: str = UP,
       averaging: str = "positive") -> float:
    """positive: F1 of the positive class (default Up). macro: unweighted
    mean over both classes. weighted: mean weighted by actual class counts.
    Zero-division yields 0 per class."""
    if len(pred) != len(actual):
        raise ValueError("length mismatch")
    if averaging == "positive":
        return _f1_for_class(pred, actual, positive)
    classes = (UP, DOWN)
    scores = [_f1_for_class(pred, actual, c) for c in classes]
    if averaging == "macro":
        return sum(scores) / len(scores)
    if averaging == "weighted":
        counts = [sum(a == c for a in actual) for c in classes]
        total = sum(counts)
        if total == 0:
            return 0.0
        return sum(s * n for s, n in zip(scores, counts)) / total
    raise ValueError(f"unknown averaging: {averaging}")


def annualized_return(curve: EquityCurve, periods_per_year: int = TRADING_DAYS_PER_YEAR
                      ) -> float:
    eq = curve.equities
    if len(eq) < 2:
        return 0.0
    n = len(eq) - 1  # trading days spanned
    return (eq[-1] / eq[0]) ** (periods_per_year / n) - 1.0


def sharpe(curve: EquityCurve, rf: float = 0.0,
           periods_per_year: int = TRADING_DAYS_PER_YEAR) -> float:
    rets = curve.returns
    if len(rets) < 2:
        raise DegenerateSeries("need at least two returns")
    excess = [r - rf / periods_per_year for r in rets]
    mean = sum(excess) / len(excess)
    var = sum((r - mean) ** 2 for r in excess) / (len(excess) - 1)
    if var == 0.0:
        raise DegenerateSeries("zero return variance")
    return mean / math.sqrt(var) * math.sqrt(periods_per_year)


def max_drawdown(curve: EquityCurve) -> float:
    eq = curve.equities
    if len(eq) < 2:
        return 0.0
    peak = eq[0]
    worst = 0.0
    for e in eq:
        peak = max(peak, e)
        worst = max(worst, (peak - e) / peak)
    return worst
