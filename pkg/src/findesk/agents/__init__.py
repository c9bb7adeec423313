from .news_agent import build_news_prompt, news_signal
from .signals import AGENT_KINDS, DOWN, UP, AgentSignal, trend_map
from .statement import (
    OperationalReview,
    SeasonalAnalysis,
    StatementChainError,
    statement_signal,
    trend_confidence,
)
from .time_series import time_series_signal

__all__ = [
    "AGENT_KINDS", "DOWN", "UP", "AgentSignal", "trend_map",
    "build_news_prompt", "news_signal", "time_series_signal",
    "OperationalReview", "SeasonalAnalysis", "StatementChainError",
    "statement_signal", "trend_confidence",
]
