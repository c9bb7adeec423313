"""findesk: multi-agent market analysis with human-in-the-loop fusion and a
trading backtester."""

__version__ = "0.1.0"
