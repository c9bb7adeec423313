"""Shared exception types."""


class FindeskError(Exception):
    """Base class for all package errors."""


# --- data loading ---

class MalformedRow(FindeskError):
    def __init__(self, line_no, message=""):
        self.line_no = line_no
        super().__init__(f"malformed row at line {line_no}: {message}")


class NonMonotonicDates(FindeskError):
    pass


class NonPositivePrice(FindeskError):
    pass


class MissingField(FindeskError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"missing field: {name}")


class UnparseableDate(FindeskError):
    pass


class UnknownPeriod(FindeskError):
    pass


class DuplicateIndicator(FindeskError):
    pass


class TickerMismatch(FindeskError):
    pass


# --- gateway ---

class GatewayError(FindeskError):
    pass


class CassetteMiss(GatewayError):
    def __init__(self, fingerprint):
        self.fingerprint = fingerprint
        super().__init__(f"no cassette entry for fingerprint {fingerprint}")


class ProviderError(GatewayError):
    def __init__(self, status, message=""):
        self.status = status
        super().__init__(f"provider error {status}: {message}")


class UnparseableAfterRepair(GatewayError):
    pass


# --- retrieval ---

class SearchClientError(FindeskError):
    pass


# --- forecasting ---

class TooShort(FindeskError):
    pass


class NonFiniteInput(FindeskError):
    pass


class OptimizerDiverged(FindeskError):
    def __init__(self, p, q):
        self.p = p
        self.q = q
        super().__init__(f"optimizer diverged for ARMA({p},{q})")


# --- expert ---

class EmptyPreference(FindeskError):
    pass


class NoDecision(FindeskError):
    pass


# --- backtest ---

class DecisionOutsideCalendar(FindeskError):
    pass


class DegenerateSeries(FindeskError):
    pass


class SimulationInfeasible(FindeskError):
    pass
