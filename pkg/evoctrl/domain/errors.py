"""Exceptions raised by the evoctrl functional core."""


class EvoCtrlError(Exception):
    """Base class for every evoctrl error."""


class DomainError(EvoCtrlError, ValueError):
    """An argument lies outside the domain of an operation."""


class EnumerationBudgetError(DomainError):
    """The exhaustive mask enumeration would exceed its 2**16 budget."""

    def __init__(self, n: int, limit: int) -> None:
        super().__init__(f"Enumeration over 2^{n} masks exceeds the budget (n <= {limit})")
        self.n = n
        self.limit = limit


class ImproperPolicyError(DomainError):
    """A state has no action with positive improvement probability."""

    def __init__(self, state: int, detail: str = "no admissible action") -> None:
        super().__init__(f"Improper policy at state {state}: {detail}")
        self.state = state


class IncompleteTableError(DomainError):
    """Some non-terminal states were never visited during learning."""

    def __init__(self, states: tuple[int, ...]) -> None:
        listed = ", ".join(str(s) for s in states)
        super().__init__(f"Unvisited states: {listed}")
        self.states = states


class EvaluationError(EvoCtrlError):
    """A Monte Carlo evaluation produced no completed episode."""


class PolicyParseError(EvoCtrlError, ValueError):
    """A policy file is malformed."""

    def __init__(self, path: str, line: int, message: str) -> None:
        super().__init__(f"{path}, line {line}: {message}")
        self.path = path
        self.line = line


class ConfigError(EvoCtrlError, ValueError):
    """A configuration key or value is invalid."""

    def __init__(self, key: str, message: str) -> None:
        super().__init__(f"Config key '{key}': {message}")
        self.key = key
