"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument falls outside the domain an operation is defined on."""


class ScenarioError(Exception):
    """Base class for scenario loading problems."""


class ScenarioParseError(ScenarioError):
    """The scenario document is not well-formed JSON."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ScenarioValidationError(ScenarioError):
    """The scenario parsed but violates one or more invariants.

    ``errors`` holds every violation found, not only the first.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        lines = "\n".join(f"  - {e}" for e in self.errors)
        super().__init__(f"invalid scenario ({len(self.errors)} problem(s)):\n{lines}")
