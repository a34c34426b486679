"""Exception types shared across the package."""


class RegspecError(Exception):
    """Base class for package errors."""

    exit_code = 1


class DomainError(RegspecError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class InfeasibleError(RegspecError, ValueError):
    """No object with the requested parameters exists (e.g. N*d odd)."""


class SwitchInfeasibleError(InfeasibleError):
    """A switching would leave the space of simple graphs."""


class ConfigError(RegspecError, ValueError):
    """Configuration failed validation; ``violations`` lists every problem."""

    exit_code = 2

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NumericalError(RegspecError, RuntimeError):
    """An iterative solver failed to converge."""

    exit_code = 3


class ResourceGuardError(RegspecError, RuntimeError):
    """A size guard (enumeration count, dense budget) was exceeded."""

    exit_code = 4
