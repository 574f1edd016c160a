# Exceptions for the Homodyne Super-Resolution Simulator

from typing import Optional


class HomodyneError(Exception):
    """Base class for every error raised by the simulator"""


class DomainError(HomodyneError, ValueError):
    """An input lies outside the domain of an operation"""


class TruncationDomainError(DomainError):
    """First-order mode truncation requested outside |d| < w0"""


class ContractError(HomodyneError):
    """A closed-form precondition does not hold"""


class ConvergenceError(HomodyneError):
    """Adaptive quadrature ran out of subdivisions before meeting its tolerance"""

    def __init__(self, message: str, estimate: complex, error_bound: float):
        super().__init__(f"{message} (estimate={estimate!r}, error_bound={error_bound:.3e})")
        self.estimate = estimate
        self.error_bound = error_bound


class ConfigError(HomodyneError, ValueError):
    """A scenario config file could not be parsed"""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        location = []
        if key is not None:
            location.append(f"key '{key}'")
        if line is not None:
            location.append(f"line {line}")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")
        self.key = key
        self.line = line
