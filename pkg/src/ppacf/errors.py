"""Exception hierarchy.

Two families matter to callers: :class:`InvalidArgumentError` for bad input
(CLI exit code 1) and :class:`NumericalError` for estimator or sampler
degeneracies on otherwise valid input (CLI exit code 2).
"""

from __future__ import annotations


class PPACFError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(PPACFError, ValueError):
    pass


class ConfigError(InvalidArgumentError):
    """Aggregated configuration problems, reported together."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class NumericalError(PPACFError, ArithmeticError):
    """Base for numerical degeneracies.

    ``lag`` is filled in by the autocorrelogram pipeline when the failure can
    be attributed to a specific lag.
    """

    def __init__(self, message, *, lag=None):
        self.lag = lag
        super().__init__(message)

    def __str__(self):
        msg = super().__str__()
        if self.lag is not None and "lag" not in msg:
            msg = f"{msg} (at lag {self.lag})"
        return msg


class DegenerateBinError(NumericalError):
    """A bin has a nonpositive mean count."""

    def __init__(self, bin_index, value, *, lag=None):
        self.bin_index = bin_index
        self.value = value
        super().__init__(
            f"bin {bin_index} has nonpositive mean count {value!r}", lag=lag
        )


class NonpositiveCovarianceError(NumericalError):
    """An entry of C_k / (nu nu^T) is not positive, so its log is undefined."""

    def __init__(self, pair, value, *, lag=None):
        self.pair = pair
        self.value = value
        where = f" at lag {lag}" if lag is not None else ""
        super().__init__(
            f"nonpositive moment ratio {value!r} for bins {pair}{where}", lag=lag
        )


class DegenerateVarianceError(NumericalError):
    """The trace of the lag-0 log-covariance matrix is not positive."""
