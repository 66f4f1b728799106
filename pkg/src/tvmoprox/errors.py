"""Exception types shared across the package."""


class TvmoError(Exception):
    pass


class ConstructionError(TvmoError, ValueError):
    """An objective or configuration could not be built (bad shape, not PSD, ...)."""


class ContractViolation(TvmoError, ValueError):
    """A runtime precondition failed, e.g. a step size outside (0, 1/L]."""


class DomainError(TvmoError, ValueError):
    """A point lies outside the domain of a nonsmooth term."""


class UnsupportedScenario(TvmoError):
    pass


class ConvergenceFailure(TvmoError, RuntimeError):
    """An oracle solve hit its iteration cap; carries the best iterate."""

    def __init__(self, message, x=None, residual=None):
        super().__init__(message)
        self.x = x
        self.residual = residual


class ConfigError(TvmoError, ValueError):
    pass


class ScenarioParseError(ConfigError):
    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.key = key
