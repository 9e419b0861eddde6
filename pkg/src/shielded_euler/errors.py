"""Exception hierarchy shared by the library and the command line."""


class ShieldedEulerError(Exception):
    """Base class; ``code`` is a stable identifier surfaced by the CLI."""

    code = "E_GENERIC"


class DomainError(ShieldedEulerError, ValueError):
    """A pointwise quantity was requested outside its domain (e.g. rho < delta)."""

    code = "E_DOMAIN"


class ConfigError(ShieldedEulerError):
    code = "E_CONFIG"


class ConfigFileError(ConfigError):
    code = "E_CONFIG_FILE"


class SchemaError(ConfigError):
    code = "E_SCHEMA"


class AssumptionError(ConfigError):
    """The pressure law fails hyperbolicity, genuine nonlinearity or polytropic asymptotics."""

    code = "E_ASSUMPTION"


class PositivityViolation(ShieldedEulerError):
    code = "E_POSITIVITY"

    def __init__(self, message, t=None, cell=None, value=None):
        super().__init__(message)
        self.t = t
        self.cell = cell
        self.value = value


class NonFiniteState(ShieldedEulerError):
    code = "E_NONFINITE"
