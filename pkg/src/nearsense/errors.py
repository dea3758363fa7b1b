"""Exception hierarchy shared by the library and the CLI.

The CLI maps these onto exit codes: configuration/usage problems exit 1,
data problems exit 2, training problems exit 3.
"""


class NearsenseError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(NearsenseError):
    """Invalid configuration: bad parameter values, unknown keys, bad flags."""


class DataError(NearsenseError):
    """Input data violates a contract (shape, ordering, class coverage)."""


class ParseError(DataError):
    """A file could not be parsed; the message names the offending line."""


class LabelingError(DataError):
    """Label sidecar does not cover the windows it is joined against."""


class SchemaError(DataError):
    """Feature schema of the input does not match what a model was fit on."""


class TrainingError(NearsenseError):
    """Training could not produce a usable model."""


class DivergenceError(TrainingError):
    """Training loss became non-finite; the message reports the epoch."""
