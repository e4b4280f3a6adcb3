"""Exception hierarchy.

Input-side problems (bad files, bad schema, bad configuration) and
computation-side problems (measures that do not exist for the data at
hand, model fits that cannot succeed) are kept on separate branches so
callers, in particular the command line front end, can map them to
different exit codes.
"""


class RiskbenchError(Exception):
    """Base class for every error raised by this package."""


class InputError(RiskbenchError):
    """Problems with user-supplied data or configuration."""


class SchemaError(InputError):
    """A required column is missing or the file layout is unusable."""


class ValidationError(InputError):
    """A record violates the data contract (value, type, range)."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class EmptyInputError(InputError):
    """No records were provided."""


class ContractError(InputError):
    """Arguments are individually valid but mutually inconsistent."""


class ComputationError(RiskbenchError):
    """The requested quantity cannot be produced from these data."""


class UndefinedMeasureError(ComputationError):
    """The measure does not exist for this sample (for example a
    single-outcome-class sample asked for a ranking measure)."""


class SeparationError(ComputationError):
    """Logistic fit diverged: a coefficient ran away while the
    likelihood kept increasing, the signature of complete separation."""


class SingularModelError(ComputationError):
    """Design matrix is rank deficient (constant predictor)."""


class ConvergenceError(ComputationError):
    """Iterative fit failed to converge; carries the likelihood trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class BootstrapRefusedError(ComputationError):
    """Too many bootstrap replicates were undefined to trust a CI."""

    def __init__(self, message, dropped=0, replicates=0):
        super().__init__(message)
        self.dropped = dropped
        self.replicates = replicates
