"""Error types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, BudgetError -> 3,
everything else that signals a negative-but-valid outcome -> 1.
"""


class ConfigError(ValueError):
    """Bad parameters, unparseable files, invalid probability vectors."""


class BudgetError(RuntimeError):
    """A requested computation exceeds the cylinder-word work budget."""


class DivergenceError(ValueError):
    """A preimage series diverges at the requested exponent."""


class InconclusiveError(RuntimeError):
    """A fit or search could not certify an answer; carries diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class IndeterminateError(RuntimeError):
    """A bracket touches zero where a positive lower bound is required."""


class NonContractionError(RuntimeError):
    """Inverse-branch iteration failed to contract (no expanding iterate)."""


class PartitionError(ConfigError):
    """Branch domains fail to tile the unit interval; carries a witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
