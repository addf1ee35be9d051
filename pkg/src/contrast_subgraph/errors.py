"""Exception types. Every error carries a short machine-readable ``code``."""


class ContrastError(ValueError):
    code = "E_CONTRAST"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class GraphFormatError(ContrastError):
    """Malformed input file or graph that violates the structural invariants."""

    code = "E_FORMAT"


class GroupError(ContrastError):
    code = "E_GROUP"


class AlphaError(ContrastError):
    code = "E_ALPHA"


class SolverDivergence(ContrastError):
    code = "E_DIVERGENCE"


class ProtocolError(ContrastError):
    """Classification protocol cannot run on the supplied table."""

    code = "E_PROTOCOL"
