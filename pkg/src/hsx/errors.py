"""Exception hierarchy shared by all modules."""


class HSXError(Exception):
    """Base class; ``code`` is the machine-readable tag emitted by the CLI."""

    code = "hsx_error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class TailMismatch(HSXError):
    code = "tail_mismatch"


class GridMismatch(HSXError):
    code = "grid_mismatch"


class DomainTooNarrow(HSXError):
    code = "domain_too_narrow"


class NotInD(HSXError):
    code = "not_in_D"


class NotInF(HSXError):
    code = "not_in_F"


class NotInG0(HSXError):
    code = "not_in_G0"


class NotMonotone(HSXError):
    code = "not_monotone"


class NotInvertible(HSXError):
    code = "not_invertible"


class SingularSystem(HSXError):
    code = "singular_system"


class SupportEscapesGrid(HSXError):
    code = "support_escapes_grid"


class ParseError(HSXError):
    code = "parse_error"


class ValidationError(HSXError):
    code = "validation_error"

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field

    def to_dict(self):
        d = super().to_dict()
        d["field"] = self.field
        return d


class ConvergenceFailure(HSXError):
    code = "convergence_failure"


class CheckFailed(HSXError):
    code = "check_failed"
