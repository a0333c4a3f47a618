"""Exception hierarchy shared by every module of the package."""


class PencilError(Exception):
    """Base class for all errors raised by pencilred."""


class InputError(PencilError, ValueError):
    """Malformed input: wrong shapes, non-finite entries, unparsable files."""


class ContainmentError(PencilError):
    """A subspace that should lie inside another one does not."""


class InvarianceError(PencilError):
    """An operator does not map a subspace into the requested target.

    Raised when the well-definedness residual of an induced operator exceeds
    the rank threshold.  Usually means the tolerance is too tight.
    """


class ToleranceError(PencilError):
    """Two routes to the same exact quantity disagree numerically."""


class PreconditionFailed(PencilError):
    """A check was skipped because its hypotheses do not hold."""
