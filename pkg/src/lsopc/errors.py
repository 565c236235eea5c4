"""Exception types shared across the package."""


class FormatError(ValueError):
    """A binary or text file does not match its documented format."""


class DegenerateInputError(ValueError):
    """Input is structurally valid but has no usable content (e.g. uniform mask)."""


class NumericalError(RuntimeError):
    """A numerical operation produced NaN/Inf or otherwise diverged."""
