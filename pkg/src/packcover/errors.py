"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Dimension mismatch between an operator and its operand."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class ParseError(ValueError):
    """Malformed input file; carries the offending line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
