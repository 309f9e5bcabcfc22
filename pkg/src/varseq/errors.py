"""Exception hierarchy shared by all varseq modules."""


class VarSeqError(Exception):
    """Base class for every error raised by varseq."""


class SignatureError(VarSeqError):
    pass


class ParseError(VarSeqError):
    def __init__(self, message, position=None, text=None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} at position {position}"
            if text is not None:
                message += f"\n  {text}\n  {' ' * position}^"
        super().__init__(message)


class OrderCapError(VarSeqError):
    """An operation would need jet coordinates above the signature's order cap."""


class SingularPointError(VarSeqError):
    pass


class IntegrationError(VarSeqError):
    """The parameter integral has a shape outside the supported table."""

    def __init__(self, message, term=None):
        self.term = term
        super().__init__(message)


class DegreeError(VarSeqError):
    pass


class PreconditionError(VarSeqError):
    """A named precondition of an operation does not hold."""

    def __init__(self, name, message, residual=None):
        self.name = name
        self.residual = residual
        super().__init__(f"{name}: {message}")


class BundleError(VarSeqError):
    pass
