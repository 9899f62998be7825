"""Exception hierarchy.

Every error raised by the package carries the ``module.op`` location that the
command-line front end prints as ``ERROR <module>.<op>: <message>``.
"""


class EllmqError(ValueError):
    def __init__(self, message, op="ellmq"):
        super().__init__(message)
        self.op = op

    def __str__(self):
        return self.args[0]


class PiPowerMismatch(EllmqError):
    """Addition of two nonzero scalars carrying different powers of pi."""


class AlgebraMismatch(EllmqError):
    """Operands live in different algebras (different degree caps)."""


class NotNilpotent(EllmqError):
    pass


class DimensionMismatch(EllmqError):
    pass


class NotStringStructure(EllmqError):
    pass


class SpecError(EllmqError):
    """Input validation failure; ``errors`` lists every problem found."""

    def __init__(self, errors, op="cli.parse_spec"):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors), op=op)
