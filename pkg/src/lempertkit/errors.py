"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: :class:`DomainError` -> 2,
:class:`ConfigError` (including every expression error) -> 3.
"""


class LempertkitError(Exception):
    pass


class DomainError(LempertkitError, ValueError):
    """A point lies outside the domain it was supposed to belong to."""


class DegenerateInputError(LempertkitError, ValueError):
    pass


class ConfigError(LempertkitError, ValueError):
    """Malformed parameters or input documents."""


class ParameterError(ConfigError):
    pass


class ExprError(ConfigError):
    pass


class LexError(ExprError):
    def __init__(self, message, pos):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class SyntaxParseError(ExprError):
    def __init__(self, message, pos):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


class UnboundIdentifierError(ExprError):
    def __init__(self, name, pos):
        super().__init__(f"unbound identifier {name!r} at position {pos}")
        self.name = name
        self.pos = pos


class PoleError(LempertkitError, ArithmeticError):
    def __init__(self, point, modulus):
        super().__init__(f"division by |denominator| = {modulus:.3e} at {point}")
        self.point = point
        self.modulus = modulus


class ModelError(LempertkitError, ValueError):
    """An indicatrix model that violates its invariants."""


class NotASmoothFaceError(LempertkitError, ValueError):
    def __init__(self, active):
        super().__init__(f"expected exactly one active constraint, got {list(active)}")
        self.active = list(active)


class HypothesisError(LempertkitError, ValueError):
    """Inputs do not satisfy the hypotheses of a rigidity test."""


class StepTooLargeError(DomainError):
    pass


class GridError(ConfigError):
    pass
