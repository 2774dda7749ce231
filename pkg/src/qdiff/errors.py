"""Exception types shared across the package."""


class QDiffError(Exception):
    """Base class for all library errors."""


class DomainError(QDiffError, ValueError):
    """An argument lies outside the domain of the operation."""


class ParseError(QDiffError, ValueError):
    def __init__(self, message, position=None, expected=None):
        self.position = position
        self.expected = expected
        where = f" at position {position}" if position is not None else ""
        want = f" (expected {expected})" if expected else ""
        super().__init__(f"{message}{where}{want}")


class BadPrime(QDiffError):
    def __init__(self, p, reason="denominator content divisible by p"):
        self.p = p
        self.reason = reason
        super().__init__(f"bad prime {p}: {reason}")


class NotAUnit(QDiffError, ValueError):
    def __init__(self, q, p):
        self.q = q
        self.p = p
        super().__init__(f"q = {q} is not a unit at p = {p}")


class PoleAtZero(QDiffError):
    pass


class Resonant(QDiffError):
    def __init__(self, order):
        self.order = order
        super().__init__(f"resonant at order {order}")


class SearchExhausted(QDiffError):
    pass


class Inconclusive(QDiffError):
    def __init__(self, degree_cap):
        self.degree_cap = degree_cap
        super().__init__(f"no rational basis reconstructed at degree cap {degree_cap}")


class HypothesisNotMet(QDiffError):
    pass


class DegenerateEquation(QDiffError, ValueError):
    pass


class UndefinedParameters(QDiffError, ValueError):
    pass
