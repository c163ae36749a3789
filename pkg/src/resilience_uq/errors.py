"""Exception hierarchy shared by all modules."""


class ResilienceError(Exception):
    pass


class ConfigError(ResilienceError, ValueError):
    """Invalid run configuration; the message starts with the offending key path."""


# graph construction / IO

class GraphError(ResilienceError, ValueError):
    pass


class DuplicateEdge(GraphError):
    pass


class IndexOutOfRange(GraphError):
    pass


class NonpositiveWeight(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class EmptyGraph(GraphError):
    pass


class NonpositiveFactor(GraphError):
    pass


class GraphFormatError(GraphError):
    pass


class UnsupportedDistribution(ResilienceError, ValueError):
    pass


# numerics

class NumericalError(ResilienceError, ArithmeticError):
    pass


class NonFiniteValue(NumericalError):
    pass


class ZeroDenominator(NumericalError, ZeroDivisionError):
    pass


class DimensionTooLarge(NumericalError):
    pass


class DegenerateShape(NumericalError):
    """The mean-field map has no positive critical point in the search range."""


class RankDeficient(NumericalError):
    pass


class NoConvergence(NumericalError):
    def __init__(self, max_order, gap=None):
        self.max_order = max_order
        self.gap = gap
        msg = f"truncation gap did not fall below precision up to order {max_order}"
        if gap is not None:
            msg += f" (last gap {gap:.3e})"
        super().__init__(msg)


class StiffnessFailure(NumericalError):
    pass


class Unclassifiable(NumericalError):
    pass
