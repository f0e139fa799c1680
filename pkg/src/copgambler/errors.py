"""Exception hierarchy shared by every module."""


class PursuitError(Exception):
    """Base class for all errors raised by copgambler."""


class GraphError(PursuitError, ValueError):
    pass


class MalformedLine(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class Disconnected(GraphError):
    pass


class EmptyGraph(GraphError):
    pass


class InvalidParameter(PursuitError, ValueError):
    pass


class AllZero(InvalidParameter):
    pass


class NegativeWeight(InvalidParameter):
    pass


class DomainError(PursuitError, ValueError):
    pass


class InvalidCase(PursuitError, ValueError):
    pass


class DegenerateConditional(PursuitError, ArithmeticError):
    pass


class DegenerateEvasion(PursuitError, ArithmeticError):
    pass


class BudgetExceeded(PursuitError):
    pass


class NonIIDSweeps(PursuitError):
    pass


class NonTermination(PursuitError, RuntimeError):
    pass
