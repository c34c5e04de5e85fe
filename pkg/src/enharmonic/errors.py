"""Exception types raised by the enharmonic package.

The CLI reports the class name of any :class:`EnharmonicError` on stderr and
exits with status 1.
"""


class EnharmonicError(Exception):
    """Base class for domain errors."""


class InvalidNetwork(EnharmonicError):
    pass


class ZeroDifference(EnharmonicError):
    def __init__(self, edge):
        self.edge = edge
        super().__init__(f"edge {edge!r} has equal endpoint values")


class ZeroEnergy(EnharmonicError):
    def __init__(self, edge):
        self.edge = edge
        super().__init__(f"edge {edge!r} carries zero energy")


class NonPositive(EnharmonicError):
    def __init__(self, what, value=None):
        self.what = what
        self.value = value
        msg = f"{what} must be positive" if value is None else f"{what} must be positive, got {value}"
        super().__init__(msg)


class TooLarge(EnharmonicError):
    pass


class SingularSystem(EnharmonicError):
    pass


class Infeasible(EnharmonicError):
    pass


class NoConvergence(EnharmonicError):
    def __init__(self, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"no convergence after {iterations} iterations (residual {residual:.3e})")


class NotPlanar(EnharmonicError):
    pass


class BoundaryNotOnOuterFace(EnharmonicError):
    pass


class NotIntegrable(EnharmonicError):
    def __init__(self, vertex, defect):
        self.vertex = vertex
        self.defect = defect
        super().__init__(f"conjugate not single-valued around {vertex!r} (defect {defect:.3e})")


class CrossPoint(EnharmonicError):
    def __init__(self, location):
        self.location = location
        super().__init__(f"four tiles meet at {location}")


class NotATiling(EnharmonicError):
    pass


class NotInterlaced(EnharmonicError):
    pass


class DegenerateGradient(EnharmonicError):
    def __init__(self, point):
        self.point = point
        super().__init__(f"gradient component vanishes at {point}")


class EmptyGrid(EnharmonicError):
    pass


class InfeasibleOrientation(EnharmonicError):
    pass
