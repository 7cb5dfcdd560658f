"""Exception hierarchy shared by all tlrelax modules."""


class TLRelaxError(Exception):
    pass


class FormulaSyntaxError(TLRelaxError, SyntaxError):
    """Malformed formula text. ``pos`` is the 0-based character offset."""

    def __init__(self, message, pos):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class CoSafetyError(TLRelaxError):
    """A negation would land on a temporal operator."""


class CapacityError(TLRelaxError):
    """A construction exceeded its configured state cap."""


class DimensionError(TLRelaxError, ValueError):
    pass


class GraphParseError(TLRelaxError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NegativeWeightError(TLRelaxError, ValueError):
    pass


class InvalidTrajectory(TLRelaxError, ValueError):
    pass


class UnknownAP(TLRelaxError, ValueError):
    pass


class InvalidEditRun(TLRelaxError, ValueError):
    pass


class EpsilonCycleError(TLRelaxError, ValueError):
    """Zero-weight cycle of epsilon moves in a relaxed automaton."""


class Infeasible(TLRelaxError):
    """No trajectory satisfies the (relaxed) task."""

    def __init__(self, message="infeasible", metrics=None):
        super().__init__(message)
        self.metrics = metrics


class NodeCapExceeded(CapacityError):
    pass


class PlacementError(TLRelaxError, ValueError):
    pass
