"""Exception hierarchy shared by every geomgate module."""


class GeomGateError(Exception):
    """Base class for all errors raised by geomgate."""


class NonHermitianInput(GeomGateError, ValueError):
    pass


class DimensionMismatch(GeomGateError, ValueError):
    pass


class IndexOutOfRange(GeomGateError, IndexError):
    pass


class UnsupportedGate(GeomGateError, ValueError):
    pass


class ParseError(GeomGateError, ValueError):
    """Malformed schedule or parameter document.

    Carries the offending line number (1-based, ``None`` when the problem is
    structural) and field name so the CLI can point at the culprit.
    """

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class SingularPath(GeomGateError, ValueError):
    pass


class BoundaryTime(GeomGateError, ValueError):
    pass


class EvolutionFailed(GeomGateError, RuntimeError):
    pass


class StepTooCoarse(EvolutionFailed):
    pass


class ConvergenceFailure(EvolutionFailed):
    pass


class DegenerateFit(GeomGateError, ValueError):
    pass


class FitFailure(GeomGateError, RuntimeError):
    pass


class CutoffTooLow(GeomGateError, ValueError):
    pass


class AmplitudeUnreachable(GeomGateError, ValueError):
    pass


class NoPhaseSolution(GeomGateError, RuntimeError):
    pass


class BranchExceeded(GeomGateError, ValueError):
    pass


class UnphysicalChannel(GeomGateError, ValueError):
    pass
