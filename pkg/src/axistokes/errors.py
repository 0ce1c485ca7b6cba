"""Exception hierarchy shared by all modules."""


class AxiStokesError(Exception):
    """Base class for every error raised by this package."""


class NonSimplePolygon(AxiStokesError, ValueError):
    pass


class NegativeRadius(AxiStokesError, ValueError):
    pass


class EmptyAxisContact(AxiStokesError, ValueError):
    pass


class MeshingFailed(AxiStokesError, RuntimeError):
    pass


class NonConformingInput(AxiStokesError, ValueError):
    pass


class NoRootFound(AxiStokesError, RuntimeError):
    pass


class MissingOnAxisOmega(AxiStokesError, KeyError):
    pass


class NonPositiveA(AxiStokesError, ValueError):
    pass


class UnsupportedDegree(AxiStokesError, ValueError):
    pass


class QuadratureFailure(AxiStokesError, FloatingPointError):
    pass


class EmptySpace(AxiStokesError, ValueError):
    pass


class SingularSystem(AxiStokesError, RuntimeError):
    pass


class NoConvergence(AxiStokesError, RuntimeError):
    pass


class UnsupportedSpec(AxiStokesError, ValueError):
    pass


class NotNested(AxiStokesError, ValueError):
    pass


class LevelMismatch(AxiStokesError, ValueError):
    pass


class RegionOutsideNeighborhood(AxiStokesError, ValueError):
    pass


class DegenerateAssignmentRegion(AxiStokesError, ValueError):
    pass
