"""Exception hierarchy shared by all modules."""


class MultiHilbertError(Exception):
    """Base class for every error raised by the package."""


# geometry
class ConfigurationError(MultiHilbertError, ValueError):
    pass


class OverlapError(ConfigurationError):
    """Interiors of J and E intersect (or two parts of one set overlap)."""


class DegenerateInterval(ConfigurationError):
    pass


class BothUnboundedSameSide(OverlapError):
    """Two parts extend to the same infinity."""


class SamplesAtPole(MultiHilbertError, ValueError):
    pass


# discretize
class UnboundedWithoutCompactification(MultiHilbertError, ValueError):
    pass


class CoincidentPoints(MultiHilbertError, ValueError):
    pass


class EvaluationInsideJ(MultiHilbertError, ValueError):
    pass


class ContourTouchesSets(MultiHilbertError, ValueError):
    pass


# spectral
class WindowBelowNoiseFloor(MultiHilbertError, ValueError):
    pass


# exact_diag
class NotAscending(MultiHilbertError, ValueError):
    pass


class OddLength(MultiHilbertError, ValueError):
    pass


class AtDoublePoint(MultiHilbertError, ValueError):
    pass


class NoConvergence(MultiHilbertError, RuntimeError):
    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class NonPositiveRho(MultiHilbertError, ValueError):
    pass


class InsufficientDecay(MultiHilbertError, ValueError):
    pass


# rhp
class OnCut(MultiHilbertError, ValueError):
    pass


class PoleOfLambda(MultiHilbertError, ValueError):
    pass


class DegenerateFrame(MultiHilbertError, ValueError):
    pass


class NearSpectrumIllConditioned(MultiHilbertError, RuntimeError):
    def __init__(self, message, lam=None, cond=None):
        super().__init__(message)
        self.lam = lam
        self.cond = cond


class TooCloseToContour(MultiHilbertError, ValueError):
    pass


class PoorSeparation(MultiHilbertError, ValueError):
    pass
