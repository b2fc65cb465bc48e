"""Exception hierarchy.

Every domain error derives from :class:`CurvkitError`, itself a
``ValueError``, so callers can catch the whole family at once.
"""


class CurvkitError(ValueError):
    pass


class InvalidTriple(CurvkitError):
    pass


class CoincidentPoints(CurvkitError):
    pass


class ZeroArgument(CurvkitError):
    pass


class WrongVariant(CurvkitError):
    pass


class BadPair(CurvkitError):
    pass


class BadT(CurvkitError):
    pass


class NonpositiveWeight(CurvkitError):
    pass


class DuplicatePoint(CurvkitError):
    pass


class EmptyInput(CurvkitError):
    pass


class BadCount(CurvkitError):
    pass


class LevelTooLarge(CurvkitError):
    pass


class DegenerateSupport(CurvkitError):
    pass


class EmptyMeasure(CurvkitError):
    pass


class EmptyWindow(CurvkitError):
    pass


class ZeroMassRoot(CurvkitError):
    pass


class NoAdmissibleSamples(CurvkitError):
    pass


class TooManyAtoms(CurvkitError):
    pass
