"""Exception types raised across the package."""


class LacusumError(Exception):
    pass


class NegativeInput(LacusumError, ValueError):
    pass


class InvalidParams(LacusumError, ValueError):
    pass


class InvalidHorizon(LacusumError, ValueError):
    pass


class GridTooCoarse(LacusumError, ValueError):
    pass


class NotIncreasing(LacusumError, ValueError):
    pass


class NotLacunary(LacusumError, ValueError):
    pass


class BadParams(LacusumError, ValueError):
    pass


class CompatibleModulus(LacusumError):
    """No witness blocks exist: the modulus behaves theta-compatibly."""


class InequalityViolated(LacusumError):
    pass


class BoundedRatios(LacusumError):
    pass


class UnknownLaw(LacusumError, KeyError):
    pass


class BadConfig(LacusumError, ValueError):
    pass
