"""Exception hierarchy shared by all modules."""


class RigidLabError(Exception):
    """Base class; carries an optional context dict for machine-readable error records."""

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context


class DivergentMoment(RigidLabError):
    pass


class QuadratureFailure(RigidLabError):
    pass


class InsufficientLadder(RigidLabError):
    pass


class TableNotBuilt(RigidLabError):
    pass


class RootFindingDiverged(RigidLabError):
    pass


class ConditioningFailure(RigidLabError):
    pass


class NotContraction(RigidLabError):
    pass


class BadParams(RigidLabError):
    pass


class NotAchieved(RigidLabError):
    """Certificate grid exhausted; ``best`` holds (epsilon, L, variance) of the best point."""

    def __init__(self, message, best=None, **context):
        super().__init__(message, **context)
        self.best = best


class WindowTooSmall(RigidLabError):
    pass


class ConfigError(RigidLabError):
    def __init__(self, errors):
        super().__init__("; ".join(errors))
        self.errors = list(errors)
