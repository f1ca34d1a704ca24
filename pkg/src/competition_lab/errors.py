class CompetitionLabError(Exception):
    """Base class for fatal configuration and simulation errors."""


class InvalidParams(CompetitionLabError, ValueError):
    pass


class MalformedProfile(CompetitionLabError, ValueError):
    pass


class UncoveredSite(CompetitionLabError):
    """The boundary or weight field does not cover the requested box."""


class PathExitsBox(CompetitionLabError):
    """A traced path needs sites beyond the computed box.

    ``steps`` is how far the path got, ``position`` its last site.
    """

    def __init__(self, msg, steps=None, position=None):
        super().__init__(msg)
        self.steps = steps
        self.position = position


class HorizonError(CompetitionLabError):
    """A time beyond what the computed field determines was requested."""


class BoundaryContamination(CompetitionLabError):
    """A finite-window effect reached the guard band around the tagged particle."""


class ReplicaError(CompetitionLabError):
    def __init__(self, index, seed, cause):
        super().__init__(f"replica {index} (seed {seed}) failed: {cause!r}")
        self.index = index
        self.seed = seed
        self.cause = cause
