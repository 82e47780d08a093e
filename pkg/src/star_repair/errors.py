"""Exception types raised across the package, grouped by subsystem."""


class StarError(Exception):
    """Base class for all package-specific errors."""


# --- point cloud I/O ---

class PcdError(StarError):
    """Base class for PCD parse/serialize failures."""


class MalformedHeader(PcdError):
    pass


class CountMismatch(PcdError):
    pass


class NonFiniteValue(PcdError):
    pass


class NonPositiveLeaf(StarError):
    pass


# --- detection ---

class MissingColors(StarError):
    pass


class NonPositiveRadius(StarError):
    pass


# --- coverage planning ---

class TooFewPoints(StarError):
    pass


class DegenerateNeighborhood(StarError):
    pass


class ClusterMismatch(StarError):
    pass


class EmptyAfterExclusion(StarError):
    pass


# --- base planning ---

class NoValidPose(StarError):
    pass


class DegenerateNormal(StarError):
    pass


class CellOccupied(StarError):
    pass


class OutOfBounds(StarError):
    pass


class NoPath(StarError):
    pass


# --- review sessions / protocol ---

class IllegalTransition(StarError):
    def __init__(self, state, event_name):
        super().__init__(f"event {event_name!r} not allowed in state {state.name}")
        self.state = state
        self.event_name = event_name


class UnknownSession(StarError):
    pass


class MessageError(StarError):
    """Base class for wire protocol failures."""


class MalformedMessage(MessageError):
    pass


class UnknownType(MessageError):
    pass


class SchemaViolation(MessageError):
    pass


# --- configuration ---

class ConfigError(StarError):
    pass
