"""Exception hierarchy shared across the benchmark toolkit."""


class LemmaError(Exception):
    """Base class for all toolkit errors."""


class WorldConfigError(LemmaError):
    """world.cfg is missing, malformed, or has an unsupported version."""


# --- scene ---

class UnknownObject(LemmaError):
    """An object or robot id is not present in the scene."""


class EmptyRegion(LemmaError):
    """The two reach disks do not intersect (invalid world layout)."""


# --- simulator: every SimError leaves the scene state unchanged ---

class SimError(LemmaError):
    """An action primitive was rejected; the sub-task it carried failed."""


class OutOfReach(SimError):
    pass


class HandNotEmpty(SimError):
    pass


class HandEmpty(SimError):
    """A tool primitive was issued but the grabbed object is not the tool."""


class NotTopOfStack(SimError):
    pass


class ToolNotAligned(SimError):
    """No target cube near the tool, or the push/drag corridor is blocked."""


class OffTable(SimError):
    pass


class NothingToPick(SimError):
    pass


class UnknownColorKind(LemmaError):
    """A goal condition references a (color, kind) absent from the scene."""


# --- task generation ---

class GenerationExhausted(LemmaError):
    """Rejection sampling hit the attempt cap; configuration is infeasible."""


# --- allocation ---

class UnresolvableEntity(LemmaError):
    """An entity reference does not resolve to a unique object or point."""


class NoFeasibleAllocation(LemmaError):
    pass


# --- oracle ---

class DecompositionFailure(LemmaError):
    pass


class DemonstrationFailure(LemmaError):
    """The oracle pipeline failed on an instance; a generator/solver defect."""


# --- language ---

class ParseError(LemmaError):
    pass


class UnknownTemplate(LemmaError):
    pass


class CodecError(LemmaError):
    pass


# --- dataset ---

class IoError(LemmaError):
    pass


class SchemaVersionMismatch(LemmaError):
    pass


class OutOfBounds(LemmaError):
    pass


class BadCount(LemmaError):
    pass


# --- harness ---

class PolicyFault(LemmaError):
    """The policy raised or returned a malformed decision."""


class MissingSplit(LemmaError):
    pass
