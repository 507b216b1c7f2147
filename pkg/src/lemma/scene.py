"""Geometric ground truth: poses, robots, objects, support relations, reach.

Everything here is a plain value type. Scene states are treated as
immutable; the simulator returns new states instead of mutating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .config import WORLD, WorldConfig
from .errors import EmptyRegion, UnknownObject

TABLE = "table"  # sentinel support id for objects resting on the tabletop


def normalize_angle(theta: float) -> float:
    """Map an angle to [-pi, pi)."""
    theta = math.fmod(theta + math.pi, 2.0 * math.pi)
    if theta < 0:
        theta += 2.0 * math.pi
    return theta - math.pi


@dataclass(frozen=True)
class Pose2:
    """Planar pose; theta is normalized to [-pi, pi) on construction."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.theta)):
            raise ValueError(f"non-finite pose ({self.x}, {self.y}, {self.theta})")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", normalize_angle(float(self.theta)))

    def dist(self, other: "Pose2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)


def dist_xy(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


class RobotId(str, Enum):
    R0 = "robot0"
    R1 = "robot1"

    @property
    def index(self) -> int:
        return 0 if self is RobotId.R0 else 1

    @property
    def other(self) -> "RobotId":
        return RobotId.R1 if self is RobotId.R0 else RobotId.R0


class RobotModel(str, Enum):
    UR5 = "ur5"
    UR10 = "ur10"


class Color(str, Enum):
    PINK = "pink"
    RED = "red"
    WHITE = "white"
    BLUE = "blue"
    GREEN = "green"
    YELLOW = "yellow"


# Cube and pad colors; the tool is always yellow.
BLOCK_COLORS = (Color.PINK, Color.RED, Color.WHITE, Color.BLUE, Color.GREEN)
BODY_COLORS = (Color.RED, Color.WHITE)


class ObjectKind(str, Enum):
    CUBE = "cube"
    PAD = "pad"
    TOOL = "tool"


def reach_radius_of(model: RobotModel, cfg: WorldConfig = WORLD) -> float:
    return cfg.reach_ur5 if model is RobotModel.UR5 else cfg.reach_ur10


@dataclass(frozen=True)
class RobotSpec:
    id: RobotId
    model: RobotModel
    body_color: Color
    base: Pose2
    reach_radius: float

    @classmethod
    def make(cls, rid: RobotId, model: RobotModel, body_color: Color,
             cfg: WorldConfig = WORLD) -> "RobotSpec":
        base = cfg.base0 if rid is RobotId.R0 else cfg.base1
        return cls(id=rid, model=model, body_color=body_color,
                   base=Pose2(base[0], base[1], 0.0),
                   reach_radius=reach_radius_of(model, cfg))


@dataclass(frozen=True)
class ObjectSpec:
    id: int
    kind: ObjectKind
    color: Color

    def __post_init__(self) -> None:
        if self.kind is ObjectKind.TOOL and self.color is not Color.YELLOW:
            raise ValueError("tool color must be yellow")
        if self.kind is not ObjectKind.TOOL and self.color is Color.YELLOW:
            raise ValueError("yellow is reserved for the tool")


@dataclass(frozen=True)
class ObjectState:
    spec: ObjectSpec
    pose: Pose2
    support: int | str = TABLE  # object id, or TABLE


@dataclass(frozen=True)
class GoalAtom:
    """On(top, bottom): top cube resting directly on the bottom object."""

    top_color: Color
    bottom_color: Color
    bottom_kind: ObjectKind  # PAD or CUBE

    def __post_init__(self) -> None:
        if self.bottom_kind is ObjectKind.TOOL:
            raise ValueError("goal bottom cannot be the tool")


@dataclass(frozen=True)
class GoalCondition:
    atoms: tuple[GoalAtom, ...]

    def __post_init__(self) -> None:
        if not 1 <= len(self.atoms) <= 2:
            raise ValueError("goal must have one or two atoms")


@dataclass(frozen=True)
class SceneState:
    objects: tuple[ObjectState, ...]
    robots: tuple[RobotSpec, RobotSpec]
    holding: tuple[tuple[RobotId, int], ...] = ()  # (robot, object id) pairs
    clock: float = 0.0

    def object_by_id(self, obj_id: int) -> ObjectState:
        for obj in self.objects:
            if obj.spec.id == obj_id:
                return obj
        raise UnknownObject(f"no object with id {obj_id}")

    def robot_by_id(self, rid: RobotId) -> RobotSpec:
        for robot in self.robots:
            if robot.id == rid:
                return robot
        raise UnknownObject(f"no robot {rid.value}")

    def find_objects(self, color: Color, kind: ObjectKind) -> list[ObjectState]:
        return [o for o in self.objects if o.spec.color is color and o.spec.kind is kind]

    def the_tool(self) -> ObjectState | None:
        tools = [o for o in self.objects if o.spec.kind is ObjectKind.TOOL]
        return tools[0] if tools else None

    def held_ids(self) -> set[int]:
        return {obj_id for _, obj_id in self.holding}

    def with_updates(self, *, objects: tuple[ObjectState, ...] | None = None,
                     clock: float | None = None) -> "SceneState":
        return replace(self,
                       objects=self.objects if objects is None else objects,
                       clock=self.clock if clock is None else clock)


# ---------------------------------------------------------------------------
# Reach geometry
# ---------------------------------------------------------------------------

def reachable(robot: RobotSpec, p: Pose2) -> bool:
    """True iff p lies inside the robot's reach disk."""
    return robot.base.dist(p) <= robot.reach_radius


def tool_extended_reach(robot: RobotSpec, tool_length: float | None = None,
                        cfg: WorldConfig = WORLD) -> float:
    """Reach radius extended by the tool's long arm."""
    arm = cfg.tool_long_arm if tool_length is None else tool_length
    return robot.reach_radius + arm


def reach_limit(robot: RobotSpec, with_tool: bool, cfg: WorldConfig = WORLD) -> float:
    """Effective reach for a grasp or placement: extended when the tool is involved."""
    return tool_extended_reach(robot, cfg=cfg) if with_tool else robot.reach_radius


@dataclass(frozen=True)
class Region:
    """Intersection of both reach disks, clipped to the table rectangle."""

    centers: tuple[tuple[float, float], tuple[float, float]]
    radii: tuple[float, float]
    cfg: WorldConfig = field(default=WORLD, repr=False)

    @property
    def representative_point(self) -> Pose2:
        (x0, y0), (x1, y1) = self.centers
        return Pose2((x0 + x1) / 2.0, (y0 + y1) / 2.0, 0.0)

    def contains(self, p: Pose2, inset: float = 0.0) -> bool:
        if not on_table(p, margin=inset, cfg=self.cfg):
            return False
        for (cx, cy), r in zip(self.centers, self.radii):
            if math.hypot(p.x - cx, p.y - cy) > r - inset:
                return False
        return True


def shared_workspace(r0: RobotSpec, r1: RobotSpec) -> Region:
    """Lens-shaped region reachable by both robots.

    Raises EmptyRegion if the reach disks do not intersect, which cannot
    happen with the fixed base layout and is treated as a config error.
    """
    gap = r0.base.dist(r1.base)
    if gap > r0.reach_radius + r1.reach_radius:
        raise EmptyRegion(
            f"reach disks do not intersect (base gap {gap:.2f} m)")
    return Region(centers=(r0.base.xy(), r1.base.xy()),
                  radii=(r0.reach_radius, r1.reach_radius))


def on_table(p: Pose2, margin: float = 0.0, cfg: WorldConfig = WORLD) -> bool:
    return (cfg.table_x_min + margin <= p.x <= cfg.table_x_max - margin
            and cfg.table_y_min + margin <= p.y <= cfg.table_y_max - margin)


# ---------------------------------------------------------------------------
# Support relations
# ---------------------------------------------------------------------------

def top_of_stack(state: SceneState, obj_id: int) -> bool:
    """True iff nothing rests on the object. Held objects are trivially on top."""
    state.object_by_id(obj_id)  # raises UnknownObject
    return all(o.support != obj_id for o in state.objects)


def support_depth(state: SceneState, obj_id: int) -> int:
    """Number of objects underneath (0 = directly on the table)."""
    depth = 0
    current = state.object_by_id(obj_id)
    while current.support != TABLE:
        depth += 1
        current = state.object_by_id(int(current.support))
        if depth > len(state.objects):
            raise UnknownObject(f"support cycle at object {obj_id}")
    return depth


def base_height_mm(state: SceneState, obj_id: int, cfg: WorldConfig = WORLD) -> int:
    """Height of the object's underside above the table, in millimeters."""
    heights = {ObjectKind.CUBE: cfg.cube_height_mm,
               ObjectKind.PAD: cfg.pad_height_mm,
               ObjectKind.TOOL: cfg.tool_height_mm}
    total = 0
    current = state.object_by_id(obj_id)
    while current.support != TABLE:
        current = state.object_by_id(int(current.support))
        total += heights[current.spec.kind]
    return total


def validate_support_forest(state: SceneState) -> None:
    """Raise UnknownObject if the support graph is not a forest rooted at the table."""
    for obj in state.objects:
        support_depth(state, obj.spec.id)
    held = state.held_ids()
    for obj in state.objects:
        if obj.support != TABLE and int(obj.support) in held:
            raise UnknownObject(f"object {obj.spec.id} supported by a held object")


# ---------------------------------------------------------------------------
# Footprint geometry (bounding circles for cubes/pads, exact L for the tool)
# ---------------------------------------------------------------------------

def bounding_radius(spec: ObjectSpec, cfg: WorldConfig = WORLD) -> float:
    if spec.kind is ObjectKind.CUBE:
        return cfg.cube_side * math.sqrt(2.0) / 2.0
    if spec.kind is ObjectKind.PAD:
        return cfg.pad_radius
    # Tool: callers use the exact rectangles below instead.
    return cfg.tool_long_arm


def tool_rectangles(pose: Pose2, cfg: WorldConfig = WORLD) -> list[tuple[float, float, float, float, float]]:
    """The L-tool as two oriented rectangles (cx, cy, half_len, half_wid, theta).

    The pose marks the elbow; the long arm extends along local +x and the
    short arm along local +y.
    """
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    hw = cfg.tool_arm_width / 2.0
    long_c = (pose.x + c * cfg.tool_long_arm / 2.0, pose.y + s * cfg.tool_long_arm / 2.0)
    short_c = (pose.x - s * cfg.tool_short_arm / 2.0, pose.y + c * cfg.tool_short_arm / 2.0)
    return [
        (long_c[0], long_c[1], cfg.tool_long_arm / 2.0, hw, pose.theta),
        (short_c[0], short_c[1], hw, cfg.tool_short_arm / 2.0, pose.theta),
    ]


def _rect_corners(rect: tuple[float, float, float, float, float]) -> list[tuple[float, float]]:
    cx, cy, hl, hw, theta = rect
    c, s = math.cos(theta), math.sin(theta)
    corners = []
    for dx, dy in ((hl, hw), (hl, -hw), (-hl, -hw), (-hl, hw)):
        corners.append((cx + c * dx - s * dy, cy + s * dx + c * dy))
    return corners


def _rect_circle_overlap(rect: tuple[float, float, float, float, float],
                         center: tuple[float, float], radius: float) -> bool:
    cx, cy, hl, hw, theta = rect
    c, s = math.cos(-theta), math.sin(-theta)
    dx, dy = center[0] - cx, center[1] - cy
    lx, ly = c * dx - s * dy, s * dx + c * dy
    qx = min(max(lx, -hl), hl)
    qy = min(max(ly, -hw), hw)
    return math.hypot(lx - qx, ly - qy) <= radius


def footprints_overlap(a: ObjectState, b: ObjectState, cfg: WorldConfig = WORLD) -> bool:
    """Footprint overlap test; circles for compact objects, exact L for the tool."""
    a_tool = a.spec.kind is ObjectKind.TOOL
    b_tool = b.spec.kind is ObjectKind.TOOL
    if not a_tool and not b_tool:
        limit = bounding_radius(a.spec, cfg) + bounding_radius(b.spec, cfg)
        return a.pose.dist(b.pose) <= limit
    if a_tool and b_tool:
        return a.pose.dist(b.pose) <= 2.0 * cfg.tool_long_arm  # single tool in practice
    tool, other = (a, b) if a_tool else (b, a)
    r = bounding_radius(other.spec, cfg)
    return any(_rect_circle_overlap(rect, other.pose.xy(), r)
               for rect in tool_rectangles(tool.pose, cfg))


def footprint_on_table(obj: ObjectState, cfg: WorldConfig = WORLD) -> bool:
    """True iff the whole footprint lies inside the table rectangle."""
    if obj.spec.kind is ObjectKind.TOOL:
        corners = [c for rect in tool_rectangles(obj.pose, cfg) for c in _rect_corners(rect)]
        return all(cfg.table_x_min <= x <= cfg.table_x_max
                   and cfg.table_y_min <= y <= cfg.table_y_max for x, y in corners)
    return on_table(obj.pose, margin=bounding_radius(obj.spec, cfg), cfg=cfg)
