"""Deterministic quasi-static execution of the six action primitives.

``apply`` is a pure function: it never mutates its input state, and any
rejected action raises a SimError subclass while the caller keeps the
original state. Time advances by a fixed end-effector travel model plus
constant grasp/release overheads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .config import WORLD, WorldConfig
from .errors import (HandEmpty, HandNotEmpty, NotTopOfStack, NothingToPick,
                     OffTable, OutOfReach, ToolNotAligned, UnknownColorKind,
                     UnknownObject)
from .scene import (TABLE, GoalCondition, ObjectKind, ObjectState, Pose2,
                    RobotId, SceneState, base_height_mm, on_table,
                    reach_limit, top_of_stack)


class Primitive(str, Enum):
    MOVE = "move"
    PREHOOK = "prehook"
    HOOK = "hook"
    PREPOKE = "prepoke"
    POKE = "poke"
    STOP = "stop"


TOOL_PRIMITIVES = frozenset({Primitive.PREHOOK, Primitive.HOOK,
                             Primitive.PREPOKE, Primitive.POKE})


@dataclass(frozen=True)
class PrimitiveAction:
    robot: RobotId
    primitive: Primitive
    t_pick: Pose2
    t_place: Pose2

    @classmethod
    def stop(cls, robot: RobotId) -> "PrimitiveAction":
        origin = Pose2(0.0, 0.0, 0.0)
        return cls(robot=robot, primitive=Primitive.STOP, t_pick=origin, t_place=origin)


@dataclass(frozen=True)
class TransitionReceipt:
    duration: float
    picked: int | None
    displaced: tuple[tuple[int, Pose2, Pose2], ...]  # (object id, old, new)


def travel_time(base: Pose2, t_pick: Pose2, t_place: Pose2,
                cfg: WorldConfig = WORLD) -> float:
    """Shared time model: travel at constant speed plus grasp and release."""
    path = base.dist(t_pick) + t_pick.dist(t_place)
    return path / cfg.speed + cfg.grasp_s + cfg.release_s


def _object_under(state: SceneState, p: Pose2, cfg: WorldConfig) -> ObjectState | None:
    """Nearest on-table object whose center is within the snap radius of p."""
    held = state.held_ids()
    best: ObjectState | None = None
    best_d = cfg.snap_radius
    for obj in state.objects:
        if obj.spec.id in held:
            continue
        d = obj.pose.dist(p)
        if d <= best_d:
            best, best_d = obj, d
    return best


def _support_target(state: SceneState, t_place: Pose2, moving_id: int,
                    cfg: WorldConfig) -> ObjectState | None:
    """Pad or cube under the place pose that can receive the moving object."""
    held = state.held_ids()
    best: ObjectState | None = None
    best_d = cfg.snap_radius
    for obj in state.objects:
        if obj.spec.id == moving_id or obj.spec.id in held:
            continue
        if obj.spec.kind not in (ObjectKind.PAD, ObjectKind.CUBE):
            continue
        if not top_of_stack(state, obj.spec.id):
            continue
        d = obj.pose.dist(t_place)
        if d <= best_d:
            best, best_d = obj, d
    return best


def _replace_object(state: SceneState, obj_id: int, pose: Pose2,
                    support: int | str) -> tuple[ObjectState, ...]:
    out = []
    for obj in state.objects:
        if obj.spec.id == obj_id:
            out.append(replace(obj, pose=pose, support=support))
        else:
            out.append(obj)
    return tuple(out)


def _pushable(state: SceneState, obj: ObjectState, cfg: WorldConfig) -> bool:
    """Cubes low enough for the 5 cm tool height to contact."""
    return (obj.spec.kind is ObjectKind.CUBE
            and base_height_mm(state, obj.spec.id, cfg) < cfg.cube_height_mm)


def _corridor_blocked(state: SceneState, target: ObjectState,
                      start: tuple[float, float], end: tuple[float, float],
                      cfg: WorldConfig) -> int | None:
    """Id of a cube the sliding target would strike between start and end."""
    width = cfg.cube_side * math.sqrt(2.0)  # two cube bounding radii
    ex, ey = end[0] - start[0], end[1] - start[1]
    length = math.hypot(ex, ey)
    if length == 0.0:
        return None
    ux, uy = ex / length, ey / length
    for obj in state.objects:
        if obj.spec.id == target.spec.id or not _pushable(state, obj, cfg):
            continue
        dx, dy = obj.pose.x - start[0], obj.pose.y - start[1]
        along = min(max(dx * ux + dy * uy, 0.0), length)
        px, py = start[0] + along * ux, start[1] + along * uy
        if math.hypot(obj.pose.x - px, obj.pose.y - py) <= width:
            return obj.spec.id
    return None


def apply(state: SceneState, action: PrimitiveAction,
          cfg: WorldConfig = WORLD) -> tuple[SceneState, TransitionReceipt]:
    """Execute one primitive, returning the new state and a receipt.

    Rejections raise SimError subclasses and leave the input state usable
    as-is; the clock only advances on success.
    """
    robot = state.robot_by_id(action.robot)

    if action.primitive is Primitive.STOP:
        return state, TransitionReceipt(duration=0.0, picked=None, displaced=())

    if not on_table(action.t_pick, cfg=cfg) or not on_table(action.t_place, cfg=cfg):
        raise OffTable(f"{action.primitive.value}: pose outside the table rectangle")
    for rid, _ in state.holding:
        if rid == action.robot:
            raise HandNotEmpty(f"{robot.id.value} is already holding an object")

    picked = _object_under(state, action.t_pick, cfg)
    if picked is None:
        raise NothingToPick(f"no object within snap radius of ({action.t_pick.x:.3f}, {action.t_pick.y:.3f})")

    is_tool_prim = action.primitive in TOOL_PRIMITIVES
    if is_tool_prim and picked.spec.kind is not ObjectKind.TOOL:
        raise HandEmpty(f"{action.primitive.value} requires grabbing the tool, got {picked.spec.kind.value}")

    grab_with_tool = picked.spec.kind is ObjectKind.TOOL
    if robot.base.dist(picked.pose) > reach_limit(robot, grab_with_tool, cfg):
        raise OutOfReach(f"pick point {picked.pose.xy()} beyond reach of {robot.id.value}")
    if not top_of_stack(state, picked.spec.id):
        raise NotTopOfStack(f"object {picked.spec.id} is underneath another object")

    duration = travel_time(robot.base, action.t_pick, action.t_place, cfg)
    clock = state.clock + duration

    if action.primitive in (Primitive.MOVE, Primitive.PREPOKE, Primitive.PREHOOK):
        # Generic pick-and-place at 30 cm transit height; no contact en route.
        if robot.base.dist(action.t_place) > reach_limit(robot, grab_with_tool, cfg):
            raise OutOfReach(f"place point {action.t_place.xy()} beyond reach of {robot.id.value}")
        target = _support_target(state, action.t_place, picked.spec.id, cfg)
        support = target.spec.id if target is not None else TABLE
        new_pose = action.t_place
        objects = _replace_object(state, picked.spec.id, new_pose, support)
        receipt = TransitionReceipt(duration=duration, picked=picked.spec.id,
                                    displaced=((picked.spec.id, picked.pose, new_pose),))
        return state.with_updates(objects=objects, clock=clock), receipt

    # POKE / HOOK: the grabbed object is the tool; the payload is the nearest
    # contactable cube, translated along the ray through the robot base.
    tool = picked
    target = None
    best = cfg.align_tolerance
    for obj in state.objects:
        if not _pushable(state, obj, cfg):
            continue
        d = obj.pose.dist(tool.pose)
        if d <= best:
            target, best = obj, d
    if target is None:
        raise ToolNotAligned(f"no cube within {cfg.align_tolerance} m of the tool")

    radial = target.pose.dist(robot.base)
    if radial > reach_limit(robot, True, cfg):
        raise OutOfReach(f"target cube at {radial:.3f} m exceeds tool-extended reach")
    if radial == 0.0:
        raise ToolNotAligned("target cube sits on the robot base")

    ux = (target.pose.x - robot.base.x) / radial
    uy = (target.pose.y - robot.base.y) / radial
    if action.primitive is Primitive.HOOK:
        ux, uy = -ux, -uy  # drag toward the base instead of pushing away
    distance = min(target.pose.dist(action.t_place), cfg.max_push)
    end = (target.pose.x + ux * distance, target.pose.y + uy * distance)
    final = Pose2(end[0], end[1], target.pose.theta)

    if not on_table(final, margin=cfg.cube_side / 2.0, cfg=cfg):
        raise OffTable("pushed cube would leave the table")
    if action.primitive is Primitive.HOOK and robot.base.dist(final) > robot.reach_radius:
        raise OutOfReach("hooked cube would still be outside the plain reach disk")
    blocker = _corridor_blocked(state, target, target.pose.xy(), end, cfg)
    if blocker is not None:
        raise ToolNotAligned(f"push corridor blocked by cube {blocker}")

    tool_rest = Pose2(target.pose.x, target.pose.y, tool.pose.theta)
    objects = _replace_object(state, target.spec.id, final, TABLE)
    interim = state.with_updates(objects=objects)
    objects = _replace_object(interim, tool.spec.id, tool_rest, TABLE)
    receipt = TransitionReceipt(
        duration=duration, picked=tool.spec.id,
        displaced=((target.spec.id, target.pose, final),
                   (tool.spec.id, tool.pose, tool_rest)))
    return state.with_updates(objects=objects, clock=clock), receipt


def check_goal(state: SceneState, goal: GoalCondition, cfg: WorldConfig = WORLD) -> bool:
    """True iff every On(top, bottom) atom holds with centers within the snap radius."""
    for atom in goal.atoms:
        tops = state.find_objects(atom.top_color, ObjectKind.CUBE)
        bottoms = state.find_objects(atom.bottom_color, atom.bottom_kind)
        if not tops or not bottoms:
            raise UnknownColorKind(
                f"goal references absent {atom.top_color.value} cube "
                f"or {atom.bottom_color.value} {atom.bottom_kind.value}")
        satisfied = False
        for top in tops:
            for bottom in bottoms:
                if top.support == bottom.spec.id and top.pose.dist(bottom.pose) <= cfg.snap_radius:
                    satisfied = True
        if not satisfied:
            return False
    return True


def within_budget(state: SceneState, t_max: float) -> bool:
    return state.clock <= t_max


def conserved_ids(state: SceneState) -> tuple[int, ...]:
    """Sorted object ids; invariant under apply."""
    return tuple(sorted(o.spec.id for o in state.objects))
