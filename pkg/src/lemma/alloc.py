"""Sub-task assignment: utility model, feasibility, exact and greedy solvers.

A sub-task names *what* to manipulate and *where* it goes through entity
references; this module resolves those references against a scene (or a
virtual position map during planning), scores robot/sub-task pairings, and
searches for the utility-maximizing assignment under the shared time budget
and precedence constraints. Unassigned sub-tasks are allowed; feasibility
failures score negative infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .config import WORLD, WorldConfig
from .errors import UnresolvableEntity
from .scene import (Color, ObjectKind, Pose2, RobotId, RobotSpec, SceneState,
                    on_table, reach_limit, shared_workspace)
from .sim import Primitive, travel_time

NEG_INF = float("-inf")


# ---------------------------------------------------------------------------
# Entity references
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ObjectRef:
    color: Color
    kind: ObjectKind


class SiteKind(str, Enum):
    SHARED_SPACE = "shared_space"
    OWN_WORKSPACE = "own_workspace"
    OTHER_WORKSPACE = "other_workspace"
    RETURN_SPOT = "return_spot"
    PAD_OF = "pad_of"
    STACK_ON = "stack_on"
    ALIGN_WITH = "align_with"


class SiteRef:
    """Symbolic place target; colored variants reference an object's position."""

    __slots__ = ("site", "color")

    def __init__(self, site: SiteKind, color: Color | None = None):
        colored = site in (SiteKind.PAD_OF, SiteKind.STACK_ON, SiteKind.ALIGN_WITH)
        if colored != (color is not None):
            raise ValueError(f"site {site.value} color mismatch")
        self.site = site
        self.color = color

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, SiteRef) and other.site == self.site
                and other.color == self.color)

    def __hash__(self) -> int:
        return hash((self.site, self.color))

    def __repr__(self) -> str:
        return f"SiteRef({self.site.value}{'' if self.color is None else ', ' + self.color.value})"


EntityRef = ObjectRef | SiteRef


@dataclass(frozen=True)
class SubTask:
    id: int
    primitive: Primitive
    pick_ref: ObjectRef
    place_ref: EntityRef
    depends_on: frozenset[int] = frozenset()


@dataclass(frozen=True)
class SubTaskDag:
    tasks: tuple[SubTask, ...]

    def __post_init__(self) -> None:
        ids = {t.id for t in self.tasks}
        if len(ids) != len(self.tasks):
            raise ValueError("duplicate sub-task ids")
        for t in self.tasks:
            missing = t.depends_on - ids
            if missing:
                raise ValueError(f"sub-task {t.id} depends on unknown ids {missing}")
        self.topo_order()  # raises on cycles

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple((dep, t.id) for t in self.tasks for dep in sorted(t.depends_on))

    def by_id(self, task_id: int) -> SubTask:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(task_id)

    def topo_order(self) -> tuple[int, ...]:
        """Canonical topological order: smallest ready id first."""
        pending = {t.id: set(t.depends_on) for t in self.tasks}
        order: list[int] = []
        while pending:
            ready = sorted(tid for tid, deps in pending.items() if not deps)
            if not ready:
                raise ValueError("sub-task precedence graph has a cycle")
            nxt = ready[0]
            order.append(nxt)
            del pending[nxt]
            for deps in pending.values():
                deps.discard(nxt)
        return tuple(order)

    def ancestors(self, task_id: int) -> frozenset[int]:
        seen: set[int] = set()
        frontier = list(self.by_id(task_id).depends_on)
        while frontier:
            tid = frontier.pop()
            if tid not in seen:
                seen.add(tid)
                frontier.extend(self.by_id(tid).depends_on)
        return frozenset(seen)


# ---------------------------------------------------------------------------
# Entity resolution against live or virtual positions
# ---------------------------------------------------------------------------

Positions = dict[int, tuple[float, float]]


def _object_position(state: SceneState, positions: Positions | None,
                     obj_id: int) -> tuple[float, float]:
    if positions is not None and obj_id in positions:
        return positions[obj_id]
    return state.object_by_id(obj_id).pose.xy()


def _unique_object(state: SceneState, ref: ObjectRef) -> int:
    matches = state.find_objects(ref.color, ref.kind)
    if len(matches) != 1:
        raise UnresolvableEntity(
            f"{ref.color.value} {ref.kind.value} matches {len(matches)} objects")
    return matches[0].spec.id


def _tool_id(state: SceneState) -> int:
    tool = state.the_tool()
    if tool is None:
        raise UnresolvableEntity("scene has no tool")
    return tool.spec.id


def hook_destination(cube: tuple[float, float], robot: RobotSpec,
                     cfg: WorldConfig = WORLD) -> tuple[float, float] | None:
    """Minimal drag landing the cube just inside the robot's own reach disk."""
    radial = math.hypot(cube[0] - robot.base.x, cube[1] - robot.base.y)
    if radial == 0.0:
        return None
    d = max(radial - (robot.reach_radius - cfg.disk_inset), 0.0)
    if d > cfg.max_push:
        return None
    ux = (robot.base.x - cube[0]) / radial
    uy = (robot.base.y - cube[1]) / radial
    end = (cube[0] + ux * d, cube[1] + uy * d)
    if not on_table(Pose2(end[0], end[1]), margin=cfg.cube_side / 2.0, cfg=cfg):
        return None
    return end


def poke_destination(cube: tuple[float, float], robot: RobotSpec,
                     receiver: RobotSpec, cfg: WorldConfig = WORLD) -> tuple[float, float] | None:
    """Minimal push along the away-from-base ray into the receiver's disk."""
    radial = math.hypot(cube[0] - robot.base.x, cube[1] - robot.base.y)
    if radial == 0.0:
        return None
    ux = (cube[0] - robot.base.x) / radial
    uy = (cube[1] - robot.base.y) / radial
    # Solve |cube + d*u - recv_base| = recv_reach - inset for the smaller root.
    rx, ry = cube[0] - receiver.base.x, cube[1] - receiver.base.y
    radius = receiver.reach_radius - cfg.disk_inset
    b = ux * rx + uy * ry
    c = rx * rx + ry * ry - radius * radius
    disc = b * b - c
    if c <= 0.0:
        d = 0.0  # already inside the shrunken disk
    elif disc < 0.0:
        return None  # ray misses the receiver's disk entirely
    else:
        d = -b - math.sqrt(disc)
        if d < 0.0:
            return None
    if d > cfg.max_push:
        return None
    end = (cube[0] + ux * d, cube[1] + uy * d)
    if not on_table(Pose2(end[0], end[1]), margin=cfg.cube_side / 2.0, cfg=cfg):
        return None
    return end


_DROP_RINGS = [0.0, 0.12, 0.24, 0.36, 0.48]
_DROP_ANGLES = 12
_DROP_CLEARANCE = 0.10


def shared_drop_point(state: SceneState, positions: Positions | None = None,
                      exclude_id: int | None = None,
                      cfg: WorldConfig = WORLD) -> tuple[float, float]:
    """First free spot at or spiraling out from the shared-workspace center."""
    region = shared_workspace(state.robots[0], state.robots[1])
    center = region.representative_point
    occupied = [_object_position(state, positions, o.spec.id)
                for o in state.objects if o.spec.id != exclude_id]
    for ring in _DROP_RINGS:
        steps = 1 if ring == 0.0 else _DROP_ANGLES
        for k in range(steps):
            angle = 2.0 * math.pi * k / _DROP_ANGLES
            p = Pose2(center.x + ring * math.cos(angle),
                      center.y + ring * math.sin(angle))
            if not region.contains(p, inset=cfg.disk_inset):
                continue
            if all(math.hypot(p.x - ox, p.y - oy) > _DROP_CLEARANCE
                   for ox, oy in occupied):
                return p.xy()
    return center.xy()  # saturated shared space; let the simulator arbitrate


def grab_point(sub: SubTask, state: SceneState,
               positions: Positions | None = None) -> tuple[float, float]:
    """Where the gripper closes: the payload for moves, the tool for pokes/hooks."""
    if sub.primitive in (Primitive.POKE, Primitive.HOOK):
        return _object_position(state, positions, _tool_id(state))
    return _object_position(state, positions, _unique_object(state, sub.pick_ref))


def place_point(sub: SubTask, robot: RobotSpec, state: SceneState,
                positions: Positions | None = None,
                cfg: WorldConfig = WORLD) -> tuple[float, float] | None:
    """Resolve the place reference for the given executing robot.

    Returns None when a poke/hook destination does not exist for that robot;
    callers treat that as infeasibility rather than an error.
    """
    ref = sub.place_ref
    if isinstance(ref, ObjectRef):
        return _object_position(state, positions, _unique_object(state, ref))
    if ref.site is SiteKind.SHARED_SPACE:
        mover = _unique_object(state, sub.pick_ref)
        return shared_drop_point(state, positions, exclude_id=mover, cfg=cfg)
    if ref.site is SiteKind.PAD_OF:
        return _object_position(state, positions,
                                _unique_object(state, ObjectRef(ref.color, ObjectKind.PAD)))
    if ref.site is SiteKind.STACK_ON:
        return _object_position(state, positions,
                                _unique_object(state, ObjectRef(ref.color, ObjectKind.CUBE)))
    if ref.site is SiteKind.ALIGN_WITH:
        cube = _object_position(state, positions,
                                _unique_object(state, ObjectRef(ref.color, ObjectKind.CUBE)))
        radial = math.hypot(cube[0] - robot.base.x, cube[1] - robot.base.y)
        if radial == 0.0:
            return None
        ux = (cube[0] - robot.base.x) / radial
        uy = (cube[1] - robot.base.y) / radial
        side = -1.0 if sub.primitive is Primitive.PREPOKE else 1.0
        return (cube[0] + side * cfg.tool_standoff * ux,
                cube[1] + side * cfg.tool_standoff * uy)
    if ref.site is SiteKind.OWN_WORKSPACE:
        cube = _object_position(state, positions, _unique_object(state, sub.pick_ref))
        return hook_destination(cube, robot, cfg)
    if ref.site is SiteKind.OTHER_WORKSPACE:
        cube = _object_position(state, positions, _unique_object(state, sub.pick_ref))
        receiver = state.robot_by_id(robot.id.other)
        return poke_destination(cube, robot, receiver, cfg)
    if ref.site is SiteKind.RETURN_SPOT:
        return _object_position(state, positions, _unique_object(state, sub.pick_ref))
    raise UnresolvableEntity(f"unhandled site {ref.site}")


# ---------------------------------------------------------------------------
# Feasibility and utility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UtilityModel:
    """u = quality - cost, with cost proportional to estimated duration."""

    quality: float = 1.0
    cost_per_second: float = 0.001


DEFAULT_MODEL = UtilityModel()


@dataclass(frozen=True)
class UtilityTerms:
    q: float
    c: float
    tau: float
    u: float


def feasible(robot: RobotSpec, sub: SubTask, scene: SceneState,
             positions: Positions | None = None, cfg: WorldConfig = WORLD) -> bool:
    """Can the robot execute the sub-task, against current or planned positions?"""
    if sub.primitive is Primitive.STOP:
        return True
    grab = grab_point(sub, scene, positions)
    place = place_point(sub, robot, scene, positions, cfg)
    if place is None:
        return False
    grab_pose = Pose2(grab[0], grab[1])
    place_pose = Pose2(place[0], place[1])
    tool_involved = (sub.primitive is not Primitive.MOVE
                     or sub.pick_ref.kind is ObjectKind.TOOL)
    if robot.base.dist(grab_pose) > reach_limit(robot, tool_involved, cfg):
        return False
    if sub.primitive in (Primitive.POKE, Primitive.HOOK):
        target = _object_position(scene, positions, _unique_object(scene, sub.pick_ref))
        radial = math.hypot(target[0] - robot.base.x, target[1] - robot.base.y)
        if radial > reach_limit(robot, True, cfg):
            return False
        # Destination validity (push length, table, receiving disk) is folded
        # into place resolution; a poke's endpoint is not reach-checked.
        return True
    return robot.base.dist(place_pose) <= reach_limit(robot, tool_involved, cfg)


def utility(robot: RobotSpec, sub: SubTask, scene: SceneState,
            positions: Positions | None = None, model: UtilityModel = DEFAULT_MODEL,
            cfg: WorldConfig = WORLD) -> UtilityTerms:
    """Score a robot/sub-task pairing; infeasible pairings get u = -inf."""
    if not feasible(robot, sub, scene, positions, cfg):
        return UtilityTerms(q=model.quality, c=NEG_INF, tau=NEG_INF, u=NEG_INF)
    grab = grab_point(sub, scene, positions)
    place = place_point(sub, robot, scene, positions, cfg)
    assert place is not None
    tau = travel_time(robot.base, Pose2(grab[0], grab[1]), Pose2(place[0], place[1]), cfg)
    cost = model.cost_per_second * tau
    return UtilityTerms(q=model.quality, c=cost, tau=tau, u=model.quality - cost)


def plan_positions(dag: SubTaskDag, scene: SceneState,
                   cfg: WorldConfig = WORLD) -> dict[int, Positions]:
    """Virtual object positions before each sub-task under nominal execution.

    Walks the canonical topological order, applying each sub-task's declared
    placement with the lowest-indexed feasible robot as the nominal executor.
    The result makes feasibility and duration estimates independent of the
    candidate assignment being scored.
    """
    virtpos: Positions = {}
    before: dict[int, Positions] = {}
    for tid in dag.topo_order():
        sub = dag.by_id(tid)
        before[tid] = dict(virtpos)
        nominal = None
        for robot in scene.robots:
            if feasible(robot, sub, scene, virtpos, cfg):
                nominal = robot
                break
        if nominal is None:
            continue  # unassignable under any schedule; leave positions as-is
        place = place_point(sub, nominal, scene, virtpos, cfg)
        if place is None:
            continue
        if sub.primitive in (Primitive.POKE, Primitive.HOOK):
            cube_id = _unique_object(scene, sub.pick_ref)
            virtpos[_tool_id(scene)] = _object_position(scene, virtpos, cube_id)
            virtpos[cube_id] = place
        else:
            moved = (_tool_id(scene) if sub.primitive in (Primitive.PREPOKE, Primitive.PREHOOK)
                     else _unique_object(scene, sub.pick_ref))
            virtpos[moved] = place
    return before


# ---------------------------------------------------------------------------
# Allocation and solvers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Allocation:
    gamma: dict[int, RobotId]
    v: tuple[tuple[int, ...], tuple[int, ...]]  # rows: robots, cols: task_ids
    task_ids: tuple[int, ...]
    order: tuple[int, ...]
    total_utility: float
    total_time: float

    def assigned(self) -> frozenset[int]:
        return frozenset(self.gamma)

    def to_dict(self) -> dict:
        return {
            "gamma": {str(m): rid.value for m, rid in sorted(self.gamma.items())},
            "order": list(self.order),
            "utility": self.total_utility,
            "time": self.total_time,
        }


def _build_allocation(dag: SubTaskDag, gamma: dict[int, RobotId],
                      total_utility: float, total_time: float) -> Allocation:
    task_ids = tuple(sorted(t.id for t in dag.tasks))
    rows = []
    for rid in (RobotId.R0, RobotId.R1):
        rows.append(tuple(1 if gamma.get(m) == rid else 0 for m in task_ids))
    order = tuple(t for t in dag.topo_order() if t in gamma)
    return Allocation(gamma=dict(gamma), v=(rows[0], rows[1]), task_ids=task_ids,
                      order=order, total_utility=total_utility, total_time=total_time)


def _score_matrix(dag: SubTaskDag, robots: tuple[RobotSpec, RobotSpec],
                  scene: SceneState, model: UtilityModel,
                  cfg: WorldConfig) -> dict[int, list[UtilityTerms]]:
    before = plan_positions(dag, scene, cfg)
    return {t.id: [utility(r, t, scene, before[t.id], model, cfg) for r in robots]
            for t in dag.tasks}


def _gamma_key(gamma: dict[int, RobotId], task_ids: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(gamma[m].index if m in gamma else 2 for m in task_ids)


def solve_exact(dag: SubTaskDag, robots: tuple[RobotSpec, RobotSpec],
                scene: SceneState, t_max: float,
                model: UtilityModel = DEFAULT_MODEL,
                cfg: WorldConfig = WORLD) -> Allocation:
    """Utility-maximizing assignment by depth-first search over the DAG.

    Explores, in topological order, leaving each sub-task unassigned or
    giving it a feasible robot whose precedence ancestors are all assigned
    and whose duration still fits the summed budget. Ties break toward
    smaller total time, then the lexicographically smallest assignment
    vector over ascending sub-task ids.
    """
    if len(dag.tasks) > 12:
        raise ValueError("exact solver is limited to 12 sub-tasks")
    scores = _score_matrix(dag, robots, scene, model, cfg)
    topo = dag.topo_order()
    task_ids = tuple(sorted(t.id for t in dag.tasks))

    best_gamma: dict[int, RobotId] = {}
    best = (0.0, 0.0, _gamma_key({}, task_ids))  # (utility, time, lex key)

    def better(utility_total: float, time_total: float, key: tuple[int, ...]) -> bool:
        if utility_total != best[0]:
            return utility_total > best[0]
        if time_total != best[1]:
            return time_total < best[1]
        return key < best[2]

    gamma: dict[int, RobotId] = {}

    def dfs(pos: int, utility_total: float, time_total: float) -> None:
        nonlocal best, best_gamma
        if pos == len(topo):
            key = _gamma_key(gamma, task_ids)
            if better(utility_total, time_total, key):
                best = (utility_total, time_total, key)
                best_gamma = dict(gamma)
            return
        tid = topo[pos]
        sub = dag.by_id(tid)
        dfs(pos + 1, utility_total, time_total)  # leave unassigned
        if not all(dep in gamma for dep in sub.depends_on):
            return
        for robot in robots:
            terms = scores[tid][robot.id.index]
            if terms.u == NEG_INF or time_total + terms.tau > t_max:
                continue
            gamma[tid] = robot.id
            dfs(pos + 1, utility_total + terms.u, time_total + terms.tau)
            del gamma[tid]

    dfs(0, 0.0, 0.0)
    return _build_allocation(dag, best_gamma, best[0], best[1])


def solve_greedy(dag: SubTaskDag, robots: tuple[RobotSpec, RobotSpec],
                 scene: SceneState, t_max: float,
                 model: UtilityModel = DEFAULT_MODEL,
                 cfg: WorldConfig = WORLD) -> Allocation:
    """One topological pass, taking the highest-utility robot that still fits."""
    scores = _score_matrix(dag, robots, scene, model, cfg)
    gamma: dict[int, RobotId] = {}
    total_u = 0.0
    total_t = 0.0
    for tid in dag.topo_order():
        sub = dag.by_id(tid)
        if not all(dep in gamma for dep in sub.depends_on):
            continue
        choices = [(terms.u, -robot.id.index, robot.id, terms.tau)
                   for robot, terms in zip(robots, scores[tid])
                   if terms.u != NEG_INF and total_t + terms.tau <= t_max]
        if not choices:
            continue
        u, _, rid, tau = max(choices)
        gamma[tid] = rid
        total_u += u
        total_t += tau
    return _build_allocation(dag, gamma, total_u, total_t)


def validate_allocation(allocation: Allocation, dag: SubTaskDag,
                        robots: tuple[RobotSpec, RobotSpec], scene: SceneState,
                        t_max: float, model: UtilityModel = DEFAULT_MODEL,
                        cfg: WorldConfig = WORLD) -> None:
    """Raise ValueError if the allocation violates any assignment constraint."""
    scores = _score_matrix(dag, robots, scene, model, cfg)
    task_ids = tuple(sorted(t.id for t in dag.tasks))
    if allocation.task_ids != task_ids:
        raise ValueError("allocation does not cover the DAG's sub-tasks")
    for row in allocation.v:
        if any(x not in (0, 1) for x in row):
            raise ValueError("assignment indicators must be binary")
    for col, m in enumerate(task_ids):
        total = allocation.v[0][col] + allocation.v[1][col]
        if total > 1:
            raise ValueError(f"sub-task {m} assigned to more than one robot")
        assigned_here = allocation.gamma.get(m)
        expect = (0 if assigned_here is RobotId.R0 else
                  1 if assigned_here is RobotId.R1 else None)
        got = 0 if allocation.v[0][col] else 1 if allocation.v[1][col] else None
        if expect != got:
            raise ValueError(f"gamma and v disagree on sub-task {m}")
    total_time = 0.0
    total_u = 0.0
    for m, rid in allocation.gamma.items():
        terms = scores[m][rid.index]
        if terms.u == NEG_INF:
            raise ValueError(f"sub-task {m} assigned to an infeasible robot")
        total_time += terms.tau
        total_u += terms.u
        for dep in dag.by_id(m).depends_on:
            if dep not in allocation.gamma:
                raise ValueError(f"sub-task {m} assigned before ancestor {dep}")
    if total_time > t_max + 1e-9:
        raise ValueError(f"total time {total_time:.2f} exceeds budget {t_max}")
    if not math.isclose(total_time, allocation.total_time, abs_tol=1e-9):
        raise ValueError("recorded total time is inconsistent")
    if not math.isclose(total_u, allocation.total_utility, abs_tol=1e-9):
        raise ValueError("recorded total utility is inconsistent")
    if sorted(allocation.order) != sorted(allocation.gamma):
        raise ValueError("order must cover exactly the assigned sub-tasks")
    seen: set[int] = set()
    for tid in allocation.order:
        if not dag.by_id(tid).depends_on <= seen | (dag.ancestors(tid) - set(allocation.order)):
            if not dag.by_id(tid).depends_on <= seen:
                raise ValueError("order violates precedence")
        seen.add(tid)
