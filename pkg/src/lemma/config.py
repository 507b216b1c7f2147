"""World configuration: versioned key-value file parsed once at import.

All geometric and timing constants live in ``data/world.cfg`` so that a
dataset can record exactly which world it was generated against (the file
hash goes into ``dataset.meta``).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import WorldConfigError

SUPPORTED_VERSION = 1


@dataclass(frozen=True)
class WorldConfig:
    version: int
    table_x_min: float
    table_x_max: float
    table_y_min: float
    table_y_max: float
    base0: tuple[float, float]
    base1: tuple[float, float]
    reach_ur5: float
    reach_ur10: float
    cube_side: float
    cube_height_mm: int
    pad_radius: float
    pad_height_mm: int
    tool_long_arm: float
    tool_short_arm: float
    tool_arm_width: float
    tool_height_mm: int
    speed: float
    grasp_s: float
    release_s: float
    snap_radius: float
    align_tolerance: float
    tool_standoff: float
    max_push: float
    placement_margin: float
    exclusive_margin: float
    disk_inset: float
    shared_clearance: float
    max_attempts: int
    px_per_m: int
    raster_width: int
    raster_height: int
    t_max: float
    max_decisions: int
    sha256: str


def _parse_pairs(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise WorldConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        pairs[key.strip()] = value.strip()
    return pairs


def load_world_config(path: str | Path | None = None) -> WorldConfig:
    """Parse a world.cfg file; defaults to the packaged one."""
    if path is None:
        raw = resources.files("lemma.data").joinpath("world.cfg").read_bytes()
    else:
        try:
            raw = Path(path).read_bytes()
        except OSError as exc:
            raise WorldConfigError(f"cannot read world config: {exc}") from exc
    pairs = _parse_pairs(raw.decode("utf-8"))

    def f(key: str) -> float:
        try:
            return float(pairs[key])
        except KeyError:
            raise WorldConfigError(f"missing key {key!r}") from None
        except ValueError:
            raise WorldConfigError(f"key {key!r} is not a number: {pairs[key]!r}") from None

    def i(key: str) -> int:
        val = f(key)
        if val != int(val):
            raise WorldConfigError(f"key {key!r} must be an integer, got {val}")
        return int(val)

    def xy(key: str) -> tuple[float, float]:
        try:
            x, y = pairs[key].split()
            return (float(x), float(y))
        except (KeyError, ValueError):
            raise WorldConfigError(f"key {key!r} must be two numbers") from None

    version = i("version")
    if version != SUPPORTED_VERSION:
        raise WorldConfigError(f"unsupported world config version {version}")

    return WorldConfig(
        version=version,
        table_x_min=f("table.x_min"),
        table_x_max=f("table.x_max"),
        table_y_min=f("table.y_min"),
        table_y_max=f("table.y_max"),
        base0=xy("robot.base0"),
        base1=xy("robot.base1"),
        reach_ur5=f("reach.ur5"),
        reach_ur10=f("reach.ur10"),
        cube_side=f("cube.side"),
        cube_height_mm=i("cube.height_mm"),
        pad_radius=f("pad.radius"),
        pad_height_mm=i("pad.height_mm"),
        tool_long_arm=f("tool.long_arm"),
        tool_short_arm=f("tool.short_arm"),
        tool_arm_width=f("tool.arm_width"),
        tool_height_mm=i("tool.height_mm"),
        speed=f("sim.speed"),
        grasp_s=f("sim.grasp_s"),
        release_s=f("sim.release_s"),
        snap_radius=f("sim.snap_radius"),
        align_tolerance=f("sim.align_tolerance"),
        tool_standoff=f("sim.tool_standoff"),
        max_push=f("sim.max_push"),
        placement_margin=f("gen.placement_margin"),
        exclusive_margin=f("gen.exclusive_margin"),
        disk_inset=f("gen.disk_inset"),
        shared_clearance=f("gen.shared_clearance"),
        max_attempts=i("gen.max_attempts"),
        px_per_m=i("raster.px_per_m"),
        raster_width=i("raster.width"),
        raster_height=i("raster.height"),
        t_max=f("episode.t_max"),
        max_decisions=i("episode.max_decisions"),
        sha256=hashlib.sha256(raw).hexdigest(),
    )


WORLD = load_world_config()
