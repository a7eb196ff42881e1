"""World state: drones, adversaries, enforcement agents, and flat 2D geometry."""

import math
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

from .config import SimConfig


class Point2(NamedTuple):
    x: float
    y: float


def distance(a: Point2, b: Point2) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def clamp_to_map(p: Point2, cfg: SimConfig) -> Point2:
    # Positions saturate at the walls, they never wrap.
    return Point2(min(max(p.x, 0.0), cfg.map_size), min(max(p.y, 0.0), cfg.map_size))


def move_toward(p: Point2, target: Point2, max_step: float) -> Point2:
    """Step from p toward target, at most max_step, never overshooting."""
    gap = distance(p, target)
    if gap <= max_step or gap == 0.0:
        return target
    f = max_step / gap
    return Point2(p.x + (target.x - p.x) * f, p.y + (target.y - p.y) * f)


class DroneRole(Enum):
    COMPLIANT = "compliant"
    MALICIOUS = "malicious"
    REFORMED = "reformed"


class EAMode(Enum):
    PATROL = "patrol"
    PURSUE = "pursue"


class Outcome(Enum):
    SUCCESS = "success"
    FAIL = "fail"


@dataclass
class Drone:
    """A patrol drone. patrol_dir is +1 counter-clockwise, -1 clockwise."""

    id: int
    position: Point2
    role: DroneRole
    sector_index: int
    target_enemy: int | None = None
    patrol_dir: int = 1
    last_move: Point2 = Point2(0.0, 0.0)


@dataclass
class Enemy:
    id: int
    position: Point2
    spawned_at: int


@dataclass
class EnforcementAgentState:
    """A supervisory agent. suspicion maps drone id to consecutive violations."""

    id: int
    position: Point2
    suspicion: dict[int, int] = field(default_factory=dict)
    mode: EAMode = EAMode.PATROL
    pursue_target: int | None = None
    pursue_since: int | None = None


@dataclass
class Event:
    step: int
    kind: str
    data: dict[str, int] = field(default_factory=dict)


@dataclass
class WorldState:
    step: int
    drones: list[Drone]
    enemies: list[Enemy]
    eas: list[EnforcementAgentState]
    enemies_destroyed: int = 0
    events: list[Event] = field(default_factory=list)
    outcome: Outcome | None = None
    next_enemy_id: int = 0


def initial_world(cfg: SimConfig, seed) -> WorldState:
    """Deterministic symmetric start: drones and enforcement agents evenly
    spaced on their circles, roles drawn from the seeded generator.

    ``seed`` is an int, or an already-constructed random.Random when the
    caller wants the same stream to keep driving the episode afterwards.
    The role draw is the only randomness consumed here.
    """
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    cx, cy = cfg.center
    n = cfg.total_drones
    malicious = set(rng.sample(range(n), cfg.num_malicious))
    drones = []
    for i in range(n):
        angle = 2.0 * math.pi * i / n
        pos = Point2(cx + cfg.patrol_radius * math.cos(angle), cy + cfg.patrol_radius * math.sin(angle))
        role = DroneRole.MALICIOUS if i in malicious else DroneRole.COMPLIANT
        drones.append(Drone(id=i, position=pos, role=role, sector_index=i))
    eas = []
    for j in range(cfg.num_eas):
        angle = 2.0 * math.pi * j / cfg.num_eas
        pos = Point2(cx + cfg.ea_orbit_radius * math.cos(angle), cy + cfg.ea_orbit_radius * math.sin(angle))
        eas.append(EnforcementAgentState(id=j, position=pos))
    return WorldState(step=0, drones=drones, enemies=[], eas=eas)


def breach_occurred(world: WorldState, cfg: SimConfig) -> bool:
    """True iff any live enemy is inside the protected zone."""
    c = Point2(*cfg.center)
    return any(distance(e.position, c) <= cfg.center_radius for e in world.enemies)


# --- debug snapshots ---------------------------------------------------------
# Line-oriented text, one entity per line. A debugging aid and the input of
# the render CLI, not a stability contract.


def write_snapshot(world: WorldState) -> str:
    lines = [f"step {world.step}", f"destroyed {world.enemies_destroyed}"]
    if world.outcome is not None:
        lines.append(f"outcome {world.outcome.value}")
    for d in world.drones:
        lines.append(f"drone {d.id} {d.position.x!r} {d.position.y!r} {d.role.value}")
    for e in world.enemies:
        lines.append(f"enemy {e.id} {e.position.x!r} {e.position.y!r} -")
    for ea in world.eas:
        lines.append(f"ea {ea.id} {ea.position.x!r} {ea.position.y!r} {ea.mode.value}")
    return "\n".join(lines) + "\n"


class SnapshotError(ValueError):
    pass


def read_snapshot(text: str) -> WorldState:
    """Rebuild the renderable part of a world from snapshot text."""
    world = WorldState(step=0, drones=[], enemies=[], eas=[])
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        parts = stripped.split()
        try:
            head = parts[0]
            if head == "step":
                world.step = int(parts[1])
            elif head == "destroyed":
                world.enemies_destroyed = int(parts[1])
            elif head == "outcome":
                world.outcome = Outcome(parts[1])
            elif head == "drone":
                _, ident, x, y, role = parts
                world.drones.append(
                    Drone(
                        id=int(ident),
                        position=Point2(float(x), float(y)),
                        role=DroneRole(role),
                        sector_index=int(ident),
                    )
                )
            elif head == "enemy":
                _, ident, x, y, _mark = parts
                world.enemies.append(Enemy(id=int(ident), position=Point2(float(x), float(y)), spawned_at=0))
                world.next_enemy_id = max(world.next_enemy_id, int(ident) + 1)
            elif head == "ea":
                _, ident, x, y, mode = parts
                world.eas.append(
                    EnforcementAgentState(id=int(ident), position=Point2(float(x), float(y)), mode=EAMode(mode))
                )
            else:
                raise ValueError(f"unknown entity kind {head!r}")
        except (ValueError, IndexError) as exc:
            raise SnapshotError(f"line {line_no}: {exc}") from None
    return world
