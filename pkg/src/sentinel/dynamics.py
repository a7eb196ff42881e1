"""Per-step behavior: spawning, drone and enemy policies, interception.

step() applies one tick in a fixed sub-step order so that episodes are pure
functions of (config, seed): spawn, drone motion, enforcement, enemy motion,
interception, termination checks. All sub-steps of a call are stamped with
the step index the call advances the world to.
"""

import math
import random
from dataclasses import dataclass

from .config import SimConfig
from .world import (
    Drone,
    DroneRole,
    EAMode,
    Enemy,
    Event,
    Outcome,
    Point2,
    WorldState,
    breach_occurred,
    clamp_to_map,
    distance,
    move_toward,
)

# Tolerance for "sitting exactly on the patrol circle". Arc advancement
# recomputes positions from the circle equation, so drift stays below this.
_ON_CIRCLE_EPS = 1e-9


class SteppingTerminatedEpisode(RuntimeError):
    """Raised when step() is called on a world whose outcome is already set."""


@dataclass
class StepOutcome:
    world: WorldState
    terminated: Outcome | None


def _wrap_angle(a: float) -> float:
    """Fold an angle into [-pi, pi)."""
    return math.atan2(math.sin(a), math.cos(a))


def _fold_into_sector(offset: float, half_width: float, direction: int) -> tuple[float, int]:
    # Reflect the angular offset back into [-half_width, half_width],
    # flipping the sweep direction once per bounce.
    while offset > half_width or offset < -half_width:
        if offset > half_width:
            offset = 2.0 * half_width - offset
        else:
            offset = -2.0 * half_width - offset
        direction = -direction
    return offset, direction


def _sector_patrol_move(drone: Drone, cfg: SimConfig) -> Point2:
    """Target position for one patrol step along the drone's own sector arc.

    Off the arc (after a pursuit) the drone heads straight back to the
    nearest point of its arc; on it, it sweeps at drone_speed, reversing at
    the sector boundaries. Updates drone.patrol_dir as a side effect.
    """
    cx, cy = cfg.center
    center = Point2(cx, cy)
    radius = cfg.patrol_radius
    half = math.pi / cfg.total_drones
    sector_center = 2.0 * math.pi * drone.sector_index / cfg.total_drones

    r = distance(drone.position, center)
    if r == 0.0:
        offset = 0.0
    else:
        angle = math.atan2(drone.position.y - cy, drone.position.x - cx)
        offset = _wrap_angle(angle - sector_center)

    on_circle = abs(r - radius) <= _ON_CIRCLE_EPS
    in_sector = abs(offset) <= half + 1e-12
    if not (on_circle and in_sector):
        clamped = min(max(offset, -half), half)
        target = Point2(
            cx + radius * math.cos(sector_center + clamped),
            cy + radius * math.sin(sector_center + clamped),
        )
        return move_toward(drone.position, target, cfg.drone_speed)

    step_angle = cfg.drone_speed / radius
    offset, drone.patrol_dir = _fold_into_sector(offset + drone.patrol_dir * step_angle, half, drone.patrol_dir)
    return Point2(
        cx + radius * math.cos(sector_center + offset),
        cy + radius * math.sin(sector_center + offset),
    )


def nearest_enemy(position: Point2, enemies: list[Enemy]) -> Enemy | None:
    """Closest live enemy; ties broken by lowest enemy id."""
    best = None
    best_key = None
    for e in enemies:
        key = (distance(position, e.position), e.id)
        if best_key is None or key < best_key:
            best, best_key = e, key
    return best


def compliant_policy(drone: Drone, world: WorldState, cfg: SimConfig) -> Point2:
    """Velocity for a cooperating drone: intercept the nearest detected
    threat, otherwise sweep the own sector. Sets drone.target_enemy."""
    enemy = nearest_enemy(drone.position, world.enemies)
    if enemy is not None and distance(drone.position, enemy.position) <= cfg.detection_radius:
        drone.target_enemy = enemy.id
        new_pos = move_toward(drone.position, enemy.position, cfg.drone_speed)
    else:
        drone.target_enemy = None
        new_pos = _sector_patrol_move(drone, cfg)
    return Point2(new_pos.x - drone.position.x, new_pos.y - drone.position.y)


def malicious_policy(drone: Drone, world: WorldState, cfg: SimConfig) -> Point2:
    """Velocity for a defecting drone: patrol as usual, never pursue."""
    drone.target_enemy = None
    new_pos = _sector_patrol_move(drone, cfg)
    return Point2(new_pos.x - drone.position.x, new_pos.y - drone.position.y)


def enemy_policy(enemy: Enemy, cfg: SimConfig) -> Point2:
    """Velocity straight toward the protected center; zero once there."""
    cx, cy = cfg.center
    gap = distance(enemy.position, Point2(cx, cy))
    if gap == 0.0:
        return Point2(0.0, 0.0)
    f = cfg.enemy_speed / gap
    return Point2((cx - enemy.position.x) * f, (cy - enemy.position.y) * f)


def _perimeter_point(u: float, cfg: SimConfig) -> Point2:
    """Map u in [0, 4*map_size) onto the boundary, walking it edge by edge."""
    m = cfg.map_size
    side, along = divmod(u, m)
    side = int(side) % 4
    if side == 0:
        return Point2(along, 0.0)
    if side == 1:
        return Point2(m, along)
    if side == 2:
        return Point2(m - along, m)
    return Point2(0.0, m - along)


def spawn_enemies(world: WorldState, cfg: SimConfig, rng: random.Random) -> None:
    """Append one enemy on the boundary when the current step is a spawn step."""
    due = world.step >= cfg.first_spawn_step and (world.step - cfg.first_spawn_step) % cfg.enemy_spawn_period == 0
    if not due:
        return
    pos = _perimeter_point(rng.uniform(0.0, 4.0 * cfg.map_size), cfg)
    enemy = Enemy(id=world.next_enemy_id, position=pos, spawned_at=world.step)
    world.next_enemy_id += 1
    world.enemies.append(enemy)
    world.events.append(Event(step=world.step, kind="spawn", data={"enemy": enemy.id}))


def resolve_interceptions(world: WorldState, cfg: SimConfig) -> None:
    """Remove every enemy within intercept range of a non-malicious drone.

    Each removed enemy increments the destroyed counter exactly once and is
    credited to the nearest qualifying drone (lowest id on ties).
    """
    interceptors = [d for d in world.drones if d.role is not DroneRole.MALICIOUS]
    survivors = []
    for enemy in world.enemies:
        best = None
        best_key = None
        for d in interceptors:
            gap = distance(d.position, enemy.position)
            if gap <= cfg.intercept_radius:
                key = (gap, d.id)
                if best_key is None or key < best_key:
                    best, best_key = d, key
        if best is None:
            survivors.append(enemy)
        else:
            world.enemies_destroyed += 1
            world.events.append(
                Event(step=world.step, kind="interception", data={"enemy": enemy.id, "drone": best.id})
            )
    world.enemies = survivors


def step(world: WorldState, cfg: SimConfig, rng: random.Random) -> StepOutcome:
    """Advance the world one tick. Raises SteppingTerminatedEpisode if the
    episode already has an outcome."""
    # Import here to avoid a module cycle; enforcement drives drones through
    # the same world the policies above mutate.
    from .enforcement import run_enforcement_phase

    if world.outcome is not None:
        raise SteppingTerminatedEpisode(f"episode ended with {world.outcome.value} at step {world.step}")

    world.step += 1

    # 1) spawning
    spawn_enemies(world, cfg, rng)

    # 2) drone motion, all velocities from the pre-move snapshot
    velocities = []
    for d in world.drones:
        if d.role is DroneRole.MALICIOUS:
            velocities.append(malicious_policy(d, world, cfg))
        else:
            velocities.append(compliant_policy(d, world, cfg))
    for d, v in zip(world.drones, velocities):
        new_pos = clamp_to_map(Point2(d.position.x + v.x, d.position.y + v.y), cfg)
        d.last_move = Point2(new_pos.x - d.position.x, new_pos.y - d.position.y)
        d.position = new_pos

    # 3) enforcement agents observe, judge, move, and possibly reform
    failsafe_fired = run_enforcement_phase(world, cfg)
    if failsafe_fired:
        world.outcome = Outcome.FAIL
        return StepOutcome(world=world, terminated=world.outcome)

    # 4) enemy motion
    for e in world.enemies:
        v = enemy_policy(e, cfg)
        e.position = clamp_to_map(Point2(e.position.x + v.x, e.position.y + v.y), cfg)

    # 5) interception
    resolve_interceptions(world, cfg)

    # 6) termination: breach beats the time limit when both hold
    if breach_occurred(world, cfg):
        world.outcome = Outcome.FAIL
        world.events.append(Event(step=world.step, kind="breach", data={}))
    elif world.step >= cfg.time_limit_steps:
        world.outcome = Outcome.SUCCESS

    return StepOutcome(world=world, terminated=world.outcome)
