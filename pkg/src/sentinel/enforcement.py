"""Enforcement agents: observe drones, accumulate suspicion, pursue, reform.

An agent cannot read a drone's role. It infers intent from proximity: a drone
that sits near a detectable threat and keeps not moving toward it is accused
after suspicion_threshold consecutive violations, chased, and reformed on
contact. One clean observation resets the count, which debounces drones that
are merely mid-turn.
"""

import math
from dataclasses import dataclass, field

from .config import SimConfig
from .world import (
    DroneRole,
    EAMode,
    EnforcementAgentState,
    Event,
    Point2,
    WorldState,
    distance,
    move_toward,
)
from .dynamics import nearest_enemy

# A displacement counts as pursuit when it points at the nearest in-range
# threat within this cone.
PURSUIT_ANGLE_TOLERANCE_DEG = 15.0

_ON_CIRCLE_EPS = 1e-9


@dataclass
class Observation:
    """One judged drone: how close its nearest threat is, and whether the
    drone's last displacement counts as pursuing that threat."""

    drone_id: int
    nearest_enemy_distance: float | None
    pursuing: bool


@dataclass
class StatusReport:
    step: int
    suspicion_snapshot: dict[int, int]
    reformed_so_far: int
    live_enemies: int
    failsafe_triggered: bool


def _points_toward(displacement: Point2, origin: Point2, target: Point2) -> bool:
    dx, dy = displacement
    tx, ty = target.x - origin.x, target.y - origin.y
    d_norm = math.hypot(dx, dy)
    t_norm = math.hypot(tx, ty)
    if d_norm == 0.0 or t_norm == 0.0:
        return False
    cos_angle = (dx * tx + dy * ty) / (d_norm * t_norm)
    return cos_angle >= math.cos(math.radians(PURSUIT_ANGLE_TOLERANCE_DEG)) - 1e-12


def observe(ea: EnforcementAgentState, world: WorldState, cfg: SimConfig) -> list[Observation]:
    """Observations for every drone within monitor range of the agent.

    Proximity and the pursuit cone are judged from the position the drone
    moved from this step, i.e. against what the drone could see when it
    chose its move. Fresh spawns inside monitor range are logged as
    entry-point events.
    """
    for e in world.enemies:
        if e.spawned_at == world.step and distance(ea.position, e.position) <= cfg.ea_monitor_radius:
            world.events.append(Event(step=world.step, kind="entry_point", data={"ea": ea.id, "enemy": e.id}))

    observations = []
    for drone in world.drones:
        if distance(ea.position, drone.position) > cfg.ea_monitor_radius:
            continue
        vantage = Point2(drone.position.x - drone.last_move.x, drone.position.y - drone.last_move.y)
        enemy = nearest_enemy(vantage, world.enemies)
        if enemy is None:
            observations.append(Observation(drone_id=drone.id, nearest_enemy_distance=None, pursuing=False))
            continue
        gap = distance(vantage, enemy.position)
        pursuing = gap <= cfg.detection_radius and _points_toward(drone.last_move, vantage, enemy.position)
        observations.append(Observation(drone_id=drone.id, nearest_enemy_distance=gap, pursuing=pursuing))
    return observations


def update_suspicion(
    ea: EnforcementAgentState,
    observations: list[Observation],
    world: WorldState,
    cfg: SimConfig,
) -> EnforcementAgentState:
    """Fold one round of observations into the agent's suspicion map.

    A violation (threat in detection range, drone not pursuing it) adds one;
    any clean observation resets to zero; unobserved drones keep their
    counts. Crossing suspicion_threshold flips the agent into pursuit of the
    lowest-id offender and logs a suspicion-raised event.
    """
    for ob in observations:
        violating = (
            ob.nearest_enemy_distance is not None
            and ob.nearest_enemy_distance <= cfg.detection_radius
            and not ob.pursuing
        )
        if violating:
            ea.suspicion[ob.drone_id] = ea.suspicion.get(ob.drone_id, 0) + 1
        else:
            ea.suspicion[ob.drone_id] = 0

    hot = sorted(d for d, count in ea.suspicion.items() if count >= cfg.suspicion_threshold)
    if hot:
        target = hot[0]
        if ea.mode is not EAMode.PURSUE or ea.pursue_target != target:
            ea.mode = EAMode.PURSUE
            ea.pursue_target = target
            ea.pursue_since = world.step
            world.events.append(
                Event(
                    step=world.step,
                    kind="suspicion_raised",
                    data={"ea": ea.id, "drone": target, "count": ea.suspicion[target]},
                )
            )
    return ea


def _orbit_move(ea: EnforcementAgentState, cfg: SimConfig) -> Point2:
    # Return to the orbit circle if displaced, else advance counter-clockwise
    # along it. Recomputing from the circle equation keeps the radius exact.
    cx, cy = cfg.center
    center = Point2(cx, cy)
    radius = cfg.ea_orbit_radius
    r = distance(ea.position, center)
    angle = 0.0 if r == 0.0 else math.atan2(ea.position.y - cy, ea.position.x - cx)
    if abs(r - radius) > _ON_CIRCLE_EPS:
        target = Point2(cx + radius * math.cos(angle), cy + radius * math.sin(angle))
        return move_toward(ea.position, target, cfg.drone_speed)
    angle += cfg.drone_speed / radius
    return Point2(cx + radius * math.cos(angle), cy + radius * math.sin(angle))


def _drone_by_id(world: WorldState, drone_id: int):
    return next(d for d in world.drones if d.id == drone_id)


def ea_policy(ea: EnforcementAgentState, world: WorldState, cfg: SimConfig) -> Point2:
    """Velocity for the agent: orbital patrol, or a straight chase that
    parks once the suspect is within reform range."""
    if ea.mode is EAMode.PURSUE:
        suspect = _drone_by_id(world, ea.pursue_target)
        if distance(ea.position, suspect.position) <= cfg.reform_radius:
            return Point2(0.0, 0.0)
        new_pos = move_toward(ea.position, suspect.position, cfg.drone_speed)
    else:
        new_pos = _orbit_move(ea, cfg)
    return Point2(new_pos.x - ea.position.x, new_pos.y - ea.position.y)


def attempt_reformation(
    ea: EnforcementAgentState, world: WorldState, cfg: SimConfig
) -> tuple[WorldState, EnforcementAgentState]:
    """Reform the pursued suspect if it is within reach.

    Reformation is terminal and idempotent: the drone is cleared from every
    agent's suspicion map and every agent chasing it goes back to patrol, so
    two agents arriving the same step yield exactly one reformation event.
    """
    if ea.mode is not EAMode.PURSUE:
        return world, ea
    suspect = _drone_by_id(world, ea.pursue_target)
    if distance(ea.position, suspect.position) > cfg.reform_radius:
        return world, ea

    if suspect.role is DroneRole.MALICIOUS:
        suspect.role = DroneRole.REFORMED
        suspect.target_enemy = None
        for agent in world.eas:
            agent.suspicion.pop(suspect.id, None)
            if agent.mode is EAMode.PURSUE and agent.pursue_target == suspect.id:
                agent.mode = EAMode.PATROL
                agent.pursue_target = None
                agent.pursue_since = None
        world.events.append(Event(step=world.step, kind="reformation", data={"ea": ea.id, "drone": suspect.id}))
    else:
        # Raced by another agent, or a suspect that was never malicious:
        # stand down and demand fresh evidence.
        ea.suspicion.pop(suspect.id, None)
        ea.mode = EAMode.PATROL
        ea.pursue_target = None
        ea.pursue_since = None
    return world, ea


def report(ea: EnforcementAgentState, world: WorldState, cfg: SimConfig) -> StatusReport:
    """Snapshot of the agent's view, including the stuck-pursuit failsafe."""
    triggered = bool(
        cfg.failsafe_enabled
        and ea.mode is EAMode.PURSUE
        and ea.pursue_since is not None
        and world.step - ea.pursue_since > 4 * cfg.suspicion_threshold
    )
    return StatusReport(
        step=world.step,
        suspicion_snapshot=dict(ea.suspicion),
        reformed_so_far=sum(1 for d in world.drones if d.role is DroneRole.REFORMED),
        live_enemies=len(world.enemies),
        failsafe_triggered=triggered,
    )


def run_enforcement_phase(world: WorldState, cfg: SimConfig) -> bool:
    """One tick of every agent, in id order: observe, judge, move, reform.

    Returns True when the failsafe demands termination.
    """
    from .world import clamp_to_map

    failsafe_fired = False
    for ea in world.eas:
        observations = observe(ea, world, cfg)
        update_suspicion(ea, observations, world, cfg)
        v = ea_policy(ea, world, cfg)
        ea.position = clamp_to_map(Point2(ea.position.x + v.x, ea.position.y + v.y), cfg)
        attempt_reformation(ea, world, cfg)
        if cfg.failsafe_enabled and report(ea, world, cfg).failsafe_triggered:
            world.events.append(Event(step=world.step, kind="failsafe", data={"ea": ea.id, "drone": ea.pursue_target}))
            failsafe_fired = True
    return failsafe_fired
