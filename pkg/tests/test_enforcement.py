"""Enforcement agents: observation, suspicion, pursuit, reformation, report."""

import copy
import math
import random

import pytest

from sentinel.config import apply_overrides, default_config
from sentinel.dynamics import compliant_policy, step
from sentinel.enforcement import (
    PURSUIT_ANGLE_TOLERANCE_DEG,
    attempt_reformation,
    ea_policy,
    observe,
    report,
    update_suspicion,
)
from sentinel.world import (
    Drone,
    DroneRole,
    EAMode,
    Enemy,
    EnforcementAgentState,
    Outcome,
    Point2,
    WorldState,
    distance,
    initial_world,
)


def make_world(drones=(), enemies=(), eas=(), step_index=1):
    return WorldState(
        step=step_index,
        drones=list(drones),
        enemies=list(enemies),
        eas=list(eas),
        next_enemy_id=max((e.id for e in enemies), default=-1) + 1,
    )


def drone_at(drone_id, x, y, role=DroneRole.COMPLIANT, last_move=(0.0, 0.0)):
    return Drone(
        id=drone_id,
        position=Point2(x, y),
        role=role,
        sector_index=drone_id,
        last_move=Point2(*last_move),
    )


def ea_at(ea_id, x, y, **kwargs):
    return EnforcementAgentState(id=ea_id, position=Point2(x, y), **kwargs)


# --- observation ---------------------------------------------------------------


def test_drones_outside_monitor_radius_are_unobserved():
    cfg = apply_overrides(default_config(), ea_monitor_radius=20.0)
    ea = ea_at(0, 60.0, 60.0)
    world = make_world(drones=[drone_at(0, 85.0, 60.0)], eas=[ea])
    assert observe(ea, world, cfg) == []


def test_observation_without_nearby_enemy_is_clean():
    cfg = default_config()
    ea = ea_at(0, 60.0, 60.0)
    world = make_world(
        drones=[drone_at(0, 70.0, 60.0)],
        enemies=[Enemy(0, Point2(0.0, 0.0), 0)],
        eas=[ea],
    )
    obs = observe(ea, world, cfg)
    assert len(obs) == 1
    assert obs[0].pursuing is False
    assert obs[0].nearest_enemy_distance is None or obs[0].nearest_enemy_distance > cfg.detection_radius


def test_patrolling_near_a_threat_is_a_violation_signature():
    # A drone whose last displacement was a patrol sweep, with an enemy six
    # units off: observed as not pursuing at exactly that distance.
    cfg = default_config()
    moving_up = (0.0, cfg.drone_speed)
    d = drone_at(3, 60.0, 60.0 + cfg.drone_speed, role=DroneRole.MALICIOUS, last_move=moving_up)
    world = make_world(
        drones=[d],
        enemies=[Enemy(0, Point2(66.0, 60.0), 0)],
        eas=[ea_at(0, 62.0, 62.0)],
    )
    obs = observe(world.eas[0], world, cfg)
    assert len(obs) == 1
    assert obs[0].drone_id == 3
    assert obs[0].nearest_enemy_distance == pytest.approx(6.0, abs=1e-12)
    assert obs[0].pursuing is False


def test_moving_onto_the_enemy_counts_as_pursuit():
    cfg = default_config()
    d = drone_at(1, 63.6, 60.0, last_move=(3.6, 0.0))
    world = make_world(
        drones=[d],
        enemies=[Enemy(0, Point2(68.0, 60.0), 0)],
        eas=[ea_at(0, 60.0, 60.0)],
    )
    obs = observe(world.eas[0], world, cfg)
    assert obs[0].pursuing is True
    assert obs[0].nearest_enemy_distance == pytest.approx(8.0, abs=1e-12)


def test_pursuit_cone_boundary_is_inclusive_at_the_tolerance():
    cfg = default_config()
    enemy = Enemy(0, Point2(68.0, 60.0), 0)
    for degrees, expected in ((PURSUIT_ANGLE_TOLERANCE_DEG, True), (PURSUIT_ANGLE_TOLERANCE_DEG + 1.0, False)):
        rad = math.radians(degrees)
        move = (2.0 * math.cos(rad), 2.0 * math.sin(rad))
        d = drone_at(0, 60.0 + move[0], 60.0 + move[1], last_move=move)
        world = make_world(drones=[d], enemies=[enemy], eas=[ea_at(0, 60.0, 60.0)])
        obs = observe(world.eas[0], world, cfg)
        assert obs[0].pursuing is expected


def test_standing_still_is_never_pursuit():
    cfg = default_config()
    d = drone_at(0, 60.0, 60.0, last_move=(0.0, 0.0))
    world = make_world(drones=[d], enemies=[Enemy(0, Point2(65.0, 60.0), 0)], eas=[ea_at(0, 60.0, 60.0)])
    assert observe(world.eas[0], world, cfg)[0].pursuing is False


def test_observation_judges_from_the_premove_vantage():
    # The drone moved three units away from the threat this step. Its new
    # position is out of detection range, but the move decision was made in
    # range, so the observation still counts it.
    cfg = default_config()
    d = drone_at(0, 63.0, 60.0, last_move=(3.0, 0.0))
    world = make_world(drones=[d], enemies=[Enemy(0, Point2(50.0, 60.0), 0)], eas=[ea_at(0, 60.0, 60.0)])
    obs = observe(world.eas[0], world, cfg)
    assert obs[0].nearest_enemy_distance == pytest.approx(10.0, abs=1e-12)
    assert obs[0].pursuing is False


def test_pursuing_is_false_beyond_detection_radius_randomized():
    cfg = default_config()
    rng = random.Random(81)
    ea = ea_at(0, 60.0, 60.0)
    for _ in range(200):
        move = (rng.uniform(-3.6, 3.6), rng.uniform(-3.6, 3.6))
        d = drone_at(0, 60.0 + move[0], 60.0 + move[1], last_move=move)
        enemy = Enemy(0, Point2(rng.uniform(0, 120), rng.uniform(0, 120)), 0)
        world = make_world(drones=[d], enemies=[enemy], eas=[ea])
        ob = observe(ea, world, cfg)[0]
        if ob.nearest_enemy_distance is None or ob.nearest_enemy_distance > cfg.detection_radius:
            assert ob.pursuing is False


def test_fresh_spawns_inside_monitor_radius_log_entry_points():
    cfg = default_config()
    ea = ea_at(0, 115.0, 60.0)
    world = make_world(
        enemies=[Enemy(0, Point2(115.0, 65.0), 15), Enemy(1, Point2(115.0, 55.0), 10)],
        eas=[ea],
        step_index=15,
    )
    observe(ea, world, cfg)
    entry = [e for e in world.events if e.kind == "entry_point"]
    assert len(entry) == 1
    assert entry[0].data == {"ea": 0, "enemy": 0}


# --- suspicion ----------------------------------------------------------------


def violating_world(ea, drone):
    # enemy parked right next to the drone, drone idle
    return make_world(drones=[drone], enemies=[Enemy(0, Point2(drone.position.x + 4.0, drone.position.y), 0)], eas=[ea])


def test_threshold_crossing_flips_the_agent_into_pursuit():
    cfg = default_config()
    ea = ea_at(0, 60.0, 60.0)
    d = drone_at(2, 65.0, 60.0, role=DroneRole.MALICIOUS)
    world = violating_world(ea, d)
    for i in range(cfg.suspicion_threshold):
        world.step = i + 1
        update_suspicion(ea, observe(ea, world, cfg), world, cfg)
    assert ea.suspicion[2] == cfg.suspicion_threshold
    assert ea.mode is EAMode.PURSUE
    assert ea.pursue_target == 2
    assert ea.pursue_since == cfg.suspicion_threshold
    raised = [e for e in world.events if e.kind == "suspicion_raised"]
    assert len(raised) == 1
    assert raised[0].data["drone"] == 2


def test_one_clean_observation_resets_the_count():
    cfg = default_config()
    ea = ea_at(0, 60.0, 60.0)
    d = drone_at(2, 65.0, 60.0)
    world = violating_world(ea, d)
    for i in range(cfg.suspicion_threshold - 1):
        world.step = i + 1
        update_suspicion(ea, observe(ea, world, cfg), world, cfg)
    assert ea.suspicion[2] == cfg.suspicion_threshold - 1
    # now the drone lunges straight at the threat
    d.last_move = Point2(2.0, 0.0)
    world.step += 1
    update_suspicion(ea, observe(ea, world, cfg), world, cfg)
    assert ea.suspicion[2] == 0
    assert ea.mode is EAMode.PATROL


def test_unobserved_drones_keep_their_suspicion():
    cfg = apply_overrides(default_config(), ea_monitor_radius=20.0)
    ea = ea_at(0, 60.0, 60.0, suspicion={5: 3})
    far_drone = drone_at(5, 110.0, 60.0)
    world = make_world(drones=[far_drone], eas=[ea])
    update_suspicion(ea, observe(ea, world, cfg), world, cfg)
    assert ea.suspicion[5] == 3


def test_simultaneous_threshold_crossings_pick_the_lowest_id():
    cfg = apply_overrides(default_config(), suspicion_threshold=1)
    ea = ea_at(0, 60.0, 60.0)
    a = drone_at(4, 64.0, 60.0)
    b = drone_at(1, 56.0, 60.0)
    world = make_world(
        drones=[a, b],
        enemies=[Enemy(0, Point2(60.0, 63.0), 0)],
        eas=[ea],
    )
    update_suspicion(ea, observe(ea, world, cfg), world, cfg)
    assert ea.mode is EAMode.PURSUE
    assert ea.pursue_target == 1


def test_compliant_behavior_never_accumulates_suspicion():
    # Two agents watching an all-compliant fleet for 200 steps: every count
    # stays at zero, pursuit never engages.
    cfg = apply_overrides(default_config(), num_malicious=0, num_eas=2, time_limit_steps=200)
    rng = random.Random(12)
    world = initial_world(cfg, rng)
    while world.outcome is None:
        step(world, cfg, rng)
        for agent in world.eas:
            assert agent.mode is EAMode.PATROL
            assert all(count == 0 for count in agent.suspicion.values())
    assert world.outcome is Outcome.SUCCESS


# --- movement ---------------------------------------------------------------


def test_patrol_orbit_keeps_its_radius():
    cfg = default_config()
    center = Point2(*cfg.center)
    ea = ea_at(0, center.x + cfg.ea_orbit_radius, center.y)
    world = make_world(eas=[ea])
    for _ in range(100):
        v = ea_policy(ea, world, cfg)
        ea.position = Point2(ea.position.x + v.x, ea.position.y + v.y)
        assert abs(distance(ea.position, center) - cfg.ea_orbit_radius) < 1e-6


def test_displaced_agent_returns_to_its_orbit():
    cfg = default_config()
    center = Point2(*cfg.center)
    ea = ea_at(0, 100.0, 100.0)
    world = make_world(eas=[ea])
    for _ in range(40):
        v = ea_policy(ea, world, cfg)
        ea.position = Point2(ea.position.x + v.x, ea.position.y + v.y)
    assert abs(distance(ea.position, center) - cfg.ea_orbit_radius) < 1e-6


def test_pursuit_runs_straight_at_the_suspect():
    cfg = default_config()
    ea = ea_at(0, 60.0, 20.0, mode=EAMode.PURSUE, pursue_target=3)
    suspect = drone_at(3, 60.0, 90.0, role=DroneRole.MALICIOUS)
    world = make_world(drones=[suspect], eas=[ea])
    v = ea_policy(ea, world, cfg)
    assert v.x == pytest.approx(0.0, abs=1e-12)
    assert v.y == pytest.approx(cfg.drone_speed, abs=1e-12)


def test_pursuit_parks_once_within_reform_range():
    cfg = default_config()
    ea = ea_at(0, 60.0, 60.0, mode=EAMode.PURSUE, pursue_target=3)
    suspect = drone_at(3, 60.0, 69.0, role=DroneRole.MALICIOUS)
    world = make_world(drones=[suspect], eas=[ea])
    assert ea_policy(ea, world, cfg) == Point2(0.0, 0.0)


# --- reformation ----------------------------------------------------------------


def pursuit_scene(gap, role=DroneRole.MALICIOUS):
    cfg = default_config()
    suspect = drone_at(2, 60.0 + gap, 60.0, role=role)
    ea = ea_at(0, 60.0, 60.0, mode=EAMode.PURSUE, pursue_target=2, pursue_since=1, suspicion={2: 5})
    world = make_world(drones=[suspect], eas=[ea], step_index=9)
    return cfg, world, ea, suspect


def test_reformation_inside_reform_radius():
    cfg, world, ea, suspect = pursuit_scene(9.0)
    attempt_reformation(ea, world, cfg)
    assert suspect.role is DroneRole.REFORMED
    assert ea.mode is EAMode.PATROL
    assert ea.pursue_target is None
    assert 2 not in ea.suspicion
    events = [e for e in world.events if e.kind == "reformation"]
    assert len(events) == 1
    assert events[0].data == {"ea": 0, "drone": 2}


def test_no_reformation_out_of_reach():
    cfg, world, ea, suspect = pursuit_scene(11.0)
    attempt_reformation(ea, world, cfg)
    assert suspect.role is DroneRole.MALICIOUS
    assert ea.mode is EAMode.PURSUE
    assert world.events == []


def test_racing_agents_yield_exactly_one_reformation():
    cfg = default_config()
    suspect = drone_at(2, 60.0, 60.0, role=DroneRole.MALICIOUS)
    first = ea_at(0, 55.0, 60.0, mode=EAMode.PURSUE, pursue_target=2, pursue_since=1, suspicion={2: 5})
    second = ea_at(1, 65.0, 60.0, mode=EAMode.PURSUE, pursue_target=2, pursue_since=1, suspicion={2: 6})
    world = make_world(drones=[suspect], eas=[first, second], step_index=9)
    attempt_reformation(first, world, cfg)
    attempt_reformation(second, world, cfg)
    assert suspect.role is DroneRole.REFORMED
    assert sum(1 for e in world.events if e.kind == "reformation") == 1
    for agent in (first, second):
        assert agent.mode is EAMode.PATROL
        assert agent.pursue_target is None
        assert 2 not in agent.suspicion


def test_catching_a_compliant_suspect_stands_down_without_event():
    cfg, world, ea, suspect = pursuit_scene(9.0, role=DroneRole.COMPLIANT)
    attempt_reformation(ea, world, cfg)
    assert suspect.role is DroneRole.COMPLIANT
    assert ea.mode is EAMode.PATROL
    assert ea.pursue_target is None
    assert 2 not in ea.suspicion
    assert world.events == []


def test_reformed_drone_runs_the_compliant_policy_afterwards():
    # Replay an episode that contains a reformation and recompute the
    # reformed drone's moves independently from each pre-step snapshot.
    cfg = apply_overrides(default_config(), num_eas=2)
    reforming_seed = None
    for s in range(1, 31):
        rng = random.Random(s)
        world = initial_world(cfg, rng)
        while world.outcome is None:
            step(world, cfg, rng)
        if any(e.kind == "reformation" for e in world.events):
            reforming_seed = s
            break
    assert reforming_seed is not None

    rng = random.Random(reforming_seed)
    world = initial_world(cfg, rng)
    checked = 0
    while world.outcome is None:
        before = copy.deepcopy(world)
        step(world, cfg, rng)
        for probe, actual in zip(before.drones, world.drones):
            if probe.role is DroneRole.REFORMED:
                expected = compliant_policy(probe, before, cfg)
                assert actual.last_move == expected
                checked += 1
    assert checked > 0


# --- reporting ----------------------------------------------------------------


def test_fresh_world_reports_nothing():
    cfg = apply_overrides(default_config(), num_eas=1)
    world = initial_world(cfg, 3)
    rep = report(world.eas[0], world, cfg)
    assert rep.reformed_so_far == 0
    assert rep.failsafe_triggered is False
    assert rep.live_enemies == 0
    assert rep.suspicion_snapshot == {}


def test_report_counts_reformations():
    cfg, world, ea, _ = pursuit_scene(9.0)
    attempt_reformation(ea, world, cfg)
    rep = report(ea, world, cfg)
    assert rep.reformed_so_far == 1


def test_failsafe_stays_silent_when_disabled():
    cfg = default_config()
    ea = ea_at(0, 0.0, 0.0, mode=EAMode.PURSUE, pursue_target=1, pursue_since=0)
    drone = drone_at(1, 90.0, 60.0, role=DroneRole.MALICIOUS)
    world = make_world(drones=[drone], eas=[ea], step_index=1000)
    assert report(ea, world, cfg).failsafe_triggered is False


def test_failsafe_window_is_four_thresholds_exclusive():
    cfg = apply_overrides(default_config(), failsafe_enabled=True)
    window = 4 * cfg.suspicion_threshold
    ea = ea_at(0, 0.0, 0.0, mode=EAMode.PURSUE, pursue_target=1, pursue_since=10)
    drone = drone_at(1, 90.0, 60.0, role=DroneRole.MALICIOUS)
    world = make_world(drones=[drone], eas=[ea], step_index=10 + window)
    assert report(ea, world, cfg).failsafe_triggered is False
    world.step += 1
    assert report(ea, world, cfg).failsafe_triggered is True


def test_failsafe_terminates_the_episode_through_step():
    cfg = apply_overrides(
        default_config(),
        num_eas=1,
        failsafe_enabled=True,
        suspicion_threshold=1,
        first_spawn_step=5000,
    )
    rng = random.Random(2)
    world = initial_world(cfg, rng)
    ea = world.eas[0]
    ea.position = Point2(0.0, 0.0)
    ea.mode = EAMode.PURSUE
    ea.pursue_target = next(d.id for d in world.drones if d.role is DroneRole.MALICIOUS)
    ea.pursue_since = 0
    while world.outcome is None:
        step(world, cfg, rng)
    assert world.outcome is Outcome.FAIL
    assert world.step == 4 * cfg.suspicion_threshold + 1
    assert any(e.kind == "failsafe" for e in world.events)


def test_pursue_targets_are_always_malicious_in_integrated_runs():
    cfg = apply_overrides(default_config(), num_eas=2, time_limit_steps=400)
    rng = random.Random(19)
    world = initial_world(cfg, rng)
    while world.outcome is None:
        step(world, cfg, rng)
        roles = {d.id: d.role for d in world.drones}
        for agent in world.eas:
            if agent.mode is EAMode.PURSUE:
                assert roles[agent.pursue_target] is DroneRole.MALICIOUS
