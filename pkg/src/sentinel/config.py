"""Simulation parameters, validation, and flat-file loading.

Every tunable of the simulation lives here as an ordinary config field so
that recalibration is a data change, never a code change. Distances are in
map units, durations in steps unless a field name says otherwise.
"""

import dataclasses
from dataclasses import dataclass
from pathlib import Path


class ConfigError(ValueError):
    """A configuration rejected by validation or file parsing.

    ``violations`` holds one short name per broken invariant, for example
    ``CenterRadiusExceedsPatrolRadius``. The exception message carries the
    human-readable details.
    """

    def __init__(self, violations):
        self.violations = [name for name, _ in violations]
        super().__init__("; ".join(f"{name}: {detail}" for name, detail in violations))


@dataclass(frozen=True)
class SimConfig:
    """Immutable bundle of every simulation knob.

    total_drones:        patrol drones placed on the patrol circle
    num_malicious:       drones that silently refuse to intercept
    num_eas:             supervisory enforcement agents
    map_size:            side length of the square map
    center:              protected zone center
    center_radius:       breach distance around the center
    enemy_spawn_period:  steps between adversary spawns
    first_spawn_step:    step of the first spawn
    detection_radius:    drone threat-detection range
    time_limit_steps:    episode length bound
    fps:                 steps per simulated second
    drone_speed:         drone and enforcement agent speed per step
    enemy_speed:         adversary speed per step
    intercept_radius:    kill range of a non-malicious drone
    patrol_radius:       radius of the drone patrol circle
    ea_orbit_radius:     radius of the enforcement agent patrol circle
    ea_monitor_radius:   enforcement agent observation range
    suspicion_threshold: consecutive violations before pursuit
    reform_radius:       reformation range of an enforcement agent
    failsafe_enabled:    terminate runs with an uncatchable suspect
    """

    total_drones: int = 6
    num_malicious: int = 1
    num_eas: int = 0
    map_size: float = 120.0
    center: tuple[float, float] = (60.0, 60.0)
    center_radius: float = 5.0
    enemy_spawn_period: int = 15
    first_spawn_step: int = 15
    detection_radius: float = 10.0
    time_limit_steps: int = 1200
    fps: int = 10
    drone_speed: float = 3.6
    enemy_speed: float = 1.0
    intercept_radius: float = 2.0
    patrol_radius: float = 30.0
    ea_orbit_radius: float = 15.0
    ea_monitor_radius: float = 25.0
    suspicion_threshold: int = 5
    reform_radius: float = 10.0
    failsafe_enabled: bool = False


def default_config() -> SimConfig:
    """The calibrated baseline configuration."""
    return SimConfig()


def validate(cfg: SimConfig) -> SimConfig:
    """Return ``cfg`` unchanged, or raise ConfigError naming every violation."""
    bad: list[tuple[str, str]] = []

    def check(ok: bool, name: str, detail: str) -> None:
        if not ok:
            bad.append((name, detail))

    cx, cy = cfg.center
    check(cfg.total_drones > 0, "TotalDronesNotPositive", f"total_drones={cfg.total_drones}")
    check(cfg.num_malicious >= 0, "MaliciousCountNegative", f"num_malicious={cfg.num_malicious}")
    check(
        cfg.num_malicious <= cfg.total_drones,
        "MaliciousExceedsTotalDrones",
        f"num_malicious={cfg.num_malicious} > total_drones={cfg.total_drones}",
    )
    check(cfg.num_eas >= 0, "EnforcementCountNegative", f"num_eas={cfg.num_eas}")
    check(
        cfg.num_eas <= cfg.total_drones,
        "EnforcementExceedsTotalDrones",
        f"num_eas={cfg.num_eas} > total_drones={cfg.total_drones}",
    )
    check(cfg.map_size > 0, "MapSizeNotPositive", f"map_size={cfg.map_size}")
    check(cfg.center_radius > 0, "CenterRadiusNotPositive", f"center_radius={cfg.center_radius}")
    check(
        cfg.center_radius < cfg.patrol_radius,
        "CenterRadiusExceedsPatrolRadius",
        f"center_radius={cfg.center_radius} not < patrol_radius={cfg.patrol_radius}",
    )
    check(
        cfg.patrol_radius < cfg.map_size / 2,
        "PatrolRadiusExceedsHalfMap",
        f"patrol_radius={cfg.patrol_radius} not < map_size/2={cfg.map_size / 2}",
    )
    check(cfg.intercept_radius > 0, "InterceptRadiusNotPositive", f"intercept_radius={cfg.intercept_radius}")
    check(
        cfg.detection_radius > cfg.intercept_radius,
        "DetectionRadiusNotAboveInterceptRadius",
        f"detection_radius={cfg.detection_radius} not > intercept_radius={cfg.intercept_radius}",
    )
    check(cfg.time_limit_steps > 0, "TimeLimitNotPositive", f"time_limit_steps={cfg.time_limit_steps}")
    check(cfg.enemy_spawn_period > 0, "SpawnPeriodNotPositive", f"enemy_spawn_period={cfg.enemy_spawn_period}")
    check(cfg.first_spawn_step >= 0, "FirstSpawnNegative", f"first_spawn_step={cfg.first_spawn_step}")
    check(
        0 < cx < cfg.map_size and 0 < cy < cfg.map_size,
        "CenterOutsideMap",
        f"center=({cx}, {cy}) not strictly inside a {cfg.map_size} map",
    )
    check(cfg.fps > 0, "FpsNotPositive", f"fps={cfg.fps}")
    check(cfg.drone_speed > 0, "DroneSpeedNotPositive", f"drone_speed={cfg.drone_speed}")
    check(cfg.enemy_speed > 0, "EnemySpeedNotPositive", f"enemy_speed={cfg.enemy_speed}")
    check(cfg.patrol_radius > 0, "PatrolRadiusNotPositive", f"patrol_radius={cfg.patrol_radius}")
    check(cfg.ea_orbit_radius > 0, "OrbitRadiusNotPositive", f"ea_orbit_radius={cfg.ea_orbit_radius}")
    check(cfg.ea_monitor_radius > 0, "MonitorRadiusNotPositive", f"ea_monitor_radius={cfg.ea_monitor_radius}")
    check(
        cfg.suspicion_threshold >= 1,
        "SuspicionThresholdNotPositive",
        f"suspicion_threshold={cfg.suspicion_threshold}",
    )
    check(cfg.reform_radius > 0, "ReformRadiusNotPositive", f"reform_radius={cfg.reform_radius}")

    if bad:
        raise ConfigError(bad)
    return cfg


def apply_overrides(cfg: SimConfig, **overrides) -> SimConfig:
    """A copy of ``cfg`` with the given fields replaced. Not validated."""
    return dataclasses.replace(cfg, **overrides)


# Field-name table used by the file loader. center is flattened to two keys.
_INT_KEYS = {
    "total_drones",
    "num_malicious",
    "num_eas",
    "enemy_spawn_period",
    "first_spawn_step",
    "time_limit_steps",
    "fps",
    "suspicion_threshold",
}
_FLOAT_KEYS = {
    "map_size",
    "center_radius",
    "detection_radius",
    "drone_speed",
    "enemy_speed",
    "intercept_radius",
    "patrol_radius",
    "ea_orbit_radius",
    "ea_monitor_radius",
    "reform_radius",
    "center_x",
    "center_y",
}
_BOOL_KEYS = {"failsafe_enabled"}

_TRUE_WORDS = {"true", "yes", "on", "1"}
_FALSE_WORDS = {"false", "no", "off", "0"}


def _parse_value(key: str, raw: str, line_no: int):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError:
        raise ConfigError([("BadValue", f"line {line_no}: {key}={raw!r}")]) from None
    word = raw.lower()
    if word in _TRUE_WORDS:
        return True
    if word in _FALSE_WORDS:
        return False
    raise ConfigError([("BadValue", f"line {line_no}: {key}={raw!r} is not a boolean")])


def load_config(path, base: SimConfig | None = None) -> SimConfig:
    """Load overrides from a flat key=value file on top of ``base``.

    Blank lines and lines starting with '#' are skipped. Unknown keys are
    errors. The result is validated.
    """
    base = base if base is not None else default_config()
    text = Path(path).read_text(encoding="utf-8")
    fields: dict = {}
    cx, cy = base.center
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError([("BadLine", f"line {line_no}: expected key=value, got {stripped!r}")])
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _INT_KEYS | _FLOAT_KEYS | _BOOL_KEYS:
            raise ConfigError([("UnknownConfigKey", f"line {line_no}: {key!r}")])
        value = _parse_value(key, raw, line_no)
        if key == "center_x":
            cx = value
        elif key == "center_y":
            cy = value
        else:
            fields[key] = value
    cfg = dataclasses.replace(base, center=(cx, cy), **fields)
    return validate(cfg)
