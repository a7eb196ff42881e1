"""Dependency-free rasterizer: world snapshots to binary portable pixmaps."""

import math
from dataclasses import dataclass

from .config import SimConfig
from .world import DroneRole, WorldState

WHITE = (255, 255, 255)
ZONE_GRAY = (200, 200, 200)
ENEMY_BLACK = (0, 0, 0)
EA_ORANGE = (255, 140, 0)
ROLE_COLORS = {
    DroneRole.COMPLIANT: (0, 170, 0),
    DroneRole.MALICIOUS: (220, 0, 0),
    DroneRole.REFORMED: (0, 0, 220),
}

ENTITY_RADIUS_PX = 2


@dataclass
class Frame:
    width: int
    height: int
    pixels: bytearray  # row-major RGB, 3 bytes per pixel


def round_half_up(v: float) -> int:
    return math.floor(v + 0.5)


def _fill_disc(frame: Frame, cx: int, cy: int, radius: float, color: tuple[int, int, int]) -> None:
    r, g, b = color
    span = int(math.ceil(radius))
    r2 = radius * radius
    for py in range(max(0, cy - span), min(frame.height, cy + span + 1)):
        dy = py - cy
        for px in range(max(0, cx - span), min(frame.width, cx + span + 1)):
            dx = px - cx
            if dx * dx + dy * dy <= r2:
                base = (py * frame.width + px) * 3
                frame.pixels[base] = r
                frame.pixels[base + 1] = g
                frame.pixels[base + 2] = b


def render_frame(world: WorldState, cfg: SimConfig, scale: int = 4) -> Frame:
    """Rasterize the world: white ground, gray protected zone, then enemies,
    drones, and enforcement agents as small discs, in that draw order.

    World x maps to pixel column, world y to pixel row; coordinates are
    rounded half up after scaling.
    """
    side = round_half_up(cfg.map_size * scale)
    frame = Frame(width=side, height=side, pixels=bytearray(WHITE * (side * side)))
    cx, cy = cfg.center
    _fill_disc(frame, round_half_up(cx * scale), round_half_up(cy * scale), cfg.center_radius * scale, ZONE_GRAY)
    for e in world.enemies:
        _fill_disc(
            frame,
            round_half_up(e.position.x * scale),
            round_half_up(e.position.y * scale),
            ENTITY_RADIUS_PX,
            ENEMY_BLACK,
        )
    for d in world.drones:
        _fill_disc(
            frame,
            round_half_up(d.position.x * scale),
            round_half_up(d.position.y * scale),
            ENTITY_RADIUS_PX,
            ROLE_COLORS[d.role],
        )
    for ea in world.eas:
        _fill_disc(
            frame,
            round_half_up(ea.position.x * scale),
            round_half_up(ea.position.y * scale),
            ENTITY_RADIUS_PX,
            EA_ORANGE,
        )
    return frame


def ppm_bytes(frame: Frame) -> bytes:
    """Binary portable pixmap encoding: P6 header, then raw RGB rows."""
    header = f"P6\n{frame.width} {frame.height}\n255\n".encode("ascii")
    return header + bytes(frame.pixels)


def write_image(frame: Frame, dest) -> None:
    """Write the frame as a P6 file; I/O failures surface with the path."""
    with open(dest, "wb") as fh:
        fh.write(ppm_bytes(frame))
