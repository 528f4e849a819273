"""RIS panels: pose, incidence geometry and availability screening."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import DegeneratePosition
from .geometry import Vec3, World, has_los
from .mobility import VehicleState

DEFAULT_SIDE = 0.5
DEFAULT_DOWNTILT = math.radians(30.0)


@dataclass(frozen=True)
class RisPanel:
    id: str
    position: Vec3
    normal: Vec3
    width: float = DEFAULT_SIDE
    height: float = DEFAULT_SIDE
    carrier: Optional[str] = None  # None for a static panel

    def __post_init__(self):
        if abs(self.normal.norm() - 1.0) > 1e-9:
            raise ValueError(f"panel {self.id}: normal must be a unit vector")
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"panel {self.id}: dimensions must be > 0")

    def flipped(self) -> "RisPanel":
        return RisPanel(self.id, self.position, -self.normal, self.width, self.height, self.carrier)


@dataclass(frozen=True)
class MountSpec:
    carrier: str
    downtilt: float = DEFAULT_DOWNTILT
    offset: Vec3 = field(default_factory=lambda: Vec3(0.0, 0.0, 0.0))

    def __post_init__(self):
        if not 0.0 <= self.downtilt <= math.pi / 2:
            raise ValueError("downtilt must lie in [0, pi/2]")


def incidence_angle(panel: RisPanel, endpoint: Vec3) -> float:
    d = endpoint - panel.position
    n = d.norm()
    if n == 0.0:
        raise DegeneratePosition(f"endpoint coincides with panel {panel.id}")
    c = panel.normal.dot(d) / n
    return math.acos(min(1.0, max(-1.0, c)))


def tilted_normal(azimuth: float, downtilt: float) -> Vec3:
    ce = math.cos(downtilt)
    return Vec3(ce * math.cos(azimuth), ce * math.sin(azimuth), -math.sin(downtilt))


def panel_pose_from_mount(carrier: VehicleState, mount: MountSpec, align_to: Vec3) -> tuple[Vec3, Vec3]:
    """Position and unit normal of a panel carried by ``carrier``.

    The normal points horizontally toward ``align_to`` and is pitched down by
    the mount's downtilt. If ``align_to`` is directly above or below the
    panel, the carrier's heading gives the azimuth.
    """
    c, s = math.cos(carrier.heading), math.sin(carrier.heading)
    off = mount.offset
    pos = carrier.position + Vec3(c * off.x - s * off.y, s * off.x + c * off.y, off.z)
    dx, dy = align_to.x - pos.x, align_to.y - pos.y
    azimuth = math.atan2(dy, dx) if (dx or dy) else carrier.heading
    return pos, tilted_normal(azimuth, mount.downtilt)


def mounted_panel(pid: str, carrier: VehicleState, mount: MountSpec, align_to: Vec3,
                  width: float = DEFAULT_SIDE, height: float = DEFAULT_SIDE) -> RisPanel:
    pos, normal = panel_pose_from_mount(carrier, mount, align_to)
    return RisPanel(pid, pos, normal, width, height, mount.carrier)


def in_front(panel: RisPanel, endpoint: Vec3) -> bool:
    return panel.normal.dot(endpoint - panel.position) > 0.0


def is_available(world: World, panel: RisPanel, tx: Vec3, rx: Vec3) -> bool:
    """Panel is usable when both endpoints see its front face unobstructed."""
    return (in_front(panel, tx) and in_front(panel, rx)
            and has_los(world, tx, panel.position)
            and has_los(world, panel.position, rx))
