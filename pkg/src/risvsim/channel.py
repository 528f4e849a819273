"""Propagation loss models and best-path selection.

Direct links use the 3GPP TR 38.901 UMi street canyon formulas with a
geometric LOS/NLOS decision. Each available RIS adds one first-order
reflection candidate evaluated with the far-field ideal-reflector loss.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import GrazingIncidence, NearFieldViolation
from .geometry import Vec3, World, distance3d, has_los
from .ris import RisPanel, incidence_angle, is_available

log = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0
C_TR38901 = 3.0e8  # value prescribed for the breakpoint distance

LOS = "LOS"
NLOS = "NLOS"
DIRECT_LOS = "direct_los"
DIRECT_NLOS = "direct_nlos"
RIS = "ris"


@dataclass(frozen=True)
class RadioParams:
    fc_ghz: float = 28.0
    gain_tx: float = 1.0
    gain_rx: float = 1.0
    h_bs: float = 10.0
    h_ut: float = 1.5
    link_budget: float = 142.0

    def __post_init__(self):
        if not self.fc_ghz > 0:
            raise ValueError("fc_ghz must be > 0")
        if not (self.gain_tx > 0 and self.gain_rx > 0):
            raise ValueError("antenna gains must be > 0 (linear)")
        if not self.link_budget > 0:
            raise ValueError("link_budget must be > 0")
        if not (self.h_bs > 1.0 and self.h_ut > 1.0):
            raise ValueError("antenna heights must exceed the 1 m effective environment height")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / (self.fc_ghz * 1e9)

    @property
    def breakpoint(self) -> float:
        return 4.0 * (self.h_bs - 1.0) * (self.h_ut - 1.0) * self.fc_ghz * 1e9 / C_TR38901


@dataclass(frozen=True)
class PathCandidate:
    kind: str
    path_loss: float
    panel_id: Optional[str] = None
    d1: Optional[float] = None
    d2: Optional[float] = None
    theta_i: Optional[float] = None


@dataclass(frozen=True)
class PathSelection:
    condition: str
    candidates: tuple[PathCandidate, ...]
    selected: int
    direct_d3d: float

    @property
    def best(self) -> PathCandidate:
        return self.candidates[self.selected]


def umi_los_pathloss(d3d: float, params: RadioParams) -> float:
    d = max(d3d, 1.0)
    fc = params.fc_ghz
    if d < params.breakpoint:
        return 32.4 + 21.0 * math.log10(d) + 20.0 * math.log10(fc)
    dh = params.h_bs - params.h_ut
    return (32.4 + 40.0 * math.log10(d) + 20.0 * math.log10(fc)
            - 9.5 * math.log10(params.breakpoint ** 2 + dh ** 2))


def umi_nlos_pathloss(d3d: float, params: RadioParams) -> float:
    d = max(d3d, 1.0)
    primed = (35.3 * math.log10(d) + 22.4 + 21.3 * math.log10(params.fc_ghz)
              - 0.3 * (params.h_ut - 1.5))
    return max(umi_los_pathloss(d, params), primed)


def far_field_distance(panel: RisPanel, params: RadioParams) -> float:
    """Fraunhofer distance of the larger panel side."""
    return 2.0 * max(panel.width, panel.height) ** 2 / params.wavelength


def ris_pathloss(d1: float, d2: float, theta_i: float, panel: RisPanel, params: RadioParams) -> float:
    """Far-field loss of an ideally configured panel, in dB."""
    bound = far_field_distance(panel, params)
    if d1 < bound or d2 < bound:
        raise NearFieldViolation(
            f"panel {panel.id}: legs {d1:.2f} m / {d2:.2f} m inside far-field bound {bound:.2f} m")
    if not 0.0 <= theta_i < math.pi / 2:
        raise GrazingIncidence(f"panel {panel.id}: incidence angle {theta_i} rad")
    area = panel.width * panel.height * math.cos(theta_i)
    gain = params.gain_tx * params.gain_rx * area * area / (16.0 * math.pi ** 2 * d1 * d1 * d2 * d2)
    return -10.0 * math.log10(gain)


def ris_candidate(panel: RisPanel, tx: Vec3, rx: Vec3, params: RadioParams) -> PathCandidate:
    d1 = distance3d(tx, panel.position)
    d2 = distance3d(panel.position, rx)
    theta = incidence_angle(panel, tx)
    return PathCandidate(RIS, ris_pathloss(d1, d2, theta, panel, params), panel.id, d1, d2, theta)


def evaluate_link(world: World, tx: Vec3, rx: Vec3, panels: Sequence[RisPanel],
                  params: RadioParams) -> PathSelection:
    d3d = distance3d(tx, rx)
    if has_los(world, tx, rx):
        condition = LOS
        cands = [PathCandidate(DIRECT_LOS, umi_los_pathloss(d3d, params))]
    else:
        condition = NLOS
        cands = [PathCandidate(DIRECT_NLOS, umi_nlos_pathloss(d3d, params))]
    for panel in sorted(panels, key=lambda p: p.id):
        if not is_available(world, panel, tx, rx):
            continue
        try:
            cands.append(ris_candidate(panel, tx, rx, params))
        except (NearFieldViolation, GrazingIncidence) as e:
            log.debug("skipping panel: %s", e)
    selected = min(range(len(cands)), key=lambda i: (cands[i].path_loss, i))
    return PathSelection(condition, tuple(cands), selected, d3d)
