"""Pure 2-D geometry: positions, ranges, coverage windows, beam angles.

The road runs along +x. Lane l is centered at y = (l - 0.5) * lane_width and
the RSU sits at y = -rsu_lateral_offset, so the perpendicular RSU distance of
lane l is rsu_lateral_offset + (l - 0.5) * lane_width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .params import ScenarioConfig
from .vehicles import VehicleState


@dataclass(frozen=True)
class Point2D:
    x: float  # m, longitudinal
    y: float  # m, lateral


def rsu_point(config: ScenarioConfig) -> Point2D:
    return Point2D(config.road.rsu_longitudinal, -config.road.rsu_lateral_offset)


def lane_center_y(config: ScenarioConfig, lane: int) -> float:
    return (lane - 0.5) * config.road.lane_width


def position(vehicle: VehicleState, t: int, config: ScenarioConfig,
             midpoint: bool = False) -> Point2D:
    """Vehicle position at slot t; midpoint=True samples mid-slot.

    Querying before the vehicle has entered the road is an error.
    """
    if t < vehicle.entry_slot:
        raise ValueError(
            f"vehicle {vehicle.id} queried at slot {t}, before entry "
            f"slot {vehicle.entry_slot}")
    offset = 0.5 if midpoint else 0.0
    x = (t - vehicle.entry_slot + offset) * config.road.slot_duration * config.road.speed
    return Point2D(x, lane_center_y(config, vehicle.lane))


def distance(a: Point2D, b: Point2D) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def distance_to_rsu(vehicle: VehicleState, t: int, config: ScenarioConfig,
                    midpoint: bool = False) -> float:
    return distance(position(vehicle, t, config, midpoint=midpoint), rsu_point(config))


def coverage_window(vehicle: VehicleState, config: ScenarioConfig,
                    radius: float | None = None) -> tuple[int, int] | None:
    """Maximal contiguous slot range with RSU distance <= radius, or None.

    Distances use the mid-slot sampling convention, matching the rate model.
    The right end is not clipped to the horizon; callers clip as needed.
    radius defaults to the RSU range.
    """
    if radius is None:
        radius = config.radio.rsu_range
    d_lr = config.lane_offset(vehicle.lane)
    if d_lr >= radius:
        return None
    half_chord = math.sqrt(radius * radius - d_lr * d_lr)
    step = config.road.slot_duration * config.road.speed  # m of travel per slot
    # Mid-slot x of slot t is (t - entry + 0.5) * step; solve |x - rsu_x| <= hc.
    lo = vehicle.entry_slot - 0.5 + (config.road.rsu_longitudinal - half_chord) / step
    hi = vehicle.entry_slot - 0.5 + (config.road.rsu_longitudinal + half_chord) / step
    t_in = max(vehicle.entry_slot, math.ceil(lo))
    t_out = math.floor(hi)
    if t_out < t_in:
        return None
    return t_in, t_out


def alignment_angle(tx: Point2D, boresight_target: Point2D, probe: Point2D) -> float:
    """Angle in [0, pi] at tx between the boresight ray and the probe direction."""
    if tx == boresight_target:
        raise ValueError("boresight target coincides with the antenna position")
    if tx == probe:
        raise ValueError("probe point coincides with the antenna position")
    ax, ay = boresight_target.x - tx.x, boresight_target.y - tx.y
    bx, by = probe.x - tx.x, probe.y - tx.y
    dot = ax * bx + ay * by
    na = math.hypot(ax, ay)
    nb = math.hypot(bx, by)
    cosang = max(-1.0, min(1.0, dot / (na * nb)))
    return math.acos(cosang)
