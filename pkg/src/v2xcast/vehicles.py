"""Vehicle population: Poisson arrivals quantized onto the slot grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ScenarioConfig


@dataclass(frozen=True)
class VehicleState:
    """A vehicle on the road. Position is derived, never stored.

    Longitudinal position at slot t is (t - entry_slot) * slot_duration * speed,
    measured from the left end of the road. Ids are 1..N in entry order.
    """

    id: int
    lane: int
    entry_slot: int


def spawn_vehicles(config: ScenarioConfig, seed: int) -> list[VehicleState]:
    """Draw the vehicle population deterministically from (config, seed).

    Inter-arrival gaps are i.i.d. exponential with the configured aggregate
    rate, quantized to slots by rounding half-up. Lanes are uniform. Ids are
    assigned by (entry_slot, lane) ascending, so they follow entry order.
    """
    road = config.road
    rng = np.random.default_rng(seed)
    gaps = rng.exponential(scale=1.0 / road.arrival_rate, size=road.vehicle_count)
    lanes = rng.integers(1, road.lane_count + 1, size=road.vehicle_count)
    arrival_s = np.cumsum(gaps)
    entry_slots = np.floor(arrival_s / road.slot_duration + 0.5).astype(np.int64)
    order = sorted(range(road.vehicle_count),
                   key=lambda idx: (int(entry_slots[idx]), int(lanes[idx])))
    return [
        VehicleState(id=vid, lane=int(lanes[idx]), entry_slot=int(entry_slots[idx]))
        for vid, idx in enumerate(order, start=1)
    ]
