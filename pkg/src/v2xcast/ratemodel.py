"""Rate models: the slot-rate and feasibility surface the schedulers consume.

PhysicalRateModel evaluates the full link-budget math over the vehicle
population, with caching that exploits two facts of the scenario: all
vehicles share one speed, so pairwise distances and angles never change, and
the RSU geometry per vehicle is a closed-form function of the slot index.

TableRateModel replaces the physics with fixed per-vehicle and per-pair slot
counts. It is used for desk-scale reference instances and brute-force
comparisons where the schedule structure, not the radio, is under test.
"""

from __future__ import annotations

import math

import numpy as np

from .params import ScenarioConfig
from .radio import antenna_gain, mainlobe_gain
from .vehicles import VehicleState

Link = tuple[int, int]  # (tx id, rx id)


def fd_relays(links: list[Link]) -> set[int]:
    """Nodes that both receive and transmit within a concurrent set."""
    txs = {tx for tx, _ in links}
    rxs = {rx for _, rx in links}
    return txs & rxs


class PhysicalRateModel:
    def __init__(self, config: ScenarioConfig, vehicles: list[VehicleState],
                 rate_mode: str = "midpoint"):
        if rate_mode not in ("midpoint", "quadrature"):
            raise ValueError(f"unknown rate mode {rate_mode!r}")
        self.config = config
        self.vehicles = vehicles
        self.rate_mode = rate_mode
        radio, road = config.radio, config.road
        self.content_size = road.content_size
        self.slot_duration = road.slot_duration
        self.horizon = road.horizon

        n = len(vehicles)
        self.ids = [v.id for v in vehicles]
        # 1-based arrays; index 0 unused.
        self._entry = np.zeros(n + 1, dtype=np.int64)
        self._dlr = np.zeros(n + 1)
        self._y = np.zeros(n + 1)
        for v in vehicles:
            self._entry[v.id] = v.entry_slot
            self._dlr[v.id] = config.lane_offset(v.lane)
            self._y[v.id] = (v.lane - 0.5) * road.lane_width
        self._step = road.slot_duration * road.speed  # m of travel per slot

        g = mainlobe_gain(radio)
        self._noise = radio.noise_floor_w
        self._tau = radio.pathloss_exponent
        self._c_rsu = radio.path_constant * radio.tx_power_rsu * g * g
        self._c_veh = radio.path_constant * radio.tx_power_vehicle * g * g
        self._c_itf = radio.mui_factor * radio.path_constant * radio.tx_power_vehicle
        self._rsi = radio.si_cancel * radio.tx_power_vehicle
        self.sinr_threshold = radio.sinr_threshold

        # QoS-feasible radius: SNR(d) >= threshold; serving needs both range and QoS.
        r_qos = (self._c_rsu / (self._noise * radio.sinr_threshold)) ** (1.0 / self._tau)
        self._serve_radius = min(radio.rsu_range, r_qos)

        # Virtual positions at slot 0; only differences matter and they are
        # constant over time, so V2V geometry is computed once.
        x0 = -self._entry.astype(float) * self._step
        dx = x0[:, None] - x0[None, :]
        dy = self._y[:, None] - self._y[None, :]
        self._x0 = x0
        dist = np.hypot(dx, dy)
        self._dist = dist
        with np.errstate(divide="ignore"):
            pr = self._c_veh * dist ** (-self._tau)
        in_range = (dist <= radio.v2v_range)
        np.fill_diagonal(in_range, False)
        pr = np.where(in_range, pr, 0.0)
        self._pr = pr
        self._in_range = in_range
        self._rate_free = np.where(
            in_range, radio.bandwidth * np.log2(1.0 + pr / self._noise), 0.0)

        self._windows: dict[int, tuple[int, int] | None] = {}

    # ---- V2I ----

    def service_window(self, vid: int) -> tuple[int, int] | None:
        """Slot range where the vehicle is in coverage with adequate SNR,
        clipped to the horizon. None if the vehicle can never be served."""
        try:
            return self._windows[vid]
        except KeyError:
            pass
        from .geometry import coverage_window
        v = self.vehicles[vid - 1]
        assert v.id == vid
        win = coverage_window(v, self.config, radius=self._serve_radius)
        if win is not None:
            t_in, t_out = win
            t_out = min(t_out, self.horizon - 1)
            win = (t_in, t_out) if t_in <= t_out else None
        self._windows[vid] = win
        return win

    def in_service(self, vid: int, t: int) -> bool:
        win = self.service_window(vid)
        return win is not None and win[0] <= t <= win[1]

    def entered(self, vid: int, t: int) -> bool:
        return self._entry[vid] <= t

    def _rsu_distances(self, vid: int, start: int, count: int) -> np.ndarray:
        t = np.arange(start, start + count, dtype=float)
        x = (t - self._entry[vid] + 0.5) * self._step - self.config.road.rsu_longitudinal
        return np.hypot(x, self._dlr[vid])

    def rsu_distance(self, vid: int, t: int) -> float:
        """Mid-slot RSU distance, meters."""
        x = (t - self._entry[vid] + 0.5) * self._step - self.config.road.rsu_longitudinal
        return math.hypot(x, self._dlr[vid])

    def _snr_of_distance(self, d: np.ndarray) -> np.ndarray:
        radio = self.config.radio
        snr = self._c_rsu * d ** (-self._tau) / self._noise
        return np.where(d <= radio.rsu_range, snr, 0.0)

    def v2i_rates(self, vid: int, start: int, count: int) -> np.ndarray:
        """Per-slot downlink rates for slots [start, start+count), bits/s."""
        radio, road = self.config.radio, self.config.road
        if self.rate_mode == "midpoint":
            d = self._rsu_distances(vid, start, count)
            return radio.bandwidth * np.log2(1.0 + self._snr_of_distance(d))
        # Simpson with 8 subintervals over the in-slot angle sweep.
        t = np.arange(start, start + count, dtype=float)
        xa = (t - self._entry[vid]) * self._step - road.rsu_longitudinal
        d_lr = self._dlr[vid]
        phi_a = np.arctan(xa / d_lr)
        phi_b = np.arctan((xa + self._step) / d_lr)
        h = (phi_b - phi_a) / 8.0
        weights = np.array([1, 4, 2, 4, 2, 4, 2, 4, 1], dtype=float)
        phi = phi_a[:, None] + h[:, None] * np.arange(9)[None, :]
        d = d_lr / np.cos(phi)
        rates = radio.bandwidth * np.log2(1.0 + self._snr_of_distance(d))
        integrand = rates * d_lr / (road.speed * np.cos(phi) ** 2)
        return (integrand @ weights) * h / 3.0 / road.slot_duration

    def slots_to_download(self, vid: int, start: int) -> int | None:
        """Smallest slot count to accumulate the content from `start`, with
        every slot inside the serving window; None when impossible."""
        if self.content_size <= 0:
            return 0
        win = self.service_window(vid)
        if win is None or not (win[0] <= start <= win[1]):
            return None
        avail = win[1] - start + 1
        # Rates are unimodal over the pass, so the window endpoints bound the
        # minimum rate and give a safe cap on how many slots to evaluate.
        dt = self.slot_duration
        r_edge = min(self.v2i_rates(vid, start, 1)[0],
                     self.v2i_rates(vid, win[1], 1)[0])
        if r_edge <= 0:
            return None
        cap = min(avail, int(math.ceil(self.content_size / (r_edge * dt))) + 2)
        cum = np.cumsum(self.v2i_rates(vid, start, cap)) * dt
        idx = int(np.searchsorted(cum, self.content_size, side="left"))
        if idx >= cap:
            return None
        return idx + 1

    # ---- V2V ----

    def in_range(self, i: int, j: int) -> bool:
        return bool(self._in_range[i, j])

    def rate_free(self, i: int, j: int) -> float:
        """Interference-free link rate, bits/s; 0 when out of range."""
        return float(self._rate_free[i, j])

    def link_slots_free(self, i: int, j: int) -> int | None:
        r = self.rate_free(i, j)
        if r <= 0.0:
            return None
        return max(1, int(math.ceil(self.content_size / (r * self.slot_duration))))

    def _gain(self, theta: float) -> float:
        radio = self.config.radio
        return antenna_gain(theta, radio.beamwidth, radio.sidelobe_gain)

    def _angle(self, at: int, toward_a: int, toward_b: int) -> float:
        ax = self._x0[toward_a] - self._x0[at]
        ay = self._y[toward_a] - self._y[at]
        bx = self._x0[toward_b] - self._x0[at]
        by = self._y[toward_b] - self._y[at]
        dot = ax * bx + ay * by
        norm = math.hypot(ax, ay) * math.hypot(bx, by)
        return math.acos(max(-1.0, min(1.0, dot / norm)))

    def link_sinrs(self, links: list[Link]) -> list[float]:
        """Receiver SINR per link when all of them transmit concurrently."""
        radio = self.config.radio
        relays = fd_relays(links)
        out = []
        for tx, rx in links:
            pr = self._pr[tx, rx]
            if pr <= 0.0:
                out.append(0.0)
                continue
            itf = 0.0
            for utx, urx in links:
                if (utx, urx) == (tx, rx) or utx == rx:
                    continue
                d = self._dist[utx, rx]
                if d > radio.v2v_range:
                    continue
                if d == 0.0:
                    itf = math.inf
                    break
                gt = self._gain(self._angle(utx, urx, rx))
                gr = self._gain(self._angle(rx, tx, utx))
                itf += self._c_itf * gt * gr * d ** (-self._tau)
            rsi = self._rsi if rx in relays else 0.0
            out.append(pr / (self._noise + itf + rsi))
        return out

    def link_rates(self, links: list[Link]) -> list[float]:
        w = self.config.radio.bandwidth
        return [w * math.log2(1.0 + s) if s > 0 else 0.0
                for s in self.link_sinrs(links)]

    def set_feasible(self, links: list[Link]) -> bool:
        return all(s >= self.sinr_threshold for s in self.link_sinrs(links))


class TableRateModel:
    """Fixed slot-count tables in place of the physics.

    v2i_slots maps vehicle id -> slots to download from the RSU (any start
    inside the serving window). pair_slots maps frozenset({i, j}) -> slots for
    a vehicle-to-vehicle transfer; absent pairs are out of range. Rates are
    backed out of the slot counts with a half-slot margin so that integer
    accumulation lands exactly on the intended count.
    """

    def __init__(self, config: ScenarioConfig, vehicles: list[VehicleState],
                 v2i_slots: dict[int, int], pair_slots: dict[frozenset, int],
                 geometric_coverage: bool = True):
        self.config = config
        self.vehicles = vehicles
        self.content_size = config.road.content_size
        self.slot_duration = config.road.slot_duration
        self.horizon = config.road.horizon
        self.ids = [v.id for v in vehicles]
        self.sinr_threshold = config.radio.sinr_threshold
        self._v2i_slots = dict(v2i_slots)
        self._pair_slots = {frozenset(k): v for k, v in pair_slots.items()}
        self._entry = {v.id: v.entry_slot for v in vehicles}
        self._geometric = geometric_coverage
        self._windows: dict[int, tuple[int, int] | None] = {}

    def _rate_for(self, slots: int) -> float:
        return self.content_size / ((slots - 0.5) * self.slot_duration)

    def service_window(self, vid: int) -> tuple[int, int] | None:
        if not self._geometric:
            return (self._entry[vid], self.horizon - 1)
        try:
            return self._windows[vid]
        except KeyError:
            pass
        from .geometry import coverage_window
        v = self.vehicles[vid - 1]
        win = coverage_window(v, self.config)
        if win is not None:
            t_in, t_out = win
            t_out = min(t_out, self.horizon - 1)
            win = (t_in, t_out) if t_in <= t_out else None
        self._windows[vid] = win
        return win

    def in_service(self, vid: int, t: int) -> bool:
        win = self.service_window(vid)
        return win is not None and win[0] <= t <= win[1]

    def entered(self, vid: int, t: int) -> bool:
        return self._entry[vid] <= t

    def rsu_distance(self, vid: int, t: int) -> float:
        if not self._geometric:
            return 0.0
        from .geometry import distance_to_rsu
        return distance_to_rsu(self.vehicles[vid - 1], t, self.config, midpoint=True)

    def v2i_rates(self, vid: int, start: int, count: int) -> np.ndarray:
        return np.full(count, self._rate_for(self._v2i_slots[vid]))

    def slots_to_download(self, vid: int, start: int) -> int | None:
        if self.content_size <= 0:
            return 0
        win = self.service_window(vid)
        if win is None or not (win[0] <= start <= win[1]):
            return None
        m = self._v2i_slots[vid]
        if start + m - 1 > win[1]:
            return None
        return m

    def in_range(self, i: int, j: int) -> bool:
        return frozenset((i, j)) in self._pair_slots

    def rate_free(self, i: int, j: int) -> float:
        key = frozenset((i, j))
        if key not in self._pair_slots:
            return 0.0
        return self._rate_for(self._pair_slots[key])

    def link_slots_free(self, i: int, j: int) -> int | None:
        key = frozenset((i, j))
        return self._pair_slots.get(key)

    def link_sinrs(self, links: list[Link]) -> list[float]:
        return [self.sinr_threshold if self.in_range(tx, rx) else 0.0
                for tx, rx in links]

    def link_rates(self, links: list[Link]) -> list[float]:
        return [self.rate_free(tx, rx) for tx, rx in links]

    def set_feasible(self, links: list[Link]) -> bool:
        return all(self.in_range(tx, rx) for tx, rx in links)


def build_model(config: ScenarioConfig, vehicles: list[VehicleState],
                rate_mode: str = "midpoint") -> PhysicalRateModel:
    return PhysicalRateModel(config, vehicles, rate_mode=rate_mode)
