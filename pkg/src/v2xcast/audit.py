"""Independent constraint auditor.

Consumes only the emitted schedule trace (grants, pairings, slot counts) and
recomputes every constraint from scratch: coverage and link quality from the
geometry, delivered bits from re-derived per-slot rates, and the structural
rules of the sharing phase. It never calls scheduler code; failures are data,
not exceptions.

A relative guard of 1e-12 absorbs float-association noise between the
scheduler's accumulation order and the recomputation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baselines import SchemeResult
from .params import ScenarioConfig
from .ratemodel import PhysicalRateModel
from .vehicles import VehicleState

REL_GUARD = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


@dataclass(frozen=True)
class AuditReport:
    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.ok]

    def __str__(self) -> str:
        return "\n".join(
            f"{'PASS' if c.ok else 'FAIL'} {c.name}" + (f": {c.detail}" if c.detail else "")
            for c in self.checks)


def audit(result: SchemeResult, config: ScenarioConfig,
          vehicles: list[VehicleState], model=None) -> AuditReport:
    """Check the full constraint set against the trace.

    `model` supplies the rate arithmetic; by default a fresh physical model is
    built from the config, so table-driven runs must pass their own.
    """
    if model is None:
        model = PhysicalRateModel(config, vehicles, rate_mode=result.rate_mode)
    checks = [
        _check_coverage(result, config, vehicles),
        _check_v2i_qos(result, config, vehicles, model),
        _check_rsu_serial(result),
        _check_v2i_delivery(result, model),
        _check_source_once(result),
        _check_precedence(result),
        _check_two_hop(result),
        _check_v2v_delivery_and_qos(result, model),
        _check_totals(result, config),
    ]
    return AuditReport(tuple(checks))


def _grant_edge_distances(grant, config, vehicles):
    from .geometry import distance_to_rsu
    v = vehicles[grant.vehicle - 1]
    first = distance_to_rsu(v, grant.start_slot, config, midpoint=True)
    last = distance_to_rsu(v, grant.start_slot + grant.n_slots - 1, config,
                           midpoint=True)
    return first, last


def _check_coverage(result, config, vehicles) -> CheckResult:
    """Granted slots must lie inside the RSU range. RSU distance over a slot
    interval is V-shaped, so the interval endpoints bound it."""
    limit = config.radio.rsu_range * (1.0 + REL_GUARD)
    for grant in result.selection.grants:
        if grant.n_slots == 0:
            continue
        try:
            first, last = _grant_edge_distances(grant, config, vehicles)
        except ValueError:
            return CheckResult("coverage", False,
                               f"vehicle {grant.vehicle} granted at slot "
                               f"{grant.start_slot} before road entry")
        if first > limit or last > limit:
            slot = grant.start_slot if first > limit else grant.start_slot + grant.n_slots - 1
            return CheckResult("coverage", False,
                               f"vehicle {grant.vehicle} granted at slot {slot} "
                               f"at distance {max(first, last):.3f} m")
    return CheckResult("coverage", True)


def _check_v2i_qos(result, config, vehicles, model) -> CheckResult:
    """Granted slots must meet the SNR threshold; SNR is minimal where the
    distance is maximal, so endpoints again suffice."""
    from .radio import v2i_snr
    floor = config.radio.sinr_threshold * (1.0 - REL_GUARD)
    for grant in result.selection.grants:
        if grant.n_slots == 0:
            continue
        try:
            first, last = _grant_edge_distances(grant, config, vehicles)
        except ValueError:
            return CheckResult("v2i_qos", False,
                               f"vehicle {grant.vehicle} granted before road entry")
        worst = max(first, last)
        if v2i_snr(worst, config.radio) < floor:
            return CheckResult("v2i_qos", False,
                               f"vehicle {grant.vehicle} below threshold at "
                               f"distance {worst:.3f} m")
    return CheckResult("v2i_qos", True)


def _check_rsu_serial(result) -> CheckResult:
    """At most one grant occupies any slot."""
    spans = sorted((g.start_slot, g.start_slot + g.n_slots, g.vehicle)
                   for g in result.selection.grants if g.n_slots > 0)
    for (a0, a1, va), (b0, _, vb) in zip(spans, spans[1:]):
        if b0 < a1:
            return CheckResult("rsu_serial", False,
                               f"grants to {va} and {vb} overlap at slot {b0}")
    return CheckResult("rsu_serial", True)


def _check_v2i_delivery(result, model) -> CheckResult:
    """Every served-and-granted vehicle accumulated the full content over its
    granted slots, by independent rate recomputation."""
    target = model.content_size * (1.0 - REL_GUARD)
    dt = model.slot_duration
    got: dict[int, float] = {}
    for g in result.selection.grants:
        if g.n_slots == 0:
            continue
        rates = model.v2i_rates(g.vehicle, g.start_slot, g.n_slots)
        got[g.vehicle] = got.get(g.vehicle, 0.0) + float(np.sum(rates)) * dt
    granted_served = {g.vehicle for g in result.selection.grants} & set(result.served)
    for vid in sorted(granted_served):
        if got.get(vid, 0.0) < target:
            return CheckResult("v2i_delivery", False,
                               f"vehicle {vid} delivered {got.get(vid, 0.0):.3e} "
                               f"of {model.content_size:.3e} bits")
    return CheckResult("v2i_delivery", True)


def _check_source_once(result) -> CheckResult:
    """Each vehicle transmits at most one flow over the whole sharing phase,
    each receiver receives exactly once, and no receiver was RSU-granted."""
    granted = {g.vehicle for g in result.selection.grants}
    seen_tx: set[int] = set()
    seen_rx: set[int] = set()
    for pairing in result.v2v.pairings:
        for link in pairing.links:
            if link.tx in seen_tx:
                return CheckResult("source_once", False,
                                   f"vehicle {link.tx} sources twice")
            if link.rx in seen_rx:
                return CheckResult("source_once", False,
                                   f"vehicle {link.rx} receives twice")
            if link.rx in granted:
                return CheckResult("source_once", False,
                                   f"vehicle {link.rx} receives after an RSU grant")
            seen_tx.add(link.tx)
            seen_rx.add(link.rx)
    return CheckResult("source_once", True)


def _check_precedence(result) -> CheckResult:
    """A source must hold the content before transmitting: an RSU grant, a
    receive in an earlier pairing, or a same-pairing relay join."""
    granted = {g.vehicle for g in result.selection.grants}
    received_before: set[int] = set()
    for pairing in result.v2v.pairings:
        rx_here = {l.rx for l in pairing.links}
        for link in pairing.links:
            if link.tx in granted or link.tx in received_before:
                continue
            if link.tx in rx_here:
                continue  # full-duplex relay: receives and forwards together
            return CheckResult("precedence", False,
                               f"pairing {pairing.index}: source {link.tx} "
                               f"had no content")
        received_before |= rx_here
    return CheckResult("precedence", True)


def _check_two_hop(result) -> CheckResult:
    """Within a pairing the link graph must decompose into simple directed
    paths of at most two links."""
    for pairing in result.v2v.pairings:
        out_deg: dict[int, int] = {}
        in_deg: dict[int, int] = {}
        for link in pairing.links:
            out_deg[link.tx] = out_deg.get(link.tx, 0) + 1
            in_deg[link.rx] = in_deg.get(link.rx, 0) + 1
        if any(d > 1 for d in out_deg.values()) or any(d > 1 for d in in_deg.values()):
            return CheckResult("two_hop", False,
                               f"pairing {pairing.index}: node shared beyond "
                               f"the relay pattern")
        nxt = {l.tx: l.rx for l in pairing.links}
        for link in pairing.links:
            if link.tx in {l.rx for l in pairing.links}:
                continue  # not a chain head
            hops, node = 0, link.tx
            while node in nxt:
                node = nxt[node]
                hops += 1
                if hops > 2:
                    return CheckResult("two_hop", False,
                                       f"pairing {pairing.index}: chain longer "
                                       f"than two hops")
        heads = [l.tx for l in pairing.links if l.tx not in {x.rx for x in pairing.links}]
        if not heads and pairing.links:
            return CheckResult("two_hop", False,
                               f"pairing {pairing.index}: cyclic link structure")
    return CheckResult("two_hop", True)


def _check_v2v_delivery_and_qos(result, model) -> CheckResult:
    """Replay each pairing from its traced slot counts: links stay active for
    their recorded spans, the concurrent set shrinks as links finish, and at
    every phase each active link must clear the SINR threshold while the
    accumulated bits must reach the content size."""
    target = model.content_size * (1.0 - REL_GUARD)
    floor = model.sinr_threshold * (1.0 - REL_GUARD)
    dt = model.slot_duration
    for pairing in result.v2v.pairings:
        links = [(l.tx, l.rx) for l in pairing.links]
        spans = {(l.tx, l.rx): l.slots for l in pairing.links}
        if result.strict_causality:
            delivered = _replay_strict(model, pairing, floor)
            if delivered is None:
                return CheckResult("v2v_delivery", False,
                                   f"pairing {pairing.index}: link below "
                                   f"threshold during replay")
        else:
            delivered = {l: 0.0 for l in links}
            elapsed = 0
            active = list(links)
            while active:
                sinrs = model.link_sinrs(active)
                rates = model.link_rates(active)
                for l, s in zip(active, sinrs):
                    if s < floor:
                        return CheckResult(
                            "v2v_delivery", False,
                            f"pairing {pairing.index}: link {l} SINR {s:.2f} "
                            f"below threshold after slot {elapsed}")
                nxt = min(spans[l] for l in active)
                step = nxt - elapsed
                for l, r in zip(active, rates):
                    delivered[l] += r * dt * step
                elapsed = nxt
                active = [l for l in active if spans[l] > elapsed]
        for l in links:
            if delivered[l] < target:
                return CheckResult("v2v_delivery", False,
                                   f"pairing {pairing.index}: link {l} delivered "
                                   f"{delivered[l]:.3e} of {model.content_size:.3e}")
    return CheckResult("v2v_delivery", True)


def _replay_strict(model, pairing, floor):
    """Slot-by-slot replay with the relay backlog cap."""
    dt = model.slot_duration
    links = [(l.tx, l.rx) for l in pairing.links]
    spans = {(l.tx, l.rx): l.slots for l in pairing.links}
    feeder_of = {}
    for l in pairing.links:
        if l.relay_hop:
            feeds = [(f.tx, f.rx) for f in pairing.links if f.rx == l.tx]
            if feeds:
                feeder_of[(l.tx, l.rx)] = feeds[0]
    delivered = {l: 0.0 for l in links}
    rates: dict = {}
    prev_active: list = []
    for t in range(pairing.duration):
        active = [l for l in links if spans[l] > t]
        if not active:
            break
        if active != prev_active:
            sinrs = model.link_sinrs(active)
            if any(s < floor for s in sinrs):
                return None
            rates = dict(zip(active, model.link_rates(active)))
            prev_active = active
        for l in active:
            grain = rates[l] * dt
            if l in feeder_of:
                grain = min(grain, max(0.0, delivered[feeder_of[l]] - delivered[l]))
            delivered[l] += grain
    return delivered


def _check_totals(result, config) -> CheckResult:
    """Reported phase totals must equal an independent recount, pairing
    durations must equal their longest link, and the sum must fit the horizon."""
    t_v2i = sum(g.n_slots for g in result.selection.grants)
    if t_v2i != result.selection.t_v2i:
        return CheckResult("totals", False,
                           f"t_v2i recount {t_v2i} != reported {result.selection.t_v2i}")
    t_v2v = 0
    for pairing in result.v2v.pairings:
        longest = max((l.slots for l in pairing.links), default=0)
        if longest != pairing.duration:
            return CheckResult("totals", False,
                               f"pairing {pairing.index} duration {pairing.duration} "
                               f"!= longest link {longest}")
        t_v2v += pairing.duration
    if t_v2v != result.v2v.t_v2v:
        return CheckResult("totals", False,
                           f"t_v2v recount {t_v2v} != reported {result.v2v.t_v2v}")
    if t_v2i + t_v2v > config.road.horizon:
        return CheckResult("totals", False,
                           f"total {t_v2i + t_v2v} exceeds horizon {config.road.horizon}")
    return CheckResult("totals", True)
