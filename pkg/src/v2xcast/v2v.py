"""Vehicle-phase scheduling: full-duplex concurrent pairings.

Content spreads from the granted vehicles outward in rounds ("pairings").
Each pairing is a conflict-free set of directional links transmitted
simultaneously: every available source proposes its best receiver, proposals
commit in ascending order of their slot demand, and each committed first hop
may attach one full-duplex second hop at its receiver. A pairing then runs
slot by slot until every link has delivered the full content; interference
drops as links finish, so surviving links speed up.

Conflicts are structural (shared nodes, except the relay join) or physical
(adding the link would push any receiver, its own included, below the SINR
threshold).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Link = tuple[int, int]


@dataclass(frozen=True)
class LinkSchedule:
    tx: int
    rx: int
    relay_hop: bool     # True when this is the second hop of a relay chain
    slots: int
    delivered: float    # bits


@dataclass(frozen=True)
class Pairing:
    index: int          # 1-based
    start_slot: int     # on the transmit timeline (idle excluded)
    links: tuple[LinkSchedule, ...]
    duration: int       # max link slot count


@dataclass(frozen=True)
class V2VSchedule:
    pairings: tuple[Pairing, ...]
    t_v2v: int
    unserved: tuple[int, ...]


def best_first_hop(model, source: int, v_b: set[int]) -> Link | None:
    """Highest interference-free-rate link from `source` into v_b; ties go to
    the lower receiver id; None when nobody is in range."""
    best, best_rate = None, 0.0
    for j in sorted(v_b):
        r = model.rate_free(source, j)
        if r > best_rate:
            best, best_rate = j, r
    if best is None:
        return None
    return (source, best)


def conflict(model, candidate: Link, committed: list[Link]) -> bool:
    """True when the candidate cannot join the committed set.

    A shared node is a conflict unless it is the candidate's transmitter and
    that node is the receiver of exactly one committed link (the sanctioned
    relay join), whose own transmitter is not already relaying. On top of the
    structural check, the whole tentative set must keep every link at or
    above the SINR threshold.
    """
    ctx, crx = candidate
    feeders = [l for l in committed if l[1] == ctx]
    relay_join_ok = len(feeders) == 1 and not any(
        l[1] == feeders[0][0] for l in committed)
    for tx, rx in committed:
        shared = {tx, rx} & {ctx, crx}
        if not shared:
            continue
        if shared == {ctx} and rx == ctx and relay_join_ok:
            continue
        return True
    return not model.set_feasible(committed + [candidate])


def _slots_free(model, link: Link) -> int:
    m = model.link_slots_free(link[0], link[1])
    return m if m is not None else model.horizon


def build_pairing(model, v_a: set[int], v_b: set[int]):
    """Assemble one pairing. Returns (links, relay_flags, new_v_a, new_v_b);
    links is empty when no source can reach anyone.

    Sources are consumed when they transmit; receivers become sources for
    later pairings unless they already relayed here.
    """
    proposals = []
    for src in sorted(v_a):
        link = best_first_hop(model, src, v_b)
        if link is not None:
            proposals.append(link)
    if not proposals:
        return [], [], set(v_a), set(v_b)
    proposals.sort(key=lambda l: (_slots_free(model, l), l[0]))

    committed: list[Link] = []
    relay_flags: list[bool] = []
    va, vb = set(v_a), set(v_b)

    def commit(link: Link, relay: bool):
        committed.append(link)
        relay_flags.append(relay)
        tx, rx = link
        va.discard(tx)
        va.add(rx)
        vb.discard(rx)

    def try_second_hop(relay: int):
        nxt = best_first_hop(model, relay, vb)
        if nxt is not None and not conflict(model, nxt, committed):
            commit(nxt, True)

    for link in proposals:
        if link[1] not in vb:  # receiver taken by an earlier commit
            continue
        if conflict(model, link, committed):
            continue
        commit(link, False)
        try_second_hop(link[1])
    return committed, relay_flags, va, vb


def run_pairing(model, links: list[Link], relay_flags: list[bool],
                start_slot: int, index: int,
                strict_causality: bool = False) -> Pairing:
    """Simulate a pairing to completion and return its schedule.

    Rates are recomputed whenever the active set changes; between changes the
    geometry is static, so whole spans of identical slots are advanced at
    once. strict_causality additionally caps what a relay forwards at what it
    has received so far, which serializes unequal-rate chains honestly.
    """
    d_target = model.content_size
    dt = model.slot_duration
    active = list(links)
    delivered = {l: 0.0 for l in links}
    m = {l: 0 for l in links}
    feeder_of = {}
    for l, flag in zip(links, relay_flags):
        if flag:
            feeds = [f for f in links if f[1] == l[0]]
            if feeds:
                feeder_of[l] = feeds[0]

    if strict_causality:
        # Links are processed in commit order, so a relay sees its feeder's
        # same-slot arrivals before forwarding (pass-through within a slot).
        # Rates only change when the active set does; the per-slot loop is
        # pure backlog bookkeeping.
        rates: dict = {}
        while active:
            if set(rates) != set(active):
                rates = dict(zip(active, model.link_rates(active)))
            for l in list(active):
                r = rates[l]
                if r <= 0.0:
                    raise RuntimeError(
                        f"active link {l} starved (zero rate); pairing "
                        f"feasibility gate is inconsistent")
                grain = r * dt
                if l in feeder_of:
                    backlog = delivered[feeder_of[l]] - delivered[l]
                    grain = min(grain, max(0.0, backlog))
                delivered[l] += grain
                m[l] += 1
                if delivered[l] >= d_target:
                    active.remove(l)
        duration = max(m.values())
        return Pairing(index, start_slot,
                       tuple(LinkSchedule(l[0], l[1], flag, m[l], delivered[l])
                             for l, flag in zip(links, relay_flags)),
                       duration)

    while active:
        rates = model.link_rates(active)
        spans = []
        for l, r in zip(active, rates):
            if r <= 0.0:
                raise RuntimeError(
                    f"active link {l} starved (zero rate); pairing "
                    f"feasibility gate is inconsistent")
            spans.append(max(1, math.ceil((d_target - delivered[l]) / (r * dt))))
        step = min(spans)
        for l, r in zip(active, rates):
            delivered[l] += r * dt * step
            m[l] += step
        active = [l for l in active if delivered[l] < d_target]
    duration = max(m.values())
    return Pairing(index, start_slot,
                   tuple(LinkSchedule(l[0], l[1], flag, m[l], delivered[l])
                         for l, flag in zip(links, relay_flags)),
                   duration)


def schedule_v2v(model, v_a, v_b, t_v2i: int,
                 strict_causality: bool = False,
                 pairing_builder=build_pairing) -> V2VSchedule:
    """Run pairings until everyone is served or no link can form.

    The slot budget (phase totals against the horizon) is respected by not
    starting a pairing past it. pairing_builder is swappable so alternative
    selection policies can reuse the simulation loop.
    """
    va, vb = set(v_a), set(v_b)
    pairings: list[Pairing] = []
    t_v2v = 0
    while vb:
        if t_v2i + t_v2v >= model.horizon:
            break
        links, flags, va_next, vb_next = pairing_builder(model, va, vb)
        if not links:
            break
        pairing = run_pairing(model, links, flags, t_v2i + t_v2v,
                              len(pairings) + 1, strict_causality)
        if t_v2i + t_v2v + pairing.duration > model.horizon:
            break  # would overrun the slot budget; receivers stay unserved
        pairings.append(pairing)
        t_v2v += pairing.duration
        va, vb = va_next, vb_next
    return V2VSchedule(tuple(pairings), t_v2v, tuple(sorted(vb)))
