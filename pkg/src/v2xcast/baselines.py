"""The five schedulable schemes behind one result type.

proposed     utility-driven RSU grants + full-duplex concurrent sharing
fcfs         RSU serves vehicles in entry order, same sharing phase
random       uniformly random RSU grants and random sharing partners
noncoop      RSU alone, always talking to the nearest vehicle, no sharing
serial-tdma  RSU serves everyone in entry order, no sharing (reference)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .v2i import (ChainEstimate, Grant, V2ISelection, next_service_slot,
                  select_v2i_paths, two_hop_estimate)
from .v2v import V2VSchedule, conflict, schedule_v2v

SCHEMES = ("proposed", "fcfs", "random", "noncoop", "serial-tdma")


@dataclass(frozen=True)
class SchemeResult:
    scheme: str
    seed: int
    selection: V2ISelection
    v2v: V2VSchedule
    served: frozenset[int]
    unserved: frozenset[int]
    rate_mode: str
    strict_causality: bool


def _assemble(scheme, seed, model, selection, v2vsched, strict) -> SchemeResult:
    served = set(selection.v_a)
    for pairing in v2vsched.pairings:
        served.update(l.rx for l in pairing.links)
    unserved = set(model.ids) - served
    return SchemeResult(
        scheme=scheme, seed=seed, selection=selection, v2v=v2vsched,
        served=frozenset(served), unserved=frozenset(unserved),
        rate_mode=getattr(model, "rate_mode", "midpoint"),
        strict_causality=strict)


def schedule_proposed(model, seed: int, strict_causality: bool = False,
                      v2i_termination: str = "coverage") -> SchemeResult:
    selection = select_v2i_paths(model, termination=v2i_termination)
    v2vsched = schedule_v2v(model, selection.v_a, selection.v_b,
                            selection.t_v2i, strict_causality)
    return _assemble("proposed", seed, model, selection, v2vsched,
                     strict_causality)


def schedule_fcfs(model, seed: int, strict_causality: bool = False) -> SchemeResult:
    """Entry-order grants; whoever cannot finish inside coverage at their turn
    is left to the sharing phase."""
    clock = 0
    grants, v_a, v_b = [], [], []
    for vid in model.ids:
        win = model.service_window(vid)
        if win is None:
            v_b.append(vid)
            continue
        start = max(clock, win[0])
        if start > win[1]:
            v_b.append(vid)
            continue
        m = model.slots_to_download(vid, start)
        if m is None:
            v_b.append(vid)
            continue
        grants.append(Grant(vid, start, m))
        v_a.append(vid)
        clock = start + m
    selection = V2ISelection(tuple(grants), sum(g.n_slots for g in grants),
                             tuple(v_a), tuple(sorted(v_b)), (), False)
    v2vsched = schedule_v2v(model, selection.v_a, selection.v_b,
                            selection.t_v2i, strict_causality)
    return _assemble("fcfs", seed, model, selection, v2vsched, strict_causality)


def schedule_random(model, seed: int, strict_causality: bool = False) -> SchemeResult:
    """Random grants with the same coverage-based termination as the proposed
    scheme, then random pairing partners under identical conflict rules."""
    rng = np.random.default_rng([seed, 1])
    all_ids = list(model.ids)
    v_b: set[int] = set(all_ids)
    grants, v_a, chains = [], [], []
    covered: set[int] = set()
    clock, t_v2i = 0, 0
    incomplete = False
    while not covered >= set(all_ids):
        if not v_b:
            break
        pool = v_b - covered  # claimed vehicles await the sharing phase
        cands = []
        for vid in sorted(pool):
            if model.entered(vid, clock) and model.in_service(vid, clock):
                if model.slots_to_download(vid, clock) is not None:
                    cands.append(vid)
        if not cands:
            nxt = next_service_slot(model, pool, clock)
            if nxt is None:
                incomplete = True
                break
            clock = nxt
            continue
        winner = int(rng.choice(cands))
        m = model.slots_to_download(winner, clock)
        others = [j for j in sorted(v_b) if j != winner and model.entered(j, clock)]
        est = two_hop_estimate(model, winner, others)
        grants.append(Grant(winner, clock, m))
        chains.append(ChainEstimate(winner, est.first_hop, est.second_hop))
        v_a.append(winner)
        v_b.discard(winner)
        covered.add(winner)
        covered.update(x for x in (est.first_hop, est.second_hop) if x is not None)
        t_v2i += m
        clock += m
        if clock > model.horizon:
            incomplete = True
            break

    selection = V2ISelection(tuple(grants), t_v2i, tuple(v_a),
                             tuple(sorted(v_b)), tuple(chains), incomplete)

    def random_pairing(model, va, vb):
        committed, flags = [], []
        va2, vb2 = set(va), set(vb)

        def commit(link, relay):
            committed.append(link)
            flags.append(relay)
            va2.discard(link[0])
            va2.add(link[1])
            vb2.discard(link[1])

        for _ in range(100):
            for s in rng.permutation(sorted(va)):
                s = int(s)
                cands = [r for r in sorted(vb2) if model.in_range(s, r)]
                if not cands:
                    continue
                r = int(rng.choice(cands))
                if conflict(model, (s, r), committed):
                    continue
                commit((s, r), False)
                g_cands = [g for g in sorted(vb2) if model.in_range(r, g)]
                if g_cands:
                    g = int(rng.choice(g_cands))
                    if not conflict(model, (r, g), committed):
                        commit((r, g), True)
            if committed:
                return committed, flags, va2, vb2
            # Unlucky draw; only retry while a lone feasible link exists.
            if not any(model.in_range(s, r) and model.set_feasible([(s, r)])
                       for s in va for r in vb):
                break
        return committed, flags, va2, vb2

    v2vsched = schedule_v2v(model, selection.v_a, selection.v_b,
                            selection.t_v2i, strict_causality,
                            pairing_builder=random_pairing)
    return _assemble("random", seed, model, selection, v2vsched,
                     strict_causality)


def schedule_noncoop(model, seed: int) -> SchemeResult:
    """RSU-only, distance-greedy service: in every slot the channel belongs
    to the nearest in-coverage vehicle, wanting or not, and the RSU transmits
    only when that vehicle still wants the content. With one shared speed the
    distance ranks cross once per pair, so each vehicle holds the channel for
    a single contiguous stretch around its closest approach; vehicles whose
    stretch is too short never finish and end unserved.

    Implementation is event-driven: between rank changes the target is
    constant, so whole spans are accumulated at once.
    """
    dt = model.slot_duration
    content = model.content_size
    remaining = {vid: content for vid in model.ids}
    v_b = set(model.ids)
    grants: list[Grant] = []
    served: list[int] = []
    clock = 0
    while v_b:
        if not any(model.in_service(i, clock) for i in v_b):
            nxt = next_service_slot(model, v_b, clock)
            if nxt is None:
                break
            clock = nxt
            continue
        in_cov = [i for i in model.ids if model.in_service(i, clock)]
        target = min(in_cov, key=lambda i: (model.rsu_distance(i, clock), i))
        t_win = model.service_window(target)
        events = [t_win[1] + 1]
        for j in model.ids:
            if j == target:
                continue
            win = model.service_window(j)
            if win is None:
                continue
            if clock < win[0] <= t_win[1]:
                events.append(win[0])  # a new arrival may take the channel
        for j in in_cov:
            if j == target:
                continue
            t_cross = _overtake_slot(model, target, j, clock)
            if t_cross is not None:
                events.append(t_cross)
        span = max(1, min(events) - clock)
        if target not in v_b:
            clock += span  # channel held by an already-served vehicle
            continue
        rem = remaining[target]
        r_edge = min(model.v2i_rates(target, clock, 1)[0],
                     model.v2i_rates(target, t_win[1], 1)[0])
        cap = min(span, int(math.ceil(rem / (r_edge * dt))) + 2) if r_edge > 0 else span
        rates = model.v2i_rates(target, clock, cap)
        cum = np.cumsum(rates) * dt
        idx = int(np.searchsorted(cum, rem, side="left"))
        if idx < cap:
            grants.append(Grant(target, clock, idx + 1))
            remaining[target] = 0.0
            v_b.discard(target)
            served.append(target)
            clock += idx + 1
        else:
            # The channel moves on before the download finishes; the spent
            # slots stay in the trace and the vehicle keeps its partial tally
            # in case a tie geometry ever hands the channel back.
            grants.append(Grant(target, clock, cap))
            remaining[target] = rem - float(cum[-1])
            clock += cap
    selection = V2ISelection(tuple(grants), sum(g.n_slots for g in grants),
                             tuple(served), tuple(sorted(v_b)), (),
                             incomplete=bool(v_b))
    v2vsched = V2VSchedule((), 0, tuple(sorted(v_b)))
    return SchemeResult("noncoop", seed, selection, v2vsched,
                        frozenset(served), frozenset(v_b),
                        getattr(model, "rate_mode", "midpoint"), False)


def _overtake_slot(model, winner: int, rival: int, clock: int) -> int | None:
    """First slot after `clock` where the rival outranks the winner, or None.

    Squared RSU distances differ by an affine function of the slot index, so
    the crossing is solved in closed form and then pinned by evaluation.
    """
    win_r = model.service_window(rival)
    d0w = model.rsu_distance(winner, clock)
    d0r = model.rsu_distance(rival, clock)
    d1w = model.rsu_distance(winner, clock + 1)
    d1r = model.rsu_distance(rival, clock + 1)
    f0 = d0r * d0r - d0w * d0w
    f1 = d1r * d1r - d1w * d1w
    slope = f1 - f0
    if slope >= 0 and f0 >= 0:
        return None  # gap never shrinks

    def beats(t):
        dr = model.rsu_distance(rival, t)
        dw = model.rsu_distance(winner, t)
        return (dr, rival) < (dw, winner)

    if slope == 0:
        t_guess = clock + 1
    else:
        t_guess = clock + max(1.0, -f0 / slope)
    t = int(math.floor(t_guess))
    t = max(clock + 1, t - 2)
    limit = win_r[1] if win_r is not None else clock
    # The crossing is affine, so the prediction is exact up to float noise;
    # a short scan pins the first integer slot.
    for _ in range(16):
        if t > limit:
            return None
        if beats(t):
            return t
        t += 1
    return None


def schedule_serial_tdma(model, seed: int) -> SchemeResult:
    """Everyone served one-by-one in entry order, no sharing. A vehicle whose
    window closes mid-download keeps its partial slots and ends unserved."""
    clock = 0
    grants, served, unserved = [], [], []
    for vid in model.ids:
        win = model.service_window(vid)
        if win is None:
            unserved.append(vid)
            continue
        start = max(clock, win[0])
        if start > win[1]:
            unserved.append(vid)
            continue
        m = model.slots_to_download(vid, start)
        if m is None:
            n = win[1] - start + 1  # transmit to the window edge, then give up
            grants.append(Grant(vid, start, n))
            unserved.append(vid)
            clock = start + n
        else:
            grants.append(Grant(vid, start, m))
            served.append(vid)
            clock = start + m
    selection = V2ISelection(tuple(grants), sum(g.n_slots for g in grants),
                             tuple(served), tuple(sorted(unserved)), (),
                             incomplete=bool(unserved))
    v2vsched = V2VSchedule((), 0, tuple(sorted(unserved)))
    return SchemeResult("serial-tdma", seed, selection, v2vsched,
                        frozenset(served), frozenset(unserved),
                        getattr(model, "rate_mode", "midpoint"), False)


def run_scheme(scheme: str, model, seed: int, strict_causality: bool = False,
               v2i_termination: str = "coverage") -> SchemeResult:
    if scheme == "proposed":
        return schedule_proposed(model, seed, strict_causality, v2i_termination)
    if scheme == "fcfs":
        return schedule_fcfs(model, seed, strict_causality)
    if scheme == "random":
        return schedule_random(model, seed, strict_causality)
    if scheme == "noncoop":
        return schedule_noncoop(model, seed)
    if scheme == "serial-tdma":
        return schedule_serial_tdma(model, seed)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
