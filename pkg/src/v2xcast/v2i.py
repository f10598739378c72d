"""Infrastructure-phase scheduling: utility-based selection of which vehicles
download the full content directly from the RSU.

At each grant boundary the scheduler scores every not-yet-served vehicle that
is inside the serving window and able to finish before leaving it. The score
is the number of RSU slots it needs plus the worst-hop slot count of its best
two-hop forwarding chain; the minimum-score vehicle wins the grant. The phase
ends once every vehicle is either granted or claimed by some recorded chain
(default), or, under the literal termination rule, once the last-entering
vehicle has itself been granted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Grant:
    vehicle: int
    start_slot: int  # wall-clock slot of the first transmission
    n_slots: int


@dataclass(frozen=True)
class ChainEstimate:
    """Tentative two-hop forwarding chain recorded at grant time."""
    vehicle: int
    first_hop: int | None
    second_hop: int | None


@dataclass(frozen=True)
class UtilityEval:
    vehicle: int
    v2i_slots: int          # slots to download from the RSU at this clock
    first_hop: int | None
    second_hop: int | None
    chain_slots: int        # worst hop of the tentative chain

    @property
    def utility(self) -> int:
        return self.v2i_slots + self.chain_slots


@dataclass(frozen=True)
class V2ISelection:
    grants: tuple[Grant, ...]
    t_v2i: int                          # transmit slots only, idle excluded
    v_a: tuple[int, ...]                # granted vehicles, in grant order
    v_b: tuple[int, ...]                # vehicles still lacking the content
    chains: tuple[ChainEstimate, ...]
    incomplete: bool                    # ran out of coverage or horizon


def slots_to_download(model, vid: int, start: int) -> int | None:
    """Slots for a full download starting at `start`; None when the vehicle
    cannot finish inside its serving window."""
    return model.slots_to_download(vid, start)


def two_hop_estimate(model, vid: int, candidates: list[int]) -> UtilityEval:
    """Best forwarding chain vid -> j -> g among `candidates`, with hop slot
    counts evaluated under the chain's own concurrency.

    Returns chain_slots only (v2i_slots filled by the caller; the returned
    eval carries 0 there). With no candidates at all the chain cost is 0;
    with candidates but none in range it is the horizon, which keeps the
    utility finite while deprioritizing isolated vehicles.
    """
    if not candidates:
        return UtilityEval(vid, 0, None, None, 0)
    best_j, best_rate = None, 0.0
    for j in candidates:
        r = model.rate_free(vid, j)
        if r > best_rate:
            best_j, best_rate = j, r
    if best_j is None:
        return UtilityEval(vid, 0, None, None, model.horizon)
    j = best_j
    best_g, best_rate = None, 0.0
    for g in candidates:
        if g == j:
            continue
        r = model.rate_free(j, g)
        if r > best_rate:
            best_g, best_rate = g, r
    if best_g is not None:
        chain = [(vid, j), (j, best_g)]
        sinrs = model.link_sinrs(chain)
        if all(s >= model.sinr_threshold for s in sinrs):
            rates = model.link_rates(chain)
            dt = model.slot_duration
            m1 = _ceil_slots(model.content_size, rates[0], dt)
            m2 = _ceil_slots(model.content_size, rates[1], dt)
            return UtilityEval(vid, 0, j, best_g, max(m1, m2))
    # Chain infeasible or no second receiver: fall back to the single hop.
    m1 = model.link_slots_free(vid, j)
    return UtilityEval(vid, 0, j, None, m1 if m1 is not None else model.horizon)


def _ceil_slots(bits: float, rate: float, dt: float) -> int:
    if rate <= 0.0:
        return 0
    return max(1, int(math.ceil(bits / (rate * dt))))


def evaluate_candidates(model, v_b: set[int], clock: int,
                        pool: set[int] | None = None) -> list[UtilityEval]:
    """Utility of every servable vehicle at the given clock.

    `pool` restricts who may be granted; chain targets always come from the
    full not-yet-served set v_b, claimed or not.
    """
    entered = [i for i in sorted(v_b) if model.entered(i, clock)]
    evals = []
    for vid in entered:
        if pool is not None and vid not in pool:
            continue
        if not model.in_service(vid, clock):
            continue
        m = slots_to_download(model, vid, clock)
        if m is None:
            continue
        others = [j for j in entered if j != vid]
        chain = two_hop_estimate(model, vid, others)
        evals.append(UtilityEval(vid, m, chain.first_hop, chain.second_hop,
                                 chain.chain_slots))
    return evals


def next_service_slot(model, v_b, clock: int) -> int | None:
    """Earliest slot strictly after idling starts at which any vehicle in v_b
    is servable; None when every remaining window has already closed."""
    upcoming = []
    for vid in v_b:
        win = model.service_window(vid)
        if win is not None and win[1] >= clock:
            upcoming.append(max(win[0], clock + 1))
    if not upcoming:
        return None
    nxt = min(upcoming)
    return nxt if nxt < model.horizon else None


def select_v2i_paths(model, termination: str = "coverage") -> V2ISelection:
    """Run the grant-selection loop over the whole vehicle population.

    termination="coverage" stops once granted vehicles plus their recorded
    chains claim everyone; vehicles already claimed by a chain are left to
    the sharing phase and are not grant candidates. "literal" instead keeps
    every ungranted vehicle eligible and stops only once the last-entering
    vehicle has been granted itself.
    """
    if termination not in ("coverage", "literal"):
        raise ValueError(f"unknown termination rule {termination!r}")
    all_ids = list(model.ids)
    last_id = max(all_ids)
    v_b: set[int] = set(all_ids)
    v_a: list[int] = []
    grants: list[Grant] = []
    chains: list[ChainEstimate] = []
    covered: set[int] = set()
    clock = 0
    t_v2i = 0
    incomplete = False

    def done() -> bool:
        if termination == "coverage":
            return covered >= set(all_ids)
        return last_id not in v_b

    while not done():
        if not v_b:
            break
        pool = v_b - covered if termination == "coverage" else set(v_b)
        evals = evaluate_candidates(model, v_b, clock, pool=pool)
        if not evals:
            # Idle: jump to the next slot at which any grantable vehicle
            # becomes servable. Idle slots are not charged to the phase.
            nxt = next_service_slot(model, pool, clock)
            if nxt is None:
                incomplete = True
                break
            clock = nxt
            continue
        winner = min(evals, key=lambda e: (e.utility, e.vehicle))
        grants.append(Grant(winner.vehicle, clock, winner.v2i_slots))
        chains.append(ChainEstimate(winner.vehicle, winner.first_hop,
                                    winner.second_hop))
        v_a.append(winner.vehicle)
        v_b.discard(winner.vehicle)
        covered.add(winner.vehicle)
        if winner.first_hop is not None:
            covered.add(winner.first_hop)
        if winner.second_hop is not None:
            covered.add(winner.second_hop)
        t_v2i += winner.v2i_slots
        clock += winner.v2i_slots
        if clock > model.horizon:
            incomplete = True
            break

    if termination == "coverage" and not covered >= set(all_ids):
        incomplete = True
    return V2ISelection(
        grants=tuple(grants),
        t_v2i=t_v2i,
        v_a=tuple(v_a),
        v_b=tuple(sorted(v_b)),
        chains=tuple(chains),
        incomplete=incomplete,
    )
