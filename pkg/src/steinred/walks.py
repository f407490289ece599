"""Prize-constrained walks and the heuristic searches built on them.

A walk here is a vertex sequence in which consecutive vertices share an
alive edge. It is *prize-constrained* when no positive-prize vertex and
neither endpoint occurs more than once; zero-prize interior vertices may
repeat. Its cost ``walk_cost`` discounts the prizes of interior
positive-prize vertices against the edge costs.

*Breakpoints* of a walk are its first and last position plus every
position holding a positive-prize vertex. ``prize_constrained_length``
is the maximum ``walk_cost`` over all subwalks between two breakpoints;
``left_rooted_length`` restricts the maximum to prefixes that end at a
breakpoint (the empty prefix counts only when the walk starts at a
positive-prize vertex).

Both searches in this module are heuristic upper-bounding procedures:
they may miss walks, but every value they report is recomputed from the
reconstructed witness walk, never read off internal search labels (the
labels track suffix information only and can undershoot the true
length). Setting ``audit_hook`` lets a test harness re-verify every
reported bound.
"""

from __future__ import annotations

import heapq
from typing import Callable, Optional

from .model import EPS, INF, PcInstance, ValidationError

# Called as audit_hook(kind, inst, walk, value) for every finite bound
# this module hands out; kind is "pc" or "left". Purely diagnostic.
audit_hook: Optional[Callable[[str, PcInstance, list, float], None]] = None

# How many times a zero-prize vertex may be expanded in one search.
# Positive-prize vertices are expanded at most once.
RESEED_LIMIT = 4


def _notify(kind: str, inst: PcInstance, walk: list, value: float) -> None:
    if audit_hook is not None:
        audit_hook(kind, inst, walk, value)


def walk_edges(inst: PcInstance, walk: list) -> list:
    out = []
    for a, b in zip(walk, walk[1:]):
        e = inst.find_edge(a, b)
        if e is None:
            raise ValidationError(f"walk hop {a}-{b} is not an edge")
        out.append(e)
    return out


def is_prize_constrained(inst: PcInstance, walk: list) -> bool:
    counts: dict = {}
    for v in walk:
        counts[v] = counts.get(v, 0) + 1
    first, last = walk[0], walk[-1]
    return all(
        k == 1 or (inst.prizes[v] <= 0.0 and v != first and v != last)
        for v, k in counts.items()
    )


def walk_cost(inst: PcInstance, walk: list) -> float:
    """Edge costs minus prizes of interior positive-prize vertices."""
    total = sum(inst.cost(e) for e in walk_edges(inst, walk))
    for v in walk[1:-1]:
        if inst.prizes[v] > 0.0:
            total -= inst.prizes[v]
    return total


def _prefixes(inst: PcInstance, walk: list):
    """(edge-cost prefix sums, prize prefix sums, breakpoint positions)."""
    pe = [0.0]
    for e in walk_edges(inst, walk):
        pe.append(pe[-1] + inst.cost(e))
    pz = [0.0]
    for v in walk:
        pz.append(pz[-1] + (inst.prizes[v] if inst.prizes[v] > 0.0 else 0.0))
    last = len(walk) - 1
    breaks = [
        i
        for i, v in enumerate(walk)
        if i == 0 or i == last or inst.prizes[v] > 0.0
    ]
    return pe, pz, breaks


def prize_constrained_length(inst: PcInstance, walk: list) -> float:
    if not is_prize_constrained(inst, walk):
        raise ValidationError("walk repeats an endpoint or a positive-prize vertex")
    if len(walk) < 2:
        return 0.0
    pe, pz, breaks = _prefixes(inst, walk)
    best = -INF
    # cost of subwalk (i, j) = edges between them minus strictly interior prizes
    for a, i in enumerate(breaks):
        for j in breaks[a + 1 :]:
            best = max(best, pe[j] - pe[i] - (pz[j] - pz[i + 1]))
    return best


def left_rooted_length(inst: PcInstance, walk: list) -> float:
    if not is_prize_constrained(inst, walk):
        raise ValidationError("walk repeats an endpoint or a positive-prize vertex")
    if len(walk) < 2:
        return 0.0
    pe, pz, breaks = _prefixes(inst, walk)
    best = -INF
    for j in breaks:
        if j == 0:
            if inst.prizes[walk[0]] > 0.0:
                best = max(best, 0.0)
            continue
        best = max(best, pe[j] - (pz[j] - pz[1]))
    return best


def _reconstruct(st_vertex: list, st_parent: list, si: int) -> list:
    walk = []
    while si >= 0:
        walk.append(st_vertex[si])
        si = st_parent[si]
    walk.reverse()
    return walk


def _trim_to_endpoint(walk: list) -> list:
    """Cut the walk at the first visit to its final vertex.

    The search may route a state through its own destination (a zero-prize
    vertex can be re-entered after a profitable detour), which a walk is
    not allowed to do. The prefix up to the first visit is a legal walk,
    and every relaxation along it passed the cap check, so trimming never
    pushes the recomputed length over the cap.
    """
    first = walk.index(walk[-1])
    return walk[: first + 1]


def _search(
    inst: PcInstance,
    source: int,
    cap: float,
    *,
    clamped: bool,
    target: Optional[int] = None,
    skip_edge: Optional[int] = None,
    allow_equal: bool = False,
    budget: Optional[int] = None,
):
    """Label-correcting search under the arrival cap.

    Every relaxation is blocked when the pre-discount arrival value
    reaches the cap (or exceeds it, with ``allow_equal``); the prize of a
    positive-prize vertex other than source and target is subtracted on
    arrival, clamped at zero in ``clamped`` mode. Positive-prize vertices
    are expanded at most once, others at most RESEED_LIMIT times, and the
    search stops once ``budget`` edge examinations have been spent.

    Returns ``(hit_state, best_state, st_vertex, st_parent, st_label)``
    where ``hit_state`` is the state index of the first pop of ``target``
    (or None) and ``best_state`` maps each reached vertex to its best
    state index.
    """
    prizes = inst.prizes
    st_vertex = [source]
    st_parent = [-1]
    st_label = [0.0]
    best_label = {source: 0.0}
    best_state = {source: 0}
    expansions: dict = {}
    heap = [(0.0, source, 0)]
    examined = 0

    while heap:
        label, v, si = heapq.heappop(heap)
        if best_state.get(v) != si:
            continue  # superseded by a later improvement
        if v == target:
            return si, best_state, st_vertex, st_parent, st_label
        limit = 1 if (prizes[v] > 0.0 and v != source) else RESEED_LIMIT
        if expansions.get(v, 0) >= limit:
            continue
        if budget is not None and examined >= budget:
            break
        expansions[v] = expansions.get(v, 0) + 1
        for eid, w in inst.neighbors(v):
            if eid == skip_edge:
                continue
            examined += 1
            arrival = label + inst.cost(eid)
            if allow_equal:
                if arrival > cap + EPS:
                    continue
            elif arrival >= cap - EPS:
                continue
            if w == source:
                continue
            if prizes[w] > 0.0 and w != target:
                new_label = arrival - prizes[w]
                if clamped and new_label < 0.0:
                    new_label = 0.0
                if expansions.get(w, 0) >= 1:
                    continue  # positive-prize vertices settle once
            else:
                new_label = arrival
                if expansions.get(w, 0) >= RESEED_LIMIT:
                    continue
            if w in best_label and new_label >= best_label[w] - EPS:
                continue
            st_vertex.append(w)
            st_parent.append(si)
            st_label.append(new_label)
            best_label[w] = new_label
            best_state[w] = len(st_vertex) - 1
            heapq.heappush(heap, (new_label, w, len(st_vertex) - 1))
    return None, best_state, st_vertex, st_parent, st_label


def edge_walk_bound(
    inst: PcInstance,
    eid: int,
    *,
    allow_equal: bool = True,
    budget: Optional[int] = None,
) -> tuple:
    """Upper bound on the prize-constrained distance between the ends of
    ``eid`` among walks avoiding ``eid`` itself.

    Runs the capped search from both ends (cap = the edge's own cost) and
    returns ``(value, walk)`` where value is the recomputed
    prize-constrained length of the better witness; ``(INF, None)`` when
    neither direction finds one. With ``allow_equal`` the value may match
    the cap to within EPS, otherwise it is strictly below it.
    """
    u, v = inst.ends(eid)
    cap = inst.cost(eid)
    best_val, best_walk = INF, None
    for s, t in ((u, v), (v, u)):
        hit, _, sv, sp, _ = _search(
            inst,
            s,
            cap,
            clamped=True,
            target=t,
            skip_edge=eid,
            allow_equal=allow_equal,
            budget=budget,
        )
        if hit is None:
            continue
        walk = _trim_to_endpoint(_reconstruct(sv, sp, hit))
        val = prize_constrained_length(inst, walk)
        if val < best_val:
            best_val, best_walk = val, walk
    if best_walk is not None:
        _notify("pc", inst, best_walk, best_val)
    return best_val, best_walk


def left_reach(
    inst: PcInstance, t0: int, *, budget: Optional[int] = None
) -> dict:
    """Vertices provably tied to the positive-prize vertex ``t0``.

    Returns ``{vertex: witness walk}`` for every vertex (other than t0)
    reached by a walk whose recomputed left-rooted length stays strictly
    below the prize of t0. Any solution containing such a vertex can be
    extended through the witness to one containing t0 at no extra cost.
    """
    cap = inst.prizes[t0]
    if cap <= 0.0:
        return {}
    _, best_state, sv, sp, _ = _search(
        inst, t0, cap, clamped=False, budget=budget
    )
    members = {}
    for v in sorted(best_state):
        if v == t0:
            continue
        walk = _trim_to_endpoint(_reconstruct(sv, sp, best_state[v]))
        val = left_rooted_length(inst, walk)
        if val < cap - EPS:
            members[v] = walk
            _notify("left", inst, walk, val)
    return members
