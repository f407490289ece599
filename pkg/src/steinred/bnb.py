"""Exact solving: best-first branch and bound over reduced instances.

Each node carries a full instance copy plus the event trail that maps
its trees back to the search root. Nodes are reduced with a light pass
before branching; every incumbent found anywhere in the tree is mapped
back to the root instance immediately and re-costed there, so the
reported value is always a certified tree on the caller's instance.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import time
from collections import Counter
from dataclasses import dataclass, field

from .events import SAFE_BRANCH, DeleteEdge, DeleteVertex, FixTerminal, backmap_tree
from .model import (
    EPS,
    INF,
    InfeasibleError,
    PcInstance,
    SteinerTree,
    evaluate_cost,
    mst_of_induced,
    tree_from_edges,
)
from .reduce import ReduceResult, reduce_loop

log = logging.getLogger("steinred.bnb")

PRUNE_EPS = 1e-9


@dataclass
class BnbStats:
    nodes: int = 0
    lower_bound: float = -INF
    upper_bound: float = INF
    optimal: bool = False
    reductions: Counter = field(default_factory=Counter)


@dataclass
class SolveResult:
    value: float
    tree: SteinerTree  # on the instance handed to exact_solve
    stats: BnbStats
    vertices_before: int
    vertices_after: int
    edges_before: int
    edges_after: int


def _count_events(stats: BnbStats, events) -> None:
    for ev in events:
        stats.reductions[type(ev).__name__] += 1


def _branch_vertex(inst: PcInstance) -> int | None:
    """Vertex to branch on, or None when every alive vertex is fixed."""
    pots = [t for t in inst.potential_terminals() if not inst.is_fixed(t)]
    if pots:
        return min(
            pots, key=lambda t: (-inst.prizes[t] * (1 + inst.degree(t)), t)
        )
    free = [v for v in inst.alive_vertices() if not inst.is_fixed(v)]
    if free:
        return min(free, key=lambda v: (-inst.degree(v), v))
    return None


def _exclude_events(inst: PcInstance, v: int) -> list:
    evs = [
        DeleteEdge(e, *inst.ends(e), inst.cost(e), SAFE_BRANCH)
        for e, _ in inst.neighbors(v)
    ]
    evs.append(DeleteVertex(v, inst.prizes[v], SAFE_BRANCH))
    return evs


def branch_and_bound(
    root: PcInstance,
    upper: float = INF,
    incumbent: SteinerTree | None = None,
    node_limit: int = None,
    reduce_rounds: int = 1,
    time_limit: float = None,
) -> tuple[float, SteinerTree, BnbStats]:
    """Prove an optimum of ``root``; returns (value, tree on root, stats)."""
    from .events import apply_event  # local alias for the hot loop

    deadline = None if time_limit is None else time.perf_counter() + time_limit
    stats = BnbStats(upper_bound=upper)
    best_cost = upper
    best_tree = incumbent
    ids = itertools.count()
    heap = [(-INF, 0, next(ids))]
    payload = {0: (root.copy(), [])}

    while heap:
        if node_limit is not None and stats.nodes >= node_limit:
            break
        if deadline is not None and time.perf_counter() > deadline:
            break
        lb, depth, nid = heapq.heappop(heap)
        inst, trail = payload.pop(nid)
        if best_tree is not None and lb >= best_cost - PRUNE_EPS:
            continue
        stats.nodes += 1
        try:
            res = reduce_loop(
                inst, initial_upper=best_cost, probes=0, max_rounds=reduce_rounds
            )
        except InfeasibleError:
            continue
        _count_events(stats, res.events)
        full_trail = trail + res.events
        if res.incumbent is not None:
            tree0 = backmap_tree(root, full_trail, res.incumbent)
            cost0 = evaluate_cost(root, tree0)
            if cost0 > res.upper_bound + 1e-6:
                raise AssertionError(
                    f"mapped tree costs {cost0}, node claimed {res.upper_bound}"
                )
            if best_tree is None or cost0 < best_cost - EPS:
                best_cost = min(best_cost, cost0)
                best_tree = tree0
                log.debug("incumbent %.6f at node %d depth %d", cost0, nid, depth)
        node_lb = max(lb, res.lower_bound)
        if best_tree is not None and node_lb >= best_cost - PRUNE_EPS:
            continue
        work = res.instance
        v = _branch_vertex(work)
        if v is None:
            # everything alive is fixed: the one candidate tree is the MST
            alive = work.alive_vertices()
            edges = mst_of_induced(work, alive)
            if edges is None:
                continue
            tree = tree_from_edges(work, edges, extra_vertices=alive)
            tree0 = backmap_tree(root, full_trail, tree)
            cost0 = evaluate_cost(root, tree0)
            if best_tree is None or cost0 < best_cost - EPS:
                best_cost = min(best_cost, cost0)
                best_tree = tree0
            continue
        for make in (lambda: [FixTerminal(v)], lambda: _exclude_events(work, v)):
            child = work.copy()
            child_events = make()
            for ev in child_events:
                apply_event(child, ev)
            cid = next(ids)
            payload[cid] = (child, full_trail + child_events)
            heapq.heappush(heap, (node_lb, depth + 1, cid))

    if best_tree is None:
        raise InfeasibleError("search ended without any feasible tree")
    stats.upper_bound = best_cost
    if heap:
        stats.lower_bound = min(min(item[0] for item in heap), best_cost)
        stats.optimal = stats.lower_bound >= best_cost - PRUNE_EPS
    else:
        stats.lower_bound = best_cost
        stats.optimal = True
    return best_cost, best_tree, stats


def exact_solve(
    inst: PcInstance,
    node_limit: int = None,
    probes: int = None,
    root_rounds: int = None,
    time_limit: float = None,
) -> SolveResult:
    """Heavy root reduction, then branch and bound, then map back."""
    t0 = time.perf_counter()
    kw = {}
    if probes is not None:
        kw["probes"] = probes
    if root_rounds is not None:
        kw["max_rounds"] = root_rounds
    nv0 = inst.n_alive_vertices()
    ne0 = inst.n_alive_edges()
    base = reduce_loop(inst, **kw)
    remaining = None
    if time_limit is not None:
        remaining = max(0.0, time_limit - (time.perf_counter() - t0))
    value, tree_r, stats = branch_and_bound(
        base.instance,
        upper=base.upper_bound,
        incumbent=base.incumbent,
        node_limit=node_limit,
        time_limit=remaining,
    )
    _count_events(stats, base.events)
    tree0 = backmap_tree(inst, base.events, tree_r)
    value0 = evaluate_cost(inst, tree0)
    if value0 > value + 1e-6:
        raise AssertionError(
            f"root mapping raised the value from {value} to {value0}"
        )
    stats.upper_bound = value0
    stats.lower_bound = min(stats.lower_bound, value0)
    return SolveResult(
        value0,
        tree0,
        stats,
        vertices_before=nv0,
        vertices_after=base.instance.n_alive_vertices(),
        edges_before=ne0,
        edges_after=base.instance.n_alive_edges(),
    )
