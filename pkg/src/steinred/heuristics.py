"""Primal heuristics: tree construction, strong pruning, local search.

``construct_tree`` grows a tree from a start vertex, repeatedly
attaching the terminal with the cheapest discounted connection walk.
Unfixed positive-prize vertices connect through the capped search from
:mod:`.walks` (their own prize caps the walk, so only profitable
attachments qualify); fixed vertices connect through plain shortest
paths and must all be attached, otherwise InfeasibleError is raised.

``prune_and_improve`` alternates strong pruning (rooted net-worth
recursion dropping subtrees that cost more than they collect) with
re-attachment of left-out positive-prize vertices, accepting strict
improvements only. ``heuristic_tree`` runs the whole pipeline from the
five most valuable terminals and keeps the best result, breaking ties
by the lexicographically smallest vertex set.
"""

from __future__ import annotations

from .model import (
    EPS,
    INF,
    InfeasibleError,
    PcInstance,
    SteinerTree,
    ValidationError,
    evaluate_cost,
    shortest_paths,
    tree_from_edges,
)
from .walks import _reconstruct, _search

MAX_IMPROVE_ROUNDS = 200


def _splice_walk(walk: list) -> list:
    """Drop loops so every vertex appears once, keeping the endpoints."""
    out = []
    pos: dict = {}
    for v in walk:
        if v in pos:
            for dropped in out[pos[v] + 1 :]:
                del pos[dropped]
            del out[pos[v] + 1 :]
        else:
            out.append(v)
            pos[v] = len(out) - 1
    return out


def _truncate_at(walk: list, inside: set) -> list:
    """Prefix of the walk up to its first vertex inside the set."""
    for i, v in enumerate(walk):
        if i > 0 and v in inside:
            return walk[: i + 1]
    return walk


class _Attachments:
    """Connection walks from each terminal, computed once per instance."""

    def __init__(self, inst: PcInstance):
        self.inst = inst
        self.labels: dict = {}  # t -> {vertex: label}
        self._walks: dict = {}  # t -> reconstruction data
        for t in sorted(inst.fixed_terminals()):
            dist, pred = shortest_paths(inst, t)
            self.labels[t] = {
                v: dist[v] for v in inst.alive_vertices() if dist[v] < INF
            }
            self._walks[t] = ("tree", pred)
        for t in inst.potential_terminals():
            if inst.is_fixed(t):
                continue
            _, best_state, sv, sp, sl = _search(
                inst, t, inst.prizes[t], clamped=False
            )
            self.labels[t] = {v: sl[si] for v, si in best_state.items()}
            self._walks[t] = ("states", (best_state, sv, sp))

    def walk(self, t: int, v: int) -> list:
        kind, data = self._walks[t]
        if kind == "states":
            best_state, sv, sp = data
            return _reconstruct(sv, sp, best_state[v])
        pred = data
        path = [v]
        while path[-1] != t:
            e = pred[path[-1]]
            a, b = self.inst.ends(e)
            path.append(a if b == path[-1] else b)
        path.reverse()
        return path


def construct_tree(
    inst: PcInstance, start: int, atts: _Attachments = None
) -> SteinerTree:
    if not inst.vertex_alive(start):
        raise ValidationError(f"start vertex {start} is not alive")
    if atts is None:
        atts = _Attachments(inst)
    in_tree = {start}
    edges: set = set()
    fixed = set(inst.fixed_terminals())
    pending = {
        t
        for t in atts.labels
        if t != start and not (t in in_tree)
    }
    # best known hook into the tree per pending terminal: (label, vertex)
    best: dict = {}

    def absorb(v: int) -> None:
        in_tree.add(v)
        for t in list(pending):
            if t == v:
                pending.discard(t)
                best.pop(t, None)
                continue
            lbl = atts.labels[t].get(v)
            if lbl is not None and (t not in best or lbl < best[t][0]):
                best[t] = (lbl, v)

    absorb(start)
    while True:
        candidates = [
            (best[t][0], t) for t in pending if t in best
        ]
        if not candidates:
            if pending & fixed:
                raise InfeasibleError(
                    f"fixed terminals {sorted(pending & fixed)} cannot be attached"
                )
            break
        _, t = min(candidates)
        walk = atts.walk(t, best[t][1])
        path = _splice_walk(_truncate_at(walk, in_tree))
        pending.discard(t)
        # path runs t -> tree: its last vertex is the only one already absorbed
        for a, b in zip(path, path[1:]):
            edges.add(inst.find_edge(a, b))
        for v in path:
            if v not in in_tree:
                absorb(v)
    return tree_from_edges(inst, sorted(edges), extra_vertices=[start])


def strong_prune(inst: PcInstance, tree: SteinerTree) -> SteinerTree:
    """Drop every subtree that costs more than the prizes it collects."""
    fixed = sorted(v for v in tree.vertices if inst.is_fixed(v))
    if fixed:
        root = fixed[0]
    else:
        root = min(tree.vertices, key=lambda v: (-inst.prizes[v], v))
    adj: dict = {v: [] for v in tree.vertices}
    for e in tree.edges:
        u, v = inst.ends(e)
        adj[u].append((v, e))
        adj[v].append((u, e))

    parent = {root: (None, None)}
    order = [root]
    stack = [root]
    while stack:
        u = stack.pop()
        for w, e in adj[u]:
            if w not in parent:
                parent[w] = (u, e)
                order.append(w)
                stack.append(w)

    net: dict = {}
    for u in reversed(order):
        value = INF if inst.is_fixed(u) else inst.prizes[u]
        for w, e in adj[u]:
            if parent.get(w, (None, None))[0] == u:
                gain = net[w] - inst.cost(e)
                if gain > 0.0:
                    value += gain
        net[u] = value

    keep = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        for w, e in adj[u]:
            if parent.get(w, (None, None))[0] != u:
                continue
            if net[w] - inst.cost(e) < -EPS:
                continue  # the whole subtree is a net loss
            keep.add(w)
            stack.append(w)
    kept_edges = [
        e for e in tree.edges if all(x in keep for x in inst.ends(e))
    ]
    return tree_from_edges(inst, sorted(kept_edges), extra_vertices=[root])


def _reattach_once(inst: PcInstance, tree: SteinerTree) -> SteinerTree | None:
    """Best single re-attachment of an excluded positive-prize vertex."""
    base = evaluate_cost(inst, tree)
    best = None
    for t in inst.potential_terminals():
        if t in tree.vertices:
            continue
        dist, pred = shortest_paths(inst, t)
        hooks = [(dist[v], v) for v in sorted(tree.vertices) if dist[v] < INF]
        if not hooks:
            continue
        d, v = min(hooks)
        if d >= inst.prizes[t] + EPS:
            continue  # cannot pay for itself even before extra prizes
        path = [v]
        while path[-1] != t:
            e = pred[path[-1]]
            a, b = inst.ends(e)
            path.append(a if b == path[-1] else b)
        path.reverse()
        path = _truncate_at(path, set(tree.vertices))
        new_edges = set(tree.edges)
        for a, b in zip(path, path[1:]):
            new_edges.add(inst.find_edge(a, b))
        cand = tree_from_edges(inst, sorted(new_edges))
        cost = evaluate_cost(inst, cand)
        if cost < base - EPS and (best is None or cost < best[0] - EPS):
            best = (cost, cand)
    return None if best is None else best[1]


def prune_and_improve(inst: PcInstance, tree: SteinerTree) -> SteinerTree:
    tree = strong_prune(inst, tree)
    for _ in range(MAX_IMPROVE_ROUNDS):
        better = _reattach_once(inst, tree)
        if better is None:
            return tree
        tree = strong_prune(inst, better)
    return tree


def heuristic_tree(inst: PcInstance) -> tuple:
    """(cost, tree): the best tree found across the standard starts."""
    alive = inst.alive_vertices()
    if not alive:
        raise ValidationError("instance has no vertices")
    terminals = sorted(
        (v for v in alive if inst.prizes[v] > 0.0 or inst.is_fixed(v)),
        key=lambda v: (-inst.prizes[v], v),
    )
    if not terminals:
        v = alive[0]
        tree = SteinerTree(frozenset([v]), frozenset())
        return evaluate_cost(inst, tree), tree
    starts = list(terminals[:5])
    fixed = [v for v in terminals if inst.is_fixed(v)]
    if fixed and not any(inst.is_fixed(v) for v in starts):
        starts.append(min(fixed))
    atts = _Attachments(inst)
    best = None
    for start in starts:
        try:
            tree = prune_and_improve(inst, construct_tree(inst, start, atts))
        except InfeasibleError:
            # a start cut off from the fixed terminals; other starts may do
            continue
        cost = evaluate_cost(inst, tree)
        key = (cost, tuple(sorted(tree.vertices)))
        if best is None or key < best[0]:
            best = (key, tree)
    if best is None:
        raise InfeasibleError("no tree can reach every fixed terminal")
    return best[0][0], best[1]
