"""Core model: prize-collecting Steiner tree instances and solutions.

Vertex and edge ids are dense integers handed out at construction time and
they stay stable under reductions: deleted entries are tombstoned, never
renumbered, so event logs and edge ancestry stay meaningful for the whole
lifetime of an instance.
"""

from __future__ import annotations

import hashlib
import heapq
import math
from dataclasses import dataclass

INF = math.inf

#: absolute tolerance for all cost comparisons
EPS = 1e-9

CLASS_PC = "PC"
CLASS_RPC = "RPC"
CLASS_SPG = "SPG"


class ValidationError(ValueError):
    """An instance or a solution violates a structural invariant."""


class InfeasibleError(RuntimeError):
    """The (sub)problem admits no feasible solution."""


def feq(a: float, b: float) -> bool:
    return abs(a - b) <= EPS


def flt(a: float, b: float) -> bool:
    return a < b - EPS


def fgt(a: float, b: float) -> bool:
    return a > b + EPS


class PcInstance:
    """Undirected graph with positive edge costs, prizes and fixed terminals.

    The objective of a candidate tree S is

        cost(S) = sum of edge costs of S + sum of prizes outside S + offset

    where ``offset`` accumulates value moved out of the graph by reductions.
    Vertices with a positive prize are the potential terminals; fixed
    terminals must be part of every feasible solution and may or may not
    carry a prize of their own.
    """

    def __init__(self, n_vertices: int, offset: float = 0.0):
        if n_vertices < 0:
            raise ValidationError("vertex count must be non-negative")
        self._n = n_vertices
        self.prizes = [0.0] * n_vertices
        self._fixed = [False] * n_vertices
        self._v_alive = [True] * n_vertices
        self._e_tail: list[int] = []
        self._e_head: list[int] = []
        self._e_cost: list[float] = []
        self._e_alive: list[bool] = []
        # vertex -> {edge id: other endpoint}
        self._adj: list[dict[int, int]] = [dict() for _ in range(n_vertices)]
        self.offset = float(offset)

    # ------------------------------------------------------------------ build

    @property
    def n_vertices(self) -> int:
        """Size of the vertex id space (tombstones included)."""
        return self._n

    @property
    def next_edge_id(self) -> int:
        """The id the next ``add_edge`` call will hand out."""
        return len(self._e_tail)

    def add_edge(self, u: int, v: int, cost: float) -> int:
        if u == v:
            raise ValidationError(f"self-loop at vertex {u}")
        if not (self._v_alive[u] and self._v_alive[v]):
            raise ValidationError(f"edge {u}-{v} touches a deleted vertex")
        if cost <= 0:
            raise ValidationError(f"edge {u}-{v} has non-positive cost {cost}")
        if self.find_edge(u, v) is not None:
            raise ValidationError(f"parallel edge {u}-{v}")
        eid = len(self._e_tail)
        self._e_tail.append(u)
        self._e_head.append(v)
        self._e_cost.append(float(cost))
        self._e_alive.append(True)
        self._adj[u][eid] = v
        self._adj[v][eid] = u
        return eid

    def set_prize(self, v: int, prize: float) -> None:
        if prize < 0:
            raise ValidationError(f"negative prize at vertex {v}")
        self.prizes[v] = float(prize)

    def fix_vertex(self, v: int) -> None:
        if not self._v_alive[v]:
            raise ValidationError(f"cannot fix deleted vertex {v}")
        self._fixed[v] = True

    # ------------------------------------------------------------------ query

    def vertex_alive(self, v: int) -> bool:
        return self._v_alive[v]

    def edge_alive(self, e: int) -> bool:
        return self._e_alive[e]

    def is_fixed(self, v: int) -> bool:
        return self._fixed[v]

    def cost(self, e: int) -> float:
        return self._e_cost[e]

    def ends(self, e: int) -> tuple[int, int]:
        return self._e_tail[e], self._e_head[e]

    def find_edge(self, u: int, v: int) -> int | None:
        a, b = (u, v) if len(self._adj[u]) <= len(self._adj[v]) else (v, u)
        for eid, other in self._adj[a].items():
            if other == b:
                return eid
        return None

    def neighbors(self, v: int) -> list[tuple[int, int]]:
        """Incident (edge id, other endpoint) pairs in ascending edge id."""
        return sorted(self._adj[v].items())

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def alive_vertices(self) -> list[int]:
        return [v for v in range(self._n) if self._v_alive[v]]

    def alive_edges(self) -> list[int]:
        return [e for e in range(len(self._e_tail)) if self._e_alive[e]]

    def n_alive_vertices(self) -> int:
        return sum(self._v_alive)

    def n_alive_edges(self) -> int:
        return sum(self._e_alive)

    def potential_terminals(self) -> list[int]:
        return [v for v in range(self._n) if self._v_alive[v] and self.prizes[v] > 0.0]

    def fixed_terminals(self) -> list[int]:
        return [v for v in range(self._n) if self._v_alive[v] and self._fixed[v]]

    def total_prize(self) -> float:
        return sum(self.prizes[v] for v in range(self._n) if self._v_alive[v])

    @property
    def class_tag(self) -> str:
        """Problem class, derived from state: PC, RPC or SPG.

        The tag only ever moves forward (PC -> RPC -> SPG) because fixing is
        irreversible and deleting a potential terminal can only shrink the
        set of unfixed prizes.
        """
        fixed = self.fixed_terminals()
        if not fixed:
            return CLASS_PC
        fixed_set = set(fixed)
        if all(t in fixed_set for t in self.potential_terminals()):
            return CLASS_SPG
        return CLASS_RPC

    # ------------------------------------------------------------------ mutate

    def delete_edge(self, e: int) -> None:
        if not self._e_alive[e]:
            raise ValidationError(f"edge {e} already deleted")
        self._e_alive[e] = False
        del self._adj[self._e_tail[e]][e]
        del self._adj[self._e_head[e]][e]

    def delete_vertex(self, v: int) -> None:
        """Remove an isolated vertex. Incident edges must be deleted first."""
        if not self._v_alive[v]:
            raise ValidationError(f"vertex {v} already deleted")
        if self._adj[v]:
            raise ValidationError(f"vertex {v} still has incident edges")
        if self._fixed[v]:
            raise ValidationError(f"vertex {v} is a fixed terminal")
        self._v_alive[v] = False
        self.prizes[v] = 0.0

    def copy(self) -> "PcInstance":
        inst = PcInstance.__new__(PcInstance)
        inst._n = self._n
        inst.prizes = list(self.prizes)
        inst._fixed = list(self._fixed)
        inst._v_alive = list(self._v_alive)
        inst._e_tail = list(self._e_tail)
        inst._e_head = list(self._e_head)
        inst._e_cost = list(self._e_cost)
        inst._e_alive = list(self._e_alive)
        inst._adj = [dict(d) for d in self._adj]
        inst.offset = self.offset
        return inst

    # ------------------------------------------------------------------ global

    def components(self) -> list[list[int]]:
        seen = [False] * self._n
        comps = []
        for s in range(self._n):
            if not self._v_alive[s] or seen[s]:
                continue
            comp = [s]
            seen[s] = True
            stack = [s]
            while stack:
                u = stack.pop()
                for _, w in self._adj[u].items():
                    if not seen[w]:
                        seen[w] = True
                        comp.append(w)
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def connected(self) -> bool:
        return len(self.components()) <= 1

    def fingerprint(self) -> str:
        h = hashlib.sha1()
        h.update(f"n={self._n};off={self.offset!r}".encode())
        for v in range(self._n):
            if self._v_alive[v]:
                h.update(f"v{v}:{self.prizes[v]!r}:{int(self._fixed[v])}".encode())
        for e in range(len(self._e_tail)):
            if self._e_alive[e]:
                h.update(f"e{e}:{self._e_tail[e]}:{self._e_head[e]}:{self._e_cost[e]!r}".encode())
        return h.hexdigest()


# ---------------------------------------------------------------------- trees


@dataclass(frozen=True)
class SteinerTree:
    """A candidate solution: a set of vertices spanned by a set of edges."""

    vertices: frozenset
    edges: frozenset


def tree_from_edges(inst: PcInstance, edges, extra_vertices=()) -> SteinerTree:
    vs = set(extra_vertices)
    for e in edges:
        u, v = inst.ends(e)
        vs.add(u)
        vs.add(v)
    return SteinerTree(frozenset(vs), frozenset(edges))


def validate_tree(inst: PcInstance, tree: SteinerTree, require_fixed: bool = True) -> None:
    """Raise ValidationError naming the violated invariant, if any."""
    if not tree.vertices:
        raise ValidationError("tree is empty")
    for v in tree.vertices:
        if v < 0 or v >= inst.n_vertices or not inst.vertex_alive(v):
            raise ValidationError(f"tree vertex {v} is not an alive vertex")
    for e in tree.edges:
        if e < 0 or e >= len(inst._e_tail) or not inst.edge_alive(e):
            raise ValidationError(f"tree edge {e} is not an alive edge")
        u, v = inst.ends(e)
        if u not in tree.vertices or v not in tree.vertices:
            raise ValidationError(f"tree edge {e} leaves the vertex set")
    if len(tree.edges) != len(tree.vertices) - 1:
        raise ValidationError(
            f"edge count {len(tree.edges)} != vertex count {len(tree.vertices)} - 1"
        )
    # connectivity over tree edges only
    adj: dict[int, list[int]] = {v: [] for v in tree.vertices}
    for e in tree.edges:
        u, v = inst.ends(e)
        adj[u].append(v)
        adj[v].append(u)
    start = next(iter(tree.vertices))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != len(tree.vertices):
        raise ValidationError("tree is not connected")
    if require_fixed:
        for t in inst.fixed_terminals():
            if t not in tree.vertices:
                raise ValidationError(f"missing fixed terminal {t}")


def evaluate_cost(inst: PcInstance, tree: SteinerTree) -> float:
    """Objective value of a tree: edges plus foregone prizes plus offset."""
    validate_tree(inst, tree, require_fixed=True)
    total = inst.offset
    for e in tree.edges:
        total += inst.cost(e)
    for v in range(inst.n_vertices):
        if inst.vertex_alive(v) and v not in tree.vertices:
            total += inst.prizes[v]
    return total


# ------------------------------------------------------------------- distances


def shortest_paths(inst: PcInstance, source: int) -> tuple[list[float], list[int]]:
    """Plain Dijkstra. Returns (distance, predecessor edge id) per vertex."""
    dist = [INF] * inst.n_vertices
    pred = [-1] * inst.n_vertices
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for eid, w in inst.neighbors(u):
            nd = d + inst.cost(eid)
            if nd < dist[w]:
                dist[w] = nd
                pred[w] = eid
                heapq.heappush(heap, (nd, w))
    return dist, pred


def restricted_shortest_paths(
    inst: PcInstance, source: int, terminal_ids=None
) -> list[float]:
    """Dijkstra in which path interiors must avoid the given terminal set.

    The distance recorded for v equals the shortest source-v path whose
    interior vertices avoid every terminal other than the two endpoints,
    i.e. the distance in the graph induced by dropping all other terminals.
    Defaults to the potential terminals.
    """
    if terminal_ids is None:
        is_term = [inst.prizes[v] > 0.0 for v in range(inst.n_vertices)]
    else:
        is_term = [False] * inst.n_vertices
        for t in terminal_ids:
            is_term[t] = True
    dist = [INF] * inst.n_vertices
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        if u != source and is_term[u]:
            continue  # terminals may end a path but never sit inside one
        for eid, w in inst.neighbors(u):
            nd = d + inst.cost(eid)
            if nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


def restricted_distance(
    inst: PcInstance, v_i: int, v_j: int, k: int = 1
) -> tuple[float, list[tuple[int, float]]]:
    """Terminal-avoiding distance from v_i to v_j, plus v_i's k nearest
    potential terminals under the same metric (ties broken by vertex id)."""
    dist = restricted_shortest_paths(inst, v_i)
    ranked = sorted(
        (dist[t], t) for t in inst.potential_terminals() if t != v_i and dist[t] < INF
    )
    nearest = [(t, d) for d, t in ranked[:k]]
    return dist[v_j], nearest


def mst_of_induced(inst: PcInstance, vertices) -> list[int] | None:
    """Kruskal on the induced subgraph; None if it is disconnected."""
    vs = set(vertices)
    if not vs:
        return None
    if len(vs) == 1:
        return []
    parent = {v: v for v in vs}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    cand = []
    for e in inst.alive_edges():
        u, v = inst.ends(e)
        if u in vs and v in vs:
            cand.append((inst.cost(e), e, u, v))
    cand.sort()
    out = []
    for _, e, u, v in cand:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            out.append(e)
            if len(out) == len(vs) - 1:
                return out
    return None
