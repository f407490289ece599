"""Reformulation as rooted Steiner arborescence problems (SAP).

Two encodings are provided. For instances without fixed vertices, an
artificial root and a prize-collection gadget turn the problem into a
pure reachability problem: the optimal arborescence value equals the
optimal objective (without the instance offset) plus the constant
``M`` = sum of all prizes. For instances with fixed vertices, a fixed
vertex acts as root, primed copies of the unfixed positive-prize
vertices are added, and the arborescence value equals the objective
(without offset) directly.

``backmap_solution`` converts an arborescence back into a tree on the
source instance and insists on exact consistency between membership and
prize arcs; arborescences that are feasible but structurally mixed are
rejected with ValidationError rather than silently repaired.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    PcInstance,
    SteinerTree,
    ValidationError,
    tree_from_edges,
    validate_tree,
)


@dataclass
class SapGraph:
    n_vertices: int
    tails: list
    heads: list
    costs: list
    root: int
    terminals: list  # vertices the arborescence must reach (root excluded)
    kind: str  # "pc" or "rpc"
    big_m: float
    to_orig: list  # sap vertex id -> original vertex id (or -1 for gadgets)
    prime_of: dict  # original positive-prize vertex -> its primed copy
    arc_edge: dict  # sap arc id -> original edge id (graph arcs only)
    prize_arc: dict  # sap arc id -> original vertex whose prize it pays
    root_arcs: list = field(default_factory=list)  # artificial-root arcs
    out_arcs: list = field(default_factory=list)
    in_arcs: list = field(default_factory=list)

    def add_arc(self, u: int, v: int, c: float) -> int:
        self.tails.append(u)
        self.heads.append(v)
        self.costs.append(float(c))
        aid = len(self.tails) - 1
        self.out_arcs[u].append(aid)
        self.in_arcs[v].append(aid)
        return aid

    @property
    def n_arcs(self) -> int:
        return len(self.tails)


def _base(inst: PcInstance, extra: int, kind: str, big_m: float) -> tuple:
    alive = inst.alive_vertices()
    to_sap = {v: i for i, v in enumerate(alive)}
    nv = len(alive) + extra
    g = SapGraph(
        n_vertices=nv,
        tails=[],
        heads=[],
        costs=[],
        root=-1,
        terminals=[],
        kind=kind,
        big_m=big_m,
        to_orig=[*alive] + [-1] * extra,
        prime_of={},
        arc_edge={},
        prize_arc={},
    )
    g.out_arcs = [[] for _ in range(nv)]
    g.in_arcs = [[] for _ in range(nv)]
    for e in inst.alive_edges():
        u, v = inst.ends(e)
        c = inst.cost(e)
        g.arc_edge[g.add_arc(to_sap[u], to_sap[v], c)] = e
        g.arc_edge[g.add_arc(to_sap[v], to_sap[u], c)] = e
    return g, to_sap


def transform_unrooted(inst: PcInstance) -> SapGraph:
    """Encoding for instances with no fixed vertices."""
    terms = inst.potential_terminals()
    if not terms:
        raise ValidationError("nothing to transform: no positive prizes")
    big_m = sum(inst.prizes[t] for t in terms)
    s = len(terms)
    g, to_sap = _base(inst, extra=2 + s, kind="pc", big_m=big_m)
    base = len(inst.alive_vertices())
    root, v0 = base, base + 1
    g.root = root
    for rank, t in enumerate(terms):
        prime = base + 2 + rank
        g.prime_of[t] = prime
        g.root_arcs.append(g.add_arc(root, to_sap[t], big_m))
        g.add_arc(to_sap[t], v0, 0.0)
        g.add_arc(to_sap[t], prime, 0.0)
        g.prize_arc[g.add_arc(v0, prime, inst.prizes[t])] = t
        g.terminals.append(prime)
    return g


def transform_rooted(inst: PcInstance, t_p: int, t_q: int) -> SapGraph:
    """Encoding rooted at the fixed vertex ``t_q``; prize arcs leave ``t_p``.

    Both must be fixed vertices (they may coincide)."""
    if not (inst.is_fixed(t_p) and inst.is_fixed(t_q)):
        raise ValidationError("root vertices must be fixed")
    unfixed = [t for t in inst.potential_terminals() if not inst.is_fixed(t)]
    g, to_sap = _base(inst, extra=len(unfixed), kind="rpc", big_m=0.0)
    base = len(inst.alive_vertices())
    g.root = to_sap[t_q]
    for rank, t in enumerate(unfixed):
        prime = base + rank
        g.prime_of[t] = prime
        g.add_arc(to_sap[t], prime, 0.0)
        g.prize_arc[g.add_arc(to_sap[t_p], prime, inst.prizes[t])] = t
        g.terminals.append(prime)
    for t in inst.fixed_terminals():
        if t != t_q:
            g.terminals.append(to_sap[t])
    return g


def root_pairs(inst: PcInstance, limit: int = 4) -> list:
    """Rooting choices for the rooted encoding, strongest prizes first."""
    fixed = sorted(inst.fixed_terminals(), key=lambda v: (-inst.prizes[v], v))
    return [(t, t) for t in fixed[:limit]]


def transform(inst: PcInstance) -> SapGraph:
    if inst.class_tag == "PC":
        return transform_unrooted(inst)
    t_p, t_q = root_pairs(inst, limit=1)[0]
    return transform_rooted(inst, t_p, t_q)


def backmap_solution(
    inst: PcInstance, g: SapGraph, arcs: set
) -> SteinerTree:
    """Tree on ``inst`` corresponding to an arborescence arc set.

    Requires exact structural consistency: every positive-prize vertex is
    either in the tree (its primed copy reached through it) or paid for
    by its prize arc, never both; the unrooted encoding must use exactly
    one artificial root arc. Violations raise ValidationError.
    """
    edges = set()
    used_eids = {}
    for a in arcs:
        e = g.arc_edge.get(a)
        if e is None:
            continue
        if e in used_eids and used_eids[e] != a:
            raise ValidationError(f"edge {e} traversed in both directions")
        used_eids[e] = a
        edges.add(e)

    paid = {g.prize_arc[a] for a in arcs if a in g.prize_arc}
    vertices = set()
    for e in edges:
        vertices.update(inst.ends(e))

    anchor = None
    if g.kind == "pc":
        used_root = [a for a in arcs if a in set(g.root_arcs)]
        if len(used_root) != 1:
            raise ValidationError(
                f"{len(used_root)} artificial root arcs used, expected 1"
            )
        anchor = g.to_orig[g.heads[used_root[0]]]
    else:
        anchor = g.to_orig[g.root]
    vertices.add(anchor)

    for t, prime in g.prime_of.items():
        if t in vertices and t in paid:
            raise ValidationError(f"vertex {t} both included and paid for")
        if t not in vertices and t not in paid:
            raise ValidationError(f"vertex {t} neither included nor paid for")

    tree = tree_from_edges(inst, sorted(edges), extra_vertices=[anchor])
    validate_tree(inst, tree)
    return tree
