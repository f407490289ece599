"""The reduction loop: repeated rounds of cheap structural tests, walk
bounds, region bounds, dual-ascent tests and probing, until quiescence.

Safety discipline. Reductions tagged ``all-optima`` preserve every
optimal solution and may be applied in batches computed on one snapshot.
Reductions tagged ``some-optimum`` preserve at least one optimum; they
are only taken when the current incumbent tree certifies the upper bound
(its cost equals the bound) and survives the change, and destructive
interactions are avoided by taking at most one equality edge deletion
per pass. The upper bound is a monotone value; the incumbent tree is
dropped (value kept) whenever a batch removes one of its elements,
which can only happen when the incumbent was not optimal anyway.

The loop runs in two phases. Phase one admits only all-optima
operations, so the surviving optima are exactly the input's optima and
every terminal fixed there is contained in *every* optimal solution of
the input. Once phase one goes quiet, phase two additionally admits
equality (some-optimum) eliminations — which may discard ties — and
therefore never fixes another terminal: a fix justified against a
thinned optimum set would overreach the input.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

from .dualascent import da_reductions, dual_ascent
from .events import (
    SAFE_ALL,
    SAFE_SOME,
    ContractEdge,
    DeleteEdge,
    DeleteVertex,
    FixTerminal,
    PseudoEliminate,
    Replacement,
    apply_event,
)
from .heuristics import heuristic_tree
from .model import (
    EPS,
    INF,
    InfeasibleError,
    PcInstance,
    SteinerTree,
    ValidationError,
    evaluate_cost,
    validate_tree,
)
from .regions import build_regions, vertex_bound
from .sap import root_pairs, transform, transform_rooted, transform_unrooted
from .walks import edge_walk_bound, left_reach

log = logging.getLogger("steinred.reduce")

EDGE_BUDGET_FACTOR = 10
DEFAULT_PROBES = 10
DEFAULT_DA_ROOTS = 4
MAX_ROUNDS = 50


@dataclass
class ReduceResult:
    instance: PcInstance
    events: list
    upper_bound: float
    incumbent: SteinerTree | None  # tree on `instance` costing `upper_bound`
    lower_bound: float
    rounds: int
    source_fingerprint: str


class _Reducer:
    def __init__(
        self,
        source: PcInstance,
        initial_upper: float = None,
        probes: int = DEFAULT_PROBES,
        max_rounds: int = MAX_ROUNDS,
        da_roots: int = DEFAULT_DA_ROOTS,
        edge_budget: int = None,
    ):
        if source.n_alive_vertices() == 0:
            raise ValidationError("cannot reduce an empty instance")
        self.fingerprint = source.fingerprint()
        self.work = source.copy()
        self.events: list = []
        self.ub = INF if initial_upper is None else float(initial_upper)
        self.incumbent: SteinerTree | None = None
        self.lb = -INF
        self.probes = probes
        self.max_rounds = max_rounds
        self.da_roots = da_roots
        self.edge_budget = edge_budget
        self.equality_phase = False

    # ------------------------------------------------------------- plumbing

    def emit(self, ev) -> None:
        apply_event(self.work, ev)
        self.events.append(ev)

    def delete_edge(self, e: int, safety: str) -> None:
        u, v = self.work.ends(e)
        self.emit(DeleteEdge(e, u, v, self.work.cost(e), safety))

    def delete_vertex(self, v: int, safety: str) -> None:
        for e, _ in self.work.neighbors(v):
            self.delete_edge(e, safety)
        self.emit(DeleteVertex(v, self.work.prizes[v], safety))

    def check_incumbent(self) -> None:
        if self.incumbent is None:
            return
        try:
            validate_tree(self.work, self.incumbent)
        except ValidationError:
            self.incumbent = None  # value self.ub stays a valid bound

    def _witness(self) -> SteinerTree | None:
        """Incumbent that certifies the bound (its cost equals it)."""
        if self.incumbent is None:
            return None
        if abs(evaluate_cost(self.work, self.incumbent) - self.ub) <= EPS:
            return self.incumbent
        return None

    def _equality_witness(self) -> SteinerTree | None:
        """Witness for some-optimum steps; only available in phase two."""
        if not self.equality_phase:
            return None
        return self._witness()

    @property
    def ub_graph(self) -> float:
        """Upper bound in graph units (offset removed)."""
        return self.ub - self.work.offset

    # ------------------------------------------------------- structural pass

    def pass_basic(self) -> None:
        changed = True
        while changed:
            changed = False
            changed |= self._drop_hopeless_components()
            for v in self.work.alive_vertices():
                if (
                    self.work.prizes[v] > 0.0
                    or self.work.is_fixed(v)
                    or not self.work.vertex_alive(v)
                ):
                    continue
                deg = self.work.degree(v)
                if deg == 1:
                    if self.work.n_alive_vertices() > 1:
                        self.delete_vertex(v, SAFE_ALL)
                        changed = True
                elif deg == 2:
                    changed |= self._contract_degree_two(v)
        self.check_incumbent()

    def _drop_hopeless_components(self) -> bool:
        comps = self.work.components()
        if len(comps) <= 1:
            return False
        fixed = self.work.fixed_terminals()
        doomed = []
        if fixed:
            fixed_set = set(fixed)
            keepers = [c for c in comps if fixed_set & set(c)]
            if len(keepers) > 1:
                raise InfeasibleError("fixed terminals are split across components")
            doomed = [c for c in comps if not (fixed_set & set(c))]
        else:
            with_prize = [
                c for c in comps if any(self.work.prizes[v] > 0.0 for v in c)
            ]
            if with_prize:
                doomed = [
                    c for c in comps if not any(self.work.prizes[v] > 0.0 for v in c)
                ]
        if not doomed:
            return False
        for comp in doomed:
            for v in comp:
                self.delete_vertex(v, SAFE_ALL)
        self.check_incumbent()
        return True

    def _contract_degree_two(self, v: int) -> bool:
        (e1, u), (e2, w) = self.work.neighbors(v)
        cand = self.work.cost(e1) + self.work.cost(e2)
        existing = self.work.find_edge(u, w)
        if existing is not None:
            old = self.work.cost(existing)
            if old < cand - EPS:
                # the two-hop route through v is never worth taking
                self.delete_vertex(v, SAFE_ALL)
                return True
            if old <= cand + EPS:
                witness = self._equality_witness()
                if witness is not None and v not in witness.vertices:
                    self.delete_vertex(v, SAFE_SOME)
                    return True
                return False
            self.delete_edge(existing, SAFE_ALL)
        self.emit(
            ContractEdge(
                v, e1, e2, self.work.next_edge_id, u, w, cand, SAFE_ALL
            )
        )
        return True

    # ---------------------------------------------------------- edge bounds

    def pass_edges(self, max_sweeps: int = 25) -> None:
        # Equality deletions invalidate each other's witness walks, so only
        # one may be taken per sweep of fresh bounds; sweeping here instead
        # of once per round keeps the full round machinery out of that loop.
        for _ in range(max_sweeps):
            work = self.work
            budget = self.edge_budget
            if budget is None:
                budget = EDGE_BUDGET_FACTOR * max(1, work.n_alive_edges())
            strict = []
            equal = []
            for e in work.alive_edges():
                bound, _ = edge_walk_bound(
                    work, e, allow_equal=True, budget=budget
                )
                if bound < work.cost(e) - EPS:
                    strict.append(e)
                elif bound <= work.cost(e) + EPS:
                    equal.append(e)
            for e in strict:
                self.delete_edge(e, SAFE_ALL)
            self.check_incumbent()
            deleted_equal = False
            witness = self._equality_witness()
            if witness is not None:
                for e in equal:  # ascending edge id; at most one per sweep
                    if self.work.edge_alive(e) and e not in witness.edges:
                        self.delete_edge(e, SAFE_SOME)
                        deleted_equal = True
                        break
            if not strict and not deleted_equal:
                break

    # -------------------------------------------------------- region bounds

    def pass_regions(self) -> None:
        work = self.work
        regions = build_regions(work)
        if len(regions.terminals) < 1:
            return
        ubg = self.ub_graph
        witness = self._equality_witness()
        strict_drop = []
        some_drop = []
        pseudo = []
        for v in work.alive_vertices():
            if work.prizes[v] > 0.0 or work.is_fixed(v):
                continue
            deg = work.degree(v)
            if deg == 0:
                continue
            b2 = vertex_bound(work, regions, v, k=2)
            if b2 > ubg + EPS:
                strict_drop.append(v)
                continue
            if witness is not None and abs(b2 - ubg) <= EPS and v not in witness.vertices:
                some_drop.append(v)
                continue
            if 3 <= deg <= 4:
                b3 = vertex_bound(work, regions, v, k=3)
                if b3 > ubg + EPS:
                    pseudo.append(v)
                elif (
                    witness is not None
                    and abs(b3 - ubg) <= EPS
                    and self._tree_degree(witness, v) <= 2
                ):
                    pseudo.append(v)
        for v in strict_drop:
            self.delete_vertex(v, SAFE_ALL)
        self.check_incumbent()
        witness = self._equality_witness()
        for v in some_drop:
            if witness is None:
                break
            self.delete_vertex(v, SAFE_SOME)
        for v in pseudo:
            if not self.work.vertex_alive(v):
                continue
            if not 3 <= self.work.degree(v) <= 4:
                continue  # earlier surgery changed it; next round re-tests
            self._pseudo_eliminate(v, SAFE_ALL)
        self.check_incumbent()

    def _tree_degree(self, tree: SteinerTree, v: int) -> int:
        if v not in tree.vertices:
            return 0
        return sum(1 for e in tree.edges if v in self.work.ends(e))

    def _pseudo_eliminate(self, v: int, safety: str) -> None:
        work = self.work
        nbrs = sorted(work.neighbors(v), key=lambda p: p[1])
        reps = []
        for (ea, a), (eb, b) in itertools.combinations(nbrs, 2):
            cand = work.cost(ea) + work.cost(eb)
            existing = work.find_edge(a, b)
            if existing is not None:
                if work.cost(existing) <= cand + EPS:
                    continue  # the existing edge already covers this pair
                self.delete_edge(existing, SAFE_ALL)
            reps.append((ea, eb, min(a, b), max(a, b), cand))
        base = work.next_edge_id
        replacements = tuple(
            Replacement(base + i, ea, eb, a, b, cand)
            for i, (ea, eb, a, b, cand) in enumerate(reps)
        )
        self.emit(PseudoEliminate(v, safety, replacements))

    # ------------------------------------------------------------ heuristic

    def pass_heuristic(self) -> bool:
        try:
            cost, tree = heuristic_tree(self.work)
        except InfeasibleError:
            raise
        if cost < self.ub - EPS:
            self.ub = cost
            self.incumbent = tree
            return True
        if self.incumbent is None and abs(cost - self.ub) <= EPS:
            self.incumbent = tree
        return False

    # ----------------------------------------------------------- dual bounds

    def _reach_sets(self) -> dict:
        work = self.work
        budget = EDGE_BUDGET_FACTOR * max(1, work.n_alive_edges())
        reach = {}
        for t in work.potential_terminals():
            if not work.is_fixed(t):
                reach[t] = set(left_reach(work, t, budget=budget).keys())
        return reach

    def pass_da(self) -> None:
        work = self.work
        if not work.potential_terminals() and not work.fixed_terminals():
            return
        # reach sets only feed terminal fixing, which phase two never does
        reach = {} if self.equality_phase else self._reach_sets()
        graphs = []
        if work.class_tag == "PC":
            graphs.append(transform_unrooted(work))
        else:
            for t_p, t_q in root_pairs(work, limit=self.da_roots):
                graphs.append(transform_rooted(work, t_p, t_q))
        all_edges: set = set()
        all_vertices: set = set()
        all_fixes: set = set()
        for g in graphs:
            da = dual_ascent(g)
            lb_global = da.lower_bound - g.big_m + work.offset
            self.lb = max(self.lb, lb_global)
            if self.ub < INF:
                u_sap = (self.ub - work.offset) + g.big_m
                edges_del, verts_del, fixes = da_reductions(
                    work, g, da, u_sap, reach
                )
                all_edges.update(edges_del)
                all_vertices.update(verts_del)
                all_fixes.update(fixes)
        conflict = all_vertices & all_fixes
        if conflict:
            if self._witness() is None:
                # vacuously true both ways: nothing beats the supplied bound
                raise InfeasibleError(
                    f"no tree within the given upper bound {self.ub}"
                )
            raise ValidationError(
                f"dual bounds both fix and delete {sorted(conflict)}; "
                "the upper bound is not a valid bound"
            )
        for v in sorted(all_vertices):
            if self.work.vertex_alive(v):
                self.delete_vertex(v, SAFE_ALL)
        for e in sorted(all_edges):
            if self.work.edge_alive(e):
                self.delete_edge(e, SAFE_ALL)
        if not self.equality_phase:
            for v in sorted(all_fixes):
                if self.work.vertex_alive(v) and not self.work.is_fixed(v):
                    self.emit(FixTerminal(v))
        self.check_incumbent()

    # -------------------------------------------------------------- probing

    def pass_probes(self) -> None:
        if self.probes <= 0 or self.ub >= INF:
            return
        candidates = sorted(
            (
                t
                for t in self.work.potential_terminals()
                if not self.work.is_fixed(t)
            ),
            key=lambda t: (-self.work.prizes[t], t),
        )[: self.probes]
        for t in candidates:
            if not self.work.vertex_alive(t) or self.work.is_fixed(t):
                continue
            if self._probe_bound(t, include=True) > self.ub + EPS:
                self.delete_vertex(t, SAFE_ALL)
                self.check_incumbent()
                continue
            if self.equality_phase:
                continue
            if self._probe_bound(t, include=False) > self.ub + EPS:
                self.emit(FixTerminal(t))
                self.check_incumbent()

    def _probe_bound(self, t: int, include: bool) -> float:
        child = self.work.copy()
        if include:
            child.fix_vertex(t)
        else:
            child.offset += child.prizes[t]
            child.prizes[t] = 0.0
            for e, _ in child.neighbors(t):
                child.delete_edge(e)
            child.delete_vertex(t)
        if not child.potential_terminals() and not child.fixed_terminals():
            return child.offset
        try:
            g = transform(child)
            da = dual_ascent(g)
        except InfeasibleError:
            return INF
        return da.lower_bound - g.big_m + child.offset

    # ----------------------------------------------------------------- main

    def run(self) -> ReduceResult:
        work = self.work
        if not work.potential_terminals() and not work.fixed_terminals():
            v = min(work.alive_vertices())
            tree = SteinerTree(frozenset([v]), frozenset())
            value = evaluate_cost(work, tree)
            self.ub = min(self.ub, value)
            return ReduceResult(
                work, self.events, self.ub, tree, value, 0, self.fingerprint
            )

        self.pass_heuristic()
        rounds = 0
        while rounds < self.max_rounds:
            rounds += 1
            before = len(self.events)
            improved = False
            self.pass_basic()
            self.pass_edges()
            self.pass_regions()
            improved |= self.pass_heuristic()
            self.pass_da()
            self.pass_probes()
            log.debug(
                "round %d (phase %d): %d events, ub=%s lb=%s, %d vertices %d edges",
                rounds,
                2 if self.equality_phase else 1,
                len(self.events) - before,
                self.ub,
                self.lb,
                self.work.n_alive_vertices(),
                self.work.n_alive_edges(),
            )
            if len(self.events) == before and not improved:
                if self.equality_phase:
                    break
                self.equality_phase = True

        self.lb = max(self.lb, min(self.ub, self.work.offset))
        if self.lb > self.ub + EPS:
            if self._witness() is None:
                # the bound was supplied from outside and nothing here beats
                # it; for a caller running a search that simply prunes the node
                raise InfeasibleError(
                    f"no tree within the given upper bound {self.ub}"
                )
            raise ValidationError(
                f"lower bound {self.lb} exceeds upper bound {self.ub}"
            )
        return ReduceResult(
            self.work,
            self.events,
            self.ub,
            self._witness(),
            min(self.lb, self.ub),
            rounds,
            self.fingerprint,
        )


def reduce_loop(
    inst: PcInstance,
    initial_upper: float = None,
    probes: int = DEFAULT_PROBES,
    max_rounds: int = MAX_ROUNDS,
    da_roots: int = DEFAULT_DA_ROOTS,
    edge_budget: int = None,
) -> ReduceResult:
    """Reduce a copy of ``inst``; the input itself is never mutated."""
    return _Reducer(
        inst,
        initial_upper=initial_upper,
        probes=probes,
        max_rounds=max_rounds,
        da_roots=da_roots,
        edge_budget=edge_budget,
    ).run()
