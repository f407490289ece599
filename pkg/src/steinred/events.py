"""Reduction events: a replayable, reversible log of instance surgery.

Every change a reduction makes to an instance is captured as one event.
Applying the log to a fresh copy of the source instance reproduces the
reduced instance exactly (edge ids included — the apply step asserts
that newly created edges receive the recorded ids). Walking the log
backwards expands a solution of the reduced instance into a solution of
the source instance: contracted edges re-open into their two parent
edges, replacement edges from pseudo-eliminations re-open into their
parents around the removed vertex (shared parents dedupe), and if the
expansion ever closes a cycle the cheapest spanning subset is kept, so
the mapped-back value never exceeds the reduced value.

``safety`` records the strength of the reasoning behind an event:
``all-optima`` events preserve every optimal solution, ``some-optimum``
events preserve at least one, and ``branch`` marks search decisions that
define a subproblem rather than a reduction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import PcInstance, SteinerTree, ValidationError

SAFE_ALL = "all-optima"
SAFE_SOME = "some-optimum"
SAFE_BRANCH = "branch"
_SAFETIES = (SAFE_ALL, SAFE_SOME, SAFE_BRANCH)


@dataclass(frozen=True)
class DeleteEdge:
    eid: int
    u: int
    v: int
    cost: float
    safety: str


@dataclass(frozen=True)
class DeleteVertex:
    vid: int
    prize: float
    safety: str


@dataclass(frozen=True)
class FixTerminal:
    vid: int


@dataclass(frozen=True)
class ContractEdge:
    """Degree-2 removal of ``vid``: edges e1=(vid,u), e2=(vid,w) become
    one new edge (u,w) costing their sum."""

    vid: int
    e1: int
    e2: int
    new_eid: int
    u: int
    w: int
    cost: float
    safety: str


@dataclass(frozen=True)
class Replacement:
    new_eid: int
    parent_a: int
    parent_b: int
    u: int
    w: int
    cost: float


@dataclass(frozen=True)
class PseudoEliminate:
    """Removal of ``vid`` with its incident edges, re-wired by replacement
    edges between selected neighbour pairs."""

    vid: int
    safety: str
    replacements: tuple


@dataclass(frozen=True)
class OffsetAdd:
    amount: float
    reason: str


def apply_event(inst: PcInstance, ev) -> None:
    if isinstance(ev, DeleteEdge):
        if set(inst.ends(ev.eid)) != {ev.u, ev.v}:
            raise ValidationError(f"edge {ev.eid} endpoints changed since recording")
        inst.delete_edge(ev.eid)
    elif isinstance(ev, DeleteVertex):
        inst.offset += ev.prize
        inst.delete_vertex(ev.vid)
    elif isinstance(ev, FixTerminal):
        inst.fix_vertex(ev.vid)
    elif isinstance(ev, ContractEdge):
        inst.delete_edge(ev.e1)
        inst.delete_edge(ev.e2)
        inst.delete_vertex(ev.vid)
        got = inst.add_edge(ev.u, ev.w, ev.cost)
        if got != ev.new_eid:
            raise ValidationError(
                f"contraction produced edge {got}, log says {ev.new_eid}"
            )
    elif isinstance(ev, PseudoEliminate):
        for e, _ in inst.neighbors(ev.vid):
            inst.delete_edge(e)
        inst.delete_vertex(ev.vid)
        for rep in ev.replacements:
            got = inst.add_edge(rep.u, rep.w, rep.cost)
            if got != rep.new_eid:
                raise ValidationError(
                    f"replacement produced edge {got}, log says {rep.new_eid}"
                )
    elif isinstance(ev, OffsetAdd):
        inst.offset += ev.amount
    else:
        raise ValidationError(f"unknown event {ev!r}")


def replay(inst: PcInstance, events) -> PcInstance:
    """Apply the whole log to a copy of ``inst`` and return it."""
    out = inst.copy()
    for ev in events:
        apply_event(out, ev)
    return out


def backmap_tree(inst: PcInstance, events, tree: SteinerTree) -> SteinerTree:
    """Expand a tree on the reduced instance into one on ``inst``.

    ``inst`` must be the instance the event log started from. The result
    is validated and costs at most the reduced tree's value.
    """
    vertices = set(tree.vertices)
    edges = set(tree.edges)
    for ev in reversed(list(events)):
        if isinstance(ev, ContractEdge):
            if ev.new_eid in edges:
                edges.discard(ev.new_eid)
                edges.add(ev.e1)
                edges.add(ev.e2)
                vertices.add(ev.vid)
        elif isinstance(ev, PseudoEliminate):
            hit = False
            for rep in ev.replacements:
                if rep.new_eid in edges:
                    edges.discard(rep.new_eid)
                    edges.add(rep.parent_a)
                    edges.add(rep.parent_b)
                    hit = True
            if hit:
                vertices.add(ev.vid)

    if len(edges) != len(vertices) - 1:
        # shared parents or re-opened paths closed a cycle; keep the
        # cheapest spanning subset of the expanded edges
        parent = {v: v for v in vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        kept = set()
        for _, e in sorted((inst.cost(e), e) for e in edges):
            u, v = inst.ends(e)
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                kept.add(e)
        edges = kept

    from .model import tree_from_edges, validate_tree

    out = tree_from_edges(inst, sorted(edges), extra_vertices=sorted(vertices))
    validate_tree(inst, out)
    return out


# ------------------------------------------------------------- serialization


def _fmt(x: float) -> str:
    return repr(float(x))


def serialize_events(fingerprint: str, events) -> str:
    lines = [f"fingerprint {fingerprint}"]
    for ev in events:
        if isinstance(ev, DeleteEdge):
            lines.append(
                f"delete_edge {ev.eid} {ev.u} {ev.v} {_fmt(ev.cost)} {ev.safety}"
            )
        elif isinstance(ev, DeleteVertex):
            lines.append(f"delete_vertex {ev.vid} {_fmt(ev.prize)} {ev.safety}")
        elif isinstance(ev, FixTerminal):
            lines.append(f"fix_terminal {ev.vid}")
        elif isinstance(ev, ContractEdge):
            lines.append(
                f"contract_edge {ev.vid} {ev.e1} {ev.e2} {ev.new_eid}"
                f" {ev.u} {ev.w} {_fmt(ev.cost)} {ev.safety}"
            )
        elif isinstance(ev, PseudoEliminate):
            reps = " ".join(
                f"{r.new_eid}:{r.parent_a}:{r.parent_b}:{r.u}:{r.w}:{_fmt(r.cost)}"
                for r in ev.replacements
            )
            lines.append(
                f"pseudo_eliminate {ev.vid} {ev.safety} {len(ev.replacements)}"
                + (f" {reps}" if reps else "")
            )
        elif isinstance(ev, OffsetAdd):
            lines.append(f"offset_add {_fmt(ev.amount)} {ev.reason}")
        else:
            raise ValidationError(f"cannot serialize {ev!r}")
    return "\n".join(lines) + "\n"


def parse_events(text: str) -> tuple:
    """Returns (fingerprint, [events])."""
    fingerprint = None
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        kind = toks[0]
        try:
            if kind == "fingerprint":
                fingerprint = toks[1]
            elif kind == "delete_edge":
                events.append(
                    DeleteEdge(
                        int(toks[1]), int(toks[2]), int(toks[3]),
                        float(toks[4]), _safety(toks[5]),
                    )
                )
            elif kind == "delete_vertex":
                events.append(
                    DeleteVertex(int(toks[1]), float(toks[2]), _safety(toks[3]))
                )
            elif kind == "fix_terminal":
                events.append(FixTerminal(int(toks[1])))
            elif kind == "contract_edge":
                events.append(
                    ContractEdge(
                        int(toks[1]), int(toks[2]), int(toks[3]), int(toks[4]),
                        int(toks[5]), int(toks[6]), float(toks[7]),
                        _safety(toks[8]),
                    )
                )
            elif kind == "pseudo_eliminate":
                count = int(toks[3])
                reps = []
                for item in toks[4 : 4 + count]:
                    p = item.split(":")
                    reps.append(
                        Replacement(
                            int(p[0]), int(p[1]), int(p[2]),
                            int(p[3]), int(p[4]), float(p[5]),
                        )
                    )
                if len(reps) != count:
                    raise ValidationError("replacement count mismatch")
                events.append(
                    PseudoEliminate(int(toks[1]), _safety(toks[2]), tuple(reps))
                )
            elif kind == "offset_add":
                events.append(OffsetAdd(float(toks[1]), " ".join(toks[2:])))
            else:
                raise ValidationError(f"unknown event kind {kind!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad event at line {lineno}: {line!r}") from None
    if fingerprint is None:
        raise ValidationError("event log has no fingerprint header")
    return fingerprint, events


def _safety(s: str) -> str:
    if s not in _SAFETIES:
        raise ValidationError(f"unknown safety tag {s!r}")
    return s
