"""Readers and writers for the SteinLib-style .stp text format.

The dialect understood here:

  - header magic line ``33D32945 STP File, STP Format Version 1.0``
  - ``SECTION Comment`` with free-form ``Key "value"`` lines; the keys
    ``Name`` and ``Offset`` are interpreted, the rest is ignored
  - ``SECTION Graph`` with ``Nodes n``, ``Edges m`` and ``E i j cost``
  - ``SECTION Terminals`` with an optional ``Terminals k`` count,
    ``TP i prize`` lines for prizes and ``T i`` lines for fixed terminals
  - unknown sections are skipped with a warning
  - ``EOF`` ends the file

Ids are 1-based on disk and 0-based in memory. Parallel edges collapse to
the minimum cost and self-loops are dropped. Disconnected graphs are
rejected at load time.
"""

from __future__ import annotations

import logging

from .model import PcInstance, SteinerTree, ValidationError, evaluate_cost

log = logging.getLogger("steinred.io")

MAGIC = "33D32945 STP File, STP Format Version 1.0"


class ParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _tokens(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        yield lineno, line.split()


def parse_stp(text: str) -> PcInstance:
    lines = list(_tokens(text))
    if not lines or " ".join(lines[0][1]).lower() != MAGIC.lower():
        raise ParseError(lines[0][0] if lines else 1, "missing STP header magic")

    n_nodes = None
    declared_edges = None
    declared_terminals = None
    edges: list[tuple[int, int, int, float]] = []  # (lineno, u, v, cost)
    prizes: list[tuple[int, int, float]] = []
    fixed: list[tuple[int, int]] = []
    offset = 0.0
    seen_eof = False

    i = 1
    while i < len(lines):
        lineno, toks = lines[i]
        key = toks[0].lower()
        if key == "eof":
            seen_eof = True
            break
        if key != "section":
            raise ParseError(lineno, f"expected SECTION or EOF, got {toks[0]!r}")
        if len(toks) < 2:
            raise ParseError(lineno, "SECTION without a name")
        section = toks[1].lower()
        i += 1
        body = []
        while i < len(lines) and lines[i][1][0].lower() != "end":
            body.append(lines[i])
            i += 1
        if i >= len(lines):
            raise ParseError(lineno, f"section {toks[1]} is never closed")
        i += 1  # skip END

        if section == "comment":
            for ln, t in body:
                if t[0].lower() == "offset" and len(t) >= 2:
                    try:
                        offset = float(t[1].strip('"'))
                    except ValueError:
                        raise ParseError(ln, f"bad offset value {t[1]!r}") from None
        elif section == "graph":
            for ln, t in body:
                k = t[0].lower()
                if k == "nodes":
                    n_nodes = _int_field(ln, t, 1, "node count")
                elif k == "edges":
                    declared_edges = _int_field(ln, t, 1, "edge count")
                elif k == "e":
                    if len(t) != 4:
                        raise ParseError(ln, f"edge line needs 3 fields, got {len(t) - 1}")
                    u = _int_field(ln, t, 1, "edge endpoint")
                    v = _int_field(ln, t, 2, "edge endpoint")
                    c = _float_field(ln, t, 3, "edge cost")
                    edges.append((ln, u, v, c))
                elif k in ("a", "aa"):
                    raise ParseError(ln, "directed arcs are not supported")
                # anything else in the graph section is ignored
        elif section == "terminals":
            for ln, t in body:
                k = t[0].lower()
                if k == "terminals":
                    declared_terminals = _int_field(ln, t, 1, "terminal count")
                elif k == "tp":
                    if len(t) != 3:
                        raise ParseError(ln, "TP line needs vertex and prize")
                    v = _int_field(ln, t, 1, "terminal id")
                    p = _float_field(ln, t, 2, "prize")
                    if p < 0:
                        raise ParseError(ln, f"negative prize {p}")
                    prizes.append((ln, v, p))
                elif k == "t":
                    if len(t) != 2:
                        raise ParseError(ln, "T line needs exactly one vertex id")
                    fixed.append((ln, _int_field(ln, t, 1, "terminal id")))
        else:
            log.warning("skipping unknown section %r", toks[1])

    if not seen_eof:
        raise ParseError(lines[-1][0], "missing EOF line")
    if n_nodes is None:
        raise ParseError(1, "graph section missing a Nodes count")

    inst = PcInstance(n_nodes, offset=offset)
    for ln, u, v, c in edges:
        if not (1 <= u <= n_nodes and 1 <= v <= n_nodes):
            raise ParseError(ln, f"edge endpoint out of range 1..{n_nodes}")
        if c <= 0:
            raise ParseError(ln, f"non-positive edge cost {c}")
        if u == v:
            log.warning("dropping self-loop at vertex %d (line %d)", u, ln)
            continue
        existing = inst.find_edge(u - 1, v - 1)
        if existing is not None:
            if c < inst.cost(existing):
                inst._e_cost[existing] = float(c)
            continue
        inst.add_edge(u - 1, v - 1, c)
    if declared_edges is not None and declared_edges != len(edges):
        raise ParseError(1, f"Edges count {declared_edges} != {len(edges)} edge lines")

    for ln, v, p in prizes:
        if not 1 <= v <= n_nodes:
            raise ParseError(ln, f"terminal id out of range 1..{n_nodes}")
        inst.set_prize(v - 1, p)
    for ln, v in fixed:
        if not 1 <= v <= n_nodes:
            raise ParseError(ln, f"terminal id out of range 1..{n_nodes}")
        inst.fix_vertex(v - 1)

    n_terminals = len({v for v in range(n_nodes) if inst.prizes[v] > 0 or inst.is_fixed(v)})
    if declared_terminals is not None and declared_terminals != n_terminals:
        log.warning(
            "Terminals count %d does not match %d terminal vertices",
            declared_terminals,
            n_terminals,
        )

    if inst.n_alive_vertices() > 0 and not inst.connected():
        raise ValidationError("input graph is disconnected")
    return inst


def _int_field(lineno, toks, idx, what) -> int:
    try:
        return int(toks[idx])
    except (IndexError, ValueError):
        raise ParseError(lineno, f"bad {what} in {' '.join(toks)!r}") from None


def _float_field(lineno, toks, idx, what) -> float:
    try:
        return float(toks[idx])
    except (IndexError, ValueError):
        raise ParseError(lineno, f"bad {what} in {' '.join(toks)!r}") from None


def _fmt(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() and abs(x) < 1e15 else repr(x)


def write_stp(inst: PcInstance, name: str = "instance") -> str:
    """Canonical text form. Alive vertices are renumbered contiguously, so
    writing a reduced instance yields a clean file; parse(write(inst))
    reproduces the instance up to that renumbering."""
    alive_v = inst.alive_vertices()
    remap = {v: i + 1 for i, v in enumerate(alive_v)}  # 1-based on disk
    out = [MAGIC, "", "SECTION Comment", f'Name "{name}"']
    out.append(f"Offset {_fmt(inst.offset)}")
    out.append("END")
    out.append("")
    out.append("SECTION Graph")
    out.append(f"Nodes {len(alive_v)}")
    alive = inst.alive_edges()
    out.append(f"Edges {len(alive)}")
    for e in alive:
        u, v = (remap[x] for x in inst.ends(e))
        out.append(f"E {min(u, v)} {max(u, v)} {_fmt(inst.cost(e))}")
    out.append("END")
    out.append("")
    out.append("SECTION Terminals")
    terms = sorted(
        v for v in alive_v if inst.prizes[v] > 0 or inst.is_fixed(v)
    )
    out.append(f"Terminals {len(terms)}")
    for v in terms:
        if inst.prizes[v] > 0:
            out.append(f"TP {remap[v]} {_fmt(inst.prizes[v])}")
        if inst.is_fixed(v):
            out.append(f"T {remap[v]}")
    out.append("END")
    out.append("")
    out.append("EOF")
    return "\n".join(out) + "\n"


def write_solution(inst: PcInstance, tree: SteinerTree) -> str:
    """Solution file: objective value, then vertices, then edges (1-based)."""
    value = evaluate_cost(inst, tree)
    out = [f"Value {value:.6f}"]
    for v in sorted(tree.vertices):
        out.append(f"V {v + 1}")
    pairs = sorted(
        (min(inst.ends(e)) + 1, max(inst.ends(e)) + 1) for e in tree.edges
    )
    for u, v in pairs:
        out.append(f"E {u} {v}")
    return "\n".join(out) + "\n"


def parse_solution(text: str) -> tuple[float, set[int], list[tuple[int, int]]]:
    """Returns (declared value, 0-based vertex set, 0-based endpoint pairs)."""
    value = None
    vertices: set[int] = set()
    edges: list[tuple[int, int]] = []
    for lineno, toks in _tokens(text):
        key = toks[0].lower()
        if key == "value":
            value = _float_field(lineno, toks, 1, "objective value")
        elif key == "v":
            vertices.add(_int_field(lineno, toks, 1, "vertex id") - 1)
        elif key == "e":
            u = _int_field(lineno, toks, 1, "edge endpoint") - 1
            v = _int_field(lineno, toks, 2, "edge endpoint") - 1
            edges.append((u, v))
        else:
            raise ParseError(lineno, f"unexpected solution line {' '.join(toks)!r}")
    if value is None:
        raise ParseError(1, "solution file has no Value line")
    return value, vertices, edges
