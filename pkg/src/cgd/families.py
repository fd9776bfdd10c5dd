"""Constructors for the structured graph families the built-in rules act on."""
from __future__ import annotations

from typing import Callable, Dict, Iterable, List, Tuple, Union

from .modulo import CanonicalGraph, canonicalize, shift
from .portgraph import Alphabets, PointedRawGraph, RawGraph, make_edge

# Tape cells are chained by {cell:a, next:b} edges; a head hangs off a cell
# through a cc edge when travelling forward (a-wards) and dd when backward.
TAPE_ALPHABETS = Alphabets.make("abcd", vertex_labels=("0",))

# Grid cells use port a upward, b rightward, c downward, d leftward.
GRID_ALPHABETS = Alphabets.make("abcd", vertex_labels=("white", "black"))

TURTLE_ALPHABETS = Alphabets.make("ab", vertex_labels=("0",))


def bare_tape(length: int, alphabets: Alphabets = TAPE_ALPHABETS) -> CanonicalGraph:
    """A line of `length` cells joined by ab edges, pointed at the first cell."""
    if length < 1:
        raise ValueError("tape length must be >= 1")
    cells = tuple(range(length))
    edges = frozenset(make_edge(i, "a", i + 1, "b") for i in range(length - 1))
    sigma = alphabets.vertex_labels[0]
    raw = RawGraph(alphabets=alphabets, vertices=cells, edges=edges,
                   vertex_labels={c: sigma for c in cells})
    return canonicalize(PointedRawGraph(raw, 0))


def single_head_tape(length: int, position: int, attach: str = "cc",
                     alphabets: Alphabets = TAPE_ALPHABETS) -> CanonicalGraph:
    """A tape with one head hanging off cell `position` (0-based).

    attach="cc" is a forward-travelling head, "dd" a backward one.  The
    graph is pointed at the first tape cell.
    """
    if attach not in ("cc", "dd"):
        raise ValueError("attach must be 'cc' or 'dd'")
    if not 0 <= position < length:
        raise ValueError(f"position {position} outside tape of length {length}")
    port = attach[0]
    cells = tuple(range(length))
    head = "head"
    edges = {make_edge(i, "a", i + 1, "b") for i in range(length - 1)}
    edges.add(make_edge(position, port, head, port))
    sigma = alphabets.vertex_labels[0]
    raw = RawGraph(alphabets=alphabets, vertices=cells + (head,),
                   edges=frozenset(edges),
                   vertex_labels={v: sigma for v in cells + (head,)})
    return canonicalize(PointedRawGraph(raw, 0))


def single_head_tapes(max_length: int, min_length: int = 1) -> List[CanonicalGraph]:
    """Every single-head tape with min_length..max_length cells.

    One member per (length, head position, attachment); all pointed at the
    first tape cell, so lengths 1..L contribute 2*(1+...+L) members.
    """
    out = []
    for length in range(min_length, max_length + 1):
        for position in range(length):
            for attach in ("cc", "dd"):
                out.append(single_head_tape(length, position, attach))
    return out


def bare_tapes(max_length: int, min_length: int = 1) -> List[CanonicalGraph]:
    return [bare_tape(length) for length in range(min_length, max_length + 1)]


def shift_closure(graphs: Iterable[CanonicalGraph]) -> List[CanonicalGraph]:
    """Close a collection under re-pointing at every vertex, deduplicated."""
    seen = set()
    out = []
    for X in graphs:
        for v in X.vertices:
            Y = shift(X, v)
            if Y not in seen:
                seen.add(Y)
                out.append(Y)
    return out


LabelSpec = Union[str, Dict[Tuple[int, int], str], Callable[[int, int], str], None]


def grid_graph(rows: int, cols: int, labels: LabelSpec = None,
               alphabets: Alphabets = GRID_ALPHABETS) -> CanonicalGraph:
    """A rows x cols grid pointed at the top-left cell.

    Vertical edges join a cell's upward port a to the cell above on its
    downward port c; horizontal edges join b rightward to d.  `labels` may
    be a single label, a dict/function over (row, col), or None for the
    first label in the alphabet.
    """
    if rows < 1 or cols < 1:
        raise ValueError("grid needs at least one row and one column")
    if labels is None:
        label_of = lambda i, j: alphabets.vertex_labels[0]
    elif isinstance(labels, str):
        label_of = lambda i, j: labels
    elif isinstance(labels, dict):
        label_of = lambda i, j: labels[(i, j)]
    else:
        label_of = labels
    cells = tuple((i, j) for i in range(rows) for j in range(cols))
    edges = set()
    for (i, j) in cells:
        if i + 1 < rows:
            edges.add(make_edge((i + 1, j), "a", (i, j), "c"))
        if j + 1 < cols:
            edges.add(make_edge((i, j), "b", (i, j + 1), "d"))
    raw = RawGraph(alphabets=alphabets, vertices=cells, edges=frozenset(edges),
                   vertex_labels={c: label_of(*c) for c in cells})
    return canonicalize(PointedRawGraph(raw, (0, 0)))


def turtle_graphs(alphabets: Alphabets = TURTLE_ALPHABETS
                  ) -> Tuple[CanonicalGraph, CanonicalGraph]:
    """The oscillating pair: a self-looped singleton and a doubled 2-cycle.

    The two vertices of the second graph are shift-equivalent, so collapsing
    them back to the singleton is well-defined on pointed graphs modulo.
    """
    sigma = alphabets.vertex_labels[0]
    solo = RawGraph(alphabets=alphabets, vertices=(0,),
                    edges=frozenset((make_edge(0, "a", 0, "b"),)),
                    vertex_labels={0: sigma})
    pair = RawGraph(alphabets=alphabets, vertices=(0, 1),
                    edges=frozenset((make_edge(0, "a", 1, "b"),
                                     make_edge(0, "b", 1, "a"))),
                    vertex_labels={0: sigma, 1: sigma})
    return (canonicalize(PointedRawGraph(solo, 0)),
            canonicalize(PointedRawGraph(pair, 0)))


def is_single_head_tape(X: CanonicalGraph) -> bool:
    """Recognizer for members of the single-head tape family, any pointing.

    On a one-cell tape the head and the cell are interchangeable, so every
    degree-1 cc/dd endpoint is tried as the head.
    """
    for head in X.vertices:
        if X.degree(head) != 1:
            continue
        (port,) = X.adjacency[head]
        if port not in ("c", "d"):
            continue
        far, far_port = X.adjacency[head][port]
        if far != head and far_port == port and _is_attached_line(X, head, far, port):
            return True
    return False


def _is_attached_line(X: CanonicalGraph, head, attach_cell, attach_port) -> bool:
    """Do the non-head vertices form an ab line whose only extra is the head edge?"""
    cells = [v for v in X.vertices if v != head]
    ab_count = 0
    for e in X.edges:
        halves = tuple(e)
        if any(v == head for v, _p in halves):
            continue
        (v1, p1), (v2, p2) = halves
        if v1 == v2 or {p1, p2} != {"a", "b"}:
            return False
        ab_count += 1
    for cell in cells:
        extra = set(X.adjacency[cell]) - {"a", "b"}
        if cell == attach_cell:
            if extra != {attach_port}:
                return False
        elif extra:
            return False
    # Port uniqueness caps each cell at one a edge and one b edge, and the
    # graph is connected, so len(cells)-1 such edges force a single line.
    return ab_count == len(cells) - 1
