"""Concrete labelled port graphs with named vertices, and their text format.

Vertices attach edges through named ports; each port hosts at most one edge
end, which bounds the degree by the number of ports.  Vertex ids are opaque
local tokens: all externally meaningful identity lives in the canonical
path names computed by :mod:`cgd.modulo`.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Hashable, Iterable, Mapping, Optional, Tuple

VertexId = Hashable
HalfEdge = Tuple[VertexId, str]
Edge = FrozenSet[HalfEdge]


class GraphError(Exception):
    """Base class for graph construction and use errors."""


class InvalidGraphError(GraphError):
    """A raw graph violates a structural constraint."""


class GraphFormatError(GraphError):
    """The text format could not be parsed strictly."""


@dataclass(frozen=True)
class PortAlphabet:
    """Finite ordered set of port symbols; the order drives all tie-breaking."""

    ports: Tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.ports:
            raise ValueError("port alphabet must be non-empty")
        if len(set(self.ports)) != len(self.ports):
            raise ValueError(f"duplicate port symbols in {self.ports}")
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.ports)})

    def __contains__(self, port: str) -> bool:
        return port in self._index  # type: ignore[attr-defined]

    def __len__(self) -> int:
        return len(self.ports)

    def index(self, port: str) -> int:
        try:
            return self._index[port]  # type: ignore[attr-defined]
        except KeyError:
            raise KeyError(f"unknown port {port!r} (alphabet {self.ports})") from None


@dataclass(frozen=True)
class LabelAlphabets:
    """Finite vertex and edge label sets; either may be empty."""

    vertex_labels: Tuple[str, ...] = ()
    edge_labels: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for group in (self.vertex_labels, self.edge_labels):
            if len(set(group)) != len(group):
                raise ValueError(f"duplicate labels in {group}")


@dataclass(frozen=True)
class Alphabets:
    """The full signature a graph is written over: ports plus label sets."""

    port_alphabet: PortAlphabet
    label_alphabets: LabelAlphabets = LabelAlphabets()

    @staticmethod
    def make(ports: Iterable[str], vertex_labels: Iterable[str] = (),
             edge_labels: Iterable[str] = ()) -> "Alphabets":
        return Alphabets(PortAlphabet(tuple(ports)),
                         LabelAlphabets(tuple(vertex_labels), tuple(edge_labels)))

    @property
    def ports(self) -> Tuple[str, ...]:
        return self.port_alphabet.ports

    @property
    def vertex_labels(self) -> Tuple[str, ...]:
        return self.label_alphabets.vertex_labels

    @property
    def edge_labels(self) -> Tuple[str, ...]:
        return self.label_alphabets.edge_labels

    def port_index(self, port: str) -> int:
        return self.port_alphabet.index(port)

    def pair_key(self, pair: Tuple[str, str]) -> Tuple[int, int]:
        return (self.port_alphabet.index(pair[0]), self.port_alphabet.index(pair[1]))

    def path_key(self, path) -> Tuple[int, Tuple[Tuple[int, int], ...]]:
        """Length-then-lexicographic sort key for a path under the port order."""
        return (len(path.pairs), tuple(self.pair_key(p) for p in path.pairs))


def make_edge(u: VertexId, p: str, v: VertexId, q: str) -> Edge:
    """Build the unordered edge {u:p, v:q}."""
    return frozenset(((u, p), (v, q)))


@dataclass(frozen=True, eq=True)
class RawGraph:
    """A finite labelled port graph over explicit vertex ids.

    Labellings are partial: absence from the map means unlabelled, which is
    distinct from every alphabet label.  Values are immutable by convention;
    do not mutate the label dicts after construction.
    """

    alphabets: Alphabets
    vertices: Tuple[VertexId, ...]
    edges: FrozenSet[Edge] = frozenset()
    vertex_labels: Mapping[VertexId, str] = field(default_factory=dict)
    edge_labels: Mapping[Edge, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(set(self.vertices)) != len(self.vertices):
            raise InvalidGraphError(f"duplicate vertex ids in {self.vertices}")

    def half_edges(self) -> Iterable[HalfEdge]:
        for e in self.edges:
            yield from e

    def adjacency(self) -> Dict[VertexId, Dict[str, HalfEdge]]:
        """Map each vertex to {port: far half-edge}; requires port uniqueness."""
        adj: Dict[VertexId, Dict[str, HalfEdge]] = {v: {} for v in self.vertices}
        for e in self.edges:
            (u, p), (w, q) = tuple(e)
            adj[u][p] = (w, q)
            adj[w][q] = (u, p)
        return adj

    def degree(self, v: VertexId) -> int:
        return sum(1 for e in self.edges for (u, _p) in e if u == v)


def _half_edge_token(h: HalfEdge) -> Tuple[str, str]:
    return (repr(h[0]), repr(h[1]))


def _edge_token(e: Edge) -> Tuple[Tuple[str, str], ...]:
    return tuple(sorted(_half_edge_token(h) for h in e))


def validate(g: RawGraph) -> Optional[str]:
    """Check structural constraints; return None if ok, else the first violation.

    Checked in order: edge shape (two distinct half-edges on known vertices
    and ports), label membership, then port uniqueness across edges.  The
    message always names the same violation for the same graph regardless
    of set iteration order.
    """
    if _scan(g, sort=False) is None:
        return None
    return _scan(g, sort=True)


def _scan(g: RawGraph, sort: bool) -> Optional[str]:
    ports = g.alphabets.port_alphabet
    vertex_set = set(g.vertices)
    edges = sorted(g.edges, key=_edge_token) if sort else g.edges
    for e in edges:
        if len(e) != 2:
            return f"edge {set(e)} does not join two distinct half-edges"
        halves = sorted(e, key=_half_edge_token) if sort else e
        for (v, p) in halves:
            if v not in vertex_set:
                return f"edge endpoint {v!r} is not a declared vertex"
            if p not in ports:
                return f"port {p!r} on vertex {v!r} is not in the port alphabet"
    for v in g.vertices:
        if v in g.vertex_labels and g.vertex_labels[v] not in g.alphabets.vertex_labels:
            return f"vertex {v!r} carries unknown label {g.vertex_labels[v]!r}"
    labelled = sorted(g.vertex_labels, key=repr) if sort else g.vertex_labels
    for v in labelled:
        if v not in vertex_set:
            return f"label attached to unknown vertex {v!r}"
    edge_labelled = sorted(g.edge_labels, key=_edge_token) if sort else g.edge_labels
    for e in edge_labelled:
        if e not in g.edges:
            return f"label attached to unknown edge {set(e)}"
        if g.edge_labels[e] not in g.alphabets.edge_labels:
            return f"edge {set(e)} carries unknown label {g.edge_labels[e]!r}"
    seen: Dict[HalfEdge, Edge] = {}
    for e in edges:
        halves = sorted(e, key=_half_edge_token) if sort else e
        for h in halves:
            if h in seen and seen[h] != e:
                return f"port {h[0]!r}:{h[1]} used twice"
            seen[h] = e
    return None


def ensure_valid(g: RawGraph) -> None:
    problem = validate(g)
    if problem is not None:
        raise InvalidGraphError(problem)


def connected_component(g: RawGraph, v: VertexId) -> RawGraph:
    """The induced subgraph on everything reachable from v, labels restricted."""
    if v not in set(g.vertices):
        raise InvalidGraphError(f"unknown vertex id {v!r}")
    neighbours: Dict[VertexId, set] = {u: set() for u in g.vertices}
    for e in g.edges:
        (a, _), (b, _) = tuple(e)
        neighbours[a].add(b)
        neighbours[b].add(a)
    reached = {v}
    frontier = [v]
    while frontier:
        nxt = []
        for u in frontier:
            for w in neighbours[u]:
                if w not in reached:
                    reached.add(w)
                    nxt.append(w)
        frontier = nxt
    vertices = tuple(u for u in g.vertices if u in reached)
    edges = frozenset(e for e in g.edges if all(u in reached for (u, _p) in e))
    return RawGraph(
        alphabets=g.alphabets,
        vertices=vertices,
        edges=edges,
        vertex_labels={u: l for u, l in g.vertex_labels.items() if u in reached},
        edge_labels={e: l for e, l in g.edge_labels.items() if e in edges},
    )


@dataclass(frozen=True)
class PointedRawGraph:
    """A raw graph together with a distinguished origin vertex."""

    graph: RawGraph
    origin: VertexId

    def __post_init__(self) -> None:
        if self.origin not in set(self.graph.vertices):
            raise InvalidGraphError(f"origin {self.origin!r} is not a vertex")


# ---------------------------------------------------------------------------
# Text format
#
#   ports a b c d
#   vlabels 0 1
#   elabels x
#   vertex <id> [label=<sigma>]
#   edge <id>:<port> <id>:<port> [label=<delta>]
#   pointer <id>
#
# '#' starts a comment; tokens are whitespace-separated.  Parsing is strict.
# ---------------------------------------------------------------------------


def _parse_half_edge(token: str, line_no: int) -> Tuple[str, str]:
    head, sep, port = token.rpartition(":")
    if not sep or not head or not port:
        raise GraphFormatError(f"line {line_no}: malformed half-edge {token!r}")
    return head, port


def parse_graph(text: str) -> PointedRawGraph:
    """Parse the text format into a pointed raw graph; all errors are hard."""
    ports: Optional[Tuple[str, ...]] = None
    vlabels: Tuple[str, ...] = ()
    elabels: Tuple[str, ...] = ()
    vertices: list = []
    vertex_labels: Dict[str, str] = {}
    edges: list = []
    edge_labels: Dict[Edge, str] = {}
    pointer: Optional[str] = None

    def take_label(tokens: list, line_no: int) -> Optional[str]:
        if tokens and tokens[-1].startswith("label="):
            return tokens.pop()[len("label="):]
        if any(t.startswith("label=") for t in tokens):
            raise GraphFormatError(f"line {line_no}: label= must come last")
        return None

    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        keyword, args = tokens[0], tokens[1:]
        if keyword == "ports":
            if ports is not None:
                raise GraphFormatError(f"line {line_no}: duplicate ports line")
            if not args:
                raise GraphFormatError(f"line {line_no}: empty port alphabet")
            ports = tuple(args)
        elif keyword == "vlabels":
            vlabels = tuple(args)
        elif keyword == "elabels":
            elabels = tuple(args)
        elif keyword == "vertex":
            label = take_label(args, line_no)
            if len(args) != 1:
                raise GraphFormatError(f"line {line_no}: vertex wants one id")
            vid = args[0]
            if vid in vertices:
                raise GraphFormatError(f"line {line_no}: duplicate vertex {vid!r}")
            vertices.append(vid)
            if label is not None:
                vertex_labels[vid] = label
        elif keyword == "edge":
            label = take_label(args, line_no)
            if len(args) != 2:
                raise GraphFormatError(f"line {line_no}: edge wants two half-edges")
            h1 = _parse_half_edge(args[0], line_no)
            h2 = _parse_half_edge(args[1], line_no)
            if h1 == h2:
                raise GraphFormatError(f"line {line_no}: degenerate edge {args[0]}")
            e = frozenset((h1, h2))
            edges.append((e, line_no))
            if label is not None:
                edge_labels[e] = label
        elif keyword == "pointer":
            if pointer is not None:
                raise GraphFormatError(f"line {line_no}: duplicate pointer line")
            if len(args) != 1:
                raise GraphFormatError(f"line {line_no}: pointer wants one id")
            pointer = args[0]
        else:
            raise GraphFormatError(f"line {line_no}: unknown keyword {keyword!r}")

    if ports is None:
        raise GraphFormatError("missing ports line")
    if pointer is None:
        raise GraphFormatError("missing pointer line")

    alphabets = Alphabets.make(ports, vlabels, elabels)
    vertex_set = set(vertices)
    used: Dict[Tuple[str, str], int] = {}
    for e, line_no in edges:
        for (v, p) in e:
            if v not in vertex_set:
                raise GraphFormatError(f"line {line_no}: undeclared vertex {v!r}")
            if p not in alphabets.port_alphabet:
                raise GraphFormatError(f"line {line_no}: unknown port {p!r}")
            if (v, p) in used:
                raise GraphFormatError(
                    f"line {line_no}: half-edge {v}:{p} already used on line {used[(v, p)]}")
            used[(v, p)] = line_no
    for v, l in vertex_labels.items():
        if l not in alphabets.vertex_labels:
            raise GraphFormatError(f"unknown vertex label {l!r} on {v!r}")
    for e, l in edge_labels.items():
        if l not in alphabets.edge_labels:
            raise GraphFormatError(f"unknown edge label {l!r}")
    if pointer not in vertex_set:
        raise GraphFormatError(f"pointer {pointer!r} is not a declared vertex")

    g = RawGraph(
        alphabets=alphabets,
        vertices=tuple(vertices),
        edges=frozenset(e for e, _ in edges),
        vertex_labels=vertex_labels,
        edge_labels=edge_labels,
    )
    ensure_valid(g)
    return PointedRawGraph(g, pointer)


def serialize_graph(pg: PointedRawGraph, token=str) -> str:
    """Write the text format deterministically.

    Vertices appear in declared order; edges are sorted by their half-edge
    pairs under (vertex declared order, port order).  `token` renders a
    vertex id as its file token and must be injective on the vertices.
    """
    g = pg.graph
    tokens = {v: token(v) for v in g.vertices}
    if len(set(tokens.values())) != len(tokens):
        raise GraphFormatError("vertex id tokens collide")
    for t in tokens.values():
        if not t or any(c.isspace() for c in t) or ":" in t or "#" in t:
            raise GraphFormatError(f"vertex token {t!r} not writable")
    rank = {v: i for i, v in enumerate(g.vertices)}

    def half_key(h: HalfEdge) -> Tuple[int, int]:
        return (rank[h[0]], g.alphabets.port_index(h[1]))

    out = io.StringIO()
    out.write("ports " + " ".join(g.alphabets.ports) + "\n")
    if g.alphabets.vertex_labels:
        out.write("vlabels " + " ".join(g.alphabets.vertex_labels) + "\n")
    if g.alphabets.edge_labels:
        out.write("elabels " + " ".join(g.alphabets.edge_labels) + "\n")
    for v in g.vertices:
        line = f"vertex {tokens[v]}"
        if v in g.vertex_labels:
            line += f" label={g.vertex_labels[v]}"
        out.write(line + "\n")
    for e in sorted(g.edges, key=lambda e: tuple(sorted(half_key(h) for h in e))):
        h1, h2 = sorted(e, key=half_key)
        line = f"edge {tokens[h1[0]]}:{h1[1]} {tokens[h2[0]]}:{h2[1]}"
        if e in g.edge_labels:
            line += f" label={g.edge_labels[e]}"
        out.write(line + "\n")
    out.write(f"pointer {tokens[pg.origin]}\n")
    return out.getvalue()
