"""Pointed graphs modulo isomorphism, held in canonical form.

Every vertex is named by the least of its shortest port-pair paths from the
origin (length first, then lexicographic under the declared port order).
Because each port carries at most one edge, a path resolves to at most one
vertex, so these names are unique and two pointed graphs are isomorphic
exactly when their canonical forms are structurally identical.  Canonical
equality is the only graph equality this package ever needs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, Mapping, Optional, Tuple

from .paths import EPSILON, Path, format_path
from .portgraph import (
    Alphabets,
    Edge,
    GraphError,
    InvalidGraphError,
    PointedRawGraph,
    RawGraph,
    ensure_valid,
    make_edge,
    serialize_graph,
)

NameEdge = FrozenSet[Tuple[Path, str]]


class PathResolutionError(GraphError):
    """A path does not resolve to a vertex of the graph."""


class CanonicalGraph:
    """A pointed graph modulo isomorphism, with path names for vertices.

    Instances are immutable and hashable; build them with
    :func:`canonicalize` (or the operations below), not directly.
    """

    __slots__ = ("alphabets", "vertices", "vertex_labels", "edges",
                 "edge_labels", "_hash", "_adj_cache", "_dist_cache")

    def __init__(self, alphabets: Alphabets, vertices: Iterable[Path],
                 vertex_labels: Mapping[Path, str], edges: Iterable[NameEdge],
                 edge_labels: Mapping[NameEdge, str]):
        self.alphabets = alphabets
        self.vertices: Tuple[Path, ...] = tuple(
            sorted(vertices, key=alphabets.path_key))
        self.vertex_labels: Dict[Path, str] = dict(vertex_labels)
        self.edges: FrozenSet[NameEdge] = frozenset(edges)
        self.edge_labels: Dict[NameEdge, str] = dict(edge_labels)
        self._adj_cache: Optional[Dict[Path, Dict[str, Tuple[Path, str]]]] = None
        self._dist_cache: Optional[Dict[Path, int]] = None
        self._hash = hash((
            self.alphabets,
            self.vertices,
            tuple(sorted(self.vertex_labels.items(),
                         key=lambda kv: alphabets.path_key(kv[0]))),
            self.edges,
            tuple(sorted(((self._edge_key(e), l) for e, l in self.edge_labels.items()))),
        ))

    def _edge_key(self, e: NameEdge):
        return tuple(sorted((self.alphabets.path_key(v), self.alphabets.port_index(p))
                            for (v, p) in e))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: Any) -> bool:
        if self is other:
            return True
        if not isinstance(other, CanonicalGraph):
            return NotImplemented
        return (self._hash == other._hash
                and self.alphabets == other.alphabets
                and self.vertices == other.vertices
                and self.vertex_labels == other.vertex_labels
                and self.edges == other.edges
                and self.edge_labels == other.edge_labels)

    def __repr__(self) -> str:
        return (f"<CanonicalGraph |V|={len(self.vertices)} "
                f"names={[format_path(v) for v in self.vertices]}>")

    def __contains__(self, name: Path) -> bool:
        return name in self.adjacency

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def adjacency(self) -> Dict[Path, Dict[str, Tuple[Path, str]]]:
        """Per-vertex map {port: (far vertex, far port)}."""
        if self._adj_cache is None:
            adj: Dict[Path, Dict[str, Tuple[Path, str]]] = {
                v: {} for v in self.vertices}
            for e in self.edges:
                (u, p), (w, q) = tuple(e)
                adj[u][p] = (w, q)
                adj[w][q] = (u, p)
            self._adj_cache = adj
        return self._adj_cache

    def distances(self) -> Dict[Path, int]:
        """BFS distance of every vertex from the origin (= its name length)."""
        if self._dist_cache is None:
            self._dist_cache = {v: len(v) for v in self.vertices}
        return self._dist_cache

    def label(self, v: Path) -> Optional[str]:
        return self.vertex_labels.get(v)

    def edge_label(self, e: NameEdge) -> Optional[str]:
        return self.edge_labels.get(e)

    def degree(self, v: Path) -> int:
        return len(self.adjacency[v])

    def free_ports(self, v: Path) -> Tuple[str, ...]:
        used = self.adjacency[v]
        return tuple(p for p in self.alphabets.ports if p not in used)

    def resolve(self, path: Path) -> Optional[Path]:
        """Follow a port-pair word from the origin; None if some hop is missing."""
        here = EPSILON
        adj = self.adjacency
        for (p, q) in path.pairs:
            hop = adj[here].get(p)
            if hop is None or hop[1] != q:
                return None
            here = hop[0]
        return here

    def to_pointed_raw(self) -> PointedRawGraph:
        """Present the canonical form as a raw graph whose ids are the names."""
        return PointedRawGraph(
            RawGraph(
                alphabets=self.alphabets,
                vertices=self.vertices,
                edges=self.edges,
                vertex_labels=dict(self.vertex_labels),
                edge_labels=dict(self.edge_labels),
            ),
            EPSILON,
        )

    def to_text(self) -> str:
        """Serialize in the graph text format with path-name vertex tokens."""
        return serialize_graph(self.to_pointed_raw(), token=format_path)


@dataclass(frozen=True)
class DiskGraph:
    """A radius-r neighbourhood of the origin with its unlabelled outer rim."""

    graph: CanonicalGraph
    radius: int


def _canonical_names(adjacency: Mapping[Any, Mapping[str, Tuple[Any, str]]],
                     origin: Any, alphabets: Alphabets) -> Dict[Any, Path]:
    """Assign every reachable vertex its least shortest path name.

    Layered BFS: a vertex at distance d+1 takes the minimum over
    (parent name).(exit, entry) for every edge from a distance-d vertex, all
    candidates having equal length, so plain lexicographic comparison of
    port-index pairs decides.
    """
    pidx = alphabets.port_index
    ports = alphabets.ports
    names: Dict[Any, Tuple[Tuple[str, str], ...]] = {origin: ()}
    keys: Dict[Any, Tuple[Tuple[int, int], ...]] = {origin: ()}
    frontier = [origin]
    while frontier:
        best: Dict[Any, Tuple[Tuple[Tuple[int, int], ...], Tuple]] = {}
        for v in frontier:
            base_key = keys[v]
            base_name = names[v]
            row = adjacency[v]
            for p in ports:
                hop = row.get(p)
                if hop is None:
                    continue
                w, q = hop
                if w in names:
                    continue
                cand_key = base_key + ((pidx(p), pidx(q)),)
                prev = best.get(w)
                if prev is None or cand_key < prev[0]:
                    best[w] = (cand_key, base_name + ((p, q),))
        frontier = sorted(best, key=lambda w: best[w][0])
        for w in frontier:
            keys[w], names[w] = best[w]
    return {v: Path(word) for v, word in names.items()}


def canonicalize_with_names(pg: PointedRawGraph
                            ) -> Tuple[CanonicalGraph, Dict[Any, Path]]:
    """Canonicalize and also return the id -> canonical name assignment."""
    ensure_valid(pg.graph)
    g = pg.graph
    names = _canonical_names(g.adjacency(), pg.origin, g.alphabets)
    if len(names) != len(g.vertices):
        missing = [v for v in g.vertices if v not in names]
        raise InvalidGraphError(
            f"graph is not connected to the origin: unreachable {missing!r}")
    canonical = _rename(g.alphabets, names, g.vertices, g.vertex_labels,
                        g.edges, g.edge_labels)
    return canonical, names


def canonicalize(pg: PointedRawGraph) -> CanonicalGraph:
    """The canonical form of a connected pointed raw graph.

    The result is independent of the vertex id choices: any two isomorphic
    presentations yield the same value.
    """
    return canonicalize_with_names(pg)[0]


def _rename(alphabets: Alphabets, names: Mapping[Any, Path],
            vertices: Iterable[Any], vertex_labels: Mapping[Any, str],
            edges: Iterable[Edge], edge_labels: Mapping[Edge, str]
            ) -> CanonicalGraph:
    new_edges = {}
    for e in edges:
        (u, p), (w, q) = tuple(e)
        new_edges[e] = frozenset(((names[u], p), (names[w], q)))
    return CanonicalGraph(
        alphabets=alphabets,
        vertices=[names[v] for v in vertices],
        vertex_labels={names[v]: l for v, l in vertex_labels.items()},
        edges=new_edges.values(),
        edge_labels={new_edges[e]: l for e, l in edge_labels.items()},
    )


def resolve(X: CanonicalGraph, path: Path) -> Optional[Path]:
    """Canonical name of the vertex reached by `path`, or None."""
    return X.resolve(path)


def shift_with_names(X: CanonicalGraph, path: Path
                     ) -> Tuple[CanonicalGraph, Dict[Path, Path]]:
    """Re-point X at the vertex named by `path`; also map old names to new."""
    target = X.resolve(path)
    if target is None:
        raise PathResolutionError(
            f"path {format_path(path)} does not resolve in {X!r}")
    names = _canonical_names(X.adjacency, target, X.alphabets)
    shifted = _rename(X.alphabets, names, X.vertices, X.vertex_labels,
                      X.edges, X.edge_labels)
    return shifted, names


def shift(X: CanonicalGraph, path: Path) -> CanonicalGraph:
    """The same graph pointed at the vertex named by `path`."""
    return shift_with_names(X, path)[0]


def disk(X: CanonicalGraph, radius: int) -> DiskGraph:
    """The disk of the given radius around the origin.

    Vertices up to distance radius+1 survive with all induced edges; vertex
    labels survive only up to distance radius, edge labels only on edges
    whose two endpoints are within distance radius.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    dist = X.distances()
    keep = {v for v, d in dist.items() if d <= radius + 1}
    edges = [e for e in X.edges if all(v in keep for (v, _p) in e)]
    vertex_labels = {v: l for v, l in X.vertex_labels.items()
                     if dist[v] <= radius}
    edge_labels = {e: l for e, l in X.edge_labels.items()
                   if all(dist[v] <= radius for (v, _p) in e)}
    pruned = RawGraph(
        alphabets=X.alphabets,
        vertices=tuple(v for v in X.vertices if v in keep),
        edges=frozenset(edges),
        vertex_labels=vertex_labels,
        edge_labels=edge_labels,
    )
    return DiskGraph(canonicalize(PointedRawGraph(pruned, EPSILON)), radius)


def shift_equivalence_classes(X: CanonicalGraph) -> Tuple[Tuple[Path, ...], ...]:
    """Partition the vertices into groups that re-point to the same graph."""
    groups: Dict[CanonicalGraph, list] = {}
    for v in X.vertices:
        groups.setdefault(shift(X, v), []).append(v)
    key = X.alphabets.path_key
    return tuple(sorted((tuple(sorted(g, key=key)) for g in groups.values()),
                        key=lambda g: key(g[0])))


def is_asymmetric(X: CanonicalGraph) -> bool:
    """True when every shift-equivalence class is a singleton."""
    return all(len(c) == 1 for c in shift_equivalence_classes(X))


def smallest_prime_above(n: int) -> int:
    """The least prime strictly greater than n."""
    candidate = max(n + 1, 2)
    while True:
        if all(candidate % d for d in range(2, int(candidate ** 0.5) + 1)):
            return candidate
        candidate += 1


class NoHostVertexError(GraphError):
    """No vertex with a free port or a removable cycle edge was found."""


def primal_extension(X: CanonicalGraph, force: bool = False) -> CanonicalGraph:
    """Attach a line of fresh vertices to break every shift symmetry.

    The line brings the vertex count up to the least prime strictly greater
    than |V|+2, which together with the degree-1 line end forces trivial
    shift-equivalence classes.  The host is the vertex farthest from the
    origin (least name on ties); if it has no free port, its
    lexicographically greatest non-bridge incident edge is removed first.

    Requires at least two ports and a nontrivial symmetry unless `force`.
    """
    if len(X.alphabets.ports) < 2:
        raise ValueError("primal extension needs at least two ports")
    if not force and is_asymmetric(X):
        raise ValueError(
            "graph is already asymmetric; pass force=True to extend anyway")

    n = len(X.vertices)
    p = smallest_prime_above(n + 2)
    fresh = p - n

    # Host: farthest from the origin, ties broken by least name.
    key = X.alphabets.path_key
    far = max(len(v) for v in X.vertices)
    host = min((v for v in X.vertices if len(v) == far), key=key)

    vertices = list(X.vertices)
    edges = set(X.edges)
    vertex_labels = dict(X.vertex_labels)
    edge_labels = dict(X.edge_labels)

    free = [q for q in X.alphabets.ports if q not in X.adjacency[host]]
    if not free:
        removable = [e for e in X.edges
                     if any(v == host for (v, _p) in e) and _is_cycle_edge(X, e)]
        if not removable:
            raise NoHostVertexError(
                f"host {format_path(host)} has neither a free port nor a cycle edge")
        victim = max(removable, key=lambda e: X._edge_key(e))
        edges.discard(victim)
        edge_labels.pop(victim, None)
        freed = sorted((prt for (v, prt) in victim if v == host),
                       key=X.alphabets.port_index)
        free = freed
    attach_port = free[0]

    a, b = X.alphabets.ports[0], X.alphabets.ports[1]
    sigma = X.alphabets.vertex_labels[0] if X.alphabets.vertex_labels else None
    line = [("line", i) for i in range(fresh)]
    vertices.extend(line)
    if sigma is not None:
        for w in line:
            vertex_labels[w] = sigma
    edges.add(make_edge(host, attach_port, line[0], b))
    for i in range(fresh - 1):
        edges.add(make_edge(line[i], a, line[i + 1], b))

    extended = RawGraph(
        alphabets=X.alphabets,
        vertices=tuple(vertices),
        edges=frozenset(edges),
        vertex_labels=vertex_labels,
        edge_labels=edge_labels,
    )
    return canonicalize(PointedRawGraph(extended, EPSILON))


def _is_cycle_edge(X: CanonicalGraph, e: NameEdge) -> bool:
    """True when removing e keeps the graph connected (e lies on a cycle)."""
    (u, _p), (w, _q) = tuple(e)
    if u == w:
        return True
    neighbours: Dict[Path, set] = {v: set() for v in X.vertices}
    for other in X.edges:
        if other == e:
            continue
        (x, _), (y, _) = tuple(other)
        neighbours[x].add(y)
        neighbours[y].add(x)
    seen = {u}
    frontier = [u]
    while frontier:
        nxt = []
        for v in frontier:
            for t in neighbours[v]:
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
        frontier = nxt
    return w in seen
