"""Exhaustive finite families and desk-scale reversibility verification.

Invertibility quantifies over all graphs; here it is checked over explicit
finite families closed under the dynamics.  When a dynamics permutes a
family, its inverse is realized as a lookup table whose reversed
correspondences also invert the per-graph vertex maps.
"""
from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from itertools import product as iter_product
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple

from .dynamics import Dynamics, DynamicsError, VertexCorrespondence
from .modulo import (
    CanonicalGraph,
    canonicalize,
    shift_equivalence_classes,
)
from .paths import Path, format_path
from .portgraph import (
    Alphabets,
    GraphError,
    PointedRawGraph,
    RawGraph,
    make_edge,
)

FAMILY_CAP_ENV = "CGD_FAMILY_CAP"
DEFAULT_FAMILY_CAP = 200_000


class FamilyCapError(GraphError):
    """Enumeration hit the configured resource cap."""


class OutOfFamilyError(GraphError):
    """A dynamics mapped a family member outside the family."""


class InverseConstructionError(GraphError):
    """The dynamics is not invertible over the supplied family."""


@dataclass(frozen=True, eq=False)
class GraphFamily:
    """An explicit, duplicate-free, ordered set of canonical graphs."""

    members: Tuple[CanonicalGraph, ...]
    alphabets: Alphabets
    _index: Dict[CanonicalGraph, int] = field(repr=False, default_factory=dict)

    @staticmethod
    def from_graphs(graphs: Iterable[CanonicalGraph],
                    alphabets: Optional[Alphabets] = None) -> "GraphFamily":
        members: List[CanonicalGraph] = []
        seen = set()
        for g in graphs:
            if g not in seen:
                seen.add(g)
                members.append(g)
        if not members and alphabets is None:
            raise ValueError("empty family needs explicit alphabets")
        return GraphFamily(tuple(members), alphabets or members[0].alphabets)

    def __post_init__(self) -> None:
        self._index.update({g: i for i, g in enumerate(self.members)})
        if len(self._index) != len(self.members):
            raise ValueError("family contains duplicates")

    def __contains__(self, g: CanonicalGraph) -> bool:
        return g in self._index

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __repr__(self) -> str:
        return f"<GraphFamily of {len(self.members)}>"


def _family_cap(cap: Optional[int]) -> int:
    if cap is not None:
        return cap
    return int(os.environ.get(FAMILY_CAP_ENV, str(DEFAULT_FAMILY_CAP)))


def _sorted_members(graphs: Iterable[CanonicalGraph]) -> Tuple[CanonicalGraph, ...]:
    return tuple(sorted(graphs, key=lambda g: (len(g.vertices), g.to_text())))


def enumerate_family(alphabets: Alphabets, max_vertices: int,
                     predicate: Optional[Callable[[CanonicalGraph], bool]] = None,
                     prune: bool = False,
                     raw_prune: Optional[Callable[[RawGraph], bool]] = None,
                     cap: Optional[int] = None) -> GraphFamily:
    """All connected canonical graphs with at most `max_vertices` vertices.

    Search by canonical extension: grow one fresh pendant vertex or one new
    edge between free ports at a time, deduplicating canonical forms, which
    reaches every pointed connected graph from its origin seed.  Vertices
    are labelled totally when the vertex alphabet is non-empty (likewise
    edges), matching how the finite families are counted.

    `predicate` filters the output; with `prune=True` it also gates the
    search, which is only complete for predicates closed under removing a
    pendant vertex or an edge (mark consistency is; "has a head" is not).
    `raw_prune`, when given, discards candidate presentations before they
    are canonicalized; it must accept at least everything `prune` keeps.
    """
    if max_vertices < 1:
        raise ValueError("max_vertices must be >= 1")
    cap_n = _family_cap(cap)
    vlabels: Tuple[Optional[str], ...] = alphabets.vertex_labels or (None,)
    elabels: Tuple[Optional[str], ...] = alphabets.edge_labels or (None,)

    def admit(g: CanonicalGraph) -> bool:
        return not (prune and predicate is not None and not predicate(g))

    seen = set()
    queue: deque = deque()
    for sigma in vlabels:
        raw = RawGraph(alphabets=alphabets, vertices=(0,),
                       vertex_labels={} if sigma is None else {0: sigma})
        g = canonicalize(PointedRawGraph(raw, 0))
        if g not in seen and admit(g):
            seen.add(g)
            queue.append(g)
    while queue:
        g = queue.popleft()
        for raw in _extensions(g, max_vertices, vlabels, elabels):
            if raw_prune is not None and not raw_prune(raw):
                continue
            h = canonicalize(PointedRawGraph(raw, raw.vertices[0]))
            if h in seen or not admit(h):
                continue
            seen.add(h)
            if len(seen) > cap_n:
                raise FamilyCapError(
                    f"family exceeds cap of {cap_n} graphs "
                    f"(set {FAMILY_CAP_ENV} to raise it)")
            queue.append(h)
    members = [g for g in seen if predicate is None or predicate(g)]
    return GraphFamily(_sorted_members(members), alphabets)


def _extensions(X: CanonicalGraph, max_vertices: int,
                vlabels: Tuple[Optional[str], ...],
                elabels: Tuple[Optional[str], ...]) -> Iterable[RawGraph]:
    """Candidate one-step extensions, as raw graphs pointed at their first id."""
    alphabets = X.alphabets
    adj = X.adjacency
    free = [(v, p) for v in X.vertices for p in alphabets.ports
            if p not in adj[v]]
    base = X.to_pointed_raw().graph
    fresh = "fresh"
    if len(X.vertices) < max_vertices:
        for (v, p) in free:
            for q in alphabets.ports:
                for sigma in vlabels:
                    for delta in elabels:
                        e = make_edge(v, p, fresh, q)
                        vertex_labels = dict(base.vertex_labels)
                        if sigma is not None:
                            vertex_labels[fresh] = sigma
                        edge_labels = dict(base.edge_labels)
                        if delta is not None:
                            edge_labels[e] = delta
                        yield RawGraph(alphabets=alphabets,
                                       vertices=base.vertices + (fresh,),
                                       edges=base.edges | {e},
                                       vertex_labels=vertex_labels,
                                       edge_labels=edge_labels)
    for i, (v, p) in enumerate(free):
        for (w, q) in free[i + 1:]:
            for delta in elabels:
                e = make_edge(v, p, w, q)
                edge_labels = dict(base.edge_labels)
                if delta is not None:
                    edge_labels[e] = delta
                yield RawGraph(alphabets=alphabets, vertices=base.vertices,
                               edges=base.edges | {e},
                               vertex_labels=dict(base.vertex_labels),
                               edge_labels=edge_labels)


def brute_force_family(alphabets: Alphabets, max_vertices: int,
                       predicate: Optional[Callable[[CanonicalGraph], bool]] = None,
                       cap: Optional[int] = None) -> GraphFamily:
    """Independent generator: every partial port matching, every pointing.

    Exponential in vertices times ports; used only to cross-validate the
    extension search at very small sizes.
    """
    cap_n = _family_cap(cap)
    vlabels: Tuple[Optional[str], ...] = alphabets.vertex_labels or (None,)
    elabels: Tuple[Optional[str], ...] = alphabets.edge_labels or (None,)
    out = set()
    for n in range(1, max_vertices + 1):
        half_edges = [(v, p) for v in range(n) for p in alphabets.ports]
        for matching in _partial_matchings(half_edges):
            edges = frozenset(frozenset(pair) for pair in matching)
            if any(len(e) != 2 for e in edges):
                continue
            if not _connected(n, edges):
                continue
            for labelling in iter_product(vlabels, repeat=n):
                vertex_labels = {v: l for v, l in enumerate(labelling)
                                 if l is not None}
                for edge_labelling in iter_product(elabels, repeat=len(edges)):
                    edge_labels = {e: l for e, l in
                                   zip(sorted(edges, key=repr), edge_labelling)
                                   if l is not None}
                    raw = RawGraph(alphabets=alphabets,
                                   vertices=tuple(range(n)),
                                   edges=edges, vertex_labels=vertex_labels,
                                   edge_labels=edge_labels)
                    for origin in range(n):
                        g = canonicalize(PointedRawGraph(raw, origin))
                        if predicate is None or predicate(g):
                            out.add(g)
                            if len(out) > cap_n:
                                raise FamilyCapError(
                                    f"family exceeds cap of {cap_n}")
    return GraphFamily(_sorted_members(out), alphabets)


def _partial_matchings(items: List) -> Iterable[List[Tuple]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for m in _partial_matchings(rest):
        yield m
    for i in range(len(rest)):
        for m in _partial_matchings(rest[:i] + rest[i + 1:]):
            yield m + [(first, rest[i])]


def _connected(n: int, edges: FrozenSet) -> bool:
    if n == 1:
        return True
    neighbours: Dict[int, set] = {v: set() for v in range(n)}
    for e in edges:
        (a, _), (b, _) = tuple(e)
        neighbours[a].add(b)
        neighbours[b].add(a)
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for v in frontier:
            for w in neighbours[v]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return len(seen) == n


# ---------------------------------------------------------------------------
# Checks over families
# ---------------------------------------------------------------------------


def check_bijective_on_family(D: Dynamics, fam: GraphFamily) -> Optional[str]:
    """None when D permutes the family; else the first collision or gap.

    Raises OutOfFamilyError when an image leaves the family, since then
    bijectivity over the family is not even well-posed.
    """
    images: Dict[CanonicalGraph, CanonicalGraph] = {}
    for X in fam:
        Y = D.apply(X)[0]
        if Y not in fam:
            raise OutOfFamilyError(
                f"{D.name} maps a {len(X.vertices)}-vertex member to a "
                f"{len(Y.vertices)}-vertex graph outside the family")
        if Y in images:
            return (f"not injective: two members share the image "
                    f"{Y!r}")
        images[Y] = X
    for X in fam:
        if X not in images:
            return f"not surjective: member {X!r} is never reached"
    return None


def check_vertex_preserving(D: Dynamics, X: CanonicalGraph) -> Optional[str]:
    """None when the correspondence is a bijection onto the image's vertices."""
    Y, R = D.apply(X)
    values = list(R.values())
    if len(set(values)) != len(values):
        return "correspondence is not injective"
    if set(values) != set(Y.vertices):
        missing = sorted(set(Y.vertices) - set(values),
                         key=Y.alphabets.path_key)
        return f"correspondence misses image vertex {format_path(missing[0])}"
    return None


def vertex_preservation_exceptions(D: Dynamics, fam: GraphFamily
                                   ) -> List[CanonicalGraph]:
    """The family members on which the correspondence fails to be bijective."""
    return [X for X in fam if check_vertex_preserving(D, X) is not None]


def check_class_preservation(D: Dynamics, X: CanonicalGraph) -> Optional[str]:
    """Shift-equivalence must transfer along the correspondence, both ways."""
    Y, R = D.apply(X)
    class_x = _class_ids(X)
    class_y = _class_ids(Y)
    verts = X.vertices
    for i, u in enumerate(verts):
        for v in verts[i:]:
            same_source = class_x[u] == class_x[v]
            same_image = class_y[R[u]] == class_y[R[v]]
            if same_source != same_image:
                return (f"vertices {format_path(u)} and {format_path(v)}: "
                        f"equivalent in source={same_source}, "
                        f"in image={same_image}")
    return None


def _class_ids(X: CanonicalGraph) -> Dict[Path, int]:
    ids = {}
    for i, cls in enumerate(shift_equivalence_classes(X)):
        for v in cls:
            ids[v] = i
    return ids


@dataclass(frozen=True, eq=False)
class InverseTable:
    """Lookup realization of the inverse of a family-permuting dynamics.

    `corr_inverse[Y]` inverts the forward correspondence when that is a
    bijection; on the finitely many members where it is not, every image
    vertex is sent to the least-named source vertex whose forward image is
    shift-equivalent to it.
    """

    family: GraphFamily
    forward: Dict[CanonicalGraph, CanonicalGraph]
    backward: Dict[CanonicalGraph, CanonicalGraph]
    forward_corr: Dict[CanonicalGraph, VertexCorrespondence]
    corr_inverse: Dict[CanonicalGraph, VertexCorrespondence]
    name: str = "inverse-table"

    def as_dynamics(self) -> "TableDynamics":
        return TableDynamics(self)


class TableDynamics(Dynamics):
    """Apply a tabulated inverse: lookup the source graph and correspondence."""

    def __init__(self, table: InverseTable, name: Optional[str] = None):
        self.table = table
        self.name = name or table.name
        self.alphabets = table.family.alphabets

    def apply(self, X):
        self._check_signature(X)
        try:
            Y = self.table.backward[X]
        except KeyError:
            raise DynamicsError(
                f"{self.name}: graph not tabulated "
                f"({len(X.vertices)} vertices)") from None
        return Y, dict(self.table.corr_inverse[X])


def serialize_inverse_table(table: InverseTable) -> str:
    """Write the table as paired graph blocks in family order.

    Each member's text is followed by its image's text and one `corr` line
    per image vertex giving the inverse correspondence.
    """
    chunks = []
    for X in table.family:
        Y = table.forward[X]
        chunks.append("source")
        chunks.append(X.to_text().rstrip("\n"))
        chunks.append("image")
        chunks.append(Y.to_text().rstrip("\n"))
        inverse = table.corr_inverse[Y]
        for w in Y.vertices:
            chunks.append(f"corr {format_path(w)} {format_path(inverse[w])}")
    return "\n".join(chunks) + "\n"


def build_inverse(D: Dynamics, fam: GraphFamily) -> InverseTable:
    """Tabulate D over the family and invert it, correspondences included."""
    problem = check_bijective_on_family(D, fam)
    if problem is not None:
        raise InverseConstructionError(problem)
    forward: Dict[CanonicalGraph, CanonicalGraph] = {}
    forward_corr: Dict[CanonicalGraph, VertexCorrespondence] = {}
    for X in fam:
        Y, R = D.apply(X)
        forward[X] = Y
        forward_corr[X] = R
    backward = {Y: X for X, Y in forward.items()}
    corr_inverse: Dict[CanonicalGraph, VertexCorrespondence] = {}
    for X, Y in forward.items():
        R = forward_corr[X]
        if check_vertex_preserving(D, X) is None:
            corr_inverse[Y] = {w: v for v, w in R.items()}
        else:
            class_y = _class_ids(Y)
            inverse: VertexCorrespondence = {}
            key = X.alphabets.path_key
            for w in Y.vertices:
                candidates = [v for v in X.vertices
                              if class_y[R[v]] == class_y[w]]
                if not candidates:
                    raise InverseConstructionError(
                        f"no source vertex maps into the class of an image "
                        f"vertex of {Y!r}")
                inverse[w] = min(candidates, key=key)
            corr_inverse[Y] = inverse
    return InverseTable(family=fam, forward=forward, backward=backward,
                        forward_corr=forward_corr, corr_inverse=corr_inverse,
                        name=f"{D.name}-inverse")
