"""Patch graphs, consistency-checked unions, and locally generated dynamics.

A patch is a raw graph whose vertex ids are disjoint token sets: a vertex
that persists from the host graph is the singleton of its name, a fresh
vertex is the singleton of a (name, index) tag.  Two patches may be glued
exactly when they nowhere disagree, and a local rule builds a whole image
graph as the union of one patch per vertex.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Hashable, List, Mapping, Optional, Tuple

from .dynamics import Dynamics, VertexCorrespondence
from .modulo import (
    CanonicalGraph,
    DiskGraph,
    canonicalize,
    canonicalize_with_names,
    disk,
    shift,
)
from .paths import EPSILON, Path, format_path, parse_path
from .portgraph import (
    Alphabets,
    GraphError,
    GraphFormatError,
    PointedRawGraph,
    RawGraph,
    ensure_valid,
    parse_graph,
    serialize_graph,
)


class PatchError(GraphError):
    """Patches could not be combined."""


class PatchInconsistencyError(PatchError):
    def __init__(self, message: str, anchors: Optional[Tuple[Path, Path]] = None):
        super().__init__(message)
        self.anchors = anchors


def _ids_clash(x: Hashable, y: Hashable) -> bool:
    """Distinct ids that nevertheless overlap; only token sets can overlap."""
    if x == y:
        return False
    if isinstance(x, frozenset) and isinstance(y, frozenset):
        return bool(x & y)
    return False


def consistent(G: RawGraph, H: RawGraph) -> Optional[str]:
    """None when the two patches nowhere disagree, else the first conflict.

    Four conditions: overlapping vertex ids must be equal; a shared
    half-edge must carry the same edge; shared edges and shared vertices
    must agree on labels wherever both sides define one.
    """
    if G.alphabets != H.alphabets:
        return "patches use different alphabets"
    for x in sorted(G.vertices, key=repr):
        for y in sorted(H.vertices, key=repr):
            if _ids_clash(x, y):
                return f"vertex ids {x!r} and {y!r} overlap without being equal"
    adj_g = G.adjacency()
    adj_h = H.adjacency()
    shared = set(G.vertices) & set(H.vertices)
    for x in sorted(shared, key=repr):
        for port in sorted(set(adj_g[x]) & set(adj_h[x])):
            if adj_g[x][port] != adj_h[x][port]:
                return (f"half-edge {x!r}:{port} leads to "
                        f"{adj_g[x][port]!r} in one patch and "
                        f"{adj_h[x][port]!r} in the other")
    for e in G.edge_labels:
        if e in H.edge_labels and G.edge_labels[e] != H.edge_labels[e]:
            return f"edge {set(e)!r} labelled both {G.edge_labels[e]!r} and {H.edge_labels[e]!r}"
    for x in sorted(shared, key=repr):
        lg, lh = G.vertex_labels.get(x), H.vertex_labels.get(x)
        if lg is not None and lh is not None and lg != lh:
            return f"vertex {x!r} labelled both {lg!r} and {lh!r}"
    return None


def union(G: RawGraph, H: RawGraph) -> RawGraph:
    """Glue two consistent patches: unions of vertices, edges and labels."""
    problem = consistent(G, H)
    if problem is not None:
        raise PatchInconsistencyError(problem)
    g_set = set(G.vertices)
    vertices = G.vertices + tuple(v for v in H.vertices if v not in g_set)
    vertex_labels = dict(G.vertex_labels)
    vertex_labels.update(H.vertex_labels)
    edge_labels = dict(G.edge_labels)
    edge_labels.update(H.edge_labels)
    return RawGraph(alphabets=G.alphabets, vertices=vertices,
                    edges=G.edges | H.edges, vertex_labels=vertex_labels,
                    edge_labels=edge_labels)


@dataclass(frozen=True)
class Patch:
    """A rule's output around one vertex: a patch graph plus the vertex the
    disk's origin becomes."""

    graph: RawGraph
    successor: Hashable


@dataclass(frozen=True)
class LocalRule:
    """A radius and a function turning each disk into a patch.

    Patch vertex ids must be frozensets of tokens; a token is either a path
    of the disk (a persisting vertex) or a (path, int) tag (a fresh one).
    """

    radius: int
    rule: Callable[[DiskGraph], Patch]
    name: str = "local-rule"


def _translate_token(token, X: CanonicalGraph, anchor: Path):
    if isinstance(token, Path):
        target = X.resolve(anchor.concat(token))
        if target is None:
            raise PatchError(
                f"patch at {format_path(anchor)} names {format_path(token)}, "
                f"which does not resolve")
        return target
    if isinstance(token, tuple) and len(token) == 2 and isinstance(token[0], Path):
        return (_translate_token(token[0], X, anchor), token[1])
    raise PatchError(f"unsupported patch token {token!r}")


def _translate_id(vid, X, anchor):
    if not isinstance(vid, frozenset):
        raise PatchError(f"patch vertex id {vid!r} is not a token set")
    return frozenset(_translate_token(t, X, anchor) for t in vid)


def _translate_patch(patch: Patch, X: CanonicalGraph, anchor: Path) -> Patch:
    mapping = {vid: _translate_id(vid, X, anchor) for vid in patch.graph.vertices}
    g = patch.graph
    edges = {}
    for e in g.edges:
        (u, p), (w, q) = tuple(e)
        edges[e] = frozenset(((mapping[u], p), (mapping[w], q)))
    translated = RawGraph(
        alphabets=g.alphabets,
        vertices=tuple(mapping[v] for v in g.vertices),
        edges=frozenset(edges.values()),
        vertex_labels={mapping[v]: l for v, l in g.vertex_labels.items()},
        edge_labels={edges[e]: l for e, l in g.edge_labels.items()},
    )
    return Patch(translated, mapping[patch.successor])


def apply_local_rule(rule: LocalRule, X: CanonicalGraph
                     ) -> Tuple[CanonicalGraph, VertexCorrespondence]:
    """Run the rule on every vertex's disk and glue the translated patches.

    Any two patches must be consistent; the first failure is reported with
    the two offending anchor vertices.
    """
    patches: List[Tuple[Path, Patch]] = []
    for u in X.vertices:
        local_view = disk(shift(X, u), rule.radius)
        patches.append((u, _translate_patch(rule.rule(local_view), X, u)))
    for i, (u, pu) in enumerate(patches):
        for (w, pw) in patches[i + 1:]:
            problem = consistent(pu.graph, pw.graph)
            if problem is not None:
                raise PatchInconsistencyError(
                    f"patches at {format_path(u)} and {format_path(w)} "
                    f"conflict: {problem}", anchors=(u, w))
    merged = patches[0][1].graph
    for (_u, p) in patches[1:]:
        merged = union(merged, p.graph)
    ensure_valid(merged)
    origin = next(p.successor for (u, p) in patches if u == EPSILON)
    Y, names = canonicalize_with_names(PointedRawGraph(merged, origin))
    corr = {u: names[p.successor] for (u, p) in patches}
    return Y, corr


class LocalRuleDynamics(Dynamics):
    """A dynamics induced by applying a local rule at every vertex."""

    def __init__(self, rule: LocalRule, alphabets: Optional[Alphabets] = None):
        self.rule = rule
        self.name = rule.name
        self.alphabets = alphabets
        self.declared_radius = rule.radius

    def apply(self, X):
        self._check_signature(X)
        return apply_local_rule(self.rule, X)


def identity_local_rule(radius: int = 0) -> LocalRule:
    """The do-nothing rule: every disk maps to itself with singleton ids."""

    def rule(view: DiskGraph) -> Patch:
        g = view.graph
        ids = {v: frozenset((v,)) for v in g.vertices}
        edges = {}
        for e in g.edges:
            (u, p), (w, q) = tuple(e)
            edges[e] = frozenset(((ids[u], p), (ids[w], q)))
        patch = RawGraph(
            alphabets=g.alphabets,
            vertices=tuple(ids[v] for v in g.vertices),
            edges=frozenset(edges.values()),
            vertex_labels={ids[v]: l for v, l in g.vertex_labels.items()},
            edge_labels={edges[e]: l for e, l in g.edge_labels.items()},
        )
        return Patch(patch, ids[EPSILON])

    return LocalRule(radius=radius, rule=rule, name="identity-local")


# ---------------------------------------------------------------------------
# Rule files: an exact-match lookup table from serialized disks to patches.
#
#   radius 0
#   disk
#   <graph text>
#   maps-to
#   <patch text, pointer = successor, ids like "eps", "ab.cd", "eps~1">
#   disk
#   ...
# ---------------------------------------------------------------------------


class RuleLookupError(PatchError):
    """A disk has no entry in the rule table."""


@dataclass(frozen=True)
class RuleTable:
    radius: int
    entries: Mapping[DiskGraph, Patch]
    name: str = "rule-table"

    def as_rule(self) -> LocalRule:
        def rule(view: DiskGraph) -> Patch:
            try:
                return self.entries[view]
            except KeyError:
                raise RuleLookupError(
                    f"no rule entry for disk:\n{view.graph.to_text()}") from None
        return LocalRule(radius=self.radius, rule=rule, name=self.name)


def _patch_token_of_text(text: str, ports) -> Hashable:
    body, sep, tag = text.partition("~")
    path = parse_path(body, ports)
    if not sep:
        return path
    if not tag.isdigit():
        raise GraphFormatError(f"bad fresh-vertex tag in {text!r}")
    return (path, int(tag))


def _patch_token_text(token) -> str:
    if isinstance(token, Path):
        return format_path(token)
    return f"{format_path(token[0])}~{token[1]}"


def parse_rule_file(text: str) -> RuleTable:
    radius: Optional[int] = None
    sections: List[Tuple[str, List[str]]] = []
    for raw_line in text.splitlines():
        stripped = raw_line.split("#", 1)[0].strip()
        if stripped.startswith("radius") and not sections:
            parts = stripped.split()
            if len(parts) != 2 or not parts[1].isdigit() or radius is not None:
                raise GraphFormatError(f"bad radius line {raw_line!r}")
            radius = int(parts[1])
        elif stripped == "disk":
            sections.append(("disk", []))
        elif stripped == "maps-to":
            if not sections or sections[-1][0] != "disk":
                raise GraphFormatError("maps-to without a preceding disk")
            sections.append(("patch", []))
        else:
            if sections:
                sections[-1][1].append(raw_line)
            elif stripped:
                raise GraphFormatError(f"content before the radius line: {raw_line!r}")
    if radius is None:
        raise GraphFormatError("missing radius line")
    if len(sections) % 2 != 0:
        raise GraphFormatError("unpaired disk section")

    entries: Dict[DiskGraph, Patch] = {}
    for i in range(0, len(sections), 2):
        disk_text = "\n".join(sections[i][1])
        patch_text = "\n".join(sections[i + 1][1])
        view = DiskGraph(canonicalize(parse_graph(disk_text)), radius)
        patch = _parse_patch(patch_text)
        if view in entries:
            raise GraphFormatError("duplicate disk entry in rule file")
        entries[view] = patch
    return RuleTable(radius=radius, entries=entries)


def _parse_patch(text: str) -> Patch:
    pg = parse_graph(text)
    g = pg.graph
    ports = g.alphabets.ports
    ids = {v: frozenset((_patch_token_of_text(v, ports),)) for v in g.vertices}
    edges = {}
    for e in g.edges:
        (u, p), (w, q) = tuple(e)
        edges[e] = frozenset(((ids[u], p), (ids[w], q)))
    patch_graph = RawGraph(
        alphabets=g.alphabets,
        vertices=tuple(ids[v] for v in g.vertices),
        edges=frozenset(edges.values()),
        vertex_labels={ids[v]: l for v, l in g.vertex_labels.items()},
        edge_labels={edges[e]: l for e, l in g.edge_labels.items()},
    )
    return Patch(patch_graph, ids[pg.origin])


def serialize_rule_file(table: RuleTable) -> str:
    def patch_text(patch: Patch) -> str:
        tokens = {}
        for vid in patch.graph.vertices:
            if not isinstance(vid, frozenset) or len(vid) != 1:
                raise GraphFormatError(f"cannot serialize patch id {vid!r}")
            tokens[vid] = _patch_token_text(next(iter(vid)))
        return serialize_graph(PointedRawGraph(patch.graph, patch.successor),
                               token=lambda v: tokens[v])

    chunks = [f"radius {table.radius}"]
    for view in sorted(table.entries, key=lambda d: d.graph.to_text()):
        chunks.append("disk")
        chunks.append(view.graph.to_text().rstrip("\n"))
        chunks.append("maps-to")
        chunks.append(patch_text(table.entries[view]).rstrip("\n"))
    return "\n".join(chunks) + "\n"
