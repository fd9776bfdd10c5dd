"""Marked graphs and the decomposition of a reversible step into local gates.

The label and port alphabets are doubled with a mark bit.  A vertex's mark
lives in its label; every port at the far end of one of its edges carries
the same bit, so marks can be read off locally from either side.  On top of
this sit: the mark gate (toggle the origin's mark), the reversible
extension of a dynamics to marked graphs (act on unmarked regions, freeze
marked ones), its conjugate mark gate, and anchored products of gates.
One global step then factors into a product of conjugate marks followed by
a product of unmarks, each acting only inside a bounded disk.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .dynamics import (
    CompositeDynamics,
    Dynamics,
    VertexCorrespondence,
    identity_correspondence,
)
from .modulo import (
    CanonicalGraph,
    canonicalize_with_names,
    disk,
    shift,
    shift_with_names,
)
from .paths import EPSILON, Path, format_path
from .patches import consistent, union
from .portgraph import (
    Alphabets,
    GraphError,
    PointedRawGraph,
    RawGraph,
)
from .reversibility import GraphFamily, build_inverse


class MarkError(GraphError):
    """Mark structure is missing or inconsistent."""


class UnionInconsistencyError(GraphError):
    """A transformed region conflicts with the frozen part it borders."""


@dataclass(frozen=True)
class MarkSpace:
    """The doubled alphabets and the bookkeeping between them.

    Marked tokens are base tokens with a 0/1 suffix; construction fails if
    that produces collisions.  Mark bits need somewhere to live, so the
    base vertex alphabet must be non-empty and graphs fully labelled.
    """

    base: Alphabets
    marked: Alphabets

    @staticmethod
    def for_base(base: Alphabets) -> "MarkSpace":
        if not base.vertex_labels:
            raise MarkError("mark bits live on vertex labels; "
                            "the base vertex alphabet is empty")
        ports = tuple(p + bit for p in base.ports for bit in "01")
        vlabels = tuple(x + bit for x in base.vertex_labels for bit in "01")
        if len(set(ports)) != len(ports) or len(set(vlabels)) != len(vlabels):
            raise MarkError("mark suffixes collide with base tokens")
        marked = Alphabets.make(ports, vlabels, base.edge_labels)
        return MarkSpace(base=base, marked=marked)

    # -- token bookkeeping ---------------------------------------------

    def port(self, base_port: str, bit: int) -> str:
        self.base.port_index(base_port)
        return base_port + str(bit)

    def port_base(self, marked_port: str) -> Tuple[str, int]:
        base, bit = marked_port[:-1], marked_port[-1]
        if bit not in "01" or base not in self.base.port_alphabet:
            raise MarkError(f"not a marked port token: {marked_port!r}")
        return base, int(bit)

    def port_bit(self, marked_port: str) -> int:
        return self.port_base(marked_port)[1]

    def toggle_port(self, marked_port: str) -> str:
        base, bit = self.port_base(marked_port)
        return self.port(base, 1 - bit)

    def label(self, base_label: str, bit: int) -> str:
        if base_label not in self.base.vertex_labels:
            raise MarkError(f"unknown base label {base_label!r}")
        return base_label + str(bit)

    def label_base(self, marked_label: str) -> Tuple[str, int]:
        base, bit = marked_label[:-1], marked_label[-1]
        if bit not in "01" or base not in self.base.vertex_labels:
            raise MarkError(f"not a marked label token: {marked_label!r}")
        return base, int(bit)

    def toggle_label(self, marked_label: str) -> str:
        base, bit = self.label_base(marked_label)
        return self.label(base, 1 - bit)

    def vertex_mark(self, X: CanonicalGraph, v: Path) -> int:
        label = X.vertex_labels.get(v)
        if label is None:
            raise MarkError(f"vertex {format_path(v)} is unlabelled; "
                            f"its mark is undefined")
        return self.label_base(label)[1]

    # -- moving between the spaces ---------------------------------------

    def lift_with_names(self, X: CanonicalGraph
                        ) -> Tuple[CanonicalGraph, Dict[Path, Path]]:
        """The same graph over the doubled alphabets, every bit zero."""
        if X.alphabets != self.base:
            raise MarkError("lift expects a graph over the base alphabets")
        return self._retokenize(X, self.marked,
                                port_map=lambda p: self.port(p, 0),
                                label_map=lambda l: self.label(l, 0))

    def lift(self, X: CanonicalGraph) -> CanonicalGraph:
        return self.lift_with_names(X)[0]

    def drop_with_names(self, X: CanonicalGraph
                        ) -> Tuple[CanonicalGraph, Dict[Path, Path]]:
        """Strip all bits; only sound when no vertex uses a port both ways."""
        if X.alphabets != self.marked:
            raise MarkError("drop expects a graph over the marked alphabets")
        return self._retokenize(X, self.base,
                                port_map=lambda p: self.port_base(p)[0],
                                label_map=lambda l: self.label_base(l)[0])

    def drop(self, X: CanonicalGraph) -> CanonicalGraph:
        return self.drop_with_names(X)[0]

    @staticmethod
    def _retokenize(X: CanonicalGraph, alphabets: Alphabets,
                    port_map: Callable[[str], str],
                    label_map: Callable[[str], str]
                    ) -> Tuple[CanonicalGraph, Dict[Path, Path]]:
        edges = set()
        for e in X.edges:
            (u, p), (w, q) = tuple(e)
            edges.add(frozenset(((u, port_map(p)), (w, port_map(q)))))
        edge_labels = {}
        for e, l in X.edge_labels.items():
            (u, p), (w, q) = tuple(e)
            edge_labels[frozenset(((u, port_map(p)), (w, port_map(q))))] = l
        raw = RawGraph(
            alphabets=alphabets,
            vertices=X.vertices,
            edges=frozenset(edges),
            vertex_labels={v: label_map(l) for v, l in X.vertex_labels.items()},
            edge_labels=edge_labels,
        )
        return canonicalize_with_names(PointedRawGraph(raw, EPSILON))

    # -- structural predicates -------------------------------------------

    def mark_consistency_violation(self, X: CanonicalGraph) -> Optional[str]:
        """Every far port bit must equal the mark of the near vertex."""
        if X.alphabets != self.marked:
            return "graph is not over the marked alphabets"
        for v in X.vertices:
            if v not in X.vertex_labels:
                return f"vertex {format_path(v)} is unlabelled"
        for e in X.edges:
            (u, p), (w, q) = tuple(e)
            if self.port_bit(q) != self.vertex_mark(X, u):
                return (f"edge {{{format_path(u)}:{p}, {format_path(w)}:{q}}}: "
                        f"far bit disagrees with the mark of {format_path(u)}")
            if self.port_bit(p) != self.vertex_mark(X, w):
                return (f"edge {{{format_path(u)}:{p}, {format_path(w)}:{q}}}: "
                        f"far bit disagrees with the mark of {format_path(w)}")
        return None

    def is_mark_consistent(self, X: CanonicalGraph) -> bool:
        return self.mark_consistency_violation(X) is None

    def raw_mark_consistent(self, g: RawGraph) -> bool:
        """Cheap raw-level mark consistency, for pruning enumeration."""
        marks = {}
        for v in g.vertices:
            label = g.vertex_labels.get(v)
            if label is None:
                return False
            marks[v] = self.label_base(label)[1]
        for e in g.edges:
            (u, p), (w, q) = tuple(e)
            if self.port_bit(q) != marks[u] or self.port_bit(p) != marks[w]:
                return False
        return True

    def all_unmarked(self, X: CanonicalGraph) -> bool:
        return (all(self.vertex_mark(X, v) == 0 for v in X.vertices)
                and all(self.port_bit(p) == 0 for e in X.edges for (_v, p) in e))

    def all_marked(self, X: CanonicalGraph) -> bool:
        return (all(self.vertex_mark(X, v) == 1 for v in X.vertices)
                and all(self.port_bit(p) == 1 for e in X.edges for (_v, p) in e))


def mark_with_names(X: CanonicalGraph, space: MarkSpace
                    ) -> Tuple[CanonicalGraph, Dict[Path, Path]]:
    """Toggle the origin's mark and the far halves of its edges.

    If any toggled far port is already in use the whole operation backs
    off and returns the graph unchanged, so the gate is total and, away
    from that conflict case, an involution.
    """
    adj = X.adjacency
    incident = [e for e in X.edges if any(v == EPSILON for (v, _p) in e)]
    for e in incident:
        h1, h2 = tuple(e)
        for (near, far) in ((h1, h2), (h2, h1)):
            if near[0] != EPSILON:
                continue
            far_vertex, far_port = far
            if space.toggle_port(far_port) in adj[far_vertex]:
                return X, identity_correspondence(X)

    label = X.vertex_labels.get(EPSILON)
    if label is None:
        raise MarkError("origin is unlabelled; its mark is undefined")
    edges = set()
    edge_map = {}
    for e in X.edges:
        if e not in incident:
            edge_map[e] = e
            continue
        (u, p), (w, q) = tuple(e)
        if u == EPSILON and w == EPSILON:
            new = frozenset(((u, space.toggle_port(p)),
                             (w, space.toggle_port(q))))
        elif u == EPSILON:
            new = frozenset(((u, p), (w, space.toggle_port(q))))
        else:
            new = frozenset(((u, space.toggle_port(p)), (w, q)))
        edge_map[e] = new
    vertex_labels = dict(X.vertex_labels)
    vertex_labels[EPSILON] = space.toggle_label(label)
    raw = RawGraph(
        alphabets=X.alphabets,
        vertices=X.vertices,
        edges=frozenset(edge_map.values()),
        vertex_labels=vertex_labels,
        edge_labels={edge_map[e]: l for e, l in X.edge_labels.items()},
    )
    return canonicalize_with_names(PointedRawGraph(raw, EPSILON))


def mark(X: CanonicalGraph, space: MarkSpace) -> CanonicalGraph:
    return mark_with_names(X, space)[0]


class MarkDynamics(Dynamics):
    """The mark gate as a dynamics (identity correspondence up to renaming)."""

    def __init__(self, space: MarkSpace):
        self.space = space
        self.name = "mark"
        self.alphabets = space.marked

    def apply(self, X):
        self._check_signature(X)
        return mark_with_names(X, self.space)


# ---------------------------------------------------------------------------
# Shifted gates and products
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShiftedDynamics:
    """A dynamics re-anchored at a path; identity where the path is absent.

    Shift to the anchor, apply, then shift back to where the old origin
    went.  The correspondence threads all three renamings.
    """

    base: Dynamics
    anchor: Path

    def apply(self, X: CanonicalGraph
              ) -> Tuple[CanonicalGraph, VertexCorrespondence]:
        if X.resolve(self.anchor) is None:
            return X, identity_correspondence(X)
        shifted, to_shifted = shift_with_names(X, self.anchor)
        image, corr = self.base.apply(shifted)
        origin_image = corr[to_shifted[EPSILON]]
        result, to_result = shift_with_names(image, origin_image)
        return result, {v: to_result[corr[to_shifted[v]]] for v in X.vertices}


def apply_product(base: Dynamics, anchors: Sequence[Path], X: CanonicalGraph,
                  corr: Optional[VertexCorrespondence] = None,
                  observer: Optional[Callable[[Path, CanonicalGraph], None]] = None
                  ) -> Tuple[CanonicalGraph, VertexCorrespondence]:
    """Fold the gate over the anchors, re-anchoring through the running map.

    Anchors name vertices of the graph the accumulated correspondence
    starts from (X itself when `corr` is omitted); anchors it does not
    cover are skipped, matching the shifted gate's identity clause.
    """
    G = X
    T: VertexCorrespondence = dict(corr) if corr is not None \
        else identity_correspondence(X)
    for u in anchors:
        a = T.get(u)
        if a is None:
            continue
        G, S = ShiftedDynamics(base, a).apply(G)
        T = {v: S[w] for v, w in T.items()}
        if observer is not None:
            observer(u, G)
    return G, T


# ---------------------------------------------------------------------------
# Projections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProjectionSet:
    """Connected components, each re-pointed at its least original name."""

    components: Tuple[Tuple[Path, CanonicalGraph], ...]


def _mark_partition(X: CanonicalGraph, space: MarkSpace
                    ) -> Tuple[Set[Path], Set[Path], Set[Path]]:
    """(marked, unmarked, boundary): boundary = unmarked with a used 1-port."""
    marked = {v for v in X.vertices if space.vertex_mark(X, v) == 1}
    unmarked = {v for v in X.vertices if v not in marked}
    boundary = {v for v in unmarked
                if any(space.port_bit(p) == 1 for p in X.adjacency[v])}
    return marked, unmarked, boundary


def _components(X: CanonicalGraph, keep: Set[Path]) -> List[List[Path]]:
    """Connected components of the induced subgraph, deterministic order."""
    seen: Set[Path] = set()
    out: List[List[Path]] = []
    for v in X.vertices:
        if v not in keep or v in seen:
            continue
        comp = [v]
        seen.add(v)
        frontier = [v]
        while frontier:
            nxt = []
            for u in frontier:
                for (w, _q) in X.adjacency[u].values():
                    if w in keep and w not in seen:
                        seen.add(w)
                        comp.append(w)
                        nxt.append(w)
            frontier = nxt
        out.append(sorted(comp, key=X.alphabets.path_key))
    return out


def _induced_raw(X: CanonicalGraph, vertices: Iterable[Path]) -> RawGraph:
    kept = set(vertices)
    edges = frozenset(e for e in X.edges if all(v in kept for (v, _p) in e))
    return RawGraph(
        alphabets=X.alphabets,
        vertices=tuple(v for v in X.vertices if v in kept),
        edges=edges,
        vertex_labels={v: l for v, l in X.vertex_labels.items() if v in kept},
        edge_labels={e: l for e, l in X.edge_labels.items() if e in edges},
    )


def _projection(X: CanonicalGraph, keep: Set[Path]) -> ProjectionSet:
    comps = []
    for comp in _components(X, keep):
        anchor = comp[0]
        graph = canonicalize_with_names(
            PointedRawGraph(_induced_raw(X, comp), anchor))[0]
        comps.append((anchor, graph))
    return ProjectionSet(tuple(comps))


def lower_projection(X: CanonicalGraph, space: MarkSpace) -> ProjectionSet:
    """Components left after deleting every marked vertex."""
    _marked, unmarked, _boundary = _mark_partition(X, space)
    return _projection(X, unmarked)


def upper_projection(X: CanonicalGraph, space: MarkSpace) -> ProjectionSet:
    """Components left after deleting unmarked vertices with no used 1-port."""
    marked, _unmarked, boundary = _mark_partition(X, space)
    return _projection(X, marked | boundary)


# ---------------------------------------------------------------------------
# Reversible extension
# ---------------------------------------------------------------------------


class ReversibleExtension(Dynamics):
    """Lift a dynamics to marked graphs: act where unmarked, freeze the rest.

    All-unmarked graphs evolve under the base dynamics; all-marked graphs
    and small graphs carrying any mark are fixed.  Mixed graphs split into
    a frozen upper part (marked vertices plus the unmarked vertices their
    edges reach) and unmarked components that evolve under the base
    dynamics and are glued back at the shared boundary vertices; any
    disagreement at the seam raises UnionInconsistencyError.
    """

    def __init__(self, base: Dynamics, exception_bound: int, space: MarkSpace,
                 name: Optional[str] = None):
        if exception_bound < 0:
            raise ValueError("exception bound must be >= 0")
        self.base = base
        self.exception_bound = exception_bound
        self.space = space
        self.name = name or f"marked[{base.name}]"
        self.alphabets = space.marked

    def apply(self, X):
        self._check_signature(X)
        space = self.space
        problem = space.mark_consistency_violation(X)
        if problem is not None:
            raise MarkError(f"{self.name}: input not mark-consistent: {problem}")
        if space.all_unmarked(X):
            base_graph, to_base = space.drop_with_names(X)
            image, corr = self.base.apply(base_graph)
            lifted, to_lifted = space.lift_with_names(image)
            return lifted, {v: to_lifted[corr[to_base[v]]] for v in X.vertices}
        if len(X.vertices) <= self.exception_bound or space.all_marked(X):
            return X, identity_correspondence(X)
        return self._mixed(X)

    def _mixed(self, X):
        space = self.space
        marked, unmarked, boundary = _mark_partition(X, space)
        upper_keep = marked | boundary

        pieces: List[RawGraph] = []
        final_id: Dict[Path, object] = {}

        for comp in _components(X, upper_keep):
            pieces.append(_induced_raw(X, comp))
        for v in upper_keep:
            final_id[v] = v

        for comp in _components(X, unmarked):
            anchor = comp[0]
            comp_graph, to_comp = canonicalize_with_names(
                PointedRawGraph(_induced_raw(X, comp), anchor))
            base_graph, to_base = space.drop_with_names(comp_graph)
            image, corr = self.base.apply(base_graph)
            lifted, to_lifted = space.lift_with_names(image)
            img = {v: to_lifted[corr[to_base[to_comp[v]]]] for v in comp}
            glue: Dict[Path, Path] = {}
            for v in comp:
                if v not in boundary:
                    continue
                w = img[v]
                if w in glue:
                    raise UnionInconsistencyError(
                        f"{self.name}: boundary vertices {format_path(glue[w])} "
                        f"and {format_path(v)} collide in the image")
                glue[w] = v

            def piece_id(w, _anchor=anchor, _glue=glue):
                return _glue.get(w, ("fresh", _anchor, w))

            edges = {}
            for e in lifted.edges:
                (u, p), (w, q) = tuple(e)
                edges[e] = frozenset(((piece_id(u), p), (piece_id(w), q)))
            pieces.append(RawGraph(
                alphabets=space.marked,
                vertices=tuple(piece_id(w) for w in lifted.vertices),
                edges=frozenset(edges.values()),
                vertex_labels={piece_id(w): l
                               for w, l in lifted.vertex_labels.items()},
                edge_labels={edges[e]: l
                             for e, l in lifted.edge_labels.items()},
            ))
            for v in comp:
                final_id[v] = piece_id(img[v])

        merged = pieces[0]
        for piece in pieces[1:]:
            problem = consistent(merged, piece)
            if problem is not None:
                raise UnionInconsistencyError(
                    f"{self.name}: transformed region conflicts with the "
                    f"frozen part: {problem}")
            merged = union(merged, piece)

        result, names = canonicalize_with_names(
            PointedRawGraph(merged, final_id[EPSILON]))
        problem = space.mark_consistency_violation(result)
        if problem is not None:
            raise MarkError(
                f"{self.name}: produced a mark-inconsistent graph: {problem}")
        return result, {v: names[final_id[v]] for v in X.vertices}


# ---------------------------------------------------------------------------
# Conjugate marks, the block pipeline, locality
# ---------------------------------------------------------------------------


@dataclass
class TraceStage:
    label: str
    graph: CanonicalGraph


class BlockKit:
    """Everything needed to run one step as a circuit of local gates."""

    def __init__(self, dynamics: Dynamics, inverse: Dynamics,
                 exception_bound: int, space: Optional[MarkSpace] = None):
        if dynamics.alphabets is None:
            raise MarkError("block decomposition needs fixed alphabets")
        self.space = space or MarkSpace.for_base(dynamics.alphabets)
        self.dynamics = dynamics
        self.exception_bound = exception_bound
        self.forward_ext = ReversibleExtension(
            dynamics, exception_bound, self.space)
        self.backward_ext = ReversibleExtension(
            inverse, exception_bound, self.space,
            name=f"marked-inverse[{dynamics.name}]")
        self.mark_gate = MarkDynamics(self.space)
        self.conjugate = CompositeDynamics(
            (self.forward_ext, self.mark_gate, self.backward_ext),
            name=f"conjugate-mark[{dynamics.name}]")

    @staticmethod
    def from_family(dynamics: Dynamics, family: GraphFamily,
                    exception_bound: int) -> "BlockKit":
        """Realize the inverse as a lookup table over a closed family."""
        table = build_inverse(dynamics, family)
        return BlockKit(dynamics, table.as_dynamics(), exception_bound)

    def conjugate_mark(self, X: CanonicalGraph
                       ) -> Tuple[CanonicalGraph, VertexCorrespondence]:
        """Apply the extension, mark the origin's image, then undo the extension."""
        return self.conjugate.apply(X)

    def decompose_step(self, X: CanonicalGraph,
                       trace: Optional[List[TraceStage]] = None
                       ) -> CanonicalGraph:
        """One global step as conjugate marks at every vertex, then unmarks.

        The result must equal the direct image; callers assert that.
        """
        space = self.space
        lifted = space.lift(X)
        if trace is not None:
            trace.append(TraceStage("lift", lifted))

        def watch(phase):
            if trace is None:
                return None
            return lambda u, G: trace.append(
                TraceStage(f"{phase} @ {format_path(u)}", G))

        anchors = lifted.vertices
        staged, running = apply_product(self.conjugate, anchors, lifted,
                                        observer=watch("conjugate-mark"))
        cleared, _ = apply_product(self.mark_gate, anchors, staged,
                                   corr=running, observer=watch("unmark"))
        if not space.all_unmarked(cleared):
            raise MarkError("marks survived the unmark sweep")
        final = space.drop(cleared)
        if trace is not None:
            trace.append(TraceStage("final", final))
        return final


def check_locality(L: Dynamics, radius: int, fam: GraphFamily) -> Optional[str]:
    """Is every far image vertex a verbatim copy of some source vertex?

    For each image vertex farther than `radius` from the origin there must
    be a source vertex with the same radius-0 disk whose whole disk the
    correspondence maps by plain path extension.
    """
    for X in fam:
        Y, S = L.apply(X)
        source_disks = {u: disk(shift(X, u), 0) for u in X.vertices}
        for far_vertex in Y.vertices:
            if len(far_vertex) <= radius:
                continue
            image_disk = disk(shift(Y, far_vertex), 0)
            witnessed = False
            for u in X.vertices:
                if S[u] != far_vertex or source_disks[u] != image_disk:
                    continue
                ok = True
                for v in source_disks[u].graph.vertices:
                    uv = X.resolve(u.concat(v))
                    if uv is None or S[uv] != Y.resolve(far_vertex.concat(v)):
                        ok = False
                        break
                if ok:
                    witnessed = True
                    break
            if not witnessed:
                return (f"image vertex {format_path(far_vertex)} of a "
                        f"{len(X.vertices)}-vertex member has no source "
                        f"witness at radius {radius}")
    return None


def find_locality_radius(L: Dynamics, fam: GraphFamily,
                         max_radius: int = 4) -> Optional[int]:
    """Least radius at which check_locality passes, or None up to the bound."""
    for r in range(max_radius + 1):
        if check_locality(L, r, fam) is None:
            return r
    return None


def inflation_profile(L: Dynamics, fam: GraphFamily) -> Dict[int, int]:
    """Observed bound: max image-name length per source-name length."""
    per_length: Dict[int, int] = {}
    for X in fam:
        _Y, S = L.apply(X)
        for v, w in S.items():
            s = len(v)
            per_length[s] = max(per_length.get(s, 0), len(w))
    profile: Dict[int, int] = {}
    running = 0
    for s in sorted(per_length):
        running = max(running, per_length[s])
        profile[s] = running
    return profile


def gate_footprint(gate: Dynamics, X: CanonicalGraph, anchor: Path
                   ) -> Set[Path]:
    """Source vertices whose label or incident edges the anchored gate alters."""
    Y, T = ShiftedDynamics(gate, anchor).apply(X)
    if len(set(T.values())) != len(T) or set(T.values()) != set(Y.vertices):
        raise MarkError("gate correspondence is not a bijection; "
                        "footprint undefined")
    back = {w: v for v, w in T.items()}
    changed: Set[Path] = set()
    for v in X.vertices:
        if X.vertex_labels.get(v) != Y.vertex_labels.get(T[v]):
            changed.add(v)
    mapped = {}
    for e in X.edges:
        (u, p), (w, q) = tuple(e)
        e2 = frozenset(((T[u], p), (T[w], q)))
        mapped[e2] = e
        if e2 not in Y.edges or X.edge_labels.get(e) != Y.edge_labels.get(e2):
            changed.update((u, w))
    for e2 in Y.edges:
        if e2 not in mapped:
            changed.update(back[w] for (w, _p) in e2)
    return changed


def ball(X: CanonicalGraph, center: Path, radius: int) -> Set[Path]:
    """Vertices within `radius` hops of `center`."""
    dist = {center: 0}
    frontier = [center]
    while frontier:
        nxt = []
        for v in frontier:
            if dist[v] == radius:
                continue
            for (w, _q) in X.adjacency[v].values():
                if w not in dist:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
        frontier = nxt
    return set(dist)
