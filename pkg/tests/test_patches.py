"""Patch consistency, unions, local rules, and the rule-file format."""
import pytest

from cgd import (
    Alphabets,
    PointedRawGraph,
    RawGraph,
    apply_local_rule,
    canonicalize,
    consistent,
    get_dynamics,
    make_edge,
    union,
)
from cgd.families import grid_graph
from cgd.modulo import DiskGraph, disk
from cgd.patches import (
    LocalRule,
    LocalRuleDynamics,
    Patch,
    PatchInconsistencyError,
    RuleLookupError,
    identity_local_rule,
    parse_rule_file,
    serialize_rule_file,
)
from cgd.paths import EPSILON
from cgd.portgraph import GraphFormatError

AB = Alphabets.make("ab")
ABL = Alphabets.make("ab", vertex_labels=("x", "y"))


def patch_graph(vertices, edges=(), vlabels=None, alphabets=ABL):
    return RawGraph(alphabets=alphabets, vertices=tuple(vertices),
                    edges=frozenset(edges), vertex_labels=vlabels or {})


class TestConsistency:
    def test_patch_agrees_with_itself(self):
        g = patch_graph([frozenset(("u",)), frozenset(("v",))],
                        [make_edge(frozenset(("u",)), "a", frozenset(("v",)), "b")])
        assert consistent(g, g) is None
        assert union(g, g).edges == g.edges

    def test_overlapping_ids_must_be_equal(self):
        g = patch_graph([frozenset((1, 2))])
        h = patch_graph([frozenset((2, 3))])
        assert "overlap" in consistent(g, h)

    def test_shared_half_edge_must_agree(self):
        u, v, w = frozenset(("u",)), frozenset(("v",)), frozenset(("w",))
        g = patch_graph([u, v], [make_edge(u, "a", v, "b")])
        h = patch_graph([u, w], [make_edge(u, "a", w, "b")])
        assert "leads to" in consistent(g, h)

    def test_vertex_label_conflict(self):
        u = frozenset(("u",))
        g = patch_graph([u], vlabels={u: "x"})
        h = patch_graph([u], vlabels={u: "y"})
        assert "labelled both" in consistent(g, h)

    def test_edge_label_conflict(self):
        alph = Alphabets.make("ab", edge_labels=("p", "q"))
        u, v = frozenset(("u",)), frozenset(("v",))
        e = make_edge(u, "a", v, "b")
        g = RawGraph(alphabets=alph, vertices=(u, v), edges=frozenset((e,)),
                     edge_labels={e: "p"})
        h = RawGraph(alphabets=alph, vertices=(u, v), edges=frozenset((e,)),
                     edge_labels={e: "q"})
        assert consistent(g, h) is not None

    def test_partial_labels_never_conflict(self):
        u = frozenset(("u",))
        g = patch_graph([u], vlabels={u: "x"})
        h = patch_graph([u])
        assert consistent(g, h) is None
        assert union(g, h).vertex_labels == {u: "x"}


class TestUnion:
    def test_disjoint(self):
        g = patch_graph([frozenset(("u",))])
        h = patch_graph([frozenset(("v",))])
        assert set(union(g, h).vertices) == set(g.vertices) | set(h.vertices)

    def test_glued_at_shared_vertex(self):
        u, v, w = frozenset(("u",)), frozenset(("v",)), frozenset(("w",))
        g = patch_graph([u, v], [make_edge(u, "a", v, "b")])
        h = patch_graph([v, w], [make_edge(v, "a", w, "b")])
        merged = union(g, h)
        assert set(merged.vertices) == {u, v, w}
        assert len(merged.edges) == 2

    def test_inconsistent_union_raises(self):
        u = frozenset(("u",))
        g = patch_graph([u], vlabels={u: "x"})
        h = patch_graph([u], vlabels={u: "y"})
        with pytest.raises(PatchInconsistencyError):
            union(g, h)


class TestApplyLocalRule:
    def test_identity_rule(self):
        edges = frozenset(make_edge(i, "a", (i + 1) % 4, "b") for i in range(4))
        raw = RawGraph(alphabets=AB, vertices=tuple(range(4)), edges=edges)
        X = canonicalize(PointedRawGraph(raw, 0))
        Y, corr = apply_local_rule(identity_local_rule(), X)
        assert Y == X
        assert corr == {v: v for v in X.vertices}

    def test_grid_rule_matches_direct_dynamics(self):
        rule = inflating_grid_local_rule()
        direct = get_dynamics("inflating-grid")
        for shape in ((1, 1), (2, 2), (2, 1)):
            X = grid_graph(*shape)
            Y, corr = apply_local_rule(rule, X)
            Yd, corr_d = direct.apply(X)
            assert Y == Yd
            assert corr == corr_d

    def test_conflicting_patches_reported_with_anchors(self):
        rule = degree_dependent_labeller()
        edges = frozenset((make_edge(0, "a", 1, "b"), make_edge(1, "a", 2, "b")))
        raw = RawGraph(alphabets=ABL, vertices=(0, 1, 2), edges=edges,
                       vertex_labels={i: "x" for i in range(3)})
        X = canonicalize(PointedRawGraph(raw, 0))
        with pytest.raises(PatchInconsistencyError) as err:
            apply_local_rule(rule, X)
        assert err.value.anchors is not None


def degree_dependent_labeller():
    """Labels every visible vertex by the origin's degree: clashes on paths."""

    def rule(view: DiskGraph) -> Patch:
        g = view.graph
        label = "x" if g.degree(EPSILON) == 1 else "y"
        ids = {v: frozenset((v,)) for v in g.vertices}
        edges = {e: frozenset((ids[v], p) for (v, p) in e) for e in g.edges}
        patch = RawGraph(alphabets=g.alphabets,
                         vertices=tuple(ids[v] for v in g.vertices),
                         edges=frozenset(edges.values()),
                         vertex_labels={ids[v]: label for v in g.vertices})
        return Patch(patch, ids[EPSILON])

    return LocalRule(radius=0, rule=rule, name="degree-labeller")


def inflating_grid_local_rule():
    """The splitting rule expressed through radius-0 disks and patches.

    Children are fresh tokens tagged 1..4 (NW, NE, SW, SE); each patch also
    emits the halves of the cross-block edges it can see, which overlap
    with the neighbouring patches and must glue consistently.
    """
    NW, NE, SW, SE = 1, 2, 3, 4

    def kids(path):
        return {k: frozenset(((path, k),)) for k in (NW, NE, SW, SE)}

    def rule(view: DiskGraph) -> Patch:
        g = view.graph
        mine = kids(EPSILON)
        vertices = list(mine.values())
        edges = set()
        vlabels = {}
        if EPSILON in g.vertex_labels:
            for vid in mine.values():
                vlabels[vid] = g.vertex_labels[EPSILON]
        edges.add(make_edge(mine[NW], "b", mine[NE], "d"))
        edges.add(make_edge(mine[SW], "b", mine[SE], "d"))
        edges.add(make_edge(mine[NW], "c", mine[SW], "a"))
        edges.add(make_edge(mine[NE], "c", mine[SE], "a"))
        for e in g.edges:
            (x, p), (y, q) = tuple(e)
            if (p, q) in (("c", "a"), ("d", "b")):
                (x, p), (y, q) = (y, q), (x, p)
            if x != EPSILON and y != EPSILON:
                continue
            ks_x, ks_y = kids(x), kids(y)
            for vid in (*ks_x.values(), *ks_y.values()):
                if vid not in vertices:
                    vertices.append(vid)
            if (p, q) == ("a", "c"):
                edges.add(make_edge(ks_x[NW], "a", ks_y[SW], "c"))
                edges.add(make_edge(ks_x[NE], "a", ks_y[SE], "c"))
            else:
                edges.add(make_edge(ks_x[NE], "b", ks_y[NW], "d"))
                edges.add(make_edge(ks_x[SE], "b", ks_y[SW], "d"))
        patch = RawGraph(alphabets=g.alphabets, vertices=tuple(vertices),
                         edges=frozenset(edges), vertex_labels=vlabels)
        return Patch(patch, mine[NW])

    return LocalRule(radius=0, rule=rule, name="inflating-grid-local")


RULE_FILE = """\
radius 0
disk
ports a b
vlabels x y
vertex eps label=x
pointer eps
maps-to
ports a b
vlabels x y
vertex eps label=y
pointer eps
disk
ports a b
vlabels x y
vertex eps label=y
pointer eps
maps-to
ports a b
vlabels x y
vertex eps label=x
pointer eps
"""


class TestRuleFiles:
    def test_parse_and_apply(self):
        table = parse_rule_file(RULE_FILE)
        assert table.radius == 0
        dyn = LocalRuleDynamics(table.as_rule())
        raw = RawGraph(alphabets=ABL, vertices=("v",), vertex_labels={"v": "x"})
        X = canonicalize(PointedRawGraph(raw, "v"))
        Y, _ = dyn.apply(X)
        assert Y.vertex_labels[EPSILON] == "y"
        assert dyn.apply(Y)[0] == X

    def test_round_trip(self):
        table = parse_rule_file(RULE_FILE)
        text = serialize_rule_file(table)
        again = parse_rule_file(text)
        assert again.radius == table.radius
        assert set(again.entries) == set(table.entries)
        assert serialize_rule_file(again) == text

    def test_lookup_miss(self):
        table = parse_rule_file(RULE_FILE)
        rule = table.as_rule()
        raw = RawGraph(alphabets=ABL, vertices=(0, 1),
                       edges=frozenset((make_edge(0, "a", 1, "b"),)),
                       vertex_labels={0: "x", 1: "x"})
        X = canonicalize(PointedRawGraph(raw, 0))
        with pytest.raises(RuleLookupError):
            apply_local_rule(rule, X)

    def test_missing_radius(self):
        with pytest.raises(GraphFormatError, match="radius"):
            parse_rule_file(RULE_FILE.replace("radius 0\n", ""))

    def test_unpaired_disk(self):
        with pytest.raises(GraphFormatError):
            parse_rule_file("radius 0\ndisk\nports a b\nvertex eps\npointer eps\n")

    def test_fresh_vertex_tokens(self):
        text = """\
radius 0
disk
ports a b
vlabels x y
vertex eps label=x
pointer eps
maps-to
ports a b
vlabels x y
vertex eps label=x
vertex eps~1 label=y
edge eps:a eps~1:b
pointer eps
"""
        table = parse_rule_file(text)
        (patch,) = table.entries.values()
        tokens = {next(iter(vid)) for vid in patch.graph.vertices}
        assert tokens == {EPSILON, (EPSILON, 1)}
        assert serialize_rule_file(table)  # fresh tags serialize back
