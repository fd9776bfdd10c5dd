"""Bijectivity, vertex preservation, class preservation, lookup inverses."""
import pytest

from cgd import (
    Alphabets,
    PointedRawGraph,
    RawGraph,
    build_inverse,
    canonicalize,
    check_bijective_on_family,
    check_class_preservation,
    check_vertex_preserving,
    get_dynamics,
    make_edge,
    shift_equivalence_classes,
    vertex_preservation_exceptions,
)
from cgd.dynamics import DynamicsError, FuncDynamics, IdentityDynamics
from cgd.families import bare_tape, single_head_tape, turtle_graphs
from cgd.paths import EPSILON
from cgd.reversibility import (
    GraphFamily,
    InverseConstructionError,
    OutOfFamilyError,
    enumerate_family,
    serialize_inverse_table,
)

TURTLE_ALPH = Alphabets.make("ab", vertex_labels=("0",))


def collapse_dynamics():
    """Everything maps to the bare vertex; wildly non-injective."""
    target = canonicalize(PointedRawGraph(
        RawGraph(alphabets=TURTLE_ALPH, vertices=("v",),
                 vertex_labels={"v": "0"}), "v"))

    def fn(X):
        return target, {v: EPSILON for v in X.vertices}

    return FuncDynamics("collapse", fn, TURTLE_ALPH)


class TestBijectivity:
    def test_identity(self, ab_family_4):
        assert check_bijective_on_family(IdentityDynamics(), ab_family_4) is None

    def test_moving_head(self, head_tapes_5):
        mh = get_dynamics("moving-head")
        assert check_bijective_on_family(mh, head_tapes_5) is None

    def test_turtle(self, ab_family_4):
        turtle = get_dynamics("turtle")
        assert check_bijective_on_family(turtle, ab_family_4) is None

    def test_inflating_grid_escapes(self):
        from cgd.families import grid_graph
        ig = get_dynamics("inflating-grid")
        fam = GraphFamily.from_graphs([grid_graph(1, 1), grid_graph(1, 2)])
        with pytest.raises(OutOfFamilyError):
            check_bijective_on_family(ig, fam)

    def test_collapse_not_injective(self):
        fam = enumerate_family(TURTLE_ALPH, 2)
        assert "not injective" in check_bijective_on_family(
            collapse_dynamics(), fam)


class TestVertexPreservation:
    def test_identity(self, ab_family_4):
        for X in list(ab_family_4)[::9]:
            assert check_vertex_preserving(IdentityDynamics(), X) is None

    def test_moving_head(self, head_tapes_5):
        mh = get_dynamics("moving-head")
        for X in head_tapes_5:
            assert check_vertex_preserving(mh, X) is None

    def test_turtle_solo_not_surjective(self):
        turtle = get_dynamics("turtle")
        solo, _pair = turtle_graphs()
        assert "misses" in check_vertex_preserving(turtle, solo)

    def test_turtle_pair_not_injective(self):
        turtle = get_dynamics("turtle")
        _solo, pair = turtle_graphs()
        assert "not injective" in check_vertex_preserving(turtle, pair)

    def test_turtle_exception_set_is_the_pair(self, ab_family_4):
        turtle = get_dynamics("turtle")
        exceptions = vertex_preservation_exceptions(turtle, ab_family_4)
        assert set(exceptions) == set(turtle_graphs())


class TestClassPreservation:
    def test_identity(self, ab_family_4):
        for X in list(ab_family_4)[::9]:
            assert check_class_preservation(IdentityDynamics(), X) is None

    def test_moving_head(self, head_tapes_5):
        mh = get_dynamics("moving-head")
        for X in head_tapes_5:
            assert check_class_preservation(mh, X) is None

    def test_turtle_on_both(self):
        turtle = get_dynamics("turtle")
        for X in turtle_graphs():
            assert check_class_preservation(turtle, X) is None

    def test_collapse_breaks_classes(self):
        # A two-vertex asymmetric graph collapses onto one vertex: two
        # inequivalent vertices acquire equivalent images.
        edges = frozenset((make_edge(0, "a", 1, "b"),))
        raw = RawGraph(alphabets=TURTLE_ALPH, vertices=(0, 1), edges=edges,
                       vertex_labels={0: "0", 1: "0"})
        X = canonicalize(PointedRawGraph(raw, 0))
        assert check_class_preservation(collapse_dynamics(), X) is not None


class TestBuildInverse:
    def test_identity_inverse(self, ab_family_4):
        table = build_inverse(IdentityDynamics(), ab_family_4)
        for X in ab_family_4:
            assert table.forward[X] == X
            assert table.backward[X] == X

    def test_moving_head_round_trip(self, head_tapes_5):
        mh = get_dynamics("moving-head")
        table = build_inverse(mh, head_tapes_5)
        for X in head_tapes_5:
            Y = table.forward[X]
            assert table.backward[Y] == X
            # Correspondences invert exactly on this vertex-preserving family.
            R = table.forward_corr[X]
            S = table.corr_inverse[Y]
            assert {v: S[R[v]] for v in X.vertices} == \
                   {v: v for v in X.vertices}

    def test_moving_head_steps_back(self):
        mh = get_dynamics("moving-head")
        fam = GraphFamily.from_graphs(
            [single_head_tape(3, k, a) for k in range(3) for a in ("cc", "dd")])
        table = build_inverse(mh, fam)
        assert table.backward[single_head_tape(3, 2, "cc")] == \
            single_head_tape(3, 1, "cc")

    def test_turtle_is_its_own_inverse(self, ab_family_4):
        turtle = get_dynamics("turtle")
        table = build_inverse(turtle, ab_family_4)
        solo, pair = turtle_graphs()
        assert table.backward[pair] == solo
        assert table.backward[solo] == pair
        for X in ab_family_4:
            assert table.backward[X] == turtle.apply(X)[0]

    def test_class_compatible_inverse_on_exceptions(self, ab_family_4):
        # Where the forward correspondence is not a bijection, the chosen
        # preimages must still land in the right shift-equivalence class.
        turtle = get_dynamics("turtle")
        table = build_inverse(turtle, ab_family_4)
        for X in ab_family_4:
            Y = table.forward[X]
            R = table.forward_corr[X]
            S = table.corr_inverse[Y]
            class_of = {}
            for i, cls in enumerate(shift_equivalence_classes(Y)):
                for v in cls:
                    class_of[v] = i
            for w in Y.vertices:
                assert class_of[R[S[w]]] == class_of[w]

    def test_table_dynamics_applies(self, head_tapes_5):
        mh = get_dynamics("moving-head")
        inverse = build_inverse(mh, head_tapes_5).as_dynamics()
        X = single_head_tape(4, 2, "cc")
        Y, corr = mh.apply(X)
        back, corr_back = inverse.apply(Y)
        assert back == X
        assert {v: corr_back[corr[v]] for v in X.vertices} == \
               {v: v for v in X.vertices}

    def test_table_dynamics_rejects_unknown(self, head_tapes_5):
        mh = get_dynamics("moving-head")
        inverse = build_inverse(mh, head_tapes_5).as_dynamics()
        with pytest.raises(DynamicsError, match="not tabulated"):
            inverse.apply(bare_tape(3))

    def test_non_invertible_rejected(self):
        fam = enumerate_family(TURTLE_ALPH, 2)
        with pytest.raises(InverseConstructionError):
            build_inverse(collapse_dynamics(), fam)

    def test_serialization_pairs_blocks(self, head_tapes_5):
        mh = get_dynamics("moving-head")
        table = build_inverse(mh, head_tapes_5)
        text = serialize_inverse_table(table)
        assert text == serialize_inverse_table(table)
        assert text.count("source\n") == len(head_tapes_5)
        assert text.count("image\n") == len(head_tapes_5)
        # Every block pairs sources with their forward images.
        first_source = text.index("source")
        first_image = text.index("image")
        assert first_source < first_image
        assert "corr eps eps" in text

    def test_escaping_family_rejected(self):
        turtle = get_dynamics("turtle")
        solo, _pair = turtle_graphs()
        with pytest.raises(OutOfFamilyError):
            build_inverse(turtle, GraphFamily.from_graphs([solo]))
