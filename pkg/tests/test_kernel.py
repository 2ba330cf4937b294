import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fole.errors import ArityMismatch, CapacityExceeded, SortClash, UnknownSort, UnknownType
from fole.fixtures import DEST_LIST, GO_LIST, entities_go
from fole.kernel import (
    Classification,
    Infomorphism,
    Tuple,
    TupleRelation,
    TypeList,
    TypeListMorphism,
    UnionFind,
    flow,
    inverse_image_classification,
    inverse_image_infomorphism,
    list_holds,
    sum_along,
    tup,
    tup_map,
    tuple_bridge,
    typelist_pushout,
)
from oracle import brute_flow

E = entities_go()
T_JOHN = Tuple(agnt="john", dest="boston", inst="bus1")
T_JANE = Tuple(agnt="jane", dest="boston", inst="bus1")
H_DEST = TypeListMorphism.inclusion(DEST_LIST, GO_LIST)


class TestListHolds:
    def test_classified_tuple(self):
        assert list_holds(E, T_JOHN, GO_LIST)

    def test_swapped_slots(self):
        assert not list_holds(E, Tuple(agnt="boston", dest="john", inst="bus1"), GO_LIST)

    def test_empty(self):
        assert list_holds(E, Tuple(), TypeList())

    def test_arity_differs(self):
        assert not list_holds(E, Tuple(dest="boston"), GO_LIST)


class TestTup:
    def test_go_list(self):
        got = tup(E, GO_LIST)
        assert got.tuples == {T_JOHN, T_JANE}

    def test_empty_list(self):
        assert tup(E, TypeList()).tuples == {Tuple()}

    def test_singleton(self):
        assert tup(E, TypeList(a="City")).tuples == {Tuple(a="boston")}

    def test_unknown_sort(self):
        with pytest.raises(UnknownSort):
            tup(E, TypeList(a="Truck"))

    def test_cap(self):
        with pytest.raises(CapacityExceeded):
            tup(E, TypeList(a="Person", b="Person"), cap=3)

    def test_cap_from_env(self, monkeypatch):
        monkeypatch.setenv("FOLE_CAP", "1")
        with pytest.raises(CapacityExceeded):
            tup(E, GO_LIST)


class TestTupMap:
    def test_projection(self):
        assert tup_map(H_DEST, T_JOHN) == Tuple(dest="boston")

    def test_identity(self):
        assert tup_map(TypeListMorphism.identity(GO_LIST), T_JOHN) == T_JOHN

    def test_duplication(self):
        h = TypeListMorphism(TypeList(u="City", v="City"), TypeList(a="City"), {"u": "a", "v": "a"})
        assert tup_map(h, Tuple(a="boston")) == Tuple(u="boston", v="boston")

    def test_arity_mismatch(self):
        with pytest.raises(ArityMismatch):
            tup_map(H_DEST, Tuple(dest="boston"))


class TestFlow:
    R = TupleRelation(GO_LIST, [T_JOHN])

    def test_exists(self):
        assert flow(E, H_DEST, "exists", self.R).tuples == {Tuple(dest="boston")}

    def test_forall(self):
        assert flow(E, H_DEST, "forall", self.R).tuples == set()

    def test_inverse(self):
        back = flow(E, H_DEST, "inverse", TupleRelation(DEST_LIST, [Tuple(dest="boston")]))
        assert back.tuples == {T_JOHN, T_JANE}

    def test_wrong_side(self):
        with pytest.raises(ArityMismatch):
            flow(E, H_DEST, "inverse", self.R)
        with pytest.raises(ArityMismatch):
            flow(E, H_DEST, "exists", TupleRelation(DEST_LIST))

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            flow(E, H_DEST, "sideways", self.R)


class TestMorphismChecks:
    def test_sort_clash(self):
        with pytest.raises(SortClash):
            TypeListMorphism(TypeList(a="Person"), GO_LIST, {"a": "dest"})

    def test_partial(self):
        with pytest.raises(ArityMismatch):
            TypeListMorphism(TypeList(a="Person", b="City"), GO_LIST, {"a": "agnt"})

    def test_name_ignored_by_equality(self):
        named = TypeListMorphism.inclusion(DEST_LIST, GO_LIST, name="dest")
        assert named == H_DEST and hash(named) == hash(H_DEST)


class TestSumAlong:
    def test_identity(self):
        assert sum_along({x: x for x in E.types}, GO_LIST) == GO_LIST

    def test_relabel(self):
        f = {"Person": "Agent", "City": "Place", "Bus": "Vehicle"}
        assert sum_along(f, GO_LIST) == TypeList(agnt="Agent", dest="Place", inst="Vehicle")

    def test_collapse(self):
        got = sum_along({x: "Thing" for x in E.types}, GO_LIST)
        assert set(got.values()) == {"Thing"}

    def test_undefined(self):
        with pytest.raises(UnknownSort):
            sum_along({"Person": "Agent"}, GO_LIST)


class TestInverseImage:
    def test_identity(self):
        assert inverse_image_classification({x: x for x in E.types}, E) == E

    def test_renamed_type(self):
        C = inverse_image_classification({"P": "Person"}, E)
        assert C.extent("P") == {"john", "jane"}
        assert C.tokens == E.tokens

    def test_empty_extent(self):
        E2 = Classification({"Person", "Ghost"}, {"john"}, [("john", "Person")])
        C = inverse_image_classification({"G": "Ghost"}, E2)
        assert C.incidence == frozenset()

    def test_is_infomorphism(self):
        m = inverse_image_infomorphism({"P": "Person", "C": "City"}, E)
        assert m.validate() == []

    def test_unknown(self):
        with pytest.raises(UnknownType):
            inverse_image_classification({"P": "Nope"}, E)


class TestBridge:
    def test_identity(self):
        assert tuple_bridge(Infomorphism.identity(E), T_JOHN) == T_JOHN

    def test_collapse(self):
        E2 = Classification(E.types, {"john", "boston", "bus1"}, [(y, x) for y, x in E.incidence if y != "jane"])
        g = {"john": "john", "jane": "john", "boston": "boston", "bus1": "bus1"}
        m = Infomorphism(E2, E, {x: x for x in E.types}, g)
        assert m.validate() == []
        assert tuple_bridge(m, T_JANE) == T_JOHN

    def test_empty(self):
        assert tuple_bridge(Infomorphism.identity(E), Tuple()) == Tuple()

    def test_maps_tuple_sets(self):
        m = Infomorphism.identity(E)
        assert {tuple_bridge(m, t) for t in tup(E, GO_LIST).tuples} <= tup(E, GO_LIST).tuples


class TestInfomorphismValidate:
    def test_broken(self):
        E2 = Classification(E.types, E.tokens, E.incidence)
        g = {y: y for y in E.tokens}
        g["jane"] = "boston"
        m = Infomorphism(E2, E, {x: x for x in E.types}, g)
        codes = {f.code for f in m.validate()}
        assert codes == {"infomorphism"}


class TestPushout:
    def test_coproduct(self):
        L1, L2 = TypeList(a="Person"), TypeList(a="City")
        e = TypeList()
        hat, i1, i2 = typelist_pushout(TypeListMorphism(e, L1, {}), TypeListMorphism(e, L2, {}))
        assert len(hat) == 2
        assert sorted(hat.values()) == ["City", "Person"]

    def test_identity_legs(self):
        idm = TypeListMorphism.identity(GO_LIST)
        hat, _, _ = typelist_pushout(idm, idm)
        assert hat == GO_LIST

    def test_shared_dest(self):
        h1 = TypeListMorphism.inclusion(DEST_LIST, TypeList(agnt="Person", dest="City"))
        h2 = TypeListMorphism.inclusion(DEST_LIST, TypeList(dest="City", inst="Bus"))
        hat, i1, i2 = typelist_pushout(h1, h2)
        assert hat == GO_LIST
        assert h1.then(i1) == h2.then(i2)

    def test_sort_clash(self):
        L = TypeList(a="Person", b="City")
        h1 = TypeListMorphism(L, TypeList(u="Person", v="City"), {"a": "u", "b": "v"})
        h2 = TypeListMorphism(L, TypeList(w="Person", z="City"), {"a": "w", "b": "z"})
        typelist_pushout(h1, h2)
        collapse = TypeListMorphism(TypeList(a="Person", b="Person"), TypeList(u="Person"), {"a": "u", "b": "u"})
        other = TypeListMorphism(TypeList(a="Person", b="Person"), TypeList(u="Person", v="Person"), {"a": "u", "b": "v"})
        hat, _, _ = typelist_pushout(collapse, other)
        assert len(hat) == 1

    def test_self_join_names(self):
        hat, _, i2 = typelist_pushout(H_DEST, H_DEST)
        assert sorted(hat) == ["agnt", "agnt_2", "dest", "inst", "inst_2"]
        assert i2["dest"] == "dest"


def test_union_find_classes():
    uf = UnionFind(range(6))
    uf.union(0, 1)
    uf.union(2, 3)
    uf.union(1, 3)
    groups = sorted(sorted(c) for c in uf.classes())
    assert groups == [[0, 1, 2, 3], [4], [5]]


# properties

SORTS = ["A", "B"]


@st.composite
def small_world(draw):
    tokens = [f"y{i}" for i in range(draw(st.integers(1, 4)))]
    inc = [(y, x) for y in tokens for x in SORTS if draw(st.booleans())]
    E_ = Classification(SORTS, tokens, inc)
    n_tgt = draw(st.integers(0, 3))
    tgt = TypeList({f"i{j}": draw(st.sampled_from(SORTS)) for j in range(n_tgt)})
    n_src = draw(st.integers(0, 3)) if n_tgt else 0
    mapping = {f"j{j}": draw(st.sampled_from(sorted(tgt))) for j in range(n_src)}
    src = TypeList({j: tgt.sort(i) for j, i in mapping.items()})
    return E_, TypeListMorphism(src, tgt, mapping)


def _subset(draw, pool):
    pool = sorted(pool)
    return {t for t in pool if draw(st.booleans())}


@given(st.data())
def test_adjointness_random(data):
    E_, h = data.draw(small_world())
    R = TupleRelation(h.target, _subset(data.draw, tup(E_, h.target).tuples))
    S = TupleRelation(h.source, _subset(data.draw, tup(E_, h.source).tuples))
    ex = flow(E_, h, "exists", R)
    inv = flow(E_, h, "inverse", S)
    fa = flow(E_, h, "forall", R)
    assert (ex.tuples <= S.tuples) == (R.tuples <= inv.tuples)
    assert (S.tuples <= fa.tuples) == (inv.tuples <= R.tuples)


@given(st.data())
def test_flow_matches_enumeration(data):
    E_, h = data.draw(small_world())
    R = _subset(data.draw, tup(E_, h.target).tuples)
    ext = {x: E_.extent(x) for x in E_.types}
    frozen = {tuple(sorted(t.items())) for t in R}
    for mode in ("exists", "forall"):
        got = flow(E_, h, mode, TupleRelation(h.target, R))
        assert {tuple(sorted(t.items())) for t in got.tuples} == brute_flow(ext, h, mode, frozen)
    S = _subset(data.draw, tup(E_, h.source).tuples)
    got = flow(E_, h, "inverse", TupleRelation(h.source, S))
    assert {tuple(sorted(t.items())) for t in got.tuples} == brute_flow(
        ext, h, "inverse", {tuple(sorted(t.items())) for t in S}
    )


@given(st.data())
def test_tup_map_contravariant(data):
    E_, h2 = data.draw(small_world())
    n = data.draw(st.integers(0, 3)) if len(h2.source) else 0
    mapping = {f"k{j}": data.draw(st.sampled_from(sorted(h2.source))) for j in range(n)}
    h1 = TypeListMorphism(TypeList({k: h2.source.sort(i) for k, i in mapping.items()}), h2.source, mapping)
    for t in tup(E_, h2.target).tuples:
        assert tup_map(h1.then(h2), t) == tup_map(h1, tup_map(h2, t))


@given(st.data())
def test_tup_cardinality(data):
    E_, h = data.draw(small_world())
    L = h.target
    assert len(tup(E_, L)) == math.prod(len(E_.extent(x)) for x in L.values())


@given(st.data())
def test_tup_map_preserves_classification(data):
    E_, h = data.draw(small_world())
    for t in tup(E_, h.target).tuples:
        assert list_holds(E_, tup_map(h, t), h.source)


@given(st.data())
def test_inverse_image_composes(data):
    tokens = [f"y{i}" for i in range(data.draw(st.integers(0, 4)))]
    types1 = ["A", "B", "C"]
    inc = [(y, x) for y in tokens for x in types1 if data.draw(st.booleans())]
    C1 = Classification(types1, tokens, inc)
    f = {x: data.draw(st.sampled_from(types1)) for x in ["P", "Q"]}
    g = {x: data.draw(st.sampled_from(["P", "Q"])) for x in ["u", "v", "w"]}
    step = inverse_image_classification(g, inverse_image_classification(f, C1))
    direct = inverse_image_classification({x: f[g[x]] for x in g}, C1)
    assert step == direct


@given(st.data())
def test_pushout_commutes(data):
    E_, h1 = data.draw(small_world())
    L = h1.source
    n = data.draw(st.integers(0, 2))
    extra = {f"z{j}": data.draw(st.sampled_from(SORTS)) for j in range(n)}
    tgt2 = TypeList({**{f"q_{i}": L.sort(i) for i in L}, **extra})
    h2 = TypeListMorphism(L, tgt2, {i: f"q_{i}" for i in L})
    hat, i1, i2 = typelist_pushout(h1, h2)
    assert h1.then(i1) == h2.then(i2)
    assert len(hat) == len(h1.target) + n


def test_exhaustive_small_adjointness():
    """Every map between two-index lists over one sort, every pair of subsets."""
    E_ = Classification(["A"], ["a", "b"], [("a", "A"), ("b", "A")])
    L = TypeList(i0="A", i1="A")
    for images in itertools.product(["i0", "i1"], repeat=2):
        h = TypeListMorphism(TypeList(j0="A", j1="A"), L, dict(zip(["j0", "j1"], images)))
        tgt = sorted(tup(E_, L).tuples)
        src = sorted(tup(E_, h.source).tuples)
        for rbits in range(1 << len(tgt)):
            R = TupleRelation(L, [t for n, t in enumerate(tgt) if rbits >> n & 1])
            ex, fa = flow(E_, h, "exists", R), flow(E_, h, "forall", R)
            for sbits in range(1 << len(src)):
                S = TupleRelation(h.source, [t for n, t in enumerate(src) if sbits >> n & 1])
                inv = flow(E_, h, "inverse", S)
                assert (ex.tuples <= S.tuples) == (R.tuples <= inv.tuples)
                assert (S.tuples <= fa.tuples) == (inv.tuples <= R.tuples)
