import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fole import generate as G
from fole.errors import InvalidMorphism, InvalidStructure, TypeMismatch
from fole.fixtures import (
    DEST_LIST,
    GO_LIST,
    dest_inclusion,
    entities_go,
    rename_morphism,
    renamed_schema,
    schema_go,
    structure_go,
)
from fole.formula import (
    Atom,
    Bottom,
    Constraint,
    Diff,
    Exists,
    Forall,
    Impl,
    Join,
    Meet,
    Neg,
    Sequent,
    Subst,
    Top,
    translate,
    translate_constraint,
)
from fole.kernel import Classification, Tuple, TypeListMorphism, tup, tup_map
from fole.speclogic import universe_intent_violations
from fole.structure import (
    Structure,
    StructureMorphism,
    constraint_key_function,
    constraint_relation_inclusion,
    intent_order_holds,
    intent_order_violations,
    invariance_report,
    reduct,
)
from oracle import oracle_eval

GO = Atom("Go")
H = dest_inclusion()
JOHN_GO = Tuple(agnt="john", dest="boston", inst="bus1")


class TestGoFixture:
    def test_atom(self):
        M = structure_go()
        assert M.eval(GO) == {"k1"}
        assert M.relation_interp(GO).tuples == {JOHN_GO}

    def test_exists_needs_a_dest_key(self):
        assert structure_go().eval(Exists(H, GO)) == frozenset()
        assert structure_go(extra_dest_key=True).eval(Exists(H, GO)) == {"k2"}

    def test_forall(self):
        # jane is not going anywhere, so not every go-tuple at boston is in Go
        assert structure_go(extra_dest_key=True).eval(Forall(H, GO)) == frozenset()

    def test_subst(self):
        M = structure_go(extra_dest_key=True)
        assert M.eval(Subst(H, Top(DEST_LIST))) == {"k1"}
        assert M.eval(Subst(H, Bottom(DEST_LIST))) == frozenset()

    def test_connectives_relative_to_fiber(self):
        M = structure_go(extra_dest_key=True)
        assert M.eval(Neg(GO)) == frozenset()
        assert M.eval(Top(GO_LIST)) == {"k1"}
        assert M.eval(Neg(Top(DEST_LIST))) == frozenset()
        assert M.eval(Impl(GO, Bottom(GO_LIST))) == frozenset()

    def test_table(self):
        keys, tau = structure_go().table_interp(GO)
        assert keys == {"k1"} and tau == {"k1": JOHN_GO}

    def test_constraint(self):
        M = structure_go(extra_dest_key=True)
        assert M.satisfies_constraint(Constraint(H, GO, Top(DEST_LIST)))
        assert not M.satisfies_constraint(Constraint(H, GO, Bottom(DEST_LIST)))

    def test_sequent_type_clash(self):
        with pytest.raises(TypeMismatch):
            structure_go().satisfies_sequent(Sequent(GO, Top(DEST_LIST)))


class TestValidation:
    def test_ill_typed_key(self):
        with pytest.raises(InvalidStructure, match="structure-condition"):
            Structure(schema_go(), entities_go(), {"k"}, [("k", "Go")], {"k": {"agnt": "boston", "dest": "john", "inst": "bus1"}})

    def test_missing_tuple(self):
        M = Structure(schema_go(), entities_go(), {"k"}, [], {}, validate=False)
        assert [f.code for f in M.validate()] == ["missing-tuple"]

    def test_unknown_token(self):
        M = Structure(schema_go(), entities_go(), {"k"}, [], {"k": {"dest": "paris"}}, validate=False)
        assert [f.code for f in M.validate()] == ["UnknownToken"]

    def test_unknown_relation(self):
        M = Structure(schema_go(), entities_go(), {"k"}, [("k", "Fly")], {"k": {}}, validate=False)
        assert [f.code for f in M.validate()] == ["UnknownRelation"]


class TestReduct:
    def travel(self):
        E = Classification(
            {"Agent", "Place", "Vehicle"},
            {"john", "boston", "bus1"},
            [("john", "Agent"), ("boston", "Place"), ("bus1", "Vehicle")],
        )
        return Structure(renamed_schema(), E, {"t1"}, [("t1", "Travel")], {"t1": dict(JOHN_GO)})

    def test_renaming(self):
        M2, bridge = reduct(rename_morphism(), self.travel())
        assert M2.schema == schema_go()
        assert M2.eval(GO) == {"t1"}
        assert M2.entities.extent("Person") == {"john"}
        assert bridge.validate() == []

    def test_invariance_report(self):
        c = Constraint(H, GO, Top(DEST_LIST))
        assert invariance_report(rename_morphism(), self.travel(), [c]) == [(c, True, True)]

    def test_wrong_target(self):
        with pytest.raises(InvalidMorphism):
            reduct(rename_morphism(), structure_go())


def _covering_extensional(rng, S, E, fibers):
    """One key per tuple of every fiber, so tau is injective and every
    classified tuple has a key."""
    tuples = sorted({t for L in fibers for t in tup(E, L).tuples})
    keys = [f"k{n}" for n in range(len(tuples))]
    tau = dict(zip(keys, tuples))
    inc = [
        (k, r)
        for k in keys
        for r in sorted(S.signature)
        if tau[k].arity == S.signature[r].arity and rng.random() < 0.5
        and all(E.holds(tau[k][i], x) for i, x in S.signature[r].items())
    ]
    return Structure(S, E, keys, inc, tau)


def _world(seed, extensional=False):
    rng = random.Random(seed)
    b = G.Bounds(max_types=2, max_tokens=3, max_arity=2)
    S = G.schema(rng, b)
    pool = G.pool(rng, S, b)
    E = G.classification(rng, S.entity_types, rng.randint(1, 3))
    fibers = G.fibers_of(S, pool)
    if extensional:
        M = _covering_extensional(rng, S, E, fibers)
    else:
        M = G.structure(rng, S, E, rng.randint(0, 6), fibers)
    return rng, S, pool, M, fibers


seeds = st.integers(0, 10**6)


@given(seeds)
def test_matches_oracle(seed):
    rng, S, pool, M, fibers = _world(seed)
    for _ in range(4):
        phi = G.formula(rng, S, rng.choice(fibers), 3, pool)
        assert M.eval(phi) == oracle_eval(M, phi)


@given(seeds)
def test_boolean_laws_within_fiber(seed):
    rng, S, pool, M, fibers = _world(seed)
    L = rng.choice(fibers)
    a = G.formula(rng, S, L, 2, pool)
    b = G.formula(rng, S, L, 2, pool)
    F = M.fiber(L)
    ev = M.eval
    assert ev(a) <= F
    assert ev(Meet(a, b)) == ev(Meet(b, a))
    assert ev(Join(a, b)) == ev(Join(b, a))
    assert ev(Neg(Neg(a))) == ev(a)
    assert ev(Neg(Meet(a, b))) == ev(Join(Neg(a), Neg(b)))
    assert ev(Impl(a, b)) == ev(Join(Neg(a), b))
    assert ev(Diff(a, b)) == ev(Meet(a, Neg(b)))
    assert ev(Join(a, Neg(a))) == F
    assert ev(Meet(a, Neg(a))) == frozenset()


@given(seeds)
def test_quantifier_duality_on_covering_structures(seed):
    rng, S, pool, M, fibers = _world(seed, extensional=True)
    for h in pool:
        a = G.formula(rng, S, h.target, 2, pool)
        assert M.eval(Forall(h, a)) == M.eval(Neg(Exists(h, Neg(a))))


@given(seeds)
def test_flows_monotone(seed):
    rng, S, pool, M, fibers = _world(seed)
    for h in pool:
        a = G.formula(rng, S, h.target, 1, pool)
        b = G.formula(rng, S, h.target, 1, pool)
        for Q in (Exists, Forall):
            assert M.eval(Q(h, Meet(a, b))) <= M.eval(Q(h, a))
        c = G.formula(rng, S, h.source, 1, pool)
        assert M.eval(Subst(h, Meet(c, c))) == M.eval(Subst(h, c))


@given(seeds)
def test_invariance_under_translation(seed):
    rng = random.Random(seed)
    sc = G.scenario(rng)
    M2, bridge = reduct(sc.m, sc.M1)
    assert bridge.validate() == []
    for _ in range(3):
        c = G.constraint(rng, sc.s2, sc.pool2, 2)
        assert M2.satisfies_constraint(c) == sc.M1.satisfies_constraint(translate_constraint(sc.m, c))
        assert M2.eval(c.phi) == sc.M1.eval(translate(sc.m, c.phi))


@given(seeds)
def test_satisfaction_readings_agree_on_covering_structures(seed):
    rng, S, pool, M, fibers = _world(seed, extensional=True)
    for _ in range(4):
        c = G.constraint(rng, S, pool, 2)
        sat = M.satisfies_constraint(c)
        assert sat == constraint_relation_inclusion(M, c)
        assert sat == (constraint_key_function(M, c) is not None)
        assert sat == M.satisfies_constraint_adjoint(c)


@given(seeds)
def test_key_function_gives_inclusion(seed):
    rng, S, pool, M, fibers = _world(seed)
    for _ in range(4):
        c = G.constraint(rng, S, pool, 2)
        kf = constraint_key_function(M, c)
        if kf is not None:
            assert constraint_relation_inclusion(M, c)
            for k, k2 in kf.items():
                assert M.tau[k2] == tup_map(c.h, M.tau[k])


def test_quantifier_duality_needs_covering_keys():
    # no key carries jane's tuple, so the negated side cannot see it
    M = structure_go(extra_dest_key=True)
    assert M.eval(Forall(H, GO)) == frozenset()
    assert M.eval(Neg(Exists(H, Neg(GO)))) == {"k2"}


def test_readings_differ_without_covering_keys():
    # no key carries a bare destination, so the image is empty on the key side
    M = structure_go()
    c = Constraint(H, GO, Bottom(DEST_LIST))
    assert M.satisfies_constraint(c)
    assert not M.satisfies_constraint_adjoint(c)
    assert not constraint_relation_inclusion(M, c)


class TestMorphisms:
    def test_identity(self):
        M = structure_go()
        idm = StructureMorphism.identity(M)
        assert idm.validate() == [] and idm.is_vertical
        assert idm.then(idm) == idm

    def test_list_preservation(self):
        M = structure_go(extra_dest_key=True)
        bad = StructureMorphism.identity(M)
        bad.key_map = {"k1": "k2", "k2": "k2"}
        codes = {f.code for f in bad.validate()}
        assert "relation/infomorphism" in codes

    def test_tuple_mismatch(self):
        M = structure_go()
        g = {y: y for y in M.entities.tokens}
        g["jane"], g["john"] = "john", "jane"
        E2 = M.entities
        bad = StructureMorphism(M, M, {"Go": "Go"}, {"k1": "k1"}, {x: x for x in E2.types}, g)
        assert [f.code for f in bad.validate()] == ["list-preservation"]

    def test_composition(self):
        rng = random.Random(5)
        _, S, pool, M3, _ = _world(5)
        M2, h1 = G.vertical_morphism(rng, M3)
        M1, h2 = G.vertical_morphism(rng, M2)
        both = h1.then(h2)
        assert both.source is M3 and both.target is M1
        assert both.validate() == []


def _bimodular_counterexample():
    S, E = schema_go(), entities_go()
    M1 = Structure(S, E, {"a"}, [], {"a": {"dest": "boston"}})
    M2 = Structure(S, E, {"a", "k1"}, [("k1", "Go")], {"a": {"dest": "boston"}, "k1": dict(JOHN_GO)})
    ids = {y: y for y in E.tokens}
    h = StructureMorphism(M2, M1, {"Go": "Go"}, {"a": "a"}, {x: x for x in E.types}, ids)
    return M2, M1, h


def test_vertical_morphism_can_lose_a_quantified_sequent():
    M2, M1, h = _bimodular_counterexample()
    assert h.validate() == [] and h.is_vertical
    q = Sequent(Top(DEST_LIST), Exists(H, GO))
    assert M2.satisfies_sequent(q)
    assert not M1.satisfies_sequent(q)
    assert intent_order_violations(M2, M1, [q]) == [q]


@settings(max_examples=40)
@given(seeds)
def test_intent_order_for_surjective_keys_and_bijective_tokens(seed):
    rng = random.Random(seed)
    S = G.schema(rng)
    pool = G.pool(rng, S)
    E = G.classification(rng, S.entity_types, rng.randint(1, 4))
    M2 = G.structure(rng, S, E, rng.randint(0, 5), G.fibers_of(S, pool))
    M1, h = G.vertical_morphism(rng, M2, key_copies=(1, 2), token_copies=(1, 1))
    assert h.validate() == []
    assert universe_intent_violations(M2, M1, S, 2, pool) == []


@settings(max_examples=40)
@given(seeds)
def test_intent_order_without_flows(seed):
    rng = random.Random(seed)
    S = G.schema(rng)
    pool = G.pool(rng, S)
    E = G.classification(rng, S.entity_types, rng.randint(1, 4))
    M2 = G.structure(rng, S, E, rng.randint(0, 5), G.fibers_of(S, pool))
    M1, h = G.vertical_morphism(rng, M2)
    assert h.validate() == []
    boolean = ("neg", "meet", "join", "impl", "diff")
    assert universe_intent_violations(M2, M1, S, 2, pool, boolean) == []


def test_intent_order_holds_on_identity():
    M = structure_go(extra_dest_key=True)
    qs = [Sequent(GO, Top(GO_LIST)), Sequent(Top(DEST_LIST), Exists(H, GO))]
    assert intent_order_holds(M, M, qs)


def test_intent_order_needs_one_schema():
    with pytest.raises(TypeMismatch):
        intent_order_violations(structure_go(), G.structure(random.Random(0), renamed_schema(), Classification({"Agent", "Place", "Vehicle"}, [], []), 0), [])


def test_vertical_maps_identity_on_relations():
    M = structure_go()
    h = StructureMorphism.identity(M)
    assert h.schema_morphism.is_identity
    assert TypeListMorphism.identity(GO_LIST).is_identity
