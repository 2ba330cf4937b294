import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fole import generate as G
from fole.errors import CapacityExceeded, TypeMismatch
from fole.fixtures import (
    DEST_LIST,
    GO_LIST,
    dest_inclusion,
    rename_morphism,
    renamed_schema,
    schema_go,
    structure_go,
)
from fole.formula import (
    Atom,
    Bottom,
    Constraint,
    Exists,
    Impl,
    Join,
    Meet,
    Neg,
    Sequent,
    Subst,
    Top,
    translate_constraint,
)
from fole.kernel import TypeList, TypeListMorphism, tup
from fole.schema import Schema, SchemaMorphism
from fole.speclogic import (
    CONNECTIVES,
    ClosureRules,
    FormulaUniverse,
    Logic,
    LogicMorphism,
    Specification,
    consequence,
    semantic_entails,
    soundness_check,
    spec_morphism_validate,
    universe_signatures,
)
from fole.structure import Structure, StructureMorphism

GO = Atom("Go")
H = dest_inclusion()
ID_GO = TypeListMorphism.identity(GO_LIST)


def go_spec(*constraints):
    return Specification(schema_go(), constraints)


class TestUniverse:
    def test_depth_zero(self):
        U = FormulaUniverse(schema_go(), 0, [H])
        assert set(U.formulas) == {GO, Top(GO_LIST), Bottom(GO_LIST), Top(DEST_LIST), Bottom(DEST_LIST)}
        assert U.type_of(GO) == GO_LIST

    def test_depth_one_contains_flows(self):
        U = FormulaUniverse(schema_go(), 1, [H])
        assert Exists(H, GO) in U
        assert Subst(H, Top(DEST_LIST)) in U
        assert Meet(GO, Top(GO_LIST)) in U
        assert Neg(Neg(GO)) not in U

    def test_connective_filter(self):
        U = FormulaUniverse(schema_go(), 1, [H], connectives=("neg",))
        assert Neg(GO) in U and Exists(H, GO) not in U
        with pytest.raises(ValueError):
            FormulaUniverse(schema_go(), 1, [H], connectives=("xor",))

    def test_cap(self):
        with pytest.raises(CapacityExceeded):
            FormulaUniverse(schema_go(), 2, [H], cap=100)

    def test_extended_keeps_subformulas(self):
        U = FormulaUniverse(schema_go(), 0).extended([Neg(Neg(GO))])
        assert Neg(GO) in U and Neg(Neg(GO)) in U

    def test_signatures_match_materialized(self):
        M1, M2 = structure_go(), structure_go(extra_dest_key=True)
        U = FormulaUniverse(schema_go(), 2, [H], cap=20_000)
        got = U.signatures([M1, M2])
        want: dict = {}
        for phi in U.formulas:
            want.setdefault(U.type_of(phi), set()).add((M1.eval(phi), M2.eval(phi)))
        assert got == want


class TestGoConsequence:
    def test_contains_spec(self):
        c = Constraint(H, GO, Top(DEST_LIST))
        closure = consequence(go_spec(c), FormulaUniverse(schema_go(), 0, [H]))
        assert c in closure
        assert Sequent(Bottom(GO_LIST), GO) in closure
        assert Sequent(GO, Bottom(GO_LIST)) not in closure

    def test_transitivity(self):
        U = FormulaUniverse(schema_go(), 1, [H])
        a, b = Neg(GO), Bottom(GO_LIST)
        T = go_spec(Constraint(ID_GO, Top(GO_LIST), GO))
        closure = consequence(T, U)
        assert Sequent(a, b) in closure
        assert Sequent(Top(GO_LIST), Meet(GO, GO)) in closure

    def test_modus_ponens(self):
        U = FormulaUniverse(schema_go(), 1, [H])
        T = go_spec(Constraint(ID_GO, Top(GO_LIST), Impl(GO, Bottom(GO_LIST))))
        assert Sequent(GO, Bottom(GO_LIST)) in consequence(T, U)

    def test_flow_monotone(self):
        U = FormulaUniverse(schema_go(), 1, [H])
        T = go_spec(Constraint(ID_GO, Top(GO_LIST), GO))
        assert Sequent(Exists(H, Top(GO_LIST)), Exists(H, GO)) in consequence(T, U)

    def test_schema_check(self):
        with pytest.raises(TypeMismatch):
            consequence(Specification(renamed_schema()), FormulaUniverse(schema_go(), 0))

    def test_identity_constraints(self):
        closure = consequence(go_spec(), FormulaUniverse(schema_go(), 0))
        assert all(c.h.is_identity for c in closure.constraints())
        assert len(closure.constraints()) == len(closure)


class TestAdjunction:
    def spec(self):
        return go_spec(Constraint(H, GO, Bottom(DEST_LIST)))

    def universe(self):
        return FormulaUniverse(schema_go(), 1, [H]).extended([Subst(H, Bottom(DEST_LIST))])

    def test_derives_substitution_form(self):
        closure = consequence(self.spec(), self.universe(), ClosureRules(adjunction=True))
        assert Sequent(GO, Subst(H, Bottom(DEST_LIST))) in closure
        assert Sequent(GO, Subst(H, Bottom(DEST_LIST))) not in consequence(self.spec(), self.universe())

    def test_unsound_without_covering_keys(self):
        M = structure_go()
        assert all(M.satisfies_constraint(c) for c in self.spec().constraints)
        assert consequence(self.spec(), self.universe()).violations(M) == []
        bad = consequence(self.spec(), self.universe(), ClosureRules(adjunction=True)).violations(M)
        assert Sequent(GO, Subst(H, Bottom(DEST_LIST))) in bad


def _covering(rng, S, E, fibers):
    tuples = sorted({t for L in fibers for t in tup(E, L).tuples})
    keys = [f"k{n}" for n in range(len(tuples))]
    tau = dict(zip(keys, tuples))
    inc = [
        (k, r) for k in keys for r in sorted(S.signature)
        if tau[k].arity == S.signature[r].arity
        and all(E.holds(tau[k][i], x) for i, x in S.signature[r].items())
        and rng.random() < 0.5
    ]
    return Structure(S, E, keys, inc, tau)


def _small_instance(rng):
    b = G.Bounds(max_types=2, max_relations=2, max_arity=2, pool_size=1)
    S = G.schema(rng, b)
    pool = G.pool(rng, S, b)
    T = Specification(S, {G.constraint(rng, S, pool, 1) for _ in range(rng.randint(1, 2))})
    return S, pool, T


seeds = st.integers(0, 10**6)


@settings(max_examples=30)
@given(seeds)
def test_closure_sound(seed):
    rng = random.Random(seed)
    S, pool, T = _small_instance(rng)
    closure = consequence(T, FormulaUniverse(S, 1, pool))
    for _ in range(30):
        E = G.classification(rng, S.entity_types, rng.randint(1, 3))
        M = G.structure(rng, S, E, rng.randint(0, 4), G.fibers_of(S, pool))
        if all(semantic_entails(M, c) for c in T.constraints):
            assert closure.violations(M) == []


@settings(max_examples=30)
@given(seeds)
def test_adjunction_sound_on_covering_structures(seed):
    rng = random.Random(seed)
    S, pool, T = _small_instance(rng)
    closure = consequence(T, FormulaUniverse(S, 1, pool), ClosureRules(adjunction=True))
    for _ in range(10):
        E = G.classification(rng, S.entity_types, rng.randint(1, 2))
        M = _covering(rng, S, E, G.fibers_of(S, pool))
        if all(M.satisfies_constraint(c) for c in T.constraints):
            assert closure.violations(M) == []


@settings(max_examples=30)
@given(seeds)
def test_monotone_and_idempotent(seed):
    rng = random.Random(seed)
    S, pool, T = _small_instance(rng)
    U = FormulaUniverse(S, 1, pool)
    small = consequence(T, U)
    extra = G.constraint(rng, S, pool, 1)
    big = consequence(Specification(S, T.constraints | {extra}), U)
    assert small <= big
    again = consequence(Specification(S, small.constraints()), small.universe)
    assert again == small


@settings(max_examples=8)
@given(seeds)
def test_violations_match_direct_check(seed):
    rng = random.Random(seed)
    S, pool, T = _small_instance(rng)
    closure = consequence(T, FormulaUniverse(S, 1, pool))
    E = G.classification(rng, S.entity_types, 2)
    M = G.structure(rng, S, E, 4, G.fibers_of(S, pool))
    assert closure.violations(M) == sorted(q for q in closure if not M.satisfies_sequent(q))


@settings(max_examples=20)
@given(seeds)
def test_signatures_count_distinct_extents(seed):
    rng = random.Random(seed)
    S = G.schema(rng, G.Bounds(max_types=2, max_relations=2, max_arity=2))
    pool = G.pool(rng, S, G.Bounds(max_arity=2, pool_size=1))
    E = G.classification(rng, S.entity_types, 2)
    M = G.structure(rng, S, E, 4, G.fibers_of(S, pool))
    U = FormulaUniverse(S, 1, pool)
    sigs = universe_signatures(S, 1, pool, CONNECTIVES, [M])
    for L, forms in U.by_fiber.items():
        assert {(M.eval(phi),) for phi in forms} == sigs[L]


class TestSpecMorphisms:
    def test_identity(self):
        T = go_spec(Constraint(H, GO, Top(DEST_LIST)))
        U = FormulaUniverse(schema_go(), 0, [H])
        assert spec_morphism_validate(SchemaMorphism.identity(schema_go()), T, T, U) == []

    def test_not_derivable(self):
        T2 = go_spec(Constraint(ID_GO, Top(GO_LIST), GO))
        T1 = go_spec()
        U = FormulaUniverse(schema_go(), 0, [H])
        found = spec_morphism_validate(SchemaMorphism.identity(schema_go()), T2, T1, U)
        assert [f.code for f in found] == ["not-derivable"]

    def test_rename(self):
        m = rename_morphism()
        c = Constraint(H, GO, Top(DEST_LIST))
        T2 = go_spec(c)
        T1 = Specification(renamed_schema(), {translate_constraint(m, c)})
        assert spec_morphism_validate(m, T2, T1, FormulaUniverse(renamed_schema(), 0)) == []

    def test_derivable_but_not_listed(self):
        T2 = go_spec(Constraint(ID_GO, GO, Top(GO_LIST)))
        U = FormulaUniverse(schema_go(), 0)
        assert spec_morphism_validate(SchemaMorphism.identity(schema_go()), T2, go_spec(), U) == []


class TestLogic:
    def test_sound(self):
        L = Logic(structure_go(), go_spec(Constraint(H, GO, Top(DEST_LIST))))
        assert soundness_check(L) == []

    def test_unsound(self):
        L = Logic(structure_go(), go_spec(Constraint(ID_GO, GO, Bottom(GO_LIST))))
        assert [f.code for f in soundness_check(L)] == ["unsatisfied"]

    def test_schema_mismatch(self):
        with pytest.raises(TypeMismatch):
            Logic(structure_go(), Specification(renamed_schema()))

    def test_morphism(self):
        M = structure_go()
        L = Logic(M, go_spec(Constraint(H, GO, Top(DEST_LIST))))
        lm = LogicMorphism(L, L, StructureMorphism.identity(M))
        assert lm.validate(FormulaUniverse(schema_go(), 0, [H])) == []
        stronger = Logic(M, go_spec(Constraint(ID_GO, GO, Bottom(GO_LIST))))
        assert [f.code for f in LogicMorphism(stronger, L, StructureMorphism.identity(M)).validate(FormulaUniverse(schema_go(), 0))] == ["not-derivable"]


def test_specification_checks_constraints():
    with pytest.raises(TypeMismatch):
        Specification(schema_go(), {Constraint(H, Top(DEST_LIST), GO)})
    T = go_spec(Constraint(H, GO, Top(DEST_LIST)), Constraint(ID_GO, GO, Join(GO, GO)))
    assert len(T) == 2 and [str(c) for c in T] == sorted(str(c) for c in T.constraints)
    assert Schema(set(), {}).validate() == []
    assert TypeList() == TypeList({})
