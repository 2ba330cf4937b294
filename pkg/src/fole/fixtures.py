"""The "John is going to Boston by bus" fixture and small variants."""

from __future__ import annotations

from fole.kernel import Classification, TypeList, TypeListMorphism
from fole.schema import Schema, SchemaMorphism
from fole.structure import Structure

GO_LIST = TypeList({"agnt": "Person", "dest": "City", "inst": "Bus"})
DEST_LIST = TypeList({"dest": "City"})


def entities_go() -> Classification:
    return Classification(
        {"Person", "City", "Bus"},
        {"john", "jane", "boston", "bus1"},
        [("john", "Person"), ("jane", "Person"), ("boston", "City"), ("bus1", "Bus")],
    )


def schema_go() -> Schema:
    return Schema({"Person", "City", "Bus"}, {"Go": GO_LIST})


def structure_go(extra_dest_key: bool = False) -> Structure:
    keys = {"k1"}
    tau = {"k1": {"agnt": "john", "dest": "boston", "inst": "bus1"}}
    if extra_dest_key:
        keys.add("k2")
        tau["k2"] = {"dest": "boston"}
    return Structure(schema_go(), entities_go(), keys, [("k1", "Go")], tau)


def dest_inclusion() -> TypeListMorphism:
    return TypeListMorphism.inclusion(DEST_LIST, GO_LIST, name="dest")


def renamed_schema() -> Schema:
    return Schema(
        {"Agent", "Place", "Vehicle"},
        {"Travel": TypeList({"agnt": "Agent", "dest": "Place", "inst": "Vehicle"})},
    )


def rename_morphism() -> SchemaMorphism:
    """``S_go -> renamed``: Go to Travel, Person to Agent and so on."""
    return SchemaMorphism(
        schema_go(),
        renamed_schema(),
        {"Go": "Travel"},
        {"Person": "Agent", "City": "Place", "Bus": "Vehicle"},
    )


CHAIN_LIST = TypeList({"x": "Item"})


def schema_chain() -> Schema:
    return Schema({"Item"}, {"A": CHAIN_LIST, "B": CHAIN_LIST, "C": CHAIN_LIST})


def structure_chain() -> Structure:
    E = Classification({"Item"}, {"a", "b", "c"}, [("a", "Item"), ("b", "Item"), ("c", "Item")])
    inc = [("ka", "A"), ("ka", "B"), ("ka", "C"), ("kb", "B"), ("kb", "C"), ("kc", "C")]
    tau = {"ka": {"x": "a"}, "kb": {"x": "b"}, "kc": {"x": "c"}}
    return Structure(schema_chain(), E, {"ka", "kb", "kc"}, inc, tau)


def two_node_system():
    """Two nodes over one vocabulary: node ``n1`` knows ``A |- B`` and node
    ``n2`` knows ``B |- C``; the edge is the identity."""
    from fole.formula import Atom, Constraint
    from fole.speclogic import Logic, LogicMorphism, Specification
    from fole.structure import StructureMorphism
    from fole.system import InformationSystem, ShapeGraph

    S, M = schema_chain(), structure_chain()
    idl = TypeListMorphism.identity(CHAIN_LIST)
    T1 = Specification(S, {Constraint(idl, Atom("A"), Atom("B"))})
    T2 = Specification(S, {Constraint(idl, Atom("B"), Atom("C"))})
    L1, L2 = Logic(M, T1), Logic(M, T2)
    shape = ShapeGraph(("n1", "n2"), {"e": ("n1", "n2")})
    return InformationSystem(shape, {"n1": L1, "n2": L2}, {"e": LogicMorphism(L1, L2, StructureMorphism.identity(M))})
