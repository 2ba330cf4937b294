"""Finite structures, formula evaluation, satisfaction, reducts and morphisms.

Evaluation is fiber relative: the extent of a formula over ``L`` is a subset
of the keys whose tuple is classified by ``L``. Negation, implication and top
complement within that fiber.
"""

from __future__ import annotations

import threading
from collections.abc import Iterable, Mapping

from fole.errors import InvalidMorphism, InvalidStructure, TypeMismatch
from fole.formula import (
    Atom,
    Bottom,
    Constraint,
    Diff,
    Exists,
    Forall,
    Formula,
    Impl,
    Join,
    Meet,
    Neg,
    Sequent,
    Subst,
    Top,
    infer_typelist,
    translate,
    translate_constraint,
)
from fole.kernel import (
    Classification,
    Infomorphism,
    Tuple,
    TupleRelation,
    TypeList,
    inverse_image_classification,
    list_holds,
    preimages,
    tuple_bridge,
    tup_map,
)
from fole.report import Finding
from fole.schema import Schema, SchemaMorphism


class Structure:
    """``<R, <sigma, tau>, E>`` over a schema.

    ``incidence`` holds ``(key, relation)`` pairs and ``tau`` maps each key to
    a tuple of tokens.
    """

    def __init__(
        self,
        schema: Schema,
        entities: Classification,
        keys: Iterable,
        incidence: Iterable = (),
        tau: Mapping | None = None,
        validate: bool = True,
    ):
        self.schema = schema
        self.entities = entities
        self.keys = frozenset(keys)
        self.incidence = frozenset((k, r) for k, r in incidence)
        self.tau = {k: (t if isinstance(t, Tuple) else Tuple(t)) for k, t in (tau or {}).items()}
        self._lock = threading.Lock()
        self._memo: dict = {}
        self._types: dict = {}
        self._fibers: dict = {}
        self._by_rel: dict = {}
        for k, r in self.incidence:
            self._by_rel.setdefault(r, set()).add(k)
        if validate:
            findings = self.validate()
            if findings:
                raise InvalidStructure("; ".join(map(str, findings)))

    def validate(self) -> list[Finding]:
        out = list(self.schema.validate())
        if set(self.tau) != set(self.keys):
            for k in sorted(self.keys - set(self.tau), key=str):
                out.append(Finding("missing-tuple", f"key {k} has no tuple", (k,)))
            for k in sorted(set(self.tau) - self.keys, key=str):
                out.append(Finding("undeclared-key", f"tuple given for undeclared key {k}", (k,)))
        missing_sorts = self.schema.entity_types - self.entities.types
        for x in sorted(missing_sorts, key=str):
            out.append(Finding("UnknownSort", f"sort {x} is not a type of the entity classification", (x,)))
        for k, r in sorted(self.incidence, key=lambda p: (str(p[0]), str(p[1]))):
            if k not in self.keys:
                out.append(Finding("undeclared-key", f"incidence mentions undeclared key {k}", (k, r)))
                continue
            if r not in self.schema.signature:
                out.append(Finding("UnknownRelation", f"incidence mentions unknown relation {r}", (k, r)))
                continue
            if missing_sorts:
                continue
            if not list_holds(self.entities, self.tau.get(k, Tuple()), self.schema.sigma(r)):
                out.append(
                    Finding("structure-condition", f"{k} |= {r} but {self.tau.get(k)!r} is not of type {self.schema.sigma(r)!r}", (k, r))
                )
        for k, t in sorted(self.tau.items(), key=lambda p: str(p[0])):
            for i, y in t.items():
                if y not in self.entities.tokens:
                    out.append(Finding("UnknownToken", f"tuple of {k} mentions undeclared token {y}", (k, i)))
        return out

    # classification views
    def relation_classification(self) -> Classification:
        return Classification(self.schema.relation_types, self.keys, self.incidence)

    def fiber(self, L: TypeList) -> frozenset:
        got = self._fibers.get(L)
        if got is None:
            got = frozenset(k for k in self.keys if list_holds(self.entities, self.tau[k], L))
            with self._lock:
                self._fibers[L] = got
        return got

    def type_of(self, phi: Formula) -> TypeList:
        with self._lock:
            got = self._types.get(phi)
        if got is None:
            got = infer_typelist(self.schema, phi)
            with self._lock:
                self._types[phi] = got
        return got

    def relation_image(self, keys: Iterable, L: TypeList) -> TupleRelation:
        return TupleRelation(L, (self.tau[k] for k in keys))

    # evaluation
    def eval(self, phi: Formula) -> frozenset:
        with self._lock:
            got = self._memo.get(phi)
        if got is not None:
            return got
        got = self._eval(phi)
        with self._lock:
            self._memo[phi] = got
        return got

    def _eval(self, phi: Formula) -> frozenset:
        L = self.type_of(phi)
        if isinstance(phi, Atom):
            return frozenset(self._by_rel.get(phi.relation, ())) & self.fiber(L)
        if isinstance(phi, Top):
            return self.fiber(L)
        if isinstance(phi, Bottom):
            return frozenset()
        if isinstance(phi, Neg):
            return self.fiber(L) - self.eval(phi.body)
        if isinstance(phi, Meet):
            return self.eval(phi.left) & self.eval(phi.right)
        if isinstance(phi, Join):
            return self.eval(phi.left) | self.eval(phi.right)
        if isinstance(phi, Impl):
            return (self.fiber(L) - self.eval(phi.left)) | self.eval(phi.right)
        if isinstance(phi, Diff):
            return self.eval(phi.left) - self.eval(phi.right)
        h = phi.h
        inner = {self.tau[k] for k in self.eval(phi.body)}
        E = self.entities
        if isinstance(phi, Exists):
            image = {tup_map(h, t) for t in inner}
            return frozenset(k for k in self.fiber(L) if self.tau[k] in image)
        if isinstance(phi, Forall):
            return frozenset(
                k for k in self.fiber(L) if all(t in inner for t in preimages(E, h, self.tau[k]))
            )
        if isinstance(phi, Subst):
            return frozenset(k for k in self.fiber(L) if tup_map(h, self.tau[k]) in inner)
        raise TypeError(f"not a formula: {phi!r}")

    def relation_interp(self, phi: Formula) -> TupleRelation:
        return self.relation_image(self.eval(phi), self.type_of(phi))

    def table_interp(self, phi: Formula) -> tuple[frozenset, dict]:
        keys = self.eval(phi)
        return keys, {k: self.tau[k] for k in keys}

    # satisfaction
    def satisfies_sequent(self, q: Sequent) -> bool:
        a, b = self.type_of(q.lhs), self.type_of(q.rhs)
        if a != b:
            raise TypeMismatch(f"sequent sides have type lists {a!r} and {b!r}")
        return self.eval(q.lhs) <= self.eval(q.rhs)

    def satisfies_constraint(self, c: Constraint) -> bool:
        c.check(self.schema)
        return self.satisfies_sequent(c.sequent)

    def satisfies_constraint_adjoint(self, c: Constraint) -> bool:
        """The substitution reading ``phi |- subst[h](phi_prime)``."""
        c.check(self.schema)
        return self.satisfies_sequent(c.adjoint_sequent)

    def satisfies(self, item) -> bool:
        if isinstance(item, Constraint):
            return self.satisfies_constraint(item)
        return self.satisfies_sequent(item)

    def __repr__(self):
        return f"Structure(keys={len(self.keys)}, incidence={len(self.incidence)}, tokens={len(self.entities.tokens)})"

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return (
            self.schema == other.schema
            and self.entities == other.entities
            and self.keys == other.keys
            and self.incidence == other.incidence
            and self.tau == other.tau
        )

    def __hash__(self):
        return hash((self.schema, self.entities, self.keys, self.incidence))


def eval_formula(M: Structure, phi: Formula) -> frozenset:
    return M.eval(phi)


def structure_validate(M: Structure) -> list[Finding]:
    return M.validate()


def relation_interp(M: Structure, phi: Formula) -> TupleRelation:
    return M.relation_interp(phi)


def table_interp(M: Structure, phi: Formula):
    return M.table_interp(phi)


def satisfies_sequent(M: Structure, q: Sequent) -> bool:
    return M.satisfies_sequent(q)


def satisfies_constraint(M: Structure, c: Constraint) -> bool:
    return M.satisfies_constraint(c)


def constraint_relation_inclusion(M: Structure, c: Constraint) -> bool:
    """Whether the existential image of ``R(phi)`` lies inside ``R(phi_prime)``."""
    image = {tup_map(c.h, t) for t in M.relation_interp(c.phi).tuples}
    return image <= M.relation_interp(c.phi_prime).tuples


def constraint_key_function(M: Structure, c: Constraint) -> dict | None:
    """A key map from the table of ``phi`` to the table of ``phi_prime`` that
    sends ``k`` to a key whose tuple is ``tup_map(h, tau(k))``, if one exists."""
    by_tuple: dict = {}
    for k in sorted(M.eval(c.phi_prime), key=str):
        by_tuple.setdefault(M.tau[k], k)
    out = {}
    for k in M.eval(c.phi):
        t = tup_map(c.h, M.tau[k])
        if t not in by_tuple:
            return None
        out[k] = by_tuple[t]
    return out


class StructureMorphism:
    """``<r, k, f, g>: source <=> target`` with ``r: R2 -> R1``,
    ``k: K1 -> K2``, ``f: X2 -> X1`` and ``g: Y1 -> Y2``."""

    def __init__(self, source: Structure, target: Structure, rel_map, key_map, type_map, token_map):
        self.source = source
        self.target = target
        self.rel_map = dict(rel_map)
        self.key_map = dict(key_map)
        self.type_map = dict(type_map)
        self.token_map = dict(token_map)

    @classmethod
    def identity(cls, M: Structure) -> "StructureMorphism":
        return cls(
            M,
            M,
            {r: r for r in M.schema.relation_types},
            {k: k for k in M.keys},
            {x: x for x in M.schema.entity_types},
            {y: y for y in M.entities.tokens},
        )

    @property
    def schema_morphism(self) -> SchemaMorphism:
        return SchemaMorphism(self.source.schema, self.target.schema, self.rel_map, self.type_map)

    @property
    def entity_infomorphism(self) -> Infomorphism:
        return Infomorphism(self.source.entities, self.target.entities, self.type_map, self.token_map)

    @property
    def relation_infomorphism(self) -> Infomorphism:
        return Infomorphism(
            self.source.relation_classification(),
            self.target.relation_classification(),
            self.rel_map,
            self.key_map,
        )

    @property
    def is_vertical(self) -> bool:
        return all(a == b for a, b in self.rel_map.items()) and all(
            a == b for a, b in self.type_map.items()
        )

    def validate(self) -> list[Finding]:
        out = []
        for f in self.schema_morphism.validate():
            out.append(Finding("schema/" + f.code, f.message, f.where))
        ent = self.entity_infomorphism
        for f in ent.validate():
            out.append(Finding("entity/" + f.code, f.message, f.where))
        for f in self.relation_infomorphism.validate():
            out.append(Finding("relation/" + f.code, f.message, f.where))
        if out:
            return out
        for k1 in sorted(self.target.keys, key=str):
            want = tuple_bridge(ent, self.target.tau[k1])
            got = self.source.tau[self.key_map[k1]]
            if want != got:
                out.append(
                    Finding("list-preservation", f"tau2(k({k1})) = {got!r} but g(tau1({k1})) = {want!r}", (k1,))
                )
        return out

    def then(self, other: "StructureMorphism") -> "StructureMorphism":
        """``self: M3 => M2`` followed by ``other: M2 => M1``."""
        return StructureMorphism(
            self.source,
            other.target,
            {r: other.rel_map[self.rel_map[r]] for r in self.rel_map},
            {k: self.key_map[other.key_map[k]] for k in other.key_map},
            {x: other.type_map[self.type_map[x]] for x in self.type_map},
            {y: self.token_map[other.token_map[y]] for y in other.token_map},
        )

    def __eq__(self, other):
        if not isinstance(other, StructureMorphism):
            return NotImplemented
        return (
            self.rel_map == other.rel_map
            and self.key_map == other.key_map
            and self.type_map == other.type_map
            and self.token_map == other.token_map
        )

    def __hash__(self):
        return hash(frozenset(self.key_map.items()))


def structure_morphism_validate(h: StructureMorphism, M2: Structure | None = None, M1: Structure | None = None):
    if M2 is not None or M1 is not None:
        h = StructureMorphism(M2 or h.source, M1 or h.target, h.rel_map, h.key_map, h.type_map, h.token_map)
    return h.validate()


def reduct(m: SchemaMorphism, M1: Structure) -> tuple[Structure, StructureMorphism]:
    """Inverse image of ``M1`` along ``m: S2 -> S1`` and its bridge."""
    findings = m.validate()
    if findings:
        raise InvalidMorphism("; ".join(map(str, findings)))
    if m.target != M1.schema:
        raise InvalidMorphism("schema morphism does not land in the structure's schema")
    entities = inverse_image_classification(m.type_map, M1.entities)
    incidence = [(k, r2) for r2, r1 in m.rel_map.items() for k in M1._by_rel.get(r1, ())]
    M2 = Structure(m.source, entities, M1.keys, incidence, M1.tau, validate=False)
    bridge = StructureMorphism(
        M2,
        M1,
        m.rel_map,
        {k: k for k in M1.keys},
        m.type_map,
        {y: y for y in M1.entities.tokens},
    )
    return M2, bridge


def intent_order_holds(M2: Structure, M1: Structure, sequents: Iterable) -> bool:
    """Every sequent satisfied by ``M2`` is satisfied by ``M1``."""
    return not intent_order_violations(M2, M1, sequents)


def intent_order_violations(M2: Structure, M1: Structure, sequents: Iterable) -> list:
    if M2.schema != M1.schema:
        raise TypeMismatch("intent order compares structures over one schema")
    out = []
    for q in sequents:
        if M2.satisfies(q) and not M1.satisfies(q):
            out.append(q)
    return out


def invariance_report(m: SchemaMorphism, M1: Structure, constraints: Iterable[Constraint]):
    """Per constraint: (constraint, satisfied by the reduct, translation satisfied by M1)."""
    M2, _ = reduct(m, M1)
    return [
        (c, M2.satisfies_constraint(c), M1.satisfies_constraint(translate_constraint(m, c)))
        for c in constraints
    ]


__all__ = [
    "Structure",
    "StructureMorphism",
    "constraint_key_function",
    "constraint_relation_inclusion",
    "eval_formula",
    "intent_order_holds",
    "intent_order_violations",
    "invariance_report",
    "reduct",
    "relation_interp",
    "satisfies_constraint",
    "satisfies_sequent",
    "structure_morphism_validate",
    "structure_validate",
    "table_interp",
    "translate",
]
