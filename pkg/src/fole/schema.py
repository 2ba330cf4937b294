"""Relational schemas and schema morphisms."""

from __future__ import annotations

from collections.abc import Iterable, Mapping

from fole.errors import CompositionMismatch, InvalidMorphism, UnknownRelation
from fole.kernel import TypeList, sum_along
from fole.report import Finding


class Schema:
    """``<R, sigma, X>``: relation types with type-list signatures over X."""

    __slots__ = ("entity_types", "signature", "_hash")

    def __init__(self, entity_types: Iterable, signature: Mapping | None = None):
        self.entity_types = frozenset(entity_types)
        self.signature = {r: (L if isinstance(L, TypeList) else TypeList(L))
                          for r, L in (signature or {}).items()}
        self._hash = hash((self.entity_types, frozenset(self.signature.items())))

    @property
    def relation_types(self) -> frozenset:
        return frozenset(self.signature)

    def sigma(self, relation) -> TypeList:
        try:
            return self.signature[relation]
        except KeyError:
            raise UnknownRelation(f"unknown relation type {relation!r}") from None

    def validate(self) -> list[Finding]:
        out = []
        for r in sorted(self.signature, key=str):
            for i, x in self.signature[r].items():
                if x not in self.entity_types:
                    out.append(Finding("UnknownSort", f"{r}.{i} has undeclared sort {x}", (r, i)))
        return out

    def __eq__(self, other):
        if not isinstance(other, Schema):
            return NotImplemented
        return self.entity_types == other.entity_types and self.signature == other.signature

    def __hash__(self):
        return self._hash

    def __repr__(self):
        rels = ", ".join(f"{r}{self.signature[r]!r}" for r in sorted(self.signature, key=str))
        return f"Schema(X={sorted(self.entity_types, key=str)}, R=[{rels}])"


def schema_validate(schema: Schema) -> list[Finding]:
    return schema.validate()


class SchemaMorphism:
    """``<r, f>: S2 -> S1`` with ``r: R2 -> R1`` and ``f: X2 -> X1``."""

    __slots__ = ("source", "target", "rel_map", "type_map")

    def __init__(self, source: Schema, target: Schema, rel_map: Mapping, type_map: Mapping):
        self.source = source
        self.target = target
        self.rel_map = dict(rel_map)
        self.type_map = dict(type_map)

    @classmethod
    def identity(cls, schema: Schema) -> "SchemaMorphism":
        return cls(
            schema,
            schema,
            {r: r for r in schema.relation_types},
            {x: x for x in schema.entity_types},
        )

    def validate(self) -> list[Finding]:
        s2, s1 = self.source, self.target
        out = []
        for x in sorted(s2.entity_types, key=str):
            if x not in self.type_map:
                out.append(Finding("partial-type-map", f"sort {x} unmapped", (x,)))
            elif self.type_map[x] not in s1.entity_types:
                out.append(Finding("bad-type-image", f"{x} -> {self.type_map[x]} not a target sort", (x,)))
        for r in sorted(s2.relation_types, key=str):
            if r not in self.rel_map:
                out.append(Finding("partial-relation-map", f"relation {r} unmapped", (r,)))
            elif self.rel_map[r] not in s1.relation_types:
                out.append(Finding("bad-relation-image", f"{r} -> {self.rel_map[r]} not a target relation", (r,)))
        if out:
            return out
        for r in sorted(s2.relation_types, key=str):
            want = sum_along(self.type_map, s2.sigma(r))
            got = s1.sigma(self.rel_map[r])
            if want != got:
                out.append(
                    Finding("signature", f"{r} -> {self.rel_map[r]}: expected {want!r}, target has {got!r}", (r,))
                )
        return out

    def require_valid(self) -> "SchemaMorphism":
        findings = self.validate()
        if findings:
            raise InvalidMorphism("; ".join(map(str, findings)))
        return self

    def then(self, other: "SchemaMorphism") -> "SchemaMorphism":
        """Composite ``self: S3 -> S2`` followed by ``other: S2 -> S1``."""
        if self.target != other.source:
            raise CompositionMismatch("schema morphisms are not composable")
        return SchemaMorphism(
            self.source,
            other.target,
            {r: other.rel_map[self.rel_map[r]] for r in self.rel_map},
            {x: other.type_map[self.type_map[x]] for x in self.type_map},
        ).require_valid()

    @property
    def is_identity(self) -> bool:
        return (
            self.source == self.target
            and all(a == b for a, b in self.rel_map.items())
            and all(a == b for a, b in self.type_map.items())
        )

    def __eq__(self, other):
        if not isinstance(other, SchemaMorphism):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.rel_map == other.rel_map
            and self.type_map == other.type_map
        )

    def __hash__(self):
        return hash((self.source, self.target, frozenset(self.rel_map.items())))

    def __repr__(self):
        return f"SchemaMorphism(r={self.rel_map}, f={self.type_map})"


def schema_morphism_validate(m: SchemaMorphism, s2: Schema | None = None, s1: Schema | None = None):
    if s2 is not None or s1 is not None:
        m = SchemaMorphism(s2 or m.source, s1 or m.target, m.rel_map, m.type_map)
    return m.validate()


def schema_morphism_compose(m1: SchemaMorphism, m2: SchemaMorphism) -> SchemaMorphism:
    """``m1`` first, then ``m2``."""
    return m1.then(m2)
