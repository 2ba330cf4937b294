"""Formula syntax over a schema: fiber connectives and flow along type-list morphisms.

Formulas are immutable and compared structurally. ``Exists`` and ``Forall``
carry a formula over ``h.target`` to one over ``h.source``; ``Subst`` goes the
other way.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from fole.errors import TypeMismatch, UnknownRelation
from fole.kernel import TypeList, TypeListMorphism, sum_along
from fole.schema import Schema, SchemaMorphism


class Formula:
    __slots__ = ()

    def _key(self):
        return (type(self).__name__,) + tuple(getattr(self, f.name) for f in fields(self))

    def __hash__(self):
        try:
            return object.__getattribute__(self, "_h")
        except AttributeError:
            h = hash(self._key())
            object.__setattr__(self, "_h", h)
            return h

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other):
            return NotImplemented if not isinstance(other, Formula) else False
        return hash(self) == hash(other) and self._key() == other._key()

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __str__(self):
        from fole.syntax import print_formula

        return print_formula(self)

    def __lt__(self, other):
        return (str(self), repr(self)) < (str(other), repr(other))

    @property
    def children(self) -> tuple:
        return ()

    @property
    def depth(self) -> int:
        return 1 + max((c.depth for c in self.children), default=-1)

    def subformulas(self):
        """Every subformula including ``self``, each once."""
        seen = set()
        stack = [self]
        while stack:
            f = stack.pop()
            if f in seen:
                continue
            seen.add(f)
            yield f
            stack.extend(f.children)


@dataclass(frozen=True, eq=False)
class Atom(Formula):
    relation: object


@dataclass(frozen=True, eq=False)
class Top(Formula):
    type_list: TypeList


@dataclass(frozen=True, eq=False)
class Bottom(Formula):
    type_list: TypeList


@dataclass(frozen=True, eq=False)
class Neg(Formula):
    body: Formula

    @property
    def children(self):
        return (self.body,)


@dataclass(frozen=True, eq=False)
class _Binary(Formula):
    left: Formula
    right: Formula

    @property
    def children(self):
        return (self.left, self.right)


class Meet(_Binary):
    pass


class Join(_Binary):
    pass


class Impl(_Binary):
    pass


class Diff(_Binary):
    pass


@dataclass(frozen=True, eq=False)
class _Flow(Formula):
    h: TypeListMorphism
    body: Formula

    @property
    def children(self):
        return (self.body,)


class Exists(_Flow):
    """Existential quantification along ``h`` (target fiber to source fiber)."""


class Forall(_Flow):
    """Universal quantification along ``h`` (target fiber to source fiber)."""


class Subst(_Flow):
    """Substitution along ``h`` (source fiber to target fiber)."""


SumFlow = Exists
ProdFlow = Forall
BINARY = (Meet, Join, Impl, Diff)
FLOWS = (Exists, Forall, Subst)


def infer_typelist(schema: Schema, phi: Formula, _memo: dict | None = None) -> TypeList:
    """Type list of ``phi``; raises ``TypeMismatch`` when ill-typed."""
    memo = {} if _memo is None else _memo
    if phi in memo:
        return memo[phi]
    if isinstance(phi, Atom):
        if phi.relation not in schema.signature:
            raise UnknownRelation(f"unknown relation type {phi.relation!r}")
        out = schema.signature[phi.relation]
    elif isinstance(phi, (Top, Bottom)):
        for x in phi.type_list.values():
            if x not in schema.entity_types:
                raise TypeMismatch(f"{phi} mentions undeclared sort {x!r}")
        out = phi.type_list
    elif isinstance(phi, Neg):
        out = infer_typelist(schema, phi.body, memo)
    elif isinstance(phi, _Binary):
        a = infer_typelist(schema, phi.left, memo)
        b = infer_typelist(schema, phi.right, memo)
        if a != b:
            raise TypeMismatch(f"operands of {type(phi).__name__} have type lists {a!r} and {b!r}")
        out = a
    elif isinstance(phi, (Exists, Forall)):
        inner = infer_typelist(schema, phi.body, memo)
        if inner != phi.h.target:
            raise TypeMismatch(f"{type(phi).__name__}[{phi.h!r}] applied to a formula over {inner!r}")
        out = phi.h.source
    elif isinstance(phi, Subst):
        inner = infer_typelist(schema, phi.body, memo)
        if inner != phi.h.source:
            raise TypeMismatch(f"Subst[{phi.h!r}] applied to a formula over {inner!r}")
        out = phi.h.target
    else:
        raise TypeError(f"not a formula: {phi!r}")
    memo[phi] = out
    return out


def well_typed(schema: Schema, phi: Formula) -> bool:
    try:
        infer_typelist(schema, phi)
    except (TypeMismatch, UnknownRelation):
        return False
    return True


def translate(m: SchemaMorphism, phi: Formula) -> Formula:
    """Push ``phi`` along ``m``: atoms via the relation map, sorts via the type map."""
    f = m.type_map
    memo: dict = {}

    def go(p):
        if p in memo:
            return memo[p]
        if isinstance(p, Atom):
            if p.relation not in m.rel_map:
                raise UnknownRelation(f"relation {p.relation!r} is not in the morphism's domain")
            out = Atom(m.rel_map[p.relation])
        elif isinstance(p, Top):
            out = Top(sum_along(f, p.type_list))
        elif isinstance(p, Bottom):
            out = Bottom(sum_along(f, p.type_list))
        elif isinstance(p, Neg):
            out = Neg(go(p.body))
        elif isinstance(p, _Binary):
            out = type(p)(go(p.left), go(p.right))
        elif isinstance(p, _Flow):
            out = type(p)(p.h.resort(f), go(p.body))
        else:
            raise TypeError(f"not a formula: {p!r}")
        memo[p] = out
        return out

    return go(phi)


@dataclass(frozen=True)
class Sequent:
    lhs: Formula
    rhs: Formula

    def type_list(self, schema: Schema) -> TypeList:
        a = infer_typelist(schema, self.lhs)
        b = infer_typelist(schema, self.rhs)
        if a != b:
            raise TypeMismatch(f"sequent sides have type lists {a!r} and {b!r}")
        return a

    def __str__(self):
        return f"{self.lhs} |- {self.rhs}"

    def __lt__(self, other):
        return (str(self.lhs), str(self.rhs)) < (str(other.lhs), str(other.rhs))


@dataclass(frozen=True)
class IndexedFormula:
    type_list: TypeList
    formula: Formula

    def check(self, schema: Schema) -> "IndexedFormula":
        got = infer_typelist(schema, self.formula)
        if got != self.type_list:
            raise TypeMismatch(f"{self.formula} has type list {got!r}, not {self.type_list!r}")
        return self


@dataclass(frozen=True)
class Constraint:
    """``h: <I',s'> -> <I,s>`` with ``phi`` over the target and ``phi_prime``
    over the source, read as ``exists[h](phi) |- phi_prime``."""

    h: TypeListMorphism
    phi: Formula
    phi_prime: Formula

    @classmethod
    def of_sequent(cls, q: Sequent, type_list: TypeList) -> "Constraint":
        return cls(TypeListMorphism.identity(type_list), q.lhs, q.rhs)

    @property
    def sequent(self) -> Sequent:
        if self.h.is_identity:
            return Sequent(self.phi, self.phi_prime)
        return Sequent(Exists(self.h, self.phi), self.phi_prime)

    @property
    def adjoint_sequent(self) -> Sequent:
        if self.h.is_identity:
            return Sequent(self.phi, self.phi_prime)
        return Sequent(self.phi, Subst(self.h, self.phi_prime))

    def check(self, schema: Schema) -> "Constraint":
        a = infer_typelist(schema, self.phi)
        b = infer_typelist(schema, self.phi_prime)
        if a != self.h.target or b != self.h.source:
            raise TypeMismatch(
                f"constraint along {self.h!r} has formulas over {a!r} and {b!r}"
            )
        return self

    def __str__(self):
        return str(self.sequent)


def translate_sequent(m: SchemaMorphism, q: Sequent) -> Sequent:
    return Sequent(translate(m, q.lhs), translate(m, q.rhs))


def translate_constraint(m: SchemaMorphism, c: Constraint) -> Constraint:
    return Constraint(c.h.resort(m.type_map), translate(m, c.phi), translate(m, c.phi_prime))


def relations_of(phi: Formula) -> frozenset:
    return frozenset(p.relation for p in phi.subformulas() if isinstance(p, Atom))


def morphisms_of(phi: Formula) -> frozenset:
    return frozenset(p.h for p in phi.subformulas() if isinstance(p, _Flow))
