"""Operator domains, terms, finite algebras and flow along term vectors.

Carriers are the extents of the entity classification, so a term vector made
only of variables acts on tuples exactly as the corresponding type-list
morphism does.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

from fole import config
from fole.errors import (
    ArityMismatch,
    SortError,
    TypeMismatch,
    UnknownSort,
    UnknownSymbol,
    UnsoundWitness,
)
from fole.formula import Formula
from fole.kernel import (
    FLOW_MODES,
    Classification,
    Infomorphism,
    Tuple,
    TupleRelation,
    TypeList,
    TypeListMorphism,
    _FrozenMap,
    sum_along,
    tup,
)
from fole.report import Finding
from fole.schema import Schema
from fole.structure import Structure


@dataclass(frozen=True)
class Symbol:
    name: str
    result: str
    signature: TypeList = field(default_factory=TypeList)

    @property
    def is_constant(self) -> bool:
        return len(self.signature) == 0


class OperatorDomain:
    """Function symbols indexed by result sort and argument type list."""

    def __init__(self, sorts, symbols=()):
        self.sorts = frozenset(sorts)
        self.symbols = {s.name: s for s in symbols}

    def symbol(self, name) -> Symbol:
        try:
            return self.symbols[name]
        except KeyError:
            raise UnknownSymbol(f"unknown function symbol {name!r}") from None

    def validate(self) -> list[Finding]:
        out = []
        for name in sorted(self.symbols):
            s = self.symbols[name]
            for x in [s.result, *s.signature.values()]:
                if x not in self.sorts:
                    out.append(Finding("UnknownSort", f"symbol {name} uses undeclared sort {x}", (name,)))
        return out

    def __eq__(self, other):
        return isinstance(other, OperatorDomain) and (self.sorts, self.symbols) == (other.sorts, other.symbols)

    def __hash__(self):
        return hash((self.sorts, frozenset(self.symbols)))


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    index: str

    def __str__(self):
        return str(self.index)


@dataclass(frozen=True)
class App(Term):
    symbol: str
    args: _FrozenMap = field(default_factory=_FrozenMap)

    def __post_init__(self):
        if not isinstance(self.args, _FrozenMap):
            object.__setattr__(self, "args", _FrozenMap(self.args))

    def __str__(self):
        inner = ", ".join(f"{i}: {t}" for i, t in self.args.items())
        return f"{self.symbol}({inner})"


def term_depth(t: Term) -> int:
    if isinstance(t, Var):
        return 0
    return 1 + max((term_depth(a) for a in t.args.values()), default=0)


def term_typecheck(O: OperatorDomain, context: TypeList, t: Term, _depth: int = 0) -> str:
    """Sort of ``t`` in ``context``."""
    if _depth > config.current().term_depth:
        raise SortError("term nesting exceeds the configured depth")
    if isinstance(t, Var):
        if t.index not in context:
            raise SortError(f"variable {t.index!r} is not in context {context!r}")
        return context.sort(t.index)
    sym = O.symbol(t.symbol)
    if set(t.args) != set(sym.signature):
        raise SortError(f"{sym.name} expects slots {sorted(sym.signature)}, got {sorted(t.args)}")
    for slot, arg in t.args.items():
        got = term_typecheck(O, context, arg, _depth + 1)
        if got != sym.signature.sort(slot):
            raise SortError(f"slot {slot} of {sym.name} expects {sym.signature.sort(slot)}, got {got}")
    return sym.result


class TermVector:
    """A family ``{i' -> term}`` over ``signature`` in ``context``; written
    ``signature -> context`` like the type-list morphism it generalizes."""

    __slots__ = ("signature", "context", "terms", "_hash")

    def __init__(self, signature: TypeList, context: TypeList, terms: Mapping):
        terms = dict(terms)
        if set(terms) != set(signature):
            raise ArityMismatch(f"term vector must cover {sorted(signature)}, got {sorted(terms)}")
        self.signature = signature
        self.context = context
        self.terms = _FrozenMap(terms)
        self._hash = hash((signature, context, self.terms))

    @classmethod
    def from_morphism(cls, h: TypeListMorphism) -> "TermVector":
        return cls(h.source, h.target, {i: Var(h[i]) for i in h.source})

    @property
    def is_variable_only(self) -> bool:
        return all(isinstance(t, Var) for t in self.terms.values())

    def to_morphism(self) -> TypeListMorphism:
        if not self.is_variable_only:
            raise SortError("only variable vectors correspond to type-list morphisms")
        return TypeListMorphism(self.signature, self.context, {i: t.index for i, t in self.terms.items()})

    def typecheck(self, O: OperatorDomain) -> "TermVector":
        for i, t in self.terms.items():
            got = term_typecheck(O, self.context, t)
            if got != self.signature.sort(i):
                raise SortError(f"component {i} has sort {got}, expected {self.signature.sort(i)}")
        return self

    def substitute(self, outer: "TermVector") -> "TermVector":
        """Replace each variable of ``self`` (in ``outer.signature``) by
        ``outer``'s term; the result lives in ``outer.context``."""
        if self.context != outer.signature:
            raise ArityMismatch("term vectors are not composable")

        def sub(t):
            if isinstance(t, Var):
                return outer.terms[t.index]
            return App(t.symbol, {s: sub(a) for s, a in t.args.items()})

        return TermVector(self.signature, outer.context, {i: sub(t) for i, t in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, TermVector) and (self.signature, self.context, self.terms) == (
            other.signature,
            other.context,
            other.terms,
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        inner = ", ".join(f"{i}: {t}" for i, t in self.terms.items())
        return f"<{inner}> : {self.signature!r} -> {self.context!r}"


@dataclass(frozen=True)
class Equation:
    lhs: TermVector
    rhs: TermVector

    def __post_init__(self):
        if (self.lhs.signature, self.lhs.context) != (self.rhs.signature, self.rhs.context):
            raise ArityMismatch("equation sides must share endpoints")


@dataclass
class EquationalPresentation:
    domain: OperatorDomain
    equations: list = field(default_factory=list)


class Algebra:
    """Operations ``delta_e`` as lookup tables over the extents of ``entities``."""

    def __init__(self, entities: Classification, domain: OperatorDomain, operations: Mapping):
        self.entities = entities
        self.domain = domain
        self.operations = {
            e: {(t if isinstance(t, Tuple) else Tuple(t)): y for t, y in table.items()}
            if isinstance(table, Mapping)
            else table
            for e, table in operations.items()
        }

    def carrier(self, x) -> frozenset:
        return self.entities.extent(x)

    def validate(self) -> list[Finding]:
        out = list(self.domain.validate())
        for x in sorted(self.domain.sorts - self.entities.types, key=str):
            out.append(Finding("UnknownSort", f"sort {x} is not an entity type", (x,)))
        if out:
            return out
        for name in sorted(self.domain.symbols):
            sym = self.domain.symbols[name]
            table = self.operations.get(name)
            if table is None:
                out.append(Finding("missing-operation", f"no interpretation for {name}", (name,)))
                continue
            for t in tup(self.entities, sym.signature).tuples:
                if t not in table:
                    out.append(Finding("partial-operation", f"{name} undefined at {t!r}", (name,)))
                elif not self.entities.holds(table[t], sym.result):
                    out.append(Finding("carrier", f"{name}{t!r} = {table[t]} is not of sort {sym.result}", (name,)))
        return out

    def apply(self, name, args: Tuple):
        try:
            return self.operations[name][args]
        except KeyError:
            raise SortError(f"{name} is undefined at {args!r}") from None


def eval_term(A: Algebra, context: TypeList, t: Term, env: Tuple):
    if isinstance(t, Var):
        return env[t.index]
    return A.apply(t.symbol, Tuple({s: eval_term(A, context, a, env) for s, a in t.args.items()}))


def eval_vector(A: Algebra, tv: TermVector, env: Tuple) -> Tuple:
    """``A*(tv)`` applied to one environment tuple over ``tv.context``."""
    return Tuple({i: eval_term(A, tv.context, t, env) for i, t in tv.terms.items()})


def satisfies_equation(A: Algebra, eq: Equation) -> bool:
    eq.lhs.typecheck(A.domain)
    eq.rhs.typecheck(A.domain)
    return all(
        eval_vector(A, eq.lhs, env) == eval_vector(A, eq.rhs, env)
        for env in tup(A.entities, eq.lhs.context).tuples
    )


def flow_along_term(A: Algebra, tv: TermVector, mode: str, R: TupleRelation) -> TupleRelation:
    """Kernel flow with ``A*(tv)`` in place of precomposition."""
    if mode not in FLOW_MODES:
        raise ValueError(f"flow mode must be one of {FLOW_MODES}, got {mode!r}")
    tv.typecheck(A.domain)
    E = A.entities
    if mode == "inverse":
        if R.type_list != tv.signature:
            raise ArityMismatch(f"inverse flow needs a relation over {tv.signature!r}")
        return TupleRelation(
            tv.context, (t for t in tup(E, tv.context).tuples if eval_vector(A, tv, t) in R.tuples)
        )
    if R.type_list != tv.context:
        raise ArityMismatch(f"{mode} flow needs a relation over {tv.context!r}")
    if mode == "exists":
        return TupleRelation(tv.signature, (eval_vector(A, tv, t) for t in R.tuples))
    blocked = {eval_vector(A, tv, t) for t in tup(E, tv.context).tuples if t not in R.tuples}
    return TupleRelation(tv.signature, (t for t in tup(E, tv.signature).tuples if t not in blocked))


class OperatorDomainMorphism:
    """``<f, omega>: O2 -> O1``."""

    def __init__(self, source: OperatorDomain, target: OperatorDomain, type_map: Mapping, symbol_map: Mapping):
        self.source = source
        self.target = target
        self.type_map = dict(type_map)
        self.symbol_map = dict(symbol_map)

    @classmethod
    def identity(cls, O: OperatorDomain) -> "OperatorDomainMorphism":
        return cls(O, O, {x: x for x in O.sorts}, {e: e for e in O.symbols})

    def validate(self) -> list[Finding]:
        out = []
        for name in sorted(self.source.symbols):
            s2 = self.source.symbols[name]
            if name not in self.symbol_map or self.symbol_map[name] not in self.target.symbols:
                out.append(Finding("UnknownSymbol", f"{name} has no image", (name,)))
                continue
            s1 = self.target.symbols[self.symbol_map[name]]
            if self.type_map.get(s2.result) != s1.result:
                out.append(Finding("result-sort", f"{name} -> {s1.name} breaks the result sort", (name,)))
            try:
                want = sum_along(self.type_map, s2.signature)
            except UnknownSort:
                out.append(Finding("signature", f"sorts of {name} are unmapped", (name,)))
                continue
            if want != s1.signature:
                out.append(Finding("signature", f"{name} -> {s1.name} breaks the signature", (name,)))
        return out


def translate_term(m: OperatorDomainMorphism, t: Term) -> Term:
    if isinstance(t, Var):
        return t
    if t.symbol not in m.symbol_map:
        raise UnknownSymbol(f"no image for function symbol {t.symbol!r}")
    return App(m.symbol_map[t.symbol], {s: translate_term(m, a) for s, a in t.args.items()})


def translate_vector(m: OperatorDomainMorphism, tv: TermVector) -> TermVector:
    return TermVector(
        sum_along(m.type_map, tv.signature),
        sum_along(m.type_map, tv.context),
        {i: translate_term(m, t) for i, t in tv.terms.items()},
    )


def translate_equation(m: OperatorDomainMorphism, eq: Equation) -> Equation:
    return Equation(translate_vector(m, eq.lhs), translate_vector(m, eq.rhs))


class AlgebraHom:
    """Homomorphism from ``target`` algebra data back to ``source``: the
    carrier map for sort ``x2`` is the token map restricted to the extent of
    ``f(x2)``, and it must commute with the operations."""

    def __init__(self, source: Algebra, target: Algebra, morphism: OperatorDomainMorphism, token_map: Mapping):
        self.source = source
        self.target = target
        self.morphism = morphism
        self.token_map = dict(token_map)

    def carrier_map(self, x2) -> dict:
        x1 = self.morphism.type_map[x2]
        return {y: self.token_map[y] for y in self.target.carrier(x1)}

    def validate(self) -> list[Finding]:
        out = [Finding("domain/" + f.code, f.message, f.where) for f in self.morphism.validate()]
        info = Infomorphism(self.source.entities, self.target.entities, self.morphism.type_map, self.token_map)
        out += [Finding("entity/" + f.code, f.message, f.where) for f in info.validate()]
        if out:
            return out
        g = self.token_map
        for name in sorted(self.source.domain.symbols):
            s2 = self.source.domain.symbols[name]
            e1 = self.morphism.symbol_map[name]
            s1 = self.target.domain.symbols[e1]
            for t1 in tup(self.target.entities, s1.signature).tuples:
                lhs = g[self.target.apply(e1, t1)]
                rhs = self.source.apply(name, Tuple({i: g[y] for i, y in t1.items()}))
                if lhs != rhs:
                    out.append(
                        Finding("square", f"h({e1}{t1!r}) = {lhs} but {name}(h{t1!r}) = {rhs}", (name,))
                    )
        return out


def algebra_hom_validate(h: AlgebraHom, A2: Algebra | None = None, A1: Algebra | None = None):
    if A2 is not None or A1 is not None:
        h = AlgebraHom(A2 or h.source, A1 or h.target, h.morphism, h.token_map)
    return h.validate()


def presentation_morphism_validate(
    m: OperatorDomainMorphism,
    P2: EquationalPresentation,
    P1: EquationalPresentation,
    witness: Algebra,
) -> list[Finding]:
    """Check each translated equation of ``P2`` in a model of ``P1``."""
    for n, eq in enumerate(P1.equations):
        if not satisfies_equation(witness, eq):
            raise UnsoundWitness(f"witness algebra violates equation {n} of the target presentation")
    out = [Finding("domain/" + f.code, f.message, f.where) for f in m.validate()]
    if out:
        return out
    for n, eq in enumerate(P2.equations):
        if not satisfies_equation(witness, translate_equation(m, eq)):
            out.append(Finding("equation", f"translated equation {n} fails in the witness", (n,)))
    return out


@dataclass(frozen=True)
class FOLLanguage:
    schema: Schema
    domain: OperatorDomain

    def __post_init__(self):
        if self.schema.entity_types != self.domain.sorts:
            raise TypeMismatch("schema and operator domain must share their sort set")


@dataclass(frozen=True, eq=False)
class FOLStructure:
    structure: Structure
    algebra: Algebra

    def __post_init__(self):
        if self.structure.entities != self.algebra.entities:
            raise TypeMismatch("structure and algebra must share their entity classification")

    @property
    def language(self) -> FOLLanguage:
        return FOLLanguage(self.structure.schema, self.algebra.domain)


def fol_exists_extent(FM: FOLStructure, tv: TermVector, phi: Formula) -> frozenset:
    M = FM.structure
    if M.type_of(phi) != tv.context:
        raise TypeMismatch(f"formula is not over the context {tv.context!r}")
    image = flow_along_term(FM.algebra, tv, "exists", M.relation_interp(phi))
    return frozenset(k for k in M.fiber(tv.signature) if M.tau[k] in image.tuples)


def fol_subst_extent(FM: FOLStructure, tv: TermVector, phi_prime: Formula) -> frozenset:
    M = FM.structure
    if M.type_of(phi_prime) != tv.signature:
        raise TypeMismatch(f"formula is not over the signature {tv.signature!r}")
    back = flow_along_term(FM.algebra, tv, "inverse", M.relation_interp(phi_prime))
    return frozenset(k for k in M.fiber(tv.context) if M.tau[k] in back.tuples)


def fol_satisfies_constraint(FM: FOLStructure, phi_prime: Formula, tv: TermVector, phi: Formula) -> bool:
    """``exists[tv](phi) |- phi_prime`` with flow along the term vector."""
    if FM.structure.type_of(phi_prime) != tv.signature:
        raise TypeMismatch(f"formula is not over the signature {tv.signature!r}")
    return fol_exists_extent(FM, tv, phi) <= FM.structure.eval(phi_prime)


def all_envs(A: Algebra, context: TypeList):
    return tup(A.entities, context).tuples


def parse_term(text: str, O: OperatorDomain | None = None) -> Term:
    """``John()``, ``f(x: agnt, y: dest)``; a bare identifier is a variable."""
    from fole.syntax import Parser, tokenize

    p = Parser(tokenize(text))
    t = read_term(p)
    p.expect_end()
    if O is not None:
        _check_symbols(O, t)
    return t


def read_term(p) -> Term:
    name = p.ident()
    if not p.accept("("):
        return Var(name)
    args = {}
    if not p.at(")"):
        while True:
            slot = p.ident()
            p.expect(":")
            args[slot] = read_term(p)
            if not p.accept(","):
                break
    p.expect(")")
    return App(name, args)


def _check_symbols(O, t):
    if isinstance(t, App):
        O.symbol(t.symbol)
        for a in t.args.values():
            _check_symbols(O, a)


def constant_vector(signature: TypeList, context: TypeList, constants: Mapping) -> TermVector:
    return TermVector(signature, context, {i: App(c) for i, c in constants.items()})


__all__ = [
    "Algebra",
    "AlgebraHom",
    "App",
    "Equation",
    "EquationalPresentation",
    "FOLLanguage",
    "FOLStructure",
    "OperatorDomain",
    "OperatorDomainMorphism",
    "Symbol",
    "Term",
    "TermVector",
    "Var",
    "algebra_hom_validate",
    "all_envs",
    "constant_vector",
    "eval_term",
    "eval_vector",
    "flow_along_term",
    "fol_satisfies_constraint",
    "parse_term",
    "presentation_morphism_validate",
    "satisfies_equation",
    "term_depth",
    "term_typecheck",
    "translate_equation",
    "translate_term",
    "translate_vector",
]
