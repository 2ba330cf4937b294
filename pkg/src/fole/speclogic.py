"""Specifications, bounded consequence, specification morphisms and logics.

Consequence is a least fixpoint over a finite ``FormulaUniverse``. Each fiber
keeps its derivability relation as one bitset row per formula.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field

from fole import config
from fole.errors import CapacityExceeded, TypeMismatch
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
    translate_constraint,
)
from fole.kernel import TypeList, TypeListMorphism
from fole.report import Finding
from fole.schema import Schema, SchemaMorphism
from fole.structure import Structure, StructureMorphism

CONNECTIVES = ("neg", "meet", "join", "impl", "diff", "exists", "forall", "subst")
_BINARY = {"meet": Meet, "join": Join, "impl": Impl, "diff": Diff}
_FLOW = {"exists": Exists, "forall": Forall}


@dataclass(frozen=True)
class Specification:
    schema: Schema
    constraints: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "constraints", frozenset(self.constraints))
        for c in self.constraints:
            c.check(self.schema)

    def formulas(self) -> set:
        out = set()
        for c in self.constraints:
            q = c.sequent
            out.update(q.lhs.subformulas())
            out.update(q.rhs.subformulas())
        return out

    def __iter__(self):
        return iter(sorted(self.constraints, key=str))

    def __len__(self):
        return len(self.constraints)


class FormulaUniverse:
    """All well-typed formulas of depth at most ``depth`` whose flow
    operators use morphisms from ``pool``.

    Fibers are the relation signatures, the endpoints of the pool, and the
    type lists of any ``extra`` formulas (which are added with their
    subformulas but are not closed under further connectives).
    """

    def __init__(
        self,
        schema: Schema,
        depth: int,
        pool: Iterable[TypeListMorphism] = (),
        connectives: Iterable[str] = CONNECTIVES,
        extra: Iterable[Formula] = (),
        cap: int | None = None,
    ):
        self.schema = schema
        self.depth = depth
        self.pool = tuple(sorted(set(pool), key=repr))
        self.connectives = frozenset(connectives)
        unknown = self.connectives - set(CONNECTIVES)
        if unknown:
            raise ValueError(f"unknown connectives {sorted(unknown)}")
        self.cap = config.current().universe_cap if cap is None else cap
        fibers = set(schema.signature.values())
        for h in self.pool:
            fibers.add(h.source)
            fibers.add(h.target)
        self._types: dict = {}
        self.by_fiber: dict = {L: [] for L in fibers}
        self._seen: set = set()
        self._build()
        self._add_extra(extra)

    def _add(self, phi: Formula, L: TypeList) -> bool:
        if phi in self._seen:
            return False
        if len(self._seen) >= self.cap:
            raise CapacityExceeded(f"formula universe exceeds {self.cap} formulas")
        self._seen.add(phi)
        self._types[phi] = L
        self.by_fiber.setdefault(L, []).append(phi)
        return True

    def _build(self):
        for L in sorted(self.by_fiber, key=repr):
            self._add(Top(L), L)
            self._add(Bottom(L), L)
        for r in sorted(self.schema.signature, key=str):
            self._add(Atom(r), self.schema.signature[r])
        frontier = set(self._seen)
        for _ in range(self.depth):
            snapshot = {L: list(v) for L, v in self.by_fiber.items()}
            new = set()

            def add(phi, L):
                if self._add(phi, L):
                    new.add(phi)

            for L, forms in snapshot.items():
                for a in forms:
                    if "neg" in self.connectives and a in frontier:
                        add(Neg(a), L)
                for name, cls in _BINARY.items():
                    if name not in self.connectives:
                        continue
                    for a in forms:
                        for b in forms:
                            if a in frontier or b in frontier:
                                add(cls(a, b), L)
            for h in self.pool:
                for name, cls in _FLOW.items():
                    if name in self.connectives:
                        for a in snapshot.get(h.target, ()):
                            if a in frontier:
                                add(cls(h, a), h.source)
                if "subst" in self.connectives:
                    for a in snapshot.get(h.source, ()):
                        if a in frontier:
                            add(Subst(h, a), h.target)
            frontier = new
            if not new:
                break

    def _add_extra(self, extra):
        for phi in extra:
            for sub in sorted(phi.subformulas(), key=lambda p: p.depth):
                L = infer_typelist(self.schema, sub)
                self._add(sub, L)

    def extended(self, formulas: Iterable[Formula]) -> "FormulaUniverse":
        out = object.__new__(FormulaUniverse)
        out.schema = self.schema
        out.depth = self.depth
        out.pool = self.pool
        out.connectives = self.connectives
        out.cap = self.cap
        out._types = dict(self._types)
        out.by_fiber = {L: list(v) for L, v in self.by_fiber.items()}
        out._seen = set(self._seen)
        out._add_extra(formulas)
        return out

    def type_of(self, phi: Formula) -> TypeList:
        return self._types[phi]

    def __contains__(self, phi) -> bool:
        return phi in self._seen

    def __len__(self):
        return len(self._seen)

    @property
    def formulas(self) -> list:
        return [phi for L in sorted(self.by_fiber, key=repr) for phi in self.by_fiber[L]]

    def sequents(self):
        """Every sequent between two formulas of one fiber."""
        for L in sorted(self.by_fiber, key=repr):
            forms = self.by_fiber[L]
            for a in forms:
                for b in forms:
                    yield Sequent(a, b)

    def signatures(self, structures) -> dict:
        """Per fiber, the distinct joint extents ``(eval in M for M in structures)``
        realised by formulas of the universe, computed level by level without
        materializing formulas."""
        return universe_signatures(self.schema, self.depth, self.pool, self.connectives, structures)


def universe_signatures(schema, depth, pool, connectives, structures) -> dict:
    """Joint extents of all universe formulas across ``structures``.

    Evaluation is compositional, so the set of joint extents at depth ``d+1``
    is determined by the set at depth ``d``.
    """
    from fole.kernel import preimages, tup_map

    Ms = list(structures)
    connectives = frozenset(connectives)
    fibers = set(schema.signature.values())
    for h in pool:
        fibers.update((h.source, h.target))
    level: dict = {L: set() for L in fibers}
    for L in fibers:
        level[L].add(tuple(M.fiber(L) for M in Ms))
        level[L].add(tuple(frozenset() for _ in Ms))
    for r, L in schema.signature.items():
        level[L].add(tuple(M.eval(Atom(r)) for M in Ms))

    def flow_sig(kind, h, sig):
        out = []
        for M, ext in zip(Ms, sig):
            inner = {M.tau[k] for k in ext}
            if kind == "exists":
                image = {tup_map(h, t) for t in inner}
                out.append(frozenset(k for k in M.fiber(h.source) if M.tau[k] in image))
            elif kind == "forall":
                out.append(frozenset(
                    k for k in M.fiber(h.source)
                    if all(t in inner for t in preimages(M.entities, h, M.tau[k]))
                ))
            else:
                out.append(frozenset(k for k in M.fiber(h.target) if tup_map(h, M.tau[k]) in inner))
        return tuple(out)

    for _ in range(depth):
        nxt = {L: set(v) for L, v in level.items()}
        for L, sigs in level.items():
            fib = tuple(M.fiber(L) for M in Ms)
            sigs = list(sigs)
            if "neg" in connectives:
                for s in sigs:
                    nxt[L].add(tuple(f - a for f, a in zip(fib, s)))
            for a in sigs:
                for b in sigs:
                    if "meet" in connectives:
                        nxt[L].add(tuple(x & y for x, y in zip(a, b)))
                    if "join" in connectives:
                        nxt[L].add(tuple(x | y for x, y in zip(a, b)))
                    if "impl" in connectives:
                        nxt[L].add(tuple((f - x) | y for f, x, y in zip(fib, a, b)))
                    if "diff" in connectives:
                        nxt[L].add(tuple(x - y for x, y in zip(a, b)))
        for h in pool:
            for kind in ("exists", "forall"):
                if kind in connectives:
                    for s in level[h.target]:
                        nxt[h.source].add(flow_sig(kind, h, s))
            if "subst" in connectives:
                for s in level[h.source]:
                    nxt[h.target].add(flow_sig("subst", h, s))
        if nxt == level:
            break
        level = nxt
    return level


@dataclass(frozen=True)
class ClosureRules:
    """Rule families used by ``consequence``.

    The adjunction rules relate ``exists``/``subst``/``forall`` across fibers;
    they are only sound for structures whose keys are determined by their
    tuples, so they are off by default.
    """

    lattice: bool = True
    classical: bool = True
    flow_monotone: bool = True
    adjunction: bool = False


class Consequence:
    """Derived sequents; ``c in result`` also accepts a ``Constraint``."""

    def __init__(self, sequents: frozenset, universe: FormulaUniverse, rows=None, forms=None):
        self.sequents = sequents
        self.universe = universe
        self._rows = rows
        self._forms = forms

    def violations(self, M: Structure) -> list[Sequent]:
        """Derived sequents that fail in ``M``."""
        if self._rows is None:
            return sorted(q for q in self.sequents if not M.satisfies_sequent(q))
        exts = [M.eval(phi) for phi in self._forms]
        sup: dict = {}
        out = []
        for i, row in enumerate(self._rows):
            e = exts[i]
            mask = sup.get(e)
            if mask is None:
                mask = 0
                for j, other in enumerate(exts):
                    if e <= other:
                        mask |= 1 << j
                sup[e] = mask
            bad = row & ~mask
            out.extend(Sequent(self._forms[i], self._forms[j]) for j in _bits(bad))
        return sorted(out)

    def __contains__(self, item) -> bool:
        if isinstance(item, Constraint):
            item = item.sequent
        return item in self.sequents

    def __iter__(self):
        return iter(sorted(self.sequents))

    def __len__(self):
        return len(self.sequents)

    def __eq__(self, other):
        if isinstance(other, Consequence):
            return self.sequents == other.sequents
        return NotImplemented

    def __le__(self, other):
        return self.sequents <= other.sequents

    def constraints(self) -> frozenset:
        out = set()
        for q in self.sequents:
            L = self.universe.type_of(q.lhs)
            out.add(Constraint(TypeListMorphism.identity(L), q.lhs, q.rhs))
        return frozenset(out)


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


class _Closure:
    def __init__(self, U: FormulaUniverse, rules: ClosureRules):
        self.U = U
        self.rules = rules
        self.index: dict = {}
        self.forms: list = []
        for phi in U.formulas:
            self.index[phi] = len(self.forms)
            self.forms.append(phi)
        n = len(self.forms)
        self.rows = [1 << i for i in range(n)]
        self.changed = False
        self.fiber_of = [U.type_of(phi) for phi in self.forms]
        self.top = {}
        self.bot = {}
        for L, forms in U.by_fiber.items():
            self.top[L] = self.index.get(Top(L))
            self.bot[L] = self.index.get(Bottom(L))
        self.meet_of = {}
        for i, phi in enumerate(self.forms):
            if isinstance(phi, Meet):
                self.meet_of[(self.index[phi.left], self.index[phi.right])] = i

    def add(self, i: int, j: int):
        if i is None or j is None:
            return
        if not (self.rows[i] >> j) & 1:
            self.rows[i] |= 1 << j
            self.changed = True

    def holds(self, i, j) -> bool:
        return i is not None and j is not None and bool((self.rows[i] >> j) & 1)

    def transitive(self):
        rows = self.rows
        n = len(rows)
        for k in range(n):
            bk = 1 << k
            rk = rows[k]
            for i in range(n):
                ri = rows[i]
                if ri & bk and (ri | rk) != ri:
                    rows[i] = ri | rk
                    self.changed = True

    def run(self, seeds):
        for i, j in seeds:
            self.add(i, j)
        self._static()
        while True:
            self.changed = False
            self.transitive()
            self._dynamic()
            if not self.changed:
                break
        out = set()
        for i, row in enumerate(self.rows):
            for j in _bits(row):
                out.add(Sequent(self.forms[i], self.forms[j]))
        return frozenset(out), list(self.rows), list(self.forms)

    def _static(self):
        """Unconditional axioms."""
        idx = self.index
        r = self.rules
        for i, phi in enumerate(self.forms):
            L = self.fiber_of[i]
            self.add(self.bot[L], i)
            self.add(i, self.top[L])
            if r.lattice:
                if isinstance(phi, Meet):
                    self.add(i, idx[phi.left])
                    self.add(i, idx[phi.right])
                if isinstance(phi, Join):
                    self.add(idx[phi.left], i)
                    self.add(idx[phi.right], i)
                if isinstance(phi, Diff):
                    self.add(i, idx[phi.left])
                    m = self.meet_of.get((i, idx[phi.right]))
                    self.add(m, self.bot[L])
            if r.classical:
                if isinstance(phi, Neg):
                    a = idx[phi.body]
                    self.add(self.meet_of.get((a, i)), self.bot[L])
                    self.add(self.meet_of.get((i, a)), self.bot[L])
                    if isinstance(phi.body, Neg):
                        self.add(i, idx[phi.body.body])
                        self.add(idx[phi.body.body], i)
                    imp = idx.get(Impl(phi.body, Bottom(L)))
                    self.add(i, imp)
                    self.add(imp, i)
                if isinstance(phi, Join):
                    a, b = phi.left, phi.right
                    if b == Neg(a) or a == Neg(b):
                        self.add(self.top[L], i)
                if isinstance(phi, Impl):
                    a, b = idx[phi.left], idx[phi.right]
                    self.add(self.meet_of.get((i, a)), b)
                    self.add(self.meet_of.get((a, i)), b)
                    alt = idx.get(Join(Neg(phi.left), phi.right))
                    self.add(i, alt)
                    self.add(alt, i)
                if isinstance(phi, Diff):
                    alt = idx.get(Meet(phi.left, Neg(phi.right)))
                    self.add(i, alt)
                    self.add(alt, i)
            if isinstance(phi, Exists) and isinstance(phi.body, Bottom):
                self.add(i, self.bot[L])
            if r.adjunction and isinstance(phi, Subst):
                inner = phi.body
                if isinstance(inner, Exists) and inner.h == phi.h:
                    # unit: psi |- subst[h](exists[h](psi))
                    self.add(idx.get(inner.body), i)
            if r.adjunction and isinstance(phi, Exists):
                inner = phi.body
                if isinstance(inner, Subst) and inner.h == phi.h:
                    # counit: exists[h](subst[h](psi')) |- psi'
                    self.add(i, idx.get(inner.body))

    def _dynamic(self):
        """Rules with premises."""
        idx = self.index
        forms = self.forms
        r = self.rules
        n = len(forms)
        for i, phi in enumerate(forms):
            L = self.fiber_of[i]
            if r.lattice and isinstance(phi, Meet):
                a, b = idx[phi.left], idx[phi.right]
                need = (1 << a) | (1 << b)
                for c in range(n):
                    if self.rows[c] & need == need:
                        self.add(c, i)
            elif r.lattice and isinstance(phi, Join):
                a, b = idx[phi.left], idx[phi.right]
                for c in _bits(self.rows[a] & self.rows[b]):
                    self.add(i, c)
            elif isinstance(phi, Impl):
                a, b = idx[phi.left], idx[phi.right]
                for (c, d), m in self.meet_of.items():
                    if d == a and self.holds(m, b):
                        self.add(c, i)
                    if d == a and self.holds(c, i):
                        self.add(m, b)
                for (d, c), m in self.meet_of.items():
                    if d == a and self.holds(m, b):
                        self.add(c, i)
            elif r.classical and isinstance(phi, Neg):
                a = idx[phi.body]
                bot = self.bot[L]
                for (c, d), m in self.meet_of.items():
                    if d == a and self.holds(m, bot):
                        self.add(c, i)
                    if d == a and self.holds(c, i):
                        self.add(m, bot)
                for j in _bits(self.rows[a]):
                    nj = idx.get(Neg(forms[j]))
                    if nj is not None:
                        self.add(nj, i)
                # c |- a and c |- ~a give c |- bot; ~a |- a gives top |- a
                need = (1 << a) | (1 << i)
                for c in range(n):
                    if self.rows[c] & need == need:
                        self.add(c, bot)
                if self.holds(i, a):
                    self.add(self.top[L], a)
            elif r.lattice and isinstance(phi, Diff):
                a, b = idx[phi.left], idx[phi.right]
                bot = self.bot[L]
                for (c, d), m in self.meet_of.items():
                    if d == b and self.holds(c, a) and self.holds(m, bot):
                        self.add(c, i)
            if r.flow_monotone and isinstance(phi, (Exists, Forall, Subst)):
                a = idx[phi.body]
                for j in _bits(self.rows[a]):
                    other = idx.get(type(phi)(phi.h, forms[j]))
                    self.add(i, other)
        if r.adjunction:
            self._adjunction()

    def _adjunction(self):
        idx = self.index
        forms = self.forms
        for i, phi in enumerate(forms):
            if isinstance(phi, Exists):
                # exists[h](a) |- b  iff  a |- subst[h](b)
                a = idx[phi.body]
                for b in idx_fiber(self, phi.h.source):
                    s = idx.get(Subst(phi.h, forms[b]))
                    if s is None:
                        continue
                    if self.holds(i, b):
                        self.add(a, s)
                    if self.holds(a, s):
                        self.add(i, b)
            if isinstance(phi, Forall):
                # subst[h](b) |- a  iff  b |- forall[h](a)
                a = idx[phi.body]
                for b in idx_fiber(self, phi.h.source):
                    s = idx.get(Subst(phi.h, forms[b]))
                    if s is None:
                        continue
                    if self.holds(s, a):
                        self.add(b, i)
                    if self.holds(b, i):
                        self.add(s, a)


def idx_fiber(cl: _Closure, L: TypeList):
    return [cl.index[phi] for phi in cl.U.by_fiber.get(L, ())]


def consequence(
    T: Specification,
    U: FormulaUniverse,
    rules: ClosureRules | None = None,
    extra: Iterable[Formula] = (),
) -> Consequence:
    """Least set of sequents over ``U`` containing ``T`` and closed under the rules."""
    if T.schema != U.schema:
        raise TypeMismatch("specification and universe use different schemas")
    rules = rules or ClosureRules()
    U = U.extended([*T.formulas(), *extra])
    cl = _Closure(U, rules)
    seeds = [(cl.index[c.sequent.lhs], cl.index[c.sequent.rhs]) for c in T.constraints]
    sequents, rows, forms = cl.run(seeds)
    return Consequence(sequents, U, rows, forms)


def semantic_entails(M: Structure, c: Constraint) -> bool:
    return M.satisfies_constraint(c)


def spec_morphism_validate(
    m: SchemaMorphism,
    T2: Specification,
    T1: Specification,
    U1: FormulaUniverse,
    rules: ClosureRules | None = None,
) -> list[Finding]:
    """Each translated constraint of ``T2`` must be derivable from ``T1``."""
    out = [Finding("schema/" + f.code, f.message, f.where) for f in m.validate()]
    if out:
        return out
    translated = sorted((translate_constraint(m, c) for c in T2.constraints), key=str)
    extra = [f for c in translated for f in (c.sequent.lhs, c.sequent.rhs)]
    closure = consequence(T1, U1, rules, extra)
    for c in translated:
        if c not in closure:
            out.append(Finding("not-derivable", f"{c} is not derivable in the target", (str(c),)))
    return out


@dataclass(frozen=True, eq=False)
class Logic:
    structure: Structure
    spec: Specification

    def __post_init__(self):
        if self.structure.schema != self.spec.schema:
            raise TypeMismatch("a logic's structure and specification must share one schema")

    @property
    def schema(self) -> Schema:
        return self.spec.schema


def soundness_check(L: Logic) -> list[Finding]:
    out = []
    for c in L.spec:
        if not L.structure.satisfies_constraint(c):
            out.append(Finding("unsatisfied", f"{c} fails in the structure", (str(c),)))
    return out


@dataclass(frozen=True, eq=False)
class LogicMorphism:
    """A structure morphism whose schema part is also a specification morphism."""

    source: Logic
    target: Logic
    structure_morphism: StructureMorphism

    @property
    def schema_morphism(self) -> SchemaMorphism:
        return self.structure_morphism.schema_morphism

    def validate(self, U1: FormulaUniverse | None = None) -> list[Finding]:
        out = [Finding("structure/" + f.code, f.message, f.where) for f in self.structure_morphism.validate()]
        if U1 is not None and not out:
            out += spec_morphism_validate(self.schema_morphism, self.source.spec, self.target.spec, U1)
        return out


def universe_intent_violations(M2: Structure, M1: Structure, schema, depth, pool, connectives=CONNECTIVES):
    """Joint-extent witnesses of sequents in the universe that hold in ``M2``
    but fail in ``M1``; empty iff the intent order holds on the whole universe."""
    sigs = universe_signatures(schema, depth, pool, connectives, [M2, M1])
    bad = []
    for L, pairs in sigs.items():
        pairs = list(pairs)
        for a in pairs:
            for b in pairs:
                if a[0] <= b[0] and not a[1] <= b[1]:
                    bad.append((L, a, b))
    return bad
