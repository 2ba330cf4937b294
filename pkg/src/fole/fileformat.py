"""Loader and writer for the line-oriented workspace format (see docs/grammar.md)."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from fole.algebra import Algebra, FOLStructure, OperatorDomain, Symbol
from fole.errors import FoleError, FoleSyntaxError
from fole.formula import Constraint, infer_typelist
from fole.kernel import Classification, Tuple, TypeList, TypeListMorphism
from fole.schema import Schema, SchemaMorphism
from fole.speclogic import CONNECTIVES, FormulaUniverse, Logic, LogicMorphism, Specification
from fole.structure import Structure, StructureMorphism
from fole.syntax import Env, Parser, print_formula, print_morphism, print_type_list, tokenize
from fole.system import Channel, InformationSystem, ShapeGraph

BLOCKS = ("schema", "classification", "structure", "spec", "morphism", "system", "universe")


@dataclass
class Workspace:
    schemas: dict = field(default_factory=dict)
    classifications: dict = field(default_factory=dict)
    structures: dict = field(default_factory=dict)
    specs: dict = field(default_factory=dict)
    type_lists: dict = field(default_factory=dict)
    typelist_morphisms: dict = field(default_factory=dict)
    schema_morphisms: dict = field(default_factory=dict)
    structure_morphisms: dict = field(default_factory=dict)
    systems: dict = field(default_factory=dict)
    universes: dict = field(default_factory=dict)
    domains: dict = field(default_factory=dict)
    algebras: dict = field(default_factory=dict)
    channels: dict = field(default_factory=dict)

    def env(self, schema: Schema | None = None) -> Env:
        return Env(dict(self.type_lists), dict(self.typelist_morphisms), schema)

    def pick(self, kind: str, name: str | None = None):
        table = getattr(self, kind)
        if name is None:
            if len(table) == 1:
                return next(iter(table.values()))
            raise FoleError(f"{len(table)} {kind} declared; name one with path:name")
        if name not in table:
            raise FoleError(f"no {kind[:-1] if kind.endswith('s') else kind} named {name!r}")
        return table[name]

    def fol_structure(self, name: str) -> FOLStructure:
        return FOLStructure(self.structures[name], self.algebras[name])


class _Line:
    def __init__(self, tokens, source):
        self.p = Parser(tokens, None, source)
        self.first = tokens[0]


def _split_lines(text: str, source: str | None):
    for n, raw in enumerate(text.splitlines(), start=1):
        toks = tokenize(raw, source, line_offset=n - 1)
        if toks[0].kind == "eof":
            continue
        yield toks


class Loader:
    def __init__(self, ws: Workspace | None = None):
        self.ws = ws or Workspace()
        self._seen_files: set = set()

    def load(self, path) -> Workspace:
        path = Path(path).resolve()
        if path in self._seen_files:
            return self.ws
        self._seen_files.add(path)
        text = path.read_text(encoding="utf-8")
        return self.loads(text, str(path), base=path.parent)

    def loads(self, text: str, source: str | None = None, base: Path | None = None) -> Workspace:
        lines = list(_split_lines(text, source))
        i = 0
        while i < len(lines):
            toks = lines[i]
            p = Parser(toks, self.ws.env(), source)
            head = toks[0]
            word = head.text
            if word == "include":
                if p.peek().kind != "string":
                    raise p.error("include expects a quoted path", p.peek())
                rel = p.peek().text[1:-1]
                target = (base or Path.cwd()) / rel
                try:
                    self.load(target)
                except OSError as exc:
                    raise FoleSyntaxError(f"cannot include {rel!r}: {exc.strerror}", head.line, head.column, source) from None
                i += 1
                continue
            if word == "typelist":
                p.i += 1
                name = p.ident()
                self.ws.type_lists[name] = p.type_list()
                p.expect_end()
                i += 1
                continue
            if word == "morphism" and len(toks) > 2 and toks[2].text == "typelist":
                p.i += 3
                name = toks[1].text
                h = p.morphism()
                p.expect_end()
                self.ws.typelist_morphisms[name] = TypeListMorphism(h.source, h.target, h.mapping, name=name)
                i += 1
                continue
            if word not in BLOCKS:
                raise p.error(f"expected a section keyword, found {word!r}")
            j = i + 1
            while j < len(lines) and lines[j][0].text != "end":
                j += 1
            if j == len(lines):
                raise p.error(f"section {word!r} is missing 'end'")
            end_tok = lines[j][0]
            if len(lines[j]) > 2:
                raise FoleSyntaxError("unexpected text after 'end'", end_tok.line, end_tok.column, source)
            try:
                getattr(self, f"_{word}")(p, lines[i + 1 : j], source)
            except FoleSyntaxError:
                raise
            except FoleError as exc:
                raise FoleSyntaxError(str(exc), head.line, head.column, source) from None
            i = j + 1
        return self.ws

    # helpers
    def _body(self, body, source, schema=None):
        for toks in body:
            yield Parser(toks, self.ws.env(schema), source)

    @staticmethod
    def _names(p) -> list[str]:
        out = []
        while not p.done():
            out.append(p.ident())
            p.accept(",")
        return out

    def _ref(self, p, kind):
        tok = p.tok
        name = p.ident()
        table = getattr(self.ws, kind)
        if name not in table:
            raise p.error(f"unknown {kind.rstrip('s')} {name!r}", tok)
        return table[name]

    # sections
    def _schema(self, p, body, source):
        p.i += 1
        name = p.ident()
        p.expect_end()
        sorts, sig, symbols = [], {}, []
        for q in self._body(body, source):
            kw = q.ident()
            if kw in ("sort", "sorts"):
                sorts.extend(self._names(q))
            elif kw == "relation":
                tok = q.tok
                r = q.ident()
                if r in sig:
                    raise q.error(f"duplicate relation {r!r}", tok)
                sig[r] = q.type_list()
                q.expect_end()
            elif kw == "constant":
                e = q.ident()
                q.expect(":")
                symbols.append(Symbol(e, q.ident()))
                q.expect_end()
            elif kw == "operator":
                e = q.ident()
                L = q.type_list()
                q.expect(":")
                symbols.append(Symbol(e, q.ident(), L))
                q.expect_end()
            else:
                raise q.error(f"unknown schema statement {kw!r}", q.tokens[0])
        S = Schema(sorts, sig)
        findings = S.validate()
        if findings:
            raise p.error("; ".join(map(str, findings)), p.tokens[0])
        self.ws.schemas[name] = S
        if symbols:
            self.ws.domains[name] = OperatorDomain(sorts, symbols)

    def _classification(self, p, body, source):
        p.i += 1
        name = p.ident()
        p.expect_end()
        types, tokens, inc = [], [], []
        for q in self._body(body, source):
            kw = q.ident()
            if kw in ("type", "types"):
                types.extend(self._names(q))
            elif kw == "token":
                y = q.ident()
                tokens.append(y)
                if q.accept(":"):
                    for x in self._names(q):
                        inc.append((y, x))
            else:
                raise q.error(f"unknown classification statement {kw!r}", q.tokens[0])
        self.ws.classifications[name] = Classification(types, tokens, inc)

    def _structure(self, p, body, source):
        p.i += 1
        name = p.ident()
        p.expect_end()
        schema = None
        base = None
        tokens, inc_tok = [], []
        keys, inc, tau = [], [], {}
        interp: dict = {}
        for q in self._body(body, source, schema):
            kw = q.ident()
            if kw == "schema":
                schema = self._ref(q, "schemas")
            elif kw == "entities":
                base = self._ref(q, "classifications")
            elif kw == "token":
                y = q.ident()
                tokens.append(y)
                if q.accept(":"):
                    inc_tok.extend((y, x) for x in self._names(q))
            elif kw == "key":
                tok = q.tok
                k = q.ident()
                if k in tau:
                    raise q.error(f"duplicate key {k!r}", tok)
                rels = []
                if q.accept(":"):
                    while q.tok.kind == "ident":
                        rels.append(q.ident())
                        if not q.accept(","):
                            break
                tau[k] = self._assignment(q)
                keys.append(k)
                inc.extend((k, r) for r in rels)
            elif kw == "interpret":
                e = q.ident()
                args = self._assignment(q)
                q.expect("=")
                interp.setdefault(e, {})[args] = q.ident()
            else:
                raise q.error(f"unknown structure statement {kw!r}", q.tokens[0])
            q.expect_end()
        if schema is None:
            raise p.error("structure needs a 'schema' line", p.tokens[0])
        if base is None:
            E = Classification(schema.entity_types, tokens, inc_tok)
        else:
            E = Classification(base.types, base.tokens | set(tokens), base.incidence | set(inc_tok))
        M = Structure(schema, E, keys, inc, tau)
        self.ws.structures[name] = M
        schema_name = next((n for n, s in self.ws.schemas.items() if s is schema), None)
        dom = self.ws.domains.get(schema_name)
        if dom is not None:
            self.ws.algebras[name] = Algebra(E, dom, interp)

    @staticmethod
    def _assignment(q) -> Tuple:
        q.expect("(")
        vals = {}
        if not q.at(")"):
            while True:
                i = q.ident()
                q.expect("=")
                vals[i] = q.ident()
                if not q.accept(","):
                    break
        q.expect(")")
        return Tuple(vals)

    def _spec(self, p, body, source):
        p.i += 1
        name = p.ident()
        p.expect_end()
        schema = None
        constraints = set()
        for q in self._body(body, source):
            q.env = self.ws.env(schema)
            kw = q.ident()
            if kw == "schema":
                schema = self._ref(q, "schemas")
            elif kw in ("sequent", "constraint"):
                if schema is None:
                    raise q.error("declare 'schema' before constraints", q.tokens[0])
                start = q.tok
                try:
                    if kw == "sequent":
                        lhs, rhs = q.sequent()
                        L = infer_typelist(schema, lhs)
                        c = Constraint(TypeListMorphism.identity(L), lhs, rhs)
                    else:
                        h = q.morphism()
                        q.expect(":")
                        lhs, rhs = q.sequent()
                        c = Constraint(h, lhs, rhs)
                    c.check(schema)
                except FoleSyntaxError:
                    raise
                except FoleError as exc:
                    raise q.error(str(exc), start) from None
                constraints.add(c)
            else:
                raise q.error(f"unknown spec statement {kw!r}", q.tokens[0])
            q.expect_end()
        if schema is None:
            raise p.error("spec needs a 'schema' line", p.tokens[0])
        self.ws.specs[name] = Specification(schema, constraints)

    def _morphism(self, p, body, source):
        p.i += 1
        name = p.ident()
        kind = p.ident()
        if kind == "schema":
            s2 = self._ref(p, "schemas")
            p.expect("->")
            s1 = self._ref(p, "schemas")
            p.expect_end()
            rel, typ = self._pairs(body, source, ("relation", "sort"))
            rel = {**{r: r for r in s2.relation_types if r in s1.relation_types}, **rel}
            typ = {**{x: x for x in s2.entity_types if x in s1.entity_types}, **typ}
            m = SchemaMorphism(s2, s1, rel, typ)
            findings = m.validate()
            if findings:
                raise p.error("; ".join(map(str, findings)), p.tokens[0])
            self.ws.schema_morphisms[name] = m
        elif kind == "structure":
            m2 = self._ref(p, "structures")
            p.expect("->")
            m1 = self._ref(p, "structures")
            p.expect_end()
            rel, typ, key, tok = self._pairs(body, source, ("relation", "sort", "key", "token"))
            rel = {**{r: r for r in m2.schema.relation_types if r in m1.schema.relation_types}, **rel}
            typ = {**{x: x for x in m2.schema.entity_types if x in m1.schema.entity_types}, **typ}
            key = {**{k: k for k in m1.keys if k in m2.keys}, **key}
            tok = {**{y: y for y in m1.entities.tokens if y in m2.entities.tokens}, **tok}
            self.ws.structure_morphisms[name] = StructureMorphism(m2, m1, rel, key, typ, tok)
        else:
            raise p.error(f"unknown morphism kind {kind!r}", p.tokens[2])

    def _pairs(self, body, source, kinds):
        out = {k: {} for k in kinds}
        for q in self._body(body, source):
            kw = q.ident()
            if kw not in out:
                raise q.error(f"expected one of {', '.join(kinds)}", q.tokens[0])
            a = q.ident()
            q.expect("->")
            out[kw][a] = q.ident()
            q.expect_end()
        return [out[k] for k in kinds]

    def _system(self, p, body, source):
        p.i += 1
        name = p.ident()
        p.expect_end()
        nodes, logics, edges, links = [], {}, {}, {}
        core, comps = None, {}
        for q in self._body(body, source):
            kw = q.ident()
            if kw == "node":
                n = q.ident()
                q.expect("structure")
                M = self._ref(q, "structures")
                if q.accept("spec"):
                    T = self._ref(q, "specs")
                else:
                    T = Specification(M.schema)
                nodes.append(n)
                logics[n] = Logic(M, T)
            elif kw == "edge":
                e = q.ident()
                q.expect(":")
                i = q.ident()
                q.expect("->")
                j = q.ident()
                q.expect("morphism")
                h = self._ref(q, "structure_morphisms")
                edges[e] = (i, j)
                links[e] = h
            elif kw == "core":
                core = self._ref(q, "structures")
            elif kw == "component":
                n = q.ident()
                comps[n] = self._ref(q, "structure_morphisms")
            else:
                raise q.error(f"unknown system statement {kw!r}", q.tokens[0])
            q.expect_end()
        shape = ShapeGraph(nodes, edges)
        lms = {e: LogicMorphism(logics[i], logics[j], links[e]) for e, (i, j) in edges.items()}
        self.ws.systems[name] = InformationSystem(shape, logics, lms)
        if core is not None:
            self.ws.channels[name] = Channel(core, comps)

    def _universe(self, p, body, source):
        p.i += 1
        name = p.ident()
        p.expect_end()
        schema, depth, pool, conns, cap = None, None, [], CONNECTIVES, None
        for q in self._body(body, source):
            kw = q.ident()
            if kw == "schema":
                schema = self._ref(q, "schemas")
            elif kw == "depth":
                depth = self._int(q)
            elif kw == "pool":
                while not q.done():
                    pool.append(self._ref(q, "typelist_morphisms"))
                    q.accept(",")
            elif kw == "connectives":
                conns = tuple(self._names(q))
            elif kw == "cap":
                cap = self._int(q)
            else:
                raise q.error(f"unknown universe statement {kw!r}", q.tokens[0])
            q.expect_end()
        if schema is None or depth is None:
            raise p.error("universe needs 'schema' and 'depth'", p.tokens[0])
        self.ws.universes[name] = FormulaUniverse(schema, depth, pool, conns, cap=cap)

    @staticmethod
    def _int(q) -> int:
        if q.tok.kind != "number":
            raise q.error("expected a number")
        v = int(q.tok.text)
        q.i += 1
        return v


def load(path) -> Workspace:
    return Loader().load(path)


def loads(text: str, source: str | None = None) -> Workspace:
    return Loader().loads(text, source)


# writers


def _names_of(items) -> str:
    return " ".join(sorted(map(str, items)))


def dump_schema(name: str, S: Schema, domain: OperatorDomain | None = None) -> str:
    lines = [f"schema {name}", f"  sorts {_names_of(S.entity_types)}"]
    for r in sorted(S.signature, key=str):
        lines.append(f"  relation {r} {print_type_list(S.signature[r])}")
    if domain is not None:
        for e in sorted(domain.symbols):
            s = domain.symbols[e]
            if s.is_constant:
                lines.append(f"  constant {e} : {s.result}")
            else:
                lines.append(f"  operator {e} {print_type_list(s.signature)} : {s.result}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def dump_classification(name: str, C: Classification) -> str:
    lines = [f"classification {name}", f"  types {_names_of(C.types)}"]
    for y in sorted(C.tokens, key=str):
        xs = _names_of(C.intent(y))
        lines.append(f"  token {y}" + (f" : {xs}" if xs else ""))
    lines.append("end")
    return "\n".join(lines) + "\n"


def _assign(t: Tuple) -> str:
    return "(" + ", ".join(f"{i} = {y}" for i, y in t.items()) + ")"


def dump_structure(name: str, M: Structure, schema_name: str, algebra: Algebra | None = None) -> str:
    lines = [f"structure {name}", f"  schema {schema_name}"]
    E = M.entities
    if E.types == M.schema.entity_types:
        for y in sorted(E.tokens, key=str):
            xs = _names_of(E.intent(y))
            lines.append(f"  token {y}" + (f" : {xs}" if xs else ""))
    else:
        raise FoleError("entity types differ from the schema sorts; dump the classification separately")
    rels: dict = {}
    for k, r in M.incidence:
        rels.setdefault(k, []).append(r)
    for k in sorted(M.keys, key=str):
        rs = ", ".join(sorted(map(str, rels.get(k, []))))
        lines.append(f"  key {k}" + (f" : {rs} " if rs else " ") + _assign(M.tau[k]))
    if algebra is not None:
        for e in sorted(algebra.operations):
            for args, y in sorted(algebra.operations[e].items(), key=lambda p: repr(p[0])):
                lines.append(f"  interpret {e} {_assign(args)} = {y}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def dump_typelist_morphism(name: str, h: TypeListMorphism) -> str:
    return f"morphism {name} typelist {print_morphism(h, use_names=False)}\n"


def dump_spec(name: str, T: Specification, schema_name: str) -> str:
    lines = [f"spec {name}", f"  schema {schema_name}"]
    for c in sorted(T.constraints, key=lambda c: (str(c.phi), str(c.phi_prime), repr(c.h))):
        if c.h.is_identity:
            lines.append(f"  sequent {print_formula(c.phi)} |- {print_formula(c.phi_prime)}")
        else:
            lines.append(
                f"  constraint {print_morphism(c.h)} : {print_formula(c.phi)} |- {print_formula(c.phi_prime)}"
            )
    lines.append("end")
    return "\n".join(lines) + "\n"


def dump_schema_morphism(name: str, m: SchemaMorphism, s2: str, s1: str) -> str:
    lines = [f"morphism {name} schema {s2} -> {s1}"]
    lines += [f"  relation {a} -> {b}" for a, b in sorted(m.rel_map.items(), key=str)]
    lines += [f"  sort {a} -> {b}" for a, b in sorted(m.type_map.items(), key=str)]
    lines.append("end")
    return "\n".join(lines) + "\n"
