"""Command-line front end: ``fole <command> [options]``.

Exit status is 0 on success or truth, 1 on a false result or violation, and
2 on usage, parse or load errors.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

from fole.database import db_of_logic, export as export_db
from fole.errors import FoleError, FoleSyntaxError, UnsoundLogic
from fole.fileformat import Loader, Workspace, dump_structure
from fole.formula import Constraint, infer_typelist, translate
from fole.kernel import TypeListMorphism
from fole.speclogic import FormulaUniverse, Logic, Specification, consequence, soundness_check
from fole.structure import invariance_report, reduct
from fole.syntax import Parser, parse_formula, print_formula, tokenize
from fole.system import channel_covers, fusion_consequence, sum_system, system_consequence, underlying

_SELECTOR = re.compile(r"^(?P<path>.*):(?P<name>[A-Za-z_][A-Za-z0-9_]*)$")


class UsageError(Exception):
    pass


class Session:
    def __init__(self):
        self.loader = Loader()

    @property
    def ws(self) -> Workspace:
        return self.loader.ws

    def load(self, spec: str):
        """Load ``path`` or ``path:name``; returns the name or ``None``."""
        m = _SELECTOR.match(spec)
        path, name = (m["path"], m["name"]) if m and not Path(spec).exists() else (spec, None)
        if not Path(path).exists():
            raise UsageError(f"no such file: {path}")
        before = {k: set(v) for k, v in vars(self.ws).items()}
        self.loader.load(path)
        added = {k: set(v) - before[k] for k, v in vars(self.ws).items()}
        return name, added

    def get(self, spec: str, kind: str):
        table = getattr(self.ws, kind)
        if spec in table and not Path(spec).exists():
            return spec, table[spec]
        name, added = self.load(spec)
        table = getattr(self.ws, kind)
        if name is None:
            fresh = added.get(kind) or set()
            candidates = fresh if fresh else set(table)
            if len(candidates) != 1:
                raise UsageError(f"{spec} declares {len(candidates)} {kind}; select one with {spec}:NAME")
            name = next(iter(candidates))
        if name not in table:
            raise UsageError(f"{spec}: no {kind} named {name}")
        return name, table[name]

    def schema_name(self, schema) -> str:
        for n, s in self.ws.schemas.items():
            if s == schema:
                return n
        return "S"


def _pool(session: Session, text: str):
    names = [n for n in re.split(r"[,\s]+", text.strip()) if n and n != "none"]
    out = []
    for n in names:
        if n not in session.ws.typelist_morphisms:
            raise UsageError(f"unknown morphism in --pool: {n}")
        out.append(session.ws.typelist_morphisms[n])
    return out


def _universe(session, schema, args) -> FormulaUniverse:
    if args.depth < 0:
        raise UsageError("--depth must be non-negative")
    return FormulaUniverse(schema, args.depth, _pool(session, args.pool))


def _formula(session, schema, text):
    return parse_formula(text, session.ws.env(schema), source="<formula>")


def _print_table(M, phi, out):
    keys, tau = M.table_interp(phi)
    L = M.type_of(phi)
    indices = sorted(L, key=str)
    out.write(",".join(["_key", *indices]) + "\n")
    for k in sorted(keys, key=str):
        out.write(",".join([str(k), *(str(tau[k][i]) for i in indices)]) + "\n")


def cmd_validate(session, args, out) -> int:
    for path in args.files:
        session.load(path)
    ws = session.ws
    bad = 0
    for n in sorted(ws.schemas):
        f = ws.schemas[n].validate()
        bad += len(f)
        out.write(f"schema {n}: {'valid' if not f else '; '.join(map(str, f))}\n")
    for n in sorted(ws.structures):
        f = ws.structures[n].validate()
        if n in ws.algebras:
            f += ws.algebras[n].validate()
        bad += len(f)
        out.write(f"structure {n}: {'valid' if not f else '; '.join(map(str, f))}\n")
    for n in sorted(ws.schema_morphisms):
        f = ws.schema_morphisms[n].validate()
        bad += len(f)
        out.write(f"morphism {n}: {'valid' if not f else '; '.join(map(str, f))}\n")
    for n in sorted(ws.structure_morphisms):
        f = ws.structure_morphisms[n].validate()
        bad += len(f)
        out.write(f"morphism {n}: {'valid' if not f else '; '.join(map(str, f))}\n")
    for n in sorted(ws.specs):
        out.write(f"spec {n}: valid ({len(ws.specs[n])} constraints)\n")
    return 1 if bad else 0


def cmd_eval(session, args, out) -> int:
    _, M = session.get(args.structure, "structures")
    phi = _formula(session, M.schema, args.formula)
    _print_table(M, phi, out)
    return 0


def cmd_check(session, args, out) -> int:
    _, M = session.get(args.structure, "structures")
    if args.spec:
        _, T = session.get(args.spec, "specs")
        findings = soundness_check(Logic(M, T))
        if findings:
            for f in findings:
                out.write(f"{f}\n")
            return 1
        out.write("sound\n")
        return 0
    if args.sequent:
        p = Parser(tokenize(args.sequent, "<sequent>"), session.ws.env(M.schema), "<sequent>")
        lhs, rhs = p.sequent()
        p.expect_end()
        L = infer_typelist(M.schema, lhs)
        ok = M.satisfies_constraint(Constraint(TypeListMorphism.identity(L), lhs, rhs))
        out.write("true\n" if ok else "false\n")
        return 0 if ok else 1
    raise UsageError("check needs --spec or --sequent")


def cmd_sound(session, args, out) -> int:
    _, M = session.get(args.structure, "structures")
    _, T = session.get(args.spec, "specs")
    bad = 0
    for c in T:
        ok = M.satisfies_constraint(c)
        bad += not ok
        out.write(f"{'ok  ' if ok else 'FAIL'} {c}\n")
    out.write("sound\n" if not bad else f"unsound: {bad} of {len(T)} constraints fail\n")
    return 1 if bad else 0


def cmd_translate(session, args, out) -> int:
    _, m = session.get(args.morphism, "schema_morphisms")
    phi = _formula(session, m.source, args.formula)
    out.write(print_formula(translate(m, phi)) + "\n")
    return 0


def cmd_reduct(session, args, out) -> int:
    _, m = session.get(args.morphism, "schema_morphisms")
    _, M1 = session.get(args.structure, "structures")
    M2, bridge = reduct(m, M1)
    findings = bridge.validate()
    out.write(dump_structure(args.name, M2, session.schema_name(m.source)))
    out.write(f"# bridge: {'valid' if not findings else '; '.join(map(str, findings))}\n")
    return 1 if findings else 0


def cmd_consequence(session, args, out) -> int:
    _, T = session.get(args.spec, "specs")
    U = _universe(session, T.schema, args)
    closure = consequence(T, U)
    for q in closure:
        out.write(f"{q}\n")
    out.write(f"# {len(closure)} sequents over {len(closure.universe)} formulas\n")
    return 0


def cmd_fuse(session, args, out) -> int:
    name, S = session.get(args.system, "systems")
    ch = session.ws.channels.get(name) or sum_system(underlying(S))
    if not channel_covers(ch, underlying(S)):
        out.write("channel does not cover the system\n")
        return 1
    U = _universe(session, ch.core.schema, args)
    fused = fusion_consequence(S, ch, U)
    out.write(f"core sorts: {' '.join(sorted(map(str, ch.core.schema.entity_types)))}\n")
    out.write(f"core relations: {' '.join(sorted(map(str, ch.core.schema.relation_types)))}\n")
    for q in fused:
        out.write(f"{q}\n")
    if args.per_node:
        node_U = {
            n: FormulaUniverse(S.logics[n].schema, args.depth, []) for n in S.shape.nodes
        }
        per = system_consequence(S, ch, U, node_U)
        for n in S.shape.nodes:
            own = consequence(S.logics[n].spec, node_U[n])
            gained = sorted(set(per[n].sequents) - set(own.sequents))
            out.write(f"# node {n}: {len(per[n])} sequents, {len(gained)} from the system\n")
            for q in gained:
                out.write(f"{n}: {q}\n")
    return 0


def cmd_export(session, args, out) -> int:
    _, M = session.get(args.structure, "structures")
    T = session.get(args.spec, "specs")[1] if args.spec else Specification(M.schema)
    U = _universe(session, M.schema, args)
    try:
        db = db_of_logic(Logic(M, T), U)
    except UnsoundLogic as exc:
        out.write(f"not exported: {exc}\n")
        return 1
    written = export_db(db, args.out)
    out.write(f"wrote {len(written)} files to {args.out}\n")
    return 0


def cmd_prove_invariance(session, args, out) -> int:
    _, m = session.get(args.morphism, "schema_morphisms")
    _, M1 = session.get(args.structure, "structures")
    _, T = session.get(args.spec, "specs")
    bad = 0
    for c, lhs, rhs in invariance_report(m, M1, sorted(T.constraints, key=str)):
        ok = lhs == rhs
        bad += not ok
        out.write(f"{'ok  ' if ok else 'FAIL'} {c}: reduct={lhs} translated={rhs}\n")
    out.write("invariant\n" if not bad else f"{bad} mismatches\n")
    return 1 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fole", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load files and validate every object")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eval", help="print the table of a formula")
    p.add_argument("--structure", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--load", action="append", default=[], help="extra files (named morphisms)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", help="check a specification or one sequent")
    p.add_argument("--structure", required=True)
    p.add_argument("--spec")
    p.add_argument("--sequent")
    p.add_argument("--load", action="append", default=[])
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sound", help="per-constraint soundness report")
    p.add_argument("--structure", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--load", action="append", default=[])
    p.set_defaults(func=cmd_sound)

    p = sub.add_parser("translate", help="translate a formula along a schema morphism")
    p.add_argument("--morphism", required=True)
    p.add_argument("--formula", required=True)
    p.add_argument("--load", action="append", default=[])
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("reduct", help="inverse image of a structure along a schema morphism")
    p.add_argument("--morphism", required=True)
    p.add_argument("--structure", required=True)
    p.add_argument("--name", default="reduct")
    p.add_argument("--load", action="append", default=[])
    p.set_defaults(func=cmd_reduct)

    for name, func, helptext in (
        ("consequence", cmd_consequence, "bounded consequence of a specification"),
        ("fuse", cmd_fuse, "fuse an information system"),
        ("export", cmd_export, "export a sound logic as CSV tables"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--depth", type=int, required=True)
        p.add_argument("--pool", required=True, help="comma separated morphism names, or 'none'")
        p.add_argument("--load", action="append", default=[])
        if name == "consequence":
            p.add_argument("--spec", required=True)
        if name == "fuse":
            p.add_argument("--system", required=True)
            p.add_argument("--per-node", action="store_true")
        if name == "export":
            p.add_argument("--structure", required=True)
            p.add_argument("--spec")
            p.add_argument("--out", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("prove-invariance", help="compare satisfaction before and after translation")
    p.add_argument("--morphism", required=True)
    p.add_argument("--structure", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--load", action="append", default=[])
    p.set_defaults(func=cmd_prove_invariance)
    return ap


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    session = Session()
    try:
        for extra in getattr(args, "load", []):
            session.load(extra)
        return args.func(session, args, out)
    except FoleSyntaxError as exc:
        err.write(f"error: {exc}\n")
        return 2
    except (FoleError, UsageError) as exc:
        err.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
