"""Relational databases of sound logics: per-formula tables, morphisms,
joins through pushouts of type lists, and CSV export."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from fole.errors import ConditionViolated, SortClash, UnsoundLogic
from fole.formula import Atom, Constraint, Formula, Meet, Subst, translate
from fole.kernel import (
    Infomorphism,
    TupleRelation,
    flow,
    tuple_bridge,
    typelist_pushout,
)
from fole.schema import Schema
from fole.speclogic import FormulaUniverse, Logic, LogicMorphism, consequence, soundness_check
from fole.structure import Structure, constraint_key_function
from fole.syntax import print_formula


@dataclass(frozen=True)
class Table:
    type_list: object
    keys: frozenset
    tau: dict = field(hash=False)

    def image(self) -> TupleRelation:
        return TupleRelation(self.type_list, self.tau.values())


class Database:
    """Tables of every formula in a finite index set, over one structure."""

    def __init__(self, logic: Logic, formulas, key_maps=None):
        self.logic = logic
        self.structure: Structure = logic.structure
        self.formulas = tuple(formulas)
        self.tables: dict = {}
        for phi in self.formulas:
            self.tables[phi] = self._table(phi)
        self.key_maps = dict(key_maps or {})

    @property
    def schema(self) -> Schema:
        return self.structure.schema

    @property
    def entities(self):
        return self.structure.entities

    def _table(self, phi) -> Table:
        keys, tau = self.structure.table_interp(phi)
        return Table(self.structure.type_of(phi), keys, tau)

    def table(self, phi: Formula) -> Table:
        """Table of ``phi``; formulas outside the index set are computed on demand."""
        got = self.tables.get(phi)
        return got if got is not None else self._table(phi)

    def key_map(self, c: Constraint) -> dict | None:
        return constraint_key_function(self.structure, c)

    def equivalence_classes(self) -> list[list[Formula]]:
        """Formulas grouped by equal relation image."""
        groups: dict = {}
        for phi in self.formulas:
            groups.setdefault(self.tables[phi].image(), []).append(phi)
        return [sorted(g) for g in groups.values() if len(g) > 1]


def db_of_logic(L: Logic, U: FormulaUniverse) -> Database:
    findings = soundness_check(L)
    if findings:
        raise UnsoundLogic("; ".join(map(str, findings)))
    closure = consequence(L.spec, U)
    key_maps = {}
    for c in sorted(L.spec.constraints, key=str):
        km = constraint_key_function(L.structure, c)
        if km is not None:
            key_maps[c] = km
    for q in closure:
        km = {k: k for k in L.structure.eval(q.lhs)}
        if set(km) <= L.structure.eval(q.rhs):
            key_maps.setdefault(q, km)
    return Database(L, closure.universe.formulas, key_maps)


@dataclass(frozen=True, eq=False)
class DatabaseMorphism:
    source: Database
    target: Database
    formula_map: dict
    infomorphism: Infomorphism
    kappa: dict


def db_morphism_of(lm: LogicMorphism, db2: Database, db1: Database) -> DatabaseMorphism:
    """Key transformation from the structure morphism; the tuple condition is
    checked for every formula of ``db2`` and every key of its image table."""
    for side, L in (("source", lm.source), ("target", lm.target)):
        findings = soundness_check(L)
        if findings:
            raise UnsoundLogic(f"{side} logic is unsound: " + "; ".join(map(str, findings)))
    h = lm.structure_morphism
    m = h.schema_morphism
    info = h.entity_infomorphism
    F, kappa = {}, {}
    for phi2 in db2.formulas:
        phi1 = translate(m, phi2)
        F[phi2] = phi1
        t2 = db2.table(phi2)
        t1 = db1.table(phi1)
        k_phi = {}
        for k1 in sorted(t1.keys, key=str):
            if k1 not in h.key_map:
                raise ConditionViolated(f"key {k1} has no image", formula=phi2, key=k1)
            k2 = h.key_map[k1]
            if k2 not in t2.keys:
                raise ConditionViolated(
                    f"key {k1} of {phi1} maps to {k2}, which is not in the table of {phi2}",
                    formula=phi2,
                    key=k1,
                )
            try:
                want = tuple_bridge(info, t1.tau[k1])
            except KeyError as exc:
                raise ConditionViolated(f"token {exc.args[0]} has no image", formula=phi2, key=k1) from None
            if t2.tau[k2] != want:
                raise ConditionViolated(
                    f"tuple of {k2} is {t2.tau[k2]!r} but the bridge gives {want!r}",
                    formula=phi2,
                    key=k1,
                )
            k_phi[k1] = k2
        kappa[phi2] = k_phi
    return DatabaseMorphism(db2, db1, F, info, kappa)


def join_via_formula(M: Structure, span: tuple[Constraint, Constraint]):
    """Join of ``phi1`` and ``phi2`` along a shared source type list.

    Returns the formula ``subst[iota1](phi1) /\\ subst[iota2](phi2)`` over the
    pushout and the join relation ``iota1^-1 R(phi1) & iota2^-1 R(phi2)``.
    """
    c1, c2 = span
    if c1.h.source != c2.h.source:
        raise SortClash("span legs must share their source type list")
    c1.check(M.schema)
    c2.check(M.schema)
    _, iota1, iota2 = typelist_pushout(c1.h, c2.h)
    phi = Meet(Subst(iota1, c1.phi), Subst(iota2, c2.phi))
    E = M.entities
    r1 = flow(E, iota1, "inverse", M.relation_interp(c1.phi))
    r2 = flow(E, iota2, "inverse", M.relation_interp(c2.phi))
    return phi, TupleRelation(iota1.target, r1.tuples & r2.tuples)


def formula_filename(phi: Formula) -> str:
    if isinstance(phi, Atom):
        return f"{phi.relation}.csv"
    digest = hashlib.sha256(print_formula(phi, use_names=False).encode("utf-8")).hexdigest()
    return f"f_{digest[:12]}.csv"


def table_csv(table: Table) -> str:
    indices = sorted(table.type_list, key=str)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["_key", *indices])
    rows = sorted([str(k), *(str(table.tau[k][i]) for i in indices)] for k in table.keys)
    w.writerows(rows)
    return buf.getvalue()


def export(db: Database, directory) -> list[Path]:
    """Write one CSV per formula plus ``manifest.json``; output is deterministic."""
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {}
    written = []
    for phi in sorted(db.formulas, key=lambda p: print_formula(p, use_names=False)):
        table = db.tables[phi]
        name = formula_filename(phi)
        path = out_dir / name
        path.write_text(table_csv(table), encoding="utf-8")
        written.append(path)
        manifest[print_formula(phi, use_names=False)] = {
            "file": name,
            "type_list": dict(table.type_list.items()),
            "rows": len(table.keys),
        }
    mpath = out_dir / "manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written.append(mpath)
    return written


def read_table_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


__all__ = [
    "Database",
    "DatabaseMorphism",
    "Table",
    "db_morphism_of",
    "db_of_logic",
    "export",
    "formula_filename",
    "join_via_formula",
    "read_table_csv",
    "table_csv",
]
