"""Finite-model engine for the first-order logical environment (FOLE).

Classifications, type lists, schemas, formulas, structures, algebras,
specifications and logics, with satisfaction, translation along morphisms,
information-system fusion and export of sound logics as relational tables.
"""

from fole.errors import FoleError
from fole.kernel import (
    Classification,
    Infomorphism,
    Tuple,
    TupleRelation,
    TypeList,
    TypeListMorphism,
    flow,
    list_holds,
    tup,
    tup_map,
)
from fole.schema import Schema, SchemaMorphism
from fole.formula import (
    Atom,
    Bottom,
    Constraint,
    Diff,
    Exists,
    Forall,
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
from fole.structure import Structure, StructureMorphism, eval_formula, reduct

__version__ = "0.1.0"

__all__ = [
    "FoleError",
    "Classification",
    "Infomorphism",
    "Tuple",
    "TupleRelation",
    "TypeList",
    "TypeListMorphism",
    "flow",
    "list_holds",
    "tup",
    "tup_map",
    "Schema",
    "SchemaMorphism",
    "Atom",
    "Bottom",
    "Constraint",
    "Diff",
    "Exists",
    "Forall",
    "Impl",
    "Join",
    "Meet",
    "Neg",
    "Sequent",
    "Subst",
    "Top",
    "infer_typelist",
    "translate",
    "translate_constraint",
    "Structure",
    "StructureMorphism",
    "eval_formula",
    "reduct",
]
