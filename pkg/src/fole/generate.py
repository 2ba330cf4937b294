"""Seeded random instances for property tests and experiment scripts."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

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
    Subst,
    Top,
)
from fole.kernel import Classification, Tuple, TypeList, TypeListMorphism, list_holds, sum_along, tup
from fole.schema import Schema, SchemaMorphism
from fole.structure import Structure, StructureMorphism


@dataclass(frozen=True)
class Bounds:
    max_types: int = 4
    max_tokens: int = 5
    max_relations: int = 3
    max_keys: int = 6
    max_arity: int = 3
    formula_depth: int = 3
    pool_size: int = 2


def classification(rng: random.Random, types, n_tokens: int, density: float = 0.5) -> Classification:
    types = sorted(types, key=str)
    tokens = [f"y{i}" for i in range(n_tokens)]
    inc = [(y, x) for y in tokens for x in types if rng.random() < density]
    return Classification(types, tokens, inc)


def type_list(rng: random.Random, sorts, max_arity: int, prefix: str = "i") -> TypeList:
    n = rng.randint(0, max_arity)
    sorts = sorted(sorts)
    return TypeList({f"{prefix}{j}": rng.choice(sorts) for j in range(n)})


def schema(rng: random.Random, b: Bounds = Bounds(), sorts=None) -> Schema:
    if sorts is None:
        sorts = [f"X{i}" for i in range(rng.randint(1, b.max_types))]
    rels = {f"R{i}": type_list(rng, sorts, b.max_arity) for i in range(rng.randint(1, b.max_relations))}
    return Schema(sorts, rels)


def morphism_into(rng: random.Random, target: TypeList, max_arity: int, prefix: str = "p") -> TypeListMorphism:
    """A random ``h: L' -> target`` (sorts of ``L'`` forced by ``h``)."""
    idx = list(target.indices)
    if not idx:
        return TypeListMorphism(TypeList(), target, {})
    n = rng.randint(0, max_arity)
    mapping = {f"{prefix}{j}": rng.choice(idx) for j in range(n)}
    source = TypeList({i: target.sort(t) for i, t in mapping.items()})
    return TypeListMorphism(source, target, mapping)


def pool(rng: random.Random, S: Schema, b: Bounds = Bounds()) -> list[TypeListMorphism]:
    targets = list(S.signature.values())
    out = []
    for _ in range(b.pool_size):
        if targets and rng.random() < 0.7:
            tgt = rng.choice(targets)
        else:
            tgt = type_list(rng, S.entity_types, b.max_arity, prefix="t")
        out.append(morphism_into(rng, tgt, b.max_arity))
    return out


def fibers_of(S: Schema, morphisms) -> list[TypeList]:
    out = set(S.signature.values())
    for h in morphisms:
        out.update((h.source, h.target))
    return sorted(out, key=repr)


def structure(
    rng: random.Random,
    S: Schema,
    E: Classification,
    n_keys: int,
    fibers=None,
    duplicate_rate: float = 0.2,
) -> Structure:
    fibers = list(fibers or S.signature.values()) or [TypeList()]
    keys, tau, inc = [], {}, []
    tokens = sorted(E.tokens)
    for n in range(n_keys):
        k = f"k{n}"
        if keys and rng.random() < duplicate_rate:
            t = tau[rng.choice(keys)]
        else:
            L = rng.choice(fibers)
            pool_ = tup(E, L).tuples
            if pool_ and rng.random() < 0.9:
                t = rng.choice(sorted(pool_))
            else:
                t = Tuple({i: rng.choice(tokens) for i in L}) if tokens else Tuple()
        keys.append(k)
        tau[k] = t
        for r in sorted(S.signature):
            if list_holds(E, t, S.signature[r]) and rng.random() < 0.6:
                inc.append((k, r))
    return Structure(S, E, keys, inc, tau)


def formula(rng: random.Random, S: Schema, L: TypeList, depth: int, morphisms=()) -> Formula:
    atoms = [Atom(r) for r, sig in S.signature.items() if sig == L]
    leaves = atoms + [Top(L), Bottom(L)]
    if depth <= 0 or rng.random() < 0.25:
        return rng.choice(atoms) if atoms and rng.random() < 0.7 else rng.choice(leaves)
    into = [h for h in morphisms if h.source == L]
    outof = [h for h in morphisms if h.target == L]
    kinds = ["neg", "meet", "join", "impl", "diff"]
    kinds += ["exists", "forall"] * bool(into) + ["subst"] * bool(outof)
    kind = rng.choice(kinds)
    d = depth - 1
    if kind == "neg":
        return Neg(formula(rng, S, L, d, morphisms))
    if kind in ("meet", "join", "impl", "diff"):
        cls = {"meet": Meet, "join": Join, "impl": Impl, "diff": Diff}[kind]
        return cls(formula(rng, S, L, d, morphisms), formula(rng, S, L, d, morphisms))
    if kind in ("exists", "forall"):
        h = rng.choice(into)
        cls = Exists if kind == "exists" else Forall
        return cls(h, formula(rng, S, h.target, d, morphisms))
    h = rng.choice(outof)
    return Subst(h, formula(rng, S, h.source, d, morphisms))


def constraint(rng: random.Random, S: Schema, morphisms, depth: int) -> Constraint:
    options = list(morphisms) + [TypeListMorphism.identity(L) for L in S.signature.values()]
    h = rng.choice(options)
    return Constraint(
        h,
        formula(rng, S, h.target, depth, morphisms),
        formula(rng, S, h.source, depth, morphisms),
    )


@dataclass
class Scenario:
    """A valid ``m: S2 -> S1``, a structure over ``S1`` and a morphism pool over ``S2``."""

    s2: Schema
    s1: Schema
    m: SchemaMorphism
    M1: Structure
    pool2: list = field(default_factory=list)


def scenario(rng: random.Random, b: Bounds = Bounds()) -> Scenario:
    n1 = rng.randint(1, min(3, b.max_types))
    x1 = [f"A{i}" for i in range(n1)]
    n2 = rng.randint(n1, b.max_types)
    x2 = [f"B{i}" for i in range(n2)]
    f = {x2[i]: x1[i] for i in range(n1)}
    for x in x2[n1:]:
        f[x] = rng.choice(x1)
    s1 = schema(rng, b, x1)
    pre: dict = {}
    for a, c in f.items():
        pre.setdefault(c, []).append(a)
    rel_map, sig2 = {}, {}
    for j in range(rng.randint(1, b.max_relations)):
        target = rng.choice(sorted(s1.signature))
        name = f"Q{j}"
        rel_map[name] = target
        sig2[name] = {i: rng.choice(pre[x]) for i, x in s1.signature[target].items()}
    s2 = Schema(x2, sig2)
    m = SchemaMorphism(s2, s1, rel_map, f).require_valid()
    pool2 = pool(rng, s2, b)
    E1 = classification(rng, x1, rng.randint(1, b.max_tokens))
    fibers = fibers_of(s1, [h.resort(f) for h in pool2])
    M1 = structure(rng, s1, E1, rng.randint(0, b.max_keys), fibers)
    return Scenario(s2, s1, m, M1, pool2)


def vertical_morphism(rng: random.Random, M2: Structure, key_copies=(0, 2), token_copies=(1, 2)):
    """Build ``M1`` and a vertical ``<1, k, 1, g>: M2 => M1``.

    Every token of ``M2`` gets between ``token_copies`` preimages under ``g``
    and every key between ``key_copies`` preimages under ``k``; incidences
    are pulled back so both infomorphism conditions hold by construction.
    """
    E2 = M2.entities
    tokens1, inc1, g = [], [], {}
    for y2 in sorted(E2.tokens, key=str):
        for c in range(rng.randint(*token_copies)):
            y1 = f"{y2}_{c}"
            tokens1.append(y1)
            g[y1] = y2
            inc1.extend((y1, x) for x in E2.intent(y2))
    E1 = Classification(E2.types, tokens1, inc1)
    pre: dict = {}
    for y1, y2 in g.items():
        pre.setdefault(y2, []).append(y1)
    keys1, kinc, tau1, kmap = [], [], {}, {}
    for k2 in sorted(M2.keys, key=str):
        t2 = M2.tau[k2]
        if any(y not in pre for y in t2.values()):
            continue
        for c in range(rng.randint(*key_copies)):
            k1 = f"{k2}_{c}"
            keys1.append(k1)
            kmap[k1] = k2
            tau1[k1] = Tuple({i: rng.choice(pre[y]) for i, y in t2.items()})
            kinc.extend((k1, r) for kk, r in M2.incidence if kk == k2)
    M1 = Structure(M2.schema, E1, keys1, kinc, tau1)
    h = StructureMorphism(
        M2,
        M1,
        {r: r for r in M2.schema.relation_types},
        kmap,
        {x: x for x in M2.schema.entity_types},
        g,
    )
    return M1, h


def resorted(h: TypeListMorphism, f) -> TypeListMorphism:
    return TypeListMorphism(sum_along(f, h.source), sum_along(f, h.target), h.mapping)
