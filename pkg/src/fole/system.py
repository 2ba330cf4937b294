"""Information systems, channels, the sum of a distributed system, and fusion.

Links run along edges ``e: i -> j`` as structure morphisms ``M_i => M_j``.
Channel components run ``M_i => core``. A channel covers a system when
``gamma_i`` equals ``m_e`` followed by ``gamma_j`` for every edge.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

from fole import config
from fole.errors import CapacityExceeded, InvalidMorphism, NotCovering, ShapeMismatch
from fole.formula import translate, translate_constraint
from fole.kernel import Classification, Tuple, UnionFind
from fole.schema import Schema
from fole.speclogic import (
    ClosureRules,
    Consequence,
    FormulaUniverse,
    Logic,
    LogicMorphism,
    Specification,
    consequence,
)
from fole.structure import Structure, StructureMorphism


@dataclass(frozen=True)
class ShapeGraph:
    nodes: tuple
    edges: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", dict(self.edges))
        for e, (i, j) in self.edges.items():
            if i not in self.nodes or j not in self.nodes:
                raise ShapeMismatch(f"edge {e} joins unknown nodes {i!r}, {j!r}")

    def sorted_edges(self):
        return sorted(self.edges.items(), key=lambda p: str(p[0]))


@dataclass(frozen=True, eq=False)
class DistributedSystem:
    shape: ShapeGraph
    structures: Mapping
    morphisms: Mapping

    def __post_init__(self):
        if set(self.structures) != set(self.shape.nodes):
            raise ShapeMismatch("structures must be indexed by the nodes of the shape")
        if set(self.morphisms) != set(self.shape.edges):
            raise ShapeMismatch("morphisms must be indexed by the edges of the shape")


@dataclass(frozen=True, eq=False)
class InformationSystem:
    shape: ShapeGraph
    logics: Mapping
    links: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if set(self.logics) != set(self.shape.nodes):
            raise ShapeMismatch("logics must be indexed by the nodes of the shape")
        if set(self.links) != set(self.shape.edges):
            raise ShapeMismatch("links must be indexed by the edges of the shape")
        for e, (i, j) in self.shape.edges.items():
            link = self.links[e]
            if link.source is not self.logics[i] or link.target is not self.logics[j]:
                if link.source.structure != self.logics[i].structure or link.target.structure != self.logics[j].structure:
                    raise ShapeMismatch(f"link {e} does not join the logics at {i!r} and {j!r}")


@dataclass(frozen=True, eq=False)
class Channel:
    core: Structure
    components: Mapping

    def validate(self):
        out = []
        for n in sorted(self.components, key=str):
            for f in self.components[n].validate():
                out.append(type(f)(f"{n}/{f.code}", f.message, f.where))
        return out


def underlying(S: InformationSystem) -> DistributedSystem:
    return DistributedSystem(
        S.shape,
        {n: S.logics[n].structure for n in S.shape.nodes},
        {e: S.links[e].structure_morphism for e in S.shape.edges},
    )


def _same_maps(a: StructureMorphism, b: StructureMorphism) -> bool:
    return (
        a.rel_map == b.rel_map
        and a.key_map == b.key_map
        and a.type_map == b.type_map
        and a.token_map == b.token_map
    )


def channel_covers(ch: Channel, D: DistributedSystem) -> bool:
    if set(ch.components) != set(D.shape.nodes):
        raise ShapeMismatch("channel components must be indexed by the nodes of the system")
    for e, (i, j) in D.shape.sorted_edges():
        try:
            composite = D.morphisms[e].then(ch.components[j])
        except KeyError:
            return False
        if not _same_maps(composite, ch.components[i]):
            return False
    return True


def _class_names(uf: UnionFind, node_order: dict) -> dict:
    """Name each class: a shared member name when unambiguous, else
    ``node__name`` of its representative."""
    classes = uf.classes()

    def rep(cls):
        return min(cls, key=lambda el: (node_order[el[0]], str(el[1])))

    claims: dict = {}
    for cls in classes:
        for name in {el[1] for el in cls}:
            claims.setdefault(name, []).append(id(cls))
    out = {}
    for cls in classes:
        names = {el[1] for el in cls}
        if len(names) == 1:
            (name,) = names
            if len(claims[name]) == 1:
                label = name
            else:
                n, x = rep(cls)
                label = f"{n}__{x}"
        else:
            n, x = rep(cls)
            label = f"{n}__{x}"
        for el in cls:
            out[el] = label
    return out, {out[rep(c)]: rep(c) for c in classes}


def _families(nodes, domains: dict, edges, maps: dict, cap: int):
    """All node-indexed families ``(v_n)`` with ``maps[e][v_j] == v_i`` for
    every edge ``e: i -> j``."""
    order = list(nodes)
    pos = {n: p for p, n in enumerate(order)}
    checks: dict = {n: [] for n in order}
    for e, (i, j) in edges:
        checks[order[max(pos[i], pos[j])]].append((e, i, j))
    out = []

    def go(p, acc):
        if p == len(order):
            out.append(dict(acc))
            if len(out) > cap:
                raise CapacityExceeded(f"more than {cap} families in the sum")
            return
        n = order[p]
        for v in sorted(domains[n], key=str):
            acc[n] = v
            if all(maps[e].get(acc[j]) == acc[i] for e, i, j in checks[n]):
                go(p + 1, acc)
        del acc[n]

    go(0, {})
    return out


def _family_name(fam: dict, order) -> object:
    values = {fam[n] for n in order}
    if len(values) == 1:
        return next(iter(values))
    return "__".join(f"{n}_{fam[n]}" for n in order)


def sum_system(D: DistributedSystem) -> Channel:
    """Core types and relations as a quotient of the disjoint union; core
    tokens and keys as compatible families."""
    nodes = D.shape.nodes
    order = {n: p for p, n in enumerate(nodes)}
    edges = D.shape.sorted_edges()
    cap = config.current().family_cap
    Ms = D.structures

    types_uf = UnionFind((n, x) for n in nodes for x in Ms[n].schema.entity_types)
    rels_uf = UnionFind((n, r) for n in nodes for r in Ms[n].schema.relation_types)
    for e, (i, j) in edges:
        m = D.morphisms[e]
        for x, y in m.type_map.items():
            types_uf.union((i, x), (j, y))
        for r, s in m.rel_map.items():
            rels_uf.union((i, r), (j, s))
    type_name, type_rep = _class_names(types_uf, order)
    rel_name, rel_rep = _class_names(rels_uf, order)

    token_fams = _families(
        nodes, {n: Ms[n].entities.tokens for n in nodes}, edges,
        {e: D.morphisms[e].token_map for e, _ in edges}, cap,
    )
    key_fams = _families(
        nodes, {n: Ms[n].keys for n in nodes}, edges,
        {e: D.morphisms[e].key_map for e, _ in edges}, cap,
    )

    def fam_label(fam):
        return _family_name(fam, nodes)

    token_label = {}
    used = set()
    for fam in token_fams:
        label = fam_label(fam)
        while label in used:
            label = f"{label}_"
        used.add(label)
        token_label[tuple(fam[n] for n in nodes)] = label

    core_types = set(type_rep)
    incidence = []
    for fam in token_fams:
        y = token_label[tuple(fam[n] for n in nodes)]
        for label, (n, x) in type_rep.items():
            if Ms[n].entities.holds(fam[n], x):
                incidence.append((y, label))
    entities = Classification(core_types, token_label.values(), incidence)

    signature = {}
    for label, (n, r) in rel_rep.items():
        signature[label] = {i: type_name[(n, x)] for i, x in Ms[n].schema.sigma(r).items()}
    schema = Schema(core_types, signature)

    keys, kinc, tau, key_of = [], [], {}, {}
    used = set()
    for fam in key_fams:
        tuples = [Ms[n].tau[fam[n]] for n in nodes]
        if any(t.arity != tuples[0].arity for t in tuples):
            continue
        label = fam_label(fam)
        while label in used:
            label = f"{label}_"
        used.add(label)
        key_of[label] = fam
        keys.append(label)
        tau[label] = Tuple({i: token_label[tuple(t[i] for t in tuples)] for i in tuples[0]} if tuples else {})
        for rl, (n, r) in rel_rep.items():
            if (fam[n], r) in Ms[n].incidence:
                kinc.append((label, rl))
    core = Structure(schema, entities, keys, kinc, tau)

    token_fam_of = {label: dict(zip(nodes, vals)) for vals, label in token_label.items()}
    components = {}
    for n in nodes:
        components[n] = StructureMorphism(
            Ms[n],
            core,
            {r: rel_name[(n, r)] for r in Ms[n].schema.relation_types},
            {k: key_of[k][n] for k in keys},
            {x: type_name[(n, x)] for x in Ms[n].schema.entity_types},
            {y: token_fam_of[y][n] for y in token_fam_of},
        )
    return Channel(core, components)


def direct_flow(Lg: Logic, gamma: StructureMorphism) -> Specification:
    findings = gamma.schema_morphism.validate()
    if findings:
        raise InvalidMorphism("; ".join(map(str, findings)))
    m = gamma.schema_morphism
    return Specification(m.target, {translate_constraint(m, c) for c in Lg.spec.constraints})


def _require_covering(S: InformationSystem, ch: Channel):
    if not channel_covers(ch, underlying(S)):
        raise NotCovering("channel does not cover the system")


def fusion_consequence(
    S: InformationSystem,
    ch: Channel,
    U: FormulaUniverse,
    rules: ClosureRules | None = None,
    extra=(),
) -> Consequence:
    _require_covering(S, ch)
    constraints = set()
    for n in S.shape.nodes:
        constraints |= direct_flow(S.logics[n], ch.components[n]).constraints
    return consequence(Specification(ch.core.schema, constraints), U, rules, extra)


def fusion(S: InformationSystem, ch: Channel, U: FormulaUniverse, rules: ClosureRules | None = None) -> Logic:
    closure = fusion_consequence(S, ch, U, rules)
    return Logic(ch.core, Specification(ch.core.schema, closure.constraints()))


def system_consequence(
    S: InformationSystem,
    ch: Channel,
    U: FormulaUniverse,
    node_universes: Mapping,
    rules: ClosureRules | None = None,
) -> dict:
    """Per node, the sequents of its universe whose translation into the core
    is derivable from the fused specification."""
    _require_covering(S, ch)
    local = {}
    extra = []
    for n in S.shape.nodes:
        Un = node_universes[n].extended(S.logics[n].spec.formulas())
        m = ch.components[n].schema_morphism
        local[n] = (Un, m)
        extra.extend(translate(m, phi) for phi in Un.formulas)
    fused = fusion_consequence(S, ch, U, rules, extra)
    out = {}
    for n in S.shape.nodes:
        Un, m = local[n]
        cache = {phi: translate(m, phi) for phi in Un.formulas}
        keep = frozenset(
            q for q in Un.sequents()
            if _translated(q, cache) in fused.sequents
        )
        out[n] = Consequence(keep, Un)
    return out


def _translated(q, cache):
    from fole.formula import Sequent

    return Sequent(cache[q.lhs], cache[q.rhs])


def identity_channel(M: Structure, node) -> Channel:
    return Channel(M, {node: StructureMorphism.identity(M)})


__all__ = [
    "Channel",
    "DistributedSystem",
    "InformationSystem",
    "LogicMorphism",
    "ShapeGraph",
    "channel_covers",
    "direct_flow",
    "fusion",
    "fusion_consequence",
    "identity_channel",
    "sum_system",
    "system_consequence",
    "underlying",
]
