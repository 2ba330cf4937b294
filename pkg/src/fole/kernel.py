"""Type lists, classifications, tuples and the three flow operators.

Index and type identifiers are opaque strings. Tuples and type lists are
immutable maps keyed by index, so equality is extensional and the order in
which indices were written never matters.
"""

from __future__ import annotations

import functools
import itertools
from collections.abc import Hashable, Iterable, Iterator, Mapping

from fole import config
from fole.errors import (
    ArityMismatch,
    CapacityExceeded,
    SortClash,
    UnknownSort,
    UnknownType,
)
from fole.report import Finding

FLOW_MODES = ("exists", "forall", "inverse")


def _sort_key(item):
    return str(item[0])


class _FrozenMap(Mapping):
    __slots__ = ("_d", "_items", "_hash")

    def __init__(self, data=(), **kwargs):
        d = dict(data.items() if isinstance(data, Mapping) else data)
        d.update(kwargs)
        self._d = d
        self._items = tuple(sorted(d.items(), key=_sort_key))
        self._hash = hash((type(self).__name__, self._items))

    def __getitem__(self, key):
        return self._d[key]

    def __iter__(self):
        return (k for k, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self._hash == other._hash and self._items == other._items

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __lt__(self, other):
        return [(str(k), str(v)) for k, v in self._items] < [
            (str(k), str(v)) for k, v in other._items
        ]

    @property
    def arity(self) -> frozenset:
        return frozenset(self._d)

    @property
    def indices(self) -> tuple:
        return tuple(k for k, _ in self._items)

    def __reduce__(self):
        return (type(self), (self._items,))


class TypeList(_FrozenMap):
    """A sort-labelled index set ``<I, s>``: index -> entity type."""

    __slots__ = ()

    def sort(self, index):
        return self._d[index]

    @property
    def sorts(self) -> frozenset:
        return frozenset(self._d.values())

    def __repr__(self):
        body = ", ".join(f"{i}: {s}" for i, s in self._items)
        return f"({body})"


class Tuple(_FrozenMap):
    """A token tuple ``<J, t>``: index -> token."""

    __slots__ = ()

    def __repr__(self):
        body = ", ".join(f"{i}={y}" for i, y in self._items)
        return f"<{body}>"


EMPTY_LIST = TypeList()
EMPTY_TUPLE = Tuple()


class TypeListMorphism:
    """Arity function ``h: I' -> I`` with ``s(h(i')) == s'(i')``.

    ``name`` is a label for printing and is ignored by equality.
    """

    __slots__ = ("source", "target", "mapping", "name", "_hash")

    def __init__(self, source: TypeList, target: TypeList, mapping, name=None):
        mapping = dict(mapping)
        if set(mapping) != set(source):
            raise ArityMismatch(
                f"morphism map must be total on {sorted(source)}, got {sorted(mapping)}"
            )
        for i_src, i_tgt in mapping.items():
            if i_tgt not in target:
                raise ArityMismatch(f"index {i_tgt!r} is not in target {target!r}")
            if target.sort(i_tgt) != source.sort(i_src):
                raise SortClash(
                    f"{i_src}:{source.sort(i_src)} mapped to {i_tgt}:{target.sort(i_tgt)}"
                )
        self.source = source
        self.target = target
        self.mapping = _FrozenMap(mapping)
        self.name = name
        self._hash = hash((source, target, self.mapping))

    def __getitem__(self, index):
        return self.mapping[index]

    def __eq__(self, other):
        if not isinstance(other, TypeListMorphism):
            return NotImplemented
        return (
            self._hash == other._hash
            and self.source == other.source
            and self.target == other.target
            and self.mapping == other.mapping
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if self.name:
            return self.name
        pairs = ", ".join(f"{a} -> {b}" for a, b in self.mapping._items)
        return f"[{self.source!r} -> {self.target!r} {{{pairs}}}]"

    @classmethod
    def identity(cls, type_list: TypeList) -> "TypeListMorphism":
        return cls(type_list, type_list, {i: i for i in type_list})

    @classmethod
    def inclusion(cls, sub: TypeList, type_list: TypeList, name=None):
        return cls(sub, type_list, {i: i for i in sub}, name=name)

    @property
    def is_identity(self) -> bool:
        return self.source == self.target and all(
            a == b for a, b in self.mapping.items()
        )

    def then(self, other: "TypeListMorphism") -> "TypeListMorphism":
        """Diagrammatic composite: first ``self`` then ``other``."""
        if self.target != other.source:
            raise ArityMismatch("composite of non-adjacent type list morphisms")
        return TypeListMorphism(
            self.source, other.target, {i: other[self[i]] for i in self.source}
        )

    def resort(self, type_map: Mapping) -> "TypeListMorphism":
        """Same arity function between the re-sorted endpoints."""
        return TypeListMorphism(
            sum_along(type_map, self.source),
            sum_along(type_map, self.target),
            self.mapping,
        )


class Classification:
    """Finite classification ``<X, Y, |=>``: tokens classified by types."""

    __slots__ = ("types", "tokens", "incidence", "_ext", "_int", "_hash")

    def __init__(self, types: Iterable, tokens: Iterable, incidence: Iterable = ()):
        self.types = frozenset(types)
        self.tokens = frozenset(tokens)
        self.incidence = frozenset((y, x) for y, x in incidence)
        ext = {x: set() for x in self.types}
        intent = {y: set() for y in self.tokens}
        for y, x in self.incidence:
            if x not in ext:
                raise UnknownType(f"incidence mentions undeclared type {x!r}")
            if y not in intent:
                raise UnknownType(f"incidence mentions undeclared token {y!r}")
            ext[x].add(y)
            intent[y].add(x)
        self._ext = {x: frozenset(v) for x, v in ext.items()}
        self._int = {y: frozenset(v) for y, v in intent.items()}
        self._hash = hash((self.types, self.tokens, self.incidence))

    def extent(self, x) -> frozenset:
        try:
            return self._ext[x]
        except KeyError:
            raise UnknownSort(f"unknown type {x!r}") from None

    def intent(self, y) -> frozenset:
        return self._int[y]

    def holds(self, y, x) -> bool:
        return (y, x) in self.incidence

    def __eq__(self, other):
        if not isinstance(other, Classification):
            return NotImplemented
        return (
            self._hash == other._hash
            and self.types == other.types
            and self.tokens == other.tokens
            and self.incidence == other.incidence
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return (
            f"Classification(types={sorted(self.types)}, tokens={sorted(self.tokens)}, "
            f"incidence={len(self.incidence)})"
        )


class Infomorphism:
    """``<f, g>: source <=> target`` with ``f`` on types (source -> target)
    and ``g`` on tokens (target -> source)."""

    __slots__ = ("source", "target", "type_map", "token_map")

    def __init__(self, source: Classification, target: Classification, type_map, token_map):
        self.source = source
        self.target = target
        self.type_map = dict(type_map)
        self.token_map = dict(token_map)

    @classmethod
    def identity(cls, c: Classification) -> "Infomorphism":
        return cls(c, c, {x: x for x in c.types}, {y: y for y in c.tokens})

    def validate(self) -> list[Finding]:
        out = []
        f, g = self.type_map, self.token_map
        for x2 in sorted(self.source.types, key=str):
            if x2 not in f:
                out.append(Finding("partial-type-map", f"type {x2} unmapped", (x2,)))
            elif f[x2] not in self.target.types:
                out.append(Finding("bad-type-image", f"{x2} -> {f[x2]} not a target type", (x2,)))
        for y1 in sorted(self.target.tokens, key=str):
            if y1 not in g:
                out.append(Finding("partial-token-map", f"token {y1} unmapped", (y1,)))
            elif g[y1] not in self.source.tokens:
                out.append(Finding("bad-token-image", f"{y1} -> {g[y1]} not a source token", (y1,)))
        if out:
            return out
        for y1 in sorted(self.target.tokens, key=str):
            for x2 in sorted(self.source.types, key=str):
                lhs = self.target.holds(y1, f[x2])
                rhs = self.source.holds(g[y1], x2)
                if lhs != rhs:
                    out.append(
                        Finding(
                            "infomorphism",
                            f"{y1} |= {f[x2]} is {lhs} but {g[y1]} |= {x2} is {rhs}",
                            (y1, x2),
                        )
                    )
        return out

    def then(self, other: "Infomorphism") -> "Infomorphism":
        """Composite ``self`` followed by ``other``."""
        return Infomorphism(
            self.source,
            other.target,
            {x: other.type_map[self.type_map[x]] for x in self.type_map},
            {y: self.token_map[other.token_map[y]] for y in other.token_map},
        )


class TupleRelation:
    """A set of tuples over one type list."""

    __slots__ = ("type_list", "tuples", "_hash")

    def __init__(self, type_list: TypeList, tuples: Iterable[Tuple] = ()):
        tuples = frozenset(tuples)
        arity = type_list.arity
        for t in tuples:
            if t.arity != arity:
                raise ArityMismatch(f"tuple {t!r} does not have arity {sorted(arity)}")
        self.type_list = type_list
        self.tuples = tuples
        self._hash = hash((type_list, tuples))

    def __contains__(self, t):
        return t in self.tuples

    def __iter__(self) -> Iterator[Tuple]:
        return iter(sorted(self.tuples))

    def __len__(self):
        return len(self.tuples)

    def __le__(self, other: "TupleRelation") -> bool:
        return self.type_list == other.type_list and self.tuples <= other.tuples

    def __eq__(self, other):
        if not isinstance(other, TupleRelation):
            return NotImplemented
        return self.type_list == other.type_list and self.tuples == other.tuples

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"TupleRelation({self.type_list!r}, {sorted(self.tuples)!r})"

    def classified_by(self, entities: Classification) -> bool:
        return all(list_holds(entities, t, self.type_list) for t in self.tuples)


def list_holds(entities: Classification, t: Tuple, type_list: TypeList) -> bool:
    if t.arity != type_list.arity:
        return False
    for i, x in type_list.items():
        if not entities.holds(t[i], x):
            return False
    return True


def tup_size(entities: Classification, type_list: TypeList) -> int:
    n = 1
    for x in type_list.values():
        n *= len(entities.extent(x))
    return n


@functools.lru_cache(maxsize=8192)
def _enumerate(entities: Classification, type_list: TypeList) -> tuple:
    idx = type_list.indices
    pools = [sorted(entities.extent(type_list.sort(i)), key=str) for i in idx]
    return tuple(Tuple(zip(idx, values)) for values in itertools.product(*pools))


def tup(entities: Classification, type_list: TypeList, cap: int | None = None) -> TupleRelation:
    """All tuples classified by ``type_list``."""
    for x in type_list.values():
        if x not in entities.types:
            raise UnknownSort(f"type list mentions undeclared type {x!r}")
    cap = config.current().tuple_cap if cap is None else cap
    size = tup_size(entities, type_list)
    if size > cap:
        raise CapacityExceeded(f"tup{type_list!r} has {size} tuples (cap {cap})")
    return TupleRelation(type_list, _enumerate(entities, type_list))


def tup_map(h: TypeListMorphism, t: Tuple) -> Tuple:
    """Precompose a target-arity tuple with ``h``."""
    if t.arity != h.target.arity:
        raise ArityMismatch(f"tuple {t!r} is not over {h.target!r}")
    return Tuple({i: t[h[i]] for i in h.source})


def preimages(entities: Classification, h: TypeListMorphism, t_src: Tuple) -> Iterator[Tuple]:
    """Tuples ``t`` in tup(target) with ``tup_map(h, t) == t_src``."""
    fixed: dict = {}
    for i_src, i_tgt in h.mapping.items():
        y = t_src[i_src]
        if fixed.get(i_tgt, y) != y:
            return
        fixed[i_tgt] = y
    for i_tgt, y in fixed.items():
        if not entities.holds(y, h.target.sort(i_tgt)):
            return
    free = [i for i in h.target.indices if i not in fixed]
    pools = [sorted(entities.extent(h.target.sort(i)), key=str) for i in free]
    for values in itertools.product(*pools):
        d = dict(fixed)
        d.update(zip(free, values))
        yield Tuple(d)


def flow(
    entities: Classification,
    h: TypeListMorphism,
    mode: str,
    relation: TupleRelation,
    cap: int | None = None,
) -> TupleRelation:
    """Existential image, universal image or inverse image along ``h``."""
    if mode not in FLOW_MODES:
        raise ValueError(f"flow mode must be one of {FLOW_MODES}, got {mode!r}")
    if mode == "inverse":
        if relation.type_list != h.source:
            raise ArityMismatch(f"inverse flow needs a relation over {h.source!r}")
        hit = TypeList({i: h.target.sort(i) for i in set(h.mapping.values())})
        if len(relation.tuples) >= tup_size(entities, hit):
            # dense relation: filtering all target tuples is cheaper
            rel = relation.tuples
            return TupleRelation(
                h.target, (t for t in tup(entities, h.target, cap).tuples if tup_map(h, t) in rel)
            )
        out = set()
        for t_src in relation.tuples:
            out.update(preimages(entities, h, t_src))
        return TupleRelation(h.target, out)
    if relation.type_list != h.target:
        raise ArityMismatch(f"{mode} flow needs a relation over {h.target!r}")
    if mode == "exists":
        return TupleRelation(h.source, (tup_map(h, t) for t in relation.tuples))
    # a source tuple survives unless some target tuple outside R maps onto it
    rel = relation.tuples
    blocked = {tup_map(h, t) for t in tup(entities, h.target, cap).tuples if t not in rel}
    return TupleRelation(h.source, (t for t in tup(entities, h.source, cap).tuples if t not in blocked))


def sum_along(type_map: Mapping, type_list: TypeList) -> TypeList:
    """Relabel the sorts of a type list along a type function."""
    try:
        return TypeList({i: type_map[x] for i, x in type_list.items()})
    except KeyError as exc:
        raise UnknownSort(f"type function undefined on {exc.args[0]!r}") from None


def inverse_image_classification(type_map: Mapping, target: Classification) -> Classification:
    """Pull ``target`` back along ``type_map``; tokens are unchanged."""
    for x2, x1 in type_map.items():
        if x1 not in target.types:
            raise UnknownType(f"{x2!r} maps to {x1!r}, not a type of the target")
    incidence = [(y, x2) for x2, x1 in type_map.items() for y in target.extent(x1)]
    return Classification(type_map.keys(), target.tokens, incidence)


def inverse_image_infomorphism(type_map: Mapping, target: Classification) -> Infomorphism:
    pulled = inverse_image_classification(type_map, target)
    return Infomorphism(pulled, target, type_map, {y: y for y in target.tokens})


def tuple_bridge(m: Infomorphism, t: Tuple) -> Tuple:
    """Postcompose a tuple over the target tokens with the token map."""
    return Tuple({i: m.token_map[y] for i, y in t.items()})


class UnionFind:
    """Disjoint sets with path compression and union by rank."""

    def __init__(self, elements: Iterable[Hashable] = ()):
        self.parent: dict = {}
        self.rank: dict = {}
        for el in elements:
            self.add(el)

    def add(self, el) -> None:
        if el not in self.parent:
            self.parent[el] = el
            self.rank[el] = 0

    def find(self, el):
        root = el
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[el] != root:
            self.parent[el], el = root, self.parent[el]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1

    def classes(self) -> list[list]:
        groups: dict = {}
        for el in self.parent:
            groups.setdefault(self.find(el), []).append(el)
        return list(groups.values())


def fresh_name(base: str, taken: set) -> str:
    if base not in taken:
        return base
    n = 2
    while f"{base}_{n}" in taken:
        n += 1
    return f"{base}_{n}"


def typelist_pushout(h1: TypeListMorphism, h2: TypeListMorphism):
    """Fibered sum of ``h1: L -> L1`` and ``h2: L -> L2``.

    Returns ``(L_hat, iota1, iota2)`` with ``h1.then(iota1) == h2.then(iota2)``.
    A class keeps the smallest name among its ``L1`` members (else its ``L2``
    members); clashing names get a numeric suffix.
    """
    if h1.source != h2.source:
        raise ArityMismatch("pushout legs must share their source type list")
    uf = UnionFind([(1, i) for i in h1.target.indices] + [(2, i) for i in h2.target.indices])
    for i in h1.source.indices:
        uf.union((1, h1[i]), (2, h2[i]))

    def member_sort(el):
        side, i = el
        return (h1.target if side == 1 else h2.target).sort(i)

    def preferred(cls):
        return min(cls, key=lambda el: (el[0], str(el[1])))

    classes = sorted(uf.classes(), key=lambda c: (preferred(c)[0], str(preferred(c)[1])))
    sorts: dict = {}
    assign: dict = {}
    for cls in classes:
        found = {member_sort(el) for el in cls}
        if len(found) > 1:
            raise SortClash(f"identified indices carry different sorts {sorted(found)}")
        name = fresh_name(str(preferred(cls)[1]), set(sorts))
        sorts[name] = found.pop()
        for el in cls:
            assign[el] = name
    hat = TypeList(sorts)
    iota1 = TypeListMorphism(h1.target, hat, {i: assign[(1, i)] for i in h1.target})
    iota2 = TypeListMorphism(h2.target, hat, {i: assign[(2, i)] for i in h2.target})
    return hat, iota1, iota2
