"""Count vertical morphisms that break the intent order, per morphism class.

For each class, generate ``--seeds`` random structures ``M2``, build a vertical
morphism ``M2 => M1`` with the class's key and token multiplicities, and
look for a sequent of the bounded universe that ``M2`` satisfies but ``M1``
does not. Also prints one small hand-built witness.

    python3 scripts/bimodularity_survey.py --seeds 300
"""

from __future__ import annotations

import argparse
import random
import time
from dataclasses import dataclass

from fole import generate as G
from fole.fixtures import DEST_LIST, dest_inclusion, entities_go, schema_go
from fole.formula import Atom, Exists, Sequent, Top
from fole.speclogic import CONNECTIVES, universe_intent_violations
from fole.structure import Structure, StructureMorphism


@dataclass(frozen=True)
class MorphismClass:
    label: str
    key_copies: tuple = (0, 2)
    token_copies: tuple = (1, 2)
    connectives: tuple = CONNECTIVES


CLASSES = (
    MorphismClass("general"),
    MorphismClass("k surjective, g bijective", key_copies=(1, 2), token_copies=(1, 1)),
    MorphismClass("k surjective (1..3), g bijective", key_copies=(1, 3), token_copies=(1, 1)),
    MorphismClass("general, boolean only", connectives=("neg", "meet", "join", "impl", "diff")),
    MorphismClass("general, boolean + subst", connectives=("neg", "meet", "join", "impl", "diff", "subst")),
    MorphismClass("k bijective, g general", key_copies=(1, 1)),
)


@dataclass(frozen=True)
class SurveyConfig:
    seeds: int = 300
    depth: int = 2


def violating(cls: MorphismClass, seed: int, depth: int) -> int:
    rng = random.Random(seed)
    S = G.schema(rng)
    pool = G.pool(rng, S)
    E = G.classification(rng, S.entity_types, rng.randint(1, 4))
    M2 = G.structure(rng, S, E, rng.randint(0, 5), G.fibers_of(S, pool))
    M1, h = G.vertical_morphism(rng, M2, cls.key_copies, cls.token_copies)
    assert h.validate() == [] and h.is_vertical
    return len(universe_intent_violations(M2, M1, S, depth, pool, cls.connectives))


def witness():
    S, E = schema_go(), entities_go()
    go = {"agnt": "john", "dest": "boston", "inst": "bus1"}
    M1 = Structure(S, E, {"a"}, [], {"a": {"dest": "boston"}})
    M2 = Structure(S, E, {"a", "k1"}, [("k1", "Go")], {"a": {"dest": "boston"}, "k1": go})
    h = StructureMorphism(M2, M1, {"Go": "Go"}, {"a": "a"}, {x: x for x in E.types}, {y: y for y in E.tokens})
    q = Sequent(Top(DEST_LIST), Exists(dest_inclusion(), Atom("Go")))
    return h, q


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=SurveyConfig.seeds)
    ap.add_argument("--depth", type=int, default=SurveyConfig.depth)
    args = ap.parse_args()
    cfg = SurveyConfig(args.seeds, args.depth)

    print(f"{'class':36} {'violating':>9} {'of':>4}  seconds")
    for cls in CLASSES:
        t0 = time.perf_counter()
        bad = sum(bool(violating(cls, s, cfg.depth)) for s in range(cfg.seeds))
        print(f"{cls.label:36} {bad:9d} {cfg.seeds:4d}  {time.perf_counter() - t0:7.1f}")

    h, q = witness()
    print()
    print(f"witness: vertical={h.is_vertical} valid={h.validate() == []}")
    print(f"  {q}")
    print(f"  source satisfies: {h.source.satisfies_sequent(q)}")
    print(f"  target satisfies: {h.target.satisfies_sequent(q)}")


if __name__ == "__main__":
    main()
