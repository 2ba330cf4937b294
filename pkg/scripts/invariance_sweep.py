"""Random sweep of satisfaction invariance along schema morphisms.

Each case draws a schema morphism ``m: S2 -> S1``, a structure ``M1`` over
``S1`` and a constraint over ``S2``, then compares satisfaction in the reduct
with satisfaction of the translated constraint in ``M1``. Prints one line per
batch and exits 1 on any mismatch.

    python3 scripts/invariance_sweep.py --cases 2000 --depth 3
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from dataclasses import dataclass

from fole import generate as G
from fole.formula import translate, translate_constraint
from fole.structure import reduct


@dataclass(frozen=True)
class SweepConfig:
    cases: int = 1000
    seed: int = 0
    depth: int = 3
    batch: int = 250


def run(cfg: SweepConfig) -> int:
    rng = random.Random(cfg.seed)
    b = G.Bounds(formula_depth=cfg.depth)
    mismatches = formulas = 0
    t0 = time.perf_counter()
    for n in range(1, cfg.cases + 1):
        sc = G.scenario(rng, b)
        M2, _ = reduct(sc.m, sc.M1)
        c = G.constraint(rng, sc.s2, sc.pool2, cfg.depth)
        if M2.satisfies_constraint(c) != sc.M1.satisfies_constraint(translate_constraint(sc.m, c)):
            mismatches += 1
            print(f"mismatch at case {n}: {c}")
        for phi in {*c.phi.subformulas(), *c.phi_prime.subformulas()}:
            formulas += 1
            if M2.eval(phi) != sc.M1.eval(translate(sc.m, phi)):
                mismatches += 1
                print(f"extent mismatch at case {n}: {phi}")
        if n % cfg.batch == 0 or n == cfg.cases:
            print(f"{n:6d} cases  {formulas:7d} formulas  {mismatches} mismatches  {time.perf_counter() - t0:6.1f}s")
    return mismatches


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cases", type=int, default=SweepConfig.cases)
    ap.add_argument("--seed", type=int, default=SweepConfig.seed)
    ap.add_argument("--depth", type=int, default=SweepConfig.depth)
    args = ap.parse_args()
    sys.exit(1 if run(SweepConfig(args.cases, args.seed, args.depth)) else 0)


if __name__ == "__main__":
    main()
