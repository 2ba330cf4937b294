"""Enumeration limits.

``FOLE_CAP`` in the environment overrides both the tuple cap and the
channel-family cap.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Limits:
    tuple_cap: int = 1_000_000
    family_cap: int = 100_000
    term_depth: int = 32
    universe_cap: int = 5_000

    @classmethod
    def from_env(cls) -> "Limits":
        base = cls()
        raw = os.environ.get("FOLE_CAP")
        if raw:
            cap = int(raw)
            base = replace(base, tuple_cap=cap, family_cap=cap)
        return base


def current() -> Limits:
    return Limits.from_env()
