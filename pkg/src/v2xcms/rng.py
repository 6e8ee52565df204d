"""Injectable randomness sources.

Every randomized operation takes an object with ``randbytes(n)``.  The
default draws from the OS; :class:`SeededRng` replays a fixed stream and is
selected process-wide when ``V2XCMS_SEED`` is set.
"""

from __future__ import annotations

import os
import random
import secrets

SEED_ENV = "V2XCMS_SEED"


class SystemRng:
    def randbytes(self, n: int) -> bytes:
        return secrets.token_bytes(n)


class SeededRng:
    """Deterministic stream for tests and replayable runs. Not for real keys."""

    def __init__(self, seed: int | str | bytes):
        self.seed = seed
        self._r = random.Random(seed)

    def randbytes(self, n: int) -> bytes:
        return self._r.randbytes(n)

    def fork(self, label: str) -> "SeededRng":
        return SeededRng(f"{self.seed}/{label}")


def default_rng(label: str = ""):
    """Seeded source if ``V2XCMS_SEED`` is set, otherwise the OS source."""
    seed = os.environ.get(SEED_ENV)
    if seed is None or seed == "":
        return SystemRng()
    return SeededRng(f"{seed}/{label}" if label else seed)


def is_seeded(rng) -> bool:
    return isinstance(rng, SeededRng)
