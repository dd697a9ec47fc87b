"""Deterministic seed derivation.

Every source of randomness in the package flows through a :class:`Seed`:
a 64-bit master value plus an ordered path of ``(label, index)`` pairs.
The effective stream seed is a pure hash of ``(master, path)``, so any
recorded seed path can be replayed to the exact same random stream on any
worker, in any order.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

_U64_MAX = (1 << 64) - 1


@dataclass(frozen=True)
class Seed:
    master: int
    path: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        if not 0 <= self.master <= _U64_MAX:
            raise ConfigError(f"master seed must be a 64-bit unsigned integer, got {self.master}")
        for label, index in self.path:
            if not label:
                raise ConfigError("seed path labels must be nonempty")
            if index < 0:
                raise ConfigError(f"seed path index must be nonnegative, got {index}")

    @property
    def value(self) -> int:
        """64-bit stream seed; a pure, collision-resistant hash of (master, path)."""
        h = hashlib.blake2b(digest_size=8)
        h.update(struct.pack("<Q", self.master))
        for label, index in self.path:
            h.update(label.encode("utf-8"))
            h.update(b"\x00")
            h.update(struct.pack("<Q", index))
        return int.from_bytes(h.digest(), "little")

    def derive(self, label: str, index: int = 0) -> "Seed":
        if not label:
            raise ConfigError("seed path labels must be nonempty")
        return Seed(self.master, self.path + ((label, int(index)),))

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.value)


def derive_subseed(seed: Seed, label: str, index: int = 0) -> Seed:
    """Append ``(label, index)`` to the seed's derivation path."""
    return seed.derive(label, index)
