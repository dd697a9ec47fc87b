"""Random bipartite graphs with bitset rows.

Edges live on the complete bipartite grid L x R with |L| = |R| = n; the
indicator of edge (u, v) is derived by hashing the edge counter u*n + v with
a 64-bit mixer and thresholding at p * 2^64. Because every indicator is a
pure function of (seed, u, v), a graph can answer single-edge queries without
materialising anything, while `.words` lazily builds the packed n x n bit
matrix when whole-row access is worth it. Both access paths see identical
bits, and identical (params, seed) always reproduce the identical graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, TextIO

import numpy as np

from .errors import ConfigError, GraphFormatError
from .params import Params, is_gamma_balanced
from .seeds import Seed

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# rows materialise in slabs of at most ~4M edge indicators
_CHUNK_BITS = 1 << 22


def _mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * _MIX1 & _M64
    z = (z ^ (z >> 27)) * _MIX2 & _M64
    return z ^ (z >> 31)


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def _p_threshold(p: float) -> int:
    # Fraction(p) is the exact binary value of the float, so this threshold
    # is exact: the edge probability is precisely the given double.
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"p must lie in [0, 1], got {p}")
    return int(Fraction(p) * (1 << 64))


def _words_per_row(n: int) -> int:
    return (n + 63) // 64


def _pack_bool_rows(bits: np.ndarray, n: int) -> np.ndarray:
    """(rows, n) bool -> (rows, W) uint64, little-endian bit order."""
    w = _words_per_row(n)
    packed = np.packbits(bits, axis=1, bitorder="little")
    if packed.shape[1] < 8 * w:
        pad = np.zeros((packed.shape[0], 8 * w - packed.shape[1]), dtype=np.uint8)
        packed = np.concatenate([packed, pad], axis=1)
    return packed.view(np.uint64)


@dataclass(frozen=True)
class GraphProvenance:
    p: float | None
    seed_value: int | None
    source: str  # "generated" | "file" | "derived"


class BipartiteGraph:
    """Immutable n x n edge-indicator table over sides L and R.

    Row u holds the indicators of edges (L_u, R_v) for v = 0..n-1. Vertex ids
    are 0..n-1 on each side; there are no intra-side edges by representation.
    """

    __slots__ = ("n", "provenance", "_words", "_base", "_thresh")

    def __init__(self, n, *, words=None, gen=None, provenance=None):
        if n < 1:
            raise ConfigError(f"n must be a positive integer, got {n}")
        if (words is None) == (gen is None):
            raise ConfigError("exactly one of words/gen must be given")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "_words", words)
        if gen is not None:
            base, thresh = gen
            object.__setattr__(self, "_base", base)
            object.__setattr__(self, "_thresh", thresh)
        else:
            object.__setattr__(self, "_base", None)
            object.__setattr__(self, "_thresh", None)
        object.__setattr__(self, "provenance", provenance or GraphProvenance(None, None, "derived"))

    def __setattr__(self, name, value):
        raise AttributeError("BipartiteGraph is immutable")

    @classmethod
    def from_words(cls, n: int, words: np.ndarray, provenance: GraphProvenance | None = None):
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if words.shape != (n, _words_per_row(n)):
            raise ConfigError(f"words must have shape ({n}, {_words_per_row(n)})")
        tail = n % 64
        if tail and words.shape[1] and int(words[:, -1].max(initial=0)) >> tail:
            raise ConfigError("bits beyond column n must be zero")
        words.setflags(write=False)
        return cls(n, words=words, provenance=provenance)

    # -- edge access ------------------------------------------------------

    def has_edge(self, u: int, v: int) -> bool:
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise ConfigError(f"vertex ids must lie in [0, {self.n}), got ({u}, {v})")
        w = self._words
        if w is not None:
            return bool((int(w[u, v >> 6]) >> (v & 63)) & 1)
        z = (self._base + (u * self.n + v + 1) * _GOLDEN) & _M64
        return _mix64(z) < self._thresh

    def edge_tester(self) -> Callable[[int, int], bool]:
        """Fastest unchecked (u, v) -> present closure for this backing."""
        n = self.n
        w = self._words
        if w is not None:
            def test(u: int, v: int, _w=w) -> bool:
                return bool((int(_w[u, v >> 6]) >> (v & 63)) & 1)
            return test
        base, thresh = self._base, self._thresh

        def test(u: int, v: int, _b=base, _t=thresh, _n=n) -> bool:
            z = (_b + (u * _n + v + 1) * _GOLDEN) & _M64
            z = (z ^ (z >> 30)) * _MIX1 & _M64
            z = (z ^ (z >> 27)) * _MIX2 & _M64
            return (z ^ (z >> 31)) < _t

        return test

    def _row_block(self, u0: int, u1: int) -> np.ndarray:
        n = self.n
        if self._thresh <= 0:
            bits = np.zeros((u1 - u0, n), dtype=bool)
        elif self._thresh > _M64:
            bits = np.ones((u1 - u0, n), dtype=bool)
        else:
            idx = np.arange(u0 * n + 1, u1 * n + 1, dtype=np.uint64).reshape(u1 - u0, n)
            z = np.uint64(self._base) + idx * np.uint64(_GOLDEN)
            bits = _mix64_np(z) < np.uint64(self._thresh)
        return _pack_bool_rows(bits, n)

    @property
    def words(self) -> np.ndarray:
        """Packed (n, ceil(n/64)) uint64 bit matrix; built lazily and cached."""
        if self._words is None:
            n = self.n
            chunk = max(1, _CHUNK_BITS // n)
            blocks = [self._row_block(u0, min(u0 + chunk, n)) for u0 in range(0, n, chunk)]
            w = np.vstack(blocks)
            w.setflags(write=False)
            object.__setattr__(self, "_words", w)
        return self._words

    def row_int(self, u: int) -> int:
        """Row u as a Python int bitset (bit v set iff edge (u, v) present)."""
        if not 0 <= u < self.n:
            raise ConfigError(f"row index out of range: {u}")
        return int.from_bytes(self.words[u].tobytes(), "little")

    def row_ints(self) -> list[int]:
        w = self.words
        return [int.from_bytes(w[u].tobytes(), "little") for u in range(self.n)]

    def edge_count(self) -> int:
        return int.from_bytes(self.words.tobytes(), "little").bit_count()

    def edges(self) -> Iterable[tuple[int, int]]:
        """All present edges in ascending (u, v) order."""
        for u in range(self.n):
            row = self.row_int(u)
            while row:
                low = row & -row
                yield u, low.bit_length() - 1
                row ^= low

    def transposed(self) -> "BipartiteGraph":
        """Graph with the two sides swapped (edge (u, v) becomes (v, u))."""
        n = self.n
        bits = np.unpackbits(self.words.view(np.uint8), axis=1, bitorder="little")[:, :n]
        return BipartiteGraph.from_words(
            n, _pack_bool_rows(np.ascontiguousarray(bits.T), n),
            GraphProvenance(self.provenance.p, self.provenance.seed_value, "derived"),
        )

    def with_edge_flipped(self, u: int, v: int) -> "BipartiteGraph":
        """Copy of the graph with one edge indicator toggled."""
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise ConfigError(f"vertex ids must lie in [0, {self.n})")
        w = self.words.copy()
        w[u, v >> 6] ^= np.uint64(1 << (v & 63))
        return BipartiteGraph.from_words(self.n, w, GraphProvenance(
            self.provenance.p, self.provenance.seed_value, "derived"))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.words, other.words))

    def __hash__(self):
        return hash((self.n, self.words.tobytes()))

    def __repr__(self) -> str:
        return f"BipartiteGraph(n={self.n}, source={self.provenance.source!r})"


def generate_graph(params: Params, seed: Seed) -> BipartiteGraph:
    """Sample G(n, p): each of the n^2 cross edges present independently with
    probability p, fully determined by the seed. p = 0 and p = 1 are allowed."""
    return BipartiteGraph(
        params.n,
        gen=(seed.value, _p_threshold(params.p)),
        provenance=GraphProvenance(params.p, seed.value, "generated"),
    )


# -- balanced vertex sets --------------------------------------------------


@dataclass(frozen=True)
class BalancedSet:
    """A candidate solution: one vertex subset per side, stored as bitsets."""

    n: int
    l_mask: int
    r_mask: int

    @classmethod
    def from_ids(cls, n: int, l_ids: Iterable[int] = (), r_ids: Iterable[int] = ()):
        lm = rm = 0
        for u in l_ids:
            if not 0 <= u < n:
                raise ConfigError(f"L id out of range: {u}")
            lm |= 1 << u
        for v in r_ids:
            if not 0 <= v < n:
                raise ConfigError(f"R id out of range: {v}")
            rm |= 1 << v
        return cls(n, lm, rm)

    @property
    def l_size(self) -> int:
        return self.l_mask.bit_count()

    @property
    def r_size(self) -> int:
        return self.r_mask.bit_count()

    @property
    def size(self) -> int:
        return self.l_size + self.r_size

    def l_ids(self) -> list[int]:
        return _mask_ids(self.l_mask)

    def r_ids(self) -> list[int]:
        return _mask_ids(self.r_mask)

    def is_balanced(self, gamma: float) -> bool:
        return is_gamma_balanced(self.l_size, self.r_size, gamma)

    def is_independent_in(self, g: BipartiteGraph) -> bool:
        """Checked against the full graph, one cross pair at a time."""
        has_edge = g.edge_tester()
        r_ids = self.r_ids()
        for u in self.l_ids():
            for v in r_ids:
                if has_edge(u, v):
                    return False
        return True


def _mask_ids(mask: int) -> list[int]:
    ids = []
    while mask:
        low = mask & -mask
        ids.append(low.bit_length() - 1)
        mask ^= low
    return ids


# -- graph file format v1 ---------------------------------------------------

_MAGIC = "balis-graph v1"


def save_graph(g: BipartiteGraph, sink) -> None:
    """Write the v1 text format: magic line, `n= p= seed=` line, then one
    `u v` line per present edge in ascending order."""
    if hasattr(sink, "write"):
        _write_graph(g, sink)
    else:
        with open(sink, "w", encoding="utf-8", newline="\n") as fp:
            _write_graph(g, fp)


def _write_graph(g: BipartiteGraph, fp: TextIO) -> None:
    p = g.provenance.p
    seed = g.provenance.seed_value
    fp.write(_MAGIC + "\n")
    fp.write(f"n={g.n} p={'none' if p is None else repr(float(p))} "
             f"seed={'none' if seed is None else seed}\n")
    for u, v in g.edges():
        fp.write(f"{u} {v}\n")


def load_graph(source) -> BipartiteGraph:
    if hasattr(source, "read"):
        return _read_graph(source)
    with open(source, "r", encoding="utf-8") as fp:
        return _read_graph(fp)


def _read_graph(fp: TextIO) -> BipartiteGraph:
    magic = fp.readline().rstrip("\n")
    if magic != _MAGIC:
        raise GraphFormatError(f"bad header: expected {_MAGIC!r}, got {magic!r}")
    header = fp.readline().rstrip("\n")
    fields = dict(item.split("=", 1) for item in header.split() if "=" in item)
    if set(fields) != {"n", "p", "seed"}:
        raise GraphFormatError(f"bad header line: {header!r}")
    try:
        n = int(fields["n"])
        p = None if fields["p"] == "none" else float(fields["p"])
        seed = None if fields["seed"] == "none" else int(fields["seed"])
    except ValueError as exc:
        raise GraphFormatError(f"bad header line: {header!r}") from exc
    if n < 1:
        raise GraphFormatError(f"n must be positive, got {n}")
    words = np.zeros((n, _words_per_row(n)), dtype=np.uint64)
    seen = set()
    for lineno, line in enumerate(fp, start=3):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise GraphFormatError(f"line {lineno}: expected 'u v', got {line!r}") from exc
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"line {lineno}: vertex id out of range: {u} {v}")
        if (u, v) in seen:
            raise GraphFormatError(f"line {lineno}: duplicate edge line: {u} {v}")
        seen.add((u, v))
        words[u, v >> 6] |= np.uint64(1 << (v & 63))
    return BipartiteGraph.from_words(n, words, GraphProvenance(p, seed, "file"))
