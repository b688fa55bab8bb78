"""Partition-coded index over fixed-length symbol strings.

The alphabet is split into a small number of groups; a fragment's *bin code*
is the base-``|groups|`` number formed by its per-position group ordinals, so
every bin is a cylinder: it fixes a group at each of the ``m`` positions.
The distance from a query to a cylinder splits over positions into
precomputed per-symbol group minima, which makes the cylinder lower bound
both exact and cheap - the certification function that drives pruned
traversal of the prefix tree over the codes.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .matrix import Alphabet, SymbolQuasiMetric
from .scheme import SearchResult, SearchStats

__all__ = [
    "Partition",
    "GroupDistTable",
    "BinCode",
    "FragmentIndex",
    "default_partition",
    "parse_partition",
    "group_dist_table",
    "bin_code",
    "build_index",
    "cylinder_lb",
    "enumerate_bins",
    "range_search",
    "knn",
]

# Alphabet groups used for the peptide index: neutral/polar, aliphatic,
# charged, aromatic, special.  Read off the block structure of the
# BLOSUM62-derived distance table.
DEFAULT_GROUPS = ("TSAN", "IVLM", "KRDEQ", "WFYH", "GPC")


@dataclass(frozen=True)
class Partition:
    """Disjoint non-empty symbol groups; group order is significant."""

    groups: tuple[str, ...]

    def __post_init__(self):
        if len(self.groups) < 2:
            raise ValueError("a partition needs at least two groups")
        seen: dict[str, int] = {}
        for g, syms in enumerate(self.groups):
            if not syms:
                raise ValueError(f"group {g} is empty")
            for s in syms:
                if s in seen:
                    raise ValueError(f"symbol {s!r} appears in groups {seen[s]} and {g}")
                seen[s] = g
        object.__setattr__(self, "_group_of", seen)

    @property
    def size(self) -> int:
        return len(self.groups)

    def group_of(self, symbol: str) -> int:
        try:
            return self._group_of[symbol]
        except KeyError:
            raise ValueError(f"symbol {symbol!r} not covered by the partition") from None

    def symbols(self) -> set[str]:
        return set(self._group_of)


def default_partition() -> Partition:
    return Partition(DEFAULT_GROUPS)


def parse_partition(text: str) -> Partition:
    """One line per group, symbols concatenated (blank lines and # comments skipped)."""
    groups = [line.strip() for line in text.splitlines()
              if line.strip() and not line.lstrip().startswith("#")]
    return Partition(tuple(groups))


@dataclass(frozen=True)
class GroupDistTable:
    """Precomputed left distances from each symbol to each group.

    ``left[a, G] = min over b in G of d(a, b)``, so summing entries over a
    code prefix gives the exact left distance from a string to the cylinder.
    """

    alphabet: Alphabet
    partition: Partition
    left: np.ndarray       # (|alphabet|, n_groups) int64
    group_of_ord: np.ndarray  # (|alphabet|,) uint8

    def __post_init__(self):
        self.left.setflags(write=False)
        self.group_of_ord.setflags(write=False)


def group_dist_table(qm: SymbolQuasiMetric, partition: Partition) -> GroupDistTable:
    alphabet = qm.alphabet
    if partition.symbols() != set(alphabet.symbols):
        extra = partition.symbols() - set(alphabet.symbols)
        missing = set(alphabet.symbols) - partition.symbols()
        raise ValueError(
            f"partition does not match alphabet (extra {sorted(extra)}, "
            f"missing {sorted(missing)})")
    n = len(alphabet)
    g = partition.size
    left = np.empty((n, g), dtype=np.int64)
    group_of_ord = np.empty(n, dtype=np.uint8)
    for gi, syms in enumerate(partition.groups):
        cols = [alphabet.index_of[s] for s in syms]
        left[:, gi] = qm.table[:, cols].min(axis=1)
        for s in syms:
            group_of_ord[alphabet.index_of[s]] = gi
    return GroupDistTable(alphabet, partition, left, group_of_ord)


@dataclass(frozen=True)
class BinCode:
    """Sequence of group ordinals with its canonical base-``base`` value.

    Digit 0 is the most significant, so the integer order of values equals
    the lexicographic order of digit strings.
    """

    digits: tuple[int, ...]
    base: int

    def __post_init__(self):
        if any(d < 0 or d >= self.base for d in self.digits):
            raise ValueError("digit out of range")

    @property
    def value(self) -> int:
        v = 0
        for d in self.digits:
            v = v * self.base + d
        return v

    @classmethod
    def from_value(cls, value: int, base: int, length: int) -> "BinCode":
        digits = []
        for _ in range(length):
            value, d = divmod(value, base)
            digits.append(d)
        if value:
            raise ValueError("value does not fit in the given length")
        return cls(tuple(reversed(digits)), base)


def bin_code(fragment: str, partition: Partition) -> BinCode:
    return BinCode(tuple(partition.group_of(c) for c in fragment), partition.size)


@dataclass
class FragmentIndex:
    """Deduplicated fragments grouped into contiguous bins by code.

    ``fragments`` holds symbol ordinals row per unique fragment, sorted by
    (bin code, lexicographic); bin ``codes[k]`` occupies rows
    ``starts[k]:starts[k+1]``.  ``counts`` carries occurrence multiplicities
    from the source corpus.
    """

    m: int
    qm: SymbolQuasiMetric
    partition: Partition
    table: GroupDistTable
    fragments: np.ndarray  # (n, m) uint8
    counts: np.ndarray     # (n,) int64
    codes: np.ndarray      # (n_bins,) int64, ascending
    starts: np.ndarray     # (n_bins + 1,) int64

    @property
    def alphabet(self) -> Alphabet:
        return self.qm.alphabet

    @property
    def n_unique(self) -> int:
        return int(self.fragments.shape[0])

    @property
    def total_count(self) -> int:
        return int(self.counts.sum())

    @property
    def n_bins_nonempty(self) -> int:
        return int(self.codes.shape[0])

    @property
    def n_bins_total(self) -> int:
        return self.partition.size ** self.m

    def fragment_str(self, i: int) -> str:
        return self.alphabet.decode(self.fragments[i])

    def encode_query(self, fragment: str) -> np.ndarray:
        if len(fragment) != self.m:
            raise ValueError(f"expected a fragment of length {self.m}, got {len(fragment)}")
        return self.alphabet.encode(fragment)

    def query_lb_table(self, query_ords: np.ndarray) -> np.ndarray:
        """Per-position left distances from the query to every group; (m, g)."""
        return np.ascontiguousarray(self.table.left[query_ords])


def build_index(fragments: Iterable[str] | np.ndarray, partition: Partition,
                qm: SymbolQuasiMetric, counts: Sequence[int] | None = None) -> FragmentIndex:
    """Deduplicate, code, and sort fragments into a bin directory.

    ``fragments`` may be strings or an already-encoded ``(n, m)`` uint8
    array.  Optional ``counts`` carry input multiplicities (summed on
    deduplication); without them every input row counts once.
    """
    table = group_dist_table(qm, partition)
    if isinstance(fragments, np.ndarray):
        arr = np.ascontiguousarray(fragments, dtype=np.uint8)
        if arr.ndim != 2:
            raise ValueError("encoded fragments must be a 2-d array")
    else:
        frag_list = list(fragments)
        if not frag_list:
            raise ValueError("no fragments to index")
        m = len(frag_list[0])
        for f in frag_list:
            if len(f) != m:
                raise ValueError(f"mixed fragment lengths: {len(f)} vs {m}")
        arr = np.empty((len(frag_list), m), dtype=np.uint8)
        for i, f in enumerate(frag_list):
            arr[i] = qm.alphabet.encode(f)
    if arr.shape[0] == 0:
        raise ValueError("no fragments to index")
    n_in, m = arr.shape
    if m < 1:
        raise ValueError("fragment length must be at least 1")
    if arr.max(initial=0) >= len(qm.alphabet):
        raise ValueError("fragment ordinal out of alphabet range")
    g = partition.size
    if g ** m >= 2 ** 62:
        raise ValueError("code space too large for 64-bit bin codes")

    in_counts = (np.ones(n_in, dtype=np.int64) if counts is None
                 else np.asarray(counts, dtype=np.int64))
    if in_counts.shape != (n_in,):
        raise ValueError("counts length does not match fragments")

    uniq, inverse = np.unique(arr, axis=0, return_inverse=True)
    agg = np.zeros(uniq.shape[0], dtype=np.int64)
    np.add.at(agg, inverse.ravel(), in_counts)

    powers = (g ** np.arange(m - 1, -1, -1)).astype(np.int64)
    digits = table.group_of_ord[uniq].astype(np.int64)
    code_vals = digits @ powers
    order = np.argsort(code_vals, kind="stable")  # unique() is lex-sorted already
    uniq = np.ascontiguousarray(uniq[order])
    agg = agg[order]
    code_vals = code_vals[order]

    codes, first = np.unique(code_vals, return_index=True)
    starts = np.append(first, uniq.shape[0]).astype(np.int64)
    return FragmentIndex(m=m, qm=qm, partition=partition, table=table,
                         fragments=uniq, counts=agg,
                         codes=codes.astype(np.int64), starts=starts)


def cylinder_lb(query: str | np.ndarray, prefix: Sequence[int],
                table: GroupDistTable) -> int:
    """Exact left distance from a string to the cylinder fixed by a code prefix.

    Positions are independent, so the distance is the sum over the prefix of
    the per-position group minima; the empty prefix (the whole domain) gives 0.
    """
    ords = table.alphabet.encode(query) if isinstance(query, str) else query
    if len(prefix) > len(ords):
        raise ValueError("prefix longer than the query")
    return int(sum(int(table.left[ords[i], d]) for i, d in enumerate(prefix)))


def _admissible_bins(index: FragmentIndex, query_ords: np.ndarray,
                     eps: int) -> tuple[np.ndarray, np.ndarray, int, int]:
    lbtab = index.query_lb_table(query_ords)
    return kernels.lb_enumerate(lbtab, index.codes, index.partition.size, int(eps))


def enumerate_bins(index: FragmentIndex, query: str, eps: int) -> list[BinCode]:
    """Nonempty bins whose cylinder lower bound is <= eps, in code order."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    pos, _, _, _ = _admissible_bins(index, index.encode_query(query), eps)
    g = index.partition.size
    return [BinCode.from_value(int(index.codes[p]), g, index.m) for p in pos]


def range_search(index: FragmentIndex, query: str, eps: int) -> SearchResult:
    """All fragments within left distance eps of the query, with distances.

    Exact: admitted bins are scanned with the true string distance, and the
    cylinder bound guarantees no bin holding a match is pruned.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    w = index.encode_query(query)
    pos, _, nodes, evals = _admissible_bins(index, w, eps)
    stats = SearchStats(nodes_visited=nodes, decision_evals=evals)
    matches: list[tuple[int, int]] = []
    dtab = index.qm.table
    for p in pos:
        lo, hi = int(index.starts[p]), int(index.starts[p + 1])
        stats.leaves_opened += 1
        stats.points_scanned += hi - lo
        dists = kernels.qdist_scan(dtab, index.fragments[lo:hi], w)
        for off in np.nonzero(dists <= eps)[0]:
            matches.append((lo + int(off), int(dists[off])))
    return SearchResult(matches, stats)


def knn(index: FragmentIndex, query: str, k: int) -> SearchResult:
    """The k nearest fragments by left distance; best-first over the prefix tree.

    Prefix nodes are expanded in order of their cylinder lower bound, which
    is an exact left distance to the cylinder, so the search stops as soon
    as the smallest outstanding bound exceeds the current k-th best distance
    and never misses a closer point.  Ties at the k-th distance are resolved
    towards smaller (bin code, lexicographic) fragments; results are sorted
    by (distance, code, lex).
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    w = index.encode_query(query)
    lbtab = index.query_lb_table(w)
    g = index.partition.size
    m = index.m
    codes = index.codes
    starts = index.starts
    dtab = index.qm.table
    stats = SearchStats()

    # frontier entries: (lb, code_lo, depth, dir_lo, dir_hi)
    frontier: list[tuple[int, int, int, int, int]] = [(0, 0, 0, 0, len(codes))]
    # current best: max-heap over (dist, row) via negation
    best: list[tuple[int, int]] = []

    def worst() -> tuple[int, int]:
        d, r = best[0]
        return -d, -r

    while frontier:
        lb, code_lo, depth, lo, hi = heapq.heappop(frontier)
        if len(best) == k and lb > worst()[0]:
            break
        stats.nodes_visited += 1
        if depth == m:
            # a full-length prefix covers exactly one directory entry
            row_lo, row_hi = int(starts[lo]), int(starts[lo + 1])
            stats.leaves_opened += 1
            stats.points_scanned += row_hi - row_lo
            dists = kernels.qdist_scan(dtab, index.fragments[row_lo:row_hi], w)
            for off in range(row_hi - row_lo):
                cand = (int(dists[off]), row_lo + off)
                if len(best) < k:
                    heapq.heappush(best, (-cand[0], -cand[1]))
                elif cand < worst():
                    heapq.heapreplace(best, (-cand[0], -cand[1]))
            continue
        step = g ** (m - depth - 1)
        sub_lo = lo
        for d in range(g):
            child_code = code_lo + d * step
            sub_hi = int(np.searchsorted(codes[sub_lo:hi], child_code + step)) + sub_lo
            if sub_hi > sub_lo:
                stats.decision_evals += 1
                child_lb = lb + int(lbtab[depth, d])
                if len(best) < k or child_lb <= worst()[0]:
                    heapq.heappush(frontier,
                                   (child_lb, child_code, depth + 1, sub_lo, sub_hi))
            sub_lo = sub_hi

    ranked = sorted((-nd, -nr) for nd, nr in best)  # ascending (dist, row)
    return SearchResult([(row, dist) for dist, row in ranked], stats)
