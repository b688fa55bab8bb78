"""Integer scoring matrices and the quasi-metrics derived from them.

A scoring matrix assigns an integer similarity score ``s(a, b)`` to every
ordered pair of alphabet symbols.  Subtracting each row from its diagonal,
``d(a, b) = s(a, a) - s(a, b)``, turns a matrix of the BLOSUM family into a
quasi-metric on the alphabet: distances are nonnegative, vanish exactly on
the diagonal, satisfy the triangle inequality, but are generally asymmetric.
All distance arithmetic in this package is exact integer arithmetic in score
points.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

__all__ = [
    "Alphabet",
    "ScoringMatrix",
    "SymbolQuasiMetric",
    "SymbolMetric",
    "MatrixParseError",
    "QuasiMetricAxiomError",
    "parse_scoring_matrix",
    "derive_symbol_quasimetric",
    "string_qdist",
    "associated_metric",
    "load_blosum62",
]


class MatrixParseError(ValueError):
    """Malformed scoring-matrix text; the message names the offending line."""


class QuasiMetricAxiomError(ValueError):
    """A derived distance table violates a quasi-metric axiom.

    Carries a witness: the symbols involved and the offending values.
    """

    def __init__(self, message: str, witness: tuple):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class Alphabet:
    """An ordered alphabet of distinct single-character symbols."""

    symbols: tuple[str, ...]
    index_of: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("duplicate symbols in alphabet")
        for sym in self.symbols:
            if len(sym) != 1:
                raise ValueError(f"alphabet symbols must be single characters, got {sym!r}")
        object.__setattr__(self, "index_of", {s: i for i, s in enumerate(self.symbols)})

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, sym: str) -> bool:
        return sym in self.index_of

    def encode(self, text: str) -> np.ndarray:
        """Map a symbol string to an array of ordinals (uint8)."""
        try:
            return np.array([self.index_of[c] for c in text], dtype=np.uint8)
        except KeyError as exc:
            raise ValueError(f"symbol {exc.args[0]!r} not in alphabet") from None

    def decode(self, ordinals: Iterable[int]) -> str:
        return "".join(self.symbols[i] for i in ordinals)


@dataclass(frozen=True)
class ScoringMatrix:
    """Integer similarity scores over an alphabet; ``scores[i, j] = s(a_i, a_j)``."""

    alphabet: Alphabet
    scores: np.ndarray

    def __post_init__(self):
        n = len(self.alphabet)
        if self.scores.shape != (n, n):
            raise ValueError("score table shape does not match alphabet size")
        object.__setattr__(self, "scores", np.ascontiguousarray(self.scores, dtype=np.int64))
        self.scores.setflags(write=False)

    def score(self, a: str, b: str) -> int:
        idx = self.alphabet.index_of
        return int(self.scores[idx[a], idx[b]])


@dataclass(frozen=True)
class SymbolQuasiMetric:
    """A validated quasi-metric distance table over an alphabet.

    Construct through :func:`derive_symbol_quasimetric`; the constructor
    checks all three axioms exhaustively (|alphabet|**3 triples) and refuses
    invalid tables, so a live instance is always a genuine quasi-metric.
    """

    alphabet: Alphabet
    table: np.ndarray

    def __post_init__(self):
        n = len(self.alphabet)
        if self.table.shape != (n, n):
            raise ValueError("distance table shape does not match alphabet size")
        object.__setattr__(self, "table", np.ascontiguousarray(self.table, dtype=np.int64))
        self.table.setflags(write=False)
        _validate_quasimetric(self.table, self.alphabet)

    def dist(self, a: str, b: str) -> int:
        idx = self.alphabet.index_of
        return int(self.table[idx[a], idx[b]])

    @property
    def max_entry(self) -> int:
        return int(self.table.max())

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))


@dataclass(frozen=True)
class SymbolMetric:
    """A symmetric majorant of a symbol quasi-metric (entrywise max or sum)."""

    alphabet: Alphabet
    table: np.ndarray
    mode: str

    def __post_init__(self):
        if self.mode not in ("max", "sum"):
            raise ValueError(f"mode must be 'max' or 'sum', got {self.mode!r}")
        object.__setattr__(self, "table", np.ascontiguousarray(self.table, dtype=np.int64))
        self.table.setflags(write=False)
        if not np.array_equal(self.table, self.table.T):
            raise ValueError("metric table is not symmetric")

    def dist(self, a: str, b: str) -> int:
        idx = self.alphabet.index_of
        return int(self.table[idx[a], idx[b]])


def parse_scoring_matrix(text: str) -> ScoringMatrix:
    """Parse whitespace-separated scoring-matrix text.

    Layout: optional ``#`` comment lines, a header row of column symbols,
    then one ``SYMBOL v1 ... vN`` row per symbol.  Row and column symbol
    sets must be identical; the file order defines the alphabet order.
    """
    header: list[str] | None = None
    rows: dict[str, list[int]] = {}
    row_order: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            for sym in parts:
                if len(sym) != 1:
                    raise MatrixParseError(
                        f"line {lineno}: header symbol {sym!r} is not a single character")
            if len(set(parts)) != len(parts):
                raise MatrixParseError(f"line {lineno}: duplicate symbol in header")
            header = parts
            continue
        label, *cells = parts
        if label in rows:
            raise MatrixParseError(f"line {lineno}: repeated row label {label!r}")
        if len(cells) != len(header):
            raise MatrixParseError(
                f"line {lineno}: expected {len(header)} values, got {len(cells)}")
        try:
            rows[label] = [int(c) for c in cells]
        except ValueError:
            raise MatrixParseError(f"line {lineno}: non-integer cell") from None
        row_order.append(label)
    if header is None:
        raise MatrixParseError("no header row found")
    if set(row_order) != set(header):
        missing = set(header) ^ set(row_order)
        raise MatrixParseError(f"row and column symbol sets differ: {sorted(missing)}")

    alphabet = Alphabet(tuple(header))
    scores = np.empty((len(header), len(header)), dtype=np.int64)
    for sym in row_order:
        i = alphabet.index_of[sym]
        for s, v in zip(header, rows[sym]):
            scores[i, alphabet.index_of[s]] = v
    return ScoringMatrix(alphabet, scores)


def _validate_quasimetric(d: np.ndarray, alphabet: Alphabet) -> None:
    syms = alphabet.symbols
    diag = np.diagonal(d)
    if np.any(diag != 0):
        i = int(np.nonzero(diag)[0][0])
        raise QuasiMetricAxiomError(
            f"d({syms[i]},{syms[i]}) = {int(diag[i])} != 0", (syms[i],))
    off = d.copy()
    np.fill_diagonal(off, 1)
    if np.any(off <= 0):
        i, j = map(int, np.argwhere(off <= 0)[0])
        raise QuasiMetricAxiomError(
            f"d({syms[i]},{syms[j]}) = {int(d[i, j])} must be positive for distinct symbols",
            (syms[i], syms[j]))
    # Triangle inequality over all |alphabet|**3 triples at once.
    through = d[:, :, None] + d[None, :, :]          # [a, b, c] = d(a,b) + d(b,c)
    direct = d[:, None, :]                           # [a, _, c] = d(a,c)
    bad = np.argwhere(direct > through)
    if bad.size:
        a, b, c = map(int, bad[0])
        raise QuasiMetricAxiomError(
            f"triangle violated: d({syms[a]},{syms[c]}) = {int(d[a, c])} > "
            f"d({syms[a]},{syms[b]}) + d({syms[b]},{syms[c]}) = {int(d[a, b] + d[b, c])}",
            (syms[a], syms[b], syms[c]))


def derive_symbol_quasimetric(matrix: ScoringMatrix) -> SymbolQuasiMetric:
    """Derive ``d(a, b) = s(a, a) - s(a, b)`` and validate it exhaustively.

    Raises :class:`QuasiMetricAxiomError` with a witness when the matrix is
    not of the kind that yields a quasi-metric (most non-BLOSUM matrices).
    """
    s = matrix.scores
    d = np.diagonal(s)[:, None] - s
    return SymbolQuasiMetric(matrix.alphabet, d)


def string_qdist(x: str, y: str, qm: SymbolQuasiMetric) -> int:
    """Positionwise sum of symbol distances between equal-length strings."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    idx = qm.alphabet.index_of
    t = qm.table
    try:
        return int(sum(t[idx[a], idx[b]] for a, b in zip(x, y)))
    except KeyError as exc:
        raise ValueError(f"symbol {exc.args[0]!r} not in alphabet") from None


def associated_metric(qm: SymbolQuasiMetric, mode: str = "max") -> SymbolMetric:
    """Symmetrize a quasi-metric by entrywise max or sum.

    Either choice majorizes the source table entrywise, so metric balls of a
    given radius never lose quasi-metric hits of the same radius.  No
    rescaling is applied; the mode is recorded on the result.
    """
    if mode == "max":
        table = np.maximum(qm.table, qm.table.T)
    elif mode == "sum":
        table = qm.table + qm.table.T
    else:
        raise ValueError(f"mode must be 'max' or 'sum', got {mode!r}")
    return SymbolMetric(qm.alphabet, table, mode)


def blosum62_text() -> str:
    """Raw text of the vendored BLOSUM62 matrix (20 standard amino acids)."""
    return importlib.resources.files("qmindex.data").joinpath("blosum62.txt").read_text()


def load_blosum62() -> ScoringMatrix:
    """Parse the vendored BLOSUM62 matrix."""
    return parse_scoring_matrix(blosum62_text())
