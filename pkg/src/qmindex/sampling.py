"""Seeded generation of synthetic fragment corpora and query probes.

Every sampler takes an explicit ``numpy.random.Generator``; identical seeds
give identical corpora, which the CLI and the test suites rely on for
byte-deterministic outputs.
"""

from __future__ import annotations

import numpy as np

from .matrix import Alphabet

__all__ = [
    "uniform_fragments",
    "weighted_fragments",
    "clustered_fragments",
    "parse_frequency_file",
]


def uniform_fragments(rng: np.random.Generator, n: int, m: int,
                      n_symbols: int) -> np.ndarray:
    """n fragments of length m with i.i.d. uniform symbols; (n, m) uint8."""
    return rng.integers(0, n_symbols, size=(n, m), dtype=np.int64).astype(np.uint8)


def weighted_fragments(rng: np.random.Generator, n: int, m: int,
                       probs: np.ndarray) -> np.ndarray:
    """Fragments with i.i.d. symbols drawn from a per-symbol distribution."""
    probs = np.asarray(probs, dtype=np.float64)
    probs = probs / probs.sum()
    return rng.choice(len(probs), size=(n, m), p=probs).astype(np.uint8)


def clustered_fragments(rng: np.random.Generator, n: int, m: int,
                        n_symbols: int, n_seeds: int = 20,
                        max_mutations: int = 3) -> np.ndarray:
    """Fragments concentrated around random seed fragments.

    Each output row copies a random seed and rewrites a few random positions;
    the result is a corpus with pronounced bin-occupancy skew.
    """
    seeds = uniform_fragments(rng, n_seeds, m, n_symbols)
    pick = rng.integers(0, n_seeds, size=n)
    out = seeds[pick].copy()
    n_mut = rng.integers(0, max_mutations + 1, size=n)
    for i in range(n):
        for pos in rng.integers(0, m, size=int(n_mut[i])):
            out[i, pos] = rng.integers(0, n_symbols)
    return out


def parse_frequency_file(text: str, alphabet: Alphabet) -> np.ndarray:
    """Parse ``SYMBOL probability`` lines into a per-ordinal weight vector.

    Unlisted symbols get weight 0; weights are normalized by the caller.
    """
    probs = np.zeros(len(alphabet), dtype=np.float64)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'SYMBOL probability'")
        sym, val = parts
        if sym not in alphabet.index_of:
            raise ValueError(f"line {lineno}: unknown symbol {sym!r}")
        try:
            probs[alphabet.index_of[sym]] = float(val)
        except ValueError:
            raise ValueError(f"line {lineno}: bad probability {val!r}") from None
    if probs.sum() <= 0:
        raise ValueError("frequencies sum to zero")
    return probs
