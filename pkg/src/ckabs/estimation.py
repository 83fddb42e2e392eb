"""Monte-Carlo estimation of adaptive-memory abstractions from sampled traces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dynamics import DynamicalSystem, sample_label_paths
from .errors import AbstractionError, EmptyBlock
from .markov import LabeledMarkovChain
from .symbolic import Partition, TimedWord, assign_blocks, word


@dataclass(frozen=True)
class EstimationConfig:
    n_samples: int = 100_000
    master_seed: int = 0
    zero_threshold: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.n_samples < 0 or self.zero_threshold < 0 or self.master_seed < 0:
            raise ValueError("n_samples, zero_threshold and master_seed must be nonnegative")
        if self.n_samples and self.zero_threshold >= self.n_samples:
            raise ValueError("zero_threshold must be below n_samples")
        if self.threads < 1:
            raise ValueError("threads must be positive")


@dataclass(frozen=True)
class SampledPaths:
    """Label paths with column ``anchor`` at time 0."""

    paths: np.ndarray
    anchor: int

    @property
    def n(self) -> int:
        return self.paths.shape[0]


@dataclass(frozen=True)
class CountTable:
    """Block visits at time 0 and time-0 -> time-1 block transitions.

    ``escaped[i]`` counts traces starting in block ``i`` whose shifted trace
    fell in no block (its label path belongs to a word dropped as empty);
    ``uncovered`` counts traces in no block at time 0. Both are left out of
    the frequencies.
    """

    words: tuple[TimedWord, ...]
    initial: np.ndarray
    transitions: np.ndarray
    escaped: np.ndarray
    n_samples: int
    uncovered: int = 0


def sample_paths(system: DynamicalSystem, words: Iterable, cfg: EstimationConfig,
                 stream: Sequence[int] = (), shift: int = 1) -> SampledPaths:
    """Sample ``cfg.n_samples`` traces spanning every word, plus ``shift`` extra steps."""
    words = [word(w) for w in words]
    past = max((w.past for w in words), default=0)
    future = max((w.future for w in words), default=0) + shift
    key = (cfg.master_seed, *stream)
    paths = sample_label_paths(system, cfg.n_samples, past, future, key, cfg.threads)
    return SampledPaths(paths, past)


def word_counts(sample: SampledPaths, words: Iterable) -> np.ndarray:
    counts = []
    for w in map(word, words):
        lo, hi = sample.anchor - w.past, sample.anchor + w.future + 1
        counts.append(int(np.all(sample.paths[:, lo:hi] == np.asarray(w.letters), axis=1).sum()))
    return np.array(counts, dtype=np.int64)


def count_table(sample: SampledPaths, partition: Partition) -> CountTable:
    n_words = len(partition)
    start = assign_blocks(sample.paths, sample.anchor, partition)
    nxt = assign_blocks(sample.paths, sample.anchor + 1, partition)
    covered = start >= 0
    uncovered = int((~covered).sum())
    start, nxt = start[covered], nxt[covered]
    initial = np.bincount(start, minlength=n_words)
    ok = nxt >= 0
    transitions = np.zeros((n_words, n_words), dtype=np.int64)
    np.add.at(transitions, (start[ok], nxt[ok]), 1)
    escaped = np.bincount(start[~ok], minlength=n_words)
    return CountTable(partition.words, initial, transitions, escaped, sample.n, uncovered)


def chain_from_counts(table: CountTable, alphabet_size: int) -> LabeledMarkovChain:
    witnessed = table.transitions.sum(axis=1)
    if np.any(witnessed == 0):
        bad = [table.words[i] for i in np.flatnonzero(witnessed == 0)]
        raise AbstractionError(f"no transition witnessed out of blocks {[str(w) for w in bad]}")
    mu = table.initial / table.initial.sum()
    tau = table.transitions / witnessed[:, None]
    labels = [w.anchor for w in table.words]
    return LabeledMarkovChain(tau, mu, labels, alphabet_size, tuple(table.words))


def estimate_from_sample(sample: SampledPaths, partition: Partition,
                         zero_threshold: int = 0) -> tuple[LabeledMarkovChain, CountTable]:
    table = count_table(sample, partition)
    empty = [w for w, c in zip(partition.words, table.initial) if c <= zero_threshold]
    if empty:
        raise EmptyBlock(empty)
    return chain_from_counts(table, partition.alphabet_size), table


def estimate_abstraction(system: DynamicalSystem, partition: Partition, cfg: EstimationConfig,
                         stream: Sequence[int] = ()) -> LabeledMarkovChain:
    """Frequency estimate of the abstraction on ``partition``.

    ``mu`` is the fraction of traces in each block at time 0 and ``tau`` the
    fraction of those whose trace shifted by one step lies in each block.
    """
    sample = sample_paths(system, partition.words, cfg, stream)
    return estimate_from_sample(sample, partition, cfg.zero_threshold)[0]


def observed_zero_words(system: DynamicalSystem, candidate_words: Iterable, cfg: EstimationConfig,
                        stream: Sequence[int] = ()) -> list[TimedWord]:
    """Candidates seen at most ``cfg.zero_threshold`` times among fresh traces."""
    candidates = [word(w) for w in candidate_words]
    if not candidates:
        return []
    if cfg.n_samples == 0:
        return candidates
    sample = sample_paths(system, candidates, cfg, stream, shift=0)
    counts = word_counts(sample, candidates)
    return [w for w, c in zip(candidates, counts) if c <= cfg.zero_threshold]
