"""Greedy refinement of word partitions driven by a distance between chains."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

from .ck import ck_approx
from .dynamics import DynamicalSystem
from .errors import DegenerateAlphabet, PastWordUnsupported
from .estimation import EstimationConfig, estimate_from_sample, sample_paths, word_counts
from .markov import LabeledMarkovChain
from .symbolic import Partition, TimedWord

STRATEGIES = ("future", "past", "lookahead")


@dataclass(frozen=True)
class ChainMetric:
    """Distance between chains that only looks at their label-word laws."""

    name: str
    fn: Callable[[LabeledMarkovChain, LabeledMarkovChain], float]

    def __call__(self, chain1, chain2) -> float:
        return self.fn(chain1, chain2)


def ck_metric(epsilon: float = 1e-3) -> ChainMetric:
    return ChainMetric(f"ck(eps={epsilon:g})", lambda a, b: ck_approx(a, b, epsilon).value)


def split_block(partition: Partition, i: int) -> Partition:
    """Replace word ``i`` by its one-letter future extensions, in place."""
    w = partition.words[i]
    if not w.is_future_only():
        raise PastWordUnsupported(f"cannot extend {w} into the future: it carries past letters")
    ext = tuple(w.extend(a) for a in range(partition.alphabet_size))
    return Partition(partition.words[:i] + ext + partition.words[i + 1:], partition.alphabet_size)


@dataclass(frozen=True)
class Candidate:
    block: TimedWord
    partition: Partition
    chain: LabeledMarkovChain
    dropped: tuple[TimedWord, ...]
    escaped: int
    value: float


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    blocks: tuple[TimedWord, ...]
    values: tuple[float, ...]
    dropped: tuple[tuple[TimedWord, ...], ...]  # per candidate
    chosen: int
    n_states: int

    @property
    def chosen_dropped(self) -> tuple[TimedWord, ...]:
        return self.dropped[self.chosen]


@dataclass
class RefineReport:
    metric: str
    n_samples: int
    master_seed: int
    initial_dropped: tuple[TimedWord, ...]
    iterations: list[IterationRecord] = field(default_factory=list)
    partitions: list[Partition] = field(default_factory=list)  # after init, then per iteration
    partition: Partition | None = None
    chain: LabeledMarkovChain | None = None

    @property
    def dropped(self) -> tuple[TimedWord, ...]:
        """Every word removed as empty, initial letters included."""
        out = list(self.initial_dropped)
        for rec in self.iterations:
            out.extend(rec.chosen_dropped)
        return tuple(out)

    def dropped_until(self, n: int) -> tuple[TimedWord, ...]:
        out = list(self.initial_dropped)
        for rec in self.iterations[:n]:
            out.extend(rec.chosen_dropped)
        return tuple(out)

    def drop_explanations(self) -> list[str]:
        lines = [f"init: letter {w} never observed at time 0" for w in self.initial_dropped]
        for rec in self.iterations:
            for w in rec.chosen_dropped:
                lines.append(f"iteration {rec.iteration}: word {w} never observed "
                             f"(count <= zero_threshold) after splitting {rec.blocks[rec.chosen]}")
        return lines


def _estimate_candidate(system, partition, cfg, stream):
    """Sample once, drop unobserved words, estimate on the rest."""
    return _estimate_on(sample_paths(system, partition.words, cfg, stream), partition, cfg)


def _estimate_on(sample, partition, cfg):
    counts = word_counts(sample, partition.words)
    dropped = tuple(w for w, c in zip(partition.words, counts) if c <= cfg.zero_threshold)
    kept = partition.without(dropped)
    if len(kept) == 0:
        raise DegenerateAlphabet("every word was dropped as unobserved")
    chain, table = estimate_from_sample(sample, kept, cfg.zero_threshold)
    return kept, chain, dropped, int(table.escaped.sum())


def refine(system: DynamicalSystem, metric: ChainMetric, n_iterations: int, cfg: EstimationConfig,
           strategy: str = "future", workers: int = 1, sampling: str = "candidate") -> RefineReport:
    """Greedy refinement for ``n_iterations`` rounds starting from single letters.

    Each round tries splitting every block, estimates each candidate from fresh
    traces seeded by ``(master_seed, round, block)``, and keeps the candidate
    farthest from the current chain (lowest block index on ties).

    ``sampling="iteration"`` instead draws one trace set per round, seeded by
    ``(master_seed, round)``, shared by all candidates and by a re-estimate of
    the current chain, so candidate distances differ by structure rather than
    by sampling noise.
    """
    if sampling not in ("candidate", "iteration"):
        raise ValueError(f"unknown sampling mode {sampling!r}")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy != "future":
        raise NotImplementedError(f"refinement strategy {strategy!r} is not implemented")
    if n_iterations < 0:
        raise ValueError("n_iterations must be nonnegative")

    start = Partition.letters(system.alphabet_size)
    partition, chain, initial_dropped, _ = _estimate_candidate(system, start, cfg, (0, 0))
    report = RefineReport(metric.name, cfg.n_samples, cfg.master_seed, initial_dropped)
    report.partitions.append(partition)

    for n in range(1, n_iterations + 1):
        current, shared = chain, None
        if sampling == "iteration":
            words = {w for i in range(len(partition)) for w in split_block(partition, i).words}
            shared = sample_paths(system, words, cfg, (n,))
            current = _estimate_on(shared, partition, cfg)[1]

        def evaluate(i, partition=partition, current=current, n=n, shared=shared):
            split = split_block(partition, i)
            if shared is None:
                kept, cand, dropped, escaped = _estimate_candidate(system, split, cfg, (n, i))
            else:
                kept, cand, dropped, escaped = _estimate_on(shared, split, cfg)
            return Candidate(partition.words[i], kept, cand, dropped, escaped, metric(current, cand))

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                candidates = list(pool.map(evaluate, range(len(partition))))
        else:
            candidates = [evaluate(i) for i in range(len(partition))]
        values = [c.value for c in candidates]
        j = max(range(len(values)), key=lambda i: (values[i], -i))
        best = candidates[j]
        partition, chain = best.partition, best.chain
        report.iterations.append(IterationRecord(
            n, tuple(c.block for c in candidates), tuple(values),
            tuple(c.dropped for c in candidates), j, len(partition)))
        report.partitions.append(partition)

    report.partition = partition
    report.chain = chain
    return report
