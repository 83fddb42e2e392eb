"""Labeled Markov chains and the label-word distributions they induce."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .symbolic import TimedWord

STOCHASTIC_TOL = 1e-9
# slack so that a sum exactly 1e-9 away, after rounding, still passes
_TOL = STOCHASTIC_TOL * (1 + 1e-6)


@dataclass(frozen=True, eq=False)
class LabeledMarkovChain:
    """States ``0..n-1`` with transition matrix ``tau``, initial law ``mu`` and labels."""

    tau: np.ndarray
    mu: np.ndarray
    labels: np.ndarray
    alphabet_size: int
    state_names: tuple[TimedWord, ...] | None = None
    _masks: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        tau = np.array(self.tau, dtype=float)
        mu = np.array(self.mu, dtype=float)
        labels = np.array(self.labels, dtype=np.int64)
        n = mu.shape[0]
        if tau.shape != (n, n) or labels.shape != (n,):
            raise ValueError("tau must be n x n and labels of length n")
        if n and (labels.min() < 0 or labels.max() >= self.alphabet_size):
            raise ValueError("labels outside the alphabet")
        if self.state_names is not None and len(self.state_names) != n:
            raise ValueError("one state name per state")
        masks = (labels[None, :] == np.arange(self.alphabet_size)[:, None]).astype(float)
        for name, value in (("tau", tau), ("mu", mu), ("labels", labels), ("_masks", masks)):
            value.flags.writeable = False
            object.__setattr__(self, name, value)

    @property
    def n_states(self) -> int:
        return self.mu.shape[0]

    @property
    def masks(self) -> np.ndarray:
        """``masks[a, s] = 1`` when state ``s`` carries label ``a``."""
        return self._masks

    def __eq__(self, other):
        if not isinstance(other, LabeledMarkovChain):
            return NotImplemented
        return (self.alphabet_size == other.alphabet_size
                and np.array_equal(self.tau, other.tau)
                and np.array_equal(self.mu, other.mu)
                and np.array_equal(self.labels, other.labels)
                and self.state_names == other.state_names)


@dataclass(frozen=True, eq=False)
class ForwardMass:
    """Unnormalised state occupancy after emitting ``word``; sums to ``p(word)``."""

    word: tuple[int, ...]
    alpha: np.ndarray

    @property
    def probability(self) -> float:
        return float(self.alpha.sum())


def initial_mass(chain: LabeledMarkovChain, a: int) -> ForwardMass:
    return ForwardMass((a,), chain.mu * chain.masks[a])


def extend_mass(chain: LabeledMarkovChain, m: ForwardMass, a: int) -> ForwardMass:
    return ForwardMass(m.word + (a,), (m.alpha @ chain.tau) * chain.masks[a])


def word_probability(chain: LabeledMarkovChain, w: Sequence[int]) -> float:
    if len(w) == 0:
        return 1.0
    m = initial_mass(chain, w[0])
    for a in w[1:]:
        m = extend_mass(chain, m, a)
    return m.probability


def in_behaviour(chain: LabeledMarkovChain, w: Sequence[int]) -> bool:
    return word_probability(chain, w) > 0.0


def word_distribution(chain: LabeledMarkovChain, k: int) -> dict[tuple[int, ...], float]:
    """Full table of ``p^k`` over all ``|A|**k`` words, by level-wise tabulation."""
    q = chain.alphabet_size
    alpha = chain.masks * chain.mu  # row a: occupancy after emitting "a"
    words = [(a,) for a in range(q)]
    for _ in range(k - 1):
        nxt = alpha @ chain.tau
        alpha = (nxt[:, None, :] * chain.masks[None, :, :]).reshape(-1, chain.n_states)
        words = [w + (a,) for w in words for a in range(q)]
    return dict(zip(words, alpha.sum(axis=1).tolist()))


def path_enumeration_distribution(chain: LabeledMarkovChain, k: int) -> dict[tuple[int, ...], float]:
    """``p^k`` by summing the probability of every state path; exponential, tests only."""
    dist = {w: 0.0 for w in itertools.product(range(chain.alphabet_size), repeat=k)}
    for path in itertools.product(range(chain.n_states), repeat=k):
        p = chain.mu[path[0]]
        for s, t in zip(path, path[1:]):
            p *= chain.tau[s, t]
        dist[tuple(int(chain.labels[s]) for s in path)] += p
    return dist


def validate(chain: LabeledMarkovChain) -> list[str]:
    """Violations of row-stochasticity and of ``mu`` being a probability vector."""
    problems = []
    tau, mu = chain.tau, chain.mu
    if np.any(tau < 0):
        problems.append(f"tau has negative entries (min {tau.min():.3g})")
    rows = tau.sum(axis=1)
    for s in np.flatnonzero(np.abs(rows - 1.0) > _TOL):
        problems.append(f"row {s} of tau sums to {rows[s]!r}")
    if np.any(mu < 0):
        problems.append(f"mu has negative entries (min {mu.min():.3g})")
    if abs(mu.sum() - 1.0) > _TOL:
        problems.append(f"mu sums to {mu.sum()!r}")
    if not np.all(np.isfinite(tau)) or not np.all(np.isfinite(mu)):
        problems.append("non-finite entries")
    return problems


def random_chain(rng: np.random.Generator, n_states: int, alphabet_size: int,
                 sparsity: float = 0.0) -> LabeledMarkovChain:
    """Random chain for property tests; ``sparsity`` zeroes that fraction of entries."""
    tau = rng.random((n_states, n_states))
    mu = rng.random(n_states)
    if sparsity:
        tau[rng.random(tau.shape) < sparsity] = 0.0
        mu[rng.random(n_states) < sparsity] = 0.0
    for s in range(n_states):
        if tau[s].sum() == 0:
            tau[s, rng.integers(n_states)] = 1.0
    if mu.sum() == 0:
        mu[rng.integers(n_states)] = 1.0
    tau /= tau.sum(axis=1, keepdims=True)
    mu /= mu.sum()
    labels = rng.integers(alphabet_size, size=n_states)
    return LabeledMarkovChain(tau, mu, labels, alphabet_size)
