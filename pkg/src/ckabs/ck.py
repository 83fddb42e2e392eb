"""Cantor-Kantorovich distance between labeled Markov chains.

The transport problem over length-``k`` words with the Cantor ground distance
collapses to the level overlaps

    S_l = sum_{w in A^l} min(p1(w), p2(w)),

through ``K^k = 1 - sum_{l<k} 2**-l S_l - 2**(1-k) S_k`` (obtained by
unrolling ``K^{l+1} = K^l + 2**-l (S_l - S_{l+1})`` from ``K^1 = 1 - S_1``).
The overlaps come from a walk over the word tree that carries one forward
mass vector per chain and prunes every word with ``min(p1, p2) = 0``: all of
its extensions then have zero overlap too. The value is accumulated from the
gaps ``D_l = 1 - S_l``, which keeps ``K(G, G)`` exactly 0 in floating point.

:func:`kantorovich_lp_oracle` solves the same transport problem directly and
serves as the independent cross-check.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import AlphabetMismatch, TooLarge
from .markov import LabeledMarkovChain, word_distribution
from .symbolic import common_prefix_length

ORACLE_MAX_WORDS = 4096

#: Frontier rows expanded at once; larger frontiers are split and walked
#: depth-first, bounding memory by ``depth * FRONTIER_CAP * |A|`` rows.
FRONTIER_CAP = 1 << 15


@dataclass(frozen=True)
class LevelOverlap:
    sums: np.ndarray  # sums[l-1] = S_l
    nodes_per_level: np.ndarray  # words with positive overlap at each level
    gaps: np.ndarray  # gaps[l-1] = D_l = (1/2) sum_w |p1(w) - p2(w)|, i.e. 1 - S_l

    @property
    def nodes_visited(self) -> int:
        return int(self.nodes_per_level.sum())


class _Tally:
    """Per-level partial sums, merged with exact summation at the end.

    A pruned word keeps contributing its whole mass to ``2 D_l`` at every
    deeper level, since all its extensions are matched against zero.
    """

    def __init__(self, k_max):
        self.k_max = k_max
        self.overlap = [[] for _ in range(k_max)]
        self.diff = [[] for _ in range(k_max)]
        self.pruned = [[] for _ in range(k_max)]
        self.counts = np.zeros(k_max, dtype=np.int64)

    def result(self) -> LevelOverlap:
        sums = np.array([math.fsum(s) for s in self.overlap])
        gaps, carried = [], []
        for l in range(self.k_max):
            gaps.append(0.5 * math.fsum(self.diff[l] + carried))
            carried = carried + self.pruned[l]
        return LevelOverlap(sums, self.counts, np.array(gaps))


@dataclass(frozen=True)
class CkResult:
    value: float
    k_used: int
    lower: float
    upper: float
    nodes_visited: int
    level_sums: tuple[float, ...] = ()


def depth_for_accuracy(epsilon: float) -> int:
    """Smallest word length whose truncation error is at most ``epsilon``."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    k = math.ceil(math.log2(1.0 / epsilon))
    # guard the float log against landing one above an exact power of two
    if 2.0 ** (k - 1) >= 1.0 / epsilon:
        k -= 1
    return k + 1


def _check_alphabets(chain1, chain2):
    if chain1.alphabet_size != chain2.alphabet_size:
        raise AlphabetMismatch(
            f"alphabets differ: {chain1.alphabet_size} vs {chain2.alphabet_size}")


def level_overlap(chain1: LabeledMarkovChain, chain2: LabeledMarkovChain, k_max: int,
                  method: str = "frontier") -> LevelOverlap:
    """Level overlaps ``S_1..S_k_max`` with zero-overlap subtrees pruned.

    ``method="frontier"`` expands whole levels of surviving words at once
    (split depth-first when a level grows past ``FRONTIER_CAP`` rows);
    ``method="dfs"`` visits one word at a time in ascending letter order.
    Both give the same sums and node counts.
    """
    _check_alphabets(chain1, chain2)
    if k_max < 1:
        raise ValueError("k_max must be positive")
    if method == "dfs":
        return _level_overlap_dfs(chain1, chain2, k_max)
    if method != "frontier":
        raise ValueError(f"unknown method {method!r}")

    tally = _Tally(k_max)
    m1, m2 = chain1.masks, chain2.masks

    def visit(a1, a2, level):
        # a1, a2: occupancies of candidate words at `level` (1-based)
        while True:
            p1, p2 = a1.sum(axis=1), a2.sum(axis=1)
            if p1.size > FRONTIER_CAP:
                for lo in range(0, p1.size, FRONTIER_CAP):
                    visit(a1[lo:lo + FRONTIER_CAP], a2[lo:lo + FRONTIER_CAP], level)
                return
            r = np.minimum(p1, p2)
            keep = r > 0.0
            tally.diff[level - 1].append(math.fsum(np.abs(p1 - p2)))
            if not keep.all():
                tally.pruned[level - 1].append(math.fsum(p1[~keep] + p2[~keep]))
                a1, a2, r = a1[keep], a2[keep], r[keep]
            if r.size == 0:
                return
            tally.overlap[level - 1].append(math.fsum(r))
            tally.counts[level - 1] += r.size
            if level == k_max:
                return
            n1 = a1 @ chain1.tau
            n2 = a2 @ chain2.tau
            a1 = (n1[:, None, :] * m1[None, :, :]).reshape(-1, chain1.n_states)
            a2 = (n2[:, None, :] * m2[None, :, :]).reshape(-1, chain2.n_states)
            level += 1

    visit(chain1.masks * chain1.mu, chain2.masks * chain2.mu, 1)
    return tally.result()


def _level_overlap_dfs(chain1, chain2, k_max):
    tally = _Tally(k_max)
    q = chain1.alphabet_size
    # explicit stack of (level, alpha1, alpha2); pushed in reverse so letters pop ascending
    stack = [(1, chain1.mu * chain1.masks[a], chain2.mu * chain2.masks[a])
             for a in reversed(range(q))]
    while stack:
        level, a1, a2 = stack.pop()
        p1, p2 = a1.sum(), a2.sum()
        tally.diff[level - 1].append(abs(p1 - p2))
        if min(p1, p2) == 0.0:
            tally.pruned[level - 1].append(p1 + p2)
            continue
        tally.overlap[level - 1].append(min(p1, p2))
        tally.counts[level - 1] += 1
        if level == k_max:
            continue
        n1 = a1 @ chain1.tau
        n2 = a2 @ chain2.tau
        for a in reversed(range(q)):
            stack.append((level + 1, n1 * chain1.masks[a], n2 * chain2.masks[a]))
    return tally.result()


def kc_from_overlaps(sums, k: int) -> float:
    """``K^k`` from level overlaps; power-of-two weights keep every term exact."""
    terms = [1.0]
    terms += [-math.ldexp(float(sums[l - 1]), -l) for l in range(1, k)]
    terms.append(-math.ldexp(float(sums[k - 1]), 1 - k))
    return min(1.0, max(0.0, math.fsum(terms)))


def kc_from_gaps(gaps, k: int) -> float:
    """``K^k = sum_{l<k} 2**-l D_l + 2**(1-k) D_k`` with ``D_l = 1 - S_l``.

    Same value as :func:`kc_from_overlaps`, but identical word laws give
    exactly 0 instead of the rounding residue of ``1 - sum``.
    """
    terms = [math.ldexp(float(gaps[l - 1]), -l) for l in range(1, k)]
    terms.append(math.ldexp(float(gaps[k - 1]), 1 - k))
    return min(1.0, max(0.0, math.fsum(terms)))


def kantorovich_cantor(chain1: LabeledMarkovChain, chain2: LabeledMarkovChain, k: int,
                       method: str = "frontier") -> float:
    """Kantorovich distance with Cantor cost between the length-``k`` word laws."""
    return kc_from_gaps(level_overlap(chain1, chain2, k, method).gaps, k)


def ck_approx(chain1: LabeledMarkovChain, chain2: LabeledMarkovChain, epsilon: float = 1e-3,
              k: int | None = None, method: str = "frontier") -> CkResult:
    """``epsilon``-accurate Cantor-Kantorovich distance.

    ``k`` overrides the word length chosen from ``epsilon``. The true limit
    lies in ``[lower, upper]``.
    """
    _check_alphabets(chain1, chain2)
    if k is None:
        k = depth_for_accuracy(epsilon)
    lv = level_overlap(chain1, chain2, k, method)
    value = kc_from_gaps(lv.gaps, k)
    upper = value + math.ldexp(float(lv.sums[k - 1]), 1 - k)
    return CkResult(value, k, value, upper, lv.nodes_visited, tuple(lv.sums.tolist()))


# --- exact transport oracle -------------------------------------------------

@dataclass(frozen=True)
class CouplingMatrix:
    """Optimal coupling restricted to the supports of both word laws."""

    k: int
    row_words: tuple[tuple[int, ...], ...]
    col_words: tuple[tuple[int, ...], ...]
    mass: np.ndarray

    def entries(self):
        """``{(w1, w2): mass}`` over positive entries."""
        rows, cols = np.nonzero(self.mass)
        return {(self.row_words[i], self.col_words[j]): float(self.mass[i, j])
                for i, j in zip(rows, cols)}

    def get(self, w1, w2) -> float:
        try:
            return float(self.mass[self.row_words.index(tuple(w1)), self.col_words.index(tuple(w2))])
        except ValueError:
            return 0.0

    def row_marginals(self) -> dict:
        return dict(zip(self.row_words, self.mass.sum(axis=1).tolist()))

    def col_marginals(self) -> dict:
        return dict(zip(self.col_words, self.mass.sum(axis=0).tolist()))


def cantor_cost_matrix(rows, cols) -> np.ndarray:
    cost = np.empty((len(rows), len(cols)))
    for i, w1 in enumerate(rows):
        for j, w2 in enumerate(cols):
            n = common_prefix_length(w1, w2)
            cost[i, j] = 0.0 if n == len(w1) else 2.0 ** -n
    return cost


def _emd(a, b, cost):
    # POT probes every installed array backend on import; only numpy is needed here
    for backend in ("PYTORCH", "JAX", "TENSORFLOW", "CUPY"):
        os.environ.setdefault(f"POT_BACKEND_DISABLE_{backend}", "1")
    from ot.lp import emd

    return emd(a, b, cost, numItermax=10_000_000)


def transport_oracle(p1: dict, p2: dict, k: int) -> tuple[float, CouplingMatrix]:
    """Exact optimal transport between two word laws with Cantor cost."""
    rows = tuple(w for w, p in p1.items() if p > 0)
    cols = tuple(w for w, p in p2.items() if p > 0)
    a = np.array([p1[w] for w in rows])
    b = np.array([p2[w] for w in cols])
    cost = cantor_cost_matrix(rows, cols)
    # the solver wants equal totals; the laws agree to rounding error
    b = b * (a.sum() / b.sum())
    plan = np.asarray(_emd(a, b, cost))
    value = math.fsum((plan * cost).ravel())
    return value, CouplingMatrix(k, rows, cols, plan)


def kantorovich_lp_oracle(chain1: LabeledMarkovChain, chain2: LabeledMarkovChain,
                          k: int) -> tuple[float, CouplingMatrix]:
    """``K^k`` by network simplex over the full word laws (small ``k`` only)."""
    _check_alphabets(chain1, chain2)
    if chain1.alphabet_size ** k > ORACLE_MAX_WORDS:
        raise TooLarge(f"|A|^k = {chain1.alphabet_size ** k} exceeds {ORACLE_MAX_WORDS} words")
    p1 = word_distribution(chain1, k)
    p2 = word_distribution(chain2, k)
    return transport_oracle(p1, p2, k)


def coupling_diagonal_check(coupling: CouplingMatrix, p1: dict, p2: dict,
                            tol: float = 1e-9) -> bool:
    """Optimal couplings keep ``min(p1(w), p2(w))`` in place on the diagonal."""
    for w in set(p1) | set(p2):
        expected = min(p1.get(w, 0.0), p2.get(w, 0.0))
        if abs(coupling.get(w, w) - expected) > tol:
            return False
    return True


def coupling_block_marginal_check(coupling: CouplingMatrix, p1_prefixes: dict,
                                  p2_prefixes: dict, tol: float = 1e-9) -> bool:
    """Mass leaving (entering) each prefix block equals its surplus (deficit)."""
    out_flow: dict = {}
    in_flow: dict = {}
    for (w1, w2), m in coupling.entries().items():
        if w1[:-1] != w2[:-1]:
            out_flow[w1[:-1]] = out_flow.get(w1[:-1], 0.0) + m
            in_flow[w2[:-1]] = in_flow.get(w2[:-1], 0.0) + m
    for w in set(p1_prefixes) | set(p2_prefixes) | set(out_flow) | set(in_flow):
        d = p1_prefixes.get(w, 0.0) - p2_prefixes.get(w, 0.0)
        if abs(out_flow.get(w, 0.0) - max(d, 0.0)) > tol:
            return False
        if abs(in_flow.get(w, 0.0) - max(-d, 0.0)) > tol:
            return False
    return True


def all_words(alphabet_size: int, k: int):
    return list(product(range(alphabet_size), repeat=k))
