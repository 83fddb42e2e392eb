"""Safety analysis with abstractions: safe initial measure over a finite horizon."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import DynamicalSystem, chunk_rng, CHUNK_SIZE
from .estimation import EstimationConfig
from .markov import LabeledMarkovChain


@dataclass(frozen=True)
class SafetyQuery:
    horizon: int
    beta: float
    unsafe_label: int = 0

    def __post_init__(self):
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")


def safe_states(chain: LabeledMarkovChain, unsafe_label: int) -> np.ndarray:
    return chain.labels != unsafe_label


def safe_walk_probabilities(chain: LabeledMarkovChain, query: SafetyQuery) -> np.ndarray:
    """Probability, from each state, that the next ``H`` states are all safe."""
    safe = safe_states(chain, query.unsafe_label).astype(float)
    v = np.ones(chain.n_states)
    for _ in range(query.horizon):
        v = chain.tau @ (safe * v)
    return v


def confident_initial_set(chain: LabeledMarkovChain, query: SafetyQuery) -> np.ndarray:
    """Safe states whose ``H``-step walk stays safe with probability >= 1 - beta."""
    v = safe_walk_probabilities(chain, query)
    ok = safe_states(chain, query.unsafe_label) & (v >= 1.0 - query.beta)
    return np.flatnonzero(ok)


def estimate_PH(chain: LabeledMarkovChain, query: SafetyQuery) -> float:
    return float(chain.mu[confident_initial_set(chain, query)].sum())


def estimate_PH_curve(chain: LabeledMarkovChain, beta: float, hmax: int,
                      unsafe_label: int = 0) -> np.ndarray:
    return np.array([estimate_PH(chain, SafetyQuery(h, beta, unsafe_label))
                     for h in range(hmax + 1)])


def ground_truth_curve(system: DynamicalSystem, hmax: int, n_samples: int, seed: int,
                       unsafe_label: int = 0) -> np.ndarray:
    """Monte-Carlo fraction of initial states whose outputs avoid ``unsafe_label``
    at every time ``0..H``, for each ``H = 0..hmax`` (same samples for all ``H``)."""
    alive_counts = np.zeros(hmax + 1, dtype=np.int64)
    for c in range(-(-n_samples // CHUNK_SIZE)):
        size = min(CHUNK_SIZE, n_samples - c * CHUNK_SIZE)
        x = system.sample_initial(chunk_rng((seed, 0xC0FFEE), c), size)
        alive = np.ones(size, dtype=bool)
        for h in range(hmax + 1):
            if h:
                x = system.step(x)
            alive &= system.output(x) != unsafe_label
            alive_counts[h] += int(alive.sum())
    return alive_counts / max(n_samples, 1)


def ground_truth_PH(system: DynamicalSystem, H: int, n_samples: int, seed: int,
                    unsafe_label: int = 0) -> float:
    return float(ground_truth_curve(system, H, n_samples, seed, unsafe_label)[H])


def grid_cells(box: np.ndarray, parts: int, x: np.ndarray) -> np.ndarray:
    """Flat index of the grid cell holding each state; outside states are clamped."""
    lo, hi = box[:, 0], box[:, 1]
    idx = np.floor((x - lo) / (hi - lo) * parts).astype(np.int64)
    idx = np.clip(idx, 0, parts - 1)
    return np.ravel_multi_index(tuple(idx.T), (parts,) * box.shape[0])


def _cells_meeting_label(box, parts, label_boxes, label):
    """Cells whose interior overlaps a region of ``label`` with positive volume."""
    d = box.shape[0]
    edges = [np.linspace(box[i, 0], box[i, 1], parts + 1) for i in range(d)]
    hit = np.zeros((parts,) * d, dtype=bool)
    for lab, lower, upper in label_boxes:
        if lab != label:
            continue
        per_dim = [(edges[i][:-1] < upper[i]) & (edges[i][1:] > lower[i]) for i in range(d)]
        mesh = per_dim[0]
        for m in per_dim[1:]:
            mesh = np.multiply.outer(mesh, m)
        hit |= mesh
    return hit.ravel()


def grid_abstraction(system: DynamicalSystem, parts: int, cfg: EstimationConfig,
                     unsafe_label: int = 0) -> LabeledMarkovChain:
    """Chain on a uniform ``parts**d`` grid of the initial box, by sampling.

    A cell is labelled ``unsafe_label`` if it overlaps that label's region,
    otherwise with the most frequent output among its samples. States leaving
    the box count toward the nearest boundary cell. Cells with no samples get
    zero initial mass and a self-loop.
    """
    box = system.init_box
    if box is None:
        raise ValueError(f"{system.name} has no bounded initial box")
    d = box.shape[0]
    n_cells = parts ** d
    counts = np.zeros(n_cells, dtype=np.int64)
    trans = np.zeros((n_cells, n_cells), dtype=np.int64)
    label_counts = np.zeros((n_cells, system.alphabet_size), dtype=np.int64)
    key = (cfg.master_seed, 0x6A1D, parts)
    for c in range(-(-cfg.n_samples // CHUNK_SIZE)):
        size = min(CHUNK_SIZE, cfg.n_samples - c * CHUNK_SIZE)
        x0 = system.sample_initial(chunk_rng(key, c), size)
        c0 = grid_cells(box, parts, x0)
        c1 = grid_cells(box, parts, system.step(x0))
        counts += np.bincount(c0, minlength=n_cells)
        np.add.at(trans, (c0, c1), 1)
        np.add.at(label_counts, (c0, system.output(x0)), 1)
    mu = counts / max(counts.sum(), 1)
    tau = np.zeros((n_cells, n_cells))
    seen = counts > 0
    tau[seen] = trans[seen] / counts[seen, None]
    tau[~seen, np.flatnonzero(~seen)] = 1.0
    labels = label_counts.argmax(axis=1)
    labels[_cells_meeting_label(box, parts, system.label_boxes(), unsafe_label)] = unsafe_label
    return LabeledMarkovChain(tau, mu, labels, system.alphabet_size)
