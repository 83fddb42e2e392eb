"""Desk-scale reproductions of the complexity and safety experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ck import level_overlap
from .dynamics import make_lorentz_system
from .estimation import EstimationConfig
from .markov import LabeledMarkovChain, random_chain
from .refine import RefineReport, ck_metric, refine
from .safety import estimate_PH_curve, grid_abstraction, ground_truth_curve

BETAS = (0.01, 0.05, 0.25)


def labelled_random_chain(rng, n_states: int, alphabet_size: int) -> LabeledMarkovChain:
    """Random dense chain whose labels use the whole alphabet when possible."""
    chain = random_chain(rng, n_states, alphabet_size)
    labels = np.arange(n_states) % alphabet_size
    rng.shuffle(labels)
    return LabeledMarkovChain(chain.tau, chain.mu, labels, alphabet_size)


def complexity_rows(alphabets=(2, 3, 4), k_max: int = 15, n_states: int = 4, seed: int = 0,
                    max_frontier_words: int = 3 ** 12):
    """Rows ``(|A|, k, nodes_visited, |A|**(k+1), |A|**(2k))`` on random chain pairs."""
    rng = np.random.default_rng(seed)
    rows = []
    for q in alphabets:
        c1 = labelled_random_chain(rng, n_states, q)
        c2 = labelled_random_chain(rng, n_states, q)
        for k in range(1, k_max + 1):
            if q ** k > max_frontier_words:
                break
            nodes = level_overlap(c1, c2, k).nodes_visited
            rows.append((q, k, nodes, q ** (k + 1), q ** (2 * k)))
    return rows


@dataclass
class SafetyExperiment:
    ground_truth: np.ndarray
    refined: dict[int, RefineReport]
    grids: dict[int, LabeledMarkovChain]
    curves: dict[tuple[str, float], np.ndarray]

    def mae(self, name: str, beta: float) -> float:
        return float(np.abs(self.curves[name, beta] - self.ground_truth).mean())


def safety_experiment(iterations=(6, 14), parts=(2, 3), samples: int = 50_000,
                      grid_samples: int = 200_000, truth_samples: int = 200_000,
                      hmax: int = 8, seed: int = 0, epsilon: float = 1e-3,
                      workers: int = 1) -> SafetyExperiment:
    system = make_lorentz_system()
    truth = ground_truth_curve(system, hmax, truth_samples, seed)
    refined = {n: refine(system, ck_metric(epsilon), n, EstimationConfig(samples, seed),
                         workers=workers)
               for n in iterations}
    grids = {p: grid_abstraction(system, p, EstimationConfig(grid_samples, seed)) for p in parts}
    chains = {f"refine_N{n}": r.chain for n, r in refined.items()}
    chains.update({f"grid_p{p}": g for p, g in grids.items()})
    curves = {(name, beta): estimate_PH_curve(chain, beta, hmax)
              for name, chain in chains.items() for beta in BETAS}
    return SafetyExperiment(truth, refined, grids, curves)


def safety_rows(exp: SafetyExperiment):
    names = sorted({name for name, _ in exp.curves})
    header = ["beta", "H", "ground_truth"] + names
    rows = []
    for beta in BETAS:
        for h, truth in enumerate(exp.ground_truth):
            rows.append([beta, h, float(truth)] + [float(exp.curves[n, beta][h]) for n in names])
    return header, rows
