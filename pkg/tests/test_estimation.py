import numpy as np
import pytest

from ckabs.dynamics import AffineSystem, LabelRegion, make_lorentz_system, make_rotation_system, sample_label_paths
from ckabs.errors import EmptyBlock
from ckabs.estimation import (
    EstimationConfig, count_table, estimate_abstraction, estimate_from_sample,
    observed_zero_words, sample_paths,
)
from ckabs.markov import in_behaviour, validate
from ckabs.symbolic import Partition, word

ROTATION = make_rotation_system(0.25)
MEMORY2 = Partition.from_strings(["00", "01", "10", "11"], 2)


def test_memory1_rotation_estimate():
    chain = estimate_abstraction(ROTATION, Partition.letters(2), EstimationConfig(100_000, 1))
    np.testing.assert_allclose(chain.mu, [0.5, 0.5], atol=0.01)
    np.testing.assert_allclose(chain.tau, np.full((2, 2), 0.5), atol=0.02)
    assert validate(chain) == []


def test_memory2_rotation_estimate_is_a_cycle():
    chain = estimate_abstraction(ROTATION, MEMORY2, EstimationConfig(100_000, 2))
    cycle = np.zeros((4, 4))
    for src, dst in [("00", "01"), ("01", "11"), ("11", "10"), ("10", "00")]:
        cycle[MEMORY2.index(src), MEMORY2.index(dst)] = 1.0
    np.testing.assert_allclose(chain.tau, cycle, atol=0.02)
    np.testing.assert_allclose(chain.mu, 0.25, atol=0.01)
    assert list(chain.labels) == [0, 0, 1, 1]


def test_single_block_partition():
    system = AffineSystem(np.eye(2) * 0.5, np.zeros(2), (LabelRegion(0),), np.array([[0, 1], [0, 1]]))
    chain = estimate_abstraction(system, Partition.letters(1), EstimationConfig(500, 0))
    np.testing.assert_array_equal(chain.mu, [1.0])
    np.testing.assert_array_equal(chain.tau, [[1.0]])


def test_counts_are_consistent():
    cfg = EstimationConfig(20_000, 3)
    part = Partition.from_strings(["0", "10", "11"], 2)
    table = count_table(sample_paths(ROTATION, part.words, cfg), part)
    assert table.initial.sum() + table.uncovered == cfg.n_samples
    np.testing.assert_array_equal(table.transitions.sum(axis=1) + table.escaped, table.initial)


def test_unobserved_block_is_an_error():
    part = Partition.from_strings(["000", "001", "01", "1"], 2)
    with pytest.raises(EmptyBlock) as info:
        estimate_abstraction(ROTATION, part, EstimationConfig(5_000, 0))
    assert info.value.words == [word("000")]


def test_observed_zero_words():
    assert observed_zero_words(ROTATION, ["000", "001"], EstimationConfig(50_000, 0)) == [word("000")]
    assert observed_zero_words(ROTATION, ["0", "1"], EstimationConfig(1_000, 0)) == []
    assert observed_zero_words(ROTATION, ["0", "1"], EstimationConfig(0, 0)) == [word("0"), word("1")]


def test_config_validation():
    with pytest.raises(ValueError):
        EstimationConfig(10, 0, zero_threshold=10)
    with pytest.raises(ValueError):
        EstimationConfig(-1, 0)


def test_mu_error_shrinks_like_inverse_square_root():
    # quadrupling the sample size should halve the RMS error of mu
    def rms(n, seed):
        chain = estimate_abstraction(ROTATION, MEMORY2, EstimationConfig(n, seed))
        return np.sqrt(np.mean((chain.mu - 0.25) ** 2))

    small = np.mean([rms(2_000, s) for s in range(30)])
    large = np.mean([rms(8_000, s) for s in range(30, 60)])
    assert 0.3 < large / small < 0.75


@pytest.mark.parametrize("system,part", [
    (ROTATION, MEMORY2),
    (make_lorentz_system(), Partition.letters(3)),
    (make_lorentz_system(), Partition.from_strings(["00", "01", "02", "1", "20", "21", "22"], 3)),
])
def test_fresh_traces_are_in_behaviour(system, part):
    cfg = EstimationConfig(50_000, 4)
    sample = sample_paths(system, part.words, cfg)
    kept = part.without(w for w, c in zip(part.words, count_table(sample, part).initial) if c == 0)
    chain, _ = estimate_from_sample(sample, kept)
    assert validate(chain) == []
    fresh = sample_label_paths(system, 1000, 0, 4, (999,))
    assert all(in_behaviour(chain, tuple(row)) for row in fresh)
