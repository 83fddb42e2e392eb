import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ckabs.dynamics import make_lorentz_system, make_rotation_system
from ckabs.estimation import EstimationConfig
from ckabs.markov import validate
from ckabs.safety import (
    SafetyQuery, confident_initial_set, estimate_PH, estimate_PH_curve, grid_abstraction,
    grid_cells, ground_truth_PH, ground_truth_curve, safe_walk_probabilities,
)

from conftest import chains, make_chain

LORENTZ = make_lorentz_system()


def enumerate_safe_walks(chain, horizon, unsafe):
    """Sum over every state path of length ``horizon`` that avoids ``unsafe`` after the start."""
    out = np.zeros(chain.n_states)
    for s in range(chain.n_states):
        for path in itertools.product(range(chain.n_states), repeat=horizon):
            if any(chain.labels[t] == unsafe for t in path):
                continue
            p, prev = 1.0, s
            for t in path:
                p *= chain.tau[prev, t]
                prev = t
            out[s] += p
    return out


TWO_STATE = make_chain([[0.9, 0.1], [0.0, 1.0]], [0.6, 0.4], [1, 0])


def test_zero_horizon_is_certain():
    np.testing.assert_array_equal(safe_walk_probabilities(TWO_STATE, SafetyQuery(0, 0.05)), [1, 1])


def test_two_step_survival_by_hand():
    v = safe_walk_probabilities(TWO_STATE, SafetyQuery(2, 0.05))
    assert v[0] == pytest.approx(0.81)
    assert list(confident_initial_set(TWO_STATE, SafetyQuery(2, 0.01))) == []
    assert list(confident_initial_set(TWO_STATE, SafetyQuery(2, 0.2))) == [0]
    assert estimate_PH(TWO_STATE, SafetyQuery(2, 0.2)) == pytest.approx(0.6)
    assert estimate_PH(TWO_STATE, SafetyQuery(2, 0.01)) == 0.0


def test_no_unsafe_states_means_everything_is_safe():
    chain = make_chain([[0.5, 0.5], [0.2, 0.8]], [0.3, 0.7], [1, 1])
    assert np.all(estimate_PH_curve(chain, 0.999, 6) == 1.0)
    assert np.all(safe_walk_probabilities(chain, SafetyQuery(5, 0.5)) == pytest.approx(1.0))


@given(chains(max_states=4), st.integers(0, 4), st.integers(0, 2))
def test_dynamic_program_matches_path_enumeration(chain, horizon, unsafe):
    v = safe_walk_probabilities(chain, SafetyQuery(horizon, 0.05, unsafe))
    np.testing.assert_allclose(v, enumerate_safe_walks(chain, horizon, unsafe), atol=1e-12)


@given(chains(max_states=4), st.floats(0.01, 0.99))
def test_curve_is_nonincreasing_in_horizon(chain, beta):
    curve = estimate_PH_curve(chain, beta, 6)
    assert np.all(np.diff(curve) <= 1e-12)
    assert np.all((curve >= 0) & (curve <= 1 + 1e-12))


def test_query_validation():
    with pytest.raises(ValueError):
        SafetyQuery(-1, 0.1)
    with pytest.raises(ValueError):
        SafetyQuery(1, 1.0)


def test_rotation_ground_truth():
    # label 1 unsafe; survivors of one step are x in [0, 0.25)
    system = make_rotation_system(0.25)
    assert ground_truth_PH(system, 1, 100_000, 0, unsafe_label=1) == pytest.approx(0.25, abs=0.01)
    assert ground_truth_PH(system, 0, 100_000, 0, unsafe_label=1) == pytest.approx(0.5, abs=0.01)


def test_lorentz_ground_truth_at_time_zero():
    # obstacle covers 1x1 of the 5x2 position box
    curve = ground_truth_curve(LORENTZ, 3, 100_000, 0)
    assert curve[0] == pytest.approx(0.9, abs=0.01)
    assert np.all(np.diff(curve) <= 0)


def test_grid_cells_clamp_outside_states():
    box = np.array([[0.0, 1.0], [0.0, 1.0]])
    x = np.array([[0.1, 0.1], [0.9, 0.1], [1.5, -3.0], [1.0, 1.0]])
    np.testing.assert_array_equal(grid_cells(box, 2, x), [0, 2, 2, 3])


@pytest.mark.parametrize("parts,n_states", [(2, 16), (3, 81)])
def test_grid_abstraction_shape(parts, n_states):
    chain = grid_abstraction(LORENTZ, parts, EstimationConfig(100_000, 0))
    assert chain.n_states == n_states
    assert validate(chain) == []
    np.testing.assert_allclose(chain.mu, 1.0 / n_states, atol=0.01)
    # some cell overlaps the obstacle and is unsafe
    assert (chain.labels == 0).sum() >= 1


def test_grid_labels_follow_geometry():
    chain = grid_abstraction(LORENTZ, 2, EstimationConfig(20_000, 0))
    # the split p1 = 1.5 is the obstacle's right edge: left cells overlap it,
    # right cells only touch it and keep their dominant label 1
    labels = chain.labels.reshape(2, 2, 2, 2)
    assert np.all(labels[0] == 0)
    assert np.all(labels[1] == 1)
