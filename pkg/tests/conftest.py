import numpy as np
import pytest
from hypothesis import settings, strategies as st

from ckabs.markov import LabeledMarkovChain

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def make_chain(tau, mu, labels, alphabet_size=2):
    return LabeledMarkovChain(np.asarray(tau, float), np.asarray(mu, float), labels, alphabet_size)


def random_labelled_chain(rng, n_states, alphabet_size, sparsity=0.0):
    tau = rng.random((n_states, n_states))
    if sparsity:
        tau[rng.random(tau.shape) < sparsity] = 0.0
        tau[np.arange(n_states), rng.integers(n_states, size=n_states)] += 0.1
    tau /= tau.sum(axis=1, keepdims=True)
    mu = rng.random(n_states)
    mu /= mu.sum()
    labels = rng.integers(alphabet_size, size=n_states)
    return make_chain(tau, mu, labels, alphabet_size)


@st.composite
def chains(draw, alphabet_size=None, max_states=4):
    q = draw(st.sampled_from([2, 3])) if alphabet_size is None else alphabet_size
    n = draw(st.integers(1, max_states))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_labelled_chain(np.random.default_rng(seed), n, q)


# Memory-1 and memory-2 abstractions of the quarter rotation with label 1 on [1/2, 1).
ROTATION_M1 = make_chain([[0.5, 0.5], [0.5, 0.5]], [0.5, 0.5], [0, 1])
# states 00, 01, 10, 11 move around the 4-cycle 00 -> 01 -> 11 -> 10 -> 00
ROTATION_M2 = make_chain(
    [[0, 1, 0, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 0, 1, 0]],
    [0.25] * 4, [0, 0, 1, 1])


_acceptance_results = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    detail = dict(report.user_properties).get("detail", "")
    _acceptance_results[name] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, (verdict, detail) in _acceptance_results.items():
        terminalreporter.write_line(f"{verdict}  {name}" + (f"  [{detail}]" if detail else ""))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
