from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ckabs.dynamics import Trace
from ckabs.errors import LengthMismatch, MultiMatch, NoMatch
from ckabs.symbolic import (
    Partition, TimedWord, assign_blocks, cantor_distance, cantor_distance_exact,
    common_prefix_length, is_partition_consistent, match_block, word,
)


def test_cantor_distance_examples():
    assert cantor_distance((0, 0), (1, 1)) == 1.0
    assert cantor_distance((0, 1, 0), (0, 1, 1)) == 0.25
    assert cantor_distance((1, 0, 1), (1, 0, 1)) == 0.0
    assert cantor_distance_exact((0, 0, 0, 1), (0, 0, 0, 0)) == Fraction(1, 8)


def test_cantor_distance_needs_equal_lengths():
    with pytest.raises(LengthMismatch):
        common_prefix_length((0, 1), (0,))


same_length_triples = st.integers(1, 8).flatmap(
    lambda n: st.tuples(*[st.lists(st.integers(0, 2), min_size=n, max_size=n)] * 3))


@given(same_length_triples)
def test_cantor_distance_is_ultrametric(triple):
    u, v, w = triple
    d = cantor_distance_exact
    assert d(u, v) == d(v, u)
    assert (d(u, v) == 0) == (u == v)
    assert d(u, w) <= max(d(u, v), d(v, w))


@given(st.lists(st.integers(0, 12), min_size=1, max_size=6), st.integers(0, 6))
def test_word_text_round_trip(letters, past):
    w = TimedWord(tuple(letters), min(past, len(letters) - 1))
    assert TimedWord.parse(str(w)) == w


def test_word_parsing():
    assert TimedWord.parse("01") == TimedWord((0, 1))
    assert TimedWord.parse("11@[-1,0]") == TimedWord((1, 1), past=1)
    assert str(TimedWord((0, 1))) == "01@[0,1]"
    with pytest.raises(ValueError):
        TimedWord.parse("0a")


def test_match_block_after_split():
    part = Partition((word("00"), word("01"), word("1")), 2)
    assert part.words[match_block(Trace((0, 0, 1)), part)] == word("00")
    assert part.words[match_block(Trace((1, 0, 0)), part)] == word("1")


def test_match_block_mixed_memory():
    part = Partition.from_strings(["01@[0,1]", "00@[0,1]", "01@[-1,0]", "11@[-1,0]"], 2)
    trace = Trace((1, 1, 0), start_offset=-1)
    assert part.words[match_block(trace, part)] == TimedWord.parse("11@[-1,0]")


def test_match_block_failures():
    part = Partition((word("00"), word("1")), 2)
    with pytest.raises(NoMatch):
        match_block(Trace((0, 1)), part)
    overlapping = Partition((word("0"), word("00"), word("1")), 2)
    with pytest.raises(MultiMatch):
        match_block(Trace((0, 0)), overlapping)


@given(st.lists(st.lists(st.integers(0, 1), min_size=4, max_size=4), min_size=1, max_size=40))
def test_assign_blocks_agrees_with_match_block(rows):
    part = Partition.from_strings(["01@[0,1]", "00@[0,1]", "01@[-1,0]", "11@[-1,0]"], 2)
    paths = np.array(rows)
    got = assign_blocks(paths, 1, part)
    for row, idx in zip(rows, got):
        try:
            expected = match_block(Trace(tuple(row), -1), part)
        except NoMatch:
            expected = -1
        assert idx == expected


def test_partition_consistency_examples():
    assert is_partition_consistent(Partition.letters(2))
    assert is_partition_consistent(Partition((word("00"), word("01"), word("1")), 2))
    assert not is_partition_consistent(Partition((word("00"), word("1")), 2))
    assert is_partition_consistent(Partition((word("00"), word("1")), 2), dropped=[word("01")])
    assert not is_partition_consistent(Partition((word("0"), word("00"), word("1")), 2))
    assert not is_partition_consistent(Partition.from_strings(["0@[0,0]", "11@[-1,0]"], 2))


def test_partition_rejects_bad_words():
    with pytest.raises(ValueError):
        Partition((word("0"), word("0")), 2)
    with pytest.raises(ValueError):
        Partition((word("2"),), 2)


def test_partition_helpers():
    part = Partition.from_strings(["00", "01", "11@[-1,0]"], 2)
    assert part.max_past == 1 and part.max_future == 1
    assert part.index("01") == 1
    assert len(part.without([word("01")])) == 2
    assert not part.is_future_only()
