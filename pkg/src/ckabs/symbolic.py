"""Timed words, the Cantor distance and partitions given as word sets."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .dynamics import Trace
from .errors import LengthMismatch, MultiMatch, NoMatch


@dataclass(frozen=True, order=True)
class TimedWord:
    """Label string ``letters`` covering times ``-past .. future``."""

    letters: tuple[int, ...]
    past: int = 0

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(a) for a in self.letters))
        if not self.letters:
            raise ValueError("a timed word holds at least one letter")
        if not 0 <= self.past < len(self.letters):
            raise ValueError("past must index a letter of the word")

    @property
    def future(self) -> int:
        return len(self.letters) - self.past - 1

    @property
    def anchor(self) -> int:
        """Label at time 0."""
        return self.letters[self.past]

    def is_future_only(self) -> bool:
        return self.past == 0

    def extend(self, letter: int) -> "TimedWord":
        return TimedWord(self.letters + (letter,), self.past)

    def __str__(self):
        if all(a < 10 for a in self.letters):
            body = "".join(map(str, self.letters))
        else:
            # dotted form; a trailing dot keeps a single multi-digit letter unambiguous
            body = ".".join(map(str, self.letters)) + ("." if len(self.letters) == 1 else "")
        return f"{body}@[{-self.past},{self.future}]"

    @classmethod
    def parse(cls, text: str) -> "TimedWord":
        """Parse ``"01@[0,1]"``; a bare ``"01"`` means ``[0, len-1]``."""
        m = re.fullmatch(r"\s*([0-9.]+)\s*(?:@\s*\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\])?\s*", text)
        if m is None:
            raise ValueError(f"malformed timed word {text!r}")
        body, lo, hi = m.groups()
        letters = tuple(int(a) for a in body.split(".") if a) if "." in body else tuple(int(a) for a in body)
        if lo is None:
            return cls(letters)
        past, future = -int(lo), int(hi)
        if past < 0 or future < 0 or past + future + 1 != len(letters):
            raise ValueError(f"interval of {text!r} does not fit its letters")
        return cls(letters, past)


def word(text_or_letters, past: int = 0) -> TimedWord:
    if isinstance(text_or_letters, TimedWord):
        return text_or_letters
    if isinstance(text_or_letters, str):
        return TimedWord.parse(text_or_letters)
    return TimedWord(tuple(text_or_letters), past)


def common_prefix_length(w1: Sequence[int], w2: Sequence[int]) -> int:
    if len(w1) != len(w2):
        raise LengthMismatch(f"words of lengths {len(w1)} and {len(w2)}")
    n = 0
    for a, b in zip(w1, w2):
        if a != b:
            break
        n += 1
    return n


def cantor_distance_exact(w1: Sequence[int], w2: Sequence[int]) -> Fraction:
    n = common_prefix_length(w1, w2)
    if n == len(w1):
        return Fraction(0)
    return Fraction(1, 2 ** n)


def cantor_distance(w1: Sequence[int], w2: Sequence[int]) -> float:
    """``2**-L`` with ``L`` the longest common prefix length; 0 for equal words."""
    return float(cantor_distance_exact(w1, w2))


@dataclass(frozen=True)
class Partition:
    """A set of timed words whose blocks should cover the state space once."""

    words: tuple[TimedWord, ...]
    alphabet_size: int

    def __post_init__(self):
        words = tuple(word(w) for w in self.words)
        if len(set(words)) != len(words):
            raise ValueError("duplicate words in partition")
        for w in words:
            if max(w.letters) >= self.alphabet_size or min(w.letters) < 0:
                raise ValueError(f"word {w} uses letters outside the alphabet")
        object.__setattr__(self, "words", words)

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def index(self, w) -> int:
        return self.words.index(word(w))

    @property
    def max_past(self) -> int:
        return max((w.past for w in self.words), default=0)

    @property
    def max_future(self) -> int:
        return max((w.future for w in self.words), default=0)

    def is_future_only(self) -> bool:
        return all(w.is_future_only() for w in self.words)

    def without(self, removed: Iterable[TimedWord]) -> "Partition":
        removed = set(removed)
        return Partition(tuple(w for w in self.words if w not in removed), self.alphabet_size)

    def to_strings(self) -> list[str]:
        return [str(w) for w in self.words]

    @classmethod
    def from_strings(cls, items: Iterable[str], alphabet_size: int) -> "Partition":
        return cls(tuple(TimedWord.parse(s) for s in items), alphabet_size)

    @classmethod
    def letters(cls, alphabet_size: int) -> "Partition":
        """The coarse partition ``{a@[0,0]}``."""
        return cls(tuple(TimedWord((a,)) for a in range(alphabet_size)), alphabet_size)


def match_block(trace: Trace, partition: Partition) -> int:
    """Index of the unique word agreeing with ``trace`` on its interval."""
    hits = []
    for i, w in enumerate(partition.words):
        if -w.past < trace.start_offset or w.future > trace.end:
            raise ValueError(f"trace does not span the interval of {w}")
        if all(trace.at(t - w.past) == a for t, a in enumerate(w.letters)):
            hits.append(i)
    if not hits:
        raise NoMatch(f"trace {trace.labels} lies in no block")
    if len(hits) > 1:
        raise MultiMatch(f"trace {trace.labels} lies in blocks {hits}")
    return hits[0]


def assign_blocks(paths: np.ndarray, anchor_column: int, partition: Partition) -> np.ndarray:
    """Vectorised :func:`match_block` over label paths.

    ``paths[:, anchor_column]`` is time 0. Returns the word index per row, -1
    where no word matches. Raises :class:`MultiMatch` on overlapping blocks.
    """
    n = paths.shape[0]
    out = np.full(n, -1, dtype=np.int64)
    for i, w in enumerate(partition.words):
        lo = anchor_column - w.past
        hi = anchor_column + w.future + 1
        if lo < 0 or hi > paths.shape[1]:
            raise ValueError(f"label paths do not span the interval of {w}")
        hit = np.all(paths[:, lo:hi] == np.asarray(w.letters), axis=1)
        if np.any(out[hit] >= 0):
            raise MultiMatch(f"block {w} overlaps another block")
        out[hit] = i
    return out


def is_partition_consistent(partition: Partition, dropped: Iterable = ()) -> bool:
    """Whether future-only words (plus dropped words) tile the prefix tree exactly.

    The leaves must be prefix-free and their Kraft sum ``sum |A|**-len`` must
    be exactly 1, i.e. every infinite label path has exactly one leaf prefix.
    """
    leaves = [w.letters for w in partition.words] + [word(w).letters for w in dropped]
    if not all(word(w).is_future_only() for w in list(partition.words) + [word(d) for d in dropped]):
        return False
    if len(set(leaves)) != len(leaves):
        return False
    as_set = set(leaves)
    for leaf in leaves:
        for n in range(1, len(leaf)):
            if leaf[:n] in as_set:
                return False
    q = partition.alphabet_size
    return sum(Fraction(1, q ** len(leaf)) for leaf in leaves) == 1
