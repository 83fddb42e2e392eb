"""Deterministic discrete-time systems with finite outputs.

Every map works on batches: states are arrays of shape ``(n, dimension)``
and outputs are integer arrays of shape ``(n,)``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import PastUnavailable

#: Trajectories are seeded per chunk of this many samples, so batch results
#: do not depend on how chunks are distributed over workers.
CHUNK_SIZE = 8192


class DynamicalSystem:
    """A map ``x -> step(x)`` with output labels ``output(x)`` and initial law.

    Subclasses implement :meth:`step`, :meth:`output` and
    :meth:`sample_initial`; invertible ones also override :meth:`inverse_step`
    and set ``has_inverse``.
    """

    dimension: int
    alphabet_size: int
    has_inverse: bool = False
    name: str = "system"

    def step(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse_step(self, x: np.ndarray) -> np.ndarray:
        raise PastUnavailable(f"{self.name} has no inverse map")

    def output(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sample_initial(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def initial_state(self, seed: int) -> np.ndarray:
        return self.sample_initial(np.random.default_rng(seed), 1)[0]

    @property
    def init_box(self) -> np.ndarray | None:
        """Bounds ``(dimension, 2)`` of the sampling box, if the law is uniform on one."""
        return None

    def label_boxes(self) -> list[tuple[int, np.ndarray, np.ndarray]]:
        """Axis-aligned regions ``(label, lower, upper)`` used for geometric labelling."""
        return []


@dataclass(frozen=True)
class LabelRegion:
    """Closed box assigning ``label``; ``None`` bounds mean unbounded."""

    label: int
    lower: tuple[float, ...] | None = None
    upper: tuple[float, ...] | None = None

    def bounds(self, dimension: int) -> tuple[np.ndarray, np.ndarray]:
        lo = np.full(dimension, -np.inf) if self.lower is None else np.asarray(self.lower, float)
        hi = np.full(dimension, np.inf) if self.upper is None else np.asarray(self.upper, float)
        return lo, hi

    def contains(self, x: np.ndarray) -> np.ndarray:
        lo, hi = self.bounds(x.shape[-1])
        return np.all((x >= lo) & (x <= hi), axis=-1)


def box_region(label: int, intervals) -> LabelRegion:
    """Build a region from per-dimension ``[lo, hi]`` pairs (``None`` = whole line)."""
    lower, upper = [], []
    for iv in intervals:
        if iv is None:
            lower.append(-np.inf)
            upper.append(np.inf)
        else:
            lo, hi = iv
            lower.append(-np.inf if lo is None else float(lo))
            upper.append(np.inf if hi is None else float(hi))
    return LabelRegion(label, tuple(lower), tuple(upper))


@dataclass(frozen=True, eq=False)
class AffineSystem(DynamicalSystem):
    """``x' = M x + c`` with first-match box labelling and a uniform initial box.

    With ``euler_step = h`` the matrices are continuous-time and the map is
    the explicit Euler step ``M = I + h A``, ``c = h b``; otherwise ``A`` and
    ``b`` are used directly.
    """

    A_matrix: np.ndarray
    b_vector: np.ndarray
    label_regions: tuple[LabelRegion, ...]
    box: np.ndarray
    euler_step: float | None = None
    alphabet_size: int = 0
    name: str = "affine"
    has_inverse: bool = True
    _M: np.ndarray = field(init=False, repr=False)
    _c: np.ndarray = field(init=False, repr=False)
    _M_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.array(self.A_matrix, dtype=float)
        b = np.array(self.b_vector, dtype=float)
        d = A.shape[0]
        if A.shape != (d, d) or b.shape != (d,):
            raise ValueError("A must be d x d and b of length d")
        box = np.array(self.box, dtype=float).reshape(d, 2)
        if self.euler_step is None:
            M, c = A, b
        else:
            M, c = np.eye(d) + self.euler_step * A, self.euler_step * b
        if abs(np.linalg.det(M)) <= 1e-12:
            raise ValueError("affine map is not invertible")
        if not self.label_regions:
            raise ValueError("at least one label region is required")
        alphabet = self.alphabet_size or 1 + max(r.label for r in self.label_regions)
        for name, value in (("A_matrix", A), ("b_vector", b), ("box", box), ("_M", M),
                            ("_c", c), ("_M_inv", np.linalg.inv(M)),
                            ("alphabet_size", alphabet), ("label_regions", tuple(self.label_regions))):
            object.__setattr__(self, name, value)

    @property
    def dimension(self) -> int:
        return self.A_matrix.shape[0]

    @property
    def init_box(self) -> np.ndarray:
        return self.box

    @property
    def map_matrix(self) -> np.ndarray:
        return self._M

    @property
    def map_offset(self) -> np.ndarray:
        return self._c

    def step(self, x):
        return x @ self._M.T + self._c

    def inverse_step(self, x):
        return (x - self._c) @ self._M_inv.T

    def output(self, x):
        x = np.atleast_2d(x)
        labels = np.full(x.shape[0], -1, dtype=np.int64)
        for region in self.label_regions:
            hit = (labels < 0) & region.contains(x)
            labels[hit] = region.label
        if np.any(labels < 0):
            raise ValueError("label regions are not exhaustive")
        return labels

    def sample_initial(self, rng, n):
        return rng.uniform(self.box[:, 0], self.box[:, 1], size=(n, self.dimension))

    def label_boxes(self):
        return [(r.label, *r.bounds(self.dimension)) for r in self.label_regions]


@dataclass(frozen=True, eq=False)
class RotationSystem(DynamicalSystem):
    """Circle rotation ``x -> x + theta mod 1``; label 0 on [0, 0.5), 1 on [0.5, 1)."""

    theta: float
    dimension: int = 1
    alphabet_size: int = 2
    has_inverse: bool = True

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie in (0, 1)")

    @property
    def name(self) -> str:
        return f"rotation:{self.theta}"

    def step(self, x):
        return np.mod(x + self.theta, 1.0)

    def inverse_step(self, x):
        return np.mod(x - self.theta, 1.0)

    def output(self, x):
        return (np.atleast_2d(x)[:, 0] >= 0.5).astype(np.int64)

    def sample_initial(self, rng, n):
        return rng.uniform(0.0, 1.0, size=(n, 1))

    @property
    def init_box(self):
        return np.array([[0.0, 1.0]])

    def label_boxes(self):
        return [(0, np.array([0.0]), np.array([0.5])), (1, np.array([0.5]), np.array([1.0]))]


def make_rotation_system(theta: float) -> RotationSystem:
    return RotationSystem(theta)


# Electron constants (SI units).
ELECTRON_MASS = 9.1e-31
ELECTRON_CHARGE = 1.6e-19
E_FIELD = (-1.0e-10, 5.0e-11, 0.0)
B_FIELD = (0.0, 0.0, 1.0e-11)
LORENTZ_EULER_STEP = 0.1


def make_lorentz_system() -> AffineSystem:
    """Planar electron in crossed fields, Euler-discretised with step 0.1.

    State ``(p1, p2, v1, v2)``. Output 0 inside the obstacle
    ``[0.5, 1.5] x [-0.5, 0.5]``, 1 when ``p1 >= 1.5``, 2 otherwise.
    """
    qm = ELECTRON_CHARGE / ELECTRON_MASS
    w = qm * B_FIELD[2]
    A = np.array([
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 0.0, w],
        [0.0, 0.0, -w, 0.0],
    ])
    b = np.array([0.0, 0.0, qm * E_FIELD[0], qm * E_FIELD[1]])
    regions = (
        box_region(0, [(0.5, 1.5), (-0.5, 0.5), None, None]),
        box_region(1, [(1.5, None), None, None, None]),
        LabelRegion(2),
    )
    box = np.array([[-1.0, 4.0], [-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]])
    return AffineSystem(A, b, regions, box, euler_step=LORENTZ_EULER_STEP,
                        alphabet_size=3, name="lorentz")


@dataclass(frozen=True)
class Trace:
    """Observed labels; ``labels[j]`` is the output at time ``j + start_offset``."""

    labels: tuple[int, ...]
    start_offset: int = 0

    def __post_init__(self):
        if not self.labels:
            raise ValueError("a trace holds at least one label")
        if self.start_offset > 0:
            raise ValueError("start_offset must be <= 0")

    @property
    def end(self) -> int:
        return self.start_offset + len(self.labels) - 1

    def at(self, time: int) -> int:
        return self.labels[time - self.start_offset]


def _label_paths(system: DynamicalSystem, x0: np.ndarray, past: int, future: int) -> np.ndarray:
    n = x0.shape[0]
    out = np.empty((n, past + future + 1), dtype=np.int64)
    x = x0
    out[:, past] = system.output(x)
    for j in range(1, future + 1):
        x = system.step(x)
        out[:, past + j] = system.output(x)
    x = x0
    for j in range(1, past + 1):
        x = system.inverse_step(x)
        out[:, past - j] = system.output(x)
    return out


def simulate_trace(system: DynamicalSystem, seed: int, past: int = 0, future: int = 0,
                   x0=None) -> Trace:
    """Labels ``h(f^i(x0))`` for ``i = -past .. future`` with ``x0`` drawn from ``seed``.

    ``x0`` overrides the sampled initial state.
    """
    if past < 0 or future < 0:
        raise ValueError("past and future must be nonnegative")
    if past > 0 and not system.has_inverse:
        raise PastUnavailable(f"{system.name} has no inverse; past must be 0")
    state = system.initial_state(seed) if x0 is None else np.asarray(x0, dtype=float)
    labels = _label_paths(system, state.reshape(1, -1), past, future)[0]
    return Trace(tuple(int(a) for a in labels), -past)


def chunk_rng(key: tuple[int, ...], chunk: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=key[0], spawn_key=tuple(key[1:]) + (chunk,))
    return np.random.default_rng(seq)


def sample_initial_states(system: DynamicalSystem, n: int, key: tuple[int, ...]) -> np.ndarray:
    """``n`` initial states; chunk ``c`` is drawn from a generator seeded by ``(*key, c)``."""
    n_chunks = -(-n // CHUNK_SIZE)
    parts = [system.sample_initial(chunk_rng(key, c), min(CHUNK_SIZE, n - c * CHUNK_SIZE))
             for c in range(n_chunks)]
    if not parts:
        return np.empty((0, system.dimension))
    return np.concatenate(parts)


def sample_label_paths(system: DynamicalSystem, n: int, past: int, future: int,
                       key: tuple[int, ...], threads: int = 1) -> np.ndarray:
    """Label paths of ``n`` sampled trajectories, shape ``(n, past + future + 1)``.

    Column ``j`` holds the output at time ``j - past``. Results depend only on
    ``key`` and ``n``, never on ``threads``.
    """
    if past > 0 and not system.has_inverse:
        raise PastUnavailable(f"{system.name} has no inverse; past must be 0")
    n_chunks = -(-n // CHUNK_SIZE)

    def run(c):
        size = min(CHUNK_SIZE, n - c * CHUNK_SIZE)
        x0 = system.sample_initial(chunk_rng(key, c), size)
        return _label_paths(system, x0, past, future)

    if n_chunks == 0:
        return np.empty((0, past + future + 1), dtype=np.int64)
    if threads > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(n_chunks)))
    else:
        parts = [run(c) for c in range(n_chunks)]
    return np.concatenate(parts)
