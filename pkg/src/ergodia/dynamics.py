"""Finite measure-preserving systems on Y = {0, ..., M-1} with uniform measure.

A dynamical system here is a permutation T of a finite set together with
real-valued observables F; the central quantity is the prefix ergodic mean

    A_n(F, T, y) = (1/n) * sum_{i < n} F(T^i y).

Everything in this module is a pure function over immutable inputs, so callers
may evaluate means for disjoint start points in parallel without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "FinitePermutation",
    "Observable",
    "MeanSeries",
    "apply_power",
    "orbit_and_period",
    "cycle_decomposition",
    "ergodic_means_prefix",
    "orbit_average",
    "gamma_series",
]


class FinitePermutation:
    """A bijection T of {0, ..., M-1}, stored as its image array.

    Cycle metadata (cycle id, position within cycle, cycle length per point)
    is computed lazily and memoized; all orbit queries after that are O(1)
    per step via array gathers.
    """

    __slots__ = ("image", "size", "_cycles", "_cycle_id", "_cycle_pos", "_cycle_len")

    def __init__(self, image: Sequence[int] | np.ndarray, *, validate: bool = True):
        image = np.asarray(image, dtype=np.int64)
        if image.ndim != 1 or image.size == 0:
            raise ValueError("image must be a non-empty 1-d array")
        if validate and not _is_permutation(image):
            raise ValueError("image array is not a permutation of 0..M-1")
        self.image = image
        self.image.setflags(write=False)
        self.size = int(image.size)
        self._cycles = None
        self._cycle_id = None
        self._cycle_pos = None
        self._cycle_len = None

    @classmethod
    def identity(cls, size: int) -> "FinitePermutation":
        return cls(np.arange(size, dtype=np.int64), validate=False)

    @classmethod
    def from_cycles(cls, cycles: Sequence[Sequence[int]], size: int) -> "FinitePermutation":
        """Build from a list of cycles; points not mentioned are fixed."""
        image = np.arange(size, dtype=np.int64)
        for cyc in cycles:
            for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
                image[a] = b
        return cls(image)

    def __call__(self, y: int) -> int:
        return int(self.image[y])

    def __eq__(self, other) -> bool:
        return isinstance(other, FinitePermutation) and np.array_equal(self.image, other.image)

    def __repr__(self) -> str:
        return f"FinitePermutation(size={self.size})"

    # -- cycle structure ---------------------------------------------------

    def _ensure_cycles(self) -> None:
        if self._cycles is not None:
            return
        image = self.image
        M = self.size
        cycle_id = np.full(M, -1, dtype=np.int64)
        cycle_pos = np.empty(M, dtype=np.int64)
        cycles: list[np.ndarray] = []
        for start in range(M):
            if cycle_id[start] >= 0:
                continue
            cyc = [start]
            cycle_id[start] = len(cycles)
            cycle_pos[start] = 0
            z = int(image[start])
            while z != start:
                cycle_id[z] = len(cycles)
                cycle_pos[z] = len(cyc)
                cyc.append(z)
                z = int(image[z])
            cycles.append(np.asarray(cyc, dtype=np.int64))
        # descending length, ties broken by smallest contained element
        order = sorted(range(len(cycles)), key=lambda i: (-len(cycles[i]), int(cycles[i][0])))
        remap = np.empty(len(cycles), dtype=np.int64)
        for new, old in enumerate(order):
            remap[old] = new
        self._cycles = [cycles[i] for i in order]
        self._cycle_id = remap[cycle_id]
        self._cycle_pos = cycle_pos
        self._cycle_len = np.asarray([len(c) for c in self._cycles], dtype=np.int64)[self._cycle_id]

    @property
    def cycles(self) -> list[np.ndarray]:
        """Disjoint cycles partitioning Y, lengths descending."""
        self._ensure_cycles()
        return self._cycles

    def cycle_of(self, y: int) -> tuple[np.ndarray, int]:
        """The cycle through y and the position of y in it."""
        self._ensure_cycles()
        return self._cycles[self._cycle_id[y]], int(self._cycle_pos[y])

    def period(self, y: int) -> int:
        self._ensure_cycles()
        return int(self._cycle_len[y])

    def trajectory(self, y: int, n: int) -> np.ndarray:
        """[y, T(y), ..., T^{n-1}(y)] in O(n) via the memoized cycle order."""
        if not 0 <= y < self.size:
            raise IndexError(f"start point {y} out of range for size {self.size}")
        cyc, pos = self.cycle_of(y)
        return cyc[(pos + np.arange(n, dtype=np.int64)) % len(cyc)]


def _is_permutation(image: np.ndarray) -> bool:
    if image.min(initial=0) < 0 or image.max(initial=-1) >= image.size:
        return False
    counts = np.bincount(image, minlength=image.size)
    return bool((counts == 1).all())


@dataclass(frozen=True)
class Observable:
    """A real-valued function F on {0, ..., M-1}.

    Stored densely as float64; an optional exact rule gives Fraction values
    for rational-arithmetic evaluation, and an optional closed-form `rule`
    mirrors the dense values (test hook: both must agree pointwise).
    """

    size: int
    values: np.ndarray
    name: str = "observable"
    rule: Callable[[int], float] | None = field(default=None, compare=False)
    exact_rule: Callable[[int], Fraction] | None = field(default=None, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.size,):
            raise ValueError(f"values must have shape ({self.size},)")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values, name: str = "observable") -> "Observable":
        values = np.asarray(values, dtype=np.float64)
        return cls(size=values.size, values=values, name=name)

    @classmethod
    def from_rule(cls, size: int, rule: Callable[[int], float], name: str,
                  exact_rule: Callable[[int], Fraction] | None = None) -> "Observable":
        values = np.fromiter((rule(y) for y in range(size)), dtype=np.float64, count=size)
        return cls(size=size, values=values, name=name, rule=rule, exact_rule=exact_rule)

    def __call__(self, y: int) -> float:
        return float(self.values[y])

    def exact(self, y: int) -> Fraction:
        if self.exact_rule is not None:
            return self.exact_rule(int(y))
        v = float(self.values[y])
        if v != int(v):
            raise ValueError(f"observable {self.name!r} has no exact rule and value {v} is not integral")
        return Fraction(int(v))

    def constant(self) -> bool:
        return bool((self.values == self.values[0]).all())


@dataclass(frozen=True)
class MeanSeries:
    """Prefix ergodic means A_1..A_n for one start point.

    means[n-1] == A_n(F, T, start).  In Gamma coordinates the abscissa of
    A_n is n/M, spanning (0, k] for n up to k*M.
    """

    size: int
    start: int
    n_max: int
    means: np.ndarray
    scale: float = 1.0
    exact_means: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64)
        means.setflags(write=False)
        object.__setattr__(self, "means", means)

    def mean_at(self, n: int) -> float:
        """A_n for 1 <= n <= n_max."""
        return float(self.means[n - 1])


# -- operations -----------------------------------------------------------


def apply_power(T: FinitePermutation, y: int, n: int) -> int:
    """T^n(y); period-reduced, so cost is O(min(n, p(y)))."""
    if not 0 <= y < T.size:
        raise IndexError(f"point {y} out of range for size {T.size}")
    if n < 0:
        raise ValueError("power must be nonnegative")
    if n == 0:
        return y
    cyc, pos = T.cycle_of(y)
    return int(cyc[(pos + n) % len(cyc)])


def orbit_and_period(T: FinitePermutation, y: int) -> tuple[list[int], int]:
    """The T-orbit of y starting at y, and its period p(y)."""
    if not 0 <= y < T.size:
        raise IndexError(f"point {y} out of range for size {T.size}")
    cyc, pos = T.cycle_of(y)
    return np.roll(cyc, -pos).tolist(), len(cyc)


def cycle_decomposition(T: FinitePermutation) -> list[list[int]]:
    """Disjoint cycles covering Y, lengths descending (including fixed points)."""
    return [c.tolist() for c in T.cycles]


def ergodic_means_prefix(
    F: Observable,
    T: FinitePermutation,
    y: int,
    n_max: int,
    *,
    exact: bool = False,
    scale: float = 1.0,
) -> MeanSeries:
    """A_1..A_{n_max} along the T-orbit of y, in a single O(n_max) pass.

    Double mode uses a float64 cumulative sum; exact mode carries Fractions
    (intended for oracle tests at M <= 1e4).
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    traj = T.trajectory(y, n_max)
    vals = F.values[traj]
    means = np.cumsum(vals) / np.arange(1, n_max + 1, dtype=np.float64)
    exact_means = None
    if exact:
        acc = Fraction(0)
        out = []
        for n, z in enumerate(traj, start=1):
            acc += F.exact(int(z))
            out.append(acc / n)
        exact_means = tuple(out)
        means = np.asarray([float(q) for q in exact_means])
    return MeanSeries(size=T.size, start=y, n_max=n_max, means=means,
                      scale=scale, exact_means=exact_means)


def orbit_average(F: Observable, T: FinitePermutation, y: int) -> float:
    """The orbit mean: (1/|Orb(y)|) * sum of F over the T-orbit of y."""
    if not 0 <= y < T.size:
        raise IndexError(f"point {y} out of range for size {T.size}")
    cyc, _ = T.cycle_of(y)
    return float(np.mean(F.values[cyc]))


def gamma_series(
    F: Observable,
    T: FinitePermutation,
    y: int,
    k: float,
    stride: int | None = None,
) -> tuple[np.ndarray, int]:
    """Points (n/M, A_n) for n = stride, 2*stride, ..., floor(k*M).

    Returns (array of shape (count, 3) with columns [n, n/M, A_n], stride).
    The default stride caps the output at ~1e5 points; the stride actually
    used is returned so output metadata can record it.
    """
    M = T.size
    n_total = int(np.floor(k * M))
    if n_total < 1:
        raise ValueError("k*M must be >= 1")
    if stride is None:
        stride = max(1, n_total // 100_000)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    series = ergodic_means_prefix(F, T, y, n_total, scale=k)
    ns = np.arange(stride, n_total + 1, stride, dtype=np.int64)
    points = np.column_stack([ns.astype(np.float64), ns / M, series.means[ns - 1]])
    return points, stride
