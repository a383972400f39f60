"""Averages, tail masses, and uniform-integrability profiles.

The finite diagnostic for L1-style integrability of an observable F is the
tail mass (1/M) * sum_{|F(y)| > k} |F(y)|: bounded observables have tails
that vanish as the threshold k grows, while a delta spike of height M keeps
tail mass 1 at every threshold below M no matter how large M is.  A family
of observables indexed by growing M is uniformly integrable when the sup of
its tail masses still vanishes as k grows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dynamics import Observable

__all__ = [
    "IntegrabilityProfile",
    "average",
    "tail_mass",
    "small_set_mass",
    "integrability_profile",
    "family_profile",
    "default_thresholds",
]


@dataclass(frozen=True)
class IntegrabilityProfile:
    """Tail masses of |F| over an increasing threshold grid."""

    thresholds: np.ndarray
    tail_masses: np.ndarray
    av_abs: float
    max_abs: float

    def __post_init__(self):
        ks = np.asarray(self.thresholds, dtype=np.float64)
        tm = np.asarray(self.tail_masses, dtype=np.float64)
        ks.setflags(write=False)
        tm.setflags(write=False)
        object.__setattr__(self, "thresholds", ks)
        object.__setattr__(self, "tail_masses", tm)

    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.thresholds.tolist(), self.tail_masses.tolist()))


def average(F: Observable) -> float:
    """Av(F) = (1/M) * sum F(y); numpy pairwise summation."""
    return float(np.sum(F.values) / F.size)


def tail_mass(F: Observable, k: float) -> float:
    """(1/M) * sum_{|F(y)| > k} |F(y)|."""
    if k <= 0:
        raise ValueError("threshold must be positive")
    a = np.abs(F.values)
    return float(np.sum(a[a > k]) / F.size)


def small_set_mass(F: Observable, A: Iterable[int]) -> float:
    """(1/M) * sum_{y in A} |F(y)| for a subset A of Y."""
    idx = np.asarray(list(A), dtype=np.int64)
    if idx.size == 0:
        return 0.0
    if idx.min() < 0 or idx.max() >= F.size:
        raise IndexError("subset contains points outside 0..M-1")
    return float(np.sum(np.abs(F.values[idx])) / F.size)


def default_thresholds(F: Observable) -> np.ndarray:
    """Geometric grid 1, 2, 4, ..., up to 2*max|F| (captures tail decay scale)."""
    max_abs = float(np.max(np.abs(F.values), initial=0.0))
    top = max(2.0 * max_abs, 1.0)
    ks = [1.0]
    while ks[-1] < top:
        ks.append(ks[-1] * 2.0)
    return np.asarray(ks)


def integrability_profile(F: Observable, ks: Sequence[float] | None = None) -> IntegrabilityProfile:
    """Full tail-mass profile in one pass over F."""
    if ks is None:
        ks = default_thresholds(F)
    ks = np.asarray(ks, dtype=np.float64)
    if ks.size == 0:
        raise ValueError("threshold list is empty")
    if not (np.diff(ks) > 0).all() or ks[0] <= 0:
        raise ValueError("thresholds must be positive and strictly increasing")
    a = np.sort(np.abs(F.values))
    suffix = np.concatenate([np.cumsum(a[::-1])[::-1], [0.0]])
    pos = np.searchsorted(a, ks, side="right")
    tails = suffix[pos] / F.size
    return IntegrabilityProfile(
        thresholds=ks,
        tail_masses=tails,
        av_abs=float(np.sum(np.abs(F.values)) / F.size),
        max_abs=float(np.max(np.abs(F.values), initial=0.0)),
    )


def family_profile(family: Sequence[Observable], ks: Sequence[float]) -> IntegrabilityProfile:
    """Sup over an observable family of per-member tail masses.

    The family plays the role of a sequence F_n on growing spaces: it is
    uniformly integrable exactly when these sup tail masses vanish as the
    threshold grows.
    """
    if not family:
        raise ValueError("family is empty")
    profiles = [integrability_profile(F, ks) for F in family]
    return IntegrabilityProfile(
        thresholds=np.asarray(ks, dtype=np.float64),
        tail_masses=np.max([p.tail_masses for p in profiles], axis=0),
        av_abs=max(p.av_abs for p in profiles),
        max_abs=max(p.max_abs for p in profiles),
    )
