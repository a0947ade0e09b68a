"""Shared domain types: points of the simplex, count vectors, datasets, results."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

SIMPLEX_TOL = 1e-9


class NearIgnoranceError(ValueError):
    """Base class for input and numerical errors raised by this package."""


class NegativeEntry(NearIgnoranceError):
    pass


class SumNotOne(NearIgnoranceError):
    pass


class EmptyDataset(NearIgnoranceError):
    pass


@dataclass(frozen=True)
class Chances:
    """A point of the closed probability simplex."""

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) < 2:
            raise NearIgnoranceError("chances need at least two categories")

    @property
    def k(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def log(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.as_array())


def validate_chances(raw: Sequence[float]) -> Chances:
    """Check `raw` lies on the simplex (to 1e-9) and renormalize it exactly."""
    arr = np.asarray(raw, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise NearIgnoranceError("chances need a vector of length >= 2")
    if not np.all(np.isfinite(arr)):
        raise NearIgnoranceError("chances must be finite")
    if np.any(arr < 0):
        raise NegativeEntry(f"negative entry in {arr.tolist()}")
    total = math.fsum(arr)
    if abs(total - 1.0) > SIMPLEX_TOL:
        raise SumNotOne(f"entries sum to {total!r}")
    return Chances(tuple(float(v) for v in arr / total))


@dataclass(frozen=True)
class SimplexVertex:
    index: int

    def to_chances(self, k: int) -> Chances:
        if not 0 <= self.index < k:
            raise NearIgnoranceError(f"vertex {self.index} outside 0..{k - 1}")
        vals = [0.0] * k
        vals[self.index] = 1.0
        return Chances(tuple(vals))


@dataclass(frozen=True)
class CountVector:
    """Category counts n' = (n_1', ..., n_k') of a (future) dataset."""

    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) < 2:
            raise NearIgnoranceError("count vector needs at least two categories")
        if any(int(c) != c or c < 0 for c in self.counts):
            raise NearIgnoranceError(f"counts must be non-negative integers: {self.counts}")
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))

    @classmethod
    def of(cls, *counts: int) -> CountVector:
        return cls(tuple(counts))

    @classmethod
    def uniform_outcome(cls, k: int, index: int, total: int) -> CountVector:
        """The dataset d^i: all `total` outcomes equal to category `index`."""
        counts = [0] * k
        counts[index] = total
        return cls(tuple(counts))

    @classmethod
    def zeros(cls, k: int) -> CountVector:
        return cls((0,) * k)

    @property
    def k(self) -> int:
        return len(self.counts)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float)


@dataclass(frozen=True)
class RelativeFrequencies:
    freqs: tuple[float, ...]

    def to_chances(self) -> Chances:
        return Chances(self.freqs)


def frequencies(counts: CountVector) -> RelativeFrequencies:
    """Relative frequencies f' = n'/N'; the maximizer of the predictive monomial."""
    if counts.total == 0:
        raise EmptyDataset("relative frequencies of an empty count vector")
    n = counts.total
    return RelativeFrequencies(tuple(c / n for c in counts.counts))


def log_monomial(counts: CountVector, log_theta: np.ndarray) -> np.ndarray:
    """log of prod theta_i^{n_i'} with 0^0 = 1, vectorized over the last axis."""
    n = counts.as_array()
    log_theta = np.asarray(log_theta, dtype=float)
    used = n > 0
    if not np.any(used):
        return np.zeros(log_theta.shape[:-1])
    return np.sum(n[used] * log_theta[..., used], axis=-1)


def monomial_max(counts: CountVector) -> float:
    """sup over the simplex of prod theta_i^{n_i'}, attained at the frequencies."""
    if counts.total == 0:
        raise EmptyDataset("monomial of an empty count vector")
    n = counts.total
    log_max = math.fsum(c * math.log(c / n) for c in counts.counts if c > 0)
    return math.exp(log_max)


class ObservationKind:
    DISCRETE = "discrete"
    CONTINUOUS = "continuous"


@dataclass(frozen=True)
class ManifestDataset:
    """Observed manifest values s_1..s_N: symbol ids or real numbers."""

    observations: tuple
    kind: str = ObservationKind.DISCRETE

    def __post_init__(self):
        if self.kind == ObservationKind.DISCRETE:
            obs = []
            for o in self.observations:
                if isinstance(o, bool) or int(o) != o:
                    raise NearIgnoranceError(f"discrete observation {o!r} is not a symbol id")
                obs.append(int(o))
            object.__setattr__(self, "observations", tuple(obs))
        elif self.kind == ObservationKind.CONTINUOUS:
            object.__setattr__(self, "observations", tuple(float(o) for o in self.observations))
        else:
            raise NearIgnoranceError(f"unknown dataset kind {self.kind!r}")

    @classmethod
    def discrete(cls, symbols: Sequence[int]) -> ManifestDataset:
        return cls(tuple(symbols), ObservationKind.DISCRETE)

    @classmethod
    def continuous(cls, values: Sequence[float]) -> ManifestDataset:
        return cls(tuple(values), ObservationKind.CONTINUOUS)

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> ManifestDataset:
        """Discrete dataset with counts[j] copies of symbol j."""
        symbols = [j for j, c in enumerate(counts) for _ in range(int(c))]
        return cls.discrete(symbols)

    def __len__(self) -> int:
        return len(self.observations)


METHODS = ("closed_form", "gauss_1d", "mc_importance")


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    method: str
    n_samples_or_nodes: int
    ess: float | None = None
    reliable: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise NearIgnoranceError(f"unknown estimation method {self.method!r}")
        if self.std_error < 0:
            raise NearIgnoranceError("negative standard error")
        deterministic = self.method != "mc_importance"
        if deterministic and self.std_error != 0:
            raise NearIgnoranceError(f"{self.method} estimates carry no sampling error")

    def band(self, n_se: float = 3.0) -> float:
        return n_se * self.std_error


@dataclass(frozen=True)
class BoundPair:
    lower: float
    upper: float
    lower_meta: Estimate | None = None
    upper_meta: Estimate | None = None
    tol: float = field(default=1e-9, repr=False)

    def __post_init__(self):
        slack = self.tol + self.error_band()
        if self.lower > self.upper + slack:
            raise NearIgnoranceError(
                f"lower bound {self.lower!r} exceeds upper bound {self.upper!r}"
            )

    def error_band(self, n_se: float = 3.0) -> float:
        band = 0.0
        for meta in (self.lower_meta, self.upper_meta):
            if meta is not None:
                band += meta.band(n_se)
        return band

    @property
    def width(self) -> float:
        return self.upper - self.lower
