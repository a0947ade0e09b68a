"""Dirichlet priors dir_{s,t}: density, monomial moments, conjugate update, sampling.

The near-ignorance set is every dir_{s,t} with a fixed strength ``s`` and mean
``t`` ranging over the open simplex. ``PriorSet`` carries the strength and the
smallest admissible t_i used when optimizing over that set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .core import Chances, CountVector, NearIgnoranceError

_T_TOL = 1e-12


class BoundaryDivergence(NearIgnoranceError):
    """The density is unbounded at the requested boundary point."""


@dataclass(frozen=True)
class DirichletSpec:
    s: float
    t: tuple[float, ...]

    def __post_init__(self):
        if not (self.s > 0 and math.isfinite(self.s)):
            raise NearIgnoranceError(f"prior strength must be positive, got {self.s!r}")
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise NearIgnoranceError("mean parameter t needs length >= 2")
        if np.any(t <= 0) or not np.all(np.isfinite(t)):
            raise NearIgnoranceError(f"t must lie in the open simplex, got {t.tolist()}")
        total = math.fsum(t)
        if abs(total - 1.0) > _T_TOL * t.size:
            raise NearIgnoranceError(f"t sums to {total!r}, not 1")
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "t", tuple(float(v) for v in t / total))

    @classmethod
    def from_alpha(cls, alpha) -> DirichletSpec:
        alpha = np.asarray(alpha, dtype=float)
        s = math.fsum(alpha)
        return cls(s, tuple(alpha / s))

    @property
    def k(self) -> int:
        return len(self.t)

    @property
    def alpha(self) -> np.ndarray:
        return self.s * np.asarray(self.t)


@dataclass(frozen=True)
class PriorSet:
    """M0 = {dir_{s,t} : t in T}, searched over t_i >= boundary_gap."""

    s: float
    k: int
    boundary_gap: float = 1e-8

    def __post_init__(self):
        if not self.s > 0:
            raise NearIgnoranceError("prior strength must be positive")
        if self.k < 2:
            raise NearIgnoranceError("need k >= 2 categories")
        if not 0 < self.boundary_gap < 0.5 or self.boundary_gap * self.k >= 1:
            raise NearIgnoranceError(f"boundary_gap {self.boundary_gap!r} out of range")

    def with_gap(self, gap: float) -> PriorSet:
        return PriorSet(self.s, self.k, gap)

    def member(self, t) -> DirichletSpec:
        return DirichletSpec(self.s, tuple(t))


def log_density(spec: DirichletSpec, theta: Chances) -> float:
    alpha = spec.alpha
    x = theta.as_array()
    if x.size != alpha.size:
        raise NearIgnoranceError("dimension mismatch between prior and chances")
    log_norm = gammaln(spec.s) - np.sum(gammaln(alpha))
    total = log_norm
    for a, xi in zip(alpha, x):
        if xi == 0.0:
            if a < 1:
                raise BoundaryDivergence(f"density diverges at theta_i = 0 with s*t_i = {a!r}")
            if a > 1:
                return -math.inf
            continue
        total += (a - 1) * math.log(xi)
    return float(total)


def log_moment(spec: DirichletSpec, counts: CountVector) -> float:
    if counts.k != spec.k:
        raise NearIgnoranceError("dimension mismatch between prior and counts")
    alpha = spec.alpha
    n = counts.as_array()
    used = n > 0
    if not np.any(used):
        return 0.0
    return float(
        gammaln(spec.s)
        - gammaln(spec.s + counts.total)
        + np.sum(gammaln(alpha[used] + n[used]) - gammaln(alpha[used]))
    )


def moment(spec: DirichletSpec, counts: CountVector) -> float:
    """E[prod theta_i^{n_i'}] under dir_{s,t}: the prior probability of a dataset with counts n'."""
    return math.exp(log_moment(spec, counts))


def posterior_update(spec: DirichletSpec, counts: CountVector) -> DirichletSpec:
    if counts.k != spec.k:
        raise NearIgnoranceError("dimension mismatch between prior and counts")
    if counts.total == 0:
        return spec
    return DirichletSpec.from_alpha(spec.alpha + counts.as_array())


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_log(spec: DirichletSpec, rng, n: int) -> np.ndarray:
    """Draw ``n`` points and return log(theta), shape (n, k).

    Gamma(a) for a < 1 is drawn as Gamma(a + 1) * U**(1/a), kept in log space so
    that shapes near the boundary gap do not collapse to exact zeros before
    normalization.
    """
    if n < 1:
        raise NearIgnoranceError("need at least one sample")
    rng = _as_rng(rng)
    alpha = spec.alpha
    small = alpha < 1
    shape = np.where(small, alpha + 1.0, alpha)
    g = rng.standard_gamma(shape, size=(n, alpha.size))
    log_g = np.log(g)
    if np.any(small):
        u = rng.random(size=(n, int(small.sum())))
        log_g[:, small] += np.log(u) / alpha[small]
    return log_g - logsumexp(log_g, axis=1, keepdims=True)


def sample(spec: DirichletSpec, rng, n: int) -> np.ndarray:
    """Draw ``n`` Dirichlet points as an (n, k) array; rows are Chances values."""
    return np.exp(sample_log(spec, rng, n))
