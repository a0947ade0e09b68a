"""Observation channels P(S | X) and the likelihood P(s | theta) they induce.

Every channel is reduced to a table of log emission values log P(s_i | X = x_j)
for the observed s_i, one row per distinct observation with its multiplicity.
The likelihood of a point theta is then the product over rows of the mixture
sum_j P(s_i | x_j) theta_j, evaluated in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .core import (
    Chances,
    ManifestDataset,
    NearIgnoranceError,
    ObservationKind,
    SimplexVertex,
)

ROW_TOL = 1e-9


class OutOfRange(NearIgnoranceError):
    pass


class UnknownSymbol(NearIgnoranceError):
    pass


class KindMismatch(NearIgnoranceError):
    pass


class DiscreteChannel:
    """Row-stochastic k x m emission matrix; row j is the law of S given X = x_j."""

    kind = ObservationKind.DISCRETE

    def __init__(self, emission, symbols: Sequence[str] | None = None,
                 states: Sequence[str] | None = None):
        e = np.array(emission, dtype=float)
        if e.ndim != 2 or e.shape[0] < 2 or e.shape[1] < 1:
            raise NearIgnoranceError("emission must be a k x m matrix with k >= 2")
        if not np.all(np.isfinite(e)) or np.any(e < 0):
            raise NearIgnoranceError("emission probabilities must be finite and non-negative")
        sums = e.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_TOL)
        if bad.size:
            raise NearIgnoranceError(f"emission row {int(bad[0])} sums to {sums[bad[0]]!r}")
        self.emission = e / sums[:, None]
        self.emission.setflags(write=False)
        k, m = e.shape
        self.symbols = tuple(symbols) if symbols is not None else tuple(str(i) for i in range(m))
        self.states = tuple(states) if states is not None else tuple(f"x{j + 1}" for j in range(k))
        if len(self.symbols) != m or len(set(self.symbols)) != m:
            raise NearIgnoranceError("symbol table must name each column exactly once")
        if len(self.states) != k:
            raise NearIgnoranceError("state table must name each row exactly once")

    @property
    def k(self) -> int:
        return self.emission.shape[0]

    @property
    def m(self) -> int:
        return self.emission.shape[1]

    def symbol_id(self, label: str) -> int:
        try:
            return self.symbols.index(label)
        except ValueError:
            raise UnknownSymbol(f"symbol {label!r} not in {list(self.symbols)}") from None

    def emission_column(self, obs) -> np.ndarray:
        """P(S = obs | X = x_j) for every state j."""
        if isinstance(obs, bool) or not isinstance(obs, (int, np.integer)):
            raise KindMismatch(f"discrete channel needs an integer symbol id, got {obs!r}")
        if not 0 <= obs < self.m:
            raise UnknownSymbol(f"symbol id {obs} outside 0..{self.m - 1}")
        return self.emission[:, obs]

    def log_emission_table(self, data: ManifestDataset) -> tuple[np.ndarray, np.ndarray]:
        _check_kind(self, data)
        ids = np.asarray(data.observations, dtype=int)
        if ids.size and (ids.min() < 0 or ids.max() >= self.m):
            bad = ids[(ids < 0) | (ids >= self.m)][0]
            raise UnknownSymbol(f"symbol id {bad} outside 0..{self.m - 1}")
        mult = np.bincount(ids, minlength=self.m).astype(float)
        used = np.flatnonzero(mult)
        with np.errstate(divide="ignore"):
            table = np.log(self.emission[:, used].T)
        return table, mult[used]

    def sample_symbols(self, states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        cum = np.cumsum(self.emission, axis=1)
        u = rng.random(states.size)
        out = (u[:, None] >= cum[states]).sum(axis=1)
        return np.minimum(out, self.m - 1)

    def __repr__(self) -> str:
        return f"DiscreteChannel(k={self.k}, m={self.m}, symbols={self.symbols})"


class IdentityChannel(DiscreteChannel):
    """S_i = X_i: the latent variable is observed directly."""

    def __init__(self, k: int, symbols: Sequence[str] | None = None):
        if k < 2:
            raise NearIgnoranceError("identity channel needs k >= 2")
        super().__init__(np.eye(k), symbols=symbols, states=symbols)

    def __repr__(self) -> str:
        return f"IdentityChannel(k={self.k})"


class GaussianChannel:
    """S | X = x_j ~ Normal(mu_j, sigma_j^2)."""

    kind = ObservationKind.CONTINUOUS

    def __init__(self, params: Sequence[tuple[float, float]], states: Sequence[str] | None = None):
        p = np.array(params, dtype=float)
        if p.ndim != 2 or p.shape[1] != 2 or p.shape[0] < 2:
            raise NearIgnoranceError("gaussian channel needs k >= 2 (mu, sigma) pairs")
        if not np.all(np.isfinite(p)) or np.any(p[:, 1] <= 0):
            raise NearIgnoranceError("gaussian channel needs finite mu and sigma > 0")
        self.mu = p[:, 0].copy()
        self.sigma = p[:, 1].copy()
        self.states = tuple(states) if states is not None else tuple(f"x{j + 1}" for j in range(len(p)))

    @property
    def k(self) -> int:
        return self.mu.size

    @property
    def params(self) -> list[tuple[float, float]]:
        return list(zip(self.mu.tolist(), self.sigma.tolist()))

    def _log_pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)[..., None]
        z = (x - self.mu) / self.sigma
        return -0.5 * z * z - np.log(self.sigma) - 0.5 * math.log(2 * math.pi)

    def emission_column(self, obs) -> np.ndarray:
        if isinstance(obs, bool) or not isinstance(obs, (int, float, np.number)):
            raise KindMismatch(f"gaussian channel needs a real observation, got {obs!r}")
        return np.exp(self._log_pdf(float(obs)))

    def log_emission_table(self, data: ManifestDataset) -> tuple[np.ndarray, np.ndarray]:
        _check_kind(self, data)
        values, mult = np.unique(np.asarray(data.observations, dtype=float), return_counts=True)
        return self._log_pdf(values).reshape(-1, self.k), mult.astype(float)

    def sample_symbols(self, states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return self.mu[states] + self.sigma[states] * rng.standard_normal(states.size)

    def __repr__(self) -> str:
        return f"GaussianChannel({self.params})"


Channel = DiscreteChannel | GaussianChannel


def _check_kind(channel, data: ManifestDataset):
    if data.kind != channel.kind:
        raise KindMismatch(f"{data.kind} data cannot be read through a {channel.kind} channel")


def binary_test_channel(eps1: float, eps2: float) -> DiscreteChannel:
    """Diagnostic test with P(+ | healthy) = eps1 and P(- | ill) = eps2.

    States are ordered (ill, healthy) and symbols (+, -), so theta_1 is the
    proportion of ill individuals.
    """
    for name, eps in (("eps1", eps1), ("eps2", eps2)):
        if not 0 <= eps < 1:
            raise OutOfRange(f"{name} = {eps!r} outside [0, 1)")
    emission = [[1 - eps2, eps2], [eps1, 1 - eps1]]
    return DiscreteChannel(emission, symbols=("+", "-"), states=("ill", "healthy"))


class Likelihood:
    """theta -> P(s | theta) for a fixed channel and dataset, in log space."""

    def __init__(self, channel, data: ManifestDataset):
        self.channel = channel
        self.data = data
        self.table, self.mult = channel.log_emission_table(data)
        self.k = channel.k

    @property
    def n_obs(self) -> int:
        return len(self.data)

    def log_at(self, log_theta) -> np.ndarray:
        """log P(s | theta) for log_theta of shape (..., k)."""
        log_theta = np.asarray(log_theta, dtype=float)
        if self.mult.size == 0:
            return np.zeros(log_theta.shape[:-1])
        # (..., U): log of each distinct mixture value
        mix = logsumexp(log_theta[..., None, :] + self.table, axis=-1)
        with np.errstate(invalid="ignore"):
            out = mix @ self.mult
        if np.any(np.isnan(out)):
            out = np.where(np.isnan(out), -np.inf, out)
        return out

    def monomial_exponents(self) -> np.ndarray | None:
        """Exponents m when L(theta) = c * prod theta_j^{m_j}, else None.

        That happens when every observed symbol is emitted by exactly one state,
        as for an identity channel.
        """
        if self.mult.size == 0:
            return np.zeros(self.k)
        alive = np.isfinite(self.table)
        if not np.all(alive.sum(axis=1) == 1):
            return None
        return alive.T.astype(float) @ self.mult

    def log_at_point(self, theta: Chances) -> float:
        return float(self.log_at(theta.log()))

    def factor_min_at_vertices(self, vertices: Sequence[int]) -> float:
        """Smallest single-observation mixture value over the given vertices."""
        if self.mult.size == 0:
            return 1.0
        return float(np.exp(self.table[:, list(vertices)]).min())


def likelihood_point(channel, observation, theta: Chances) -> float:
    """P(S_i = observation | theta) = sum_j P(observation | x_j) theta_j."""
    column = channel.emission_column(observation)
    return float(np.dot(column, theta.as_array()))


def log_likelihood_dataset(channel, data: ManifestDataset, theta: Chances) -> float:
    return Likelihood(channel, data).log_at_point(theta)


@dataclass(frozen=True)
class PositivityReport:
    strictly_positive: bool
    witness: Chances | None = None


def strict_positivity_report(channel, data: ManifestDataset) -> PositivityReport:
    """Whether P(s | theta) > 0 on the whole closed simplex.

    Each factor of the likelihood is affine in theta, so it is positive
    everywhere iff it is positive at every vertex.
    """
    lik = Likelihood(channel, data)
    if lik.mult.size == 0:
        return PositivityReport(True)
    zero = ~np.isfinite(lik.table)
    dead_states = np.flatnonzero(zero.any(axis=0))
    if dead_states.size == 0:
        return PositivityReport(True)
    return PositivityReport(False, SimplexVertex(int(dead_states[0])).to_chances(channel.k))
