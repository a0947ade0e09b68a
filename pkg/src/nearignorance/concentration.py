"""Concentration experiments on a sequence of Dirichlet densities.

p_n = Dirichlet(1, ..., n, ..., 1) piles up on one vertex as n grows. When that
vertex maximizes f, E_n(f) -> f_max forces the mass of every superlevel set
{f >= f_max - delta} to 1, and the likelihood-weighted ratio E_n(L f) / E_n(L)
follows f_max as long as L does not vanish at the maximizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import Likelihood
from .core import CountVector, Estimate, ManifestDataset, NearIgnoranceError, frequencies
from .dirichlet import DirichletSpec, moment
from .quadrature import QuadratureConfig, expectation_ratio, mass_of_superlevel_set


class DegenerateL(NearIgnoranceError):
    """The likelihood vanishes where f is maximal, so the ratio need not reach f_max."""


@dataclass(frozen=True)
class ConcentrationPoint:
    n: int
    expectation: float
    mass: Estimate


@dataclass(frozen=True)
class RatioPoint:
    n: int
    ratio: Estimate


def concentrating_density(n: float, k: int, vertex: int) -> DirichletSpec:
    """Dirichlet with alpha_vertex = n and every other alpha_j = 1 (Beta(n, 1) for k = 2)."""
    if not n > 0:
        raise NearIgnoranceError("sequence index n must be positive")
    alpha = np.ones(k)
    alpha[vertex] = n
    return DirichletSpec.from_alpha(alpha)


def _check_n_list(n_list: Sequence[int]):
    if not n_list:
        raise NearIgnoranceError("empty n_list")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise NearIgnoranceError("n_list must be strictly increasing")


def _default_vertex(f: CountVector) -> int:
    return int(np.argmax(f.counts))


def concentration_experiment(n_list: Sequence[int], f: CountVector, delta: float,
                             cfg: QuadratureConfig = QuadratureConfig(),
                             vertex: int | None = None) -> list[ConcentrationPoint]:
    """Trajectory of (n, E_n(f), P_n(f >= f_max - delta))."""
    _check_n_list(n_list)
    if not delta > 0:
        raise NearIgnoranceError("delta must be positive")
    vertex = _default_vertex(f) if vertex is None else vertex
    out = []
    for n in n_list:
        spec = concentrating_density(n, f.k, vertex)
        out.append(ConcentrationPoint(n, moment(spec, f), mass_of_superlevel_set(spec, f, delta, cfg)))
    return out


def ratio_experiment(n_list: Sequence[int], f: CountVector, channel, data: ManifestDataset,
                     cfg: QuadratureConfig = QuadratureConfig(),
                     vertex: int | None = None) -> list[RatioPoint]:
    """Trajectory of (n, E_n(L f) / E_n(L)) with L the likelihood of `data` through `channel`."""
    _check_n_list(n_list)
    if channel.k != f.k:
        raise NearIgnoranceError("channel and monomial disagree on k")
    lik = Likelihood(channel, data)
    argmax = np.asarray(frequencies(f).freqs)
    with np.errstate(divide="ignore"):
        log_l = float(lik.log_at(np.log(argmax)))
    if not math.isfinite(log_l):
        raise DegenerateL(f"likelihood is zero at the maximizer {argmax.tolist()} of f")
    vertex = _default_vertex(f) if vertex is None else vertex
    out = []
    for n in n_list:
        spec = concentrating_density(n, f.k, vertex)
        out.append(RatioPoint(n, expectation_ratio(spec, lik.log_at, f, cfg)))
    return out
