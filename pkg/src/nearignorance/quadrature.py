"""Posterior expectations of predictive monomials over the simplex.

Two estimators share one contract, both computing

    E(f | s) = int f L p dtheta / int L p dtheta

for a Dirichlet prior p, a likelihood L and the monomial f = prod theta_i^{n_i'}.

* k = 2, ``gauss_1d``: the prior is Beta(a, b) in theta_1. The integrand g is
  split as g(0)(1 - x) + g(1) x + x(1 - x) q(x); the linear part integrates in
  closed form, and q is integrated by Gauss-Jacobi quadrature against the
  bounded weight x^a (1 - x)^b. Endpoint singularities of the Beta density
  (a or b < 1, down to shapes of 1e-30) never meet a quadrature node, and
  likelihoods that are polynomials in theta of degree < 2n are integrated
  exactly.
* any k, ``mc_importance``: self-normalized importance sampling with the prior
  as proposal, so only likelihood weights are needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numba import njit
from scipy.linalg import eigh_tridiagonal
from scipy.linalg.lapack import dsterf
from scipy.optimize import brentq
from scipy.special import betainc

from .channels import Likelihood
from .core import CountVector, Estimate, ManifestDataset, NearIgnoranceError, log_monomial, monomial_max
from .dirichlet import DirichletSpec, log_moment, moment, sample_log

LogLik = Callable[[np.ndarray], np.ndarray]

ZERO_EVIDENCE = 1e-300
ESS_WARN_FRACTION = 0.01
# the three-term recurrence for the weights loses accuracy for strongly skewed
# weights; past this shape fall back to eigenvectors (slower, always accurate)
_FAST_RULE_MAX_SHAPE = 100.0


class ZeroEvidence(NearIgnoranceError):
    """The prior gives (numerically) no mass where the likelihood is positive."""


class NonFinite(NearIgnoranceError):
    pass


@dataclass(frozen=True)
class QuadratureConfig:
    gauss_nodes: int = 256
    mc_samples: int = 200_000
    seed: int = 0
    interior_clip: float = 1e-12
    method: str = "auto"

    def __post_init__(self):
        if self.gauss_nodes < 16:
            raise NearIgnoranceError("gauss_nodes must be >= 16")
        if self.mc_samples < 1000:
            raise NearIgnoranceError("mc_samples must be >= 1000")
        if self.method not in ("auto", "gauss", "mc"):
            raise NearIgnoranceError(f"unknown method {self.method!r}")

    def resolve(self, k: int) -> str:
        if self.method == "auto":
            return "gauss" if k == 2 else "mc"
        if self.method == "gauss" and k != 2:
            raise NearIgnoranceError("1-D Gauss quadrature needs k = 2")
        return self.method


@lru_cache(maxsize=4096)
def jacobi_rule(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nodes x, complements 1 - x and weights (summing to 1) for x^a (1 - x)^b on (0, 1).

    Golub-Welsch on the Jacobi recurrence in t = 2x - 1, weight
    (1 - t)^b (1 + t)^a. Normalizing the weights avoids the Gamma-function
    prefactor, which overflows for large shapes.
    """
    alpha, beta = b, a
    i = np.arange(n, dtype=float)
    ab = alpha + beta
    diag = np.empty(n)
    diag[0] = (beta - alpha) / (ab + 2.0)
    j = i[1:]
    diag[1:] = (beta**2 - alpha**2) / ((2 * j + ab) * (2 * j + ab + 2))
    off = np.sqrt(
        4 * j * (j + alpha) * (j + beta) * (j + ab)
        / ((2 * j + ab - 1) * (2 * j + ab) ** 2 * (2 * j + ab + 1))
    )
    if max(a, b) > _FAST_RULE_MAX_SHAPE:
        nodes, vecs = eigh_tridiagonal(diag, off)
        w = vecs[0] ** 2
    else:
        nodes = np.sort(dsterf(diag, off)[0])
        w = 1.0 / _christoffel_sums(nodes, diag, off)
    w = w / w.sum()
    x = (1.0 + nodes) / 2.0
    xc = (1.0 - nodes) / 2.0
    for arr in (x, xc, w):
        arr.setflags(write=False)
    return x, xc, w


@njit(cache=True)
def _christoffel_sums(nodes, diag, off):  # pragma: no cover - compiled
    """sum_m p_m(x_j)^2 over the orthonormal polynomials, rescaled to avoid overflow."""
    n = nodes.size
    norm = np.ones(n)
    for j in range(n):
        x = nodes[j]
        p_prev = 0.0
        p = 1.0
        total = 1.0
        for m in range(1, n):
            back = off[m - 2] * p_prev if m > 1 else 0.0
            p_new = ((x - diag[m - 1]) * p - back) / off[m - 1]
            p_prev = p
            p = p_new
            total += p * p
            r = abs(p)
            if r > 1e100:
                p /= r
                p_prev /= r
                total /= r * r
        norm[j] = total
    return norm


def _beta_expectations(a: float, b: float, g0, g1, x, xc, w, g_nodes) -> np.ndarray:
    """E[g] under Beta(a, b) for each column of g (endpoint-subtracted Gauss-Jacobi)."""
    g0 = np.asarray(g0)
    g1 = np.asarray(g1)
    lin = g0[None, :] * xc[:, None] + g1[None, :] * x[:, None]
    q = (g_nodes - lin) / (x * xc)[:, None]
    ab = a + b
    return g0 * (b / ab) + g1 * (a / ab) + (a * b / (ab * (ab + 1))) * (w @ q)


def _gauss_ratio(spec: DirichletSpec, loglik: LogLik, counts: CountVector,
                 cfg: QuadratureConfig) -> Estimate:
    a, b = spec.alpha
    x, xc, w = jacobi_rule(cfg.gauss_nodes, float(a), float(b))
    x = np.maximum(x, cfg.interior_clip)
    xc = np.maximum(xc, cfg.interior_clip)
    log_nodes = np.stack([np.log(x), np.log(xc)], axis=1)
    log_ends = np.array([[-np.inf, 0.0], [0.0, -np.inf]])
    with np.errstate(divide="ignore"):
        ll_nodes = np.asarray(loglik(log_nodes), dtype=float)
        ll_ends = np.asarray(loglik(log_ends), dtype=float)
    if np.any(np.isnan(ll_nodes)) or np.any(np.isnan(ll_ends)):
        raise NonFinite("likelihood evaluated to NaN")
    top = max(ll_nodes.max(), ll_ends.max())
    if not np.isfinite(top):
        raise ZeroEvidence("likelihood vanishes on every quadrature node")
    lik_nodes = np.exp(ll_nodes - top)
    lik_ends = np.exp(ll_ends - top)
    f_nodes = np.exp(log_monomial(counts, log_nodes))
    f_ends = np.exp(log_monomial(counts, log_ends))
    g_nodes = np.stack([lik_nodes, f_nodes * lik_nodes], axis=1)
    den, num = _beta_expectations(
        float(a), float(b),
        np.array([lik_ends[0], f_ends[0] * lik_ends[0]]),
        np.array([lik_ends[1], f_ends[1] * lik_ends[1]]),
        x, xc, w, g_nodes,
    )
    if not den > ZERO_EVIDENCE:
        raise ZeroEvidence(f"normalizing integral {den!r} (relative to the peak likelihood)")
    value = min(max(num / den, 0.0), 1.0)
    return Estimate(float(value), 0.0, "gauss_1d", cfg.gauss_nodes)


def _mc_ratio(spec: DirichletSpec, loglik: LogLik, counts: CountVector,
              cfg: QuadratureConfig) -> Estimate:
    n = cfg.mc_samples
    log_theta = sample_log(spec, cfg.seed, n)
    ll = np.asarray(loglik(log_theta), dtype=float)
    if np.any(np.isnan(ll)):
        raise NonFinite("likelihood evaluated to NaN")
    top = ll.max()
    if not np.isfinite(top):
        raise ZeroEvidence("likelihood vanishes on every prior draw")
    wts = np.exp(ll - top)
    total = wts.sum()
    if not total / n > ZERO_EVIDENCE:
        raise ZeroEvidence("importance weights sum to zero")
    f = np.exp(log_monomial(counts, log_theta))
    value = float(np.dot(wts, f) / total)
    resid = wts * (f - value)
    se = float(math.sqrt(np.dot(resid, resid)) / total)
    ess = float(total**2 / np.dot(wts, wts))
    return Estimate(value, se, "mc_importance", n, ess=ess,
                    reliable=ess >= ESS_WARN_FRACTION * n)


def expectation_ratio(spec: DirichletSpec, loglik: LogLik, counts: CountVector,
                      cfg: QuadratureConfig = QuadratureConfig()) -> Estimate:
    """E(f L) / E(L) under dir_{s,t} for a log-likelihood callable on log(theta)."""
    if counts.k != spec.k:
        raise NearIgnoranceError("dimension mismatch between prior and counts")
    if cfg.resolve(spec.k) == "gauss":
        return _gauss_ratio(spec, loglik, counts, cfg)
    return _mc_ratio(spec, loglik, counts, cfg)


def posterior_expectation(spec: DirichletSpec, channel, data: ManifestDataset,
                          counts: CountVector, cfg: QuadratureConfig = QuadratureConfig(),
                          likelihood: Likelihood | None = None) -> Estimate:
    """E_p(prod theta_i^{n_i'} | s) for the prior dir_{s,t} and data seen through `channel`."""
    if channel.k != spec.k:
        raise NearIgnoranceError("channel and prior disagree on k")
    lik = likelihood if likelihood is not None else Likelihood(channel, data)
    if counts.total == 0:
        return Estimate(1.0, 0.0, "closed_form", 0)
    if spec.k >= 3 and cfg.method == "auto":
        # importance sampling degenerates for priors crowded against a face;
        # a monomial likelihood makes the posterior conjugate instead
        m = lik.monomial_exponents()
        if m is not None:
            return _conjugate_ratio(spec, m, counts)
    return expectation_ratio(spec, lik.log_at, counts, cfg)


def _conjugate_ratio(spec: DirichletSpec, m: np.ndarray, counts: CountVector) -> Estimate:
    seen = CountVector(tuple(int(v) for v in m))
    both = CountVector(tuple(a + b for a, b in zip(seen.counts, counts.counts)))
    value = math.exp(log_moment(spec, both) - log_moment(spec, seen))
    return Estimate(min(value, 1.0), 0.0, "closed_form", 0)


def prior_expectation(spec: DirichletSpec, counts: CountVector) -> Estimate:
    return Estimate(moment(spec, counts), 0.0, "closed_form", 0)


def superlevel_interval(counts: CountVector, delta: float) -> tuple[float, float]:
    """For k = 2, the interval of theta_1 where the monomial is >= f_max - delta."""
    if counts.k != 2:
        raise NearIgnoranceError("explicit superlevel interval needs k = 2")
    n1, n2 = counts.counts
    f_max = monomial_max(counts)
    level = f_max - delta
    peak = n1 / (n1 + n2)

    def gap(x):
        return x**n1 * (1 - x) ** n2 - level

    lo = 0.0 if gap(0.0) >= 0 else brentq(gap, 0.0, peak, xtol=1e-15)
    hi = 1.0 if gap(1.0) >= 0 else brentq(gap, peak, 1.0, xtol=1e-15)
    return lo, hi


def mass_of_superlevel_set(spec: DirichletSpec, counts: CountVector, delta: float,
                           cfg: QuadratureConfig = QuadratureConfig()) -> Estimate:
    """Prior mass of {theta : f(theta) >= f_max - delta} for the monomial with counts n'."""
    if not delta > 0:
        raise NearIgnoranceError("delta must be positive")
    if counts.k != spec.k:
        raise NearIgnoranceError("dimension mismatch between prior and counts")
    if counts.total == 0 or delta >= monomial_max(counts):
        return Estimate(1.0, 0.0, "closed_form", 0)
    if spec.k == 2:
        lo, hi = superlevel_interval(counts, delta)
        a, b = spec.alpha
        mass = betainc(a, b, hi) - betainc(a, b, lo)
        return Estimate(float(min(max(mass, 0.0), 1.0)), 0.0, "closed_form", 0)
    n = cfg.mc_samples
    log_theta = sample_log(spec, cfg.seed, n)
    level = math.log(monomial_max(counts) - delta)
    inside = log_monomial(counts, log_theta) >= level
    p = float(inside.mean())
    se = math.sqrt(max(p * (1 - p), 0.0) / n)
    return Estimate(p, se, "mc_importance", n)
