"""Lower and upper predictive probabilities over the near-ignorance prior set.

The posterior expectation of a predictive monomial is optimized over the prior
mean t, restricted to t_i >= boundary_gap. Vacuity is studied by sweeping a
ladder of shrinking gaps: the supremum over the open simplex is approached
but never attained, so a single tiny gap proves nothing on its own.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq, minimize

from .channels import Likelihood, PositivityReport, strict_positivity_report
from .core import (
    BoundPair,
    Chances,
    CountVector,
    EmptyDataset,
    Estimate,
    ManifestDataset,
    NearIgnoranceError,
    RelativeFrequencies,
    frequencies,
    log_monomial,
    monomial_max,
)
from .dirichlet import DirichletSpec, PriorSet
from .quadrature import QuadratureConfig, posterior_expectation, prior_expectation, superlevel_interval

DEFAULT_LADDER = tuple(10.0 ** -i for i in range(1, 9))
LIMINF_DELTAS = (1e-2, 1e-3, 1e-4)


@dataclass(frozen=True)
class OptimizerConfig:
    coarse_grid_per_dim: int = 11
    refine_iters: int = 200
    boundary_ladder: tuple[float, ...] = DEFAULT_LADDER
    tol: float = 1e-6
    restarts: int = 3

    def __post_init__(self):
        ladder = tuple(float(g) for g in self.boundary_ladder)
        if not ladder or any(g <= 0 for g in ladder):
            raise NearIgnoranceError("boundary ladder must be non-empty and positive")
        if any(b >= a for a, b in zip(ladder, ladder[1:])):
            raise NearIgnoranceError("boundary ladder must be strictly decreasing")
        if self.coarse_grid_per_dim < 2:
            raise NearIgnoranceError("coarse grid needs at least 2 points per dimension")
        object.__setattr__(self, "boundary_ladder", ladder)


@dataclass(frozen=True)
class Optimum:
    estimate: Estimate
    t: tuple[float, ...]
    evaluations: int

    @property
    def value(self) -> float:
        return self.estimate.value


# -- optimization over t ------------------------------------------------------


class _LogisticMap:
    """t = gap + (1 - k gap) softmax(z, 0), z in a box wide enough to reach the boundary."""

    def __init__(self, k: int, gap: float):
        self.k = k
        self.gap = gap
        self.scale = 1.0 - k * gap
        self.zmax = math.log(1.0 / gap) + 40.0

    def to_t(self, z) -> tuple[float, ...]:
        full = np.append(np.asarray(z, dtype=float), 0.0)
        full -= full.max()
        u = np.exp(full)
        u /= u.sum()
        return tuple((self.gap + self.scale * u).tolist())

    def to_z(self, t) -> np.ndarray:
        u = (np.asarray(t, dtype=float) - self.gap) / self.scale
        # floor far below gap: t_i = gap (1 + 1e-9) is the boundary for all purposes
        logu = np.log(np.maximum(u, self.gap * 1e-9))
        return np.clip(logu[:-1] - logu[-1], -self.zmax, self.zmax)


def coarse_grid(k: int, per_dim: int, gap: float) -> list[tuple[float, ...]]:
    """Lattice points of the simplex with spacing 1/(per_dim - 1), mapped into t_i >= gap."""
    steps = per_dim - 1
    points = []
    for combo in itertools.product(range(steps + 1), repeat=k - 1):
        rest = steps - sum(combo)
        if rest < 0:
            continue
        t = np.array(combo + (rest,), dtype=float) / steps
        t = gap + (1.0 - k * gap) * t
        points.append(tuple(t.tolist()))
    return points


def optimize_over_t(prior_set: PriorSet, value_fn: Callable[[DirichletSpec], Estimate],
                    sense: str, ocfg: OptimizerConfig = OptimizerConfig(),
                    extra_starts: Sequence[Sequence[float]] = ()) -> Optimum:
    """Maximize (sense='max') or minimize value_fn over t in the clipped simplex.

    Coarse grid first, then bounded Nelder-Mead in logistic coordinates from the
    best few grid points. Grid ties go to the lexicographically first t.
    """
    if sense not in ("max", "min"):
        raise ValueError(sense)
    sign = -1.0 if sense == "max" else 1.0
    lmap = _LogisticMap(prior_set.k, prior_set.boundary_gap)
    cache: dict[tuple[float, ...], Estimate] = {}

    def evaluate(t: tuple[float, ...]) -> Estimate:
        if t not in cache:
            cache[t] = value_fn(prior_set.member(t))
        return cache[t]

    starts = [lmap.to_t(lmap.to_z(t)) for t in coarse_grid(prior_set.k, ocfg.coarse_grid_per_dim,
                                                           prior_set.boundary_gap)]
    for t in extra_starts:
        if all(ti >= prior_set.boundary_gap for ti in t):
            starts.append(lmap.to_t(lmap.to_z(t)))
    scored = sorted(starts, key=lambda t: (sign * evaluate(t).value, t))
    seeds = []
    for t in scored:
        if t not in seeds:
            seeds.append(t)
        if len(seeds) == ocfg.restarts:
            break

    def objective(z):
        return sign * evaluate(lmap.to_t(z)).value

    bounds = [(-lmap.zmax, lmap.zmax)] * (prior_set.k - 1)
    for t in seeds:
        minimize(objective, lmap.to_z(t), method="Nelder-Mead", bounds=bounds,
                 options={"maxiter": ocfg.refine_iters, "xatol": 1e-4,
                          "fatol": ocfg.tol * 1e-3, "initial_simplex": _initial_simplex(lmap.to_z(t), lmap.zmax)})
    best = min(cache, key=lambda t: (sign * cache[t].value, t))
    return Optimum(cache[best], best, len(cache))


def _initial_simplex(z0: np.ndarray, zmax: float) -> np.ndarray:
    step = 1.0
    pts = [z0.copy()]
    for i in range(z0.size):
        z = z0.copy()
        z[i] = z[i] + step if z[i] + step <= zmax else z[i] - step
        pts.append(z)
    return np.array(pts)


def _check_dims(prior_set: PriorSet, channel, counts: CountVector):
    if channel.k != prior_set.k or counts.k != prior_set.k:
        raise NearIgnoranceError("prior set, channel and counts disagree on k")


def _posterior_fn(channel, data, counts, qcfg):
    lik = Likelihood(channel, data)
    return lambda spec: posterior_expectation(spec, channel, data, counts, qcfg, likelihood=lik)


def upper_expectation(prior_set: PriorSet, channel, data: ManifestDataset, counts: CountVector,
                      qcfg: QuadratureConfig = QuadratureConfig(),
                      ocfg: OptimizerConfig = OptimizerConfig(),
                      extra_starts: Sequence[Sequence[float]] = ()) -> Optimum:
    """sup over the prior set of E(prod theta_i^{n_i'} | s)."""
    _check_dims(prior_set, channel, counts)
    return optimize_over_t(prior_set, _posterior_fn(channel, data, counts, qcfg), "max", ocfg,
                           extra_starts)


def lower_expectation(prior_set: PriorSet, channel, data: ManifestDataset, counts: CountVector,
                      qcfg: QuadratureConfig = QuadratureConfig(),
                      ocfg: OptimizerConfig = OptimizerConfig(),
                      extra_starts: Sequence[Sequence[float]] = ()) -> Optimum:
    """inf over the prior set of E(prod theta_i^{n_i'} | s)."""
    _check_dims(prior_set, channel, counts)
    return optimize_over_t(prior_set, _posterior_fn(channel, data, counts, qcfg), "min", ocfg,
                           extra_starts)


def posterior_bounds(prior_set, channel, data, counts, qcfg=QuadratureConfig(),
                     ocfg=OptimizerConfig()) -> tuple[BoundPair, Optimum, Optimum]:
    lo = lower_expectation(prior_set, channel, data, counts, qcfg, ocfg)
    hi = upper_expectation(prior_set, channel, data, counts, qcfg, ocfg)
    return BoundPair(lo.value, hi.value, lo.estimate, hi.estimate), lo, hi


def prior_bounds(prior_set: PriorSet, counts: CountVector,
                 ocfg: OptimizerConfig = OptimizerConfig()) -> tuple[BoundPair, Optimum, Optimum]:
    """Lower and upper prior expectation of the monomial (closed-form moments)."""
    fn = lambda spec: prior_expectation(spec, counts)  # noqa: E731
    lo = optimize_over_t(prior_set, fn, "min", ocfg)
    hi = optimize_over_t(prior_set, fn, "max", ocfg)
    return BoundPair(lo.value, hi.value, lo.estimate, hi.estimate), lo, hi


def idm_bounds(counts_observed: CountVector, s: float, next_outcome: int) -> BoundPair:
    """Closed-form IDM predictive bounds for the next outcome being category `next_outcome`."""
    if not s > 0:
        raise NearIgnoranceError("prior strength must be positive")
    if not 0 <= next_outcome < counts_observed.k:
        raise NearIgnoranceError(f"outcome {next_outcome} outside 0..{counts_observed.k - 1}")
    n_i = counts_observed.counts[next_outcome]
    big_n = counts_observed.total
    lower = n_i / (big_n + s)
    upper = (n_i + s) / (big_n + s)
    return BoundPair(lower, upper, Estimate(lower, 0.0, "closed_form", 0),
                     Estimate(upper, 0.0, "closed_form", 0))


# -- vacuity ------------------------------------------------------------------

VERDICTS = ("vacuous_confirmed", "learning_possible", "inconclusive")


@dataclass(frozen=True)
class LadderRung:
    gap: float
    upper: Estimate
    lower: Estimate
    upper_t: tuple[float, ...]
    lower_t: tuple[float, ...]


@dataclass(frozen=True)
class VacuityReport:
    hypothesis_holds: bool
    lower_hypothesis_holds: bool
    argmax_point: RelativeFrequencies
    f_max: float
    likelihood_at_argmax: float
    log_likelihood_at_argmax: float
    liminf_probe: tuple[tuple[float, float], ...]
    vertex_likelihoods: tuple[tuple[int, float], ...]
    positivity: PositivityReport
    prior_bounds: BoundPair
    prior_upper_vacuous: bool
    prior_lower_vacuous: bool
    posterior_bounds: BoundPair
    ladder_values: tuple[LadderRung, ...]
    ladder_monotone: bool
    upper_converged: bool
    lower_converged: bool
    verdict: str
    notes: tuple[str, ...] = field(default=())


def _liminf_probe(lik: Likelihood, counts: CountVector, f_prime: np.ndarray,
                  deltas=LIMINF_DELTAS, n_rays: int = 64, seed: int = 0) -> list[tuple[float, float]]:
    """min of L over the boundary of {f >= f_max - delta}, for shrinking delta.

    Exact for k = 2 (the set is an interval and L is log-concave). For k >= 3 the
    boundary is probed along rays from f' towards each vertex and towards
    seeded random points of the simplex.
    """
    f_max = monomial_max(counts)
    k = counts.k
    out = []
    if k == 2:
        for delta in deltas:
            if delta >= f_max:
                pts = [np.array([0.0, 1.0]), np.array([1.0, 0.0])]
            else:
                lo, hi = superlevel_interval(counts, delta)
                pts = [np.array([lo, 1 - lo]), np.array([hi, 1 - hi])]
            vals = [math.exp(lik.log_at(_safe_log(p))) for p in pts]
            out.append((delta, min(vals)))
        return out
    rng = np.random.default_rng(seed)
    targets = [np.eye(k)[i] for i in range(k)] + list(rng.dirichlet(np.ones(k), size=n_rays))
    for delta in deltas:
        level = math.log(max(f_max - delta, 1e-300))
        vals = []
        for target in targets:
            def gap(lam, target=target):
                p = (1 - lam) * f_prime + lam * target
                return float(log_monomial(counts, _safe_log(p))) - level
            if gap(1.0) >= 0:
                lam = 1.0
            else:
                lam = brentq(gap, 0.0, 1.0, xtol=1e-14)
            p = (1 - lam) * f_prime + lam * target
            vals.append(math.exp(lik.log_at(_safe_log(p))))
        out.append((delta, min(vals)))
    return out


def _safe_log(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.clip(p, 0.0, 1.0))


def vacuity_check(prior_set: PriorSet, channel, data: ManifestDataset, counts: CountVector,
                  qcfg: QuadratureConfig = QuadratureConfig(),
                  ocfg: OptimizerConfig = OptimizerConfig()) -> VacuityReport:
    """Check the hypothesis of the vacuity theorem and measure its conclusion.

    The upper posterior expectation of the monomial is tracked down the gap
    ladder; ``vacuous_confirmed`` means the hypothesis holds, the prior upper
    bound is the supremum f_max, and the ladder climbs to f_max within tol plus
    the estimator's error band.
    """
    _check_dims(prior_set, channel, counts)
    if counts.total == 0:
        raise EmptyDataset("vacuity of the constant function is trivial")
    tol = ocfg.tol
    lik = Likelihood(channel, data)
    freqs = frequencies(counts)
    f_prime = np.asarray(freqs.freqs)
    f_max = monomial_max(counts)
    log_l_argmax = float(lik.log_at(_safe_log(f_prime)))
    hypothesis = math.isfinite(log_l_argmax)

    positive_idx = [i for i, c in enumerate(counts.counts) if c > 0]
    # lower bound stays at 0 when L > 0 wherever some theta_i with n_i' > 0 vanishes;
    # each likelihood factor is affine, so positivity on the face {theta_i = 0} is
    # positivity at its vertices
    lower_hypothesis = all(
        np.all(np.isfinite(lik.table[:, [j for j in range(counts.k) if j != i]]))
        for i in positive_idx
    ) if lik.mult.size else True
    vertex_l = tuple(
        (i, float(math.exp(lik.log_at(_safe_log(np.eye(counts.k)[i]))))) for i in range(counts.k)
    )
    probe = tuple(_liminf_probe(lik, counts, f_prime, seed=qcfg.seed))
    positivity = strict_positivity_report(channel, data)

    finest = prior_set.with_gap(ocfg.boundary_ladder[-1])
    prior_pair, _, _ = prior_bounds(finest, counts, ocfg)
    prior_upper_vacuous = prior_pair.upper >= f_max - tol
    prior_lower_vacuous = prior_pair.lower <= tol

    fn = _posterior_fn(channel, data, counts, qcfg)
    rungs = []
    up_starts: list[tuple[float, ...]] = []
    lo_starts: list[tuple[float, ...]] = []
    for gap in ocfg.boundary_ladder:
        ps = prior_set.with_gap(gap)
        hi = optimize_over_t(ps, fn, "max", ocfg, up_starts)
        lo = optimize_over_t(ps, fn, "min", ocfg, lo_starts)
        up_starts, lo_starts = [hi.t], [lo.t]
        rungs.append(LadderRung(gap, hi.estimate, lo.estimate, hi.t, lo.t))

    monotone = True
    for prev, cur in zip(rungs, rungs[1:]):
        slack = prev.upper.band() + cur.upper.band() + 1e-12
        if cur.upper.value < prev.upper.value - slack:
            monotone = False
        slack = prev.lower.band() + cur.lower.band() + 1e-12
        if cur.lower.value > prev.lower.value + slack:
            monotone = False
    last = rungs[-1]
    upper_converged = last.upper.value >= f_max - (tol + last.upper.band())
    lower_converged = last.lower.value <= tol + last.lower.band()
    post_pair = BoundPair(last.lower.value, last.upper.value, last.lower, last.upper)

    notes = []
    if any(not r.upper.reliable or not r.lower.reliable for r in rungs):
        notes.append("low effective sample size on some ladder rungs")
    if hypothesis and prior_upper_vacuous and monotone and upper_converged:
        verdict = "vacuous_confirmed"
    elif (not hypothesis
          and post_pair.lower - post_pair.lower_meta.band() > prior_pair.lower + tol
          and post_pair.upper + post_pair.upper_meta.band() < prior_pair.upper - tol):
        verdict = "learning_possible"
    else:
        verdict = "inconclusive"
        if hypothesis and not prior_upper_vacuous:
            notes.append("prior upper bound is below f_max, the theorem does not apply")
        elif hypothesis and not upper_converged:
            notes.append("ladder has not reached f_max; extend the gap ladder")

    return VacuityReport(
        hypothesis_holds=hypothesis,
        lower_hypothesis_holds=bool(lower_hypothesis),
        argmax_point=freqs,
        f_max=f_max,
        likelihood_at_argmax=math.exp(log_l_argmax),
        log_likelihood_at_argmax=log_l_argmax,
        liminf_probe=probe,
        vertex_likelihoods=vertex_l,
        positivity=positivity,
        prior_bounds=prior_pair,
        prior_upper_vacuous=prior_upper_vacuous,
        prior_lower_vacuous=prior_lower_vacuous,
        posterior_bounds=post_pair,
        ladder_values=tuple(rungs),
        ladder_monotone=monotone,
        upper_converged=upper_converged,
        lower_converged=lower_converged,
        verdict=verdict,
        notes=tuple(notes),
    )


def centroid(k: int) -> Chances:
    return Chances(tuple([1.0 / k] * k))
