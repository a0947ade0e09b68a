import math

import numpy as np
import pytest

from nearignorance.channels import GaussianChannel, IdentityChannel, binary_test_channel
from nearignorance.core import CountVector, EmptyDataset, ManifestDataset, NearIgnoranceError
from nearignorance.dirichlet import PriorSet
from nearignorance.inference import (
    OptimizerConfig,
    coarse_grid,
    idm_bounds,
    lower_expectation,
    posterior_bounds,
    prior_bounds,
    upper_expectation,
    vacuity_check,
)

EMPTY = ManifestDataset.discrete([])
ID2 = IdentityChannel(2)
EXTENDED = OptimizerConfig(boundary_ladder=tuple(10.0 ** -i for i in range(1, 31)))


def test_coarse_grid_is_clipped_and_normalized():
    pts = coarse_grid(3, 11, 1e-8)
    assert len(pts) == 66
    arr = np.asarray(pts)
    np.testing.assert_allclose(arr.sum(axis=1), 1.0, atol=1e-15)
    assert arr.min() >= 1e-8 * (1 - 1e-12)


def test_optimizer_config_validation():
    with pytest.raises(NearIgnoranceError):
        OptimizerConfig(boundary_ladder=(1e-2, 1e-1))
    with pytest.raises(NearIgnoranceError):
        OptimizerConfig(boundary_ladder=())


def test_prior_upper_of_product_is_symmetric():
    opt = upper_expectation(PriorSet(1.0, 2), ID2, EMPTY, CountVector.of(1, 1))
    assert opt.value == pytest.approx(0.125, abs=1e-6)
    assert abs(opt.t[0] - 0.5) < 1e-4


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0, 10.0])
def test_prior_upper_of_product_general_strength(s):
    opt = upper_expectation(PriorSet(s, 2), ID2, EMPTY, CountVector.of(1, 1))
    assert opt.value == pytest.approx(s / (4 * (s + 1)), abs=1e-6)


def test_vacuous_prior_single_outcome():
    ps = PriorSet(1.0, 2, 1e-8)
    assert upper_expectation(ps, ID2, EMPTY, CountVector.of(1, 0)).value >= 1 - 1e-6
    assert lower_expectation(ps, ID2, EMPTY, CountVector.of(1, 0)).value <= 1e-6


def test_constant_function_bounds():
    ps = PriorSet(1.0, 2)
    data = ManifestDataset.from_counts([2, 1])
    assert lower_expectation(ps, ID2, data, CountVector.of(0, 0)).value == 1.0
    assert upper_expectation(ps, ID2, data, CountVector.of(0, 0)).value == 1.0


def test_identity_posterior_bounds_match_conjugate_formula():
    pair, lo, hi = posterior_bounds(PriorSet(2.0, 2), ID2, ManifestDataset.from_counts([3, 1]),
                                    CountVector.of(1, 0))
    assert pair.lower == pytest.approx(0.5, abs=1e-4)
    assert pair.upper == pytest.approx(5 / 6, abs=1e-4)
    assert lo.t[0] < 1e-6 and hi.t[0] > 1 - 1e-6


@pytest.mark.parametrize("counts, s, i, expected", [
    ((0, 0), 1.0, 0, (0.0, 1.0)),
    ((0, 0), 3.0, 1, (0.0, 1.0)),
    ((3, 1), 2.0, 0, (0.5, 5 / 6)),
    ((5, 0), 1.0, 1, (0.0, 1 / 6)),
])
def test_idm_bounds_examples(counts, s, i, expected):
    pair = idm_bounds(CountVector(counts), s, i)
    assert (pair.lower, pair.upper) == pytest.approx(expected, abs=1e-15)


def test_idm_consistency_three_categories():
    data = ManifestDataset.from_counts([2, 1, 1])
    cv = CountVector.of(0, 1, 0)
    pair = idm_bounds(CountVector.of(2, 1, 1), 1.0, 1)
    ps = PriorSet(1.0, 3)
    hi = upper_expectation(ps, IdentityChannel(3), data, cv)
    lo = lower_expectation(ps, IdentityChannel(3), data, cv)
    assert hi.estimate.method == "closed_form"
    assert hi.value == pytest.approx(pair.upper, abs=1e-4)
    assert lo.value == pytest.approx(pair.lower, abs=1e-4)


def test_importance_sampling_flags_prior_crowded_on_a_vertex():
    from nearignorance.dirichlet import DirichletSpec
    from nearignorance.quadrature import QuadratureConfig, posterior_expectation

    spec = DirichletSpec(1.0, (1e-8, 1 - 2e-8, 1e-8))
    est = posterior_expectation(spec, IdentityChannel(3), ManifestDataset.from_counts([2, 1, 1]),
                                CountVector.of(0, 1, 0), QuadratureConfig(method="mc", mc_samples=20_000))
    assert not est.reliable


def test_enlarging_the_gap_never_widens_the_bounds():
    ch = binary_test_channel(0.2, 0.1)
    data = ManifestDataset.discrete([0, 0, 1, 0])
    cv = CountVector.of(1, 0)
    widths = []
    for gap in (1e-1, 1e-3, 1e-6):
        pair, _, _ = posterior_bounds(PriorSet(1.5, 2, gap), ch, data, cv)
        widths.append((pair.lower, pair.upper))
    for (lo_a, hi_a), (lo_b, hi_b) in zip(widths, widths[1:]):
        assert lo_b <= lo_a + 1e-9 and hi_b >= hi_a - 1e-9


def test_prior_bounds_closed_form():
    pair, _, hi = prior_bounds(PriorSet(2.0, 2), CountVector.of(1, 1))
    assert pair.upper == pytest.approx(2 / 12, abs=1e-6)
    assert pair.lower <= 1e-6


def test_vacuity_check_diagnostic_test_example():
    ch = binary_test_channel(0.1, 0.1)
    data = ManifestDataset.discrete([0] * 20)
    rep = vacuity_check(PriorSet(1.0, 2), ch, data, CountVector.of(1, 0), ocfg=EXTENDED)
    assert rep.hypothesis_holds and rep.lower_hypothesis_holds
    assert rep.positivity.strictly_positive
    assert rep.prior_upper_vacuous and rep.prior_lower_vacuous
    assert rep.ladder_monotone and rep.upper_converged and rep.lower_converged
    assert rep.verdict == "vacuous_confirmed"
    assert rep.posterior_bounds.upper >= 0.999 and rep.posterior_bounds.lower <= 0.001
    assert rep.likelihood_at_argmax == pytest.approx(0.9**20, rel=1e-12)


def test_vacuity_default_ladder_reports_upper_only():
    """At the default gaps the upper is already f_max, while the lower has barely moved."""
    ch = binary_test_channel(0.1, 0.1)
    data = ManifestDataset.discrete([0] * 20)
    rep = vacuity_check(PriorSet(1.0, 2), ch, data, CountVector.of(1, 0))
    assert rep.verdict == "vacuous_confirmed"
    assert rep.posterior_bounds.upper >= 1 - 1e-6
    assert not rep.lower_converged


def test_vacuity_check_learning_possible():
    data = ManifestDataset.from_counts([3, 1])
    rep = vacuity_check(PriorSet(2.0, 2), ID2, data, CountVector.of(1, 0))
    assert not rep.hypothesis_holds
    assert rep.verdict == "learning_possible"
    assert rep.posterior_bounds.lower == pytest.approx(0.5, abs=1e-4)
    assert rep.posterior_bounds.upper == pytest.approx(5 / 6, abs=1e-4)


def test_vacuity_check_single_outcome_data():
    """d^1: the upper stays at 1 but the lower moves away from 0."""
    data = ManifestDataset.from_counts([4, 0])
    rep = vacuity_check(PriorSet(2.0, 2), ID2, data, CountVector.of(1, 0))
    assert rep.hypothesis_holds and not rep.lower_hypothesis_holds
    assert rep.posterior_bounds.upper == pytest.approx(1.0, abs=1e-4)
    assert rep.posterior_bounds.lower >= 4 / 6 - 1e-4


def test_vacuity_check_gaussian_channel():
    ch = GaussianChannel([(0.0, 1.0), (1.0, 1.0)])
    data = ManifestDataset.continuous([0.2, 0.9, -0.4, 1.3])
    rep = vacuity_check(PriorSet(1.0, 2), ch, data, CountVector.of(0, 1),
                        ocfg=OptimizerConfig(boundary_ladder=(1e-2, 1e-4, 1e-6, 1e-8)))
    assert rep.hypothesis_holds
    assert rep.verdict == "vacuous_confirmed"


def test_vacuity_check_rejects_empty_counts():
    with pytest.raises(EmptyDataset):
        vacuity_check(PriorSet(1.0, 2), ID2, EMPTY, CountVector.of(0, 0))


def test_vacuity_ladder_is_monotone_in_gap():
    ch = binary_test_channel(0.1, 0.1)
    data = ManifestDataset.discrete([0] * 20)
    rep = vacuity_check(PriorSet(1.0, 2), ch, data, CountVector.of(0, 1))
    ups = [r.upper.value for r in rep.ladder_values]
    los = [r.lower.value for r in rep.ladder_values]
    assert all(b >= a - 1e-12 for a, b in zip(ups, ups[1:]))
    assert all(b <= a + 1e-12 for a, b in zip(los, los[1:]))
    assert all(lo <= hi + 1e-12 for lo, hi in zip(los, ups))
