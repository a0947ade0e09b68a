import numpy as np
import pytest
from scipy.integrate import quad

from nearignorance.concentration import (
    DegenerateL,
    concentrating_density,
    concentration_experiment,
    ratio_experiment,
)
from nearignorance.channels import IdentityChannel, binary_test_channel
from nearignorance.core import CountVector, ManifestDataset, NearIgnoranceError

THETA1 = CountVector.of(1, 0)


def test_concentrating_density_is_beta_n_1():
    spec = concentrating_density(10, 2, 0)
    np.testing.assert_allclose(spec.alpha, [10.0, 1.0])
    np.testing.assert_allclose(concentrating_density(5, 3, 2).alpha, [1.0, 1.0, 5.0])


def test_concentration_matches_beta_formulas():
    traj = concentration_experiment([1, 10, 100], THETA1, 0.1)
    for p in traj:
        assert p.expectation == pytest.approx(p.n / (p.n + 1), abs=1e-12)
        assert p.mass.value == pytest.approx(1 - 0.9**p.n, abs=1e-12)
    assert traj[-1].mass.value >= 0.9999


def test_concentration_whole_simplex():
    assert concentration_experiment([1], THETA1, 1.0)[0].mass.value == 1.0


def test_concentration_in_three_categories():
    traj = concentration_experiment([2, 20, 200], CountVector.of(1, 0, 0), 0.1)
    exps = [p.expectation for p in traj]
    # E[theta_1] under Dirichlet(n, 1, 1) = n / (n + 2)
    np.testing.assert_allclose(exps, [0.5, 20 / 22, 200 / 202], rtol=1e-12)
    assert traj[-1].mass.value > traj[0].mass.value


def test_experiment_argument_checks():
    with pytest.raises(NearIgnoranceError):
        concentration_experiment([10, 1], THETA1, 0.1)
    with pytest.raises(NearIgnoranceError):
        concentration_experiment([1, 10], THETA1, 0.0)


def _ratio_oracle(n):
    lik = lambda x: 0.9 * x + 0.1 * (1 - x)  # noqa: E731
    dens = lambda x: n * x ** (n - 1)  # noqa: E731
    num = quad(lambda x: x * lik(x) * dens(x), 0, 1, epsabs=1e-14, epsrel=1e-13)[0]
    den = quad(lambda x: lik(x) * dens(x), 0, 1, epsabs=1e-14, epsrel=1e-13)[0]
    return num / den


def test_ratio_experiment_one_positive_test():
    traj = ratio_experiment([1, 10, 100], THETA1, binary_test_channel(0.1, 0.1),
                            ManifestDataset.discrete([0]))
    for p in traj:
        assert p.ratio.value == pytest.approx(_ratio_oracle(p.n), abs=1e-10)
    assert abs(traj[-1].ratio.value - 1.0) < 0.02
    vals = [p.ratio.value for p in traj]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_ratio_with_constant_likelihood_is_the_expectation():
    traj = ratio_experiment([1, 10, 100], THETA1, IdentityChannel(2), ManifestDataset.discrete([]))
    for p in traj:
        assert p.ratio.value == pytest.approx(p.n / (p.n + 1), abs=1e-12)


def test_degenerate_likelihood_is_reported():
    with pytest.raises(DegenerateL):
        ratio_experiment([1, 10], THETA1, IdentityChannel(2), ManifestDataset.discrete([1]))
