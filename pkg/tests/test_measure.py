import numpy as np
import pytest
from scipy.integrate import quad

from infoloss import (ConfigurationError, FiniteDiscrete, Mixture,
                      ProductDistribution, TruncatedGaussian, UniformBox,
                      distribution_from_config, region_prob, sample,
                      support_diameter)

# independent quadrature oracle, frozen before the build
TG_REGION_PROB = 0.6827327381243989


def test_uniform_sample_support():
    batch = sample(UniformBox([0.0], [1.0]), 4, seed=7)
    assert batch.points.shape == (4, 1)
    assert np.all((batch.points >= 0) & (batch.points < 1))


def test_point_mass_sample():
    batch = sample(FiniteDiscrete([[0.5]], [1.0]), 3, seed=0)
    assert np.array_equal(batch.points, np.full((3, 1), 0.5))


def test_mixture_atom_fraction():
    mix = Mixture(((0.5, UniformBox([0.0], [1.0])),
                   (0.5, FiniteDiscrete([[2.0]], [1.0]))))
    batch = sample(mix, 100_000, seed=3)
    frac = np.mean(batch.points == 2.0)
    assert abs(frac - 0.5) < 0.01


def test_sampling_reproducible():
    spec = TruncatedGaussian([0.0], [1.0], [-3.0], [3.0])
    a = sample(spec, 30_000, seed=11)
    b = sample(spec, 30_000, seed=11)
    assert np.array_equal(a.points, b.points)
    c = sample(spec, 30_000, seed=12)
    assert not np.array_equal(a.points, c.points)


def test_sampling_worker_count_irrelevant(monkeypatch):
    spec = UniformBox([-1.0], [1.0])
    monkeypatch.setenv("INFOLOSS_WORKERS", "1")
    a = sample(spec, 400_000, seed=5)
    monkeypatch.setenv("INFOLOSS_WORKERS", "4")
    b = sample(spec, 400_000, seed=5)
    assert np.array_equal(a.points, b.points)


def test_region_prob_uniform():
    spec = UniformBox([-1.0], [1.0])
    assert region_prob(spec, ([-0.5], [0.5])) == pytest.approx(0.5, abs=1e-12)
    assert region_prob(UniformBox([0.0], [1.0]), ([2.0], [3.0])) == 0.0


def test_region_prob_truncated_gaussian_vs_quadrature():
    spec = TruncatedGaussian([0.0], [1.0], [-4.0], [4.0])
    got = region_prob(spec, ([-1.0], [1.0]))
    assert got == pytest.approx(TG_REGION_PROB, abs=1e-9)
    # recompute the oracle in place to guard the frozen constant
    pdf = lambda t: np.exp(-t * t / 2) / np.sqrt(2 * np.pi)
    oracle = quad(pdf, -1, 1, epsabs=1e-13)[0] / quad(pdf, -4, 4, epsabs=1e-13)[0]
    assert got == pytest.approx(oracle, abs=1e-10)


def test_region_prob_support_is_one():
    specs = [
        UniformBox([-1.0, 0.0], [1.0, 2.0]),
        TruncatedGaussian([0.5], [2.0], [-1.0], [4.0]),
        Mixture(((0.25, UniformBox([0.0], [1.0])),
                 (0.75, UniformBox([2.0], [5.0])))),
        ProductDistribution((UniformBox([0.0], [1.0]),
                             TruncatedGaussian([0.0], [1.0], [-2.0], [2.0]))),
    ]
    for spec in specs:
        box = spec.support_box()
        assert region_prob(spec, (box.lo, box.hi)) == pytest.approx(1.0, abs=1e-10)


def test_empirical_frequency_matches_region_prob():
    spec = Mixture(((0.6, UniformBox([-1.0], [0.5])),
                    (0.4, TruncatedGaussian([0.0], [0.5], [-1.0], [1.0]))))
    batch = sample(spec, 10 ** 6, seed=21)
    for lo, hi in [(-0.25, 0.25), (-1.0, 0.0), (0.4, 0.9)]:
        p = region_prob(spec, ([lo], [hi]))
        emp = np.mean((batch.points[:, 0] >= lo) & (batch.points[:, 0] <= hi))
        tol = 4 * np.sqrt(p * (1 - p) / batch.count)
        assert abs(emp - p) <= tol


def test_support_diameter():
    assert support_diameter(UniformBox([0.0], [1.0])) == pytest.approx(1.0)
    assert support_diameter(UniformBox([0.0, 0.0], [1.0, 1.0])) == \
        pytest.approx(np.sqrt(2))
    assert support_diameter(
        TruncatedGaussian([0.0], [1.0], [-3.0], [3.0])) == pytest.approx(6.0)


def test_diameter_of_union_is_not_bounding_box_diagonal():
    # farthest pair is (0,0)-(10,9); the bounding-box diagonal would be wrong
    mix = Mixture(((0.4, FiniteDiscrete([[0.0, 0.0]], [1.0])),
                   (0.3, FiniteDiscrete([[10.0, 9.0]], [1.0])),
                   (0.3, FiniteDiscrete([[9.0, 10.0]], [1.0]))))
    assert support_diameter(mix) == pytest.approx(np.sqrt(181))


def test_invalid_specs_rejected():
    with pytest.raises(ConfigurationError):
        UniformBox([1.0], [0.0])
    with pytest.raises(ConfigurationError):
        FiniteDiscrete([[0.0], [1.0]], [0.7, 0.7])
    with pytest.raises(ConfigurationError):
        Mixture(((0.5, UniformBox([0.0], [1.0])),))
    with pytest.raises(ConfigurationError):
        TruncatedGaussian([0.0], [0.0], [-1.0], [1.0])
    with pytest.raises(ConfigurationError):
        sample(UniformBox([0.0], [1.0]), 0, seed=1)


def test_marginals_and_product():
    prod = ProductDistribution((UniformBox([0.0], [1.0]),
                                UniformBox([-1.0], [1.0])))
    assert prod.dim == 2
    m1 = prod.marginal(1)
    assert region_prob(m1, ([-0.5], [0.5])) == pytest.approx(0.5)
    assert prod.region_prob(((0.0, -1.0), (0.5, 0.0))) == pytest.approx(0.25)
    assert prod.is_product
    mix = Mixture(((0.5, UniformBox([0.0, 0.0], [1.0, 1.0])),
                   (0.5, UniformBox([2.0, 2.0], [3.0, 3.0]))))
    assert not mix.is_product


def test_config_roundtrip():
    spec = Mixture(((0.5, UniformBox([0.0], [1.0])),
                    (0.5, ProductDistribution((
                        TruncatedGaussian([0.0], [1.0], [-1.0], [1.0]),)))))
    again = distribution_from_config(spec.to_config())
    assert again.to_config() == spec.to_config()
    with pytest.raises(ConfigurationError):
        distribution_from_config({"kind": "cauchy"})
    with pytest.raises(ConfigurationError):
        distribution_from_config({"kind": "uniform-box", "lo": [0.0]})
