import itertools
import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from pressurelab.errors import ValidationError
from pressurelab.models.measure import BernoulliMeasure, MarkovMeasure, MixtureMeasure, NeighborhoodSpec
from pressurelab.models.subshift import Potential, Subshift
from pressurelab.services.measures import (
    block_entropy_rate,
    cylinder_mass,
    empirical_of_word,
    entropy,
    free_energy,
    in_neighborhood,
    integrate,
    log_cylinder_mass,
    marginal,
    prefix_log_masses,
    sample_orbit,
)
from pressurelab.services.symbolic_core import enumerate_words
from tests.conftest import binary_entropy

MAX_CONSISTENCY_LENGTH = 8


def test_bernoulli_cylinder_mass(half):
    assert cylinder_mass(half, '0110') == pytest.approx(1 / 16)


def test_mixture_cylinder_mass_is_convex_combination(full2, half):
    quarter = BernoulliMeasure(full2, (0.25, 0.75))
    mu = MixtureMeasure((0.5, 0.5), (half, quarter))
    assert cylinder_mass(mu, '11') == pytest.approx(13 / 32)


def test_inadmissible_word_has_zero_mass(catalog_measures):
    mu = catalog_measures['golden-markov']
    assert cylinder_mass(mu, '0110') == 0.0
    assert log_cylinder_mass(mu, '11') == -np.inf


def test_prefix_log_masses(b09):
    w = (0, 0, 1)
    expected = [0.0, math.log(0.9), 2 * math.log(0.9), 2 * math.log(0.9) + math.log(0.1)]
    assert list(prefix_log_masses(b09, w)) == pytest.approx(expected)


def _check_consistency(mu, length):
    s = mu.subshift
    for n in range(1, length):
        for w in enumerate_words(s, n):
            mass = cylinder_mass(mu, w)
            right = sum(cylinder_mass(mu, w + (a,)) for a in range(s.alphabet_size))
            left = sum(cylinder_mass(mu, (a,) + w) for a in range(s.alphabet_size))
            assert right == pytest.approx(mass, abs=1e-12)
            assert left == pytest.approx(mass, abs=1e-12)


@pytest.mark.parametrize('name', ['B(0.7)', 'golden-markov', 'mixture-1/2-0.9', 'mixture-0.7-0.9'])
def test_catalog_measures_are_consistent_and_stationary(catalog_measures, name):
    _check_consistency(catalog_measures[name], MAX_CONSISTENCY_LENGTH)


@seed(7)
@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(min_value=0.05, max_value=1.0), min_size=3, max_size=3))
def test_random_bernoulli_measures_are_consistent(weights):
    p = np.array(weights) / sum(weights)
    mu = BernoulliMeasure(Subshift.full(3), tuple(p))
    _check_consistency(mu, 5)


@seed(11)
@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.05, max_value=0.95), st.floats(min_value=0.05, max_value=0.95))
def test_random_markov_measures_are_consistent(a, b):
    mu = MarkovMeasure(Subshift.full(2), ((a, 1 - a), (b, 1 - b)))
    assert np.allclose(mu.stationary @ mu.stochastic_matrix, mu.stationary, atol=1e-12)
    _check_consistency(mu, 7)


def test_bernoulli_rejects_bad_probabilities(full2):
    with pytest.raises(ValidationError):
        BernoulliMeasure(full2, (0.5, 0.6))
    with pytest.raises(ValidationError):
        BernoulliMeasure(full2, (0.5, 0.25, 0.25))


def test_bernoulli_support_must_respect_transitions(golden):
    with pytest.raises(ValidationError):
        BernoulliMeasure(golden, (0.5, 0.5))
    assert BernoulliMeasure(golden, (1.0, 0.0)).p == (1.0, 0.0)


def test_markov_rejects_forbidden_transitions(golden):
    with pytest.raises(ValidationError):
        MarkovMeasure(golden, ((0.5, 0.5), (0.5, 0.5)))


def test_markov_rejects_non_stationary_pi(full2):
    with pytest.raises(ValidationError):
        MarkovMeasure(full2, ((0.5, 0.5), (0.9, 0.1)), pi=(0.5, 0.5))


def test_mixture_rejects_nesting_and_duplicates(half, b09, half_09_mixture):
    with pytest.raises(ValidationError):
        MixtureMeasure((0.5, 0.5), (half_09_mixture, half))
    with pytest.raises(ValidationError):
        MixtureMeasure((0.5, 0.5), (half, half))
    with pytest.raises(ValidationError):
        MixtureMeasure((0.5, 0.6), (half, b09))


def test_entropy_closed_forms(half, b09, half_09_mixture, catalog_measures):
    assert entropy(half).value == pytest.approx(math.log(2))
    assert entropy(b09).value == pytest.approx(binary_entropy(0.9))
    mix = entropy(half_09_mixture)
    assert mix.value == pytest.approx(0.5 * (math.log(2) + binary_entropy(0.9)))
    assert mix.components == pytest.approx((math.log(2), binary_entropy(0.9)))
    # golden-markov: pi = (2/3, 1/3), only state 0 branches
    assert entropy(catalog_measures['golden-markov']).value == pytest.approx(2 / 3 * math.log(2))


def test_integral_and_free_energy(full2):
    mu = BernoulliMeasure(full2, (0.7, 0.3))
    phi = Potential.from_symbols(full2, (0.0, 0.3))
    assert integrate(mu, phi) == pytest.approx(0.09)
    assert free_energy(mu, phi).value == pytest.approx(binary_entropy(0.7) + 0.09)


def test_integral_of_depth_two_potential(full2, b09):
    phi = Potential.from_mapping(full2, 2, {'01': 1.0}, default=0.0)
    assert integrate(b09, phi) == pytest.approx(0.9 * 0.1)


def test_free_energy_is_affine_over_components(half_09_mixture, full2):
    phi = Potential.from_symbols(full2, (-0.2, 0.4))
    fe = free_energy(half_09_mixture, phi)
    assert fe.value == pytest.approx(np.dot(fe.weights, fe.components))


def test_block_entropy_rate(b09, half_09_mixture, catalog_measures):
    assert block_entropy_rate(b09, 1) == pytest.approx(binary_entropy(0.9))
    golden_markov = catalog_measures['golden-markov']
    assert block_entropy_rate(golden_markov, 2) == pytest.approx(entropy(golden_markov).value)
    h = entropy(half_09_mixture).value
    rates = [block_entropy_rate(half_09_mixture, n) for n in (2, 4, 8)]
    assert all(r >= h - 1e-12 for r in rates)
    assert rates[0] >= rates[1] >= rates[2]


def test_marginal(catalog_measures):
    vec = marginal(catalog_measures['golden-markov'], 2)
    assert vec.sum() == pytest.approx(1.0)
    assert vec[3] == 0.0
    assert vec == pytest.approx([1 / 3, 1 / 3, 1 / 3, 0.0])


def test_empirical_of_word():
    assert empirical_of_word('0110', 1).frequencies == pytest.approx((0.5, 0.5))
    e2 = empirical_of_word('0110', 2)
    assert e2.as_dict() == pytest.approx({(0, 1): 1 / 3, (1, 1): 1 / 3, (1, 0): 1 / 3})


def test_in_neighborhood(half):
    F = NeighborhoodSpec(half, 1, 0.1)
    assert in_neighborhood(empirical_of_word('0101', 1), F)
    assert not in_neighborhood(empirical_of_word('0001', 1), F)
    with pytest.raises(ValidationError):
        in_neighborhood(empirical_of_word('0101', 2), F)


def test_in_neighborhood_on_a_larger_alphabet():
    ternary = BernoulliMeasure(Subshift.full(3), (0.5, 0.5, 0.0))
    F = NeighborhoodSpec(ternary, 1, 0.1)
    assert in_neighborhood(empirical_of_word('0101', 1), F)
    assert not in_neighborhood(empirical_of_word('0202', 1), F)
    e = empirical_of_word('01', 1).embedded(3)
    assert e.frequencies == pytest.approx((0.5, 0.5, 0.0))
    with pytest.raises(ValidationError):
        empirical_of_word('012', 1).embedded(2)


def test_markov_orbit_entropy_converges(catalog_measures):
    mu = catalog_measures['golden-markov']
    o = sample_orbit(mu, 10_000, seed=2)
    assert -log_cylinder_mass(mu, o.word) / 10_000 == pytest.approx(entropy(mu).value, abs=0.05)


def test_sample_orbit_is_seeded(half_09_mixture):
    a = sample_orbit(half_09_mixture, 200, seed=5)
    b = sample_orbit(half_09_mixture, 200, seed=5)
    assert np.array_equal(a.word, b.word)
    assert a.component_id == b.component_id


def test_sample_orbit_designated_component(half_09_mixture):
    o = sample_orbit(half_09_mixture, 5000, seed=1, component=1)
    assert o.component_id == 1
    assert abs((o.word == 0).mean() - 0.9) < 0.03


def test_markov_orbit_is_admissible(catalog_measures):
    o = sample_orbit(catalog_measures['golden-markov'], 2000, seed=0)
    w = o.word
    assert not ((w[:-1] == 1) & (w[1:] == 1)).any()


def test_sample_orbit_rejects_bad_component(half_09_mixture):
    with pytest.raises(ValidationError):
        sample_orbit(half_09_mixture, 10, seed=0, component=2)


def test_all_words_have_positive_mass_under_full_support(half):
    for w in itertools.product((0, 1), repeat=5):
        assert cylinder_mass(half, w) == pytest.approx(2 ** -5)
