import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from pressurelab.errors import NumericalError, ValidationError
from pressurelab.models.measure import BernoulliMeasure, NeighborhoodSpec
from pressurelab.models.reports import CpParams, EstimateReport, SchedulePoint
from pressurelab.models.subshift import CylinderUnion, Potential, Subshift
from pressurelab.services.measures import free_energy
from pressurelab.services.symbolic_core import word_count
from pressurelab.services.pressure import (
    coupled_schedule,
    cp_cover_value,
    cp_crossing,
    cp_lower_upper,
    cp_measure_pressure,
    cp_uniform_value,
    extrapolate_trace,
    jump_up_point,
    limit_estimate,
    pressure_oracle,
    separated_pressure,
    sp_estimate,
)
from tests.conftest import GOLDEN_RATIO

JUMP_UP_TOLERANCE = 0.02
SP_TOLERANCE = 0.08


def test_oracle_full_shift(full2, zero2):
    assert pressure_oracle(full2, zero2) == pytest.approx(math.log(2), abs=1e-12)


def test_oracle_golden_mean(golden):
    assert pressure_oracle(golden, Potential.constant(golden, 0.0)) == pytest.approx(math.log(GOLDEN_RATIO), abs=1e-12)


def test_oracle_depth_one_full_shift(full2):
    phi = Potential.from_symbols(full2, (0.1, -0.4))
    assert pressure_oracle(full2, phi) == pytest.approx(math.log(math.exp(0.1) + math.exp(-0.4)), abs=1e-12)


def test_oracle_rejects_foreign_potential(full2, golden):
    with pytest.raises(ValidationError):
        pressure_oracle(full2, Potential.constant(golden, 0.0))


@seed(3)
@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.floats(min_value=-1.0, max_value=1.0), min_size=3, max_size=3),
    st.floats(min_value=-2.0, max_value=2.0),
)
def test_oracle_constant_shift(values, c):
    golden = Subshift.golden_mean()
    phi = Potential.from_mapping(golden, 2, dict(zip(('00', '01', '10'), values)))
    assert pressure_oracle(golden, phi.shifted(c)) == pytest.approx(pressure_oracle(golden, phi) + c, abs=1e-9)


def _golden_potentials(golden):
    return [
        Potential.constant(golden, 0.0),
        Potential.from_mapping(golden, 2, {'00': 0.1}, default=0.0),
        Potential.from_symbols(golden, (0.0, 0.2)),
    ]


def _full2_potentials(full2):
    return [
        Potential.constant(full2, 0.0),
        Potential.constant(full2, 0.7),
        Potential.from_symbols(full2, (0.0, 0.3)),
        Potential.from_mapping(full2, 2, {'00': 0.1, '01': 0.0, '10': -0.1, '11': 0.05}),
    ]


@pytest.mark.slow
def test_jump_up_point_matches_oracle(full2, golden):
    for s, potentials in ((golden, _golden_potentials(golden)), (full2, _full2_potentials(full2))):
        for phi in potentials:
            report = jump_up_point(s, phi, D=16)
            assert report.oracle == pytest.approx(pressure_oracle(s, phi))
            assert report.diff <= JUMP_UP_TOLERANCE
            values = [v for _, v in report.trace]
            assert all(b >= a - 1e-6 for a, b in zip(values, values[1:]))
            assert report.value == values[-1]


def test_jump_up_point_is_exact_for_depth_one_full_shift(full2):
    phi = Potential.from_symbols(full2, (0.0, 0.3))
    report = jump_up_point(full2, phi, D=8)
    assert report.value == pytest.approx(math.log(1 + math.exp(0.3)), abs=1e-5)


def test_jump_up_point_constant_shift(golden):
    phi = Potential.from_symbols(golden, (0.0, 0.2))
    base = jump_up_point(golden, phi, D=8).value
    assert jump_up_point(golden, phi.shifted(0.5), D=8).value == pytest.approx(base + 0.5, abs=1e-5)


def test_jump_up_point_needs_depth(full2, zero2):
    with pytest.raises(NumericalError, match='insufficient depth'):
        jump_up_point(full2, zero2, N_schedule=[4, 20], D=16)


def test_jump_up_point_on_a_cylinder(full2, zero2):
    Z = CylinderUnion.cylinder(full2, '0')
    report = jump_up_point(full2, zero2, Z, D=8)
    assert report.oracle is None
    # at N = D only the 128 length-8 cylinders inside [0] are available
    assert report.value == pytest.approx(7 / 8 * math.log(2), abs=1e-5)


def test_jump_up_point_on_a_fixed_point_cylinder(full2):
    phi = Potential.from_symbols(full2, (0.1, -0.4))
    Z = CylinderUnion.cylinder(full2, '0' * 8)
    report = jump_up_point(full2, phi, Z, N_schedule=[2, 4, 8], D=8)
    # every cover of [0^8] is beaten by a single cylinder [0^j], worth e^{j (phi(0^inf) - alpha)}
    assert [v for _, v in report.trace] == pytest.approx([0.1, 0.1, 0.1], abs=1e-6)
    assert report.params['z_cylinders'] == 1


def test_cover_value_with_single_length(full2, zero2):
    Z = CylinderUnion.whole_space(full2)
    assert cp_cover_value(full2, zero2, Z, CpParams(math.log(2), 4, 1.0, 4)) == pytest.approx(1.0)


@pytest.mark.parametrize('alpha', [0.3, 0.5, 0.7])
def test_cover_value_is_non_decreasing_in_N(golden, alpha):
    phi = Potential.from_symbols(golden, (0.0, 0.2))
    Z = CylinderUnion.whole_space(golden)
    values = [cp_cover_value(golden, phi, Z, CpParams(alpha, N, 1.0, 10)) for N in range(1, 11)]
    assert all(b >= a * (1 - 1e-12) for a, b in zip(values, values[1:]))


def test_cp_params_validation():
    with pytest.raises(ValidationError):
        CpParams(0.5, 10, 1.0, 8)
    with pytest.raises(ValidationError):
        CpParams(0.5, 0)


def test_uniform_covers(full2, golden, zero2):
    assert cp_crossing(full2, zero2, None, 6) == pytest.approx(math.log(2))
    assert cp_uniform_value(full2, zero2, None, math.log(2), 6) == pytest.approx(1.0)
    zero = Potential.constant(golden, 0.0)
    # 2584 admissible 16-words
    assert cp_crossing(golden, zero, None, 16) == pytest.approx(math.log(2584) / 16)
    lower, upper = cp_lower_upper(golden, zero, None, 1.0, [4, 8, 16])
    assert math.log(GOLDEN_RATIO) < lower <= upper
    assert upper == pytest.approx(cp_crossing(golden, zero, None, 4))


def test_separated_pressure_counts_balls(full2, zero2, half):
    F = NeighborhoodSpec(half, 1, 0.3)
    report = separated_pressure(full2, zero2, F, 6)
    # 6-words with two, three or four zeros
    assert report.extras['cylinders'] == 15 + 20 + 15
    assert report.value == pytest.approx(math.log(50) / 6)


def test_separated_pressure_empty_neighbourhood(full2, zero2, b09):
    F = NeighborhoodSpec(b09, 1, 0.01)
    report = separated_pressure(full2, zero2, F, 7)
    assert report.flagged
    assert report.value == -np.inf
    assert report.extras['cardinality'] == 0


def test_separated_pressure_rejects_deep_neighbourhood(full2, zero2, half):
    with pytest.raises(ValidationError):
        separated_pressure(full2, zero2, NeighborhoodSpec(half, 5, 0.3), 4)


@pytest.mark.parametrize('n', [10, 14])
def test_hamming_pressure_is_below_ball_pressure(full2, n):
    mu = BernoulliMeasure(full2, (0.7, 0.3))
    phi = Potential.from_symbols(full2, (0.0, 0.3))
    F = NeighborhoodSpec(mu, 1, 0.1)
    balls = separated_pressure(full2, phi, F, n)
    hamming = separated_pressure(full2, phi, F, n, mode='hamming', delta=0.1)
    assert hamming.value <= balls.value + 1e-12
    assert hamming.extras['cardinality'] <= balls.extras['cardinality']


def test_coupled_schedule():
    schedule = coupled_schedule((8, 18), theta=0.05)
    assert schedule[-1] == SchedulePoint(18, 0.05, 1.0)
    assert schedule[0].theta == pytest.approx(0.05 * math.sqrt(18 / 8))


def test_extrapolation_recovers_the_limit():
    trace = [(n, 0.4 + 0.3 * math.log(n) / n - 0.2 / n) for n in (8, 10, 12, 14, 16, 18)]
    assert extrapolate_trace(trace) == pytest.approx(0.4)
    assert extrapolate_trace(trace[:2]) is None


def test_extrapolation_refuses_a_trace_that_turns_back():
    trace = [(6, 0.30), (8, 0.26), (10, 0.23), (12, 0.21), (14, 0.33), (16, 0.31), (18, 0.29)]
    assert extrapolate_trace(trace) is None
    assert limit_estimate(trace) == (0.29, False)
    rising = [(n, 0.4 + 0.3 * math.log(n) / n - 0.2 / n) for n in (8, 10, 12, 14, 16, 18)]
    estimate, fitted = limit_estimate(rising)
    assert fitted
    assert estimate == pytest.approx(0.4)


def test_report_value_must_match_trace():
    with pytest.raises(ValidationError):
        EstimateReport(value=1.0, params={}, trace=((1, 0.5),))


@pytest.mark.slow
@pytest.mark.parametrize('p', [0.7, 0.9])
@pytest.mark.parametrize('mode,delta', [('n_eps', None), ('hamming', 0.1)])
def test_sp_estimate_matches_free_energy(full2, p, mode, delta):
    mu = BernoulliMeasure(full2, (p, 1 - p))
    for phi in (Potential.from_symbols(full2, (0.0, 0.3)), Potential.from_symbols(full2, (-0.2, 0.4))):
        report = sp_estimate(full2, phi, mu, mode=mode, delta=delta)
        assert report.oracle == pytest.approx(free_energy(mu, phi).value)
        assert report.diff <= SP_TOLERANCE


@pytest.mark.slow
def test_sp_estimate_uniform_measure_extrapolates(full2, zero2, half):
    report = sp_estimate(full2, zero2, half)
    assert report.oracle == pytest.approx(math.log(2))
    assert report.value == pytest.approx(math.log(math.comb(18, 9)) / 18)
    assert abs(report.extrapolated - report.oracle) <= SP_TOLERANCE


def test_sp_estimate_constant_shift(full2, b09):
    phi = Potential.from_symbols(full2, (0.0, 0.3))
    schedule = [SchedulePoint(n, 0.1) for n in (8, 10)]
    base = sp_estimate(full2, phi, b09, schedule).value
    assert sp_estimate(full2, phi.shifted(0.25), b09, schedule).value == pytest.approx(base + 0.25)


def test_cp_measure_pressure_is_exploratory(full2, zero2, b09):
    report = cp_measure_pressure(full2, zero2, b09, ell=4, delta=0.1, N_schedule=[4, 8], D=8)
    assert report.extras['exploratory']
    assert report.extras['z_mass'] >= 0.9 - 1e-9
    assert report.oracle == pytest.approx(free_energy(b09, zero2).value)


def test_separated_pressure_shrinks_with_the_neighbourhood(full2):
    mu = BernoulliMeasure(full2, (0.7, 0.3))
    phi = Potential.from_symbols(full2, (0.0, 0.3))
    values = [separated_pressure(full2, phi, NeighborhoodSpec(mu, 1, theta), 12).value
              for theta in (0.5, 0.2, 0.1, 0.05)]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    assert math.isfinite(values[-1])


def test_separated_pressure_counts_words_when_F_is_everything(golden, catalog_measures):
    F = NeighborhoodSpec(catalog_measures['golden-markov'], 1, 2.0)
    report = separated_pressure(golden, Potential.constant(golden, 0.0), F, 10)
    assert report.extras['cylinders'] == word_count(golden, 10) == 144
    assert report.value == pytest.approx(math.log(144) / 10)


@pytest.mark.slow
def test_sp_estimate_refuses_to_extrapolate_a_lattice_trace(full2, zero2, b09):
    schedule = coupled_schedule((6, 8, 10, 12, 14, 16, 18), theta=0.05)
    report = sp_estimate(full2, zero2, b09, schedule)
    # one rare symbol up to n = 12, then one or two
    expected = [math.log(n) / n for n in (6, 8, 10, 12)] + [
        math.log(105) / 14, math.log(136) / 16, math.log(171) / 18]
    assert [v for _, v in report.trace] == pytest.approx(expected)
    assert not report.extras['fitted']
    assert report.flagged
    assert report.extrapolated == report.value
    assert abs(report.extrapolated - report.oracle) <= SP_TOLERANCE


@pytest.mark.slow
@pytest.mark.parametrize('mode,delta', [('n_eps', None), ('hamming', 0.1)])
@pytest.mark.parametrize('values', [(0.0, 0.3), (-0.2, 0.4)])
def test_sp_tolerance_holds_on_the_extrapolated_limit(full2, half, mode, delta, values):
    phi = Potential.from_symbols(full2, values)
    shift = sum(values) / 2
    report = sp_estimate(full2, phi, half, mode=mode, delta=delta)
    assert report.oracle == pytest.approx(math.log(2) + shift)
    assert report.value == pytest.approx(math.log(math.comb(18, 9)) / 18 + shift)
    # balanced words differ in at least two places, so hamming keeps them all
    assert report.extras['cardinality'] == math.comb(18, 9)
    trace = [v for _, v in report.trace]
    assert all(b > a for a, b in zip(trace, trace[1:]))
    assert report.extras['fitted']
    assert not report.flagged
    assert report.diff > SP_TOLERANCE
    assert abs(report.extrapolated - report.oracle) <= SP_TOLERANCE
