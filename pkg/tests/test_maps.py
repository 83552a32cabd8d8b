import sys
from pathlib import Path

# Ensure src is on sys.path so we can import the twistlab modules
ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / 'src'
sys.path.insert(0, str(SRC))

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from maps import (FactorSystem, KaltonPeck, Linear, MapDimensionError, MapSerializationError, MapSyntaxError,
                  check_factor_axioms, combine_factors, eval_map, factor_norm_lower, increase_ratios, map_from_callable,
                  map_norm, parse_map, print_map, pull_factor, push_factor, rho, rho_norm_estimate)
from maps import as_matrix
from spaces import NormedSpace, euclidean, random_zero_sum_configs, rng_for

L2 = euclidean(2)
MODERATE = st.floats(min_value=-1e3, max_value=1e3).filter(lambda v: v == 0 or abs(v) > 1e-3)


@pytest.mark.parametrize('text, dims', [
    ('kp', (2, 2)),
    ('zero', (3, 1)),
    ('linear([[1.0,2.0],[3.0,-4.5]])', (2, 2)),
    ('sum(linear([[1.0,0.0],[0.0,1.0]]),scale(0.3,kp))', (2, 2)),
    ('delta(zero)', (2, 3)),
    ('delta(delta(zero))', (4, 8)),
    ('pre([[1.0,1.0]],kp)', (2, 1)),
    ('post([[1.0],[2.0]],zero)', (3, 2)),
])
def test_print_map_gives_canonical_text(text, dims):
    h = parse_map(text, euclidean(dims[0]), euclidean(dims[1]))
    assert print_map(h) == text
    again = parse_map(print_map(h), euclidean(dims[0]), euclidean(dims[1]))
    x = rng_for(0).standard_normal((100, dims[0]))
    assert np.array_equal(again.evaluate(x), h.evaluate(x))


def test_parser_accepts_whitespace_and_integers():
    h = parse_map(' sum( linear([[1, 0], [0, 1]]) ,\n scale(2e-1, kp) ) ', L2, L2)
    assert print_map(h) == 'sum(linear([[1.0,0.0],[0.0,1.0]]),scale(0.2,kp))'


@pytest.mark.parametrize('text, position', [
    ('sum(kp,, kp)', 7),
    ('foo', 0),
    ('linear([[1,2],[3]])', 14),
    ('scale(0.5 kp)', 10),
    ('kp extra', 3),
    ('kp $', 3),
])
def test_syntax_errors_report_position(text, position):
    with pytest.raises(MapSyntaxError) as excinfo:
        parse_map(text, L2, L2)
    assert excinfo.value.position == position


def test_dimension_error_names_the_failing_node():
    with pytest.raises(MapDimensionError) as excinfo:
        parse_map('sum(kp, linear([[1]]))', L2, L2)
    assert excinfo.value.node == 'sum@0.right.linear@8'


@pytest.mark.parametrize('text, dims', [
    ('linear([[1,0]])', (2, 2)),
    ('kp', (2, 3)),
    ('delta(zero)', (3, 3)),
    ('delta(zero)', (2, 2)),
    ('pre([[1,0,0]],kp)', (2, 1)),
])
def test_dimension_errors(text, dims):
    with pytest.raises(MapDimensionError):
        parse_map(text, euclidean(dims[0]), euclidean(dims[1]))


def test_delta_needs_euclidean_spaces():
    with pytest.raises(MapDimensionError):
        parse_map('delta(zero)', NormedSpace(2, 1.0), euclidean(3))


def test_kalton_peck_values():
    kp = KaltonPeck(L2)
    assert np.allclose(eval_map(kp, [3.0, 4.0]), [3 * math.log(5 / 3), 4 * math.log(5 / 4)], atol=1e-12)
    assert np.array_equal(eval_map(kp, [0.0, 2.0]), [0.0, 0.0])
    assert np.array_equal(eval_map(kp, [0.0, 0.0]), [0.0, 0.0])


@pytest.mark.parametrize('space', [NormedSpace(2, 1.0), NormedSpace(2, math.inf), NormedSpace(2, 2.0, (4.0, 1.0))],
                         ids=['l1', 'linf', 'weighted'])
def test_kalton_peck_logarithm_uses_euclidean_norm(space):
    h = parse_map('kp', space, space)
    assert np.allclose(eval_map(h, [1.0, 1.0]), [math.log(math.sqrt(2))] * 2, atol=1e-12)
    assert np.allclose(eval_map(h, [3.0, 4.0]), [3 * math.log(5 / 3), 4 * math.log(5 / 4)], atol=1e-12)


def test_enflo_delta_value():
    h = parse_map('delta(zero)', L2, euclidean(3))
    assert np.allclose(eval_map(h, [3.0, 4.0]), [0.0, 0.0, 2.4], atol=1e-12)
    assert np.array_equal(eval_map(h, [0.0, 0.0]), [0.0, 0.0, 0.0])


@settings(max_examples=50, deadline=None)
@given(x=arrays(np.float64, (3,), elements=MODERATE), lam=MODERATE)
def test_parsed_maps_are_homogeneous(x, lam):
    for text in ('kp', 'sum(linear([[1,2,0],[0,1,0],[1,0,1]]),scale(0.3,kp))'):
        h = parse_map(text, euclidean(3), euclidean(3))
        scaled, base = h(lam * x), lam * h(x)
        assert np.allclose(scaled, base, rtol=1e-9, atol=1e-9 * (1 + np.abs(base).max()))


def test_rho_of_linear_vanishes():
    rng = rng_for(11)
    for _ in range(20):
        h = Linear(euclidean(3), euclidean(4), rng.standard_normal((4, 3)))
        x, y = rng.standard_normal((10000, 3)), rng.standard_normal((10000, 3))
        assert np.abs(rho(h).evaluate(x, y)).max() <= 1e-12


def _axiom_cases():
    cases = []
    for d in range(2, 9):
        cases.append(('kp', d, d))
        cases.append(('sum(linear(' + str(np.eye(d).tolist()) + '),scale(0.3,kp))', d, d))
        if d % 2 == 0:
            cases.append(('delta(zero)', d, d // 2 + 2))
    return cases


@pytest.mark.parametrize('text, f_dim, e_dim', _axiom_cases())
def test_factor_axioms_hold_for_rho(text, f_dim, e_dim):
    h = parse_map(text, euclidean(f_dim), euclidean(e_dim))
    report = check_factor_axioms(rho(h), 10000, seed=f_dim)
    assert report.passed, report
    assert report.increase_ratio > 0
    assert len(report.rows()) == 5


class _Difference(FactorSystem):
    f_space = L2
    e_space = L2

    def evaluate(self, first, second):
        return np.asarray(first) - np.asarray(second)


def test_axiom_check_flags_a_non_factor():
    report = check_factor_axioms(_Difference(), 200, seed=0)
    assert not report.passed
    assert report.symmetry > 1e-3
    assert report.zero_argument > 1e-3


def test_factor_call_checks_dimensions():
    phi = rho(KaltonPeck(L2))
    assert np.array_equal(phi([1.0, 0.0], [1.0, 0.0]), [0.0, 0.0])
    with pytest.raises(ValueError):
        phi([1.0], [1.0, 0.0])


def test_as_matrix_recognises_linear_maps():
    matrix = np.array([[1.0, 2.0], [0.0, -1.0]])
    assert np.allclose(as_matrix(Linear(L2, L2, matrix)), matrix)
    assert as_matrix(KaltonPeck(L2)) is None


def test_map_norm_of_diagonal():
    h = Linear(L2, L2, np.diag([3.0, 1.0]))
    value = map_norm(h, 5000, seed=0)
    assert value <= 3.0 + 1e-12
    assert value > 2.99


def test_linear_structure_of_factor_systems():
    kp = KaltonPeck(L2)
    h = Linear(L2, L2, np.array([[0.0, 1.0], [1.0, 1.0]]))
    rng = rng_for(2)
    x, y = rng.standard_normal((50, 2)), rng.standard_normal((50, 2))
    combined = combine_factors(2.0, rho(kp), -1.0, rho(h))
    assert np.allclose(combined.evaluate(x, y), 2.0 * rho(kp).evaluate(x, y), atol=1e-12)

    t = np.array([[1.0, 2.0], [0.0, 1.0], [3.0, 0.0]])
    pushed = push_factor(t, rho(kp))
    assert pushed.e_space.dim == 3
    assert np.allclose(pushed.evaluate(x, y), rho(kp).evaluate(x, y) @ t.T)

    s = np.array([[1.0], [2.0]])
    pulled = pull_factor(rho(kp), s)
    u, v = rng.standard_normal((50, 1)), rng.standard_normal((50, 1))
    assert np.allclose(pulled.evaluate(u, v), rho(kp).evaluate(u @ s.T, v @ s.T))


def test_push_factor_checks_shape():
    with pytest.raises(ValueError):
        push_factor(np.eye(3), rho(KaltonPeck(L2)), euclidean(2))


def test_increase_ratios_and_factor_norm_lower():
    kp = KaltonPeck(L2)
    configs = random_zero_sum_configs(L2, 10, (2, 3, 4), seed=0)
    stack = np.stack([c.points for c in configs if c.n == 3])
    assert np.all(increase_ratios(rho(Linear(L2, L2, np.eye(2))), stack) <= 1e-12)
    lower = factor_norm_lower(rho(kp), [c.points for c in configs], optimize_steps=10)
    assert 0 < lower <= rho_norm_estimate(kp, 5000, seed=0)


def test_callable_maps_have_no_text():
    h = map_from_callable(L2, L2, lambda batch: 2 * batch)
    assert np.array_equal(h([1.0, 2.0]), [2.0, 4.0])
    with pytest.raises(MapSerializationError):
        h.to_text()
    assert '2->2' in str(h)
