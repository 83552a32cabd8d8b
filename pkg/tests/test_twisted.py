import sys
from pathlib import Path

# Ensure src is on sys.path so we can import the twistlab modules
ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / 'src'
sys.path.insert(0, str(SRC))

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from extops import validate_extension
from maps import KaltonPeck, Zero, parse_map, rho
from spaces import euclidean, random_vectors, rng_for
from twisted import (TwistedSpace, canonical_selection, equivalence_constant, extension_from_factor, pair_from_json,
                     pair_to_json, twisted_add, twisted_neg, twisted_norm_bounds, twisted_scale,
                     twisted_space_from_json)

TEST_MAPS = ['kp', 'sum(linear([[1,2],[0,1]]),scale(0.3,kp))', 'scale(-2,kp)']
SCALARS = st.floats(min_value=-5.0, max_value=5.0).filter(lambda v: v == 0 or abs(v) > 1e-6)


def _twisted(text='kp', dim=2):
    space = euclidean(dim)
    return TwistedSpace(rho(parse_map(text, space, space)))


def test_addition_follows_the_factor_system():
    space = _twisted()
    a = (np.array([1.0, 2.0]), np.array([3.0, 0.5]))
    b = (np.array([-1.0, 0.0]), np.array([1.0, -2.0]))
    x, y = twisted_add(space, a, b)
    assert np.allclose(x, a[0] + b[0] - space.phi(a[1], b[1]))
    assert np.allclose(y, a[1] + b[1])


@pytest.mark.parametrize('text', TEST_MAPS)
@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31))
def test_vector_space_axioms(text, seed):
    space = _twisted(text)
    rng = rng_for(seed)
    a, b, c = [(rng.standard_normal(2), rng.standard_normal(2)) for _ in range(3)]
    left = twisted_add(space, twisted_add(space, a, b), c)
    right = twisted_add(space, a, twisted_add(space, b, c))
    assert np.allclose(np.concatenate(left), np.concatenate(right), atol=1e-9)
    swapped = twisted_add(space, b, a)
    assert np.allclose(np.concatenate(twisted_add(space, a, b)), np.concatenate(swapped), atol=1e-12)
    zero = twisted_add(space, a, twisted_neg(space, a))
    assert np.allclose(np.concatenate(zero), 0.0, atol=1e-9)
    doubled = twisted_add(space, a, a)
    assert np.allclose(np.concatenate(twisted_scale(space, 2.0, a)), np.concatenate(doubled), atol=1e-9)


@pytest.mark.parametrize('text', TEST_MAPS)
@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31),
       lam=SCALARS, mu=SCALARS)
def test_scalar_multiplication_distributes(text, seed, lam, mu):
    space = _twisted(text)
    rng = rng_for(seed)
    a, b = [(rng.standard_normal(2), rng.standard_normal(2)) for _ in range(2)]
    left = twisted_scale(space, lam, twisted_add(space, a, b))
    right = twisted_add(space, twisted_scale(space, lam, a), twisted_scale(space, lam, b))
    assert np.allclose(np.concatenate(left), np.concatenate(right), atol=1e-8)
    left = twisted_scale(space, lam + mu, a)
    right = twisted_add(space, twisted_scale(space, lam, a), twisted_scale(space, mu, a))
    assert np.allclose(np.concatenate(left), np.concatenate(right), atol=1e-8)


@pytest.mark.parametrize('text', TEST_MAPS)
def test_chart_is_linear(text):
    space = _twisted(text)
    rng = rng_for(4)
    for _ in range(20):
        a = (rng.standard_normal(2), rng.standard_normal(2))
        b = (rng.standard_normal(2), rng.standard_normal(2))
        chart_sum = space.to_chart(twisted_add(space, a, b))
        assert np.allclose(chart_sum, space.to_chart(a) + space.to_chart(b), atol=1e-9)
        back = space.from_chart(space.to_chart(a))
        assert np.allclose(back[0], a[0], atol=1e-12) and np.allclose(back[1], a[1])


@pytest.mark.parametrize('text', TEST_MAPS)
def test_canonical_selection_recovers_factor_system(text):
    space = _twisted(text)
    p = canonical_selection(space)
    rng = rng_for(5)
    y1, y2 = rng.standard_normal((1000, 2)), rng.standard_normal((1000, 2))
    difference = p.evaluate(y1 + y2) - p.evaluate(y1) - p.evaluate(y2)
    xs, ys = space.pairs_from_chart(difference)
    assert np.abs(xs - space.phi.evaluate(y1, y2)).max() <= 1e-9
    assert np.abs(ys).max() <= 1e-12


def test_canonical_selection_is_the_pair_zero_y():
    space = _twisted()
    y = np.array([0.3, -1.2])
    x, back = space.from_chart(canonical_selection(space)(y))
    assert np.allclose(x, 0.0, atol=1e-12)
    assert np.allclose(back, y)


@pytest.mark.parametrize('text', TEST_MAPS)
def test_norm_sandwich_on_the_axes(text):
    space = _twisted(text)
    rng = rng_for(6)
    zero = np.zeros(2)
    for k, (x, y) in enumerate(zip(random_vectors(euclidean(2), 1000, rng), random_vectors(euclidean(2), 1000, rng))):
        on_e = twisted_norm_bounds(space, (x, zero), 2, seed=k)
        assert on_e.upper <= np.linalg.norm(x) + 1e-9
        on_f = twisted_norm_bounds(space, (zero, y), 2, seed=k)
        assert on_f.upper == pytest.approx(np.linalg.norm(y), abs=1e-9)
        assert on_f.lower == pytest.approx(np.linalg.norm(y), abs=1e-9)


def test_zero_factor_gives_the_sum_norm():
    space = TwistedSpace(rho(Zero(euclidean(2), euclidean(3))))
    rng = rng_for(7)
    for _ in range(50):
        x, y = rng.standard_normal(3), rng.standard_normal(2)
        bounds = twisted_norm_bounds(space, (x, y), 1)
        expected = np.linalg.norm(x) + np.linalg.norm(y)
        assert bounds.upper == pytest.approx(expected, abs=1e-9)
        assert bounds.lower == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize('text', TEST_MAPS)
def test_bounds_are_ordered_and_deeper_search_never_worse(text):
    space = _twisted(text)
    rng = rng_for(8)
    for k in range(30):
        z = (rng.standard_normal(2), rng.standard_normal(2))
        shallow = twisted_norm_bounds(space, z, 2, seed=k)
        deep = twisted_norm_bounds(space, z, 4, seed=k)
        assert shallow.lower <= shallow.upper
        assert deep.lower <= deep.upper
        assert deep.upper <= shallow.upper
        assert deep.lower >= np.linalg.norm(z[1]) - 1e-12
        assert deep.estimate


def test_explicit_constant_is_not_an_estimate():
    space = _twisted()
    z = (np.array([2.0, 0.0]), np.array([0.5, 0.5]))
    bounds = twisted_norm_bounds(space, z, 3, c_bound=5.0)
    assert not bounds.estimate
    assert bounds.c_used >= 5.0
    assert bounds.depth == 3
    assert json.loads(json.dumps(bounds.to_json()))['upper'] == bounds.upper


def test_split_depth_must_be_positive():
    with pytest.raises(ValueError):
        twisted_norm_bounds(_twisted(), (np.zeros(2), np.zeros(2)), 0)


def test_space_norm_is_the_upper_bound():
    space = _twisted()
    zero = np.zeros(2)
    u = np.vstack([space.to_chart((np.array([1.0, 0.0]), zero)), space.to_chart((zero, np.array([3.0, 4.0])))])
    assert np.allclose(space.norms(u), [1.0, 5.0])


def test_equivalence_constant():
    space = _twisted()
    assert equivalence_constant(space) == pytest.approx(1.0 + space.c_estimate)
    assert space.c_estimate > 0


def test_extension_from_factor_is_exact():
    space = euclidean(3)
    ext = extension_from_factor(euclidean(3), space, rho(KaltonPeck(space)))
    assert validate_extension(ext).passed
    assert ext.twisted_backing.dim == 6
    with pytest.raises(ValueError):
        extension_from_factor(euclidean(2), space, rho(KaltonPeck(space)))


def test_json_round_trips():
    space = _twisted('scale(0.5,kp)')
    again = twisted_space_from_json(json.loads(json.dumps(space.to_json())))
    y1, y2 = np.array([1.0, 2.0]), np.array([-0.5, 3.0])
    assert np.allclose(again.phi(y1, y2), space.phi(y1, y2))
    z = (np.array([1.0, 2.0]), np.array([3.0, 4.0]))
    x, y = pair_from_json(json.loads(json.dumps(pair_to_json(z))))
    assert np.array_equal(x, z[0]) and np.array_equal(y, z[1])
