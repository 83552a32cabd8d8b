import sys
from pathlib import Path

# Ensure src is on sys.path so we can import the twistlab modules
ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / 'src'
sys.path.insert(0, str(SRC))

import json
import math

import numpy as np
import pytest

from enflo import (DistanceEstimate, EnfloDimensionError, certificate_ratio, check_increase, dist_to_linear_lower,
                   dist_to_linear_upper, distance_sandwich, enflo_delta, enflo_iterate, lift_config,
                   optimal_transverse, transverse_configs, transverse_points, transverse_ratio, verify_estimate)
from maps import KaltonPeck, Linear, Zero, map_norm, parse_map
from spaces import ZeroSumConfig, euclidean, random_zero_sum_configs

L1 = euclidean(1)


def _zero_iterate(k):
    return enflo_iterate(Zero(L1, L1), k)


@pytest.mark.parametrize('k, dims', [(0, (1, 1)), (1, (2, 3)), (2, (4, 8)), (3, (8, 20))])
def test_iterate_dimensions(k, dims):
    h = _zero_iterate(k)
    assert (h.domain.dim, h.codomain.dim) == dims
    assert parse_map(h.to_text(), h.domain, h.codomain).to_text() == h.to_text()


def test_iterate_limits():
    with pytest.raises(ValueError):
        _zero_iterate(-1)
    with pytest.raises(EnfloDimensionError):
        _zero_iterate(15)
    with pytest.raises(EnfloDimensionError):
        enflo_delta(Zero(euclidean(2 ** 13 + 1), L1))


def test_delta_of_linear_map_is_not_linear():
    h = enflo_delta(Linear(L1, L1, np.array([[2.0]])))
    value = h(np.array([3.0, 4.0]))
    assert np.allclose(value, [6.0, 8.0, 2.4])


@pytest.mark.parametrize('k', [1, 2, 3])
def test_iterates_keep_the_increase_inequality(k):
    h = _zero_iterate(k)
    configs = random_zero_sum_configs(h.domain, 10000, (2, 3, 4, 5, 6, 7, 8), seed=k)
    report = check_increase(h, configs)
    assert report.passed
    assert report.config_count == 10000
    assert 0 < report.max_ratio <= 1 + 1e-9


def test_increase_check_flags_violations():
    kp = KaltonPeck(euclidean(2))
    big = parse_map('scale(100,kp)', euclidean(2), euclidean(2))
    configs = random_zero_sum_configs(euclidean(2), 200, (3, 4), seed=0)
    assert check_increase(big, configs).violated
    assert check_increase(kp, configs).max_ratio < check_increase(big, configs).max_ratio


def test_certificate_ratio_vanishes_for_linear_maps():
    h = Linear(euclidean(3), euclidean(2), np.arange(6.0).reshape(2, 3))
    for config in random_zero_sum_configs(euclidean(3), 20, (2, 5), seed=1):
        assert certificate_ratio(h, config.points) <= 1e-12


def test_transverse_ratio_closed_form():
    c, s = 0.6, np.array([0.8])
    points = transverse_points(euclidean(2), c, s)
    assert np.abs(points.sum(axis=0)).max() == 0.0
    assert transverse_ratio(c, s) == pytest.approx(0.48 / 1.6)
    assert certificate_ratio(_zero_iterate(1), points) == pytest.approx(0.3)


@pytest.mark.parametrize('k', [1, 2, 3])
@pytest.mark.parametrize('h0', [Zero(L1, L1), Linear(L1, L1, np.array([[2.0]])), KaltonPeck(L1)],
                         ids=['zero', 'linear', 'kp'])
def test_transverse_ratio_is_independent_of_the_seed_map(k, h0):
    c, s = optimal_transverse(k)
    h = enflo_iterate(h0, k)
    points = transverse_points(h.domain, c, s)
    assert certificate_ratio(h, points) == pytest.approx(transverse_ratio(c, s), abs=1e-12)


def test_optimal_transverse_values_increase():
    ratios = [transverse_ratio(*optimal_transverse(k)) for k in (1, 2, 3)]
    golden = (math.sqrt(5) - 1) / 2
    assert ratios[0] == pytest.approx(golden * math.sqrt(1 - golden ** 2) / (1 + golden), abs=1e-6)
    assert ratios[1] - ratios[0] > 0.01
    assert ratios[2] - ratios[1] > 0.01
    c, s = optimal_transverse(2)
    assert c ** 2 + np.sum(s ** 2) == pytest.approx(1.0)


def test_transverse_points_need_room():
    with pytest.raises(EnfloDimensionError):
        transverse_points(euclidean(2), 0.5, [0.5, 0.5])


def test_transverse_configs_are_zero_sum():
    configs = transverse_configs(euclidean(4), 2, count=5, seed=3)
    assert len(configs) == 5
    for config in configs:
        assert config.n == 3


def test_lifted_configs_keep_their_ratio():
    h1, h2 = _zero_iterate(1), _zero_iterate(2)
    config = transverse_configs(h1.domain, 1, count=1)[0]
    lifted = lift_config(config, h2.domain)
    assert lifted.points.shape == (3, 4)
    assert certificate_ratio(h2, lifted.points) == pytest.approx(certificate_ratio(h1, config.points), abs=1e-12)


def test_lower_bound_of_linear_map_is_zero():
    h = Linear(euclidean(2), euclidean(2), np.eye(2))
    estimate = dist_to_linear_lower(h, random_zero_sum_configs(euclidean(2), 5, 3, seed=0), refine_steps=5)
    assert estimate.lower <= 1e-12
    assert verify_estimate(estimate).passed


def test_lower_bound_needs_configs():
    with pytest.raises(ValueError):
        dist_to_linear_lower(_zero_iterate(1), [], refine_steps=1)


def test_upper_bound_of_near_linear_map():
    eps = 1e-3
    space = euclidean(3)
    h = parse_map(f'sum(linear([[1,2,0],[0,1,0],[1,0,1]]),scale({eps},kp))', space, space)
    estimate = dist_to_linear_upper(h, 400, 50, seed=0)
    assert estimate.upper <= 1.5 * eps * map_norm(KaltonPeck(space), 20000, seed=1) + 1e-6
    assert verify_estimate(estimate).passed


def test_upper_bound_needs_enough_samples():
    with pytest.raises(ValueError):
        dist_to_linear_upper(_zero_iterate(2), 3, 10, seed=0)


def _growth(k_max=3, refine_steps=0):
    estimates, previous = [], None
    for k in range(k_max + 1):
        h = _zero_iterate(k)
        configs = random_zero_sum_configs(h.domain, 4, (3, 4), seed=k)
        if k >= 1:
            configs += transverse_configs(h.domain, k, seed=k)
        if previous is not None:
            configs.append(lift_config(previous.certificate, h.domain))
        estimate = distance_sandwich(h, configs, 400, 60, refine_steps, seed=k)
        estimates.append(estimate)
        previous = estimate
    return estimates


@pytest.fixture(scope='module')
def growth():
    return _growth()


def test_enflo_lower_bounds_grow(growth):
    lowers = [e.lower for e in growth]
    assert lowers[0] <= 1e-12
    for a, b in zip(lowers[1:], lowers[2:]):
        assert b - a > 0.01
    for estimate in growth:
        assert estimate.upper >= estimate.lower


def test_certificates_verify_after_serialisation(growth, tmp_path):
    for k, estimate in enumerate(growth):
        path = tmp_path / f'cert_k{k}.json'
        path.write_text(json.dumps(estimate.to_json()))
        loaded = DistanceEstimate.from_json(json.loads(path.read_text()))
        result = verify_estimate(loaded)
        assert result.passed
        for _, stored, recomputed in result.checks:
            assert abs(stored - recomputed) <= 1e-12


def test_tampered_certificate_fails(growth):
    data = growth[2].to_json()
    data['lower'] = data['lower'] + 1e-6
    assert not verify_estimate(DistanceEstimate.from_json(data)).passed


def test_distance_estimate_rejects_other_json():
    with pytest.raises(ValueError):
        DistanceEstimate.from_json({'kind': 'something_else'})


def test_certificate_points_are_zero_sum(growth):
    for estimate in growth:
        assert isinstance(estimate.certificate, ZeroSumConfig)
        assert np.abs(estimate.certificate.points.sum(axis=0)).max() <= 1e-12
