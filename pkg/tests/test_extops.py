import sys
from pathlib import Path

# Ensure src is on sys.path so we can import the twistlab modules
ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / 'src'
sys.path.insert(0, str(SRC))

import json

import numpy as np
import pytest

from extops import (Extension, ExtensionError, NotASelectionError, Selection, SpaceMismatchError, baer_sum,
                    direct_sum_extension, extension_from_json, factor_from_extension, find_congruence, make_selection,
                    pullback, pushout, scale_extension, selection_from_extension, split_extension,
                    validate_extension)
from linalg_utils import right_inverse
from maps import KaltonPeck, Linear, PostLinear, PreLinear, push_factor, pull_factor, rho
from spaces import euclidean, rng_for
from twisted import extension_from_factor


def _quasilinear(e_dim, f_dim, rng, inner=2):
    a = rng.standard_normal((inner, f_dim))
    b = rng.standard_normal((e_dim, inner))
    return PostLinear(b, PreLinear(a, KaltonPeck(euclidean(inner)), euclidean(f_dim)), euclidean(e_dim))


def _factor_backed(e_dim, f_dim, rng):
    return extension_from_factor(euclidean(e_dim), euclidean(f_dim), rho(_quasilinear(e_dim, f_dim, rng)))


def _random_dims(rng):
    return int(rng.integers(1, 9)), int(rng.integers(1, 9))


def test_split_and_direct_sum_are_exact():
    split = split_extension(euclidean(2), euclidean(3))
    assert validate_extension(split).passed
    assert split.g_space.dim == 5
    both = direct_sum_extension(split, split_extension(euclidean(1), euclidean(1)))
    report = validate_extension(both)
    assert report.passed
    assert report.expected == (3, 7, 4)


def test_validation_reports_broken_sequences():
    e, f = euclidean(2), euclidean(2)
    not_injective = Extension(e, euclidean(4), f, np.array([[1.0, 1.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]),
                              np.hstack([np.zeros((2, 2)), np.eye(2)]))
    assert not validate_extension(not_injective).passed
    not_composable = Extension(e, euclidean(4), f, np.vstack([np.eye(2), np.zeros((2, 2))]), np.eye(2, 4))
    report = validate_extension(not_composable)
    assert not report.passed
    assert report.composition_residual == pytest.approx(1.0)


def test_extension_shapes_are_checked():
    with pytest.raises(ExtensionError):
        Extension(euclidean(2), euclidean(4), euclidean(2), np.eye(4, 3), np.eye(2, 4))


def test_linear_selection_has_zero_factor():
    ext = _factor_backed(2, 3, rng_for(0))
    p = selection_from_extension(ext, 'linear')
    assert p.is_linear
    phi = factor_from_extension(ext, p)
    ys = rng_for(1).standard_normal((100, 3))
    assert np.abs(phi.evaluate(ys, ys[::-1])).max() <= 1e-10


def test_canonical_selection_recovers_the_factor_system():
    rng = rng_for(2)
    for _ in range(5):
        e, f = _random_dims(rng)
        h = _quasilinear(e, f, rng)
        ext = extension_from_factor(euclidean(e), euclidean(f), rho(h))
        phi = factor_from_extension(ext, selection_from_extension(ext, 'canonical'))
        y1, y2 = rng.standard_normal((200, f)), rng.standard_normal((200, f))
        assert np.abs(phi.evaluate(y1, y2) - rho(h).evaluate(y1, y2)).max() <= 1e-9


def test_nonlinear_selection_on_split_extension():
    e = f = euclidean(2)
    ext = split_extension(e, f)
    kp = KaltonPeck(f)
    p = selection_from_extension(ext, 'nonlinear', kp)
    assert not p.is_linear
    phi = factor_from_extension(ext, p)
    y1, y2 = rng_for(3).standard_normal((100, 2)), rng_for(4).standard_normal((100, 2))
    assert np.allclose(phi.evaluate(y1, y2), rho(kp).evaluate(y1, y2), atol=1e-10)


def test_selection_errors():
    ext = split_extension(euclidean(2), euclidean(2))
    with pytest.raises(NotASelectionError):
        make_selection(ext, Linear(euclidean(2), ext.g_space, np.zeros((4, 2))))
    with pytest.raises(NotASelectionError):
        make_selection(ext, Linear(euclidean(3), euclidean(4), np.zeros((4, 3))))
    with pytest.raises(ValueError):
        selection_from_extension(ext, 'nonlinear')
    with pytest.raises(ExtensionError):
        selection_from_extension(ext, 'canonical')
    with pytest.raises(ValueError):
        selection_from_extension(ext, 'sideways')


def test_factor_of_a_false_selection_is_rejected():
    ext = split_extension(euclidean(2), euclidean(2))
    fake = Selection(ext, PostLinear(right_inverse(ext.sigma_matrix), KaltonPeck(euclidean(2)), ext.g_space), 0.0)
    with pytest.raises(NotASelectionError):
        factor_from_extension(ext, fake)


def test_identity_pushout_and_pullback_are_congruent():
    rng = rng_for(5)
    for _ in range(10):
        e, f = _random_dims(rng)
        ext = _factor_backed(e, f, rng)
        for other in (pushout(np.eye(e), ext, ext.e_space), pullback(ext, np.eye(f), ext.f_space),
                      baer_sum(ext, split_extension(ext.e_space, ext.f_space))):
            found = find_congruence(other, ext)
            assert found is not None
            assert found.residual <= 1e-8
            assert found.smallest_singular_value > 1e-8


def test_baer_sum_is_commutative():
    rng = rng_for(6)
    for _ in range(20):
        e, f = _random_dims(rng)
        first, second = _factor_backed(e, f, rng), _factor_backed(e, f, rng)
        found = find_congruence(baer_sum(first, second), baer_sum(second, first))
        assert found is not None and found.residual <= 1e-8


def test_pushout_and_pullback_shapes():
    ext = _factor_backed(2, 3, rng_for(7))
    t = rng_for(8).standard_normal((4, 2))
    pushed = pushout(t, ext)
    assert validate_extension(pushed).passed
    assert (pushed.e_space.dim, pushed.g_space.dim, pushed.f_space.dim) == (4, 7, 3)
    s = rng_for(9).standard_normal((3, 1))
    pulled = pullback(ext, s)
    assert validate_extension(pulled).passed
    assert (pulled.e_space.dim, pulled.g_space.dim, pulled.f_space.dim) == (2, 3, 1)
    with pytest.raises(ExtensionError):
        pushout(np.eye(3), ext)
    with pytest.raises(ExtensionError):
        pullback(ext, np.eye(2))


def test_functoriality_through_factor_systems():
    rng = rng_for(10)
    h = _quasilinear(2, 3, rng)
    ext = extension_from_factor(euclidean(2), euclidean(3), rho(h))
    t = rng.standard_normal((3, 2))
    pushed = extension_from_factor(euclidean(3), euclidean(3), push_factor(t, rho(h), euclidean(3)))
    assert find_congruence(pushout(t, ext, euclidean(3)), pushed) is not None
    s = rng.standard_normal((3, 2))
    pulled = extension_from_factor(euclidean(2), euclidean(2), pull_factor(rho(h), s, euclidean(2)))
    assert find_congruence(pullback(ext, s, euclidean(2)), pulled) is not None


def test_baer_sum_needs_matching_ends():
    with pytest.raises(SpaceMismatchError):
        baer_sum(split_extension(euclidean(2), euclidean(2)), split_extension(euclidean(2), euclidean(3)))
    with pytest.raises(SpaceMismatchError):
        find_congruence(split_extension(euclidean(1), euclidean(2)), split_extension(euclidean(2), euclidean(1)))


def test_zero_multiple_is_the_split_class():
    ext = _factor_backed(2, 2, rng_for(11))
    zero = scale_extension(0.0, ext)
    assert validate_extension(zero).passed
    assert find_congruence(zero, split_extension(euclidean(2), euclidean(2))) is not None


def test_congruence_of_permuted_split_extension():
    ext = split_extension(euclidean(2), euclidean(3))
    perm = np.eye(5)[[3, 0, 4, 1, 2]]
    permuted = Extension(ext.e_space, euclidean(5), ext.f_space, perm @ ext.i_matrix, ext.sigma_matrix @ perm.T)
    found = find_congruence(ext, permuted)
    assert found is not None
    assert found.residual <= 1e-10
    assert np.allclose(found.matrix, perm, atol=1e-10)


def test_extension_json_round_trip():
    ext = extension_from_factor(euclidean(2), euclidean(2), rho(KaltonPeck(euclidean(2))))
    data = json.loads(json.dumps(ext.to_json()))
    assert data['phi'] == 'kp'
    again = extension_from_json(data)
    assert again.twisted_backing is not None
    assert np.array_equal(again.i_matrix, ext.i_matrix)
    plain = split_extension(euclidean(1), euclidean(2))
    again = extension_from_json(json.loads(json.dumps(plain.to_json())))
    assert np.array_equal(again.sigma_matrix, plain.sigma_matrix)
    assert again.g_space.dim == 3
