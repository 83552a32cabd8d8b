import sys
from pathlib import Path

# Ensure src is on sys.path so we can import the twistlab modules
ROOT = Path(__file__).resolve().parents[1]
SRC = ROOT / 'src'
sys.path.insert(0, str(SRC))

import numpy as np
import pytest

from linalg_utils import (block_diag, column_space_residual, complement_basis, left_inverse, null_space,
                          numerical_rank, right_inverse, smallest_singular_value)


def test_numerical_rank():
    assert numerical_rank(np.array([[1.0, 2.0], [2.0, 4.0]])) == 1
    assert numerical_rank(np.eye(3)) == 3
    assert numerical_rank(np.zeros((0, 4))) == 0
    assert numerical_rank(np.diag([1.0, 1e-12])) == 1


def test_smallest_singular_value():
    assert smallest_singular_value(np.diag([3.0, 0.5])) == pytest.approx(0.5)
    assert smallest_singular_value(np.ones((2, 3))) == 0.0
    assert smallest_singular_value(np.zeros((0, 0))) == 0.0


def test_null_space_and_complement():
    matrix = np.array([[1.0, 1.0, 0.0]])
    kernel = null_space(matrix)
    assert kernel.shape == (3, 2)
    assert np.abs(matrix @ kernel).max() <= 1e-12
    assert null_space(np.zeros((0, 2))).shape == (2, 2)
    basis, rank = complement_basis(np.array([[1.0, 2.0], [0.0, 0.0], [0.0, 0.0]]))
    assert rank == 1
    assert basis.shape == (3, 2)
    assert np.abs(basis[0]).max() <= 1e-12
    assert complement_basis(np.zeros((2, 0)))[1] == 0


def test_one_sided_inverses():
    tall = np.array([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
    assert np.allclose(left_inverse(tall) @ tall, np.eye(2))
    wide = tall.T
    assert np.allclose(wide @ right_inverse(wide), np.eye(2))


def test_column_space_residual_and_blocks():
    basis = np.array([[1.0], [0.0]])
    assert column_space_residual(basis, np.array([[3.0], [0.0]])) <= 1e-12
    assert column_space_residual(basis, np.array([[0.0], [2.0]])) == pytest.approx(2.0)
    assert np.array_equal(block_diag(np.eye(1), 2 * np.eye(2)), np.diag([1.0, 2.0, 2.0]))
