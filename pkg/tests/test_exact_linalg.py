import random
from fractions import Fraction

import pytest

from errors import InputError
from exact_linalg import SparseMatrix, dense_rank, determinant, echelon, fraction_free_rank, span_rank


def F(*values):
    return [Fraction(v) for v in values]


@pytest.fixture
def matrix():
    return SparseMatrix.from_dense([F(1, 2, 3), F(2, 4, 6), F(0, 1, 1)])


def test_rank_agrees_with_dense_oracle(matrix):
    assert matrix.rank() == 2
    assert dense_rank(matrix) == 2
    assert matrix.row_echelon("first").rank == matrix.row_echelon("sparse").rank == 2


def test_fraction_free_rank_matches_gauss_jordan():
    rng = random.Random(5)
    for _ in range(40):
        nrows, ncols = rng.randint(1, 6), rng.randint(1, 6)
        dense = [[Fraction(rng.randint(-3, 3), rng.randint(1, 4)) if rng.random() < 0.6 else Fraction(0)
                  for _ in range(ncols)] for _ in range(nrows)]
        matrix = SparseMatrix.from_dense(dense)
        assert fraction_free_rank(matrix.rows) == matrix.row_echelon().rank == dense_rank(matrix)


def test_fraction_free_rank_of_dependent_rows():
    rows = [{0: Fraction(1, 2), 1: Fraction(1, 3)}, {0: Fraction(3), 1: Fraction(2)}, {2: Fraction(-7, 5)}]
    assert fraction_free_rank(rows) == 2
    assert fraction_free_rank([]) == 0


def test_kernel_vectors_are_annihilated(matrix):
    kernel = matrix.kernel()
    assert len(kernel) == 1
    for vector in kernel:
        assert matrix.apply(vector) == {}


def test_solve_particular_solution(matrix):
    rhs = matrix.apply({0: Fraction(1), 2: Fraction(-2)})
    solution = matrix.solve(rhs)
    assert solution is not None
    assert matrix.apply(solution) == rhs


def test_solve_inconsistent(matrix):
    assert matrix.solve({0: Fraction(1)}) is None


def test_inverse_and_determinant():
    a = SparseMatrix.from_dense([F(2, 1), F(1, 1)])
    assert (a.inverse() @ a).to_dense() == SparseMatrix.identity(2).to_dense()
    assert determinant(a.to_dense()) == 1
    with pytest.raises(InputError):
        SparseMatrix.from_dense([F(1, 2), F(2, 4)]).inverse()


def test_shape_mismatch():
    with pytest.raises(InputError):
        SparseMatrix(2, 3) @ SparseMatrix(2, 2)


def test_echelon_insert_tracks_span():
    form = echelon([{0: Fraction(1), 1: Fraction(1)}], 3)
    assert not form.insert({0: Fraction(2), 1: Fraction(2)})
    assert form.insert({2: Fraction(5)})
    assert form.rank == 2
    assert span_rank([{0: Fraction(1)}, {0: Fraction(3)}, {1: Fraction(1)}], 2) == 2


def test_empty_matrices():
    empty = SparseMatrix(0, 3)
    assert empty.rank() == 0
    assert dense_rank(empty) == 0
    assert len(empty.kernel()) == 3
