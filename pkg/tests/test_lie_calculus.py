from fractions import Fraction

import pytest

from errors import InputError, PreconditionError, TruncationError
from graded_core import sign
from lie_calculus import (Alphabet, CnStructure, Derivation, PointedDiffeo, TensorElement, bch, bracket, compose,
                          conjugate, derivation_bracket, dynkin_project, exp_vector_field, invert_pointed, is_lie,
                          lie_basis, log_pointed, product_derivation, random_derivation, random_lie_element)


@pytest.fixture
def even():
    return Alphabet((0, 0), 5, ("a", "b"))


@pytest.fixture
def mixed():
    return Alphabet((1, -1), 5, ("p", "q"))


def gen(alphabet, i):
    return TensorElement.generator(alphabet, i)


def test_bracket_graded_antisymmetry(mixed):
    p, q = gen(mixed, 0), gen(mixed, 1)
    assert bracket(p, q) == bracket(q, p).scaled(-sign(1 * -1))
    assert bracket(p, p) == (p.tensor(p)).scaled(2)


def test_graded_jacobi(mixed, rng):
    x = random_lie_element(mixed, 1, 1, rng) + gen(mixed, 0)
    y = bracket(gen(mixed, 0), gen(mixed, 1))
    z = gen(mixed, 1)
    dx, dy, dz = 1, 0, -1
    total = (bracket(x, bracket(y, z)).scaled(sign(dx * dz))
             + bracket(y, bracket(z, x)).scaled(sign(dy * dx))
             + bracket(z, bracket(x, y)).scaled(sign(dz * dy)))
    assert total.is_zero()


def test_dynkin_projects_onto_lie_elements(even):
    a, b = gen(even, 0), gen(even, 1)
    lie = bracket(a, bracket(a, b))
    assert dynkin_project(lie) == lie
    word = a.tensor(b)
    projected = dynkin_project(word)
    assert projected == bracket(a, b).scaled(Fraction(1, 2))
    assert is_lie(projected) and not is_lie(word)


def test_lie_basis_dimensions(even):
    assert [len(lie_basis(even, n, 0)) for n in (1, 2, 3, 4)] == [2, 1, 2, 3]


def test_lie_basis_of_one_odd_generator():
    odd = Alphabet((1,), 4)
    assert len(lie_basis(odd, 2, 2)) == 1
    assert len(lie_basis(odd, 3, 3)) == 0


def test_lie_basis_restricted_letters(even):
    assert len(lie_basis(even, 2, 0, (0,))) == 0
    assert len(lie_basis(even, 1, 0, (1,))) == 1


def test_bracket_respects_truncation(even):
    a, b = gen(even, 0), gen(even, 1)
    big = bracket(a, bracket(a, bracket(a, b)))
    with pytest.raises(TruncationError):
        bracket(big, bracket(a, b))
    assert bracket(big, bracket(a, b), strict=False).is_zero()


def test_derivation_degree_is_checked(mixed):
    with pytest.raises(InputError):
        Derivation(mixed, 1, {0: gen(mixed, 1)})


def test_derivation_rejects_non_lie_images(even, rng):
    a, b = gen(even, 0), gen(even, 1)
    with pytest.raises(InputError, match="not a Lie element"):
        Derivation(even, 0, {0: a.tensor(b)})
    assert not Derivation(even, 0, {0: a.tensor(b)}, check=False).is_lie()
    assert Derivation(even, 0, {0: bracket(a, b)}).is_lie()
    for degree in (-1, 0, 1):
        assert random_derivation(even, degree, (1, 2, 3), rng).is_lie()


def test_derivation_bracket_is_graded_antisymmetric(mixed, rng):
    xi = random_derivation(mixed, 1, (2,), rng)
    gamma = random_derivation(mixed, 0, (2, 3), rng)
    assert derivation_bracket(xi, gamma) == derivation_bracket(gamma, xi).scaled(-1)


def test_pointed_diffeo_rejects_nonpointed(even):
    with pytest.raises(PreconditionError):
        PointedDiffeo(even, {0: gen(even, 1)})


def test_exp_log_round_trip(even, rng):
    gamma = random_derivation(even, 0, (2, 3), rng)
    assert not gamma.is_zero()
    assert log_pointed(exp_vector_field(gamma)) == gamma


def test_inverse_composes_to_identity(even, rng):
    phi = exp_vector_field(random_derivation(even, 0, (2, 3), rng))
    assert compose(phi, invert_pointed(phi)).is_identity()
    assert compose(invert_pointed(phi), phi).is_identity()


def test_bch_matches_composition(even, rng):
    gamma = random_derivation(even, 0, (2,), rng)
    other = random_derivation(even, 0, (2, 3), rng)
    assert exp_vector_field(bch(gamma, other)) == compose(exp_vector_field(gamma), exp_vector_field(other))


def test_exp_needs_degree_zero_and_order_two(mixed, even):
    with pytest.raises(InputError):
        exp_vector_field(Derivation(mixed, 1, {1: bracket(gen(mixed, 0), gen(mixed, 1))}))
    with pytest.raises(InputError):
        exp_vector_field(Derivation.euler(even))


def test_conjugated_product_squares_to_zero(sphere, rng):
    alphabet = Alphabet.from_basis(sphere.basis, 6)
    m2 = product_derivation(sphere, alphabet)
    assert derivation_bracket(m2, m2).is_zero()
    gamma = random_derivation(alphabet, 0, (2, 3), rng)
    m = conjugate(exp_vector_field(gamma), m2)
    assert m.order_part(2) == m2
    assert derivation_bracket(m, m).is_zero()
    assert m.is_lie()


def test_cn_structure_levels(sphere):
    alphabet = Alphabet.from_basis(sphere.basis, 4)
    m2 = product_derivation(sphere, alphabet)
    assert CnStructure(m2, 3).parts == {2: m2}
    with pytest.raises(InputError):
        CnStructure(m2, 2)
    with pytest.raises(InputError):
        CnStructure(Derivation.euler(alphabet), 4)
