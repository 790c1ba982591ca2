from fractions import Fraction

import pytest

from errors import InputError, ValidationError
from graded_core import (Algebra, GradedBasis, Pairing, StructureConstants, format_scalar, koszul_sign,
                         require_frobenius, to_scalar, truncated_polynomial_algebra, validate_frobenius)


def test_scalars_are_exact():
    assert to_scalar("3/6") == Fraction(1, 2)
    assert to_scalar(-4) == Fraction(-4)
    assert format_scalar(Fraction(-2, 4)) == "-1/2"
    assert format_scalar(Fraction(6, 3)) == "2"
    with pytest.raises(InputError):
        to_scalar(1.5)
    with pytest.raises(InputError):
        to_scalar("1/0")


def test_koszul_sign():
    assert koszul_sign([1, 0], [1, 1]) == -1
    assert koszul_sign([1, 0], [2, 1]) == 1
    # cyclic shift of three odd symbols is an even permutation of odd objects
    assert koszul_sign([1, 2, 0], [1, 1, 1]) == 1
    with pytest.raises(InputError):
        koszul_sign([0, 0], [1, 1])


def test_sphere_basis(sphere):
    basis = sphere.basis
    assert basis.generator_degrees == (1, -1)
    assert basis.generator_names() == ("tau", "t_x")
    assert basis.is_connected()
    assert basis.non_unit_indices() == (1,)
    assert sphere.pairing.symplectic_degree == 0


def test_models_are_frobenius(sphere, cubic):
    assert validate_frobenius(sphere.product, sphere.pairing).valid
    assert validate_frobenius(cubic.product, cubic.pairing).valid


def test_duplicate_names_rejected():
    with pytest.raises(InputError):
        GradedBasis((("a", 0), ("a", 2)))


def test_unit_must_have_degree_zero():
    with pytest.raises(InputError):
        GradedBasis((("a", 2),), unit_index=0)


def _non_associative():
    basis = GradedBasis((("a", 0), ("b", 0)))
    one = Fraction(1)
    table = {(0, 0): {1: one}, (0, 1): {0: one}, (1, 0): {0: one}}
    return Algebra(basis, StructureConstants(basis, table), None, "bad")


def test_associativity_violation_has_witness():
    algebra = _non_associative()
    report = validate_frobenius(algebra.product)
    assert not report.valid
    first = next(v for v in report.violations if v.identity == "associativity")
    assert first.witness == ("a", "a", "b")
    with pytest.raises(ValidationError) as info:
        require_frobenius(algebra)
    assert "associativity" in info.value.message
    assert "a, a, b" in info.value.message


def test_degenerate_pairing_is_reported(sphere):
    zero = Pairing(((0, 0), (0, 0)), 2)
    report = validate_frobenius(sphere.product, zero)
    assert [v.identity for v in report.violations] == ["pairing nondegeneracy"]


def test_pairing_of_wrong_degree(sphere):
    shifted = Pairing(((0, 1), (1, 0)), 4)
    report = validate_frobenius(sphere.product, shifted)
    assert "pairing degree" in {v.identity for v in report.violations}


def test_truncated_polynomial_algebra_products(cubic):
    assert cubic.product.product(1, 1) == {2: Fraction(1)}
    assert cubic.product.product(1, 2) == {}
    assert cubic.pairing.degree == 4
    with pytest.raises(InputError):
        truncated_polynomial_algebra(2, 0)
