import random
from fractions import Fraction

import pytest

from errors import InputError, PreconditionError
from forms_geometry import (ConstantTwoForm, Form, canonical_word, cartan_residuals, contract, d_form, d_lie,
                            euler_homotopy, is_symplectic_field, is_symplectomorphism, kappa,
                            kappa_inv, letter, lie_derivative, lie_zero_forms, make_form, phi, phi_inv,
                            random_cyclic_form, random_form, symplectic_form, upsilon, upsilon_inv)
from graded_core import truncated_polynomial_algebra
from lie_calculus import (Alphabet, Derivation, TensorElement, bracket, derivation_bracket, exp_vector_field,
                          product_derivation, random_derivation)


@pytest.fixture
def even():
    return Alphabet((0, 0), 4, ("a", "b"))


@pytest.fixture
def sphere_alphabet(sphere):
    return Alphabet.from_basis(sphere.basis, 4)


@pytest.fixture
def omega(sphere, sphere_alphabet):
    return symplectic_form(sphere, sphere_alphabet)


def test_canonical_word_moves_dg_last(even):
    assert canonical_word((letter(0, True), letter(1)), even.degrees) == ((letter(1), letter(0, True)), 1)


def test_odd_square_class_vanishes():
    assert canonical_word((letter(0), letter(0)), (1,)) is None
    assert make_form(Alphabet((1,), 3), 0, {(0, 0): 1}).is_zero()


def test_form_word_must_match_form_degree(even):
    with pytest.raises(InputError):
        make_form(even, 1, {(letter(0), letter(1)): 1})


@pytest.mark.parametrize("form_degree", [0, 1])
def test_d_squares_to_zero(sphere_alphabet, rng, form_degree):
    for length in (2, 3, 4):
        alpha = random_form(sphere_alphabet, form_degree, length, rng)
        assert d_form(d_form(alpha)).is_zero()


def test_euler_field_counts_letters(sphere_alphabet, rng):
    alpha = random_form(sphere_alphabet, 2, 3, rng)
    euler = Derivation.euler(sphere_alphabet)
    assert lie_derivative(euler, alpha) == alpha.scaled(3)
    assert contract(euler, make_form(sphere_alphabet, 0, {(0, 2): 1})).is_zero()


def test_d_lie_marks_last_letter(even):
    a, b = TensorElement.generator(even, 0), TensorElement.generator(even, 1)
    expected = make_form(even, 1, {(letter(0), letter(1, True)): 1, (letter(1), letter(0, True)): -1})
    assert d_lie(bracket(a, b)) == expected
    with pytest.raises(InputError):
        d_lie(a.tensor(b))


def test_euler_homotopy_inverts_d(sphere_alphabet, rng):
    for length in (2, 3, 4, 5):
        alpha = random_form(sphere_alphabet, 0, length, rng)
        assert euler_homotopy(d_form(alpha)) == alpha


def test_euler_homotopy_rejects_open_form(even):
    open_form = make_form(even, 1, {(letter(0), letter(1, True)): 1})
    with pytest.raises(PreconditionError) as excinfo:
        euler_homotopy(open_form)
    assert excinfo.value.witness


def failing_cartan_identities(algebra, length, seeds):
    alphabet = Alphabet.from_basis(algebra.basis, 4)
    failures = []
    for seed in seeds:
        rng = random.Random(seed)
        xi = random_derivation(alphabet, rng.choice((-1, 0, 1)), (1, 2, 3), rng)
        gamma = random_derivation(alphabet, rng.choice((-1, 0, 1)), (1, 2, 3), rng)
        flow = exp_vector_field(random_derivation(alphabet, 0, (2, 3), rng))
        for form_degree in range(min(length, 2) + 1):
            alpha = random_form(alphabet, form_degree, length, rng)
            residuals = cartan_residuals(xi, gamma, flow, alpha)
            failures += [(seed, form_degree, name) for name, r in residuals.items() if not r.is_zero()]
    return failures


@pytest.mark.parametrize("name", ["sphere", "cubic"])
@pytest.mark.parametrize("length", [1, 2, 3, 4])
def test_cartan_identities(request, name, length):
    assert failing_cartan_identities(request.getfixturevalue(name), length, range(3)) == []


@pytest.mark.slow
@pytest.mark.parametrize("name", ["sphere", "cubic"])
@pytest.mark.parametrize("length", [1, 2, 3, 4])
def test_cartan_identities_many_seeds(request, name, length):
    assert failing_cartan_identities(request.getfixturevalue(name), length, range(3, 28)) == []


def test_kappa_round_trip(sphere, omega, sphere_alphabet):
    assert kappa(omega) == sphere.pairing.matrix
    assert kappa(omega.to_form()) == sphere.pairing.matrix
    assert kappa_inv(kappa(omega), sphere_alphabet, omega.degree) == omega
    assert ConstantTwoForm.from_form(omega.to_form()) == omega


def test_symplectic_form_is_closed_and_nondegenerate(omega):
    assert omega.is_nondegenerate()
    assert d_form(omega.to_form()).is_zero()


def test_symplectic_form_preconditions(sphere_alphabet):
    with pytest.raises(PreconditionError):
        symplectic_form(truncated_polynomial_algebra(2, 1, with_pairing=False), sphere_alphabet)
    odd = truncated_polynomial_algebra(1, 1)
    with pytest.raises(PreconditionError):
        symplectic_form(odd, Alphabet.from_basis(odd.basis, 3))


def test_skew_check_on_constant_forms(sphere_alphabet):
    with pytest.raises(InputError):
        ConstantTwoForm(sphere_alphabet, ((0, 1), (2, 0)), 0)


def test_phi_round_trip(sphere_alphabet, omega, rng):
    for degree in (-1, 0, 1):
        xi = random_derivation(sphere_alphabet, degree, (1, 2, 3), rng)
        assert phi_inv(phi(xi, omega), omega) == xi


@pytest.mark.parametrize("name", ["sphere", "cubic"])
def test_phi_intertwines_differentials(request, name):
    algebra = request.getfixturevalue(name)
    alphabet = Alphabet.from_basis(algebra.basis, 4)
    omega = symplectic_form(algebra, alphabet)
    m2 = product_derivation(algebra, alphabet)
    rng = random.Random(41)
    for _ in range(10):
        xi = random_derivation(alphabet, rng.choice((-1, 0, 1)), (1, 2), rng)
        lhs = phi(derivation_bracket(m2, xi), omega)
        rhs = lie_derivative(m2, phi(xi, omega))
        assert (lhs - rhs).truncated(alphabet.truncation).is_zero()


def test_upsilon_round_trip_and_symplecticity(sphere_alphabet, omega, rng):
    found = 0
    for order in (2, 3, 4, 5):
        for degree in range(-3, 4):
            if not lie_zero_forms(sphere_alphabet, order, degree):
                continue
            alpha = random_cyclic_form(sphere_alphabet, order, degree, rng)
            xi = upsilon(alpha, omega)
            assert is_symplectic_field(xi, omega).is_zero()
            assert upsilon_inv(xi, omega) == alpha
            found += 1
    assert found


def test_upsilon_inv_rejects_non_symplectic(even):
    omega = kappa_inv(((0, 1), (-1, 0)), even, 0)
    a = TensorElement.generator(even, 0)
    xi = Derivation(even, 0, {0: a.tensor(a)}, check=False)
    assert not is_symplectic_field(xi, omega).is_zero()
    with pytest.raises(PreconditionError):
        upsilon_inv(xi, omega)


def test_flow_of_symplectic_field_preserves_omega(sphere_alphabet, omega):
    forms = lie_zero_forms(sphere_alphabet, 4, 0)
    alpha = forms[0]
    assert not alpha.is_zero()
    xi = upsilon(alpha, omega)
    assert xi.degree == 0 and xi.lowest_order == 3
    assert is_symplectomorphism(exp_vector_field(xi), omega).is_zero()


def test_zero_form_helpers(even):
    assert Form.zero(even, 0) == 0
    assert upsilon(Form.zero(even, 0), kappa_inv(((0, 1), (-1, 0)), even, 0)).is_zero()
    with pytest.raises(InputError):
        upsilon(make_form(even, 1, {(letter(1), letter(0, True)): Fraction(1)}),
                kappa_inv(((0, 1), (-1, 0)), even, 0))
