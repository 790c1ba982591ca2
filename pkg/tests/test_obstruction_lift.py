import os
import random

import pytest

from errors import InputError, PreconditionError
from formats import parse_algebra, parse_structure
from forms_geometry import is_symplectic_field, is_symplectomorphism, random_cyclic_form, symplectic_form, upsilon
from lie_calculus import (CnStructure, PointedDiffeo, conjugate, derivation_bracket, exp_vector_field,
                          product_derivation, random_derivation)
from obstruction_lift import (check_cn, check_invariance, check_unital_shape, derivation_from_multimaps,
                              extend_morphism, extend_structure, extension_equivalence, is_homotopic,
                              lift_morphism_to_symplectic, lift_to_symplectic, multimaps_from_derivation,
                              obs_morphism, obs_structure, symplectic_violations, synthetic_morphism,
                              synthetic_structure, working_alphabet)


@pytest.fixture
def synthetic(sphere):
    return synthetic_structure(sphere, 7, random.Random(7))


def test_synthetic_structure_squares_to_zero(synthetic):
    assert check_cn(CnStructure(synthetic.truncated(6), 7)).is_zero()
    assert synthetic.orders()[0] == 2


def test_product_is_invariant(sphere, cubic):
    for algebra in (sphere, cubic):
        m2 = product_derivation(algebra, working_alphabet(algebra, 3))
        assert check_invariance(algebra, m2).holds
        assert check_unital_shape(m2, algebra) == []


def test_invariance_matches_symplectic_fields(sphere, synthetic):
    report = check_invariance(sphere, synthetic, bound=5)
    omega = symplectic_form(sphere, synthetic.alphabet)
    bad = [n for n in symplectic_violations(synthetic, omega) if n <= 5]
    assert report.holds == (not bad)
    if bad:
        assert report.violation[0] == bad[0]


@pytest.mark.parametrize("name", ["sphere", "cubic"])
def test_invariance_agrees_with_symplectic_fields_on_random_fields(request, name):
    algebra = request.getfixturevalue(name)
    alphabet = working_alphabet(algebra, 5)
    omega = symplectic_form(algebra, alphabet)
    m2 = product_derivation(algebra, alphabet)
    rng = random.Random(31)
    seen = {True: 0, False: 0}
    for k in range(50):
        if k % 2:
            candidate = m2 + random_derivation(alphabet, 1, (2, 3, 4), rng)
        else:
            beta = random_cyclic_form(alphabet, rng.choice((3, 4, 5)), 1 + omega.degree, rng)
            candidate = m2 if beta.is_zero() else m2 + upsilon(beta, omega)
        report = check_invariance(algebra, candidate)
        bad = symplectic_violations(candidate, omega)
        assert report.holds == (not bad)
        if bad:
            assert report.violation[0] == bad[0]
            assert report.detail
        seen[report.holds] += 1
    assert seen[True] and seen[False]


def test_multimaps_round_trip(sphere, synthetic):
    degrees = sphere.basis.degrees
    maps = multimaps_from_derivation(synthetic, degrees)
    assert sorted(maps) == synthetic.orders()
    assert derivation_from_multimaps(maps, synthetic.alphabet, degrees) == synthetic


@pytest.mark.parametrize("level", [4, 5])
def test_plain_extension_of_truncated_structure(sphere, synthetic, level):
    structure = CnStructure(synthetic.truncated(level - 1), level)
    obstruction = obs_structure(structure, sphere)
    assert obstruction.bidegree == (level + 1, 3)
    assert obstruction.is_zero
    result = extend_structure(structure, sphere)
    assert result.success
    assert result.structure.level == level + 1
    assert check_cn(result.structure).is_zero()
    assert result.solution_dimension >= 0
    assert result.to_dict()["success"] is True


def test_extension_of_square_zero_algebra_is_obstructed(samples_dir):
    algebra = parse_algebra(os.path.join(samples_dir, "square_zero.json"))
    structure = parse_structure(os.path.join(samples_dir, "square_zero_m3.cinf"), algebra)
    assert structure.level == 4
    assert check_cn(structure).is_zero()
    obstruction = obs_structure(structure, algebra)
    assert obstruction.bidegree == (5, 3)
    assert not obstruction.representative.is_zero()
    assert not obstruction.is_zero
    assert obstruction.preimage() is None
    result = extend_structure(structure, algebra)
    assert result.success is False
    assert result.part is None and result.structure is None
    assert result.to_dict()["success"] is False
    assert result.to_dict()["obstruction"]["zero_class"] is False


def test_obstruction_rejects_non_structure(sphere):
    alphabet = working_alphabet(sphere, 5)
    m2 = product_derivation(sphere, alphabet)
    broken = m2 + random_derivation(alphabet, 1, (4,), random.Random(3))
    if check_cn(CnStructure(broken, 5)).is_zero():
        pytest.skip("random part happened to be a cocycle")
    with pytest.raises(PreconditionError):
        obs_structure(CnStructure(broken, 5), sphere)


def test_unknown_flavor(sphere, synthetic):
    with pytest.raises(InputError):
        obs_structure(CnStructure(synthetic.truncated(3), 4), sphere, flavor="cyclic")


def test_extensions_differ_by_equivalence(sphere, synthetic):
    result = extend_structure(CnStructure(synthetic.truncated(3), 4), sphere)
    m4 = result.part
    alphabet = m4.alphabet
    m2 = product_derivation(sphere, alphabet)
    zeta = random_derivation(alphabet, 0, (3,), random.Random(11))
    other = m4 + derivation_bracket(m2, zeta)
    xi = extension_equivalence(m4, other, sphere)
    assert xi is not None
    assert derivation_bracket(xi, m2) == m4 - other


def test_lift_of_product_is_trivial(sphere):
    m2 = product_derivation(sphere, working_alphabet(sphere, 5))
    result = lift_to_symplectic(m2, sphere, 4)
    assert result.ok
    assert result.phi.is_identity()
    assert all(part.is_zero() for order, part in result.m_prime.parts.items() if order >= 3)


@pytest.mark.parametrize("two_step", [False, True])
def test_lift_synthetic_structure_on_sphere(sphere, synthetic, two_step):
    result = lift_to_symplectic(synthetic, sphere, 5, two_step=two_step)
    assert result.ok
    assert [s.order for s in result.stages] == [3, 4, 5]
    omega = symplectic_form(sphere, result.m_prime.alphabet)
    assert is_symplectic_field(result.m_prime.m, omega).is_zero()
    assert set(result.to_dict()["residuals"].values()) == {"0"}


def test_lift_synthetic_structure_on_cubic(cubic):
    m = synthetic_structure(cubic, 5, random.Random(5))
    assert lift_to_symplectic(m, cubic, 4).ok


def test_unital_lift(sphere):
    m = synthetic_structure(sphere, 6, random.Random(2), unital=True)
    result = lift_to_symplectic(m, sphere, 5, unital=True)
    assert result.ok
    assert result.residuals["normalised"] == "0"


@pytest.mark.slow
@pytest.mark.parametrize("name", ["sphere", "cubic"])
def test_lift_to_order_six(request, name):
    algebra = request.getfixturevalue(name)
    m = synthetic_structure(algebra, 7, random.Random(6))
    assert lift_to_symplectic(m, algebra, 6).ok
    assert lift_to_symplectic(m, algebra, 6, two_step=True).ok


def test_lift_preconditions(sphere):
    m2 = product_derivation(sphere, working_alphabet(sphere, 5))
    with pytest.raises(InputError):
        lift_to_symplectic(m2, sphere, 2)
    with pytest.raises(PreconditionError):
        lift_to_symplectic(m2.scaled(2), sphere, 4)


def test_symplectic_extension_of_lift(sphere, synthetic):
    lifted = lift_to_symplectic(synthetic, sphere, 5).m_prime.m
    structure = CnStructure(lifted.truncated(3), 4)
    assert obs_structure(structure, sphere, flavor="symplectic").is_zero
    result = extend_structure(structure, sphere, flavor="symplectic")
    assert result.success
    assert result.structure.symplectic_checked
    omega = symplectic_form(sphere, result.part.alphabet)
    assert is_symplectic_field(result.part, omega).is_zero()


def test_morphism_extension(sphere):
    alphabet = working_alphabet(sphere, 6)
    m2 = product_derivation(sphere, alphabet)
    gamma = random_derivation(alphabet, 0, (3,), random.Random(4))
    target = conjugate(exp_vector_field(gamma), m2)
    identity = PointedDiffeo.identity(alphabet)
    assert obs_morphism(identity, m2, target, sphere, 4).is_zero
    result = extend_morphism(identity, m2, target, sphere, 4)
    assert result.success
    assert result.morphism is not None


def test_symplectic_morphism_extension(sphere):
    alphabet = working_alphabet(sphere, 6)
    omega = symplectic_form(sphere, alphabet)
    m2 = product_derivation(sphere, alphabet)
    gamma = upsilon(random_cyclic_form(alphabet, 4, 0, random.Random(9)), omega)
    target = conjugate(exp_vector_field(gamma), m2)
    identity = PointedDiffeo.identity(alphabet)
    result = extend_morphism(identity, m2, target, sphere, 4, flavor="symplectic")
    assert result.success
    assert is_symplectic_field(result.gamma, omega).is_zero()


def test_morphism_obstruction_needs_lower_orders(sphere):
    alphabet = working_alphabet(sphere, 6)
    m2 = product_derivation(sphere, alphabet)
    with pytest.raises(PreconditionError):
        obs_morphism(PointedDiffeo.identity(alphabet), m2, m2.scaled(2), sphere, 4)


def test_homotopic_to_itself(sphere):
    alphabet = working_alphabet(sphere, 6)
    m2 = product_derivation(sphere, alphabet)
    identity = PointedDiffeo.identity(alphabet)
    result = is_homotopic(identity, identity, m2, sphere)
    assert result.homotopic and result.witnesses == []


def test_homotopy_through_exact_flow(sphere):
    alphabet = working_alphabet(sphere, 6)
    m2 = product_derivation(sphere, alphabet)
    eta = random_derivation(alphabet, -1, (2, 3), random.Random(13))
    flow = exp_vector_field(derivation_bracket(m2, eta))
    result = is_homotopic(flow, PointedDiffeo.identity(alphabet), m2, sphere)
    assert result.homotopic
    assert result.failed_order is None


@pytest.mark.parametrize("seed", range(21, 31))
def test_lift_synthetic_morphism(sphere, seed):
    morphism, source, target = synthetic_morphism(sphere, 5, random.Random(seed))
    result = lift_morphism_to_symplectic(morphism, source, target, sphere, 5)
    assert result.ok
    omega = symplectic_form(sphere, result.phi_prime.alphabet)
    assert is_symplectomorphism(result.phi_prime, omega).is_zero()
    assert result.to_dict()["residuals"]["composition"] == "0"


def test_morphism_lift_needs_depth(sphere):
    m2 = product_derivation(sphere, working_alphabet(sphere, 4))
    with pytest.raises(InputError):
        lift_morphism_to_symplectic(PointedDiffeo.identity(m2.alphabet), m2, m2, sphere, 3)
