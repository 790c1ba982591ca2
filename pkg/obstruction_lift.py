#!/usr/bin/env python3
"""
cinf-lift - Obstructions and Lifting

Obstruction classes for extending C_n-structures and C_n-morphisms, the
extension solvers, and the order by order algorithms that lift a
C-infinity structure or morphism to a symplectic one for the constant form
of a Frobenius pairing.

Flavors: "plain" works with all vector fields, "symplectic" with the fields
Upsilon(beta) of cyclic 0-forms, and "unital" with normalised 0-forms only.
"""

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from errors import InputError, InternalInvariantError, PreconditionError
from exact_linalg import SparseMatrix, Vector, dense_rank
from forms_geometry import (ConstantTwoForm, is_symplectic_field, is_symplectomorphism, lie_derivative,
                            symplectic_form, upsilon, upsilon_inv)
from graded_core import Algebra, format_scalar, require_frobenius, sign
from harrison import CohomologyReport, build_block, cohomology, make_space, matrix_between
from lie_calculus import (Alphabet, CnStructure, Derivation, PointedDiffeo, TensorElement, compose,
                          conjugate, derivation_bracket, exp_vector_field, invert_pointed,
                          product_derivation, random_derivation)

logger = logging.getLogger(__name__)

STRUCTURE_FLAVORS = ("plain", "symplectic", "unital")

MultiMaps = Dict[int, Dict[Tuple[int, ...], Dict[int, Fraction]]]


def _check_flavor(flavor: str) -> None:
    if flavor not in STRUCTURE_FLAVORS:
        raise InputError(f"unknown flavor {flavor!r}; expected one of {STRUCTURE_FLAVORS}")


def working_alphabet(algebra: Algebra, truncation: int) -> Alphabet:
    return Alphabet.from_basis(algebra.basis, truncation)


def _rebase(m: Derivation, alphabet: Alphabet) -> Derivation:
    return m if m.alphabet == alphabet else m.with_alphabet(alphabet)


def _rebase_diffeo(phi_map: PointedDiffeo, alphabet: Alphabet) -> PointedDiffeo:
    if phi_map.alphabet == alphabet:
        return phi_map
    images = {g: TensorElement(alphabet, {w: c for w, c in im.terms.items() if len(w) <= alphabet.truncation})
              for g, im in phi_map.images.items()}
    return PointedDiffeo(alphabet, images, check=False)


def _residual_text(x) -> str:
    return "0" if x.is_zero() else x.format()


# --- structures -------------------------------------------------------------

def check_cn(structure: CnStructure, n: Optional[int] = None,
             algebra: Optional[Algebra] = None) -> Derivation:
    """
    Residual 1/2 [m, m] in orders <= n (default: the structure's level).

    Zero exactly when m is a C_n-structure. With `algebra`, m_2 must also be
    the product vector field of its structure constants.
    """
    n = structure.level if n is None else n
    m = structure.m
    if m.alphabet.truncation < n:
        m = m.with_alphabet(m.alphabet.with_truncation(n))
    if algebra is not None:
        expected = product_derivation(algebra, m.alphabet)
        if m.order_part(2) != expected:
            raise PreconditionError("m_2 does not match the algebra's product",
                                    witness=(m.order_part(2) - expected).format())
    return derivation_bracket(m, m).scaled(Fraction(1, 2)).truncated(n)


def _epsilon(word: Sequence[int], degrees: Sequence[int]) -> int:
    n = len(word)
    return sign(sum((n - 1 - p) * degrees[i] for p, i in enumerate(word)))


def multimaps_from_derivation(m: Derivation, degrees: Sequence[int]) -> MultiMaps:
    """
    The maps m_n: V^n -> V of a degree 1 vector field, keyed by order, then inputs.

    m(g_k) = sum eps m_n^k(x_i1, .., x_in) g_i1 .. g_in with
    eps = (-1)^{sum_k (n - k)|x_ik|}; `degrees` are the degrees of the x_i.
    """
    maps: MultiMaps = {}
    for k, image in m.images.items():
        for word, c in image.terms.items():
            maps.setdefault(len(word), {}).setdefault(word, {})[k] = _epsilon(word, degrees) * c
    return maps


def derivation_from_multimaps(maps: MultiMaps, alphabet: Alphabet, degrees: Sequence[int]) -> Derivation:
    images: Dict[int, Dict[Tuple[int, ...], Fraction]] = {}
    for table in maps.values():
        for word, outputs in table.items():
            for k, c in outputs.items():
                if c:
                    images.setdefault(k, {})[tuple(word)] = _epsilon(word, degrees) * Fraction(c)
    return Derivation(alphabet, 1, {k: TensorElement(alphabet, t) for k, t in images.items()})


@dataclass
class InvarianceReport:
    """First violated instance of cyclic invariance, if any."""
    holds: bool
    violation: Optional[Tuple[int, Tuple[str, ...]]] = None
    detail: str = ""

    def to_dict(self) -> dict:
        data = {"holds": self.holds}
        if self.violation is not None:
            data["violation"] = {"order": self.violation[0], "inputs": list(self.violation[1]),
                                 "detail": self.detail}
        return data


def _tuples(rank: int, length: int):
    if length == 0:
        yield ()
        return
    for head in _tuples(rank, length - 1):
        for i in range(rank):
            yield head + (i,)


def check_invariance(algebra: Algebra, m: Derivation, bound: Optional[int] = None) -> InvarianceReport:
    """
    Check <m_n(x_1..x_n), x_0> = (-1)^{n + |x_0|(|x_1|+..+|x_n|)} <m_n(x_0..x_{n-1}), x_n>.

    Every basis tuple is tried for each order up to `bound`. The answer is
    cross-checked order by order against L_{m_n} omega = 0.
    """
    pairing = algebra.pairing
    if pairing is None:
        raise PreconditionError(f"algebra {algebra.name} has no pairing")
    basis = algebra.basis
    deg = basis.degrees
    maps = multimaps_from_derivation(m, deg)
    orders = [n for n in sorted(maps) if bound is None or n <= bound]
    omega = symplectic_form(algebra, m.alphabet)

    def paired(n, inputs, last):
        return pairing.evaluate(maps[n].get(tuple(inputs), {}), {last: Fraction(1)})

    report = InvarianceReport(True)
    for n in orders:
        failure = None
        for tup in _tuples(basis.rank, n + 1):
            lhs = paired(n, tup[1:], tup[0])
            rhs = sign(n + deg[tup[0]] * sum(deg[i] for i in tup[1:])) * paired(n, tup[:-1], tup[-1])
            if lhs != rhs:
                failure = (tup, lhs, rhs)
                break
        symplectic = is_symplectic_field(m.order_part(n), omega).is_zero()
        if symplectic != (failure is None):
            raise InternalInvariantError(f"invariance and L_m omega = 0 disagree in order {n}",
                                         witness=failure)
        if failure is not None and report.holds:
            tup, lhs, rhs = failure
            report = InvarianceReport(False, (n, tuple(basis.names[i] for i in tup)),
                                      f"{format_scalar(lhs)} != {format_scalar(rhs)}")
    return report


def check_unital_shape(m: Derivation, algebra: Algebra) -> List[str]:
    """Violations of the unital shape: m_2 must be the unital product and m_i (i >= 3) normalised."""
    unit = algebra.basis.unit_index
    if unit is None:
        return [f"algebra {algebra.name} has no unit"]
    problems = []
    if m.order_part(2) != product_derivation(algebra, m.alphabet):
        problems.append("m_2 is not the product of the algebra")
    for order in m.orders():
        if order >= 3 and unit in m.order_part(order).letters():
            problems.append(f"m_{order} is not normalised")
    return problems


def symplectic_violations(m: Derivation, omega: ConstantTwoForm) -> List[int]:
    """Orders whose part is not a symplectic vector field."""
    return [order for order in m.orders()
            if not is_symplectic_field(m.order_part(order), omega).is_zero()]


def synthetic_structure(algebra: Algebra, truncation: int, rng: random.Random,
                        gamma_orders: Sequence[int] = (2, 3), unital: bool = False) -> Derivation:
    """
    exp(gamma) m_2 exp(-gamma) for a seeded random degree 0 vector field gamma.

    The result is a C-infinity structure modulo words longer than `truncation`.
    With `unital`, gamma avoids tau entirely, so the result has unital shape.
    """
    alphabet = working_alphabet(algebra, truncation)
    letters = generators = None
    if unital:
        letters = generators = algebra.basis.non_unit_indices()
    gamma = random_derivation(alphabet, 0, gamma_orders, rng, letters, generators)
    return conjugate(exp_vector_field(gamma), product_derivation(algebra, alphabet))


# --- obstruction classes ----------------------------------------------------

@dataclass
class ObstructionClass:
    """A cocycle representative together with the cohomology of its block."""
    flavor: str
    level: int
    representative: object
    bidegree: Tuple[int, int]
    report: CohomologyReport

    @property
    def is_zero(self) -> bool:
        return self.report.is_coboundary(self.representative)

    def preimage(self):
        return self.report.preimage(self.representative)

    def to_dict(self) -> dict:
        return {
            "flavor": self.flavor, "level": self.level, "bidegree": list(self.bidegree),
            "representative": self.representative.format(), "zero_class": self.is_zero,
            "cohomology_dimension": self.report.dimension,
        }


def _obstruction_field(m: Derivation, n: int) -> Derivation:
    """1/2 sum [m_i, m_j] over i + j = n + 2 with 3 <= i, j <= n - 1."""
    total = Derivation.zero(m.alphabet, 2)
    for i in range(3, n):
        j = n + 2 - i
        if 3 <= j <= n - 1:
            total = total + derivation_bracket(m.order_part(i), m.order_part(j))
    return total.scaled(Fraction(1, 2)).order_part(n + 1)


def _require_unital_lift(algebra: Algebra, omega: ConstantTwoForm) -> None:
    if not algebra.basis.is_connected():
        raise PreconditionError(f"unital lifting needs a connected algebra; {algebra.name} is not")
    if omega.degree > 2:
        raise PreconditionError(f"unital lifting needs |omega| <= 2, got {omega.degree}")


def _guard_exceptional(bidegree: Tuple[int, int]) -> None:
    if bidegree == (3, 2):
        raise InternalInvariantError("a normalised cyclic class landed in bidegree (3, 2)")


def _class_report(algebra: Algebra, alphabet: Alphabet, m2: Derivation, flavor: str,
                  bidegree: Tuple[int, int], normalised: bool) -> CohomologyReport:
    order, j = bidegree
    incoming = build_block(algebra, flavor, (order - 1, j - 1), normalised=normalised, m2=m2, alphabet=alphabet)
    block = build_block(algebra, flavor, bidegree, normalised=normalised, m2=m2, alphabet=alphabet)
    return cohomology(incoming, block)


def _obstruction_class(algebra: Algebra, alphabet: Alphabet, flavor: str, level: int,
                       obs: Derivation, plain_bidegree: Tuple[int, int]) -> ObstructionClass:
    """Wrap a vector field obstruction, passing to Upsilon^{-1} for symplectic flavors."""
    m2 = product_derivation(algebra, alphabet)
    if flavor == "plain":
        representative, bidegree, normalised = obs, plain_bidegree, False
        closed = derivation_bracket(m2, obs).is_zero()
        complex_name = "harrison"
    else:
        omega = symplectic_form(algebra, alphabet)
        normalised = flavor == "unital"
        representative = upsilon_inv(obs, omega)
        order, j = plain_bidegree
        bidegree = (order + 1, j + omega.degree - 2)
        if normalised:
            _guard_exceptional(bidegree)
        closed = lie_derivative(m2, representative).is_zero()
        complex_name = "cyclic"
    if not closed:
        raise InternalInvariantError(f"obstruction at level {level} is not a cocycle",
                                     witness=representative.format())
    report = _class_report(algebra, alphabet, m2, complex_name, bidegree, normalised)
    logger.debug("%s obstruction at level %d in %s: block size %d, H = %d",
                 flavor, level, bidegree, report.block_size, report.dimension)
    return ObstructionClass(flavor, level, representative, bidegree, report)


def _check_structure_flavor(m: Derivation, algebra: Algebra, alphabet: Alphabet, flavor: str) -> None:
    if flavor == "plain":
        return
    omega = symplectic_form(algebra, alphabet)
    bad = symplectic_violations(m, omega)
    if bad:
        raise PreconditionError(f"m_{bad[0]} is not a symplectic vector field", witness=bad)
    if flavor == "unital":
        _require_unital_lift(algebra, omega)
        shape = check_unital_shape(m, algebra)
        if shape:
            raise PreconditionError(shape[0], witness=shape)


def obs_structure(structure: CnStructure, algebra: Algebra, flavor: str = "plain") -> ObstructionClass:
    """
    Obstruction to extending a C_n-structure to a C_{n+1}-structure.

    Plain: the vector field Obs(m) in bidegree (n + 1, 3). Symplectic and
    unital: the 0-form Upsilon^{-1}(Obs(m)) in cyclic bidegree (n + 2, 1 + |omega|).
    """
    _check_flavor(flavor)
    n = structure.level
    alphabet = working_alphabet(algebra, n + 3)
    m = _rebase(structure.m, alphabet)
    residual = check_cn(CnStructure(m, n))
    if not residual.is_zero():
        raise PreconditionError(f"not a C_{n}-structure: residual in orders {residual.orders()}",
                                witness=residual.format())
    _check_structure_flavor(m, algebra, alphabet, flavor)
    return _obstruction_class(algebra, alphabet, flavor, n, _obstruction_field(m, n), (n + 1, 3))


@dataclass
class ExtensionResult:
    """A new part m_n or the class obstructing it."""
    success: bool
    obstruction: ObstructionClass
    part: Optional[Derivation] = None
    structure: Optional[CnStructure] = None
    solution_dimension: int = 0

    def to_dict(self) -> dict:
        data = {"success": self.success, "obstruction": self.obstruction.to_dict(),
                "solution_dimension": self.solution_dimension}
        if self.part is not None:
            data["part"] = self.part.format()
        return data


def extend_structure(structure: CnStructure, algebra: Algebra, flavor: str = "plain") -> ExtensionResult:
    """
    Solve [m_2, m_n] = -Obs(m).

    Symplectic flavors solve L_{m_2} beta = -Upsilon^{-1}(Obs(m)) and set
    m_n = Upsilon(beta). The solutions form an affine space over the
    cocycles of the unknowns' block; its dimension is reported.
    """
    obstruction = obs_structure(structure, algebra, flavor)
    n = structure.level
    incoming = obstruction.report.incoming
    kernel = incoming.differential.kernel()
    solution_dimension = incoming.size - dense_rank(incoming.differential)
    if solution_dimension != len(kernel):
        raise InternalInvariantError(f"solution space at level {n} has dimension {solution_dimension}, "
                                     f"cocycles {len(kernel)}")
    preimage = obstruction.preimage()
    if preimage is None:
        return ExtensionResult(False, obstruction, solution_dimension=solution_dimension)
    alphabet = incoming.space.alphabet
    if flavor == "plain":
        part = -preimage
    else:
        part = upsilon(-preimage, symplectic_form(algebra, alphabet))
    extended = CnStructure(_rebase(structure.m, alphabet) + part, n + 1,
                           unital=structure.unital or flavor == "unital",
                           symplectic_checked=flavor != "plain")
    residual = check_cn(extended)
    if not residual.is_zero():
        raise InternalInvariantError(f"extension at level {n} does not square to zero",
                                     witness=residual.format())
    logger.info("extended level %d (%s), %d-dimensional choice", n, flavor, solution_dimension)
    return ExtensionResult(True, obstruction, part, extended, solution_dimension)


def extension_equivalence(m_n: Derivation, other: Derivation, algebra: Algebra) -> Optional[Derivation]:
    """
    A degree 0 vector field xi with m_n - other = [xi, m_2], or None.

    exp(xi) then carries m + other to m + m_n modulo higher orders.
    """
    difference = m_n - other
    if difference.is_zero():
        return Derivation.zero(m_n.alphabet, 0)
    n = difference.lowest_order
    if difference.highest_order != n:
        raise InputError("extensions must be parts of a single order")
    alphabet = working_alphabet(algebra, max(n, m_n.alphabet.truncation))
    block = build_block(algebra, "harrison", (n - 1, 1), alphabet=alphabet)
    solution = block.differential.solve(block.target.coordinates(_rebase(-difference, alphabet)))
    if solution is None:
        return None
    return block.space.combine(solution)


# --- morphisms --------------------------------------------------------------

def _morphism_residual(phi_map: PointedDiffeo, m: Derivation, target: Derivation) -> Derivation:
    return conjugate(phi_map, m) - target


def obs_morphism(phi_map: PointedDiffeo, m: Derivation, target: Derivation, algebra: Algebra,
                 level: int, flavor: str = "plain") -> ObstructionClass:
    """
    obs(phi) = (phi m phi^{-1} - m') in order n, for a C_n-morphism phi from m to m'.

    Plain: a vector field in bidegree (n, 2). Symplectic and unital: the
    0-form Upsilon^{-1}(obs) in cyclic bidegree (n + 1, |omega|).
    """
    _check_flavor(flavor)
    n = level
    alphabet = working_alphabet(algebra, n + 2)
    phi_map = _rebase_diffeo(phi_map, alphabet)
    m, target = _rebase(m, alphabet), _rebase(target, alphabet)
    difference = _morphism_residual(phi_map, m, target)
    lower = difference.truncated(n - 1)
    if not lower.is_zero():
        raise PreconditionError(f"not a C_{n}-morphism: residual in order {lower.lowest_order}",
                                witness=lower.format())
    if flavor == "unital":
        _require_unital_lift(algebra, symplectic_form(algebra, alphabet))
    return _obstruction_class(algebra, alphabet, flavor, n, difference.order_part(n), (n, 2))


@dataclass
class MorphismExtension:
    success: bool
    obstruction: ObstructionClass
    gamma: Optional[Derivation] = None
    morphism: Optional[PointedDiffeo] = None

    def to_dict(self) -> dict:
        data = {"success": self.success, "obstruction": self.obstruction.to_dict()}
        if self.gamma is not None:
            data["gamma"] = self.gamma.format()
        return data


def extend_morphism(phi_map: PointedDiffeo, m: Derivation, target: Derivation, algebra: Algebra,
                    level: int, flavor: str = "plain") -> MorphismExtension:
    """Solve [m_2, gamma] = obs(phi); exp(gamma) o phi is then a C_{n+1}-morphism."""
    obstruction = obs_morphism(phi_map, m, target, algebra, level, flavor)
    preimage = obstruction.preimage()
    if preimage is None:
        return MorphismExtension(False, obstruction)
    alphabet = obstruction.report.block.space.alphabet
    if flavor == "plain":
        gamma = preimage
    else:
        gamma = upsilon(preimage, symplectic_form(algebra, alphabet))
    extended = compose(exp_vector_field(gamma), _rebase_diffeo(phi_map, alphabet))
    check = _morphism_residual(extended, _rebase(m, alphabet), _rebase(target, alphabet)).truncated(level)
    if not check.is_zero():
        raise InternalInvariantError(f"morphism extension at level {level} failed", witness=check.format())
    return MorphismExtension(True, obstruction, gamma, extended)


@dataclass
class HomotopyResult:
    homotopic: bool
    witnesses: List[Derivation] = field(default_factory=list)
    failed_order: Optional[int] = None


def is_homotopic(phi_map: PointedDiffeo, other: PointedDiffeo, m: Derivation, algebra: Algebra,
                 truncation: Optional[int] = None) -> HomotopyResult:
    """
    Search eta_2, eta_3, .. with phi = other o exp([m, eta_2]) o exp([m, eta_3]) o ...

    eta_k has degree -1 and order k - 1; orders are settled one at a time
    below the truncation.
    """
    truncation = truncation or phi_map.alphabet.truncation
    alphabet = working_alphabet(algebra, truncation)
    phi_map, current = _rebase_diffeo(phi_map, alphabet), _rebase_diffeo(other, alphabet)
    m = _rebase(m, alphabet)
    m2 = product_derivation(algebra, alphabet)
    witnesses = []
    for k in range(2, truncation):
        rho = compose(invert_pointed(current), phi_map)
        delta = Derivation(alphabet, 0, rho.order_part(k), check=False)
        if delta.is_zero():
            continue
        block = build_block(algebra, "harrison", (k - 1, 0), m2=m2, alphabet=alphabet)
        solution = block.differential.solve(block.target.coordinates(delta))
        if solution is None:
            return HomotopyResult(False, witnesses, k)
        eta = block.space.combine(solution)
        witnesses.append(eta)
        current = compose(current, exp_vector_field(derivation_bracket(m, eta)))
    return HomotopyResult(True, witnesses)


# --- lifting ----------------------------------------------------------------

@dataclass
class StageRecord:
    """Linear system and chosen solution of one lift stage."""
    order: int
    unknowns: Dict[str, int]
    equations: int
    rank: int
    part: str = "0"
    gamma: str = "0"

    def to_dict(self) -> dict:
        return {"order": self.order, "unknowns": dict(self.unknowns), "equations": self.equations,
                "rank": self.rank, "part": self.part, "gamma": self.gamma}


@dataclass
class LiftResult:
    """Symplectic m' with phi m phi^{-1} = m' through order N."""
    m_prime: CnStructure
    phi: PointedDiffeo
    truncation: int
    stages: List[StageRecord] = field(default_factory=list)
    residuals: Dict[str, str] = field(default_factory=dict)
    unital: bool = False

    @property
    def ok(self) -> bool:
        return all(v == "0" for v in self.residuals.values())

    def to_dict(self) -> dict:
        return {
            "truncation": self.truncation, "unital": self.unital,
            "m_prime": {str(i): p.format() for i, p in self.m_prime.parts.items() if not p.is_zero()},
            "phi": self.phi.format(), "residuals": dict(self.residuals),
            "stages": [s.to_dict() for s in self.stages],
        }


Unknowns = Tuple[str, list, Callable]


def _joint_solve(target, groups: List[Unknowns], rhs) -> Tuple[Optional[Dict[str, Vector]], SparseMatrix]:
    """
    Solve sum_g apply_g(x_g) = rhs, x_g ranging over the span of each group's basis.

    Coordinates are taken in the `target` block; the result maps each group
    name to its coefficients.
    """
    columns, owners = [], []
    for name, basis, apply in groups:
        for k, element in enumerate(basis):
            columns.append(target.coordinates(apply(element)))
            owners.append((name, k))
    matrix = SparseMatrix.from_columns(target.dim, columns)
    solution = matrix.solve(target.coordinates(rhs))
    if solution is None:
        return None, matrix
    split: Dict[str, Vector] = {name: {} for name, _, _ in groups}
    for col, value in solution.items():
        name, k = owners[col]
        split[name][k] = value
    return split, matrix


def _combine(basis: list, coefficients: Vector, zero):
    total = zero
    for k, c in sorted(coefficients.items()):
        total = total + basis[k].scaled(c)
    return total


def lift_to_symplectic(m: Derivation, algebra: Algebra, truncation: int, unital: bool = False,
                       two_step: bool = False) -> LiftResult:
    """
    Lift a C-infinity structure to a symplectic one, order by order.

    Args:
        m: Degree 1 vector field with 1/2 [m, m] = 0 in orders <= truncation + 1
        algebra: Frobenius algebra whose product is m_2
        truncation: N; the parts m'_3 .. m'_N are produced
        unital: Restrict every unknown to normalised cochains
        two_step: Extend symplectically first, then correct by a cyclic cocycle

    Returns:
        LiftResult whose residuals are all "0"
    """
    if truncation < 3:
        raise InputError(f"lift order must be at least 3, got {truncation}")
    require_frobenius(algebra)
    N = truncation
    alphabet = working_alphabet(algebra, N + 1)
    m = _rebase(m, alphabet).truncated(N)
    omega = symplectic_form(algebra, alphabet)
    m2 = product_derivation(algebra, alphabet)
    residual = check_cn(CnStructure(m, N + 1), algebra=algebra)
    if not residual.is_zero():
        raise PreconditionError(f"input is not a C_{N + 1}-structure; residual in orders {residual.orders()}",
                                witness=residual.format())
    if unital:
        _require_unital_lift(algebra, omega)
        shape = check_unital_shape(m, algebra)
        if shape:
            raise PreconditionError(shape[0], witness=shape)

    m_prime = m2
    phi_map = PointedDiffeo.identity(alphabet)
    stages = []
    for n in range(3, N + 1):
        current = conjugate(phi_map, m).order_part(n)
        target = make_space(algebra, alphabet, "harrison", n, 2)
        alphas = make_space(algebra, alphabet, "cyclic", n + 1, omega.degree, unital)
        gammas = make_space(algebra, alphabet, "harrison", n - 1, 1, unital)
        if unital:
            _guard_exceptional(alphas.bidegree)
        stage = _two_step_stage if two_step else _joint_stage
        part, gamma, record = stage(algebra, alphabet, omega, m2, m_prime, n, current, target, alphas, gammas)
        m_prime = m_prime + part
        if not gamma.is_zero():
            phi_map = compose(exp_vector_field(gamma), phi_map)
        stages.append(record)
        logger.info("lift stage %d: unknowns %s, rank %d", n, record.unknowns, record.rank)

    structure = CnStructure(m_prime, N + 1, unital=unital, symplectic_checked=True)
    result = LiftResult(structure, phi_map.truncated(N), N, stages, unital=unital)
    result.residuals = lift_residuals(result, m, algebra, omega)
    if not result.ok:
        raise InternalInvariantError("lift residuals are not zero", witness=result.residuals)
    return result


def _joint_stage(algebra, alphabet, omega, m2, m_prime, n, current, target, alphas, gammas):
    """One solve: Upsilon(alpha) + [m_2, gamma] = current."""
    groups = [("alpha", alphas.elements(), lambda a: upsilon(a, omega)),
              ("gamma", gammas.elements(), lambda g: derivation_bracket(m2, g))]
    split, matrix = _joint_solve(target, groups, current)
    if split is None:
        raise InternalInvariantError(f"lift stage {n} is infeasible",
                                     witness={"rows": matrix.nrows, "columns": matrix.ncols,
                                              "rank": matrix.rank(), "rhs": current.format()})
    part = upsilon(alphas.combine(split["alpha"]), omega)
    gamma = gammas.combine(split["gamma"])
    record = StageRecord(n, {"alpha": alphas.dim, "gamma": gammas.dim}, target.dim, matrix.rank(),
                         part.format(), gamma.format())
    return part, gamma, record


def _two_step_stage(algebra, alphabet, omega, m2, m_prime, n, current, target, alphas, gammas):
    """Extend m' symplectically, then absorb the remaining difference by a cyclic cocycle and gamma."""
    cyclic_obs = upsilon_inv(_obstruction_field(m_prime, n), omega)
    outgoing = make_space(algebra, alphabet, "cyclic", n + 2, omega.degree + 1, alphas.normalised)
    differential = matrix_between(alphas, outgoing, lambda a: lie_derivative(m2, a))
    beta = differential.solve(outgoing.coordinates(-cyclic_obs))
    if beta is None:
        raise InternalInvariantError(f"symplectic extension at stage {n} is infeasible",
                                     witness=cyclic_obs.format())
    first = upsilon(alphas.combine(beta), omega)
    cocycles = [alphas.combine(v) for v in differential.kernel()]
    groups = [("cocycle", cocycles, lambda a: upsilon(a, omega)),
              ("gamma", gammas.elements(), lambda g: derivation_bracket(m2, g))]
    split, matrix = _joint_solve(target, groups, current - first)
    if split is None:
        raise InternalInvariantError(f"cocycle correction at stage {n} is infeasible",
                                     witness={"rows": matrix.nrows, "columns": matrix.ncols})
    correction = _combine(cocycles, split["cocycle"], alphas.combine({}))
    part = first + upsilon(correction, omega)
    gamma = gammas.combine(split["gamma"])
    record = StageRecord(n, {"beta": alphas.dim, "cocycle": len(cocycles), "gamma": gammas.dim},
                         target.dim, matrix.rank(), part.format(), gamma.format())
    return part, gamma, record


def lift_residuals(result: LiftResult, m: Derivation, algebra: Algebra, omega: ConstantTwoForm) -> Dict[str, str]:
    """The postconditions of a lift, each "0" when it holds."""
    N = result.truncation
    alphabet = m.alphabet
    m_prime = _rebase(result.m_prime.m, alphabet)
    phi_map = _rebase_diffeo(result.phi, alphabet)
    pointed = all(phi_map.image(g).truncated(1) == TensorElement.generator(alphabet, g)
                  for g in range(alphabet.rank))
    residuals = {
        "structure": _residual_text(check_cn(CnStructure(m_prime, N + 1))),
        "symplectic": _residual_text(is_symplectic_field(m_prime, omega)),
        "conjugation": _residual_text((conjugate(phi_map, m) - m_prime).truncated(N)),
        "pointed": "0" if pointed else "not pointed",
    }
    if result.unital:
        shape = check_unital_shape(m_prime, algebra)
        residuals["normalised"] = "0" if not shape else "; ".join(shape)
    return residuals


@dataclass
class MorphismLiftResult:
    """Symplectic phi' and witnesses eta_k with phi = phi' o chi, chi built from exp([m, eta_k])."""
    phi_prime: PointedDiffeo
    homotopy: PointedDiffeo
    witnesses: List[Derivation]
    truncation: int
    residuals: Dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(v == "0" for v in self.residuals.values())

    def to_dict(self) -> dict:
        return {"truncation": self.truncation, "phi_prime": self.phi_prime.format(),
                "witnesses": [w.format() for w in self.witnesses], "residuals": dict(self.residuals)}


def lift_morphism_to_symplectic(phi_map: PointedDiffeo, m: Derivation, target: Derivation, algebra: Algebra,
                                truncation: int, unital: bool = False) -> MorphismLiftResult:
    """
    Replace a pointed C-infinity morphism between symplectic structures by a
    symplectic one, up to homotopy.

    With rho = psi^{-1} phi chi^{-1}, the order k part of rho is split as
    Upsilon(beta) + [m_2, eta]; psi absorbs exp(Upsilon(beta)) on the right
    and chi absorbs exp([m, eta]) on the left. Orders 2 .. N - 2 are settled.
    """
    require_frobenius(algebra)
    N = truncation
    if N < 4:
        raise InputError(f"morphism lifting needs truncation >= 4, got {N}")
    alphabet = working_alphabet(algebra, N)
    omega = symplectic_form(algebra, alphabet)
    phi_map = _rebase_diffeo(phi_map, alphabet)
    m, target = _rebase(m, alphabet), _rebase(target, alphabet)
    for name, structure in (("source", m), ("target", target)):
        bad = symplectic_violations(structure, omega)
        if bad:
            raise PreconditionError(f"{name} structure is not symplectic in order {bad[0]}", witness=bad)
    lower = _morphism_residual(phi_map, m, target).truncated(N - 1)
    if not lower.is_zero():
        raise PreconditionError(f"not a C-infinity morphism: residual in order {lower.lowest_order}",
                                witness=lower.format())
    if unital:
        _require_unital_lift(algebra, omega)
    m2 = product_derivation(algebra, alphabet)
    psi = PointedDiffeo.identity(alphabet)
    chi = PointedDiffeo.identity(alphabet)
    witnesses = []
    for k in range(2, N - 1):
        rho = compose(compose(invert_pointed(psi), phi_map), invert_pointed(chi))
        delta = Derivation(alphabet, 0, rho.order_part(k), check=False)
        space = make_space(algebra, alphabet, "harrison", k, 1)
        betas = make_space(algebra, alphabet, "cyclic", k + 1, omega.degree - 1, unital)
        etas = make_space(algebra, alphabet, "harrison", k - 1, 0, unital)
        if unital:
            _guard_exceptional(betas.bidegree)
        groups = [("beta", betas.elements(), lambda b: upsilon(b, omega)),
                  ("eta", etas.elements(), lambda e: derivation_bracket(m2, e))]
        split, matrix = _joint_solve(space, groups, delta)
        if split is None:
            raise InternalInvariantError(f"morphism lift stage {k} is infeasible",
                                         witness={"rows": matrix.nrows, "columns": matrix.ncols,
                                                  "rhs": delta.format()})
        symplectic_part = upsilon(betas.combine(split["beta"]), omega)
        eta = etas.combine(split["eta"])
        witnesses.append(eta)
        if not symplectic_part.is_zero():
            psi = compose(psi, exp_vector_field(symplectic_part))
        if not eta.is_zero():
            chi = compose(exp_vector_field(derivation_bracket(m, eta)), chi)
        logger.info("morphism lift stage %d: beta %d, eta %d", k, betas.dim, etas.dim)

    result = MorphismLiftResult(psi, chi, witnesses, N)
    product = compose(psi, chi)
    composition = Derivation(alphabet, 0, {g: (phi_map.image(g) - product.image(g)).truncated(N - 2)
                                           for g in range(alphabet.rank)}, check=False)
    result.residuals = {
        "symplectic": _residual_text(is_symplectomorphism(psi, omega)),
        "composition": _residual_text(composition),
        "morphism": _residual_text(_morphism_residual(psi, m, target).truncated(N - 1)),
    }
    if unital:
        unit = algebra.basis.unit_index
        clean = all(unit not in psi.higher_part(g).letters() for g in range(alphabet.rank))
        result.residuals["normalised"] = "0" if clean else "not normalised"
    if not result.ok:
        raise InternalInvariantError("morphism lift residuals are not zero", witness=result.residuals)
    return result


def synthetic_morphism(algebra: Algebra, truncation: int, rng: random.Random,
                       m: Optional[Derivation] = None,
                       unital: bool = False) -> Tuple[PointedDiffeo, Derivation, Derivation]:
    """
    A C-infinity morphism between two symplectic structures.

    m and m'' = exp(gamma) m exp(-gamma) are both lifted to symplectic
    structures s = phi_1 m phi_1^{-1} and s'' = phi_2 m'' phi_2^{-1}; the
    morphism phi_2 exp(gamma) phi_1^{-1} carries s to s''.

    Args:
        algebra: Frobenius algebra
        truncation: N of both lifts
        rng: Source of the random degree 0 field gamma
        m: C-infinity structure to start from (default: the product m_2)
        unital: Keep gamma and both lifts normalised

    Returns:
        (morphism, source, target)
    """
    N = truncation
    alphabet = working_alphabet(algebra, N + 1)
    m = product_derivation(algebra, alphabet) if m is None else _rebase(m, alphabet)
    letters = generators = None
    if unital:
        letters = generators = algebra.basis.non_unit_indices()
    gamma = random_derivation(alphabet, 0, (2, 3), rng, letters, generators)
    flow = exp_vector_field(gamma)
    source = lift_to_symplectic(m, algebra, N, unital=unital)
    target = lift_to_symplectic(conjugate(flow, m), algebra, N, unital=unital)
    morphism = compose(compose(target.phi, flow), invert_pointed(source.phi))
    return morphism.truncated(N), source.m_prime.m, target.m_prime.m
