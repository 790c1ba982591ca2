#!/usr/bin/env python3
"""
cinf-lift - Harrison Complexes

Bidegree blocks of the Harrison complexes of a strictly graded commutative
algebra: vector fields C(A,A), 1-forms C(A,A*) and cyclic 0-forms CC(A),
with their normalised subcomplexes when A is unital. Every differential is
[m_2, -] or L_{m_2} and has bidegree (1, 1).

Bidegree (i, j): i is the order (coefficient word length for vector fields
and 1-forms, word length for 0-forms); j is the internal degree e shifted to
e + 1 for vector fields and e - 1 for forms.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from errors import InputError, InternalInvariantError, PreconditionError
from exact_linalg import SparseMatrix, Vector, dense_rank, echelon, span_rank
from forms_geometry import (ConstantTwoForm, Form, OneForm, d_form, lie_derivative, lie_zero_forms,
                            make_form, phi, phi_inv, symplectic_form, upsilon)
from graded_core import Algebra
from lie_calculus import (Alphabet, Derivation, TensorElement, derivation_bracket, lie_basis,
                          product_derivation)

logger = logging.getLogger(__name__)

FLAVORS = ("harrison", "dual", "cyclic")
MIN_ORDER = {"harrison": 0, "dual": 0, "cyclic": 2}
DEGREE_SHIFT = {"harrison": 1, "dual": -1, "cyclic": -1}


def internal_degree(flavor: str, j: int) -> int:
    return j - DEGREE_SHIFT[flavor]


def _letters(algebra: Algebra, normalised: bool) -> Optional[Tuple[int, ...]]:
    if not normalised:
        return None
    if algebra.basis.unit_index is None:
        raise PreconditionError(f"normalised cochains need a unital algebra; {algebra.name} has no unit")
    return algebra.basis.non_unit_indices()


class CochainSpace:
    """Basis and coordinates of one bidegree block."""

    flavor = ""

    def __init__(self, alphabet: Alphabet, order: int, j: int, letters: Optional[Tuple[int, ...]]):
        self.alphabet = alphabet
        self.order = order
        self.j = j
        self.letters = letters
        self.degree = internal_degree(self.flavor, j)

    @property
    def normalised(self) -> bool:
        return self.letters is not None

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def element(self, k: int):
        return self.combine({k: Fraction(1)})

    def elements(self) -> list:
        return [self.element(k) for k in range(self.dim)]

    def combine(self, vector: Vector):
        raise NotImplementedError

    def _coordinates(self, x) -> Vector:
        raise NotImplementedError

    def coordinates(self, x, check: bool = True) -> Vector:
        """Coordinates of x; with `check`, raise if x is not in the block."""
        vector = self._coordinates(x)
        if check and self.combine(vector) != x:
            raise InternalInvariantError(
                f"{self.flavor} cochain does not lie in block {self.bidegree}", witness=x)
        return vector

    @property
    def bidegree(self) -> Tuple[int, int]:
        return self.order, self.j


class _LieCoefficientSpace(CochainSpace):
    """Shared layout of vector fields and 1-forms: one Lie basis per generator slot."""

    def __init__(self, alphabet, order, j, letters):
        super().__init__(alphabet, order, j, letters)
        self.slots = []
        offset = 0
        if order >= 0:
            for g in range(alphabet.rank):
                basis = lie_basis(alphabet, order, self._coefficient_degree(g), letters)
                if len(basis):
                    self.slots.append((g, basis, offset))
                    offset += len(basis)
        self._dim = offset

    @property
    def dim(self) -> int:
        return self._dim

    def _coefficient_degree(self, g: int) -> int:
        raise NotImplementedError

    def _split(self, vector: Vector) -> Dict[int, TensorElement]:
        parts = {}
        for g, basis, offset in self.slots:
            coords = [vector.get(offset + k, 0) for k in range(len(basis))]
            if any(coords):
                parts[g] = basis.combine(coords)
        return parts

    def _join(self, parts: Dict[int, TensorElement]) -> Vector:
        vector: Vector = {}
        for g, basis, offset in self.slots:
            if g in parts:
                for k, c in enumerate(basis.coordinates(parts[g].order_part(self.order))):
                    if c:
                        vector[offset + k] = c
        return vector


class DerivationSpace(_LieCoefficientSpace):
    flavor = "harrison"

    def _coefficient_degree(self, g):
        return self.alphabet.degrees[g] + self.degree

    def combine(self, vector: Vector) -> Derivation:
        return Derivation(self.alphabet, self.degree, self._split(vector), check=False)

    def _coordinates(self, xi: Derivation) -> Vector:
        return self._join(xi.images)


class OneFormSpace(_LieCoefficientSpace):
    flavor = "dual"

    def _coefficient_degree(self, b):
        return self.degree - self.alphabet.degrees[b]

    def combine(self, vector: Vector) -> OneForm:
        return OneForm.from_coefficients(self.alphabet, self._split(vector))

    def _coordinates(self, alpha: Form) -> Vector:
        return self._join(alpha.coefficients())


class CyclicSpace(CochainSpace):
    """Lie 0-forms [b g], reduced to an echelon basis over canonical cyclic words."""

    flavor = "cyclic"

    def __init__(self, alphabet, order, j, letters):
        super().__init__(alphabet, order, j, letters)
        self.basis: List[Form] = []
        self.pivots = []
        if order < MIN_ORDER["cyclic"]:
            return
        spanning = lie_zero_forms(alphabet, order, self.degree, letters)
        words = sorted({w for f in spanning for w in f.terms})
        column = {w: k for k, w in enumerate(words)}
        form = echelon([{column[w]: c for w, c in f.terms.items()} for f in spanning], len(words), "first")
        for p in form.pivots:
            self.basis.append(make_form(alphabet, 0, {words[k]: c for k, c in form.pivot_rows[p].items()},
                                        canonical=True))
            self.pivots.append(words[p])

    @property
    def dim(self) -> int:
        return len(self.basis)

    def combine(self, vector: Vector) -> Form:
        total = Form.zero(self.alphabet, 0)
        for k, c in sorted(vector.items()):
            if c:
                total = total + self.basis[k].scaled(c)
        return total

    def _coordinates(self, alpha: Form) -> Vector:
        vector = {}
        for k, word in enumerate(self.pivots):
            c = alpha.terms.get(word)
            if c:
                vector[k] = c
        return vector


_SPACES = {"harrison": DerivationSpace, "dual": OneFormSpace, "cyclic": CyclicSpace}


def make_space(algebra: Algebra, alphabet: Alphabet, flavor: str, order: int, j: int,
               normalised: bool = False) -> CochainSpace:
    if flavor not in _SPACES:
        raise InputError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")
    letters = _letters(algebra, normalised)
    return _SPACES[flavor](alphabet, order, j, letters)


def _differential_map(flavor: str, m2: Derivation) -> Callable:
    if flavor == "harrison":
        return lambda xi: derivation_bracket(m2, xi)
    return lambda alpha: lie_derivative(m2, alpha)


def matrix_between(source: CochainSpace, target: CochainSpace, apply: Callable) -> SparseMatrix:
    """Matrix of `apply` from one block to another, checking every image lies in the target."""
    columns = []
    for k in range(source.dim):
        columns.append(target.coordinates(apply(source.element(k))))
    return SparseMatrix.from_columns(target.dim, columns)


@dataclass
class CochainBlock:
    """One bidegree block together with its outgoing differential."""
    space: CochainSpace
    target: CochainSpace
    differential: SparseMatrix

    @property
    def flavor(self) -> str:
        return self.space.flavor

    @property
    def bidegree(self) -> Tuple[int, int]:
        return self.space.bidegree

    @property
    def normalised(self) -> bool:
        return self.space.normalised

    @property
    def size(self) -> int:
        return self.space.dim


def window_alphabet(algebra: Algebra, max_order: int) -> Alphabet:
    """An alphabet deep enough for blocks of order <= max_order and their differentials."""
    return Alphabet.from_basis(algebra.basis, max(max_order + 1, 2))


def build_block(algebra: Algebra, flavor: str, bidegree: Tuple[int, int], truncation: Optional[int] = None,
                normalised: bool = False, m2: Optional[Derivation] = None,
                alphabet: Optional[Alphabet] = None) -> CochainBlock:
    """
    Assemble the (i, j) block of a complex and its differential into (i + 1, j + 1).

    Args:
        algebra: Strictly graded commutative algebra
        flavor: "harrison", "dual" or "cyclic"
        bidegree: (order, degree)
        truncation: Truncation order for the alphabet; defaults to order + 1
        normalised: Restrict to the normalised subcomplex (unital algebras only)
        m2: Product vector field; derived from the algebra when omitted

    Returns:
        CochainBlock with exact differential matrix
    """
    order, j = bidegree
    if alphabet is None:
        alphabet = window_alphabet(algebra, max(order, truncation or 0))
    if alphabet.truncation < order + 1:
        raise InputError(f"truncation {alphabet.truncation} is too small for order {order}")
    if m2 is None:
        m2 = product_derivation(algebra, alphabet)
    space = make_space(algebra, alphabet, flavor, order, j, normalised)
    target = make_space(algebra, alphabet, flavor, order + 1, j + 1, normalised)
    matrix = matrix_between(space, target, _differential_map(flavor, m2))
    logger.debug("block %s%s %s: %d -> %d, rank %d", flavor, " normalised" if normalised else "",
                 bidegree, space.dim, target.dim, matrix.rank())
    return CochainBlock(space, target, matrix)


def degree_window(alphabet: Alphabet, flavor: str, order: int) -> range:
    """The degrees j in which a block of this order can be nonzero."""
    lo, hi = min(alphabet.degrees), max(alphabet.degrees)
    if flavor == "harrison":
        emin, emax = order * lo - hi, order * hi - lo
    elif flavor == "dual":
        emin, emax = (order + 1) * lo, (order + 1) * hi
    else:
        emin, emax = order * lo, order * hi
    shift = DEGREE_SHIFT[flavor]
    return range(emin + shift, emax + shift + 1)


@dataclass
class CohomologyReport:
    """Exact cohomology of one block."""
    flavor: str
    normalised: bool
    bidegree: Tuple[int, int]
    block_size: int
    cocycle_dimension: int
    coboundary_dimension: int
    representatives: List[Vector] = field(default_factory=list)
    dense_dimension: Optional[int] = None
    incoming: Optional[CochainBlock] = None
    block: Optional[CochainBlock] = None

    @property
    def dimension(self) -> int:
        return self.cocycle_dimension - self.coboundary_dimension

    def representative_cochains(self) -> list:
        return [self.block.space.combine(v) for v in self.representatives]

    def preimage(self, cochain) -> Optional[object]:
        """A cochain b with d(b) = cochain, or None when cochain is not a coboundary."""
        vector = self.block.space.coordinates(cochain)
        solution = self.incoming.differential.solve(vector)
        if solution is None:
            return None
        return self.incoming.space.combine(solution)

    def is_coboundary(self, cochain) -> bool:
        return self.preimage(cochain) is not None

    def to_dict(self) -> dict:
        data = {
            "flavor": self.flavor,
            "normalised": self.normalised,
            "bidegree": list(self.bidegree),
            "block_size": self.block_size,
            "cocycles": self.cocycle_dimension,
            "coboundaries": self.coboundary_dimension,
            "dimension": self.dimension,
            "representatives": [_format_cochain(c) for c in self.representative_cochains()],
        }
        if self.dense_dimension is not None:
            data["dense_dimension"] = self.dense_dimension
        return data


def _format_cochain(x) -> str:
    return x.format()


def cohomology(incoming: CochainBlock, block: CochainBlock, oracle: bool = False) -> CohomologyReport:
    """
    Cohomology at `block`, given the block whose differential lands in it.

    With `oracle`, the dimension is recomputed from dense ranks by sympy.
    """
    if incoming.target.bidegree != block.bidegree or incoming.target.dim != block.size:
        raise InputError(f"blocks {incoming.bidegree} and {block.bidegree} are not consecutive")
    kernel = block.differential.kernel()
    images = [c for c in incoming.differential.columns() if c]
    reduced = echelon(images, block.size)
    boundary_rank = reduced.rank
    representatives = []
    for vector in kernel:
        if reduced.insert(vector):
            representatives.append(vector)
    if len(representatives) != len(kernel) - boundary_rank:
        raise InternalInvariantError(
            f"coboundaries are not cocycles in {block.flavor} block {block.bidegree}")
    report = CohomologyReport(block.flavor, block.normalised, block.bidegree, block.size,
                              len(kernel), boundary_rank, representatives,
                              incoming=incoming, block=block)
    if oracle:
        report.dense_dimension = (block.size - dense_rank(block.differential)) - dense_rank(incoming.differential)
    return report


def cohomology_at(algebra: Algebra, flavor: str, bidegree: Tuple[int, int], normalised: bool = False,
                  oracle: bool = False, alphabet: Optional[Alphabet] = None) -> CohomologyReport:
    order, j = bidegree
    if alphabet is None:
        alphabet = window_alphabet(algebra, order)
    m2 = product_derivation(algebra, alphabet)
    incoming = build_block(algebra, flavor, (order - 1, j - 1), normalised=normalised, m2=m2, alphabet=alphabet)
    block = build_block(algebra, flavor, bidegree, normalised=normalised, m2=m2, alphabet=alphabet)
    return cohomology(incoming, block, oracle)


def cohomology_table(algebra: Algebra, flavor: str, orders: Sequence[int], normalised: bool = False,
                     oracle: bool = True) -> List[CohomologyReport]:
    """Cohomology of every nonempty block with order in `orders`."""
    alphabet = window_alphabet(algebra, max(orders))
    m2 = product_derivation(algebra, alphabet)
    blocks: Dict[Tuple[int, int], CochainBlock] = {}

    def block_at(bidegree):
        if bidegree not in blocks:
            blocks[bidegree] = build_block(algebra, flavor, bidegree, normalised=normalised,
                                           m2=m2, alphabet=alphabet)
        return blocks[bidegree]

    reports = []
    for order in orders:
        for j in degree_window(alphabet, flavor, order):
            block = block_at((order, j))
            if not block.size:
                continue
            reports.append(cohomology(block_at((order - 1, j - 1)), block, oracle))
    return reports


def d_squared(algebra: Algebra, flavor: str, bidegree: Tuple[int, int], normalised: bool = False,
              alphabet: Optional[Alphabet] = None) -> SparseMatrix:
    """Product of two consecutive differential matrices starting at `bidegree`."""
    order, j = bidegree
    if alphabet is None:
        alphabet = window_alphabet(algebra, order + 1)
    m2 = product_derivation(algebra, alphabet)
    first = build_block(algebra, flavor, bidegree, normalised=normalised, m2=m2, alphabet=alphabet)
    second = build_block(algebra, flavor, (order + 1, j + 1), normalised=normalised, m2=m2, alphabet=alphabet)
    return second.differential @ first.differential


def _induced_rank(source: CohomologyReport, target: CohomologyReport, matrix: SparseMatrix) -> int:
    """Rank of the map on cohomology induced by a chain map `matrix`."""
    boundaries = [c for c in target.incoming.differential.columns() if c]
    images = [matrix.apply(v) for v in source.representatives]
    return span_rank(boundaries + images, target.block_size) - span_rank(boundaries, target.block_size)


@dataclass
class IMapReport:
    """The map I: HC^{i+1,j} -> H^{i,j}(A,A*) on one bidegree."""
    order: int
    j: int
    cyclic_dimension: int
    dual_dimension: int
    induced_rank: int
    commutes: bool

    @property
    def injective(self) -> bool:
        return self.induced_rank == self.cyclic_dimension

    @property
    def surjective(self) -> bool:
        return self.induced_rank == self.dual_dimension

    @property
    def expected(self) -> str:
        if self.order == 1:
            return "injective"
        if self.order == 2:
            return "surjective"
        return "bijective"

    @property
    def holds(self) -> bool:
        if self.order == 1:
            return self.injective
        if self.order == 2:
            return self.surjective
        return self.injective and self.surjective

    def to_dict(self) -> dict:
        return {
            "order": self.order, "j": self.j,
            "cyclic_dimension": self.cyclic_dimension, "dual_dimension": self.dual_dimension,
            "induced_rank": self.induced_rank, "injective": self.injective,
            "surjective": self.surjective, "expected": self.expected, "holds": self.holds,
            "commutes": self.commutes,
        }


def map_I_matrix(source: CochainSpace, target: CochainSpace) -> SparseMatrix:
    """Chain level I = d from a cyclic block to the 1-form block of the same degree."""
    return matrix_between(source, target, d_form)


def map_I(algebra: Algebra, order: int, j: int, normalised: bool = False, check: bool = True,
          alphabet: Optional[Alphabet] = None) -> IMapReport:
    """
    The map I from HC^{order+1, j} to H^{order, j}(A, A*).

    With `check`, a failure of injectivity (order 1), surjectivity (order 2)
    or bijectivity (order >= 3) raises InternalInvariantError.
    """
    if algebra.basis.unit_index is None:
        raise PreconditionError(f"map I needs a unital algebra; {algebra.name} has no unit")
    if order < 1:
        raise InputError(f"map I is considered for order >= 1, got {order}")
    if alphabet is None:
        alphabet = window_alphabet(algebra, order + 2)
    m2 = product_derivation(algebra, alphabet)

    def chain(flavor, i):
        incoming = build_block(algebra, flavor, (i - 1, j - 1), normalised=normalised, m2=m2, alphabet=alphabet)
        block = build_block(algebra, flavor, (i, j), normalised=normalised, m2=m2, alphabet=alphabet)
        return incoming, block

    cyc_in, cyc = chain("cyclic", order + 1)
    dual_in, dual = chain("dual", order)
    hc = cohomology(cyc_in, cyc)
    h = cohomology(dual_in, dual)
    matrix = map_I_matrix(cyc.space, dual.space)
    outgoing = map_I_matrix(cyc.target, dual.target)
    commutes = (outgoing @ cyc.differential).to_dense() == (dual.differential @ matrix).to_dense()
    report = IMapReport(order, j, hc.dimension, h.dimension, _induced_rank(hc, h, matrix), commutes)
    logger.debug("map I at (%d, %d): HC %d, H %d, induced rank %d",
                 order, j, report.cyclic_dimension, report.dual_dimension, report.induced_rank)
    if check and not (report.commutes and report.holds):
        raise InternalInvariantError(f"map I fails to be {report.expected} at ({order}, {j})",
                                     witness=report.to_dict())
    return report


def phi_matrix(algebra: Algebra, order: int, j: int, omega: Optional[ConstantTwoForm] = None,
               alphabet: Optional[Alphabet] = None) -> SparseMatrix:
    """Phi from the vector field block (order, j) to the 1-form block (order, j + |omega| - 2)."""
    if alphabet is None:
        alphabet = window_alphabet(algebra, order + 1)
    omega = omega or symplectic_form(algebra, alphabet)
    source = make_space(algebra, alphabet, "harrison", order, j)
    target = make_space(algebra, alphabet, "dual", order, j + omega.degree - 2)
    return matrix_between(source, target, lambda xi: phi(xi, omega))


def psi_matrix(algebra: Algebra, order: int, j: int, normalised: bool = False,
               alphabet: Optional[Alphabet] = None) -> SparseMatrix:
    """
    Psi = Phi^{-1} o I from the cyclic block (order + 1, j + |omega| - 2)
    to the vector field block (order, j), as a product of block matrices.
    """
    if alphabet is None:
        alphabet = window_alphabet(algebra, order + 1)
    omega = symplectic_form(algebra, alphabet)
    shift = omega.degree - 2
    cyclic = make_space(algebra, alphabet, "cyclic", order + 1, j + shift, normalised)
    dual = make_space(algebra, alphabet, "dual", order, j + shift, normalised)
    fields = make_space(algebra, alphabet, "harrison", order, j, normalised)
    i_matrix = map_I_matrix(cyclic, dual)
    phi_inverse = matrix_between(dual, fields, lambda alpha: phi_inv(alpha, omega))
    return phi_inverse @ i_matrix


def upsilon_matrix(algebra: Algebra, order: int, j: int, normalised: bool = False,
                   alphabet: Optional[Alphabet] = None) -> SparseMatrix:
    """Upsilon on the same blocks as psi_matrix, evaluated cochain by cochain."""
    if alphabet is None:
        alphabet = window_alphabet(algebra, order + 1)
    omega = symplectic_form(algebra, alphabet)
    shift = omega.degree - 2
    cyclic = make_space(algebra, alphabet, "cyclic", order + 1, j + shift, normalised)
    fields = make_space(algebra, alphabet, "harrison", order, j, normalised)
    return matrix_between(cyclic, fields, lambda alpha: upsilon(alpha, omega))


def psi(alpha: Form, omega: ConstantTwoForm) -> Derivation:
    """Psi on a cyclic cochain: Phi^{-1}(I(alpha))."""
    if alpha.is_zero():
        return Derivation.zero(alpha.alphabet, 1 - omega.degree)
    return phi_inv(d_form(alpha), omega)


@dataclass
class InclusionReport:
    bidegree: Tuple[int, int]
    normalised_dimension: int
    full_dimension: int
    induced_rank: int

    @property
    def is_iso(self) -> bool:
        return self.induced_rank == self.normalised_dimension == self.full_dimension

    @property
    def exceptional(self) -> bool:
        return self.bidegree == (3, 2)

    def to_dict(self) -> dict:
        return {"bidegree": list(self.bidegree), "normalised_dimension": self.normalised_dimension,
                "full_dimension": self.full_dimension, "induced_rank": self.induced_rank,
                "iso": self.is_iso, "exceptional": self.exceptional}


def normalised_inclusion_rank(algebra: Algebra, bidegree: Tuple[int, int], check: bool = True,
                              alphabet: Optional[Alphabet] = None) -> InclusionReport:
    """
    The map on cyclic cohomology induced by the inclusion of normalised 0-forms.

    With `check`, a non-isomorphism in order >= 3 outside bidegree (3, 2)
    raises InternalInvariantError; lower orders are reported only.
    """
    order, j = bidegree
    if alphabet is None:
        alphabet = window_alphabet(algebra, order)
    bar = cohomology_at(algebra, "cyclic", bidegree, normalised=True, alphabet=alphabet)
    full = cohomology_at(algebra, "cyclic", bidegree, normalised=False, alphabet=alphabet)
    inclusion = matrix_between(bar.block.space, full.block.space, lambda alpha: alpha)
    report = InclusionReport(bidegree, bar.dimension, full.dimension, _induced_rank(bar, full, inclusion))
    if check and order >= 3 and not report.exceptional and not report.is_iso:
        raise InternalInvariantError(f"normalised inclusion is not an isomorphism at {bidegree}",
                                     witness=report.to_dict())
    return report
