#!/usr/bin/env python3
"""
cinf-lift - Graded Core

Graded bases, Koszul signs, exact scalars and Frobenius algebra data.

A graded basis x_0..x_{r-1} of V determines the generators g_i of the free
Lie algebra on the dual suspension, of degree 1 - |x_i|. When V has a unit,
its dual generator is written tau and the others t_i.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from errors import InputError, ValidationError
from exact_linalg import determinant

logger = logging.getLogger(__name__)

Scalar = Fraction
ScalarLike = Union[int, str, Fraction]


def to_scalar(value: ScalarLike) -> Scalar:
    """Parse an int, Fraction or "p/q" string into an exact rational."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InputError(f"not a rational number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise InputError(f"not a rational number: {value!r}")
    raise InputError(f"not a rational number: {value!r}")


def format_scalar(value: Scalar) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def sign(exponent: int) -> int:
    return -1 if exponent % 2 else 1


def koszul_sign(permutation: Sequence[int], degrees: Sequence[int]) -> int:
    """
    Koszul sign of reordering homogeneous symbols.

    Args:
        permutation: New order; position k receives the symbol at permutation[k]
        degrees: Degree of each symbol in its original position

    Returns:
        +1 or -1
    """
    k = len(permutation)
    if len(degrees) != k or sorted(permutation) != list(range(k)):
        raise InputError(f"not a permutation of 0..{k - 1}: {list(permutation)}")
    exponent = 0
    for a in range(k):
        for b in range(a + 1, k):
            # the symbols landing at a and b were exchanged
            if permutation[a] > permutation[b]:
                exponent += degrees[permutation[a]] * degrees[permutation[b]]
    return sign(exponent)


@dataclass(frozen=True)
class GradedBasis:
    """Homogeneous basis of V with an optional unit."""
    elements: Tuple[Tuple[str, int], ...]
    unit_index: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple((str(n), int(d)) for n, d in self.elements))
        if not self.elements:
            raise InputError("a graded basis needs at least one element")
        names = [n for n, _ in self.elements]
        if len(set(names)) != len(names):
            raise InputError(f"basis names must be unique: {names}")
        if self.unit_index is not None:
            if not 0 <= self.unit_index < len(self.elements):
                raise InputError(f"unit index {self.unit_index} out of range")
            if self.elements[self.unit_index][1] != 0:
                raise InputError("the unit must have degree 0")

    @property
    def rank(self) -> int:
        return len(self.elements)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(n for n, _ in self.elements)

    @property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(d for _, d in self.elements)

    @property
    def generator_degrees(self) -> Tuple[int, ...]:
        """Degrees of the dual suspended generators g_i."""
        return tuple(1 - d for _, d in self.elements)

    @property
    def is_unital(self) -> bool:
        return self.unit_index is not None

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InputError(f"unknown basis element {name!r}")

    def non_unit_indices(self) -> Tuple[int, ...]:
        return tuple(i for i in range(self.rank) if i != self.unit_index)

    def is_connected(self) -> bool:
        """Unit spans degree 0 and nothing lives in negative degrees."""
        if self.unit_index is None:
            return False
        return all(d > 0 for i, d in enumerate(self.degrees) if i != self.unit_index)

    def generator_names(self) -> Tuple[str, ...]:
        """Display names of the generators: tau for the unit's dual, t_<name> otherwise."""
        return tuple("tau" if i == self.unit_index else f"t_{n}" for i, n in enumerate(self.names))


@dataclass(frozen=True)
class StructureConstants:
    """Product x_i x_j = sum_k a^k_ij x_k; only nonzero entries are stored."""
    basis: GradedBasis
    table: Dict[Tuple[int, int], Dict[int, Scalar]] = field(default_factory=dict)

    def coefficient(self, i: int, j: int, k: int) -> Scalar:
        return self.table.get((i, j), {}).get(k, Fraction(0))

    def product(self, i: int, j: int) -> Dict[int, Scalar]:
        return dict(self.table.get((i, j), {}))

    def multiply(self, u: Dict[int, Scalar], v: Dict[int, Scalar]) -> Dict[int, Scalar]:
        result: Dict[int, Scalar] = {}
        for i, a in u.items():
            for j, b in v.items():
                for k, c in self.table.get((i, j), {}).items():
                    result[k] = result.get(k, 0) + a * b * c
        return {k: c for k, c in result.items() if c}


@dataclass(frozen=True)
class Pairing:
    """Bilinear form on V, zero unless the degrees add up to `degree`."""
    matrix: Tuple[Tuple[Scalar, ...], ...]
    degree: int

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(tuple(Fraction(v) for v in row) for row in self.matrix))

    def __call__(self, i: int, j: int) -> Scalar:
        return self.matrix[i][j]

    def evaluate(self, u: Dict[int, Scalar], v: Dict[int, Scalar]) -> Scalar:
        return sum((a * b * self.matrix[i][j] for i, a in u.items() for j, b in v.items()), Fraction(0))

    @property
    def symplectic_degree(self) -> int:
        """Internal degree of the associated constant symplectic form."""
        return 2 - self.degree


@dataclass(frozen=True)
class Algebra:
    """A graded commutative algebra, optionally with a Frobenius pairing."""
    basis: GradedBasis
    product: StructureConstants
    pairing: Optional[Pairing] = None
    name: str = "A"


@dataclass
class Violation:
    identity: str
    witness: Tuple[str, ...]
    detail: str = ""

    def __str__(self) -> str:
        where = ", ".join(self.witness)
        return f"{self.identity} fails at ({where}){': ' + self.detail if self.detail else ''}"


@dataclass
class FrobeniusReport:
    """Outcome of validate_frobenius."""
    violations: List[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    @property
    def first(self) -> Optional[Violation]:
        return self.violations[0] if self.violations else None

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "violations": [{"identity": v.identity, "witness": list(v.witness), "detail": v.detail}
                           for v in self.violations],
        }


def validate_frobenius(A: StructureConstants, P: Optional[Pairing] = None) -> FrobeniusReport:
    """
    Check the algebra axioms and, when a pairing is given, the Frobenius axioms.

    Args:
        A: Structure constants of the product
        P: Optional pairing on V

    Returns:
        FrobeniusReport listing every violated identity with witness names
    """
    basis = A.basis
    names = basis.names
    deg = basis.degrees
    r = basis.rank
    report = FrobeniusReport()

    def violate(identity, idx, detail=""):
        report.violations.append(Violation(identity, tuple(names[i] for i in idx), detail))

    for (i, j), row in sorted(A.table.items()):
        for k, c in sorted(row.items()):
            if c and deg[k] != deg[i] + deg[j]:
                violate("degree additivity", (i, j, k), f"coefficient {format_scalar(c)}")

    for i in range(r):
        for j in range(i, r):
            for k in range(r):
                lhs = A.coefficient(i, j, k)
                rhs = sign(deg[i] * deg[j]) * A.coefficient(j, i, k)
                if lhs != rhs:
                    violate("graded commutativity", (i, j))
                    break

    for i in range(r):
        for j in range(r):
            for l in range(r):
                left = A.multiply(A.product(i, j), {l: Fraction(1)})
                right = A.multiply({i: Fraction(1)}, A.product(j, l))
                if left != right:
                    violate("associativity", (i, j, l))

    if basis.unit_index is not None:
        u = basis.unit_index
        for i in range(r):
            if A.product(u, i) != {i: Fraction(1)} or A.product(i, u) != {i: Fraction(1)}:
                violate("unit", (i,))

    if P is not None:
        if len(P.matrix) != r or any(len(row) != r for row in P.matrix):
            violate("pairing shape", (), f"expected {r}x{r}")
            return report
        for i in range(r):
            for j in range(r):
                if P(i, j) and deg[i] + deg[j] != P.degree:
                    violate("pairing degree", (i, j), f"|{names[i]}|+|{names[j]}| != {P.degree}")
        for i in range(r):
            for j in range(i, r):
                if P(i, j) != sign(deg[i] * deg[j]) * P(j, i):
                    violate("pairing graded symmetry", (i, j))
        if determinant(P.matrix) == 0:
            violate("pairing nondegeneracy", ())
        for i in range(r):
            for j in range(r):
                for l in range(r):
                    left = P.evaluate(A.product(i, j), {l: Fraction(1)})
                    right = P.evaluate({i: Fraction(1)}, A.product(j, l))
                    if left != right:
                        violate("invariance", (i, j, l),
                                f"{format_scalar(left)} != {format_scalar(right)}")
    if report.violations:
        logger.debug("frobenius validation: %d violation(s), first %s",
                     len(report.violations), report.first)
    return report


def require_frobenius(algebra: Algebra) -> None:
    """Raise ValidationError unless the algebra (and its pairing) is valid."""
    report = validate_frobenius(algebra.product, algebra.pairing)
    if not report.valid:
        raise ValidationError(str(report.first), witness=report.first)


def truncated_polynomial_algebra(x_degree: int, top_power: int, with_pairing: bool = True) -> Algebra:
    """
    Q[x]/x^(top_power+1) with its Poincare duality pairing.

    Args:
        x_degree: Degree of x (even, so the algebra is strictly commutative)
        top_power: Highest nonzero power of x
        with_pairing: Attach the pairing <x^i, x^j> = [i + j == top_power]

    Returns:
        Unital Algebra with basis 1, x, x^2, ...
    """
    if top_power < 1:
        raise InputError("top_power must be at least 1")
    names = ["1", "x"] + [f"x^{p}" for p in range(2, top_power + 1)]
    basis = GradedBasis(tuple((names[p], p * x_degree) for p in range(top_power + 1)), unit_index=0)
    table = {}
    for i in range(top_power + 1):
        for j in range(top_power + 1):
            if i + j <= top_power:
                table[(i, j)] = {i + j: Fraction(1)}
    product = StructureConstants(basis, table)
    pairing = None
    if with_pairing:
        matrix = tuple(tuple(Fraction(1 if i + j == top_power else 0) for j in range(top_power + 1))
                       for i in range(top_power + 1))
        pairing = Pairing(matrix, top_power * x_degree)
    return Algebra(basis, product, pairing, name=f"Q[x]/x^{top_power + 1}")
