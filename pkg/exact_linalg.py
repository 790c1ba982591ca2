#!/usr/bin/env python3
"""
cinf-lift - Exact Sparse Linear Algebra

Sparse rows are dicts column -> Fraction with no stored zeros.

Kernels, solutions and inverses come from Gauss-Jordan elimination to the
reduced row echelon form. That form is unique, so results do not depend on
the pivot strategy; the strategy only changes the order in which rows are
fed to the eliminator. Ranks come from fraction-free elimination on
primitive integer rows, choosing the sparsest row with the smallest leading
entry as pivot.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence

import sympy

from errors import InputError

logger = logging.getLogger(__name__)

Vector = Dict[int, Fraction]


def add_scaled(target: Vector, source: Vector, factor: Fraction) -> None:
    """target += factor * source, in place, dropping zeros."""
    if factor == 0:
        return
    for col, value in source.items():
        updated = target.get(col, 0) + factor * value
        if updated:
            target[col] = updated
        else:
            target.pop(col, None)


def scale(vector: Vector, factor: Fraction) -> Vector:
    if factor == 0:
        return {}
    return {col: factor * value for col, value in vector.items()}


@dataclass
class EchelonForm:
    """Reduced row echelon form of a set of rows."""
    ncols: int
    pivot_rows: Dict[int, Vector] = field(default_factory=dict)

    @property
    def rank(self) -> int:
        return len(self.pivot_rows)

    @property
    def pivots(self) -> List[int]:
        return sorted(self.pivot_rows)

    def reduce(self, vector: Vector) -> Vector:
        """Return the residual of `vector` modulo the row space."""
        residual = dict(vector)
        for col in [c for c in residual if c in self.pivot_rows]:
            coeff = residual.get(col, 0)
            if coeff:
                add_scaled(residual, self.pivot_rows[col], -coeff)
        return residual

    def contains(self, vector: Vector) -> bool:
        return not self.reduce(vector)

    def insert(self, vector: Vector) -> bool:
        """Add a row; returns False if it was already in the row space."""
        row = self.reduce(vector)
        if not row:
            return False
        lead = min(row)
        row = scale(row, 1 / Fraction(row[lead]))
        for other in self.pivot_rows.values():
            coeff = other.get(lead)
            if coeff:
                add_scaled(other, row, -coeff)
        self.pivot_rows[lead] = row
        return True

    def rows(self) -> List[Vector]:
        return [self.pivot_rows[c] for c in self.pivots]

    def coordinates(self, vector: Vector) -> Optional[Vector]:
        """
        Coefficients of `vector` on the echelon rows, keyed by pivot column.

        Returns None when the vector is not in the row space.
        """
        if not self.contains(vector):
            return None
        return {c: vector[c] for c in self.pivots if vector.get(c)}


def _ordered(rows: Sequence[Vector], pivot: str) -> List[Vector]:
    if pivot == "first":
        return list(rows)
    if pivot == "sparse":
        return sorted(rows, key=lambda r: (len(r), min(r) if r else 0))
    raise InputError(f"unknown pivot strategy {pivot!r}")


def echelon(rows: Iterable[Vector], ncols: int, pivot: Optional[str] = None) -> EchelonForm:
    """
    Reduce rows to reduced row echelon form.

    Args:
        rows: Sparse rows over columns 0..ncols-1
        ncols: Number of columns
        pivot: "sparse" (shortest rows first) or "first" (input order)

    Returns:
        EchelonForm with unit pivots
    """
    if pivot is None:
        from config import active_settings
        pivot = active_settings().pivot
    form = EchelonForm(ncols)
    for row in _ordered([r for r in rows if r], pivot):
        form.insert(row)
    return form


def _primitive(row: Vector) -> Dict[int, int]:
    """Scale a nonzero rational row to coprime integers with a positive lead."""
    denominator = reduce(lambda a, b: a * b // gcd(a, b), (Fraction(v).denominator for v in row.values()), 1)
    ints = {c: int(Fraction(v) * denominator) for c, v in row.items()}
    content = reduce(gcd, ints.values(), 0)
    if ints[min(ints)] < 0:
        content = -content
    return {c: v // content for c, v in ints.items()}


def fraction_free_rank(rows: Iterable[Vector]) -> int:
    """
    Rank by elimination on integer rows, without division.

    Each step takes the smallest leading column, picks the sparsest row with
    the smallest leading entry there, and clears that column from the other
    rows by cross multiplication. Rows are kept primitive so entries stay
    small.
    """
    pending = [_primitive(r) for r in rows if r]
    rank = 0
    while pending:
        col = min(min(r) for r in pending)
        pivot = min((r for r in pending if min(r) == col), key=lambda r: (len(r), abs(r[col])))
        rest = []
        for row in pending:
            if row is pivot:
                continue
            q = row.get(col)
            if q:
                p = pivot[col]
                combined = {c: p * row.get(c, 0) - q * pivot.get(c, 0) for c in set(row) | set(pivot)}
                combined = {c: v for c, v in combined.items() if v}
                if combined:
                    rest.append(_primitive(combined))
            else:
                rest.append(row)
        pending = rest
        rank += 1
    return rank


class SparseMatrix:
    """An exact rational matrix stored as sparse rows."""

    def __init__(self, nrows: int, ncols: int, rows: Optional[List[Vector]] = None):
        self.nrows = nrows
        self.ncols = ncols
        self.rows: List[Vector] = rows if rows is not None else [dict() for _ in range(nrows)]
        if len(self.rows) != nrows:
            raise InputError(f"expected {nrows} rows, got {len(self.rows)}")

    @classmethod
    def from_columns(cls, nrows: int, columns: Sequence[Vector]) -> "SparseMatrix":
        matrix = cls(nrows, len(columns))
        for j, column in enumerate(columns):
            for i, value in column.items():
                if value:
                    matrix.rows[i][j] = Fraction(value)
        return matrix

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence]) -> "SparseMatrix":
        nrows = len(dense)
        ncols = len(dense[0]) if nrows else 0
        rows = [{j: Fraction(v) for j, v in enumerate(r) if v} for r in dense]
        return cls(nrows, ncols, rows)

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(n, n, [{i: Fraction(1)} for i in range(n)])

    def column(self, j: int) -> Vector:
        return {i: row[j] for i, row in enumerate(self.rows) if j in row}

    def columns(self) -> List[Vector]:
        cols: List[Vector] = [dict() for _ in range(self.ncols)]
        for i, row in enumerate(self.rows):
            for j, value in row.items():
                cols[j][i] = value
        return cols

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.ncols, self.nrows, self.columns())

    def apply(self, vector: Vector) -> Vector:
        result: Vector = {}
        for i, row in enumerate(self.rows):
            total = sum((value * vector[j] for j, value in row.items() if j in vector), Fraction(0))
            if total:
                result[i] = total
        return result

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise InputError(f"shape mismatch {self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}")
        rows: List[Vector] = []
        for row in self.rows:
            out: Vector = {}
            for k, value in row.items():
                add_scaled(out, other.rows[k], value)
            rows.append(out)
        return SparseMatrix(self.nrows, other.ncols, rows)

    def is_zero(self) -> bool:
        return not any(self.rows)

    def to_dense(self) -> List[List[Fraction]]:
        return [[row.get(j, Fraction(0)) for j in range(self.ncols)] for row in self.rows]

    def row_echelon(self, pivot: Optional[str] = None) -> EchelonForm:
        return echelon(self.rows, self.ncols, pivot)

    def rank(self) -> int:
        return fraction_free_rank(self.rows)

    def kernel(self, pivot: Optional[str] = None) -> List[Vector]:
        """Basis of the null space, one vector per free column, in column order."""
        form = self.row_echelon(pivot)
        basis = []
        for free in range(self.ncols):
            if free in form.pivot_rows:
                continue
            vector: Vector = {free: Fraction(1)}
            for p, row in form.pivot_rows.items():
                coeff = row.get(free)
                if coeff:
                    vector[p] = -coeff
            basis.append(vector)
        return basis

    def solve(self, rhs: Vector, pivot: Optional[str] = None) -> Optional[Vector]:
        """
        Particular solution of self @ x = rhs with every free variable zero.

        Returns None when the system is inconsistent.
        """
        augmented = [dict(row) for row in self.rows]
        for i, value in rhs.items():
            if value:
                augmented[i][self.ncols] = Fraction(value)
        form = echelon(augmented, self.ncols + 1, pivot)
        if self.ncols in form.pivot_rows:
            return None
        solution: Vector = {}
        for p, row in form.pivot_rows.items():
            value = row.get(self.ncols)
            if value:
                solution[p] = value
        return solution

    def inverse(self) -> "SparseMatrix":
        if self.nrows != self.ncols:
            raise InputError("only square matrices can be inverted")
        n = self.nrows
        augmented = [dict(row) for row in self.rows]
        for i in range(n):
            augmented[i][n + i] = Fraction(1)
        form = echelon(augmented, 2 * n, "first")
        if any(p >= n for p in form.pivot_rows) or form.rank < n:
            raise InputError("matrix is singular")
        rows = []
        for p in range(n):
            row = form.pivot_rows[p]
            rows.append({j - n: v for j, v in row.items() if j >= n})
        return SparseMatrix(n, n, rows)

    def __repr__(self) -> str:
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={sum(len(r) for r in self.rows)})"


def stack_columns(nrows: int, *groups: Sequence[Vector]) -> SparseMatrix:
    columns: List[Vector] = []
    for group in groups:
        columns.extend(group)
    return SparseMatrix.from_columns(nrows, columns)


def span_rank(vectors: Sequence[Vector], ncols: int, pivot: Optional[str] = None) -> int:
    return echelon(vectors, ncols, pivot).rank


def _to_sympy(value) -> sympy.Rational:
    value = Fraction(value)
    return sympy.Rational(value.numerator, value.denominator)


def dense_rank(matrix: SparseMatrix) -> int:
    """Rank computed by sympy on the dense matrix; an independent oracle."""
    if matrix.nrows == 0 or matrix.ncols == 0:
        return 0
    dense = sympy.Matrix([[_to_sympy(x) for x in row] for row in matrix.to_dense()])
    return int(dense.rank())


def determinant(dense: Sequence[Sequence[Fraction]]) -> Fraction:
    """Exact determinant of a small square matrix."""
    if len(dense) == 0:
        return Fraction(1)
    value = sympy.Matrix([[_to_sympy(x) for x in row] for row in dense]).det()
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))
