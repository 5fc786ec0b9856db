"""Exact integer linear algebra: Hermite/Smith normal forms, integer kernels,
primitivity and saturation tests.

IntMatrix holds Python ints; the normal forms are computed over sympy's ZZ
domain, so entries never overflow.
"""
import logging
import operator
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np
import sympy
from sympy import ZZ
from sympy.matrices.normalforms import hermite_normal_form as _hnf
from sympy.matrices.normalforms import smith_normal_decomp

from toric_legendrian.errors import DependentVectorsError, LatticeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix stored row-major."""
    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise LatticeError(f"negative shape {self.rows}x{self.cols}")
        if self.rows * self.cols != len(self.entries):
            raise LatticeError(
                f"{self.rows}x{self.cols} matrix needs {self.rows * self.cols} entries, "
                f"got {len(self.entries)}")
        for e in self.entries:
            if not isinstance(e, int) or isinstance(e, bool):
                raise LatticeError(f"entry {e!r} is not an integer")

    @classmethod
    def from_rows(cls, rows, cols=None):
        rows = [[operator.index(e) for e in row] for row in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(row) != cols for row in rows):
            raise LatticeError("ragged rows")
        return cls(len(rows), cols, tuple(e for row in rows for e in row))

    @classmethod
    def from_columns(cls, columns, rows=None):
        columns = [[operator.index(e) for e in col] for col in columns]
        if rows is None:
            rows = len(columns[0]) if columns else 0
        if any(len(col) != rows for col in columns):
            raise LatticeError("ragged columns")
        return cls(rows, len(columns),
                   tuple(columns[j][i] for i in range(rows) for j in range(len(columns))))

    @classmethod
    def identity(cls, n):
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    @classmethod
    def zeros(cls, rows, cols):
        return cls(rows, cols, (0,) * (rows * cols))

    def __getitem__(self, index):
        i, j = index
        return self.entries[i * self.cols + j]

    def row(self, i):
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j):
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def to_rows(self):
        return [list(self.row(i)) for i in range(self.rows)]

    def to_columns(self):
        return [list(self.column(j)) for j in range(self.cols)]

    def transpose(self):
        return IntMatrix.from_columns(self.to_rows(), self.cols)

    def __matmul__(self, other):
        if not isinstance(other, IntMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise LatticeError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        cols = other.to_columns()
        return IntMatrix.from_rows(
            [[sum(a * b for a, b in zip(self.row(i), col)) for col in cols]
             for i in range(self.rows)],
            other.cols)

    def is_zero(self):
        return not any(self.entries)

    def det(self):
        if self.rows != self.cols:
            raise LatticeError("determinant of a non-square matrix")
        if self.rows == 0:
            return 1
        return int(sympy.Matrix(self.to_rows()).det())

    def to_numpy(self, dtype=float):
        return np.array(self.to_rows(), dtype=dtype).reshape(self.rows, self.cols)

    def to_sympy(self):
        return sympy.Matrix(self.rows, self.cols, list(self.entries))

    @classmethod
    def from_sympy(cls, M):
        return cls(M.rows, M.cols, tuple(int(e) for e in M))


@dataclass(frozen=True)
class SnfResult:
    """Smith normal form: left * m * right = diag(divisors)."""
    diag: tuple
    left: IntMatrix
    right: IntMatrix

    @property
    def rank(self):
        return sum(1 for d in self.diag if d)

    def diagonal_matrix(self):
        rows, cols = self.left.rows, self.right.rows
        return IntMatrix.from_rows(
            [[self.diag[i] if i == j else 0 for j in range(cols)] for i in range(rows)], cols)


def hermite_normal_form(m):
    """Column-style Hermite normal form of ``m``.

    Args:
        m: IntMatrix

    Returns:
        IntMatrix H = m * U for a unimodular U, of the same shape as m. The
        nonzero columns are sympy's HNF: pivots in the bottom rows and rightmost
        columns, positive, with the entries right of each pivot reduced into
        [0, pivot). Zero columns come first. H has the same integer column
        span as m.
    """
    if m.rows == 0 or m.cols == 0 or m.is_zero():
        return m
    H = IntMatrix.from_sympy(_hnf(m.to_sympy()))
    pad = m.cols - H.cols
    return IntMatrix.from_rows([[0] * pad + list(H.row(i)) for i in range(m.rows)], m.cols)


def rank(m):
    """Exact rank of an integer matrix."""
    if m.rows == 0 or m.cols == 0:
        return 0
    return int(m.to_sympy().rank())


def smith_normal_form(m):
    """Smith normal form with unimodular transforms.

    Args:
        m: IntMatrix

    Returns:
        SnfResult whose divisors are nonnegative, each dividing the next, with
        any zero divisors trailing.
    """
    if m.rows == 0 or m.cols == 0:
        return SnfResult((), IntMatrix.identity(m.rows), IntMatrix.identity(m.cols))
    if m.is_zero():
        return SnfResult((0,) * min(m.rows, m.cols),
                         IntMatrix.identity(m.rows), IntMatrix.identity(m.cols))
    D, S, T = smith_normal_decomp(m.to_sympy(), domain=ZZ)
    left = [[int(e) for e in S.row(i)] for i in range(m.rows)]
    diag = []
    for i in range(min(m.rows, m.cols)):
        value = int(D[i, i])
        if value < 0:
            left[i] = [-e for e in left[i]]
            value = -value
        diag.append(value)
    return SnfResult(tuple(diag), IntMatrix.from_rows(left, m.rows), IntMatrix.from_sympy(T))


def integer_kernel_basis(m):
    """Saturated basis of {v in Z^cols : m v = 0}.

    The columns of ``right`` past the Smith rank span the kernel; the basis is
    returned in column Hermite normal form, so equal lattices always give equal
    matrices.
    """
    if m.rows == 0:
        return IntMatrix.identity(m.cols)
    snf = smith_normal_form(m)
    kernel = IntMatrix.from_columns(snf.right.to_columns()[snf.rank:], m.cols)
    return hermite_normal_form(kernel)


def primitive_part(v):
    """Divide an integer vector by the gcd of its entries."""
    v = [operator.index(e) for e in v]
    g = gcd(*v)
    if g == 0:
        raise LatticeError("zero vector has no primitive part")
    return tuple(e // g for e in v)


def is_primitive(v):
    """True iff the gcd of the entries of the nonzero integer vector ``v`` is 1."""
    v = [operator.index(e) for e in v]
    if not any(v):
        raise LatticeError("primitivity is undefined for the zero vector")
    return gcd(*v) == 1


def rational_dependency(vectors):
    """Return a nonzero rational c with sum c_i v_i = 0, or None if independent."""
    if not vectors:
        return None
    columns = sympy.Matrix([list(v) for v in vectors]).T
    null = columns.nullspace()
    if not null:
        return None
    return tuple(Fraction(int(c.p), int(c.q)) for c in null[0])


def is_saturated(vectors, ambient_dim):
    """Decide span_R(vectors) ∩ Z^ambient_dim == span_Z(vectors).

    Args:
        vectors: list of integer vectors, linearly independent over Q
        ambient_dim: length of each vector

    Returns:
        bool, True iff every Smith divisor of the stacked matrix equals 1

    Raises:
        DependentVectorsError: the vectors are dependent; ``witness`` holds the
            rational combination
    """
    vectors = [tuple(operator.index(e) for e in v) for v in vectors]
    for v in vectors:
        if len(v) != ambient_dim:
            raise LatticeError(f"vector {v} does not live in Z^{ambient_dim}")
    if not vectors:
        return True
    stacked = IntMatrix.from_rows(vectors, ambient_dim)
    if rank(stacked) < len(vectors):
        witness = rational_dependency(vectors)
        raise DependentVectorsError(
            f"{len(vectors)} vectors are linearly dependent", witness)
    return all(d == 1 for d in smith_normal_form(stacked).diag)
