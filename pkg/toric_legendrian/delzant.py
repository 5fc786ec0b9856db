"""Quotient bookkeeping for 0 -> k -> R^d -> g -> 0.

beta sends e_i to the i-th normal, the kernel basis A spans Lie(K) = ker beta,
and the 2-torsion {a in K | a^2 = 1} is computed as F2 linear algebra.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from numbers import Rational

import numpy as np
import sympy

from toric_legendrian.cone import require_valid
from toric_legendrian.errors import InvalidParametersError, ToricError
from toric_legendrian.lattice import integer_kernel_basis, smith_normal_form

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DelzantData:
    """beta ((n+1) x d), kernel basis A (d x k) and lattice certificates."""
    cone: object
    beta: object
    kernel_basis: object
    torsion_rank: int
    beta_divisors: tuple
    kernel_divisors: tuple

    @property
    def d(self):
        return self.beta.cols

    @property
    def dim(self):
        return self.beta.rows

    @property
    def k(self):
        return self.kernel_basis.cols

    def kernel_rows(self):
        """Rows (a_i1, ..., a_id) of the k x d matrix (a_ij)."""
        return [list(self.kernel_basis.column(i)) for i in range(self.k)]

    def to_dict(self):
        return {
            'beta': self.beta.to_rows(),
            'kernel_basis': self.kernel_basis.to_rows(),
            'k': self.k,
            'torsion_rank': self.torsion_rank,
            'beta_divisors': list(self.beta_divisors),
            'kernel_divisors': list(self.kernel_divisors),
            'saturated': all(x == 1 for x in self.kernel_divisors),
        }


@dataclass(frozen=True)
class DeckGroup:
    """Sign vectors s in {0,1}^d under XOR; s acts by x_j -> (-1)^{s_j} x_j."""
    d: int
    elements: tuple

    @property
    def order(self):
        return len(self.elements)

    def nontrivial(self):
        return [s for s in self.elements if any(s)]

    def labels(self):
        return [''.join(str(bit) for bit in s) for s in self.elements]

    @staticmethod
    def act(s, x):
        signs = np.where(np.asarray(s, dtype=bool), -1.0, 1.0)
        return signs * np.asarray(x, dtype=float)

    def is_closed(self):
        members = set(self.elements)
        return all(tuple(a ^ b for a, b in zip(s, t)) in members
                   for s in self.elements for t in self.elements)

    def to_dict(self):
        return {'order': self.order, 'elements': self.labels()}


@dataclass(frozen=True)
class ReebCoefficients:
    """Minimum-norm b with beta b = xi; ``exact`` holds Fractions for rational xi."""
    xi: tuple
    b: tuple
    exact: tuple = None
    residual: float = 0.0

    def as_array(self):
        return np.array(self.b, dtype=float)

    def to_dict(self):
        return {'xi': [float(v) for v in self.xi], 'b': [float(v) for v in self.b],
                'exact': None if self.exact is None else [str(v) for v in self.exact],
                'residual': self.residual}


def build(cone):
    """Validate ``cone`` and assemble its DelzantData.

    Raises:
        ConeValidationError: the cone is not a strongly convex good cone
    """
    require_valid(cone)
    beta = cone.beta
    kernel = integer_kernel_basis(beta)
    if not (beta @ kernel).is_zero():
        raise ToricError("kernel basis does not annihilate beta")
    if kernel.cols != cone.d - cone.dim:
        raise ToricError(f"kernel rank {kernel.cols} differs from d - n - 1 = {cone.d - cone.dim}")
    beta_divisors = smith_normal_form(beta).diag
    kernel_divisors = smith_normal_form(kernel).diag
    torsion_rank = sum(1 for x in beta_divisors if x != 1)
    logger.info("built quotient data for %s: d=%d, k=%d, torsion rank %d",
                cone.name or 'cone', cone.d, kernel.cols, torsion_rank)
    return DelzantData(cone, beta, kernel, torsion_rank, beta_divisors, kernel_divisors)


def _f2_kernel(rows, d):
    """Basis of the kernel of a 0/1 matrix over F2 by row reduction."""
    rows = [[v & 1 for v in row] for row in rows]
    pivots = []
    r = 0
    for c in range(d):
        hit = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if hit is None:
            continue
        rows[r], rows[hit] = rows[hit], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                rows[i] = [a ^ b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
    basis = []
    for free in (c for c in range(d) if c not in pivots):
        v = [0] * d
        v[free] = 1
        for i, c in enumerate(pivots):
            v[c] = rows[i][free]
        basis.append(v)
    return basis


def _span_f2(basis, d):
    elements = set()
    for coeffs in product((0, 1), repeat=len(basis)):
        v = [0] * d
        for c, vec in zip(coeffs, basis):
            if c:
                v = [a ^ b for a, b in zip(v, vec)]
        elements.add(tuple(v))
    return elements


def _sorted_group(d, elements):
    return DeckGroup(d, tuple(sorted(elements, key=lambda s: ''.join(map(str, s)))))


def deck_group(data):
    """The 2-torsion of K as the F2 kernel of beta mod 2."""
    basis = _f2_kernel(data.beta.to_rows(), data.d)
    group = _sorted_group(data.d, _span_f2(basis, data.d))
    logger.debug("deck group of order %d: %s", group.order, group.labels())
    return group


def kernel_deck_group(data):
    """exp(2 pi i A t) at t in {0, 1/2}^k, i.e. the sign vectors (A m) mod 2."""
    rows = data.kernel_rows()
    elements = set()
    for m in product((0, 1), repeat=data.k):
        elements.add(tuple(sum(mi * row[j] for mi, row in zip(m, rows)) % 2
                           for j in range(data.d)))
    return _sorted_group(data.d, elements)


def cross_check_deck(data):
    f2 = deck_group(data)
    exp = kernel_deck_group(data)
    return {
        'agree': f2.elements == exp.elements,
        'f2_order': f2.order,
        'exp_order': exp.order,
        'connected_k': data.torsion_rank == 0,
    }


def printed_parity_table(p, q):
    """Nontrivial deck element as printed for Y^{p,q}, indexed by parity."""
    if p % 2 == 0:
        flip = (0, 0, 0, 1)
    elif q % 2 == 1:
        flip = (0, 0, 1, 0)
    else:
        flip = (0, 0, 1, 1)
    return DeckGroup(4, ((0, 0, 0, 0), flip))


def table_agreement(group, p, q):
    return group.elements == printed_parity_table(p, q).elements


def _is_rational(xi):
    return all(isinstance(v, Rational) for v in xi)


def reeb_coefficients(data, xi):
    """Minimum-norm solution b of beta b = xi.

    Rational xi is solved exactly (b = beta^T (beta beta^T)^-1 xi); float xi by
    least squares, whose underdetermined solution is the minimum-norm one.
    """
    xi = tuple(xi)
    if len(xi) != data.dim:
        raise InvalidParametersError(f"xi has length {len(xi)}, expected {data.dim}")
    if _is_rational(xi):
        B = sympy.Matrix(data.beta.to_rows())
        target = sympy.Matrix([sympy.Rational(v.numerator, v.denominator) for v in xi])
        solution = B.T * (B * B.T).inv() * target
        exact = tuple(Fraction(int(c.p), int(c.q)) for c in solution)
        return ReebCoefficients(xi, tuple(float(c) for c in exact), exact, 0.0)
    B = data.beta.to_numpy()
    target = np.array(xi, dtype=float)
    b = np.linalg.lstsq(B, target, rcond=None)[0]
    residual = float(np.linalg.norm(B @ b - target))
    return ReebCoefficients(xi, tuple(float(v) for v in b), None, residual)


def moment_map_full(z):
    """mu_0(z) = 1/2 sum |z_j|^2 e_j^*."""
    return 0.5 * np.abs(np.asarray(z)) ** 2


def moment_map(data, z):
    """K moment map: component i is 1/2 sum_j a_ij |z_j|^2."""
    if data.k == 0:
        return np.zeros(0)
    return data.kernel_basis.to_numpy().T @ moment_map_full(z)
