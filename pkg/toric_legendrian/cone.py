"""Rational polyhedral cones C = {y : <y, lambda_i> >= 0} and their validity predicates."""
import logging
import operator
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import gcd

import numpy as np
import sympy

from toric_legendrian.errors import (ConeValidationError, DegenerateConeError,
                                     InvalidParametersError, LatticeError)
from toric_legendrian.lattice import (IntMatrix, integer_kernel_basis, is_primitive,
                                      is_saturated, primitive_part, rank)

logger = logging.getLogger(__name__)

MAX_NORMALS = 16


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


@dataclass(frozen=True)
class ConeSpec:
    """Cone given by d integer inward facet normals in Z^dim (dim = n+1)."""
    dim: int
    normals: tuple
    name: str = None

    def __post_init__(self):
        normals = tuple(tuple(operator.index(e) for e in v) for v in self.normals)
        if self.dim < 1:
            raise LatticeError(f"cone dimension must be positive, got {self.dim}")
        for v in normals:
            if len(v) != self.dim:
                raise LatticeError(f"normal {v} does not live in Z^{self.dim}")
        object.__setattr__(self, 'normals', normals)

    @property
    def d(self):
        return len(self.normals)

    @property
    def beta(self):
        """The (n+1) x d matrix whose columns are the normals."""
        return IntMatrix.from_columns(self.normals, self.dim)


@dataclass(frozen=True)
class RayList:
    """Primitive generators of the extreme rays of C, lexicographically ordered."""
    rays: tuple

    def __len__(self):
        return len(self.rays)

    def as_array(self):
        return np.array(self.rays, dtype=float)


@dataclass(frozen=True)
class Face:
    normals: tuple  # indices of every normal vanishing on the face
    dim: int
    rays: tuple


@dataclass(frozen=True)
class FaceLattice:
    """Faces of C other than the apex; the full cone has the empty normal set."""
    faces: tuple

    def proper_faces(self):
        return [f for f in self.faces if f.normals]


@dataclass
class CheckResult:
    name: str
    passed: bool
    witness: str = None

    def to_dict(self):
        return {'name': self.name, 'passed': self.passed, 'witness': self.witness}


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def check(self, name):
        return next(c for c in self.checks if c.name == name)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        return {'ok': self.ok, 'checks': [c.to_dict() for c in self.checks]}


@lru_cache(maxsize=256)
def _extreme_rays(normals, dim):
    """Naive double description: one candidate per (dim-1)-subset of normals."""
    found = set()
    for subset in combinations(range(len(normals)), dim - 1):
        m = IntMatrix.from_rows([normals[i] for i in subset], dim)
        if rank(m) != dim - 1:
            continue
        v = integer_kernel_basis(m).column(0)
        pairings = [_dot(v, lam) for lam in normals]
        if all(p >= 0 for p in pairings):
            found.add(primitive_part(v))
        elif all(p <= 0 for p in pairings):
            found.add(primitive_part([-e for e in v]))
    return tuple(sorted(found))


def dual_rays(cone):
    """Extreme rays of C.

    Raises:
        DegenerateConeError: C contains a line or has empty interior
    """
    r = rank(cone.beta)
    if r < cone.dim:
        raise DegenerateConeError(
            f"normals have rank {r} < {cone.dim}: the cone contains a line")
    rays = _extreme_rays(cone.normals, cone.dim)
    if not rays or rank(IntMatrix.from_rows(rays, cone.dim)) < cone.dim:
        raise DegenerateConeError("the cone has empty interior")
    return RayList(rays)


def face_lattice(cone, rays=None):
    """Enumerate the faces of C minus its apex by intersecting facets."""
    rays = (rays if rays is not None else dual_rays(cone)).rays
    d = cone.d
    zero = [frozenset(i for i in range(d) if _dot(r, cone.normals[i]) == 0) for r in rays]

    def closure(ray_ids):
        common = frozenset(range(d))
        for r in ray_ids:
            common &= zero[r]
        return tuple(sorted(common))

    def make_face(ray_ids):
        sub = [rays[r] for r in sorted(ray_ids)]
        return Face(closure(ray_ids), rank(IntMatrix.from_rows(sub, cone.dim)), tuple(sub))

    start = frozenset(range(len(rays)))
    seen = {start: make_face(start)}
    frontier = [start]
    while frontier:
        current = frontier.pop()
        vanishing = set(seen[current].normals)
        for i in range(d):
            if i in vanishing:
                continue
            smaller = frozenset(r for r in current if i in zero[r])
            if smaller and smaller not in seen:
                seen[smaller] = make_face(smaller)
                frontier.append(smaller)
    faces = sorted(seen.values(), key=lambda f: (-f.dim, f.normals))
    return FaceLattice(tuple(faces))


def validate(cone, max_normals=MAX_NORMALS):
    """Run the primitive, minimal, strongly convex and good checks.

    Failures are report entries carrying a witness; nothing is raised.
    """
    report = ValidationReport()
    d, dim = cone.d, cone.dim

    if d < dim:
        report.checks.append(CheckResult('dimension', False, f"d = {d} < n+1 = {dim}"))
    elif d > max_normals:
        report.checks.append(CheckResult('dimension', False, f"d = {d} exceeds {max_normals}"))
    else:
        report.checks.append(CheckResult('dimension', True))
    if d > max_normals:
        logger.warning("refusing face enumeration for d = %d", d)
        return report

    bad = [i for i, v in enumerate(cone.normals) if not any(v) or not is_primitive(v)]
    report.checks.append(CheckResult(
        'primitive', not bad,
        None if not bad else "; ".join(f"normal {i} {cone.normals[i]} not primitive" for i in bad)))

    try:
        rays = dual_rays(cone)
    except DegenerateConeError as e:
        report.checks.append(CheckResult('strongly_convex', False, str(e)))
        report.checks.append(CheckResult('minimal', False, 'skipped: cone is degenerate'))
        report.checks.append(CheckResult('good', False, 'skipped: cone is degenerate'))
        return report
    report.checks.append(CheckResult('strongly_convex', True))

    redundant = []
    for i, lam in enumerate(cone.normals):
        if lam in cone.normals[:i]:
            redundant.append(i)
            continue
        on_facet = [r for r in rays.rays if _dot(r, lam) == 0]
        if dim > 1 and (not on_facet or rank(IntMatrix.from_rows(on_facet, dim)) != dim - 1):
            redundant.append(i)
    report.checks.append(CheckResult(
        'minimal', not redundant,
        None if not redundant else "; ".join(
            f"normal {i} {cone.normals[i]} is redundant" for i in redundant)))

    witness = None
    for face in face_lattice(cone, rays).proper_faces():
        vectors = [cone.normals[i] for i in face.normals]
        if rank(IntMatrix.from_rows(vectors, dim)) < len(vectors):
            witness = f"face {list(face.normals)}: normals linearly dependent"
            break
        if not is_saturated(vectors, dim):
            witness = f"face {list(face.normals)}: normals span a non-saturated sublattice"
            break
    report.checks.append(CheckResult('good', witness is None, witness))
    return report


def require_valid(cone):
    """Validate and raise ConeValidationError carrying the report on failure."""
    report = validate(cone)
    if not report.ok:
        failed = ", ".join(c.name for c in report.failures())
        raise ConeValidationError(f"cone {cone.name or cone.normals} failed: {failed}", report)
    return report


def reeb_cone_contains(cone, xi, rays=None):
    """True iff xi pairs strictly positively with every extreme ray of C."""
    rays = (rays if rays is not None else dual_rays(cone)).rays
    return all(_dot(r, xi) > 0 for r in rays)


def gorenstein_vector(cone):
    """Integer gamma with <gamma, lambda_i> = 1 for all i, or None."""
    m = sympy.Matrix([list(v) for v in cone.normals])
    try:
        solution, params = m.gauss_jordan_solve(sympy.ones(cone.d, 1))
    except ValueError:
        return None
    if params.shape[0]:
        solution = solution.subs({p: 0 for p in params})
    if not all(e.is_integer for e in solution):
        return None
    gamma = tuple(int(e) for e in solution)
    if any(_dot(gamma, v) != 1 for v in cone.normals):
        return None
    return gamma


def xi0(cone):
    """Sum of the first n+1 normals; membership in the Reeb cone is not assumed."""
    return tuple(sum(col) for col in zip(*cone.normals[:cone.dim]))


def orthant_cone(dim):
    return ConeSpec(dim, tuple(tuple(int(i == j) for j in range(dim)) for i in range(dim)),
                    name=f"orthant-{dim}")


def check_ypq(p, q):
    if not (isinstance(p, int) and isinstance(q, int)):
        raise InvalidParametersError("p and q must be integers")
    if q < 1:
        raise InvalidParametersError(f"q must be at least 1, got {q}")
    if p <= q:
        raise InvalidParametersError(f"p must exceed q, got p={p}, q={q}")
    if gcd(p, q) != 1:
        raise InvalidParametersError(f"p={p} and q={q} are not coprime")


def ypq_normals(p, q):
    return ((1, 0, 0), (1, p - q - 1, p - q), (1, p, p), (1, 1, 0))


def ypq_cone(p, q):
    check_ypq(p, q)
    return ConeSpec(3, ypq_normals(p, q), name=f"Y^{{{p},{q}}}")


def match_ypq(cone):
    """Return (p, q) when the normals are exactly those of Y^{p,q}, else None."""
    if cone.dim != 3 or cone.d != 4:
        return None
    p = cone.normals[2][1]
    q = p - cone.normals[1][2]
    try:
        check_ypq(p, q)
    except InvalidParametersError:
        return None
    return (p, q) if cone.normals == ypq_normals(p, q) else None
