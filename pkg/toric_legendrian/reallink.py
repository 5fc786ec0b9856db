"""Real quadric systems for the fixed locus of z -> conj(z) on the link.

The link meets R^d in {x : sum_j a_ij x_j^2 = 0, sum_j b_j x_j^2 = 1}. In
u = x*x coordinates this is a polytope P; points are drawn by hit-and-run in P
and lifted back with random signs.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _graph_components
from scipy.spatial import cKDTree

from toric_legendrian.cone import check_ypq
from toric_legendrian.errors import InfeasibleSystemError, SamplerError
from toric_legendrian.lattice import IntMatrix
from toric_legendrian.reeb import ypq_l_inverse

logger = logging.getLogger(__name__)

RANK_TOL = 1e-9
DIRECTION_EPS = 1e-14
# minimized Reeb vectors carry ~1e-8 relative error
SPLIT_TOL = 1e-6


@dataclass(frozen=True)
class QuadricSystem:
    """sum_j a_ij x_j^2 = 0 (rows of A) and sum_j b_j x_j^2 = 1."""
    A: IntMatrix
    b: tuple
    interior_point: tuple = None

    @property
    def d(self):
        return len(self.b)

    @property
    def k(self):
        return self.A.rows

    def a_array(self):
        return self.A.to_numpy().reshape(self.k, self.d)

    def b_array(self):
        return np.asarray(self.b, dtype=float)

    def equations(self):
        """Linear system (M, rhs) in u = x*x coordinates."""
        M = np.vstack([self.a_array(), self.b_array()[None, :]])
        rhs = np.zeros(self.k + 1)
        rhs[-1] = 1.0
        return M, rhs

    def residuals(self, x):
        M, rhs = self.equations()
        x = np.asarray(x, dtype=float)
        return M @ (x * x) - rhs

    def jacobian(self, x):
        M, _ = self.equations()
        return 2.0 * M * np.asarray(x, dtype=float)[None, :]

    def scale(self):
        return max(1.0, float(np.max(np.abs(self.equations()[0]))))

    def to_dict(self):
        return {'A': self.A.to_rows(), 'b': [float(v) for v in self.b], 'd': self.d, 'k': self.k}


def _interior_point(A, b):
    """Point of P maximizing min_j u_j, or InfeasibleSystemError."""
    k, d = A.shape
    c = np.zeros(d + 1)
    c[-1] = -1.0
    A_eq = np.hstack([np.vstack([A, b[None, :]]), np.zeros((k + 1, 1))])
    b_eq = np.zeros(k + 1)
    b_eq[-1] = 1.0
    A_ub = np.hstack([-np.eye(d), np.ones((d, 1))])
    bounds = [(0, None)] * d + [(None, 1.0)]
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(d), A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method='highs')
    if res.status != 0 or res.x[-1] <= 1e-12:
        raise InfeasibleSystemError("the polytope {u >= 0, Au = 0, b.u = 1} has empty interior")
    return res.x[:d]


def _is_bounded(A, b):
    """P is bounded iff {u >= 0, Au = 0, b.u = 0} is {0}."""
    k, d = A.shape
    res = linprog(-np.ones(d), A_ub=np.ones((1, d)), b_ub=[1.0],
                  A_eq=np.vstack([A, b[None, :]]), b_eq=np.zeros(k + 1),
                  bounds=[(0, None)] * d, method='highs')
    return res.status == 0 and -res.fun <= 1e-9


def build_system(data, coeffs):
    """Assemble the quadric system for DelzantData and ReebCoefficients.

    Raises:
        InfeasibleSystemError: P is empty, lower dimensional or unbounded
    """
    A = data.kernel_basis.transpose()
    b = coeffs.as_array()
    A_float = A.to_numpy().reshape(A.rows, data.d)
    if not _is_bounded(A_float, b):
        raise InfeasibleSystemError("the polytope {u >= 0, Au = 0, b.u = 1} is unbounded")
    u = _interior_point(A_float, b)
    logger.debug("quadric system with k=%d, d=%d; interior point %s", A.rows, data.d, u)
    return QuadricSystem(A, tuple(float(v) for v in b), tuple(float(v) for v in u))


def displayed_ypq_system(p, q):
    """Y^{p,q} system with coefficients as printed (rescaled to level 1)."""
    check_ypq(p, q)
    linv = ypq_l_inverse(p, q)
    A = IntMatrix.from_rows([[-(p + q), p, -(p - q), p]])
    b = (3 * p + 3 * q - linv, 0.0, 3 * p - 3 * q + linv, 0.0)
    return QuadricSystem(A, tuple(v / (2 * p) for v in b))


def _numeric_rank(M, tol=RANK_TOL):
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def _normalize_rows(M):
    norms = np.linalg.norm(M, axis=1)
    norms[norms == 0] = 1.0
    return M / norms[:, None]


def _augmented(system):
    M, rhs = system.equations()
    return _normalize_rows(np.hstack([M, rhs[:, None]]))


def systems_equivalent(s1, s2, tol=RANK_TOL, allow_level_rescale=False):
    """Whether two quadric systems cut out the same set.

    Both are linear in u = x*x, so equality of solution sets is equality of
    the row spaces of the augmented matrices [M | rhs]. With
    ``allow_level_rescale`` the level row of s2 may differ by a positive factor.
    """
    if s1.d != s2.d:
        return False
    if allow_level_rescale:
        A1, A2 = _normalize_rows(s1.a_array()), _normalize_rows(s2.a_array())
        ra, rb = _numeric_rank(A1, tol), _numeric_rank(A2, tol)
        if not ra == rb == _numeric_rank(np.vstack([A1, A2]), tol):
            return False
        # b2 = c * b1 + (row space of A), c > 0
        basis = np.vstack([s1.b_array()[None, :], s1.a_array()]).T
        coef, *_ = np.linalg.lstsq(basis, s2.b_array(), rcond=None)
        fit = np.linalg.norm(basis @ coef - s2.b_array())
        return bool(fit <= tol * max(1.0, np.linalg.norm(s2.b_array())) and coef[0] > 0)
    g1, g2 = _augmented(s1), _augmented(s2)
    r1, r2 = _numeric_rank(g1, tol), _numeric_rank(g2, tol)
    return r1 == r2 == _numeric_rank(np.vstack([g1, g2]), tol)


@dataclass
class SampleSet:
    points: np.ndarray
    residual_max: float
    seed: int
    chains: int
    jacobian_ranks: tuple = field(default_factory=tuple)
    system: QuadricSystem = None

    def __len__(self):
        return len(self.points)

    def to_dict(self):
        ranks = sorted(set(self.jacobian_ranks))
        return {'count': len(self.points), 'residual_max': self.residual_max,
                'seed': self.seed, 'chains': self.chains, 'jacobian_ranks': ranks}


def _chebyshev_center(G, h):
    """Center of the largest ball in {z : G z <= h}."""
    m, n = G.shape
    norms = np.linalg.norm(G, axis=1)
    c = np.zeros(n + 1)
    c[-1] = -1.0
    res = linprog(c, A_ub=np.hstack([G, norms[:, None]]), b_ub=h,
                  bounds=[(None, None)] * n + [(0, None)], method='highs')
    if res.status != 0 or res.x[-1] <= 0:
        raise SamplerError("polytope has no interior in its affine hull")
    return res.x[:n]


def _chain(M, rhs, count, burn_in, thin, seed_seq, max_retries=10):
    rng = np.random.default_rng(seed_seq)
    N = null_space(M)
    base = np.linalg.pinv(M) @ rhs
    d = M.shape[1]
    if N.shape[1] == 0:
        us = np.tile(base, (count, 1))
    else:
        G, h = -N, base
        z = _chebyshev_center(G, h)

        def advance(z):
            for _ in range(max_retries):
                direction = rng.standard_normal(N.shape[1])
                direction /= np.linalg.norm(direction)
                slope = G @ direction
                slack = np.maximum(h - G @ z, 0.0)
                up, down = slope > DIRECTION_EPS, slope < -DIRECTION_EPS
                hi = np.min(slack[up] / slope[up]) if up.any() else np.inf
                lo = np.max(slack[down] / slope[down]) if down.any() else -np.inf
                if np.isfinite(hi) and np.isfinite(lo) and hi >= lo:
                    return z + rng.uniform(lo, hi) * direction
            raise SamplerError(f"no bounded chord after {max_retries} directions")

        for _ in range(burn_in):
            z = advance(z)
        us = np.empty((count, d))
        for i in range(count):
            for _ in range(thin):
                z = advance(z)
            us[i] = N @ z + base
    signs = rng.choice((-1.0, 1.0), size=us.shape)
    return signs * np.sqrt(np.clip(us, 0.0, None))


def sample(system, count, seed, chains=4, burn_in=100, thin=5, workers=1):
    """Draw ``count`` points on the real link.

    Chains are seeded from SeedSequence(seed).spawn(chains) and concatenated
    in chain order, so the output depends on ``seed`` alone and not on
    ``workers``.

    Raises:
        SamplerError: a chain could not find a bounded chord
    """
    if count < 1:
        raise SamplerError(f"sample count must be positive, got {count}")
    chains = max(1, min(chains, count))
    M, rhs = system.equations()
    sizes = [count // chains + (i < count % chains) for i in range(chains)]
    seeds = np.random.SeedSequence(seed).spawn(chains)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        parts = list(pool.map(lambda job: _chain(M, rhs, job[0], burn_in, thin, job[1]),
                              zip(sizes, seeds)))
    points = np.vstack(parts)
    residual_max = float(max(np.max(np.abs(system.residuals(x))) for x in points))
    ranks = tuple(jacobian_rank(system, x) for x in points)
    logger.info("sampled %d points in %d chains, max residual %.3e",
                len(points), chains, residual_max)
    return SampleSet(points, residual_max, seed, chains, ranks, system)


def jacobian_rank(system, x):
    return _numeric_rank(system.jacobian(x))


def residuals(system, samples):
    return np.array([system.residuals(x) for x in samples.points])


def orbit(x, deck):
    return [deck.act(s, x) for s in deck.elements]


def quotient_representative(x, deck):
    """Lexicographically smallest point of the deck orbit of ``x``."""
    return min(orbit(x, deck), key=lambda y: tuple(y))


def connected_components(points, eps=None):
    """Components of the eps-neighbourhood graph; eps defaults to 4x the median nn distance."""
    points = np.asarray(points, dtype=float)
    if len(points) < 2:
        return len(points)
    tree = cKDTree(points)
    if eps is None:
        dist, _ = tree.query(points, k=2)
        eps = 4.0 * float(np.median(dist[:, 1]))
    pairs = np.array(sorted(tree.query_pairs(eps)), dtype=int).reshape(-1, 2)
    n = len(points)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    count, _ = _graph_components(graph, directed=False)
    return int(count)


@dataclass
class TopologyReport:
    upstairs: str
    quotient: str
    base: tuple = ()
    fiber: tuple = ()
    actions: list = field(default_factory=list)
    note: str = None
    components: int = None

    def to_dict(self):
        return {'upstairs': self.upstairs, 'quotient': self.quotient,
                'base': list(self.base), 'fiber': list(self.fiber),
                'actions': self.actions, 'note': self.note,
                'components': self.components}


def _product_split(a, b, tol=SPLIT_TOL):
    """Find G with b - t a vanishing off G and positive on G.

    Then the locus is {sum_G (b - t a)_j x_j^2 = 1} x {sum a_j x_j^2 = -sum_G ...},
    an ellipse over the coordinates G times the quadric over the rest. t is the
    least-squares fit on the rest; ``tol`` is relative to max |b|.
    """
    if np.any(a == 0):
        return None
    scale = max(1.0, float(np.max(np.abs(b))))
    for group in (np.flatnonzero(a < 0), np.flatnonzero(a > 0)):
        rest = np.setdiff1d(np.arange(len(a)), group)
        if len(rest) == 0 or len(group) == 0:
            continue
        t = float(a[rest] @ b[rest] / (a[rest] @ a[rest]))
        c = b - t * a
        if np.all(np.abs(c[rest]) <= tol * scale) and np.all(c[group] > tol * scale):
            return tuple(int(j) for j in group), tuple(int(j) for j in rest)
    return None


def _factor_action(s, coords):
    flipped = [s[j] for j in coords]
    if not any(flipped):
        return 'identity'
    if all(flipped):
        return 'antipodal'
    return 'reflection'


def _sphere(m):
    return 'S^1' if m == 2 else f"S^{m - 1}"


def classify_ypq(system, deck, samples=None, seed=7, count=500, split_tol=SPLIT_TOL):
    """Identify the real locus and its deck quotient for d=4, k=1.

    For k = 0 the locus is the round sphere with no deck quotient. Other
    shapes are reported as unclassified.
    """
    if system.k == 0:
        return TopologyReport(f"S^{system.d - 1}", f"S^{system.d - 1}",
                              note="no deck quotient; real sphere S^n")
    if system.d != 4 or system.k != 1:
        return TopologyReport('unclassified', 'unclassified',
                              note=f"no classification for d={system.d}, k={system.k}")
    split = _product_split(system.a_array()[0], system.b_array(), split_tol)
    if split is None:
        return TopologyReport('unclassified', 'unclassified',
                              note='locus is not a product of two quadrics')
    base, fiber = split
    if samples is None:
        samples = sample(system, count, seed)
    upstairs = f"{_sphere(len(base))} x {_sphere(len(fiber))}"

    actions = []
    for s in deck.nontrivial():
        kinds = (_factor_action(s, base), _factor_action(s, fiber))
        displacement = float(min(np.linalg.norm(deck.act(s, x) - x) for x in samples.points))
        free = 'antipodal' in kinds and displacement > 1e-6
        actions.append({'element': ''.join(map(str, s)), 'base': kinds[0],
                        'fiber': kinds[1], 'free': free,
                        'min_displacement': displacement})

    if len(actions) == 1 and upstairs == 'S^1 x S^1':
        act = actions[0]
        if not act['free']:
            quotient = 'unclassified'
        elif 'reflection' in (act['base'], act['fiber']):
            quotient = 'Klein bottle'
        else:
            quotient = 'torus'
    elif not actions:
        quotient = upstairs
    else:
        quotient = 'unclassified'

    components = connected_components(samples.points)
    logger.info("real locus %s, quotient %s", upstairs, quotient)
    return TopologyReport(upstairs, quotient, base, fiber, actions, components=components)
