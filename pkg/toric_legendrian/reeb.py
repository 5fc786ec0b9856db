"""Sasaki volume functional on the Reeb cone and its constrained minimizer."""
import logging
from collections import deque
from dataclasses import dataclass, field
from math import factorial, sqrt

import numpy as np

from toric_legendrian.cone import (check_ypq, dual_rays, gorenstein_vector, require_valid,
                                   ypq_cone)
from toric_legendrian.errors import (ConvergenceError, UnsupportedConeError,
                                     VolumeDivergenceError)
from toric_legendrian.lattice import IntMatrix, rank

logger = logging.getLogger(__name__)

PAIRING_FLOOR = 1e-12
ARMIJO_C1 = 1e-4


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def _fan(rays, normals, ray_ids, m, pick):
    """Pulling triangulation of the m-dimensional face spanned by ``ray_ids``."""
    if len(ray_ids) == m:
        return [tuple(ray_ids)]
    apex = pick(ray_ids)
    simplices = []
    seen = set()
    for lam in normals:
        facet = tuple(r for r in ray_ids if _dot(rays[r], lam) == 0)
        if not facet or apex in facet or facet in seen:
            continue
        if rank(IntMatrix.from_rows([rays[r] for r in facet], len(lam))) != m - 1:
            continue
        seen.add(facet)
        simplices.extend((apex,) + s for s in _fan(rays, normals, facet, m - 1, pick))
    return simplices


@dataclass(frozen=True)
class VolumeProfile:
    """Simplicial decomposition of C with per-simplex weights.

    vol(xi) = sum_s |det U_s| / 2^(n+1) / (n+1)! / prod_{u in s} <u, xi>
    """
    rays: tuple
    simplices: tuple
    dets: tuple
    gamma: tuple = None
    _ray_array: np.ndarray = field(init=False, repr=False, compare=False)
    _stacked: np.ndarray = field(init=False, repr=False, compare=False)
    _weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        dim = len(self.rays[0])
        object.__setattr__(self, '_ray_array', np.array(self.rays, dtype=float))
        object.__setattr__(self, '_stacked', np.array(
            [[self.rays[r] for r in s] for s in self.simplices], dtype=float))
        object.__setattr__(self, '_weights', np.array(
            [abs(d) * 0.5 ** dim / factorial(dim) for d in self.dets]))

    @property
    def dim(self):
        return len(self.rays[0])

    def pairings(self, xi):
        return self._ray_array @ np.asarray(xi, dtype=float)


def build_profile(cone, apex='first'):
    """Triangulate C by pulling from the smallest (``first``) or largest (``last``) ray."""
    if apex not in ('first', 'last'):
        raise ValueError(f"apex must be 'first' or 'last', got {apex!r}")
    rays = dual_rays(cone).rays
    pick = min if apex == 'first' else max
    simplices = tuple(_fan(rays, cone.normals, tuple(range(len(rays))), cone.dim, pick))
    dets = tuple(IntMatrix.from_rows([rays[r] for r in s], cone.dim).det() for s in simplices)
    if any(d == 0 for d in dets):
        raise ArithmeticError("triangulation produced a degenerate simplex")
    logger.debug("triangulated %s into %d simplices", cone.name or 'cone', len(simplices))
    return VolumeProfile(rays, simplices, dets, gorenstein_vector(cone))


def _terms(profile, xi):
    xi = np.asarray(xi, dtype=float)
    if np.any(profile.pairings(xi) <= 0):
        raise VolumeDivergenceError(f"xi = {xi.tolist()} is outside the open Reeb cone")
    pair = profile._stacked @ xi
    return pair, profile._weights / np.prod(pair, axis=1)


def volume(profile, xi):
    _, terms = _terms(profile, xi)
    return float(terms.sum())


def volume_gradient(profile, xi):
    pair, terms = _terms(profile, xi)
    inner = np.einsum('sij,si->sj', profile._stacked, 1.0 / pair)
    return -(terms[:, None] * inner).sum(axis=0)


def log_volume(profile, xi):
    return float(np.log(volume(profile, xi)))


def log_volume_gradient(profile, xi):
    return volume_gradient(profile, xi) / volume(profile, xi)


def projected_gradient(gradient, gamma):
    """Component of ``gradient`` tangent to the slice <gamma, xi> = const."""
    gamma = np.asarray(gamma, dtype=float)
    return gradient - (gradient @ gamma) / (gamma @ gamma) * gamma


def initial_point(profile, normals):
    s = np.asarray(normals, dtype=float).sum(axis=0)
    gamma = np.asarray(profile.gamma, dtype=float)
    return profile.dim * s / (gamma @ s)


@dataclass(frozen=True)
class ReebSolution:
    xi: tuple
    volume: float
    grad_norm: float
    provenance: str
    iterations: int = 0
    l_inverse: float = None

    def to_dict(self):
        return {
            'xi': list(self.xi),
            'volume': self.volume,
            'grad_norm': self.grad_norm,
            'provenance': self.provenance,
            'iterations': self.iterations,
            'l_inverse': self.l_inverse,
        }


def _max_step(profile, x, direction):
    rx = profile.pairings(x)
    rd = profile._ray_array @ direction
    shrinking = rd < 0
    if not shrinking.any():
        return np.inf
    return float(np.min((rx[shrinking] - PAIRING_FLOOR) / -rd[shrinking]))


def minimize(cone, tol=1e-9, max_iter=10000, log_every=100):
    """Minimize vol on {<gamma, xi> = n+1} inside the open Reeb cone.

    Projected gradient descent on log vol with Barzilai-Borwein steps and an
    Armijo backtrack. The step never leaves the region where every ray pairs
    to at least PAIRING_FLOOR.

    Raises:
        UnsupportedConeError: the cone is not Gorenstein
        ConvergenceError: max_iter reached; carries the last iterates
    """
    require_valid(cone)
    profile = build_profile(cone)
    if profile.gamma is None:
        raise UnsupportedConeError(f"{cone.name or 'cone'} has no Gorenstein vector")
    gamma = np.asarray(profile.gamma, dtype=float)
    level = float(cone.dim)

    x = initial_point(profile, cone.normals)
    f = log_volume(profile, x)
    g = projected_gradient(log_volume_gradient(profile, x), gamma)
    step = 1.0 / max(float(np.linalg.norm(g)), 1.0)
    trace = deque(maxlen=10)

    for it in range(max_iter + 1):
        gnorm = float(np.linalg.norm(g))
        trace.append((it, x.tolist(), gnorm))
        if gnorm < tol:
            logger.info("minimizer converged after %d iterations, |grad| = %.3e", it, gnorm)
            return ReebSolution(tuple(float(v) for v in x), float(np.exp(f)), gnorm,
                                'minimized', it)
        if log_every and it % log_every == 0:
            logger.debug("iteration %d: xi=%s |grad|=%.3e", it, x.tolist(), gnorm)
        if it == max_iter:
            break
        direction = -g
        t = min(step, 0.99 * _max_step(profile, x, direction))
        slack = 16 * np.finfo(float).eps * max(1.0, abs(f))
        while True:
            candidate = x + t * direction
            candidate += (level - gamma @ candidate) / (gamma @ gamma) * gamma
            f_new = log_volume(profile, candidate)
            if f_new <= f - ARMIJO_C1 * t * gnorm ** 2 + slack:
                break
            t *= 0.5
            if t < 1e-300:
                raise ConvergenceError("line search failed", list(trace))
        g_new = projected_gradient(log_volume_gradient(profile, candidate), gamma)
        s, y = candidate - x, g_new - g
        sy = float(s @ y)
        step = float(s @ s) / sy if sy > 0 else 1.0
        x, f, g = candidate, f_new, g_new

    logger.warning("minimizer stopped after %d iterations", max_iter)
    raise ConvergenceError(f"no convergence in {max_iter} iterations", list(trace))


def ypq_l_inverse(p, q):
    return (3 * q * q - 2 * p * p + p * sqrt(4 * p * p - 3 * q * q)) / q


def ypq_reeb(p, q):
    """Closed-form minimizer for Y^{p,q}: (3, c, c) with c = (3p - 3q + l^-1) / 2."""
    check_ypq(p, q)
    linv = ypq_l_inverse(p, q)
    c = 0.5 * (3 * p - 3 * q + linv)
    xi = np.array([3.0, c, c])
    cone = ypq_cone(p, q)
    profile = build_profile(cone)
    g = projected_gradient(log_volume_gradient(profile, xi), profile.gamma)
    return ReebSolution(tuple(float(v) for v in xi), volume(profile, xi),
                        float(np.linalg.norm(g)), 'closed_form', 0, linv)
