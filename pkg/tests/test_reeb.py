from math import gcd, sqrt

import numpy as np
import pytest

from toric_legendrian.cone import ConeSpec, orthant_cone, ypq_cone
from toric_legendrian.errors import (ConvergenceError, UnsupportedConeError,
                                     VolumeDivergenceError)
from toric_legendrian.reeb import (build_profile, initial_point, minimize, projected_gradient,
                                   volume, volume_gradient, ypq_reeb)


def _reeb_cone_points(cone, profile, count, seed=0):
    """Random points of the open Reeb cone around the normalized sum of the normals."""
    rng = np.random.default_rng(seed)
    center = initial_point(profile, cone.normals)
    floor = 0.05 * profile.pairings(center).min()
    points = []
    while len(points) < count:
        xi = center * (1.0 + rng.uniform(-0.1, 0.1, size=profile.dim))
        if np.all(profile.pairings(xi) > floor):
            points.append(xi)
    return points


def test_ypq_triangulation(y21):
    profile = build_profile(y21)
    assert profile.simplices == ((0, 1, 3), (0, 2, 3))
    assert sorted(abs(d) for d in profile.dets) == [2, 6]


def test_closed_form_y21():
    solution = ypq_reeb(2, 1)
    root = sqrt(13)
    assert solution.xi[0] == 3.0
    assert abs(solution.xi[1] - (root - 1)) < 1e-12
    assert abs(solution.xi[2] - (root - 1)) < 1e-12
    assert abs(solution.l_inverse - (2 * root - 5)) < 1e-12
    assert solution.grad_norm < 1e-9
    assert solution.provenance == 'closed_form'


@pytest.mark.parametrize('p,q', [(p, q) for p in range(2, 6) for q in range(1, p)
                                 if gcd(p, q) == 1])
def test_minimizer_agrees_with_closed_form(p, q):
    numeric = minimize(ypq_cone(p, q))
    closed = ypq_reeb(p, q)
    np.testing.assert_allclose(numeric.xi, closed.xi, atol=1e-6)
    assert numeric.grad_norm < 1e-9
    assert numeric.provenance == 'minimized'


def test_orthant_minimum_is_diagonal(orthant3):
    solution = minimize(orthant3)
    np.testing.assert_allclose(solution.xi, [1.0, 1.0, 1.0], atol=1e-9)
    assert solution.volume == pytest.approx(1.0 / 48.0)


def test_non_gorenstein_cone_is_unsupported():
    with pytest.raises(UnsupportedConeError):
        minimize(ConeSpec(2, ((1, 0), (-1, 3))))


def test_iteration_budget_exhausted(y21):
    with pytest.raises(ConvergenceError) as info:
        minimize(y21, tol=1e-30, max_iter=3)
    assert info.value.trace


def test_volume_diverges_outside_reeb_cone(y21):
    profile = build_profile(y21)
    with pytest.raises(VolumeDivergenceError):
        volume(profile, (0.0, 1.0, 1.0))


def test_gradient_matches_finite_differences(y21):
    profile = build_profile(y21)
    h = 1e-6
    for xi in _reeb_cone_points(y21, profile, 20):
        grad = volume_gradient(profile, xi)
        fd = np.array([(volume(profile, xi + h * e) - volume(profile, xi - h * e)) / (2 * h)
                       for e in np.eye(3)])
        np.testing.assert_allclose(grad, fd, rtol=1e-5, atol=1e-5 * np.abs(grad).max())


def test_volume_homogeneity(y21):
    profile = build_profile(y21)
    for xi in _reeb_cone_points(y21, profile, 10, seed=1):
        for t in (0.5, 2.0, 3.7):
            assert volume(profile, t * xi) == pytest.approx(t ** -3 * volume(profile, xi),
                                                            rel=1e-10)


@pytest.mark.parametrize('cone', [ypq_cone(2, 1), ypq_cone(5, 2), orthant_cone(3)])
def test_triangulation_independence(cone):
    first, last = build_profile(cone, 'first'), build_profile(cone, 'last')
    for xi in _reeb_cone_points(cone, first, 10, seed=2):
        assert volume(first, xi) == pytest.approx(volume(last, xi), rel=1e-10)


def _slice_points(cone, profile, count, seed):
    gamma = np.asarray(profile.gamma, dtype=float)
    return [xi * profile.dim / (gamma @ xi)
            for xi in _reeb_cone_points(cone, profile, count, seed)]


@pytest.mark.parametrize('cone', [ypq_cone(2, 1), ypq_cone(5, 3), orthant_cone(3)])
def test_volume_is_convex_on_the_slice(cone):
    profile = build_profile(cone)
    gamma = np.asarray(profile.gamma, dtype=float)
    points = _slice_points(cone, profile, 100, seed=3)
    for a, b in zip(points[::2], points[1::2]):
        assert gamma @ a == pytest.approx(profile.dim)
        mid = volume(profile, 0.5 * (a + b))
        assert mid <= 0.5 * (volume(profile, a) + volume(profile, b)) + 1e-12


def test_initial_point_on_slice(y21):
    profile = build_profile(y21)
    x = initial_point(profile, y21.normals)
    assert np.dot(profile.gamma, x) == pytest.approx(3.0)
    assert np.all(profile.pairings(x) > 0)


def test_projected_gradient_is_tangent():
    g = projected_gradient(np.array([1.0, 2.0, 3.0]), (1, 0, 0))
    np.testing.assert_allclose(g, [0.0, 2.0, 3.0])
