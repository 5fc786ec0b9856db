import pytest

from toric_legendrian.cone import (ConeSpec, dual_rays, face_lattice, gorenstein_vector,
                                   match_ypq, orthant_cone, reeb_cone_contains, require_valid,
                                   validate, xi0, ypq_cone)
from toric_legendrian.errors import (ConeValidationError, DegenerateConeError,
                                     InvalidParametersError, LatticeError)


def test_orthant_is_valid(orthant3):
    report = validate(orthant3)
    assert report.ok
    assert [c.name for c in report.checks] == ['dimension', 'primitive', 'strongly_convex',
                                               'minimal', 'good']


@pytest.mark.parametrize('p,q', [(2, 1), (3, 1), (3, 2), (5, 3), (7, 4)])
def test_ypq_cones_are_valid(p, q):
    assert validate(ypq_cone(p, q)).ok


def test_non_primitive_normal_has_witness():
    cone = ConeSpec(3, ((1, 0, 0), (0, 1, 0), (2, 4, 6)))
    report = validate(cone)
    assert not report.ok
    assert 'not primitive' in report.check('primitive').witness


def test_cone_containing_a_line():
    report = validate(ConeSpec(3, ((1, 0, 0), (0, 1, 0), (1, 1, 0))))
    assert not report.check('strongly_convex').passed


def test_empty_interior_is_degenerate():
    with pytest.raises(DegenerateConeError):
        dual_rays(ConeSpec(2, ((1, 0), (-1, 0), (0, 1))))


def test_redundant_normal_fails_minimality():
    cone = ConeSpec(3, ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0)))
    report = validate(cone)
    assert not report.check('minimal').passed
    assert 'normal 3' in report.check('minimal').witness


def test_non_saturated_edge_fails_goodness():
    cone = ConeSpec(3, ((1, 0, 1), (1, 0, -1), (0, 1, 0)))
    report = validate(cone)
    assert report.check('strongly_convex').passed
    assert not report.check('good').passed
    assert 'non-saturated' in report.check('good').witness


def test_too_many_normals():
    normals = tuple((1, i, i * i) for i in range(17))
    report = validate(ConeSpec(3, normals), max_normals=16)
    assert not report.check('dimension').passed


def test_require_valid_carries_report():
    with pytest.raises(ConeValidationError) as info:
        require_valid(ConeSpec(3, ((1, 0, 0), (0, 1, 0), (2, 4, 6))))
    assert not info.value.report.ok


def test_cone_spec_rejects_wrong_length():
    with pytest.raises(LatticeError):
        ConeSpec(3, ((1, 0),))


def test_ypq_rays(y21):
    assert dual_rays(y21).rays == ((0, 0, 1), (0, 1, 0), (2, -2, 1), (2, 1, -2))


def test_ypq_face_lattice(y21):
    faces = face_lattice(y21).faces
    dims = sorted(f.dim for f in faces)
    assert dims == [1, 1, 1, 1, 2, 2, 2, 2, 3]
    assert faces[0].normals == ()


def test_gorenstein_vector(y21, orthant3):
    assert gorenstein_vector(y21) == (1, 0, 0)
    assert gorenstein_vector(orthant3) == (1, 1, 1)
    assert gorenstein_vector(ConeSpec(2, ((2, 1), (1, 2)))) is None


def test_xi0_lies_in_reeb_cone(y21):
    assert xi0(y21) == (3, 2, 3)
    assert reeb_cone_contains(y21, xi0(y21))
    assert not reeb_cone_contains(y21, (0, 1, 1))


def test_ypq_parameters():
    assert ypq_cone(2, 1).normals == ((1, 0, 0), (1, 0, 1), (1, 2, 2), (1, 1, 0))
    assert ypq_cone(3, 2).normals == ((1, 0, 0), (1, 0, 1), (1, 3, 3), (1, 1, 0))
    for p, q in [(2, 2), (1, 2), (4, 2), (3, 0)]:
        with pytest.raises(InvalidParametersError):
            ypq_cone(p, q)


def test_match_ypq(orthant3):
    assert match_ypq(ypq_cone(3, 2)) == (3, 2)
    assert match_ypq(orthant_cone(3)) is None


@pytest.mark.parametrize('dim', [2, 3, 4, 5, 6])
def test_orthants_are_valid_in_every_dimension(dim):
    assert validate(orthant_cone(dim)).ok


@pytest.mark.parametrize('cone', [
    ypq_cone(2, 1), ypq_cone(5, 2), ypq_cone(7, 6), orthant_cone(4),
    ConeSpec(3, ((1, 0, 0), (1, 1, 0), (1, 0, 1), (1, 1, 1))),
], ids=lambda cone: cone.name or str(cone.normals))
def test_dual_of_the_ray_cone_recovers_the_normals(cone):
    rays = dual_rays(cone).rays
    recovered = dual_rays(ConeSpec(cone.dim, rays)).rays
    assert set(recovered) == set(cone.normals)


UNIMODULAR = [
    ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    ((1, 0, 0), (2, 1, 0), (1, 3, 1)),
    ((1, 1, 0), (0, 1, 1), (0, 0, 1)),
    ((2, 1, 0), (1, 1, 0), (0, 0, 1)),
]


@pytest.mark.parametrize('p,q', [(2, 1), (3, 2), (5, 3)])
@pytest.mark.parametrize('U', UNIMODULAR)
def test_gorenstein_vector_pairs_to_one(p, q, U):
    normals = tuple(tuple(sum(u * e for u, e in zip(row, v)) for row in U)
                    for v in ypq_cone(p, q).normals)
    cone = ConeSpec(3, normals)
    gamma = gorenstein_vector(cone)
    assert gamma is not None
    assert all(sum(g * e for g, e in zip(gamma, v)) == 1 for v in cone.normals)
