"""Numerical contact-geometry checks on sampled points of the real link.

Everything is evaluated upstairs in C^d on the K-level set:

    r(z)^2 = sum_j b_j |z_j|^2
    eta_z(X) = Im( sum_j h_j conj(z_j) X_j ) / sum_j h_j |z_j|^2
    omega(X, Y) = sum_j b_j Im( conj(X_j) Y_j )

where h(z) in b + ker(beta) is the representative whose lifted Reeb field is
orthogonal to the K-orbit through z. On mu^-1(0) every representative gives
the same eta on horizontal vectors; h additionally kills K-directions.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from toric_legendrian.errors import NonFlatModelError, ToricError

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
PAIRING_TOL = 1e-9
IMAGINARY_TOL = 1e-12
CALIBRATION_TOL = 1e-9
FLAT_TOL = 1e-6


class DegeneratePointError(ToricError, ValueError):
    """eta requested at a point where r vanishes."""


@dataclass(frozen=True)
class ContactData:
    b: np.ndarray
    kernel: np.ndarray  # d x k, columns span ker(beta)

    @classmethod
    def from_system(cls, system):
        return cls(system.b_array(), system.a_array().T.reshape(system.d, system.k))

    @property
    def d(self):
        return len(self.b)

    @property
    def k(self):
        return self.kernel.shape[1]

    def r2(self, z):
        return float(self.b @ np.abs(np.asarray(z)) ** 2)

    def r(self, z):
        return float(np.sqrt(max(self.r2(z), 0.0)))

    def horizontal_coefficients(self, z):
        if self.k == 0:
            return self.b
        w = np.abs(np.asarray(z)) ** 2
        gram = self.kernel.T @ (w[:, None] * self.kernel)
        c = np.linalg.lstsq(gram, -self.kernel.T @ (w * self.b), rcond=None)[0]
        return self.b + self.kernel @ c


def contact_data(system, coeffs=None):
    """ContactData for a quadric system, optionally with different Reeb coefficients."""
    ctx = ContactData.from_system(system)
    if coeffs is not None:
        ctx = ContactData(coeffs.as_array(), ctx.kernel)
    return ctx


def _pairing(ctx, z, X):
    z = np.asarray(z, dtype=complex)
    X = np.asarray(X, dtype=complex)
    if ctx.r2(z) <= 0:
        raise DegeneratePointError("r vanishes at z")
    h = ctx.horizontal_coefficients(z)
    denom = float(h @ np.abs(z) ** 2)
    if denom <= 0:
        raise DegeneratePointError("horizontal Reeb field degenerates at z")
    return complex(np.sum(h * np.conj(z) * X)) / denom


def eval_eta(ctx, z, X):
    """(d log r (X), eta_z(X)) at a point with r(z) > 0.

    Raises:
        DegeneratePointError: r(z) = 0
    """
    value = _pairing(ctx, z, X)
    return value.real, value.imag


def omega(ctx, X, Y):
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    return float(np.sum(ctx.b * np.imag(np.conj(X) * Y)))


def euler_field(z):
    return np.asarray(z, dtype=complex)


def reeb_field(z):
    """J applied to the Euler field."""
    return 1j * np.asarray(z, dtype=complex)


def k_direction(ctx, z, i):
    """Infinitesimal action of the i-th kernel generator at z."""
    return 1j * ctx.kernel[:, i] * np.asarray(z, dtype=complex)


def numeric_floor(d, scale):
    return np.finfo(float).eps * d * max(1.0, scale)


@dataclass
class CheckOutcome:
    name: str
    max_violation: float
    tolerance: float
    floor: float
    note: str = None

    @property
    def passed(self):
        return self.tolerance >= self.floor and self.max_violation < self.tolerance

    def to_dict(self):
        note = self.note
        if self.tolerance < self.floor:
            note = 'tolerance below numeric floor'
        return {'name': self.name, 'max_violation': self.max_violation,
                'tolerance': self.tolerance, 'floor': self.floor,
                'passed': self.passed, 'note': note}


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    sample_count: int = 0
    seed: int = None
    point_failures: list = field(default_factory=list)

    @property
    def ok(self):
        return all(c.passed for c in self.checks) and not self.point_failures

    def check(self, name):
        return next(c for c in self.checks if c.name == name)

    def merge(self, other):
        """Combine reports over disjoint chunks of one sample set."""
        ours = {c.name: c for c in self.checks}
        merged = []
        for c in self.checks:
            theirs = next((o for o in other.checks if o.name == c.name), None)
            worst = c.max_violation if theirs is None else max(c.max_violation, theirs.max_violation)
            merged.append(CheckOutcome(c.name, worst, c.tolerance, c.floor, c.note))
        merged.extend(o for o in other.checks if o.name not in ours)
        offset = self.sample_count
        failures = self.point_failures + [
            dict(f, index=f['index'] + offset) for f in other.point_failures]
        return VerificationReport(merged, self.sample_count + other.sample_count,
                                  self.seed if self.seed is not None else other.seed, failures)

    def to_dict(self):
        return {'ok': self.ok, 'sample_count': self.sample_count, 'seed': self.seed,
                'checks': [c.to_dict() for c in self.checks],
                'point_failures': self.point_failures}


def _max(values):
    return float(max(values, default=0.0))


def verify_link(system, ctx, samples, residual_tol=RESIDUAL_TOL, pairing_tol=PAIRING_TOL):
    """Contact checks at every sample, with tangent frames from the Jacobian kernel.

    Frames that do not have dimension d - k - 1 are reported per point and
    skipped for the pairing checks.
    """
    points = np.asarray(samples.points, dtype=float)
    d, k = system.d, system.k
    n = d - k - 1
    floor = numeric_floor(d, system.scale())
    worst = {name: [] for name in ('constraint_residual', 'cone_tangency', 'link_level',
                                   'eta_vanishing', 'omega_vanishing',
                                   'reeb_normalization', 'k_annihilation')}
    failures = []
    for index, x in enumerate(points):
        worst['constraint_residual'].append(np.max(np.abs(system.residuals(x))))
        # constraints differentiated along the Euler field x
        tangency = system.jacobian(x)[:k] @ euler_field(x).real
        worst['cone_tangency'].append(np.max(np.abs(tangency), initial=0.0))
        worst['link_level'].append(abs(ctx.r(x) - 1.0))

        frame = null_space(system.jacobian(x))
        if frame.shape[1] != n:
            failures.append({'index': index,
                             'reason': f"tangent frame has dimension {frame.shape[1]}, expected {n}"})
            continue
        try:
            worst['eta_vanishing'].append(
                _max(abs(eval_eta(ctx, x, frame[:, j])[1]) for j in range(n)))
            worst['reeb_normalization'].append(abs(eval_eta(ctx, x, reeb_field(x))[1] - 1.0))
            worst['k_annihilation'].append(
                _max(abs(eval_eta(ctx, x, k_direction(ctx, x, i))[1]) for i in range(k)))
        except DegeneratePointError as e:
            failures.append({'index': index, 'reason': str(e)})
            continue
        worst['omega_vanishing'].append(
            _max(abs(omega(ctx, frame[:, i], frame[:, j]))
                 for i in range(n) for j in range(i + 1, n)))

    tolerances = {'constraint_residual': residual_tol, 'cone_tangency': residual_tol,
                  'link_level': residual_tol}
    checks = [CheckOutcome(name, _max(values), tolerances.get(name, pairing_tol), floor)
              for name, values in worst.items()]
    report = VerificationReport(checks, len(points), samples.seed, failures)
    logger.info("verified %d points: %s", len(points), 'pass' if report.ok else 'FAIL')
    return report


def flat_frame(x):
    """Orthonormal real frame {x/|x|, tangent basis of the sphere at x}."""
    x = np.asarray(x, dtype=float)
    return np.column_stack([x / np.linalg.norm(x), null_space(x[None, :])])


def holomorphic_volume(frame):
    """dz_1 ^ ... ^ dz_{n+1} evaluated on the columns of ``frame``."""
    return complex(np.linalg.det(np.asarray(frame, dtype=complex)))


def frame_volume(frame):
    """Real (n+1)-volume of the frame viewed in R^{2(n+1)}."""
    frame = np.asarray(frame, dtype=complex)
    gram = np.real(frame.conj().T @ frame)
    return float(np.sqrt(max(np.linalg.det(gram), 0.0)))


def calibration_defect(frame):
    return abs(abs(holomorphic_volume(frame).real) - frame_volume(frame))


def _require_flat(n, system):
    if system.k != 0:
        raise NonFlatModelError(f"flat model needs a trivial quotient, got k = {system.k}")
    if system.d != n + 1:
        raise NonFlatModelError(f"flat model lives in C^{n + 1}, system has d = {system.d}")
    if not np.allclose(system.b_array(), 1.0, rtol=0.0, atol=FLAT_TOL):
        raise NonFlatModelError(f"flat model needs b = (1, ..., 1), got {list(system.b)}")


def verify_flat_special(n, samples, imaginary_tol=IMAGINARY_TOL,
                        calibration_tol=CALIBRATION_TOL, frames=None, system=None):
    """Im Omega and the calibration equality on cone frames over sphere samples.

    ``frames`` may map a point to a custom frame; the default is flat_frame.
    ``system`` defaults to the quadric system the samples were drawn from.

    Raises:
        NonFlatModelError: the samples do not come from the round sphere in C^{n+1}
    """
    points = np.asarray(samples.points, dtype=float)
    if points.ndim != 2 or points.shape[1] != n + 1:
        raise NonFlatModelError(f"flat model needs points in R^{n + 1}, got shape {points.shape}")
    system = system if system is not None else samples.system
    if system is not None:
        _require_flat(n, system)
    frames = frames or flat_frame
    floor = numeric_floor(n + 1, 1.0)
    sphere, imaginary, calibration = [], [], []
    for x in points:
        sphere.append(abs(np.linalg.norm(x) - 1.0))
        frame = frames(x)
        imaginary.append(abs(holomorphic_volume(frame).imag))
        calibration.append(calibration_defect(frame))
    checks = [
        CheckOutcome('sphere_level', _max(sphere), RESIDUAL_TOL, floor),
        CheckOutcome('imaginary_volume', _max(imaginary), imaginary_tol, floor),
        CheckOutcome('calibration', _max(calibration), calibration_tol, floor),
    ]
    report = VerificationReport(checks, len(points), samples.seed)
    logger.info("flat special check on %d points: %s", len(points), 'pass' if report.ok else 'FAIL')
    return report
