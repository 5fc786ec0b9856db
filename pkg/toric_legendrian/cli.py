"""Command line interface: validate, ypq and pipeline.

Exit codes: 0 success, 1 validation or verification failure, 2 input error,
3 numeric failure.
"""
import json
from dataclasses import dataclass
from pathlib import Path

import click
from flask import current_app
from flask.cli import with_appcontext

from toric_legendrian import __version__
from toric_legendrian.cone import (ConeSpec, dual_rays, match_ypq, reeb_cone_contains,
                                   validate, xi0, ypq_cone)
from toric_legendrian.delzant import (build, cross_check_deck, deck_group, printed_parity_table,
                                      reeb_coefficients, table_agreement)
from toric_legendrian.errors import (ConeFileError, ConvergenceError, InfeasibleSystemError,
                                     InvalidParametersError, LatticeError, SamplerError,
                                     UnsupportedConeError, VolumeDivergenceError)
from toric_legendrian.export import dumps, export_report_to_json, write_samples
from toric_legendrian.reallink import build_system, classify_ypq, sample
from toric_legendrian.reeb import minimize, ypq_reeb
from toric_legendrian.verifier import contact_data, verify_flat_special, verify_link

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3

INPUT_ERRORS = (ConeFileError, InvalidParametersError, UnsupportedConeError)
NUMERIC_ERRORS = (ConvergenceError, InfeasibleSystemError, SamplerError, VolumeDivergenceError)


def _parse_int(value, where):
    if isinstance(value, bool):
        raise ConeFileError(f"{where}: expected an integer, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            return int(value)
        except ValueError:
            pass
    raise ConeFileError(f"{where}: expected an integer, got {value!r}")


def parse_cone(document):
    """ConeSpec from a decoded cone file {"dim", "normals", "name"?}."""
    if not isinstance(document, dict):
        raise ConeFileError("cone file must hold a JSON object")
    missing = [key for key in ('dim', 'normals') if key not in document]
    if missing:
        raise ConeFileError(f"cone file is missing {', '.join(missing)}")
    dim = _parse_int(document['dim'], 'dim')
    normals = document['normals']
    if not isinstance(normals, list) or not all(isinstance(v, list) for v in normals):
        raise ConeFileError("normals must be a list of integer lists")
    parsed = [tuple(_parse_int(e, f"normals[{i}]") for e in v) for i, v in enumerate(normals)]
    name = document.get('name')
    if name is not None and not isinstance(name, str):
        raise ConeFileError("name must be a string")
    try:
        return ConeSpec(dim, tuple(parsed), name)
    except LatticeError as e:
        raise ConeFileError(str(e)) from e


def load_cone_file(path):
    try:
        document = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConeFileError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConeFileError(f"{path} is not valid JSON: {e}") from e
    return parse_cone(document)


def cone_to_dict(cone):
    data = {'dim': cone.dim, 'normals': [list(v) for v in cone.normals]}
    if cone.name is not None:
        data['name'] = cone.name
    return data


@dataclass
class RunReport:
    seed: int
    cone: dict = None
    validation: dict = None
    delzant: dict = None
    reeb: dict = None
    quadric_system: dict = None
    deck_group: dict = None
    samples: dict = None
    topology: dict = None
    verification: dict = None
    flat_special: dict = None
    status: str = 'incomplete'
    error: dict = None
    tool_version: str = __version__

    def to_dict(self):
        data = {'tool_version': self.tool_version, 'seed': self.seed, 'status': self.status}
        for key in ('cone', 'validation', 'delzant', 'reeb', 'quadric_system', 'deck_group',
                    'samples', 'topology', 'verification', 'flat_special', 'error'):
            value = getattr(self, key)
            if value is not None:
                data[key] = value
        return data


def _finish(report, code):
    click.echo(export_report_to_json(report))
    click.get_current_context().exit(code)


def _fail(report, stage, error, code):
    current_app.logger.error("%s stage failed: %s", stage, error)
    report.status = 'error'
    report.error = {'stage': stage, 'type': type(error).__name__, 'message': str(error)}
    _finish(report, code)


@click.command('validate')
@click.argument('path')
@with_appcontext
def validate_command(path):
    """Check that the cone in PATH is primitive, minimal, strongly convex and good."""
    try:
        cone = load_cone_file(path)
    except ConeFileError as e:
        current_app.logger.error("cannot load cone: %s", e)
        click.echo(dumps({'error': str(e)}))
        click.get_current_context().exit(EXIT_INPUT)
    report = validate(cone, max_normals=current_app.config['MAX_NORMALS'])
    click.echo(dumps({'cone': cone_to_dict(cone), 'validation': report.to_dict()}))
    click.get_current_context().exit(EXIT_OK if report.ok else EXIT_FAILED)


@click.command('ypq')
@click.argument('p', type=int)
@click.argument('q', type=int)
@click.option('--output', '-o', default=None, help='Write the cone file here instead of stdout.')
@with_appcontext
def ypq_command(p, q, output):
    """Emit the cone file of Y^{P,Q}."""
    try:
        cone = ypq_cone(p, q)
    except InvalidParametersError as e:
        current_app.logger.error("invalid parameters: %s", e)
        click.echo(dumps({'error': str(e)}))
        click.get_current_context().exit(EXIT_INPUT)
    text = dumps(cone_to_dict(cone))
    if output:
        Path(output).write_text(text + '\n')
        current_app.logger.info("wrote %s to %s", cone.name, output)
    else:
        click.echo(text)


def _reeb_stage(cone, mode, report):
    config = current_app.config
    pq = match_ypq(cone)
    if mode == 'closed':
        if pq is None:
            raise UnsupportedConeError("closed-form Reeb vector is only known for Y^{p,q}")
        solution = ypq_reeb(*pq)
    else:
        solution = minimize(cone, tol=config['MINIMIZER_TOL'],
                            max_iter=config['MINIMIZER_MAX_ITER'],
                            log_every=config['MINIMIZER_LOG_EVERY'])
    start = xi0(cone)
    report.reeb = dict(solution.to_dict(), xi0={
        'xi': list(start), 'in_reeb_cone': reeb_cone_contains(cone, start)})
    return solution, pq


@click.command('pipeline')
@click.argument('path')
@click.option('--reeb', 'reeb_mode', type=click.Choice(['closed', 'minimize']),
              default='minimize', show_default=True)
@click.option('--samples', 'count', type=int, default=None, help='Number of link samples.')
@click.option('--seed', type=int, default=None, help='Sampler seed.')
@click.option('--tol', type=float, default=None, help='Override every verification tolerance.')
@click.option('--export', 'export_path', default=None,
              help='Write the samples to this file (CSV if it ends in .csv, else JSON).')
@with_appcontext
def pipeline_command(path, reeb_mode, count, seed, tol, export_path):
    """Run validate, quotient data, Reeb vector, real link sampling and verification."""
    config = current_app.config
    logger = current_app.logger
    seed = config['DEFAULT_SEED'] if seed is None else seed
    count = config['DEFAULT_SAMPLES'] if count is None else count
    report = RunReport(seed=seed)

    try:
        cone = load_cone_file(path)
    except ConeFileError as e:
        return _fail(report, 'load', e, EXIT_INPUT)
    report.cone = cone_to_dict(cone)

    validation = validate(cone, max_normals=config['MAX_NORMALS'])
    report.validation = validation.to_dict()
    if not validation.ok:
        logger.error("cone failed validation: %s", [c.name for c in validation.failures()])
        report.status = 'invalid'
        return _finish(report, EXIT_FAILED)
    logger.info("validated %s with %d rays", cone.name or path, len(dual_rays(cone)))

    stage = 'delzant'
    try:
        data = build(cone)
        report.delzant = data.to_dict()

        stage = 'reeb'
        solution, pq = _reeb_stage(cone, reeb_mode, report)
        coeffs = reeb_coefficients(data, solution.xi)

        stage = 'reallink'
        system = build_system(data, coeffs)
        report.quadric_system = system.to_dict()
        deck = deck_group(data)
        report.deck_group = dict(deck.to_dict(), cross_check=cross_check_deck(data))
        if pq is not None:
            report.deck_group['printed_table'] = printed_parity_table(*pq).labels()
            report.deck_group['paper_table_agreement'] = table_agreement(deck, *pq)
        samples = sample(system, count, seed, chains=config['SAMPLER_CHAINS'],
                         burn_in=config['SAMPLER_BURN_IN'], thin=config['SAMPLER_THIN'],
                         workers=config['WORKERS'])
        report.samples = samples.to_dict()
        if export_path:
            write_samples(export_path, samples, system)
            logger.info("exported %d samples to %s", len(samples), export_path)
        report.topology = classify_ypq(system, deck, samples).to_dict()

        stage = 'verifier'
        residual_tol = config['RESIDUAL_TOL'] if tol is None else tol
        pairing_tol = config['PAIRING_TOL'] if tol is None else tol
        verification = verify_link(system, contact_data(system), samples,
                                   residual_tol=residual_tol, pairing_tol=pairing_tol)
        report.verification = verification.to_dict()
        passed = verification.ok
        if system.k == 0:
            flat = verify_flat_special(system.d - 1, samples,
                                       imaginary_tol=1e-12 if tol is None else tol,
                                       calibration_tol=config['CALIBRATION_TOL'] if tol is None else tol,
                                       system=system)
            report.flat_special = flat.to_dict()
            passed = passed and flat.ok
    except INPUT_ERRORS as e:
        return _fail(report, stage, e, EXIT_INPUT)
    except NUMERIC_ERRORS as e:
        return _fail(report, stage, e, EXIT_NUMERIC)

    report.status = 'pass' if passed else 'fail'
    logger.info("pipeline finished: %s", report.status)
    _finish(report, EXIT_OK if passed else EXIT_FAILED)
