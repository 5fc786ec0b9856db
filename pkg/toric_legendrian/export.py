"""Export service for sample sets and run reports (CSV and JSON)."""
import json
from io import StringIO
from pathlib import Path

import pandas as pd

SAFE_INT = 2 ** 53


def _jsonable(value):
    """Plain JSON types; integers beyond 2^53 become strings."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if hasattr(value, 'tolist'):
        return _jsonable(value.tolist())
    if isinstance(value, int):
        return str(value) if abs(value) > SAFE_INT else value
    if isinstance(value, float):
        return value
    return str(value)


def dumps(data):
    return json.dumps(_jsonable(data), indent=2)


def _samples_frame(samples, system=None):
    points = samples.points
    df = pd.DataFrame(points, columns=[f"x{j + 1}" for j in range(points.shape[1])])
    if samples.jacobian_ranks:
        df['jacobian_rank'] = list(samples.jacobian_ranks)
    if system is not None:
        df['residual'] = [float(abs(system.residuals(x)).max()) for x in points]
    return df


def export_samples_to_csv(samples, system=None):
    """
    Export a SampleSet to CSV.

    Args:
        samples: SampleSet
        system: optional QuadricSystem, adds a per-point residual column

    Returns:
        CSV string, one row per point
    """
    output = StringIO()
    output.write(f'# seed={samples.seed} chains={samples.chains}\n')
    _samples_frame(samples, system).to_csv(output, index=False)
    return output.getvalue()


def export_samples_to_json(samples, system=None):
    """
    Export a SampleSet to JSON.

    Returns:
        JSON string with the sampler summary and the points
    """
    result = samples.to_dict()
    result['points'] = samples.points.tolist()
    if system is not None:
        result['system'] = system.to_dict()
    return dumps(result)


def export_report_to_json(report):
    return dumps(report.to_dict() if hasattr(report, 'to_dict') else report)


def write_samples(path, samples, system=None):
    """Write samples to ``path``; CSV when the suffix is .csv, JSON otherwise."""
    path = Path(path)
    if path.suffix.lower() == '.csv':
        data = export_samples_to_csv(samples, system)
    else:
        data = export_samples_to_json(samples, system)
    path.write_text(data)
    return path
