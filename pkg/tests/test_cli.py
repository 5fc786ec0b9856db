import json
import os
import re
import shutil
import tempfile
import unittest

from toric_legendrian import __version__, create_app


def report_of(result):
    """Decode the JSON document in the command output, skipping any log lines."""
    match = re.search(r'^\{$', result.output, re.MULTILINE)
    return json.loads(result.output[match.start():])


class CliTestCase(unittest.TestCase):
    def setUp(self):
        self.app = create_app('testing')
        self.runner = self.app.test_cli_runner()
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def write_cone(self, document, name='cone.json'):
        path = os.path.join(self.tmp, name)
        with open(path, 'w') as f:
            f.write(document if isinstance(document, str) else json.dumps(document))
        return path

    def invoke(self, *args):
        return self.runner.invoke(args=list(args))


class ValidateCommandCase(CliTestCase):
    def test_orthant_is_valid(self):
        path = self.write_cone({'dim': 3, 'normals': [[1, 0, 0], [0, 1, 0], [0, 0, 1]]})
        result = self.invoke('validate', path)
        self.assertEqual(result.exit_code, 0)
        self.assertTrue(report_of(result)['validation']['ok'])

    def test_ypq_is_valid(self):
        path = self.write_cone({'dim': 3, 'normals': [[1, 0, 0], [1, 0, 1], [1, 2, 2], [1, 1, 0]],
                                'name': 'Y^{2,1}'})
        result = self.invoke('validate', path)
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(report_of(result)['cone']['name'], 'Y^{2,1}')

    def test_non_primitive_normal(self):
        path = self.write_cone({'dim': 3, 'normals': [[1, 0, 0], [0, 1, 0], [2, 4, 6]]})
        result = self.invoke('validate', path)
        self.assertEqual(result.exit_code, 1)
        self.assertIn('not primitive', result.output)

    def test_parse_errors(self):
        for document in ('{"dim": 3', {'dim': 3}, {'dim': 3, 'normals': [[1, 0]]},
                         {'dim': 'x', 'normals': []}, {'dim': 2, 'normals': [[1, True]]}):
            result = self.invoke('validate', self.write_cone(document))
            self.assertEqual(result.exit_code, 2, document)

    def test_missing_file(self):
        result = self.invoke('validate', os.path.join(self.tmp, 'absent.json'))
        self.assertEqual(result.exit_code, 2)

    def test_string_integers_are_accepted(self):
        path = self.write_cone({'dim': '2', 'normals': [['1', '0'], [0, 1]]})
        self.assertEqual(self.invoke('validate', path).exit_code, 0)


class YpqCommandCase(CliTestCase):
    def test_y21(self):
        result = self.invoke('ypq', '2', '1')
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(report_of(result)['normals'], [[1, 0, 0], [1, 0, 1], [1, 2, 2], [1, 1, 0]])

    def test_y32_to_file(self):
        path = os.path.join(self.tmp, 'y32.json')
        result = self.invoke('ypq', '3', '2', '--output', path)
        self.assertEqual(result.exit_code, 0)
        with open(path) as f:
            cone = json.load(f)
        self.assertEqual(cone['normals'], [[1, 0, 0], [1, 0, 1], [1, 3, 3], [1, 1, 0]])
        self.assertEqual(self.invoke('validate', path).exit_code, 0)

    def test_not_coprime(self):
        self.assertEqual(self.invoke('ypq', '2', '2').exit_code, 2)


class PipelineCommandCase(CliTestCase):
    def setUp(self):
        super().setUp()
        self.ypq_path = os.path.join(self.tmp, 'y21.json')
        self.invoke('ypq', '2', '1', '--output', self.ypq_path)
        self.orthant_path = self.write_cone(
            {'dim': 3, 'normals': [[1, 0, 0], [0, 1, 0], [0, 0, 1]], 'name': 'orthant'},
            name='orthant.json')

    def test_ypq_closed_form_run(self):
        result = self.invoke('pipeline', self.ypq_path, '--reeb', 'closed',
                             '--samples', '500', '--seed', '7')
        self.assertEqual(result.exit_code, 0)
        report = report_of(result)
        self.assertEqual(report['status'], 'pass')
        self.assertEqual(report['tool_version'], __version__)
        self.assertEqual(report['seed'], 7)
        self.assertEqual(report['reeb']['provenance'], 'closed_form')
        self.assertTrue(report['reeb']['xi0']['in_reeb_cone'])
        self.assertEqual(report['deck_group']['elements'], ['0000', '1010'])
        self.assertTrue(report['deck_group']['cross_check']['agree'])
        self.assertFalse(report['deck_group']['paper_table_agreement'])
        self.assertEqual(report['topology']['quotient'], 'torus')
        self.assertEqual(report['samples']['count'], 500)
        self.assertTrue(report['verification']['ok'])
        self.assertNotIn('flat_special', report)

    def test_flat_model_run(self):
        result = self.invoke('pipeline', self.orthant_path)
        self.assertEqual(result.exit_code, 0)
        report = report_of(result)
        self.assertEqual(report['reeb']['provenance'], 'minimized')
        self.assertTrue(report['flat_special']['ok'])
        self.assertEqual(report['topology']['upstairs'], 'S^2')

    def test_report_keeps_stage_order(self):
        result = self.invoke('pipeline', self.ypq_path, '--reeb', 'closed', '--samples', '50')
        keys = list(report_of(result))
        self.assertEqual(keys[:3], ['tool_version', 'seed', 'status'])
        self.assertLess(keys.index('delzant'), keys.index('verification'))
        self.assertEqual(report_of(result)['delzant']['kernel_basis'], [[-3], [2], [-1], [2]])

    def test_tolerance_below_floor(self):
        result = self.invoke('pipeline', self.ypq_path, '--reeb', 'closed', '--tol', '1e-15')
        self.assertEqual(result.exit_code, 1)
        self.assertEqual(report_of(result)['status'], 'fail')

    def test_closed_form_needs_ypq(self):
        result = self.invoke('pipeline', self.orthant_path, '--reeb', 'closed')
        self.assertEqual(result.exit_code, 2)
        report = report_of(result)
        self.assertEqual(report['error']['stage'], 'reeb')
        self.assertIn('validation', report)

    def test_invalid_cone(self):
        path = self.write_cone({'dim': 3, 'normals': [[1, 0, 0], [0, 1, 0], [2, 4, 6]]})
        result = self.invoke('pipeline', path)
        self.assertEqual(result.exit_code, 1)
        self.assertEqual(report_of(result)['status'], 'invalid')

    def test_unreadable_cone(self):
        result = self.invoke('pipeline', self.write_cone('not json'))
        self.assertEqual(result.exit_code, 2)

    def test_report_bytes_are_reproducible(self):
        args = ('pipeline', self.ypq_path, '--samples', '200', '--seed', '3')
        first, second = self.invoke(*args), self.invoke(*args)
        self.assertEqual(first.exit_code, 0)
        self.assertEqual(first.output, second.output)

    def test_worker_count_does_not_change_the_report(self):
        args = ('pipeline', self.ypq_path, '--reeb', 'closed', '--samples', '120')
        serial = self.invoke(*args).output
        self.app.config['WORKERS'] = 4
        self.assertEqual(self.invoke(*args).output, serial)

    def test_export_csv(self):
        path = os.path.join(self.tmp, 'samples.csv')
        result = self.invoke('pipeline', self.ypq_path, '--reeb', 'closed', '--samples', '50',
                             '--export', path)
        self.assertEqual(result.exit_code, 0)
        with open(path) as f:
            lines = f.read().splitlines()
        self.assertTrue(lines[0].startswith('# seed='))
        self.assertEqual(lines[1], 'x1,x2,x3,x4,jacobian_rank,residual')
        self.assertEqual(len(lines), 52)


if __name__ == '__main__':
    unittest.main(verbosity=2)
