import io
import os
import shutil
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

from visionsafety import (
    CONTINUE, EXIT_CONTINUE, EXIT_ERROR, EXIT_STOPPED, PROTECTIVE_STOP, PipelineDecision)
from visionsafety.audit import read_audit_log
from visionsafety.cli import frame_pairs, main
from visionsafety.monitor import load_latch, save_latch
from visionsafety.pipeline.config import ConfigError

CONFIG = os.path.join(os.path.dirname(__file__), '..', 'config')
PIPELINE = os.path.join(CONFIG, 'pipeline.yaml')
RULES = os.path.join(CONFIG, 'safety.rules')
SCENE = os.path.join(CONFIG, 'scene.yaml')


class TestCli(unittest.TestCase):

    def setUp(self):
        self.directory = tempfile.mkdtemp()
        self.log = os.path.join(self.directory, 'audit.log')

    def tearDown(self):
        shutil.rmtree(self.directory)

    def invoke(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            status = main(list(argv))
        return status, out.getvalue(), err.getvalue()

    def write_rules(self, text):
        path = os.path.join(self.directory, 'test.rules')
        with open(path, 'w') as handle:
            handle.write(text)
        return path

    def run_synthetic(self, *extra):
        return self.invoke('run', '--rules', RULES, '--pipeline', PIPELINE,
                           '--synthetic', SCENE, '--log', self.log, '--no-timestamp', *extra)

    def test_check(self):
        status, out, _ = self.invoke('check', '--rules', RULES, '--pipeline', PIPELINE)
        self.assertEqual(status, EXIT_CONTINUE)
        self.assertEqual(out.strip(), '3 rules compiled')

    def test_check_unknown_component(self):
        path = self.write_rules('length(Nonexistent.output)>1;\n')
        status, _, err = self.invoke('check', '--rules', path, '--pipeline', PIPELINE)
        self.assertEqual(status, EXIT_ERROR)
        self.assertIn('{}:1:8: UnknownIdentifier:'.format(path), err)

    def test_check_syntax_error(self):
        path = self.write_rules('h = ;\n')
        status, _, err = self.invoke('check', '--rules', path, '--pipeline', PIPELINE)
        self.assertEqual(status, EXIT_ERROR)
        self.assertIn(':1:5: ParseError:', err)

    def test_check_empty_rules(self):
        path = self.write_rules('# nothing yet\n')
        status, out, _ = self.invoke('check', '--rules', path, '--pipeline', PIPELINE)
        self.assertEqual(status, EXIT_CONTINUE)
        self.assertEqual(out.strip(), '0 rules compiled')

    def test_run_clean(self):
        status, out, _ = self.run_synthetic('--frames', '10')
        self.assertEqual(status, EXIT_CONTINUE)
        self.assertTrue(out.rstrip().endswith('decision CONTINUE'))
        entries = read_audit_log(self.log)
        self.assertEqual(len(entries), 40)
        self.assertEqual(entries[-1].frame_id, 9)
        self.assertIsNone(entries[0].timestamp)

    def test_run_reproducible(self):
        self.run_synthetic('--frames', '2', '--inject', 'overexpose:right')
        first = self.log
        self.log = os.path.join(self.directory, 'again.log')
        self.run_synthetic('--frames', '2', '--inject', 'overexpose:right')
        with open(first) as one, open(self.log) as two:
            self.assertEqual(one.read(), two.read())

    def test_run_covered(self):
        status, out, _ = self.run_synthetic('--inject', 'cover:left', '--bit-depth', '8')
        self.assertEqual(status, EXIT_STOPPED)
        self.assertIn('frame 0 R1 FAIL', out)
        self.assertIn('frame 0 PROTECTIVE_STOP', out)
        self.assertEqual(load_latch(self.log + '.latch').state, PROTECTIVE_STOP)

    def test_latch_survives_restart(self):
        self.run_synthetic('--inject', 'overexpose:left')
        status, _, _ = self.run_synthetic()
        self.assertEqual(status, EXIT_STOPPED)
        status, _, _ = self.run_synthetic('--reset')
        self.assertEqual(status, EXIT_CONTINUE)
        entries = read_audit_log(self.log)
        self.assertEqual([e.frame_id for e in entries if e.kind == 'DECISION'], [0, 0, 0])

    def test_bad_frame_rejected_before_loop(self):
        frames = os.path.join(self.directory, 'frames')
        self.invoke('render', '--pipeline', PIPELINE, '--synthetic', SCENE,
                    '--output', frames, '--frames', '2', '--inject', 'cover:left')
        with open(os.path.join(frames, '0001_L.pgm'), 'wb') as handle:
            handle.write(b'P5\n')
        latch = os.path.join(self.directory, 'stop.latch')
        stopped = PipelineDecision(PROTECTIVE_STOP, ((4, 'R2'),))
        save_latch(latch, stopped)
        status, out, err = self.invoke('run', '--rules', RULES, '--pipeline', PIPELINE,
                                       '--input', frames, '--latch', latch)
        self.assertEqual(status, EXIT_ERROR)
        self.assertIn('truncated PGM header', err)
        self.assertNotIn('frame 0', out)
        self.assertEqual(load_latch(latch), stopped)

    def test_latch_saved_when_loop_fails(self):
        latch = os.path.join(self.directory, 'stop.latch')
        status, out, err = self.invoke('run', '--rules', RULES, '--pipeline', PIPELINE,
                                       '--synthetic', SCENE, '--frames', '3',
                                       '--inject', 'cover:left', '--log', self.directory,
                                       '--latch', latch)
        self.assertEqual(status, EXIT_STOPPED)
        self.assertIn('error:', err)
        self.assertTrue(out.rstrip().endswith('decision PROTECTIVE_STOP'))
        self.assertEqual(load_latch(latch).tripped_by[0], (0, 'R1'))
        status, _, _ = self.run_synthetic('--latch', latch)
        self.assertEqual(status, EXIT_STOPPED)

    def test_loop_failure_before_stop(self):
        latch = os.path.join(self.directory, 'stop.latch')
        status, _, _ = self.invoke('run', '--rules', RULES, '--pipeline', PIPELINE,
                                   '--synthetic', SCENE, '--log', self.directory,
                                   '--latch', latch)
        self.assertEqual(status, EXIT_ERROR)
        self.assertEqual(load_latch(latch).state, CONTINUE)

    def test_bad_landmark_document(self):
        scene = os.path.join(self.directory, 'scene.yaml')
        with open(scene, 'w') as handle:
            handle.write('landmark: 0.3\n')
        status, _, err = self.invoke('run', '--rules', RULES, '--pipeline', PIPELINE,
                                     '--synthetic', scene)
        self.assertEqual(status, EXIT_ERROR)
        self.assertIn('error: landmark must be a mapping', err)

    def test_run_partial_cover_not_caught(self):
        status, _, _ = self.run_synthetic('--inject', 'partial_cover:left:0.3')
        self.assertEqual(status, EXIT_CONTINUE)

    def test_run_with_report(self):
        report = os.path.join(self.directory, 'coverage.txt')
        status, _, _ = self.run_synthetic('--frames', '0', '--report', report)
        self.assertEqual(status, EXIT_CONTINUE)
        with open(report) as handle:
            self.assertIn('Protective Stop', handle.read())
        self.assertTrue(os.path.exists(report + '.tsv'))
        self.assertFalse(os.path.exists(self.log))

    def test_report(self):
        status, out, _ = self.invoke('report', '--rules', RULES, '--pipeline', PIPELINE)
        self.assertEqual(status, EXIT_CONTINUE)
        self.assertIn('monitored by R1, R2, R3', out)

    def test_render_then_run_input(self):
        frames = os.path.join(self.directory, 'frames')
        status, out, _ = self.invoke('render', '--pipeline', PIPELINE, '--synthetic', SCENE,
                                     '--output', frames, '--frames', '2',
                                     '--inject', 'cover:left')
        self.assertEqual(status, EXIT_CONTINUE)
        self.assertEqual(len(out.splitlines()), 2)
        self.assertEqual(len(frame_pairs(frames)), 2)
        status, out, _ = self.invoke('run', '--rules', RULES, '--pipeline', PIPELINE,
                                     '--input', frames)
        self.assertEqual(status, EXIT_STOPPED)
        self.assertIn('frame 1 R1 FAIL', out)

    def test_frame_pairs_errors(self):
        with self.assertRaises(ConfigError):
            frame_pairs(os.path.join(self.directory, 'missing'))
        with self.assertRaises(ConfigError):
            frame_pairs(self.directory)
        open(os.path.join(self.directory, '0000_L.pgm'), 'wb').close()
        with self.assertRaises(ConfigError):
            frame_pairs(self.directory)

    def test_usage_errors(self):
        status, _, _ = self.invoke('run', '--rules', RULES, '--pipeline', PIPELINE)
        self.assertEqual(status, EXIT_ERROR)
        status, _, _ = self.invoke('run', '--rules', RULES, '--pipeline', PIPELINE,
                                   '--input', self.directory, '--bit-depth', '8')
        self.assertEqual(status, EXIT_ERROR)
        status, _, _ = self.invoke('launch')
        self.assertEqual(status, EXIT_ERROR)
        status, _, err = self.run_synthetic('--inject', 'smudge:left')
        self.assertEqual(status, EXIT_ERROR)
        self.assertIn('error:', err)

    def test_missing_files(self):
        status, _, _ = self.invoke('check', '--rules', os.path.join(self.directory, 'x.rules'),
                                   '--pipeline', PIPELINE)
        self.assertEqual(status, EXIT_ERROR)
