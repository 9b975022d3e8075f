import math
import os
import tempfile

import numpy as np
from django.test import SimpleTestCase

from hitchplan.conf import planner_config
from hitchplan.exceptions import DomainError, ScenarioError
from hitchplan.kinematics import TrailerGeometry, TrailerSystem
from hitchplan.planner import PlanReport, plan_dubins, plan_repark
from hitchplan.services.export import (read_trajectory_csv, replay, replay_file, stored_endpoint,
                                       write_trajectory_csv)
from hitchplan.services.figures import emit_figure, hitch_and_axle
from hitchplan.services.scenarios import load_scenario, parse_scenario

VALID = """{
  "name": "short trailer",
  "l_r": 0.0,
  "l_t": 2.0,
  "q0": [0, 0, 0, 0.7853981633974483],
  "q1": [0, 0, 0, 1.5707963267948966],
  "tol": 0.001,
  "alpha": 1.0
}
"""


class ScenarioTests(SimpleTestCase):

    def test_valid(self):
        scenario = parse_scenario(VALID)
        self.assertEqual(scenario.name, 'short trailer')
        self.assertEqual(scenario.geometry, TrailerGeometry(0.0, 2.0))
        self.assertEqual(scenario.q1[3], math.pi / 2)
        self.assertEqual(scenario.alpha, 1.0)
        self.assertIsNone(scenario.max_iter)

    def test_alpha_search(self):
        self.assertEqual(parse_scenario('{"l_r": 1, "l_t": 5, "alpha": "search"}').alpha, 'search')

    def test_invalid_json_reports_line(self):
        with self.assertRaises(ScenarioError) as ctx:
            parse_scenario('{\n  "l_r": 1,\n  "l_t": ,\n}')
        self.assertEqual(ctx.exception.line, 3)
        self.assertIn('line 3', str(ctx.exception))

    def test_missing_field(self):
        with self.assertRaises(ScenarioError) as ctx:
            parse_scenario('{"l_r": 1}')
        self.assertEqual(ctx.exception.field, 'l_t')

    def test_unknown_field(self):
        with self.assertRaises(ScenarioError) as ctx:
            parse_scenario('{\n  "l_r": 1,\n  "l_t": 2,\n  "speed": 3\n}')
        self.assertEqual(ctx.exception.field, 'speed')
        self.assertEqual(ctx.exception.line, 4)

    def test_bad_vector(self):
        with self.assertRaises(ScenarioError) as ctx:
            parse_scenario('{\n  "l_r": 1,\n  "l_t": 2,\n  "q0": [0, 0, 0]\n}')
        self.assertEqual((ctx.exception.field, ctx.exception.line), ('q0', 4))

    def test_bad_numbers(self):
        for text, field in (('{"l_r": -1, "l_t": 2}', 'l_r'),
                            ('{"l_r": 1, "l_t": 0}', 'l_t'),
                            ('{"l_r": 1, "l_t": 2, "max_iter": 2.5}', 'max_iter'),
                            ('{"l_r": 1, "l_t": 2, "tol": "small"}', 'tol'),
                            ('{"l_r": 1, "l_t": 2, "restart_rule": "often"}', 'restart_rule')):
            with self.assertRaises(ScenarioError) as ctx:
                parse_scenario(text)
            self.assertEqual(ctx.exception.field, field)

    def test_top_level_must_be_object(self):
        with self.assertRaises(ScenarioError):
            parse_scenario('[1, 2]')

    def test_load(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'scenario.json')
            with open(path, 'w', encoding='utf-8') as handle:
                handle.write(VALID)
            self.assertEqual(load_scenario(path).l_t, 2.0)
            with self.assertRaises(ScenarioError):
                load_scenario(os.path.join(tmp, 'missing.json'))


class ExportTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def test_repark_round_trip(self):
        g = TrailerGeometry(0.0, 2.0)
        report = plan_repark(g, math.pi / 4, math.pi / 2, tol=1e-3, alpha=1.0)
        out = self.path('repark.csv')
        frame = write_trajectory_csv(report.segments, out)
        self.assertEqual(list(frame.columns), ['t', 'x', 'y', 'theta', 'phi', 'u1', 'u2'])
        stored, replayed = replay_file(out, geometry=g)
        np.testing.assert_allclose(stored, report.endpoint, atol=1e-12)
        self.assertLess(float(np.max(np.abs(replayed[-1].endpoint - stored))), 1e-8)

    def test_segments_survive_round_trip(self):
        g = TrailerGeometry(1.0, 3.0)
        _, report = plan_dubins(g, (0, 0, 0, 0.1), (2.0, 3.0, math.pi), 1.0,
                                config=planner_config(steps_per_unit=200, min_steps=20))
        out = self.path('dubins.csv')
        write_trajectory_csv(report.segments, out)
        segments = read_trajectory_csv(out)
        self.assertEqual(len(segments), len(report.segments))
        replayed = replay(segments, TrailerSystem(g))
        self.assertLess(float(np.max(np.abs(replayed[-1].endpoint - stored_endpoint(segments)))), 1e-8)

    def test_rejects_bad_files(self):
        bad_header = self.path('header.csv')
        with open(bad_header, 'w') as handle:
            handle.write('t,x,y\n0,0,0\n')
        with self.assertRaises(ScenarioError):
            read_trajectory_csv(bad_header)

        bad_value = self.path('value.csv')
        with open(bad_value, 'w') as handle:
            handle.write('t,x,y,theta,phi,u1,u2\n0,0,0,0,0,1,0\n0.5,abc,0,0,0,1,0\n')
        with self.assertRaises(ScenarioError) as ctx:
            read_trajectory_csv(bad_value)
        self.assertEqual(ctx.exception.line, 3)

        backwards = self.path('backwards.csv')
        with open(backwards, 'w') as handle:
            handle.write('t,x,y,theta,phi,u1,u2\n0,0,0,0,0,1,0\n1,1,0,0,0,1,0\n0.5,1,0,0,0,1,0\n')
        with self.assertRaises(ScenarioError):
            read_trajectory_csv(backwards)

        with self.assertRaises(ScenarioError):
            read_trajectory_csv(self.path('missing.csv'))


class FigureTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_hitch_geometry(self):
        hitch, axle = hitch_and_axle(np.array([[1.0, 2.0, math.pi / 2, math.pi / 2]]), 1.0, 2.0)
        np.testing.assert_allclose(hitch, [[1.0, 1.0]], atol=1e-15)
        np.testing.assert_allclose(axle, [[3.0, 1.0]], atol=1e-15)

    def test_deterministic_svg(self):
        _, report = plan_dubins(TrailerGeometry(1.0, 3.0), (0, 0, 0, 0.1), (3.0, 2.0, 1.0), 1.0,
                                config=planner_config(steps_per_unit=100, min_steps=20))
        first = os.path.join(self.tmp.name, 'a.svg')
        second = os.path.join(self.tmp.name, 'b.svg')
        emit_figure(report, first)
        emit_figure(report, second)
        with open(first, 'rb') as a, open(second, 'rb') as b:
            body = a.read()
            self.assertEqual(body, b.read())
        self.assertIn(b'<svg', body)

    def test_empty_plan(self):
        report = PlanReport('park', TrailerGeometry(1.0, 3.0), np.zeros(4), np.zeros(4), (), 0.0)
        with self.assertRaises(DomainError):
            emit_figure(report, os.path.join(self.tmp.name, 'empty.svg'))

    def test_unwritable(self):
        _, report = plan_dubins(TrailerGeometry(1.0, 3.0), (0, 0, 0, 0.1), (3.0, 2.0, 1.0), 1.0,
                                config=planner_config(steps_per_unit=100, min_steps=20))
        with self.assertRaises(OSError):
            emit_figure(report, os.path.join(self.tmp.name, 'no', 'such', 'dir', 'x.svg'))
