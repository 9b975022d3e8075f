import math
from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from hitchplan.conf import planner_config
from hitchplan import engel
from hitchplan.engel import cut_time
from hitchplan.exceptions import DomainError, SteeringFailed
from hitchplan.kinematics import TrailerGeometry, wrap
from hitchplan.planner import (_restart_points, config_distance, evaluate_phi_map, parse_restart_rule,
                               phi_map, placed, plan_dubins, plan_park, plan_repark)


class DistanceTests(SimpleTestCase):

    def test_euclidean_part(self):
        self.assertAlmostEqual(config_distance((0, 0, 0, 0), (3, 4, 0, 0)), 5.0)

    def test_angles_wrap(self):
        self.assertAlmostEqual(config_distance((0, 0, 3.1, 0), (0, 0, -3.1, 0)), 2 * math.pi - 6.2)
        self.assertAlmostEqual(config_distance((0, 0, 0, 2 * math.pi), (0, 0, 0, 0)), 0.0)


class PhiMapTests(SimpleTestCase):

    def test_car_returns_to_its_pose(self):
        g = TrailerGeometry(1.0, 4.0)
        for sigma in (-2.0, -1.5, -1.0, -0.75, -0.5, 0.5, 0.75, 1.0, 1.5, 2.0):
            phases = np.linspace(0.0, cut_time(sigma), 10, endpoint=False)
            ends = phi_map(sigma, phases, g, 0.3)
            residual = np.sqrt(ends[:, 0] ** 2 + ends[:, 1] ** 2 + wrap(ends[:, 2]) ** 2)
            self.assertLess(float(np.max(residual)), 1e-5, sigma)

    def test_single_matches_batch(self):
        g = TrailerGeometry(0.0, 2.0)
        phases = np.array([0.0, 1.0, 2.0])
        ends = phi_map(1.2, phases, g, math.pi / 4)
        for phase, end in zip(phases, ends):
            phi, residual = evaluate_phi_map(1.2, phase, g, math.pi / 4)
            self.assertAlmostEqual(phi, end[3], places=12)
            self.assertLess(residual, 1e-5)

    def test_small_figure_barely_moves_hitch(self):
        phi, _ = evaluate_phi_map(50.0, 0.0, TrailerGeometry(1.0, 4.0), 0.3)
        self.assertAlmostEqual(phi, 0.3, delta=1e-3)


class ReparkTests(SimpleTestCase):

    def test_short_trailer(self):
        report = plan_repark(TrailerGeometry(0.0, 2.0), math.pi / 4, math.pi / 2, tol=1e-3, alpha=1.0)
        self.assertTrue(report.converged)
        self.assertLess(report.eps, 1e-3)
        traj = report.trajectory
        np.testing.assert_allclose(traj.start, [0, 0, 0, math.pi / 4])
        np.testing.assert_allclose(traj.endpoint[:2], 0.0, atol=1e-4)
        self.assertAlmostEqual(wrap(traj.endpoint[2]), 0.0, delta=1e-4)
        self.assertEqual(report.alpha, 1.0)
        self.assertLess(report.details['pose_residual'], 1e-4)
        self.assertAlmostEqual(report.details['t_cut'], cut_time(report.details['sigma']))
        self.assertGreater(report.sr_length, 0.0)

    def test_search_never_worse_than_unit_scale(self):
        g = TrailerGeometry(1.0, 5.0)
        fixed = plan_repark(g, math.pi / 2, -math.pi / 3, tol=0.05, alpha=1.0)
        searched = plan_repark(g, math.pi / 2, -math.pi / 3, tol=0.05, alpha='search')
        self.assertLessEqual(searched.eps, fixed.eps)
        self.assertEqual(searched.details['alpha_unit_eps'], fixed.eps)
        self.assertAlmostEqual(searched.weighted_length, searched.segments[0].weighted)

    def test_unit_scale_within_reference_band(self):
        g = TrailerGeometry(1.0, 5.0)
        fixed = plan_repark(g, math.pi / 2, -math.pi / 3, tol=0.05, alpha=1.0)
        self.assertGreaterEqual(fixed.eps, 0.35)
        self.assertLessEqual(fixed.eps, 1.4)
        searched = plan_repark(g, math.pi / 2, -math.pi / 3, tol=0.05, alpha='search')
        self.assertLess(searched.eps, 0.05)
        self.assertTrue(searched.converged)

    def test_rejects_trivial_and_bad_arguments(self):
        g = TrailerGeometry(1.0, 3.0)
        with self.assertRaises(DomainError):
            plan_repark(g, 0.5, 0.5)
        with self.assertRaises(DomainError):
            plan_repark(g, 0.1, 0.5, tol=0.0)
        with self.assertRaises(DomainError):
            plan_repark(g, 0.1, 0.5, alpha=-1.0)

    def test_placed_moves_car_frame(self):
        config = planner_config(repark_steps=400, phase_samples=8)
        report = plan_repark(TrailerGeometry(0.0, 2.0), 0.2, 0.4, tol=1.0, alpha=1.0, config=config)
        moved = placed(report, (1.0, 2.0, math.pi / 2))
        np.testing.assert_allclose(moved.trajectory.start, [1.0, 2.0, math.pi / 2, 0.2], atol=1e-15)
        local = report.trajectory.states
        world = moved.trajectory.states
        np.testing.assert_allclose(world[:, 0], 1.0 - local[:, 1], atol=1e-12)
        np.testing.assert_allclose(world[:, 1], 2.0 + local[:, 0], atol=1e-12)
        np.testing.assert_allclose(world[:, 3], local[:, 3])
        self.assertEqual(moved.eps, report.eps)


class RestartRuleTests(SimpleTestCase):

    def test_parse(self):
        self.assertEqual(parse_restart_rule('endpoint'), ('endpoint', 1.0))
        self.assertEqual(parse_restart_rule(None), ('endpoint', 1.0))
        self.assertEqual(parse_restart_rule('fraction:0.25'), ('fraction', 0.25))
        self.assertEqual(parse_restart_rule('fraction'), ('fraction', 0.5))

    def test_rejects(self):
        for bad in ('fraction:0', 'fraction:1.5', 'fraction:x', 'midpoint'):
            with self.assertRaises(DomainError):
                parse_restart_rule(bad)


class ParkTests(SimpleTestCase):

    def test_same_configuration(self):
        report = plan_park(TrailerGeometry(1.0, 4.0), (1, 2, 0.3, 0.1), (1, 2, 0.3, 0.1))
        self.assertEqual(report.segments, ())
        self.assertEqual(report.eps, 0.0)
        self.assertEqual(report.history, [0.0])
        self.assertEqual(report.iterations, 1)
        self.assertTrue(report.converged)
        self.assertIsNone(report.trajectory)

    def test_iterations(self):
        q0 = np.array([0.0, 0.0, 0.0, math.pi / 3])
        q1 = np.array([-1.0, 1.0, math.pi / 2, 0.0])
        report = plan_park(TrailerGeometry(1.0, 4.0), q0, q1, tol=0.05, max_iter=3)
        self.assertLessEqual(report.iterations, 3)
        self.assertEqual(report.iterations, len(report.history))
        self.assertEqual(report.history[0], report.details['first_eps'])
        self.assertTrue(all(b < a for a, b in zip(report.history, report.history[1:])))
        self.assertAlmostEqual(report.eps, config_distance(report.endpoint, q1), places=12)
        self.assertEqual(report.converged, report.eps <= 0.05)

        traj = report.trajectory
        np.testing.assert_allclose(traj.start, q0, atol=1e-15)
        self.assertTrue(np.all(np.diff(traj.t) > 0))
        self.assertTrue(np.all(np.diff(traj.length) >= 0))
        self.assertEqual(len(report.restarts), len(report.history) - 1)
        for restart in report.restarts:
            gaps = np.max(np.abs(traj.states - restart), axis=1)
            self.assertLess(float(np.min(gaps)), 1e-12)

    def test_argument_checks(self):
        g = TrailerGeometry(1.0, 4.0)
        with self.assertRaises(DomainError):
            plan_park(g, (0, 0, 0, 0), (1, 0, 0, 0), tol=-1.0)
        with self.assertRaises(DomainError):
            plan_park(g, (0, 0, 0, 0), (1, 0, 0, 0), max_iter=0)
        with self.assertRaises(DomainError):
            plan_park(g, (0, 0, 0, 0), (1, 0, 0, 0), restart_rule='sometimes')

    def test_restart_points(self):
        config = planner_config()
        points = _restart_points(('fraction', 0.5), config)
        self.assertEqual(points, [('fraction', 0.5), ('endpoint', 1.0), ('fraction', 0.75), ('fraction', 0.25)])
        points = _restart_points(('fraction', 0.3), config)
        self.assertEqual(points[:2], [('fraction', 0.3), ('endpoint', 1.0)])
        self.assertEqual(len(points), len(set(points)))

    def test_missed_steer_drives_closest_law(self):
        real = engel.steer_engel

        def near_miss(target, config=None):
            result = real(target, config)
            raise SteeringFailed(result.residual + 1.0, best=result)

        q0 = np.array([0.0, 0.0, 0.0, math.pi / 3])
        q1 = np.array([-1.0, 1.0, math.pi / 2, 0.0])
        with mock.patch('hitchplan.planner.steer_engel', side_effect=near_miss):
            report = plan_park(TrailerGeometry(1.0, 4.0), q0, q1, tol=0.05, max_iter=2)
        self.assertGreater(len(report.segments), 0)
        self.assertLessEqual(report.iterations, 2)

    def test_first_pass_falls_back_to_waypoint(self):
        real = engel.steer_engel
        calls = []

        def first_fails(target, config=None):
            calls.append(target)
            if len(calls) == 1:
                raise SteeringFailed(math.inf)
            return real(target, config)

        q0 = np.array([0.0, 0.0, 0.0, math.pi / 3])
        q1 = np.array([-1.0, 1.0, math.pi / 2, 0.0])
        with mock.patch('hitchplan.planner.steer_engel', side_effect=first_fails):
            report = plan_park(TrailerGeometry(1.0, 4.0), q0, q1, tol=0.05, max_iter=1)
        self.assertGreaterEqual(len(calls), 2)
        self.assertEqual(report.iterations, 1)
        np.testing.assert_allclose(report.trajectory.start, q0, atol=1e-15)
        self.assertIn(len(report.segments), (1, 2))

    def test_nothing_steers(self):
        with mock.patch('hitchplan.planner.steer_engel', side_effect=SteeringFailed(math.inf)):
            with self.assertRaises(SteeringFailed) as ctx:
                plan_park(TrailerGeometry(1.0, 4.0), (0, 0, 0, 0.5), (-1, 1, 1.0, 0), max_iter=3)
        report = ctx.exception.report
        self.assertFalse(report.converged)
        self.assertEqual(report.segments, ())

    def test_reference_parking(self):
        q0 = (0.0, 0.0, 0.0, math.pi / 3)
        q1 = (-1.0, 1.0, math.pi / 2, 0.0)
        report = plan_park(TrailerGeometry(1.0, 4.0), q0, q1, tol=0.05, max_iter=20)
        self.assertGreaterEqual(report.details['first_eps'], 0.5)
        self.assertLessEqual(report.eps, 0.05)
        self.assertLessEqual(report.iterations, 20)
        self.assertTrue(report.converged)
        self.assertFalse(report.details['stalled'])

    def test_reference_scenarios_improve(self):
        scenarios = [
            ((2.0, 3.0), (0, 0, 0, 0), (1, 0.5, math.pi, 0)),
            ((3.0, 2.0), (0, 0, 0, math.pi / 2), (1, 3, math.pi, 0)),
            ((0.0, 4.0), (0, 0, 0, math.pi / 2), (-3, 0.1, math.pi / 3, math.pi / 2)),
        ]
        for (l_r, l_t), q0, q1 in scenarios:
            with self.subTest(l_r=l_r, l_t=l_t):
                report = plan_park(TrailerGeometry(l_r, l_t), q0, q1, tol=0.05, max_iter=20)
                self.assertLessEqual(report.eps, 1.5)
                self.assertGreaterEqual(report.details['first_eps'] / max(report.eps, 1e-12), 3.0)
                self.assertLessEqual(report.iterations, 20)
                self.assertGreaterEqual(report.details['attempts'], report.iterations)


class DubinsPlanTests(SimpleTestCase):

    def test_trailer_follows(self):
        g = TrailerGeometry(1.0, 3.0)
        path, report = plan_dubins(g, (0, 0, 0, 0.2), (4.0, 2.0, math.pi / 2), 1.0)
        end = report.endpoint
        np.testing.assert_allclose(end[:2], [4.0, 2.0], atol=1e-6)
        self.assertAlmostEqual(wrap(end[2] - math.pi / 2), 0.0, delta=1e-6)
        self.assertEqual(report.goal[3], end[3])
        self.assertLess(report.eps, 1e-6)
        self.assertEqual(len(report.segments), sum(1 for s in path.segments if s > 0))
        self.assertEqual(report.details['word'], path.word)
        curved = sum(s * math.hypot(1.0, path.curvature(w)) for w, s in zip(path.word, path.segments))
        self.assertAlmostEqual(report.sr_length, curved, places=9)
        self.assertAlmostEqual(report.details['length'], path.total, places=12)
        self.assertFalse(report.constraint_violated)

    def test_constraint_flag(self):
        g = TrailerGeometry(1.0, 3.0, phi_max=0.05)
        _, report = plan_dubins(g, (0, 0, 0, 0.0), (0.0, 4.0, math.pi), 1.0)
        self.assertTrue(report.constraint_violated)

    def test_same_pose(self):
        path, report = plan_dubins(TrailerGeometry(1.0, 3.0), (1, 2, 0.5, 0.1), (1, 2, 0.5), 1.0)
        self.assertEqual(report.segments, ())
        self.assertEqual(report.eps, 0.0)
        self.assertAlmostEqual(path.total, 0.0)

    def test_summary_is_flat(self):
        _, report = plan_dubins(TrailerGeometry(1.0, 3.0), (0, 0, 0, 0), (3.0, 0.0, 0.0), 1.0)
        summary = report.summary()
        for key in ('kind', 'eps', 'converged', 'iterations', 'history', 'sr_length', 'word'):
            self.assertIn(key, summary)
        self.assertEqual(summary['kind'], 'dubins')
