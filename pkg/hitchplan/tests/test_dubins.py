import math

import numpy as np
from django.test import SimpleTestCase

from hitchplan.dubins import WORDS, DubinsPath, dubins_candidates, dubins_shortest, mod2pi
from hitchplan.exceptions import DomainError


def centres(pose, radius):
    x, y, th = pose
    left = np.array([x - radius * math.sin(th), y + radius * math.cos(th)])
    right = np.array([x + radius * math.sin(th), y - radius * math.cos(th)])
    return left, right


def tangent_lengths(start, goal, radius):
    """Every word built from circle tangencies; lengths of valid paths only."""
    th0, th1 = start[2], goal[2]
    l0, r0 = centres(start, radius)
    l1, r1 = centres(goal, radius)
    out = []

    for c0, c1, sign in ((l0, l1, 1.0), (r0, r1, -1.0)):
        delta = c1 - c0
        dist = float(np.hypot(*delta))
        psi = math.atan2(delta[1], delta[0]) if dist > 0 else th0
        out.append(radius * (mod2pi(sign * (psi - th0)) + mod2pi(sign * (th1 - psi))) + dist)

    for c0, c1, sign in ((l0, r1, 1.0), (r0, l1, -1.0)):
        delta = c1 - c0
        dist = float(np.hypot(*delta))
        if dist < 2 * radius:
            continue
        psi = math.atan2(delta[1], delta[0]) + sign * math.asin(2 * radius / dist)
        straight = math.sqrt(max(dist * dist - 4 * radius * radius, 0.0))
        out.append(radius * (mod2pi(sign * (psi - th0)) + mod2pi(sign * (psi - th1))) + straight)

    # Three arcs: outer circles of one turn direction, middle circle of the other.
    for c0, c1, sign in ((l0, l1, 1.0), (r0, r1, -1.0)):
        delta = c1 - c0
        dist = float(np.hypot(*delta))
        if dist > 4 * radius or dist == 0:
            continue
        mid = 0.5 * (c0 + c1)
        normal = np.array([-delta[1], delta[0]]) / dist
        h = math.sqrt(max(4 * radius * radius - dist * dist / 4, 0.0))
        for c2 in (mid + h * normal, mid - h * normal):
            a02 = math.atan2(*(c2 - c0)[::-1])
            a12 = math.atan2(*(c2 - c1)[::-1])
            psi1 = a02 + sign * math.pi / 2
            psi2 = a12 + sign * math.pi / 2
            arcs = mod2pi(sign * (psi1 - th0)) + mod2pi(sign * (psi1 - psi2)) + mod2pi(sign * (th1 - psi2))
            out.append(radius * arcs)
    return out


class Mod2PiTests(SimpleTestCase):

    def test_range(self):
        self.assertEqual(mod2pi(0.0), 0.0)
        self.assertAlmostEqual(mod2pi(-0.5), 2 * math.pi - 0.5)
        self.assertAlmostEqual(mod2pi(7.0), 7.0 - 2 * math.pi)
        self.assertEqual(mod2pi(2 * math.pi), 0.0)
        self.assertEqual(mod2pi(-1e-16), 0.0)


class DubinsTests(SimpleTestCase):

    def test_straight_line(self):
        path = dubins_shortest((0, 0, 0), (5, 0, 0), 1.0)
        self.assertEqual(path.word, 'LSL')
        self.assertAlmostEqual(path.total, 5.0, places=12)
        np.testing.assert_allclose(path.segments, [0, 5, 0], atol=1e-12)

    def test_half_circle(self):
        path = dubins_shortest((0, 0, 0), (0, 2, math.pi), 1.0)
        self.assertAlmostEqual(path.total, math.pi, places=9)

    def test_same_pose(self):
        path = dubins_shortest((1, 2, 0.5), (1, 2, 0.5), 2.0)
        self.assertAlmostEqual(path.total, 0.0, places=12)
        self.assertIsNone(path.to_law())

    def test_scales_with_radius(self):
        small = dubins_shortest((0, 0, 0), (1, 1, math.pi / 2), 0.5)
        large = dubins_shortest((0, 0, 0), (2, 2, math.pi / 2), 1.0)
        self.assertAlmostEqual(large.total, 2.0 * small.total, places=9)

    def test_radius_must_be_positive(self):
        with self.assertRaises(DomainError):
            dubins_shortest((0, 0, 0), (1, 0, 0), 0.0)
        with self.assertRaises(DomainError):
            DubinsPath('SSS', (1, 1, 1), 1.0, (0, 0, 0), (1, 0, 0))

    def test_candidates_in_word_order(self):
        words = [w for w, _ in dubins_candidates((0, 0, 0), (4, 3, 1.0), 1.0)]
        self.assertEqual(words, [w for w in WORDS if w in words])
        self.assertIn('LSL', words)
        self.assertIn('RSR', words)

    def test_matches_tangent_construction(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            radius = rng.uniform(0.5, 2.0)
            start = (rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-math.pi, math.pi))
            goal = (rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-math.pi, math.pi))
            path = dubins_shortest(start, goal, radius)
            oracle = min(tangent_lengths(start, goal, radius))
            self.assertLessEqual(abs(path.total - oracle), 0.01 * oracle)
            self.assertGreaterEqual(path.total, math.hypot(goal[0] - start[0], goal[1] - start[1]) - 1e-9)

    def test_law_reaches_goal(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            start = (rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-math.pi, math.pi))
            goal = (rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-math.pi, math.pi))
            path = dubins_shortest(start, goal, 1.0)
            law = path.to_law()
            poses = path.poses(0.01)
            np.testing.assert_allclose(poses[-1, :2], goal[:2], atol=1e-6)
            self.assertAlmostEqual(math.remainder(poses[-1, 2] - goal[2], 2 * math.pi), 0.0, delta=1e-6)
            self.assertAlmostEqual(law.horizon, path.total, places=9)
            u = law.sample(np.linspace(0.0, law.horizon, 200))
            np.testing.assert_allclose(u[:, 0], 1.0)
            self.assertTrue(np.all(np.isin(np.round(u[:, 1], 12), [-1.0, 0.0, 1.0])))
