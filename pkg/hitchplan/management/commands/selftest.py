# hitchplan/management/commands/selftest.py
import math
import time

import numpy as np
from django.core.management.base import CommandError

from hitchplan.conf import planner_config, solver_config
from hitchplan.engel import ENGEL, FigureEightParams, repark_controls
from hitchplan.exceptions import SteeringFailed
from hitchplan.integrate import convergence_order
from hitchplan.kinematics import TrailerGeometry
from hitchplan.planner import plan_park, plan_repark

from ._common import EXIT_NOT_CONVERGED, PlanCommand

# Reference scale reported next to the searched one for the (1, 5) reparking.
REFERENCE_ALPHA = 1.76113

PARK_SCENARIOS = [
    # name, (l_r, l_t), q0, q1, first-pass floor, final ceiling, improvement floor
    ('parking (1, 4)', (1.0, 4.0), (0, 0, 0, math.pi / 3), (-1, 1, math.pi / 2, 0), 0.5, 0.05, None),
    ('parking (2, 3)', (2.0, 3.0), (0, 0, 0, 0), (1, 0.5, math.pi, 0), None, 1.5, 3.0),
    ('parking (3, 2)', (3.0, 2.0), (0, 0, 0, math.pi / 2), (1, 3, math.pi, 0), None, 1.5, 3.0),
    ('parking (0, 4)', (0.0, 4.0), (0, 0, 0, math.pi / 2), (-3, 0.1, math.pi / 3, math.pi / 2), None, 1.5, 3.0),
]


class Command(PlanCommand):
    help = 'Run the reference reparking and parking scenarios and check their accuracy bands'
    scenario_required = False

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--skip-park', action='store_true', help='only run the reparking scenarios')

    def check(self, name, passed, detail):
        mark = self.style.SUCCESS('PASS') if passed else self.style.ERROR('FAIL')
        self.stdout.write(f"[{mark}] {name}: {detail}")
        self.results.append(passed)

    def handle(self, *args, **options):
        self.results = []
        started = time.monotonic()
        planner = planner_config()
        solver = solver_config(**({'seed': options['seed']} if options.get('seed') is not None else {}))

        law = repark_controls(FigureEightParams(1.0, 0.0))
        order = convergence_order(ENGEL, np.array([0.0, 0.0, 0.0, 1.0]), law)
        self.check('RK4 order', order > 3.5, f"empirical order {order:.3f}")

        short = plan_repark(TrailerGeometry(0.0, 2.0), math.pi / 4, math.pi / 2, tol=1e-3,
                           alpha=1.0, config=planner)
        self.check('reparking (0, 2)', short.eps < 1e-3, f"eps = {short.eps:.3e} (< 1e-3)")

        g = TrailerGeometry(1.0, 5.0)
        unit = plan_repark(g, math.pi / 2, -math.pi / 3, tol=0.05, alpha=1.0, config=planner)
        self.check('reparking (1, 5), alpha = 1', 0.35 <= unit.eps <= 1.4,
                   f"eps = {unit.eps:.4f} (within a factor 2 of 0.7)")
        searched = plan_repark(g, math.pi / 2, -math.pi / 3, tol=0.05, alpha='search', config=planner)
        self.check('reparking (1, 5), alpha search', searched.eps < 0.05 and searched.eps < unit.eps,
                   f"eps = {searched.eps:.4f} at alpha = {searched.alpha:.5f} "
                   f"(reference alpha {REFERENCE_ALPHA})")

        if not options['skip_park']:
            for name, (l_r, l_t), q0, q1, first_floor, ceiling, factor in PARK_SCENARIOS:
                self.run_park(name, TrailerGeometry(l_r, l_t), q0, q1, first_floor, ceiling,
                              factor, planner, solver)

        elapsed = time.monotonic() - started
        passed = sum(self.results)
        self.stdout.write(f"{passed}/{len(self.results)} checks passed in {elapsed:.1f} s")
        if passed != len(self.results):
            raise CommandError("selftest failed.", returncode=EXIT_NOT_CONVERGED)

    def run_park(self, name, g, q0, q1, first_floor, ceiling, factor, planner, solver):
        try:
            report = plan_park(g, q0, q1, tol=min(ceiling, 0.05), max_iter=20,
                               config=planner, solver=solver)
        except SteeringFailed as exc:
            self.check(name, False, f"steering failed ({exc.best_residual:.2e})")
            return
        first, final = report.history[0], report.eps
        ok = final <= ceiling and report.iterations <= 20
        detail = f"first eps {first:.4f}, final eps {final:.4f} in {report.iterations} passes"
        if first_floor is not None:
            ok = ok and first >= first_floor
            detail += f" (first >= {first_floor}, final <= {ceiling})"
        if factor is not None:
            gain = first / final if final > 0 else math.inf
            ok = ok and gain >= factor
            detail += f", improvement x{gain:.2f} (>= {factor}, final <= {ceiling})"
        self.check(name, ok, detail)
