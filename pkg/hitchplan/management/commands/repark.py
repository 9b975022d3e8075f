# hitchplan/management/commands/repark.py
import numpy as np
from django.core.management.base import CommandError

from hitchplan.planner import placed, plan_repark

from ._common import EXIT_ERROR, PlanCommand, alpha_option


class Command(PlanCommand):
    help = 'Change the hitch angle from q0[3] to q1[3] with the car returning to its pose'

    def handle(self, *args, **options):
        scenario = self.load(options)
        q0 = np.array(scenario.q0)
        q1 = np.array(scenario.q1)
        if not np.allclose(q0[:3], q1[:3], rtol=0.0, atol=1e-12):
            raise CommandError("repark needs q0 and q1 with the same car pose (x, y, theta).",
                               returncode=EXIT_ERROR)
        _, planner = self.configs(scenario, options)
        alpha = alpha_option(self.pick(options, 'alpha', scenario.alpha))
        tol = self.pick(options, 'tol', scenario.tol)

        self.stdout.write(f"Reparking: l_r={scenario.l_r}, l_t={scenario.l_t}, "
                          f"phi {q0[3]:.6g} -> {q1[3]:.6g}")
        report = self.guard(plan_repark, scenario.geometry, q0[3], q1[3],
                            tol=tol, alpha=alpha, config=planner)
        if np.any(q0[:3]):
            report = placed(report, q0)
        self.print_summary(report.summary())
        self.write_outputs(report, options)
        self.finish(report, 'repark')
