# hitchplan/management/commands/park.py
from django.core.management.base import CommandError

from hitchplan.exceptions import SteeringFailed
from hitchplan.planner import plan_park

from ._common import EXIT_NOT_CONVERGED, PlanCommand


class Command(PlanCommand):
    help = 'Park the robot with its trailer from q0 to q1 by iterated nilpotent approximation'

    def handle(self, *args, **options):
        scenario = self.load(options)
        solver, planner = self.configs(scenario, options)
        tol = self.pick(options, 'tol', scenario.tol)
        max_iter = self.pick(options, 'max_iter', scenario.max_iter)
        rule = self.pick(options, 'restart_rule', scenario.restart_rule)

        self.stdout.write(f"Parking: l_r={scenario.l_r}, l_t={scenario.l_t}, "
                          f"q0={scenario.q0}, q1={scenario.q1}")
        try:
            report = self.guard(plan_park, scenario.geometry, scenario.q0, scenario.q1,
                                tol=tol, max_iter=max_iter, restart_rule=rule,
                                config=planner, solver=solver)
        except SteeringFailed as exc:
            if exc.report is not None:
                self.print_summary(exc.report.summary())
            raise CommandError(f"park not converged: {exc}", returncode=EXIT_NOT_CONVERGED)

        self.print_summary(report.summary())
        if report.segments:
            self.write_outputs(report, options)
        else:
            self.stdout.write("  q0 equals q1: empty maneuver")
        self.finish(report, 'park')
