# hitchplan/management/commands/dubins.py
from django.core.management.base import CommandError

from hitchplan.planner import plan_dubins

from ._common import EXIT_ERROR, PlanCommand


class Command(PlanCommand):
    help = 'Shortest forward-only car path from q0 to the pose of q1 (trailer follows)'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--radius', type=float, help='minimum turning radius R')

    def handle(self, *args, **options):
        scenario = self.load(options)
        _, planner = self.configs(scenario, options)
        radius = self.pick(options, 'radius', scenario.radius)
        if radius is None:
            raise CommandError("dubins needs a turning radius (--radius or scenario 'radius').",
                               returncode=EXIT_ERROR)

        path, report = self.guard(plan_dubins, scenario.geometry, scenario.q0, scenario.q1[:3],
                                  radius, config=planner)
        self.print_summary({
            'word': path.word,
            'segments': list(path.segments),
            'total': path.total,
            'radius': path.radius,
            'eps': report.eps,
            'final_phi': float(report.endpoint[3]),
            'constraint_violated': report.constraint_violated,
        })
        if report.segments:
            self.write_outputs(report, options)
        self.stdout.write(self.style.SUCCESS(f"✓ {path.word} path of length {path.total:.6g}"))
