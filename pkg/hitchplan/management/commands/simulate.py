# hitchplan/management/commands/simulate.py
import numpy as np
from django.core.management.base import CommandError

from hitchplan.exceptions import ScenarioError
from hitchplan.planner import config_distance
from hitchplan.services.export import replay_file, write_trajectory_csv

from ._common import EXIT_ERROR, EXIT_NOT_CONVERGED, PlanCommand

# Replayed and stored endpoints must agree this closely.
REPLAY_TOL = 1e-8


class Command(PlanCommand):
    help = 'Re-integrate the controls stored in a trajectory file and compare endpoints'
    scenario_required = False

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--controls', required=True, help='trajectory CSV written by another command')
        parser.add_argument('--engel', action='store_true', help='the file holds an Engel trajectory')

    def handle(self, *args, **options):
        scenario = None
        if options.get('scenario'):
            scenario = self.load(options)
        elif not options['engel']:
            raise CommandError("simulate needs --scenario for the trailer geometry.", returncode=EXIT_ERROR)

        try:
            stored, replayed = replay_file(
                options['controls'],
                geometry=None if scenario is None else scenario.geometry,
                engel=options['engel'],
            )
        except ScenarioError as exc:
            raise CommandError(f"{options['controls']}: {exc}", returncode=EXIT_ERROR)

        end = replayed[-1].endpoint
        mismatch = float(np.max(np.abs(end - stored)))
        summary = {
            'segments': len(replayed),
            'stored_endpoint': stored,
            'replayed_endpoint': end,
            'mismatch': mismatch,
        }
        if scenario is not None and not options['engel']:
            summary['eps'] = config_distance(end, scenario.q1)
            summary['stored_eps'] = config_distance(stored, scenario.q1)
        self.print_summary(summary)

        if options.get('out_csv'):
            try:
                write_trajectory_csv(replayed, options['out_csv'], engel=options['engel'])
            except OSError as exc:
                raise CommandError(f"cannot write output: {exc}", returncode=EXIT_ERROR)

        if mismatch > REPLAY_TOL:
            raise CommandError(f"replayed endpoint differs from the stored one by {mismatch:.3e}.",
                               returncode=EXIT_NOT_CONVERGED)
        self.stdout.write(self.style.SUCCESS(f"✓ replay matches stored endpoint ({mismatch:.2e})"))
