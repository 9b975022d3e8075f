# hitchplan/management/commands/steer_engel.py
from dataclasses import replace

import numpy as np
from django.core.management.base import CommandError

from hitchplan.engel import steer_engel
from hitchplan.exceptions import SteeringFailed
from hitchplan.nilpotent import engel_target_general, nearest_representative
from hitchplan.services.export import write_trajectory_csv

from ._common import EXIT_ERROR, EXIT_NOT_CONVERGED, PlanCommand


class Command(PlanCommand):
    help = ('Steer the Engel origin to a target: the scenario "target", or the Engel image '
            'of q0 relative to q1')

    def handle(self, *args, **options):
        scenario = self.load(options)
        solver, _ = self.configs(scenario, options)
        tol = self.pick(options, 'tol', scenario.tol)
        if tol is not None:
            solver = replace(solver, tol=tol)

        if scenario.target is not None:
            target = np.array(scenario.target)
        else:
            rep = nearest_representative(scenario.q0, scenario.q1)
            target = self.guard(engel_target_general, scenario.q0, rep, scenario.geometry).as_array()
        self.stdout.write(f"Engel target: {target.tolist()}")

        try:
            result = self.guard(steer_engel, target, solver)
        except SteeringFailed as exc:
            raise CommandError(f"steering failed: best residual {exc.best_residual:.3e}",
                               returncode=EXIT_NOT_CONVERGED)

        self.print_summary({
            'target': result.target.as_array(),
            'perturbed': result.perturbed,
            'residual': result.residual,
            'horizon': result.horizon,
            'covector': result.covector.as_array(),
            'starts': result.starts,
            'refined': result.refined,
            'evaluations': result.evaluations,
        })
        if options.get('out_csv'):
            try:
                write_trajectory_csv([result.trajectory], options['out_csv'], engel=True)
            except OSError as exc:
                raise CommandError(f"cannot write output: {exc}", returncode=EXIT_ERROR)
            self.stdout.write(f"  trajectory: {options['out_csv']}")
        self.stdout.write(self.style.SUCCESS(f"✓ steered with residual {result.residual:.3e}"))
