# hitchplan/management/commands/_common.py
import json
import logging

import numpy as np
from django.core.management.base import BaseCommand, CommandError

from hitchplan.conf import planner_config, solver_config
from hitchplan.exceptions import DomainError, FrameSingular, HitchplanError, IntegrationDiverged, ScenarioError
from hitchplan.services.export import write_trajectory_csv
from hitchplan.services.figures import emit_figure
from hitchplan.services.scenarios import load_scenario

logger = logging.getLogger('hitchplan.commands')

EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


def alpha_option(raw):
    if raw is None or raw == 'search':
        return raw
    try:
        value = float(raw)
    except ValueError:
        raise CommandError(f"--alpha expects a number or 'search', got {raw!r}.", returncode=EXIT_ERROR)
    if not value > 0:
        raise CommandError(f"--alpha must be positive, got {raw!r}.", returncode=EXIT_ERROR)
    return value


class PlanCommand(BaseCommand):
    """Shared options, scenario loading, output writing and exit codes."""

    requires_system_checks = []
    scenario_required = True

    def add_arguments(self, parser):
        parser.add_argument('--scenario', required=self.scenario_required, help='scenario JSON file')
        parser.add_argument('--out-csv', dest='out_csv', help='trajectory CSV to write')
        parser.add_argument('--out-svg', dest='out_svg', help='SVG figure to write')
        parser.add_argument('--seed', type=int, help='seed for random shooting starts')
        parser.add_argument('--tol', type=float, help='acceptance tolerance')
        parser.add_argument('--max-iter', dest='max_iter', type=int, help='restart limit for park')
        parser.add_argument('--alpha', help="scale for repark: a number or 'search'")
        parser.add_argument('--restart-rule', dest='restart_rule',
                            help="'endpoint' or 'fraction:<beta>'")

    def load(self, options):
        try:
            return load_scenario(options['scenario'])
        except ScenarioError as exc:
            raise CommandError(f"{options['scenario']}: {exc}", returncode=EXIT_ERROR)

    def configs(self, scenario, options):
        solver_overrides = {}
        planner_overrides = {}
        seed = options.get('seed') if options.get('seed') is not None else scenario.seed
        if seed is not None:
            solver_overrides['seed'] = seed
        if scenario.steps is not None:
            planner_overrides['repark_steps'] = scenario.steps
        return solver_config(**solver_overrides), planner_config(**planner_overrides)

    def pick(self, options, key, scenario_value):
        return options.get(key) if options.get(key) is not None else scenario_value

    def write_outputs(self, report, options, engel=False):
        try:
            if options.get('out_csv'):
                write_trajectory_csv(report.segments, options['out_csv'], engel=engel)
                self.stdout.write(f"  trajectory: {options['out_csv']}")
            if options.get('out_svg'):
                emit_figure(report, options['out_svg'])
                self.stdout.write(f"  figure: {options['out_svg']}")
        except OSError as exc:
            raise CommandError(f"cannot write output: {exc}", returncode=EXIT_ERROR)
        except DomainError as exc:
            raise CommandError(str(exc), returncode=EXIT_ERROR)

    def print_summary(self, summary):
        self.stdout.write(json.dumps(summary, indent=2, sort_keys=True, default=_jsonable))

    def finish(self, report, what):
        if report.converged:
            self.stdout.write(self.style.SUCCESS(f"✓ {what} converged: eps = {report.eps:.6g}"))
            return
        self.stdout.write(self.style.WARNING(f"{what} did not converge: eps = {report.eps:.6g}"))
        raise CommandError(f"{what} not converged (eps = {report.eps:.6g}).",
                           returncode=EXIT_NOT_CONVERGED)

    def guard(self, func, *args, **kwargs):
        """Run a planner call, mapping domain errors to usage errors."""
        try:
            return func(*args, **kwargs)
        except (DomainError, FrameSingular, ScenarioError, IntegrationDiverged) as exc:
            raise CommandError(str(exc), returncode=EXIT_ERROR)


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, HitchplanError):
        return str(value)
    raise TypeError(f"not JSON serialisable: {type(value).__name__}")
