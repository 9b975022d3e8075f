"""
Command-line entry point.

``run(argv)`` dispatches to the management commands (``steer-engel`` is the
``steer_engel`` command) and returns the exit code instead of exiting:
0 converged, 2 not converged, 1 usage, IO or scenario error.
"""
import os
import sys
from typing import Optional, Sequence

from django.core.exceptions import ImproperlyConfigured

COMMANDS = ('repark', 'park', 'steer_engel', 'dubins', 'simulate', 'selftest')

USAGE = (
    "usage: hitchplan <command> [options]\n"
    "commands: repark, park, steer-engel, dubins, simulate, selftest\n"
    "run 'python manage.py help <command>' for the options of a command"
)


def _setup():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'core.settings')
    import django

    django.setup()


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        _setup()
    except (ValueError, ImportError, ImproperlyConfigured) as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return 1
    from django.core.management import call_command
    from django.core.management.base import CommandError

    from .exceptions import HitchplanError

    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ('-h', '--help', 'help'):
        sys.stderr.write(USAGE + '\n')
        return 1 if not argv else 0
    name = argv[0].replace('-', '_')
    if name not in COMMANDS:
        sys.stderr.write(f"unknown command {argv[0]!r}\n{USAGE}\n")
        return 1
    try:
        call_command(name, *argv[1:])
    except CommandError as exc:
        sys.stderr.write(f"{exc}\n")
        return exc.returncode
    except HitchplanError as exc:
        sys.stderr.write(f"{name}: {exc}\n")
        return 1
    return 0


def main():
    sys.exit(run())
