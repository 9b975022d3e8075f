"""
Django settings for core project.

The project has no web surface: Django is used for settings, logging
configuration, management commands and the test runner.
"""

import os

# Drop noisy matplotlib font-cache chatter from the console
class IgnoreFontManagerFilter:
    def filter(self, record):
        return not record.name.startswith('matplotlib')

# Application definition

INSTALLED_APPS = [
    'hitchplan',
]

# Planning runs never touch a database; SimpleTestCase is used throughout.
DATABASES = {}


def _env(name, default, cast=float):
    raw = os.environ.get(f'HITCHPLAN_{name}')
    if raw is None or raw == '':
        return default
    return cast(raw)


# Numerical knobs. Every key can be overridden by HITCHPLAN_<KEY>.
HITCHPLAN = {
    # integrate
    'STEPS_PER_UNIT': _env('STEPS_PER_UNIT', 2000, int),
    'MIN_STEPS': _env('MIN_STEPS', 200, int),
    # engel shooting
    'SHOOT_TOL': _env('SHOOT_TOL', 1e-6),
    'SHOOT_BOUND': _env('SHOOT_BOUND', 6.0),
    'SHOOT_ANGLES': _env('SHOOT_ANGLES', 24, int),
    'SHOOT_GRID': _env('SHOOT_GRID', 17, int),
    'SHOOT_RANDOM_STARTS': _env('SHOOT_RANDOM_STARTS', 256, int),
    'SHOOT_CANDIDATES': _env('SHOOT_CANDIDATES', 24, int),
    'SHOOT_SCAN_STEPS': _env('SHOOT_SCAN_STEPS', 400, int),
    'SHOOT_SCAN_HORIZON': _env('SHOOT_SCAN_HORIZON', 10.0),
    'SHOOT_MAX_NFEV': _env('SHOOT_MAX_NFEV', 60, int),
    'SHOOT_ACCEPT': _env('SHOOT_ACCEPT', 3, int),
    'SHOOT_CONTINUATIONS': _env('SHOOT_CONTINUATIONS', 3, int),
    'SHOOT_CONTINUATION_STEPS': _env('SHOOT_CONTINUATION_STEPS', 40, int),
    'SEED': _env('SEED', 20180101, int),
    'WORKERS': _env('WORKERS', 1, int),
    # planners
    'PHASE_SAMPLES': _env('PHASE_SAMPLES', 48, int),
    'REPARK_STEPS': _env('REPARK_STEPS', 2000, int),
    'ALPHA_MIN': _env('ALPHA_MIN', 0.25),
    'ALPHA_MAX': _env('ALPHA_MAX', 3.0),
    'ALPHA_STEP': _env('ALPHA_STEP', 0.25),
    'RESTART_FRACTION': _env('RESTART_FRACTION', 0.5),
    'PARK_MAX_ITER': _env('PARK_MAX_ITER', 20, int),
    'PARK_TOL': _env('PARK_TOL', 0.05),
    'REPARK_TOL': _env('REPARK_TOL', 1e-3),
}

HITCHPLAN_LOG = os.environ.get('HITCHPLAN_LOG', 'WARNING').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'filters': {
        'ignore_font_manager': {
            '()': 'core.settings.IgnoreFontManagerFilter',
        },
    },
    'formatters': {
        'plain': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'filters': ['ignore_font_manager'],
            'formatter': 'plain',
        },
    },
    'loggers': {
        'hitchplan': {
            'handlers': ['console'],
            'level': HITCHPLAN_LOG,
            'propagate': False,
        },
    },
}
