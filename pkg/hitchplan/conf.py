"""
Typed views of ``settings.HITCHPLAN``.

Callers take the defaults with ``solver_config()`` / ``planner_config()`` and
apply per-call overrides with ``dataclasses.replace``.
"""
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from django.conf import settings


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-6
    bound: float = 6.0
    angles: int = 24
    grid: int = 17
    random_starts: int = 256
    candidates: int = 24
    scan_steps: int = 400
    scan_horizon: float = 10.0
    max_nfev: int = 60
    accept: int = 3
    continuations: int = 3
    continuation_steps: int = 40
    seed: int = 20180101
    workers: int = 1
    steps_per_unit: int = 2000
    min_steps: int = 200


@dataclass(frozen=True)
class PlannerConfig:
    steps_per_unit: int = 2000
    min_steps: int = 200
    repark_steps: int = 2000
    phase_samples: int = 48
    alpha_grid: Tuple[float, ...] = tuple(np.arange(0.25, 3.0 + 1e-9, 0.25))
    # None means "search"; a number pins alpha.
    alpha: Optional[float] = None
    restart_fraction: float = 0.5
    restart_rule: str = 'endpoint'
    max_iter: int = 20
    park_tol: float = 0.05
    repark_tol: float = 1e-3
    workers: int = 1


def _knobs():
    return getattr(settings, 'HITCHPLAN', {})


def solver_config(**overrides) -> SolverConfig:
    k = _knobs()
    base = SolverConfig(
        tol=k.get('SHOOT_TOL', SolverConfig.tol),
        bound=k.get('SHOOT_BOUND', SolverConfig.bound),
        angles=k.get('SHOOT_ANGLES', SolverConfig.angles),
        grid=k.get('SHOOT_GRID', SolverConfig.grid),
        random_starts=k.get('SHOOT_RANDOM_STARTS', SolverConfig.random_starts),
        candidates=k.get('SHOOT_CANDIDATES', SolverConfig.candidates),
        scan_steps=k.get('SHOOT_SCAN_STEPS', SolverConfig.scan_steps),
        scan_horizon=k.get('SHOOT_SCAN_HORIZON', SolverConfig.scan_horizon),
        max_nfev=k.get('SHOOT_MAX_NFEV', SolverConfig.max_nfev),
        accept=k.get('SHOOT_ACCEPT', SolverConfig.accept),
        continuations=k.get('SHOOT_CONTINUATIONS', SolverConfig.continuations),
        continuation_steps=k.get('SHOOT_CONTINUATION_STEPS', SolverConfig.continuation_steps),
        seed=k.get('SEED', SolverConfig.seed),
        workers=k.get('WORKERS', SolverConfig.workers),
        steps_per_unit=k.get('STEPS_PER_UNIT', SolverConfig.steps_per_unit),
        min_steps=k.get('MIN_STEPS', SolverConfig.min_steps),
    )
    return replace(base, **overrides)


def planner_config(**overrides) -> PlannerConfig:
    k = _knobs()
    lo = k.get('ALPHA_MIN', 0.25)
    hi = k.get('ALPHA_MAX', 3.0)
    step = k.get('ALPHA_STEP', 0.25)
    base = PlannerConfig(
        steps_per_unit=k.get('STEPS_PER_UNIT', PlannerConfig.steps_per_unit),
        min_steps=k.get('MIN_STEPS', PlannerConfig.min_steps),
        repark_steps=k.get('REPARK_STEPS', PlannerConfig.repark_steps),
        phase_samples=k.get('PHASE_SAMPLES', PlannerConfig.phase_samples),
        alpha_grid=tuple(float(a) for a in np.arange(lo, hi + 1e-9, step)),
        restart_fraction=k.get('RESTART_FRACTION', PlannerConfig.restart_fraction),
        max_iter=k.get('PARK_MAX_ITER', PlannerConfig.max_iter),
        park_tol=k.get('PARK_TOL', PlannerConfig.park_tol),
        repark_tol=k.get('REPARK_TOL', PlannerConfig.repark_tol),
        workers=k.get('WORKERS', PlannerConfig.workers),
    )
    return replace(base, **overrides)


def steps_for(horizon: float, steps_per_unit: int, min_steps: int) -> int:
    """Fixed-step count for a horizon: steps_per_unit per unit time, floored."""
    return max(int(min_steps), int(np.ceil(steps_per_unit * float(horizon))))
