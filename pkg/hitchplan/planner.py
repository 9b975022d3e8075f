"""
Planners for the robot with a trailer.

plan_repark   changes only the hitch angle, using figure-eight controls and a
              phase (and optionally scale) search;
plan_park     general boundary conditions, steering the Engel approximation
              and restarting from points of the produced curve;
plan_dubins   forward-only car baseline, with the trailer dragged along.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .conf import PlannerConfig, SolverConfig, planner_config, solver_config, steps_for
from .dubins import DubinsPath, dubins_shortest
from .engel import (FigureEightParams, cut_time, repark_controls, repark_controls_batch,
                    reverse_law, sigma_from_v, steer_engel)
from .exceptions import DomainError, FrameSingular, IntegrationDiverged, SteeringFailed
from .integrate import Trajectory, final_states, integrate, integrate_pieces, join
from .kinematics import TrailerGeometry, TrailerSystem, as_state_array, wrap
from .nilpotent import engel_target_general, nearest_representative, repark_target

logger = logging.getLogger(__name__)

__all__ = [
    'DubinsPath', 'PlanReport', 'config_distance', 'dubins_shortest', 'evaluate_phi_map',
    'parse_restart_rule', 'placed', 'plan_dubins', 'plan_park', 'plan_repark',
]

AlphaOption = Union[float, str, None]


def config_distance(a, b) -> float:
    a = as_state_array(a)
    b = as_state_array(b)
    return float(math.sqrt(
        (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2
        + wrap(a[2] - b[2]) ** 2 + wrap(a[3] - b[3]) ** 2
    ))


@dataclass
class PlanReport:
    kind: str
    geometry: TrailerGeometry
    start: np.ndarray
    goal: np.ndarray
    segments: Tuple[Trajectory, ...]
    eps: float
    iterations: int = 1
    history: List[float] = field(default_factory=list)
    restarts: List[np.ndarray] = field(default_factory=list)
    alpha: float = 1.0
    converged: bool = True
    details: Dict[str, object] = field(default_factory=dict)

    @property
    def trajectory(self) -> Optional[Trajectory]:
        return join(self.segments) if self.segments else None

    @property
    def endpoint(self) -> np.ndarray:
        return self.segments[-1].endpoint if self.segments else np.asarray(self.start, dtype=float)

    @property
    def sr_length(self) -> float:
        return self.segments[-1].sr_length if self.segments else 0.0

    @property
    def weighted_length(self) -> float:
        return self.segments[-1].weighted if self.segments else 0.0

    @property
    def samples(self) -> int:
        traj = self.trajectory
        return 0 if traj is None else len(traj.t)

    @property
    def constraint_violated(self) -> bool:
        phi_max = self.geometry.phi_max
        if phi_max is None or not self.segments:
            return False
        return any(np.any(np.abs(wrap(s.states[:, 3])) > phi_max) for s in self.segments)

    def summary(self) -> Dict[str, object]:
        return {
            'kind': self.kind,
            'eps': self.eps,
            'converged': self.converged,
            'iterations': self.iterations,
            'history': list(self.history),
            'restarts': [list(map(float, r)) for r in self.restarts],
            'alpha': self.alpha,
            'sr_length': self.sr_length,
            'weighted_length': self.weighted_length,
            'constraint_violated': self.constraint_violated,
            **self.details,
        }


def _move(states: np.ndarray, pose) -> np.ndarray:
    x0, y0, th0 = (float(c) for c in pose[:3])
    c, s = math.cos(th0), math.sin(th0)
    out = np.array(states, dtype=float, copy=True)
    x, y = states[..., 0], states[..., 1]
    out[..., 0] = x0 + c * x - s * y
    out[..., 1] = y0 + s * x + c * y
    out[..., 2] = states[..., 2] + th0
    return out


def placed(report: PlanReport, pose) -> PlanReport:
    """The same plan with the car's frame moved to ``pose`` = (x, y, theta, ...)."""
    segments = tuple(
        Trajectory(s.t.copy(), _move(s.states, pose), s.controls.copy(),
                   s.length.copy(), s.weighted_length.copy(), s.alpha)
        for s in report.segments
    )
    return PlanReport(
        kind=report.kind, geometry=report.geometry,
        start=_move(np.asarray(report.start, dtype=float), pose),
        goal=_move(np.asarray(report.goal, dtype=float), pose),
        segments=segments, eps=report.eps, iterations=report.iterations,
        history=list(report.history), restarts=[_move(r, pose) for r in report.restarts],
        alpha=report.alpha, converged=report.converged, details=dict(report.details),
    )


# Reparking

def _dilated_sigma(g: TrailerGeometry, phi0: float, phi1: float, alpha: float) -> float:
    v1 = repark_target(phi0, phi1, g.scaled(alpha)).v
    return sigma_from_v(v1)


def phi_map(sigma: float, phases, g: TrailerGeometry, phi0: float,
            alpha: float = 1.0, steps: int = 2000) -> np.ndarray:
    """Final trailer states, one row per phase, from (0, 0, 0, phi0)."""
    law = repark_controls_batch(sigma, phases).scaled(1.0 / alpha, 1.0)
    return final_states(TrailerSystem(g), np.array([0.0, 0.0, 0.0, phi0]), law, steps)


def evaluate_phi_map(sigma: float, phase: float, g: TrailerGeometry, phi0: float,
                     alpha: float = 1.0, steps: int = 2000) -> Tuple[float, float]:
    """(phi~1, |(x, y, theta)| at t_cut) for one figure-eight."""
    law = repark_controls(FigureEightParams(sigma, phase)).scaled(1.0 / alpha, 1.0)
    end = final_states(TrailerSystem(g), np.array([0.0, 0.0, 0.0, phi0]), law, steps)
    residual = math.sqrt(end[0] ** 2 + end[1] ** 2 + wrap(end[2]) ** 2)
    return float(end[3]), residual


def _phase_mod(phase: float, t_cut: float) -> float:
    value = math.fmod(phase, t_cut)
    if value < 0:
        value += t_cut
    return 0.0 if value >= t_cut else value


def _sweep(g, phi0, phi1, alpha, config: PlannerConfig):
    sigma = _dilated_sigma(g, phi0, phi1, alpha)
    t_cut = cut_time(sigma)
    phases = np.linspace(0.0, t_cut, config.phase_samples, endpoint=False)
    ends = phi_map(sigma, phases, g, phi0, alpha, config.repark_steps)
    gaps = wrap(ends[:, 3] - phi1)
    return sigma, t_cut, phases, gaps


def _refine_phase(g, phi0, phi1, alpha, config: PlannerConfig):
    """Best (eps, phase, sigma) for one scale: sweep, then root or bounded minimum."""
    sigma, t_cut, phases, gaps = _sweep(g, phi0, phi1, alpha, config)

    def gap(phase):
        phi_end, _ = evaluate_phi_map(sigma, _phase_mod(phase, t_cut), g, phi0, alpha, config.repark_steps)
        return wrap(phi_end - phi1)

    n = len(phases)
    for i in range(n):
        a, b = phases[i], phases[i + 1] if i + 1 < n else t_cut
        fa, fb = gaps[i], gaps[(i + 1) % n]
        # Skip brackets where the gap jumps across the +-pi cut.
        if fa * fb <= 0 and abs(fa) < math.pi / 2 and abs(fb) < math.pi / 2:
            if fa == 0:
                return 0.0, float(a), sigma
            root = brentq(gap, a, b, xtol=1e-13, rtol=4 * np.finfo(float).eps)
            return abs(gap(root)), _phase_mod(root, t_cut), sigma

    i = int(np.argmin(np.abs(gaps)))
    width = t_cut / n
    found = minimize_scalar(lambda p: abs(gap(p)), bounds=(phases[i] - width, phases[i] + width),
                            method='bounded', options={'xatol': 1e-10})
    if found.fun < abs(gaps[i]):
        return float(found.fun), _phase_mod(found.x, t_cut), sigma
    return float(abs(gaps[i])), float(phases[i]), sigma


def _alpha_search(g, phi0, phi1, config: PlannerConfig) -> float:
    """Scale with the smallest sweep error over the grid, refined on a bounded interval."""
    grid = list(config.alpha_grid)

    def sweep_eps(alpha):
        return float(np.min(np.abs(_sweep(g, phi0, phi1, alpha, config)[3])))

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            errors = list(pool.map(sweep_eps, grid))
    else:
        errors = [sweep_eps(a) for a in grid]
    best = int(np.argmin(errors))
    step = grid[1] - grid[0] if len(grid) > 1 else 0.25
    lo = max(grid[0], grid[best] - step)
    hi = min(grid[-1], grid[best] + step)
    logger.debug("alpha grid errors: %s", dict(zip(grid, errors)))
    if hi <= lo:
        return grid[best]
    found = minimize_scalar(sweep_eps, bounds=(lo, hi), method='bounded', options={'xatol': 1e-4})
    return float(found.x) if found.fun <= errors[best] else grid[best]


def _repark_report(g, phi0, phi1, alpha, phase, sigma, config, tol, details):
    law = repark_controls(FigureEightParams(sigma, phase)).scaled(1.0 / alpha, 1.0)
    traj = integrate(TrailerSystem(g), np.array([0.0, 0.0, 0.0, phi0]), law,
                     config.repark_steps, alpha=alpha)
    goal = np.array([0.0, 0.0, 0.0, phi1])
    eps = config_distance(traj.endpoint, goal)
    end = traj.endpoint
    return PlanReport(
        kind='repark',
        geometry=g,
        start=np.array([0.0, 0.0, 0.0, phi0]),
        goal=goal,
        segments=(traj,),
        eps=eps,
        history=[eps],
        alpha=float(alpha),
        converged=eps <= tol,
        details={
            'sigma': sigma,
            'phase': phase,
            't_cut': law.horizon,
            'pose_residual': math.sqrt(end[0] ** 2 + end[1] ** 2 + wrap(end[2]) ** 2),
            **details,
        },
    )


def plan_repark(g: TrailerGeometry, phi0: float, phi1: float, tol: Optional[float] = None,
                alpha: AlphaOption = None, config: Optional[PlannerConfig] = None) -> PlanReport:
    """
    Change the hitch angle from phi0 to phi1 with the car returning to its pose.

    ``alpha`` pins the scale when it is a number; ``'search'`` (or None with
    no scale configured) tries alpha = 1 first and searches the grid only if
    that misses ``tol``.
    """
    config = config or planner_config()
    tol = config.repark_tol if tol is None else tol
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol!r}.")
    if phi0 == phi1:
        raise DomainError("phi0 equals phi1; there is nothing to repark.")
    if alpha is None:
        alpha = config.alpha if config.alpha is not None else 'search'

    if alpha != 'search':
        alpha = float(alpha)
        if not alpha > 0:
            raise DomainError(f"alpha must be positive, got {alpha!r}.")
        eps, phase, sigma = _refine_phase(g, phi0, phi1, alpha, config)
        report = _repark_report(g, phi0, phi1, alpha, phase, sigma, config, tol, {})
        logger.info("repark alpha=%.5f: eps=%.3e", alpha, report.eps)
        return report

    _, phase, sigma = _refine_phase(g, phi0, phi1, 1.0, config)
    unit = _repark_report(g, phi0, phi1, 1.0, phase, sigma, config, tol, {})
    logger.info("repark alpha=1: eps=%.3e", unit.eps)
    if unit.converged:
        unit.details['alpha_unit_eps'] = unit.eps
        return unit

    scale = _alpha_search(g, phi0, phi1, config)
    _, phase, sigma = _refine_phase(g, phi0, phi1, scale, config)
    scaled = _repark_report(g, phi0, phi1, scale, phase, sigma, config, tol,
                            {'alpha_unit_eps': unit.eps})
    logger.info("repark alpha=%.5f: eps=%.3e (alpha=1 gave %.3e)", scale, scaled.eps, unit.eps)
    if scaled.eps <= unit.eps:
        return scaled
    unit.details['alpha_unit_eps'] = unit.eps
    return unit


# Parking

def parse_restart_rule(rule) -> Tuple[str, float]:
    """'endpoint' or 'fraction:<beta>' (beta in (0, 1])."""
    if isinstance(rule, tuple):
        return rule
    if rule is None or rule == 'endpoint':
        return ('endpoint', 1.0)
    if isinstance(rule, str) and rule.startswith('fraction'):
        _, _, raw = rule.partition(':')
        try:
            beta = float(raw) if raw else 0.5
        except ValueError:
            raise DomainError(f"Bad restart fraction in {rule!r}.")
        if not 0 < beta <= 1:
            raise DomainError(f"Restart fraction must lie in (0, 1], got {beta!r}.")
        return ('fraction', beta)
    raise DomainError(f"Unknown restart rule {rule!r}; use 'endpoint' or 'fraction:<beta>'.")


def _restart_points(rule: Tuple[str, float], config: PlannerConfig) -> List[Tuple[str, float]]:
    """The rule's own point first, then the endpoint and a sweep of fractions."""
    points = [rule, ('endpoint', 1.0)]
    points += [('fraction', beta) for beta in (config.restart_fraction, 0.75, 0.5, 0.25)]
    seen = []
    for point in points:
        if point not in seen:
            seen.append(point)
    return seen


def _steer(g, start, goal, solver: SolverConfig):
    """Engel steering towards goal; a failed solve still lends its closest law."""
    rep = nearest_representative(start, goal)
    target = engel_target_general(start, rep, g).as_array()
    try:
        return steer_engel(target, solver)
    except SteeringFailed as exc:
        if exc.best is None:
            raise
        logger.info("Engel target %s missed by %.2e; driving the closest law", target, exc.best_residual)
        return exc.best


def _segment(g, start, goal, t0, length0, weighted0, solver: SolverConfig, config: PlannerConfig):
    """Steer the Engel approximation from start to goal and drive the exact system."""
    steering = _steer(g, start, goal, solver)
    law = reverse_law(steering.law)
    steps = steps_for(law.horizon, config.steps_per_unit, config.min_steps)
    traj = integrate(TrailerSystem(g), start, law, steps).shifted(t0, length0, weighted0)
    return traj, steering


def _continued(g, segments, goal, solver, config):
    tail = segments[-1]
    traj, _ = _segment(g, tail.endpoint, goal, float(tail.t[-1]), tail.sr_length,
                       tail.weighted, solver, config)
    return traj


def _first_pass(g, q0, q1, solver: SolverConfig, config: PlannerConfig) -> List[Trajectory]:
    """
    One steer from q0 to q1. When no law at all comes back, aim at a
    waypoint part of the way there first and continue to q1 from it.
    """
    rep = nearest_representative(q0, q1)
    for fraction in (1.0, 0.5, 0.25):
        waypoint = q0 + fraction * (rep - q0)
        try:
            first, steering = _segment(g, q0, waypoint, 0.0, 0.0, 0.0, solver, config)
        except SteeringFailed:
            logger.info("no Engel law towards %.2f of the way; trying a nearer waypoint", fraction)
            continue
        logger.info("first pass via %.2f of the way (Engel residual %.2e)", fraction, steering.residual)
        segments = [first]
        if fraction < 1.0:
            try:
                segments.append(_continued(g, segments, q1, solver, config))
            except (SteeringFailed, FrameSingular, IntegrationDiverged) as exc:
                logger.info("continuing from the waypoint failed: %s", exc)
        return segments
    raise SteeringFailed(math.inf, "No Engel law found towards the goal or any waypoint.")


def _cut(segments, point):
    """Segments kept and the restart state at ``point`` of the last segment."""
    last = segments[-1]
    if point[0] == 'endpoint':
        return list(segments), last.endpoint.copy()
    node = min(last.steps, max(1, int(round(point[1] * last.steps))))
    return list(segments[:-1]) + [last.head(node)], last.states[node].copy()


def plan_park(g: TrailerGeometry, q0, q1, tol: Optional[float] = None,
              max_iter: Optional[int] = None, restart_rule=None,
              config: Optional[PlannerConfig] = None,
              solver: Optional[SolverConfig] = None) -> PlanReport:
    """
    Iterative parking. Each pass restarts the Engel steering from a point of
    the last segment and is kept only if it lowers eps; the pass count,
    first pass included, is at most ``max_iter``.
    """
    config = config or planner_config()
    solver = solver or solver_config()
    tol = config.park_tol if tol is None else tol
    max_iter = config.max_iter if max_iter is None else int(max_iter)
    if not tol > 0:
        raise DomainError(f"tol must be positive, got {tol!r}.")
    if max_iter < 1:
        raise DomainError(f"max_iter must be at least 1, got {max_iter!r}.")
    rule = parse_restart_rule(restart_rule or config.restart_rule)
    q0 = np.asarray(as_state_array(q0), dtype=float)
    q1 = np.asarray(as_state_array(q1), dtype=float)

    def report(segments, eps, history, restarts, converged, **details):
        return PlanReport(
            kind='park', geometry=g, start=q0, goal=q1, segments=tuple(segments), eps=eps,
            iterations=max(1, len(history)), history=history, restarts=restarts,
            converged=converged, details=details,
        )

    if config_distance(q0, q1) == 0.0:
        return report([], 0.0, [0.0], [], True)

    try:
        segments = _first_pass(g, q0, q1, solver, config)
    except SteeringFailed as exc:
        exc.report = report([], config_distance(q0, q1), [config_distance(q0, q1)], [], False)
        raise
    eps = config_distance(segments[-1].endpoint, q1)
    history = [eps]
    restarts: List[np.ndarray] = []
    logger.info("park pass 1: eps=%.4f", eps)

    attempts = 1
    stalled = False
    while eps > tol and len(history) < max_iter:
        improved = False
        for point in _restart_points(rule, config):
            attempts += 1
            kept, restart = _cut(segments, point)
            tail = kept[-1]
            try:
                candidate, _ = _segment(g, restart, q1, float(tail.t[-1]), tail.sr_length,
                                        tail.weighted, solver, config)
            except (SteeringFailed, FrameSingular, IntegrationDiverged, DomainError) as exc:
                logger.info("restart at %s %.2f failed: %s", point[0], point[1], exc)
                continue
            new_eps = config_distance(candidate.endpoint, q1)
            if new_eps < eps:
                segments = kept + [candidate]
                restarts.append(restart)
                eps = new_eps
                history.append(eps)
                improved = True
                logger.info("park pass %d (%s %.2f): eps=%.4f", len(history), point[0], point[1], eps)
                break
            logger.info("restart at %s %.2f gives eps=%.4f, no better than %.4f",
                        point[0], point[1], new_eps, eps)
        if not improved:
            stalled = True
            break

    converged = eps <= tol
    if not converged:
        logger.warning("park stopped at eps=%.4f after %d attempts%s", eps, attempts,
                       " (stalled)" if stalled else "")
    return report(segments, eps, history, restarts, converged,
                  first_eps=history[0], attempts=attempts, stalled=stalled)


# Dubins baseline

def plan_dubins(g: TrailerGeometry, q0, goal_pose, radius: float,
                config: Optional[PlannerConfig] = None) -> Tuple[DubinsPath, PlanReport]:
    """
    Shortest forward car path to ``goal_pose`` = (x, y, theta); the trailer
    follows passively, so the goal's hitch angle is whatever the trailer ends
    with.
    """
    config = config or planner_config()
    q0 = np.asarray(as_state_array(q0), dtype=float)
    path = dubins_shortest(q0[:3], goal_pose, radius)
    law = path.to_law()
    if law is None:
        goal = q0.copy()
        return path, PlanReport('dubins', g, q0, goal, (), 0.0, history=[0.0],
                                details={'length': 0.0, 'radius': float(radius)})
    steps = steps_for(law.horizon, config.steps_per_unit, config.min_steps)
    segments = integrate_pieces(TrailerSystem(g), q0, law, steps)
    end = segments[-1].endpoint
    goal = np.array([goal_pose[0], goal_pose[1], goal_pose[2], end[3]], dtype=float)
    eps = config_distance(end, goal)
    return path, PlanReport(
        'dubins', g, q0, goal, segments, eps, history=[eps],
        details={'length': path.total, 'radius': float(radius), 'word': path.word},
    )
