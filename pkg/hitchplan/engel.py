"""
Steering on the Engel group.

Two ways to build controls:

* ``repark_controls`` gives the closed-form figure-eight laws (Jacobi
  elliptic functions) that move only the v coordinate;
* ``steer_engel`` reaches a general target by multi-start shooting on the
  normal Hamiltonian flow, then re-integrates the resulting law to measure how
  far it actually lands from the target.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import least_squares

from .conf import SolverConfig, solver_config, steps_for
from .elliptic import Modulus, complete_E, complete_K, jacobi_sn_cn_dn, solve_k0
from .exceptions import DomainError, IntegrationDiverged, SteeringFailed
from .integrate import ControlLaw, PiecewiseLaw, Trajectory, integrate, rk4
from .kinematics import EngelPoint, EngelSystem, as_state_array, engel_dilation

logger = logging.getLogger(__name__)

ENGEL = EngelSystem()


@dataclass(frozen=True)
class FigureEightParams:
    sigma: float
    phase: float = 0.0
    k0: Modulus = None

    def __post_init__(self):
        if self.k0 is None:
            object.__setattr__(self, 'k0', solve_k0())
        if not (np.isfinite(self.sigma) and self.sigma != 0):
            raise DomainError(f"sigma must be a non-zero real, got {self.sigma!r}.")
        if not (0.0 <= self.phase < self.t_cut):
            raise DomainError(
                f"phase must lie in [0, {self.t_cut:.6g}), got {self.phase!r}."
            )
        object.__setattr__(self, 'sigma', float(self.sigma))
        object.__setattr__(self, 'phase', float(self.phase))

    @property
    def t_cut(self) -> float:
        return cut_time(self.sigma, self.k0)

    @property
    def v_shift(self) -> float:
        """|v| moved by one figure-eight: 8E(k0) / (3 sigma^3)."""
        return 8.0 * complete_E(self.k0) / (3.0 * self.sigma ** 3)


def cut_time(sigma: float, k0: Optional[Modulus] = None) -> float:
    k0 = k0 or solve_k0()
    return 4.0 * complete_K(k0) / abs(sigma)


@dataclass(frozen=True)
class Covector4:
    """Momenta dual to the Engel frame X1..X4."""

    h1: float
    h2: float
    h3: float
    h4: float

    @classmethod
    def from_array(cls, h) -> 'Covector4':
        return cls(*(float(c) for c in h))

    def as_array(self) -> np.ndarray:
        return np.array([self.h1, self.h2, self.h3, self.h4])

    @property
    def speed(self) -> float:
        return math.hypot(self.h1, self.h2)

    def normalized(self) -> 'Covector4':
        r = self.speed
        if r == 0:
            raise DomainError("Covector with h1 = h2 = 0 has no normal extremal.")
        return Covector4.from_array(self.as_array() / r)


@dataclass(frozen=True)
class SteeringResult:
    law: ControlLaw
    residual: float
    target: EngelPoint
    covector: Covector4
    perturbed: bool = False
    starts: int = 0
    refined: int = 0
    evaluations: int = 0
    trajectory: Optional[Trajectory] = field(default=None, repr=False)

    @property
    def horizon(self) -> float:
        return self.law.horizon


# Closed-form figure-eight laws

def _figure_eight(sigma: float, k0: Modulus, shifted: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    sn, _, dn = jacobi_sn_cn_dn(abs(sigma) * shifted, k0)
    sign = math.copysign(1.0, sigma)
    return sign * 2.0 * k0.k * sn * dn, -sign * (2.0 * dn * dn - 1.0)


def repark_controls(p: FigureEightParams) -> ControlLaw:
    t_cut = p.t_cut

    def evaluate(t):
        u1, u2 = _figure_eight(p.sigma, p.k0, p.phase + t_cut - t)
        return np.stack([u1, u2], axis=-1)

    return ControlLaw(t_cut, evaluate)


def repark_controls_batch(sigma: float, phases, k0: Optional[Modulus] = None) -> ControlLaw:
    """All phases at once: the evaluator returns (n, len(phases), 2)."""
    k0 = k0 or solve_k0()
    phases = np.asarray(phases, dtype=float)
    t_cut = cut_time(sigma, k0)

    def evaluate(t):
        u1, u2 = _figure_eight(sigma, k0, phases[None, :] + t_cut - t[:, None])
        return np.stack([u1, u2], axis=-1)

    return ControlLaw(t_cut, evaluate)


def sigma_from_v(v1: float, k0: Optional[Modulus] = None) -> float:
    if v1 == 0 or not np.isfinite(v1):
        raise DomainError("v1 must be finite and non-zero; the target is already reached.")
    k0 = k0 or solve_k0()
    return float(np.cbrt(8.0 * complete_E(k0) / (3.0 * v1)))


def reverse_law(law):
    """law'(t) = -law(t1 - t)."""
    if isinstance(law, PiecewiseLaw):
        return PiecewiseLaw(tuple(reverse_law(p) for p in reversed(law.pieces)))
    horizon = law.horizon
    return ControlLaw(horizon, lambda t: -law.sample(horizon - t))


# Normal Hamiltonian flow
#
# State layout: (xt, yt, z, v, h1, h2, h3, h4); feedback u = (h1, h2).

def _pmp_velocity(y, _u=None):
    xt, yt = y[..., 0], y[..., 1]
    h1, h2, h3, h4 = y[..., 4], y[..., 5], y[..., 6], y[..., 7]
    return np.stack([
        h1,
        h2,
        (h2 * xt - h1 * yt) / 2.0,
        h2 * (xt * xt + yt * yt) / 2.0,
        -h2 * h3,
        h1 * h3,
        h1 * h4,
        0.0 * h4,
    ], axis=-1)


def _pmp_jacobian(y) -> np.ndarray:
    xt, yt, _, _, h1, h2, h3, h4 = y
    J = np.zeros((8, 8))
    J[0, 4] = J[1, 5] = 1.0
    J[2, 0], J[2, 1], J[2, 4], J[2, 5] = h2 / 2.0, -h1 / 2.0, -yt / 2.0, xt / 2.0
    J[3, 0], J[3, 1], J[3, 5] = h2 * xt, h2 * yt, (xt * xt + yt * yt) / 2.0
    J[4, 5], J[4, 6] = -h3, -h2
    J[5, 4], J[5, 6] = h3, h1
    J[6, 4], J[6, 7] = h4, h1
    return J


def _variational(_t, w):
    y = w[:8]
    Y = w[8:].reshape(8, 4)
    return np.concatenate([_pmp_velocity(y), (_pmp_jacobian(y) @ Y).ravel()])


def hamiltonian_flow(h0: Covector4, t1: float, steps: int) -> Tuple[EngelPoint, Covector4]:
    """Joint state and costate at t1, RK4 from the Engel origin."""
    h = h0.as_array()
    if abs(h[0] ** 2 + h[1] ** 2 - 1.0) > 1e-9:
        raise DomainError("Initial covector must satisfy h1^2 + h2^2 = 1.")
    if not (t1 > 0 and np.isfinite(t1)):
        raise DomainError(f"Flow time must be finite and positive, got {t1!r}.")
    y0 = np.concatenate([np.zeros(4), h])
    t = np.linspace(0.0, t1, int(steps) + 1)
    y1 = rk4(_pmp_velocity, y0, t, keep=False)
    return EngelPoint.from_array(y1[:4]), Covector4.from_array(y1[4:])


def _solve(rhs, y0, horizon, **kwargs):
    sol = solve_ivp(rhs, (0.0, horizon), y0, method='DOP853', **kwargs)
    if not sol.success:
        raise IntegrationDiverged(len(sol.t) - 1, f"Extremal flow failed: {sol.message}")
    return sol


def flow_endpoint(p) -> np.ndarray:
    """
    Engel endpoint after unit time from covector p of any speed.

    The extremal has horizon |(p1, p2)|; scaling the covector as
    (lam p1, lam p2, p3, p4 / lam) dilates the endpoint by lam.
    """
    y0 = np.concatenate([np.zeros(4), np.asarray(p, dtype=float)])
    sol = _solve(lambda t, y: _pmp_velocity(y), y0, 1.0, rtol=1e-11, atol=1e-12)
    return sol.y[:4, -1]


def _flow_with_jacobian(p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    w0 = np.concatenate([np.zeros(4), p, np.vstack([np.zeros((4, 4)), np.eye(4)]).ravel()])
    w = _solve(_variational, w0, 1.0, rtol=1e-11, atol=1e-12).y[:, -1]
    return w[:4], w[8:].reshape(8, 4)[:4]


def covector_dilation(p, lam: float) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return p * np.array([lam, lam, 1.0, 1.0 / lam])


def extremal_law(h0: Covector4, t1: float) -> ControlLaw:
    """
    Controls (cos psi, sin psi) of the normal extremal from unit covector h0.

    psi' = h3, h3' = h4 cos psi is solved once with dense output.
    """
    psi0 = math.atan2(h0.h2, h0.h1)
    h4 = h0.h4
    sol = _solve(lambda t, y: [y[1], h4 * math.cos(y[0])], [psi0, h0.h3], t1,
                 dense_output=True, rtol=1e-12, atol=1e-12)

    def evaluate(t):
        psi = sol.sol(t)[0]
        return np.stack([np.cos(psi), np.sin(psi)], axis=-1)

    return ControlLaw(t1, evaluate)


# Shooting
#
# Targets are first dilated to unit homogeneous size, so one cached atlas of
# unit-speed flows serves every target; solutions are dilated back.

# Newton residual (unit-size coordinates) below which a covector counts as solved.
NEWTON_TOL = 1e-9


def homogeneous_size(q) -> float:
    x, y, z, v = as_state_array(q)
    return math.hypot(x, y) + math.sqrt(abs(z)) + float(np.cbrt(abs(v)))


def initial_starts(config: SolverConfig) -> np.ndarray:
    """
    Unit covectors (h1, h2, h3, h4): a (psi, h3, h4) grid followed by seeded
    random draws. Grid values of h3, h4 are denser near zero.
    """
    L = config.bound
    psi = np.linspace(0.0, 2.0 * np.pi, config.angles, endpoint=False)
    s = np.linspace(-1.0, 1.0, config.grid)
    h = L * s * np.abs(s)
    P, H3, H4 = np.meshgrid(psi, h, h, indexing='ij')
    grid = np.column_stack([P.ravel(), H3.ravel(), H4.ravel()])
    rng = np.random.default_rng(config.seed)
    random = np.column_stack([
        rng.uniform(0.0, 2.0 * np.pi, config.random_starts),
        rng.uniform(-L, L, config.random_starts),
        rng.uniform(-L, L, config.random_starts),
    ])
    starts = np.vstack([grid, random])
    return np.column_stack([np.cos(starts[:, 0]), np.sin(starts[:, 0]), starts[:, 1], starts[:, 2]])


@dataclass(frozen=True)
class ShootingAtlas:
    """Unit-speed extremals of every start, sampled on a common time grid."""

    starts: np.ndarray
    times: np.ndarray
    points: np.ndarray = field(repr=False)  # (len(times), len(starts), 4), float32

    def closest(self, target) -> Tuple[np.ndarray, np.ndarray]:
        """Per start: smallest homogeneous gap to ``target`` and the time it occurs."""
        d = self.points - np.asarray(target, dtype=np.float32)
        gap = d[..., 0] ** 2 + d[..., 1] ** 2 + np.abs(d[..., 2]) + np.abs(d[..., 3]) ** (2.0 / 3.0)
        gap[0] = np.inf
        index = np.argmin(gap, axis=0)
        best = gap[index, np.arange(gap.shape[1])]
        return best.astype(float), self.times[index]


@lru_cache(maxsize=4)
def _atlas(angles, grid, bound, random_starts, seed, scan_steps, scan_horizon) -> ShootingAtlas:
    config = SolverConfig(bound=bound, angles=angles, grid=grid, random_starts=random_starts,
                          seed=seed, scan_steps=scan_steps, scan_horizon=scan_horizon)
    starts = initial_starts(config)
    times = np.linspace(0.0, scan_horizon, scan_steps + 1)
    points = np.empty((len(times), len(starts), 4), dtype=np.float32)

    def record(n, y):
        points[n] = y[:, :4]

    y0 = np.hstack([np.zeros((len(starts), 4)), starts])
    rk4(_pmp_velocity, y0, times, on_step=record, keep=False)
    logger.debug("shooting atlas: %d starts, %d samples each", len(starts), len(times))
    return ShootingAtlas(starts, times, points)


def shooting_atlas(config: SolverConfig) -> ShootingAtlas:
    return _atlas(config.angles, config.grid, config.bound, config.random_starts,
                  config.seed, config.scan_steps, config.scan_horizon)


class _Shot:
    """Endpoint residual and its Jacobian from one variational solve per covector."""

    def __init__(self, target: np.ndarray):
        self.target = target
        self._p = None

    def _update(self, p):
        if self._p is None or not np.array_equal(p, self._p):
            self._end, self._jac = _flow_with_jacobian(p)
            self._p = np.array(p)

    def residual(self, p):
        self._update(p)
        return self._end - self.target

    def jacobian(self, p):
        self._update(p)
        return self._jac


@dataclass(frozen=True)
class _Fit:
    index: int
    p: Optional[np.ndarray]
    residual: float
    nfev: int

    @property
    def speed(self) -> float:
        return math.hypot(self.p[0], self.p[1])


def _refine(p0: np.ndarray, target: np.ndarray, max_nfev: int):
    shot = _Shot(target)
    fit = least_squares(shot.residual, p0, jac=shot.jacobian, method='lm', max_nfev=max_nfev,
                        xtol=1e-14, ftol=1e-14, gtol=1e-15)
    return fit.x, float(np.linalg.norm(fit.fun)), fit.nfev


def _fit(index: int, p0: np.ndarray, target: np.ndarray, config: SolverConfig) -> _Fit:
    try:
        p, residual, nfev = _refine(p0, target, config.max_nfev)
    except (IntegrationDiverged, ValueError, FloatingPointError) as exc:
        logger.debug("start %d rejected: %s", index, exc)
        return _Fit(index, None, math.inf, 0)
    if not np.isfinite(residual) or math.hypot(p[0], p[1]) == 0:
        return _Fit(index, None, math.inf, nfev)
    logger.debug("start %d: speed %.6f, residual %.3e (%d evaluations)",
                 index, math.hypot(p[0], p[1]), residual, nfev)
    return _Fit(index, p, residual, nfev)


def _continue(index: int, p0: np.ndarray, target: np.ndarray, config: SolverConfig) -> _Fit:
    """
    Walk from the endpoint of p0 to target along a straight line, warm
    starting each solve from the previous covector; the step halves on failure.
    """
    try:
        reached = flow_endpoint(p0)
    except IntegrationDiverged:
        return _Fit(index, None, math.inf, 0)
    p, s, ds, nfev = np.array(p0, dtype=float), 0.0, 0.25, 0
    for _ in range(config.continuation_steps):
        s_next = min(1.0, s + ds)
        goal = reached + s_next * (target - reached)
        try:
            p_next, residual, used = _refine(p, goal, 20)
        except (IntegrationDiverged, ValueError, FloatingPointError):
            p_next, residual, used = p, math.inf, 0
        nfev += used
        if residual <= NEWTON_TOL and math.hypot(p_next[0], p_next[1]) > 0:
            p, s = p_next, s_next
            if s >= 1.0:
                logger.debug("start %d: continuation reached the target", index)
                return _Fit(index, p, residual, nfev)
            ds *= 1.5
        else:
            ds *= 0.5
            if ds < 1.0 / 256:
                break
    return _Fit(index, None, math.inf, nfev)


def _law_from(p: np.ndarray):
    cov = Covector4.from_array(p)
    h0 = cov.normalized()
    return h0, extremal_law(h0, cov.speed)


def _verify(fit: _Fit, lam: float, target: np.ndarray, config: SolverConfig):
    """Dilate the covector back and re-integrate its law on the Engel system."""
    p = covector_dilation(fit.p, lam)
    try:
        h0, law = _law_from(p)
        steps = steps_for(law.horizon, config.steps_per_unit, config.min_steps)
        traj = integrate(ENGEL, np.zeros(4), law, steps)
    except (IntegrationDiverged, DomainError) as exc:
        logger.debug("start %d: re-integration failed: %s", fit.index, exc)
        return None
    residual = float(np.linalg.norm(traj.endpoint - target))
    if not np.isfinite(residual):
        return None
    return residual, h0, law, traj


def perturb_degenerate(target: np.ndarray) -> Tuple[np.ndarray, bool]:
    """Targets with xt * z == 0 are moved by 1e-6 * max(1, |target|) in xt and z."""
    if target[0] * target[2] != 0:
        return target, False
    eps = 1e-6 * max(1.0, float(np.linalg.norm(target)))
    return target + np.array([eps, 0.0, eps, 0.0]), True


def steer_engel(target, config: Optional[SolverConfig] = None) -> SteeringResult:
    """
    Controls steering the Engel origin to ``target``.

    Of all solutions within ``config.tol`` the one with the shortest horizon
    is returned. Raises SteeringFailed (with the closest result attached) if
    none is found.
    """
    config = config or solver_config()
    target = as_state_array(target)
    if not np.any(target):
        raise DomainError("Target coincides with the origin; nothing to steer.")
    solved, perturbed = perturb_degenerate(target)
    if perturbed:
        logger.info("degenerate target %s perturbed to %s", target, solved)

    lam = homogeneous_size(solved)
    unit = engel_dilation(solved, 1.0 / lam)
    atlas = shooting_atlas(config)
    gap, t_best = atlas.closest(unit)
    order = np.argsort(gap, kind='stable')[:config.candidates]
    seeds = [(int(i), atlas.starts[i] * max(t_best[i], 1e-3)) for i in order]
    logger.debug("scan over %d starts; best gap %.3e", len(atlas.starts), gap[order[0]])

    fits = []
    chunk = max(1, int(config.workers))
    for offset in range(0, len(seeds), chunk):
        batch = seeds[offset:offset + chunk]
        if chunk == 1:
            fits.extend(_fit(i, p0, unit, config) for i, p0 in batch)
        else:
            with ThreadPoolExecutor(max_workers=chunk) as pool:
                fits.extend(pool.map(lambda s: _fit(s[0], s[1], unit, config), batch))
        if sum(f.residual <= NEWTON_TOL for f in fits) >= config.accept:
            break

    if not any(f.residual <= NEWTON_TOL for f in fits):
        for i, p0 in seeds[:config.continuations]:
            fit = _continue(i, p0, unit, config)
            fits.append(fit)
            if fit.p is not None:
                break

    evaluations = sum(f.nfev for f in fits)
    solved_fits = sorted((f for f in fits if f.residual <= NEWTON_TOL), key=lambda f: f.speed)
    others = sorted((f for f in fits if f.p is not None and f.residual > NEWTON_TOL),
                    key=lambda f: f.residual)
    best = None
    for fit in solved_fits + others[:1]:
        checked = _verify(fit, lam, solved, config)
        if checked is None:
            continue
        if best is None or checked[0] < best[0]:
            best = checked
        if checked[0] <= config.tol:
            best = checked
            break

    if best is None:
        raise SteeringFailed(math.inf)
    residual, h0, law, traj = best
    result = SteeringResult(
        law=law,
        residual=residual,
        target=EngelPoint.from_array(solved),
        covector=h0,
        perturbed=perturbed,
        starts=len(atlas.starts),
        refined=len(fits),
        evaluations=evaluations,
        trajectory=traj,
    )
    if residual > config.tol:
        raise SteeringFailed(residual, best=result)
    logger.info("steered to %s: horizon %.6f, residual %.3e", solved, law.horizon, residual)
    return result
