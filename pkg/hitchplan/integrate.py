"""
Fixed-step integration of q' = u1 X1(q) + u2 X2(q) under a time-varying control.

Classical RK4 on a uniform grid. Controls are sampled once, vectorised, at the
grid nodes and the stage midpoints; the loop itself only touches states.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from .exceptions import DomainError, IntegrationDiverged

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ControlLaw:
    """
    Smooth control on [0, horizon].

    ``evaluator`` maps an array of times of shape (n,) to controls of shape
    (n, 2); a batched law returns (n, B, 2) and is only accepted by
    ``final_states``.
    """

    horizon: float
    evaluator: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def __post_init__(self):
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise DomainError(f"Control horizon must be finite and positive, got {self.horizon!r}.")
        object.__setattr__(self, 'horizon', float(self.horizon))

    def sample(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.asarray(self.evaluator(t), dtype=float)

    def __call__(self, t) -> np.ndarray:
        return self.sample([t])[0]

    def scaled(self, c1: float, c2: float = 1.0) -> 'ControlLaw':
        factors = np.array([c1, c2])
        return ControlLaw(self.horizon, lambda t: self.sample(t) * factors)

    @classmethod
    def constant(cls, u, horizon: float) -> 'ControlLaw':
        u = np.asarray(u, dtype=float)
        return cls(horizon, lambda t: np.broadcast_to(u, (len(t), 2)).copy())

    @classmethod
    def from_samples(cls, t, u) -> 'ControlLaw':
        """Cubic-spline law through node controls (used to replay exported files)."""
        t = np.asarray(t, dtype=float)
        u = np.asarray(u, dtype=float)
        if len(t) < 2:
            raise DomainError("A sampled control law needs at least two nodes.")
        if len(t) == 2:
            slope = (u[1] - u[0]) / (t[1] - t[0])
            return cls(t[1] - t[0], lambda s: u[0] + np.outer(s, slope))
        spline = CubicSpline(t - t[0], u, axis=0)
        return cls(t[-1] - t[0], spline)


@dataclass(frozen=True)
class PiecewiseLaw:
    """Concatenation of smooth laws; integration restarts the grid at every switch."""

    pieces: Tuple[ControlLaw, ...]

    def __post_init__(self):
        if not self.pieces:
            raise DomainError("A piecewise law needs at least one piece.")
        object.__setattr__(self, 'pieces', tuple(self.pieces))

    @property
    def horizon(self) -> float:
        return float(sum(p.horizon for p in self.pieces))

    @property
    def switches(self) -> np.ndarray:
        return np.cumsum([p.horizon for p in self.pieces])[:-1]

    def sample(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        edges = np.concatenate([[0.0], np.cumsum([p.horizon for p in self.pieces])])
        index = np.clip(np.searchsorted(edges, t, side='right') - 1, 0, len(self.pieces) - 1)
        out = np.empty((len(t), 2))
        for i, piece in enumerate(self.pieces):
            mask = index == i
            if np.any(mask):
                out[mask] = piece.sample(t[mask] - edges[i])
        return out

    def __call__(self, t) -> np.ndarray:
        return self.sample([t])[0]


AnyLaw = Union[ControlLaw, PiecewiseLaw]


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution on a strictly increasing grid, with plain and weighted lengths."""

    t: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    length: np.ndarray
    weighted_length: np.ndarray
    alpha: float = 1.0

    def __post_init__(self):
        if len(self.t) < 2:
            raise DomainError("A trajectory needs at least one integration step.")
        if np.any(np.diff(self.t) <= 0):
            raise DomainError("Trajectory grid must be strictly increasing.")
        for name in ('t', 'states', 'controls', 'length', 'weighted_length'):
            getattr(self, name).setflags(write=False)

    @property
    def steps(self) -> int:
        return len(self.t) - 1

    @property
    def start(self) -> np.ndarray:
        return self.states[0]

    @property
    def endpoint(self) -> np.ndarray:
        return self.states[-1]

    @property
    def horizon(self) -> float:
        return float(self.t[-1] - self.t[0])

    @property
    def sr_length(self) -> float:
        return float(self.length[-1])

    @property
    def weighted(self) -> float:
        return float(self.weighted_length[-1])

    def head(self, index: int) -> 'Trajectory':
        """Prefix ending at grid node ``index``."""
        index = int(index)
        if index < 1 or index > self.steps:
            raise DomainError(f"Cannot cut a {self.steps}-step trajectory at node {index}.")
        end = index + 1
        return Trajectory(
            self.t[:end].copy(), self.states[:end].copy(), self.controls[:end].copy(),
            self.length[:end].copy(), self.weighted_length[:end].copy(), self.alpha,
        )

    def shifted(self, dt: float, dlength: float = 0.0, dweighted: float = 0.0) -> 'Trajectory':
        return Trajectory(
            self.t + dt, self.states.copy(), self.controls.copy(),
            self.length + dlength, self.weighted_length + dweighted, self.alpha,
        )


def rk4(velocity, q0, t, u_nodes=None, u_mid=None, on_step=None, keep=True):
    """
    Classical RK4 on grid ``t``.

    ``u_nodes`` / ``u_mid`` hold the controls at the nodes and at the stage
    midpoints (None for autonomous systems). ``on_step(n, q)`` is called with
    every accepted state; ``keep=False`` skips storing the path.
    """
    q = np.array(q0, dtype=float)
    h = np.diff(t)
    states = np.empty((len(t),) + q.shape) if keep else None
    if keep:
        states[0] = q
    if on_step is not None:
        on_step(0, q)
    for n in range(len(h)):
        hn = h[n]
        un = None if u_nodes is None else u_nodes[n]
        um = None if u_mid is None else u_mid[n]
        un1 = None if u_nodes is None else u_nodes[n + 1]
        k1 = velocity(q, un)
        k2 = velocity(q + 0.5 * hn * k1, um)
        k3 = velocity(q + 0.5 * hn * k2, um)
        k4 = velocity(q + hn * k3, un1)
        q_next = q + (hn / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(q_next)):
            raise IntegrationDiverged(n)
        q = q_next
        if keep:
            states[n + 1] = q
        if on_step is not None:
            on_step(n + 1, q)
    return states if keep else q


def _grid(horizon: float, steps: int):
    if int(steps) < 1:
        raise DomainError(f"Integration needs at least one step, got {steps!r}.")
    t = np.linspace(0.0, horizon, int(steps) + 1)
    return t, 0.5 * (t[:-1] + t[1:])


def integrate(system, q0, law: AnyLaw, steps: int, alpha: float = 1.0) -> Trajectory:
    """Integrate ``system`` from ``q0`` under ``law`` with ``steps`` RK4 steps."""
    if isinstance(law, PiecewiseLaw):
        return join(integrate_pieces(system, q0, law, steps, alpha))
    t, mid = _grid(law.horizon, steps)
    u_nodes = law.sample(t)
    u_mid = law.sample(mid)
    states = rk4(system.velocity, np.asarray(q0, dtype=float), t, u_nodes, u_mid)
    speed = np.hypot(u_nodes[:, 0], u_nodes[:, 1])
    weighted = np.hypot(u_nodes[:, 0], alpha * u_nodes[:, 1])
    return Trajectory(
        t=t,
        states=states,
        controls=u_nodes,
        length=cumulative_trapezoid(speed, t, initial=0.0),
        weighted_length=cumulative_trapezoid(weighted, t, initial=0.0),
        alpha=float(alpha),
    )


def integrate_pieces(system, q0, law: PiecewiseLaw, steps: int,
                     alpha: float = 1.0) -> Tuple[Trajectory, ...]:
    """One trajectory per piece; grid nodes land exactly on the switching times."""
    total = law.horizon
    out = []
    q = np.asarray(q0, dtype=float)
    offset = length = weighted = 0.0
    for piece in law.pieces:
        n = max(1, int(round(steps * piece.horizon / total)))
        traj = integrate(system, q, piece, n, alpha).shifted(offset, length, weighted)
        out.append(traj)
        q = traj.endpoint
        offset = float(traj.t[-1])
        length = float(traj.length[-1])
        weighted = float(traj.weighted_length[-1])
    return tuple(out)


def join(pieces: Sequence[Trajectory]) -> Trajectory:
    """Glue consecutive pieces; the shared boundary node keeps the incoming control."""
    pieces = list(pieces)
    if len(pieces) == 1:
        return pieces[0]
    t = [pieces[0].t]
    states = [pieces[0].states]
    controls = [pieces[0].controls]
    length = [pieces[0].length]
    weighted = [pieces[0].weighted_length]
    for p in pieces[1:]:
        t.append(p.t[1:])
        states.append(p.states[1:])
        controls.append(p.controls[1:])
        length.append(p.length[1:])
        weighted.append(p.weighted_length[1:])
    return Trajectory(
        np.concatenate(t), np.concatenate(states), np.concatenate(controls),
        np.concatenate(length), np.concatenate(weighted), pieces[0].alpha,
    )


def final_states(system, q0, law: ControlLaw, steps: int) -> np.ndarray:
    """
    Endpoints only. Accepts batched laws (evaluator returning (n, B, 2)), in
    which case ``q0`` is broadcast to (B, 4) and all members advance together.
    """
    t, mid = _grid(law.horizon, steps)
    u_nodes = law.sample(t)
    u_mid = law.sample(mid)
    q0 = np.broadcast_to(np.asarray(q0, dtype=float), u_nodes.shape[1:-1] + (4,)).copy()
    return rk4(system.velocity, q0, t, u_nodes, u_mid, keep=False)


def convergence_order(system, q0, law: ControlLaw, steps: int = 32) -> float:
    """
    Empirical order from endpoints at steps N, 2N, 4N.

    Returns ``inf`` when the N and 2N endpoints already agree to rounding,
    which happens for flows RK4 integrates exactly.
    """
    e1, e2, e4 = (final_states(system, q0, law, n) for n in (steps, 2 * steps, 4 * steps))
    d12 = float(np.linalg.norm(e1 - e2))
    d24 = float(np.linalg.norm(e2 - e4))
    floor = 1e-13 * (1.0 + float(np.linalg.norm(e4)))
    if d12 <= floor or d24 <= floor:
        return math.inf
    order = math.log2(d12 / d24)
    logger.debug("RK4 self-test: |e_N - e_2N| = %.3e, |e_2N - e_4N| = %.3e, order %.3f", d12, d24, order)
    return order
