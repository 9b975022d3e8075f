"""
Vector fields of the robot-with-trailer system and of its Engel normal form.

States are plain float arrays in the order (x, y, theta, phi) for the trailer
and (xt, yt, z, v) for the Engel group. The ``velocity`` methods broadcast
over leading axes so a batch of states can be integrated at once.
"""
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .exceptions import DomainError


def wrap(angle):
    """Wrap an angle (or array of angles) to (-pi, pi]."""
    if np.ndim(angle) == 0:
        a = float(angle)
        if -math.pi < a <= math.pi:
            return a
        a = math.pi - ((math.pi - a) % (2.0 * math.pi))
        return a + 2.0 * math.pi if a <= -math.pi else a
    a = np.asarray(angle, dtype=float)
    inside = (a > -np.pi) & (a <= np.pi)
    w = np.pi - np.mod(np.pi - a, 2.0 * np.pi)
    w = np.where(w <= -np.pi, w + 2.0 * np.pi, w)
    return np.where(inside, a, w)


@dataclass(frozen=True)
class TrailerState:
    x: float
    y: float
    theta: float
    phi: float

    def __post_init__(self):
        object.__setattr__(self, 'x', float(self.x))
        object.__setattr__(self, 'y', float(self.y))
        object.__setattr__(self, 'theta', wrap(self.theta))
        object.__setattr__(self, 'phi', wrap(self.phi))

    @classmethod
    def from_array(cls, q) -> 'TrailerState':
        x, y, theta, phi = (float(c) for c in q)
        return cls(x, y, theta, phi)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta, self.phi])


@dataclass(frozen=True)
class TrailerGeometry:
    """Hitch offsets: robot point to hitch (l_r), hitch to trailer axle (l_t)."""

    l_r: float
    l_t: float
    phi_max: Optional[float] = None

    def __post_init__(self):
        if not self.l_t > 0:
            raise DomainError(f"l_t must be positive, got {self.l_t!r}.")
        if not self.l_r >= 0:
            raise DomainError(f"l_r must be non-negative, got {self.l_r!r}.")
        if self.phi_max is not None and not (0 < self.phi_max <= math.pi):
            raise DomainError(f"phi_max must lie in (0, pi], got {self.phi_max!r}.")
        object.__setattr__(self, 'l_r', float(self.l_r))
        object.__setattr__(self, 'l_t', float(self.l_t))

    def scaled(self, mu: float) -> 'TrailerGeometry':
        return TrailerGeometry(mu * self.l_r, mu * self.l_t, self.phi_max)

    def frame_denominator(self, phi0: float) -> float:
        return self.l_t + self.l_r * math.cos(phi0)


@dataclass(frozen=True)
class EngelPoint:
    xt: float
    yt: float
    z: float
    v: float

    @classmethod
    def from_array(cls, p) -> 'EngelPoint':
        xt, yt, z, v = (float(c) for c in p)
        return cls(xt, yt, z, v)

    def as_array(self) -> np.ndarray:
        return np.array([self.xt, self.yt, self.z, self.v])


def as_state_array(q) -> np.ndarray:
    if isinstance(q, (TrailerState, EngelPoint)):
        return q.as_array()
    return np.asarray(q, dtype=float)


# Trailer frame and its brackets

def vf_X1(q, g: TrailerGeometry) -> np.ndarray:
    _, _, theta, phi = as_state_array(q)
    return np.array([math.cos(theta), math.sin(theta), 0.0, -math.sin(phi) / g.l_t])


def vf_X2(q, g: TrailerGeometry) -> np.ndarray:
    phi = as_state_array(q)[3]
    return np.array([0.0, 0.0, 1.0, -g.l_r * math.cos(phi) / g.l_t - 1.0])


def vf_X3(q, g: TrailerGeometry) -> np.ndarray:
    """[X1, X2]."""
    _, _, theta, phi = as_state_array(q)
    return np.array([
        math.sin(theta),
        -math.cos(theta),
        0.0,
        -(g.l_r + g.l_t * math.cos(phi)) / g.l_t ** 2,
    ])


def vf_X4(q, g: TrailerGeometry) -> np.ndarray:
    """[X1, X3]."""
    phi = as_state_array(q)[3]
    return np.array([0.0, 0.0, 0.0, -(g.l_t + g.l_r * math.cos(phi)) / g.l_t ** 3])


# Engel frame

def engel_X1(p) -> np.ndarray:
    _, yt, _, _ = as_state_array(p)
    return np.array([1.0, 0.0, -yt / 2.0, 0.0])


def engel_X2(p) -> np.ndarray:
    xt, yt, _, _ = as_state_array(p)
    return np.array([0.0, 1.0, xt / 2.0, (xt * xt + yt * yt) / 2.0])


def lie_bracket(f, g, q, h: float = 1e-5) -> np.ndarray:
    """[f, g](q) = Dg(q) f(q) - Df(q) g(q), Jacobians by central differences."""
    q = np.asarray(q, dtype=float)

    def jacobian(field):
        cols = []
        for i in range(q.size):
            e = np.zeros_like(q)
            e[i] = h
            cols.append((field(q + e) - field(q - e)) / (2.0 * h))
        return np.column_stack(cols)

    return jacobian(g) @ f(q) - jacobian(f) @ g(q)


def dilate(q, g: TrailerGeometry, u: Tuple[float, float], mu: float):
    """The similarity delta_mu applied to state, geometry and control."""
    if not mu > 0:
        raise DomainError(f"Dilation factor must be positive, got {mu!r}.")
    x, y, theta, phi = as_state_array(q)
    u1, u2 = u
    return (
        TrailerState(mu * x, mu * y, theta, phi),
        g.scaled(mu),
        (mu * u1, u2),
    )


def engel_dilation(p, lam: float) -> np.ndarray:
    """(xt, yt, z, v) -> (lam xt, lam yt, lam^2 z, lam^3 v); batched over leading axes."""
    if not lam > 0:
        raise DomainError(f"Dilation factor must be positive, got {lam!r}.")
    return np.asarray(p, dtype=float) * np.array([lam, lam, lam ** 2, lam ** 3])


# Systems consumed by the integrator

@dataclass(frozen=True)
class TrailerSystem:
    geometry: TrailerGeometry
    name: str = 'trailer'

    def velocity(self, q: np.ndarray, u: np.ndarray) -> np.ndarray:
        theta = q[..., 2]
        phi = q[..., 3]
        u1 = u[..., 0]
        u2 = u[..., 1]
        l_r, l_t = self.geometry.l_r, self.geometry.l_t
        return np.stack([
            u1 * np.cos(theta),
            u1 * np.sin(theta),
            u2 + 0.0 * theta,
            -u1 * np.sin(phi) / l_t - u2 * (l_r * np.cos(phi) / l_t + 1.0),
        ], axis=-1)


@dataclass(frozen=True)
class EngelSystem:
    name: str = 'engel'

    def velocity(self, q: np.ndarray, u: np.ndarray) -> np.ndarray:
        xt = q[..., 0]
        yt = q[..., 1]
        u1 = u[..., 0]
        u2 = u[..., 1]
        return np.stack([
            u1 + 0.0 * xt,
            u2 + 0.0 * xt,
            (u2 * xt - u1 * yt) / 2.0,
            u2 * (xt * xt + yt * yt) / 2.0,
        ], axis=-1)
