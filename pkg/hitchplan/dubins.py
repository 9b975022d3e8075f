"""
Forward-only shortest paths for a car with minimum turning radius R.

The six candidate words are evaluated in the normalised frame (start at the
origin, goal on the positive x axis, unit radius); infeasible words are
skipped and the shortest feasible one wins.
"""
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .exceptions import DomainError
from .integrate import ControlLaw, PiecewiseLaw

WORDS = ('LSL', 'RSR', 'LSR', 'RSL', 'RLR', 'LRL')

# p^2 this close below zero is a tangency, not an infeasible word.
TANGENT_SLACK = 1e-12

# Normalised segment lengths below this are zero (coincident poses, exact tangencies).
ZERO_ARC = 1e-12


def mod2pi(theta: float) -> float:
    value = theta - 2.0 * math.pi * math.floor(theta / (2.0 * math.pi))
    if value >= 2.0 * math.pi - 1e-12:
        return 0.0
    return value


def _lsl(alpha, beta, d):
    sa, sb, ca, cb = math.sin(alpha), math.sin(beta), math.cos(alpha), math.cos(beta)
    p_sq = 2.0 + d * d - 2.0 * math.cos(alpha - beta) + 2.0 * d * (sa - sb)
    if p_sq < -TANGENT_SLACK:
        return None
    tmp = math.atan2(cb - ca, d + sa - sb)
    return mod2pi(-alpha + tmp), math.sqrt(max(p_sq, 0.0)), mod2pi(beta - tmp)


def _rsr(alpha, beta, d):
    sa, sb, ca, cb = math.sin(alpha), math.sin(beta), math.cos(alpha), math.cos(beta)
    p_sq = 2.0 + d * d - 2.0 * math.cos(alpha - beta) + 2.0 * d * (sb - sa)
    if p_sq < -TANGENT_SLACK:
        return None
    tmp = math.atan2(ca - cb, d - sa + sb)
    return mod2pi(alpha - tmp), math.sqrt(max(p_sq, 0.0)), mod2pi(-beta + tmp)


def _lsr(alpha, beta, d):
    sa, sb, ca, cb = math.sin(alpha), math.sin(beta), math.cos(alpha), math.cos(beta)
    p_sq = -2.0 + d * d + 2.0 * math.cos(alpha - beta) + 2.0 * d * (sa + sb)
    if p_sq < -TANGENT_SLACK:
        return None
    p = math.sqrt(max(p_sq, 0.0))
    tmp = math.atan2(-ca - cb, d + sa + sb) - math.atan2(-2.0, p)
    return mod2pi(-alpha + tmp), p, mod2pi(-beta + tmp)


def _rsl(alpha, beta, d):
    sa, sb, ca, cb = math.sin(alpha), math.sin(beta), math.cos(alpha), math.cos(beta)
    p_sq = -2.0 + d * d + 2.0 * math.cos(alpha - beta) - 2.0 * d * (sa + sb)
    if p_sq < -TANGENT_SLACK:
        return None
    p = math.sqrt(max(p_sq, 0.0))
    tmp = math.atan2(ca + cb, d - sa - sb) - math.atan2(2.0, p)
    return mod2pi(alpha - tmp), p, mod2pi(beta - tmp)


def _rlr(alpha, beta, d):
    sa, sb, ca, cb = math.sin(alpha), math.sin(beta), math.cos(alpha), math.cos(beta)
    tmp = (6.0 - d * d + 2.0 * math.cos(alpha - beta) + 2.0 * d * (sa - sb)) / 8.0
    if abs(tmp) > 1.0:
        return None
    p = mod2pi(2.0 * math.pi - math.acos(tmp))
    t = mod2pi(alpha - math.atan2(ca - cb, d - sa + sb) + p / 2.0)
    return t, p, mod2pi(alpha - beta - t + p)


def _lrl(alpha, beta, d):
    sa, sb, ca, cb = math.sin(alpha), math.sin(beta), math.cos(alpha), math.cos(beta)
    tmp = (6.0 - d * d + 2.0 * math.cos(alpha - beta) + 2.0 * d * (sb - sa)) / 8.0
    if abs(tmp) > 1.0:
        return None
    p = mod2pi(2.0 * math.pi - math.acos(tmp))
    t = mod2pi(-alpha - math.atan2(ca - cb, d + sa - sb) + p / 2.0)
    return t, p, mod2pi(beta - alpha - t + p)


SOLVERS = {
    'LSL': _lsl,
    'RSR': _rsr,
    'LSR': _lsr,
    'RSL': _rsl,
    'RLR': _rlr,
    'LRL': _lrl,
}


@dataclass(frozen=True)
class DubinsPath:
    word: str
    segments: Tuple[float, float, float]
    radius: float
    start: Tuple[float, float, float]
    goal: Tuple[float, float, float]

    def __post_init__(self):
        if self.word not in SOLVERS:
            raise DomainError(f"Unknown Dubins word {self.word!r}.")
        if any(s < 0 for s in self.segments):
            raise DomainError("Dubins segment lengths must be non-negative.")

    @property
    def total(self) -> float:
        return float(sum(self.segments))

    def curvature(self, letter: str) -> float:
        return {'L': 1.0 / self.radius, 'S': 0.0, 'R': -1.0 / self.radius}[letter]

    def to_law(self) -> Optional[PiecewiseLaw]:
        """Unit-speed law u1 = 1, u2 in {1/R, 0, -1/R}; None for a zero-length path."""
        pieces = [
            ControlLaw.constant((1.0, self.curvature(letter)), length)
            for letter, length in zip(self.word, self.segments)
            if length > 0
        ]
        return PiecewiseLaw(tuple(pieces)) if pieces else None

    def poses(self, spacing: float = 0.05) -> np.ndarray:
        """Closed-form (x, y, theta) samples along the path, both ends included."""
        x, y, th = self.start
        out = [(x, y, th)]
        for letter, length in zip(self.word, self.segments):
            if length <= 0:
                continue
            kappa = self.curvature(letter)
            n = max(1, int(math.ceil(length / spacing)))
            s = np.linspace(0.0, length, n + 1)[1:]
            if kappa == 0:
                xs = x + s * math.cos(th)
                ys = y + s * math.sin(th)
                ths = np.full_like(s, th)
            else:
                ths = th + kappa * s
                xs = x + (np.sin(ths) - math.sin(th)) / kappa
                ys = y - (np.cos(ths) - math.cos(th)) / kappa
            out.extend(zip(xs, ys, ths))
            x, y, th = float(xs[-1]), float(ys[-1]), float(ths[-1])
        return np.array(out)


def dubins_candidates(start, goal, radius: float):
    """Every feasible word with its (t, p, q) lengths in the original units."""
    if not radius > 0:
        raise DomainError(f"Turning radius must be positive, got {radius!r}.")
    x0, y0, th0 = (float(c) for c in start)
    x1, y1, th1 = (float(c) for c in goal)
    dx, dy = x1 - x0, y1 - y0
    d = math.hypot(dx, dy) / radius
    theta = mod2pi(math.atan2(dy, dx)) if d > 0 else 0.0
    alpha = mod2pi(th0 - theta)
    beta = mod2pi(th1 - theta)
    found = []
    for word in WORDS:
        lengths = SOLVERS[word](alpha, beta, d)
        if lengths is not None:
            found.append((word, tuple(0.0 if s < ZERO_ARC else radius * s for s in lengths)))
    return found


def dubins_shortest(start, goal, radius: float) -> DubinsPath:
    candidates = dubins_candidates(start, goal, radius)
    if not candidates:
        raise DomainError("No Dubins word connects these poses.")
    # min keeps the first of equal totals, so ties resolve in WORDS order.
    word, segments = min(candidates, key=lambda c: sum(c[1]))
    return DubinsPath(
        word=word,
        segments=segments,
        radius=float(radius),
        start=tuple(float(c) for c in start),
        goal=tuple(float(c) for c in goal),
    )
