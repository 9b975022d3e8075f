"""
Boundary conditions of the trailer problem expressed on the Engel group.

q~ = Gamma^{-1} (q0 - q1), Gamma built from X1..X4 at q0. The goal q1 goes to
the Engel origin and the start q0 to the Engel target q~1.
"""
import math

import numpy as np

from .exceptions import FrameSingular
from .kinematics import EngelPoint, TrailerGeometry, as_state_array, vf_X1, vf_X2, vf_X3, vf_X4, wrap

# |l_t + l_r cos(phi0)| below this (relative to l_t) counts as a singular frame.
SINGULAR_RTOL = 1e-12


def _check_frame(phi0: float, g: TrailerGeometry) -> float:
    den = g.frame_denominator(phi0)
    if abs(den) <= SINGULAR_RTOL * g.l_t:
        raise FrameSingular(
            f"Frame X1..X4 is singular at phi0 = {phi0:.6g}: l_t + l_r cos(phi0) = {den:.3e}."
        )
    return den


def frame(q, g: TrailerGeometry) -> np.ndarray:
    """Gamma(q): columns X1, X2, X3, X4 evaluated at q."""
    return np.column_stack([vf_X1(q, g), vf_X2(q, g), vf_X3(q, g), vf_X4(q, g)])


def engel_target_via_frame(q0, q1, g: TrailerGeometry) -> EngelPoint:
    q0 = as_state_array(q0)
    q1 = as_state_array(q1)
    _check_frame(q0[3], g)
    c = np.linalg.solve(frame(q0, g), q0 - q1)
    return EngelPoint.from_array(c)


def engel_target_general(q0, q1, g: TrailerGeometry) -> EngelPoint:
    """Closed form of Gamma(q0)^{-1} (q0 - q1), raw (unwrapped) differences."""
    x0, y0, th0, ph0 = as_state_array(q0)
    x1, y1, th1, ph1 = as_state_array(q1)
    den = _check_frame(ph0, g)
    dx, dy, dth, dph = x0 - x1, y0 - y1, th0 - th1, ph0 - ph1
    l_r, l_t = g.l_r, g.l_t

    along = dx * math.cos(th0) + dy * math.sin(th0)
    across = dx * math.sin(th0) - dy * math.cos(th0)
    trailer_across = dx * math.sin(ph0 + th0) - dy * math.cos(ph0 + th0)
    v = -(l_t / den) * (
        l_t ** 2 * (dth + dph)
        + l_r * l_t * dth * math.cos(ph0)
        + l_r * across
        + l_t * trailer_across
    )
    return EngelPoint(along, dth, across, v)


def repark_target(phi0: float, phi1: float, g: TrailerGeometry) -> EngelPoint:
    den = _check_frame(phi0, g)
    return EngelPoint(0.0, 0.0, 0.0, g.l_t ** 3 * (phi1 - phi0) / den)


def nearest_representative(q0, q1) -> np.ndarray:
    """q1 with theta and phi moved by multiples of 2 pi to lie nearest q0's."""
    q0 = as_state_array(q0)
    q1 = np.array(as_state_array(q1), dtype=float)
    q1[2] = q0[2] + wrap(q1[2] - q0[2])
    q1[3] = q0[3] + wrap(q1[3] - q0[3])
    return q1
