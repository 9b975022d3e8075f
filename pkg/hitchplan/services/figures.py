import logging

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..exceptions import DomainError  # noqa: E402

logger = logging.getLogger(__name__)

ROBOT_COLOR = '#1f4e79'
TRAILER_COLOR = '#c55a11'
GHOST_COLOR = '#9e9e9e'


def hitch_and_axle(states: np.ndarray, l_r: float, l_t: float):
    """Hitch point (l_r behind the robot point) and trailer axle (l_t behind the hitch)."""
    states = np.atleast_2d(states)
    x, y, theta, phi = states.T
    hx = x - l_r * np.cos(theta)
    hy = y - l_r * np.sin(theta)
    ax = hx - l_t * np.cos(theta + phi)
    ay = hy - l_t * np.sin(theta + phi)
    return np.column_stack([hx, hy]), np.column_stack([ax, ay])


def _draw_pose(axes, q, l_r, l_t, color, alpha):
    (hx, hy), (ax, ay) = (p[0] for p in hitch_and_axle(np.asarray(q, dtype=float), l_r, l_t))
    x, y, theta = q[0], q[1], q[2]
    # Robot body as an arrow along its heading, trailer as the hitch bar.
    size = max(0.25, 0.15 * (l_r + l_t))
    axes.annotate('', xy=(x + size * np.cos(theta), y + size * np.sin(theta)), xytext=(x, y),
                  arrowprops={'arrowstyle': '-|>', 'color': color, 'alpha': alpha, 'lw': 2})
    axes.plot([x, hx, ax], [y, hy, ay], '-', color=color, alpha=alpha, lw=2.5)
    axes.plot([ax], [ay], 's', color=color, alpha=alpha, ms=6)


def emit_figure(report, path: str, title: str = '') -> str:
    """Write an SVG of the robot path, trailer path, start and goal ghosts and restart points."""
    traj = report.trajectory
    if traj is None or len(traj.t) < 2:
        raise DomainError("Nothing to draw: the plan has fewer than two samples.")
    g = report.geometry
    states = traj.states
    _, axle = hitch_and_axle(states, g.l_r, g.l_t)

    plt.rcParams['svg.hashsalt'] = 'hitchplan'
    fig, axes = plt.subplots(figsize=(7, 6))
    try:
        axes.plot(states[:, 0], states[:, 1], '-', color=ROBOT_COLOR, lw=1.5, label='robot')
        axes.plot(axle[:, 0], axle[:, 1], '--', color=TRAILER_COLOR, lw=1.2, label='trailer axle')
        _draw_pose(axes, report.start, g.l_r, g.l_t, ROBOT_COLOR, 0.9)
        _draw_pose(axes, report.goal, g.l_r, g.l_t, GHOST_COLOR, 0.6)
        axes.plot([states[0, 0]], [states[0, 1]], 'o', color=ROBOT_COLOR, ms=7, label='start')
        axes.plot([states[-1, 0]], [states[-1, 1]], 'x', color='k', ms=8, mew=2, label='end')
        if report.restarts:
            pts = np.array(report.restarts)
            axes.plot(pts[:, 0], pts[:, 1], 'o', color='k', ms=5, label='restart')
        axes.set_aspect('equal', adjustable='datalim')
        axes.grid(True, alpha=0.3)
        axes.set_xlabel('x')
        axes.set_ylabel('y')
        axes.set_title(title or f"{report.kind}: eps = {report.eps:.4g}")
        axes.legend(loc='upper right', fontsize='small')
        fig.savefig(path, format='svg', metadata={'Date': None})
    finally:
        plt.close(fig)
    logger.info("figure written to %s", path)
    return path
