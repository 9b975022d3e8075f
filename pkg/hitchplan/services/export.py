"""
Trajectory files.

One row per grid node, 15 significant digits. A plan with several segments
writes each boundary node twice (closing one segment, opening the next), so a
repeated time marks where a segment starts.
"""
import logging
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from ..exceptions import ScenarioError
from ..integrate import ControlLaw, Trajectory, integrate
from ..kinematics import EngelSystem, TrailerSystem

logger = logging.getLogger(__name__)

TRAILER_COLUMNS = ['t', 'x', 'y', 'theta', 'phi', 'u1', 'u2']
ENGEL_COLUMNS = ['t', 'xt', 'yt', 'z', 'v', 'u1', 'u2']
FLOAT_FORMAT = '%.15g'


def _frame(segments: Sequence[Trajectory], columns: List[str]) -> pd.DataFrame:
    blocks = [
        np.column_stack([s.t, s.states, s.controls]) for s in segments
    ]
    data = np.vstack(blocks) if blocks else np.empty((0, len(columns)))
    return pd.DataFrame(data, columns=columns)


def write_trajectory_csv(segments: Sequence[Trajectory], path: str, engel: bool = False) -> pd.DataFrame:
    df = _frame(segments, ENGEL_COLUMNS if engel else TRAILER_COLUMNS)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info("wrote %d rows to %s", len(df), path)
    return df


def read_trajectory_csv(path: str, engel: bool = False) -> List[pd.DataFrame]:
    """The file's segments, split where a time value repeats."""
    columns = ENGEL_COLUMNS if engel else TRAILER_COLUMNS
    try:
        df = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise ScenarioError(f"cannot read trajectory file {path!r}: {exc}.")
    if list(df.columns) != columns:
        raise ScenarioError(f"expected header {','.join(columns)}, got {','.join(map(str, df.columns))}.",
                            line=1)
    numeric = df.apply(pd.to_numeric, errors='coerce')
    bad = ~np.isfinite(numeric.to_numpy(dtype=float)).all(axis=1)
    if bad.any():
        raise ScenarioError("non-numeric or non-finite value.", line=int(np.flatnonzero(bad)[0]) + 2)
    df = numeric
    t = df['t'].to_numpy()
    dt = np.diff(t)
    if np.any(dt < 0):
        raise ScenarioError("time column must not decrease.", field='t', line=int(np.flatnonzero(dt < 0)[0]) + 3)
    bounds = [0, *(np.flatnonzero(dt == 0) + 1), len(df)]
    segments = [df.iloc[a:b].reset_index(drop=True) for a, b in zip(bounds[:-1], bounds[1:])]
    for part in segments:
        if len(part) < 2:
            raise ScenarioError("every segment needs at least two nodes.", field='t')
    return segments


def replay(segments: Sequence[pd.DataFrame], system) -> Tuple[Trajectory, ...]:
    """
    Re-integrate stored controls on each segment's own grid.

    The first state comes from the file; later segments start where the
    previous replayed segment ended.
    """
    out = []
    state = segments[0].iloc[0, 1:5].to_numpy(dtype=float)
    for part in segments:
        t = part['t'].to_numpy(dtype=float)
        u = part[['u1', 'u2']].to_numpy(dtype=float)
        law = ControlLaw.from_samples(t, u)
        traj = integrate(system, state, law, len(t) - 1).shifted(float(t[0]))
        out.append(traj)
        state = traj.endpoint
    return tuple(out)


def stored_endpoint(segments: Sequence[pd.DataFrame]) -> np.ndarray:
    return segments[-1].iloc[-1, 1:5].to_numpy(dtype=float)


def replay_file(path: str, geometry=None, engel: bool = False):
    """(stored endpoint, replayed trajectories) for a trajectory file."""
    segments = read_trajectory_csv(path, engel=engel)
    system = EngelSystem() if engel else TrailerSystem(geometry)
    return stored_endpoint(segments), replay(segments, system)
