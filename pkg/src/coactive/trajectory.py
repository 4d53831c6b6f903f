"""Trajectory representation and signals derived from it.

A trajectory is an ordered block of joint configurations with implicit
uniform timestamps t_j = j/(N-1). The carried object rides at the wrist;
its tilt away from the world vertical is q2+q3+q4 wrapped into [0, pi].
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .world import Scene, wrist_elbow_positions

# Canonical waypoint count after resampling: enough for three non-trivial
# time segments and short spectra, small enough for fast extraction.
DEFAULT_WAYPOINTS = 30


@dataclass(frozen=True)
class Trajectory:
    waypoints: np.ndarray  # (N, 4) joint configurations

    def __post_init__(self):
        w = np.array(self.waypoints, dtype=float)
        if w.ndim != 2 or w.shape[1] != 4 or w.shape[0] < 2:
            raise ValueError(f"waypoints must be (N>=2, 4), got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("waypoints must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "waypoints", w)

    def __len__(self) -> int:
        return self.waypoints.shape[0]


@dataclass(frozen=True)
class ObjectTrack:
    positions: np.ndarray   # (N, 3) carried-object centers (wrist)
    deviations: np.ndarray  # (N,) tilt from vertical, radians in [0, pi]


def resample(t: Trajectory, n: int) -> Trajectory:
    """Piecewise-linear joint-space resampling to n uniformly spaced waypoints.

    Endpoints are preserved exactly and resampling at a trajectory's own
    uniform spacing reproduces it bit for bit.
    """
    if n < 2:
        raise ValueError("resample requires n >= 2")
    src = t.waypoints
    m = src.shape[0]
    out = np.empty((n, 4))
    for k in range(n):
        # exact when the source index is integral, so identity holds bitwise
        pos = (k * (m - 1)) / (n - 1)
        i = int(pos)
        frac = pos - i
        if frac == 0.0:
            out[k] = src[i]
        else:
            out[k] = src[i] + frac * (src[i + 1] - src[i])
    return Trajectory(out)


def thirds(t: Trajectory | int) -> tuple[range, range, range]:
    """Split waypoint indices into three contiguous time segments.

    Sizes are ceil(N/3), ceil((N - first)/2) and the remainder; together
    they partition 0..N-1.
    """
    n = t if isinstance(t, int) else len(t)
    if n < 3:
        raise ValueError("thirds requires at least 3 waypoints")
    a = -(-n // 3)
    b = -(-(n - a) // 2)
    c = n - a - b
    return range(0, a), range(a, a + b), range(a + b, n)


def object_track(scene: Scene, t: Trajectory) -> ObjectTrack:
    """Carried-object positions (wrist) and tilt-from-vertical per waypoint."""
    _, wrist = wrist_elbow_positions(scene.arm, t.waypoints)
    pitch = t.waypoints[:, 1] + t.waypoints[:, 2] + t.waypoints[:, 3]
    wrapped = np.mod(pitch + math.pi, 2.0 * math.pi) - math.pi
    dev = np.abs(wrapped)
    wrist.setflags(write=False)
    dev.setflags(write=False)
    return ObjectTrack(positions=wrist, deviations=dev)


def trajectory_to_dict(t: Trajectory) -> dict:
    return {"waypoints": t.waypoints.tolist()}


def trajectory_to_json(t: Trajectory) -> str:
    return json.dumps(trajectory_to_dict(t))


def trajectory_from_dict(data: dict) -> Trajectory:
    unknown = set(data) - {"waypoints"}
    if unknown:
        raise ValueError(f"unknown trajectory fields: {sorted(unknown)}")
    return Trajectory(np.array(data["waypoints"], dtype=float))


def trajectory_from_json(text: str) -> Trajectory:
    return trajectory_from_dict(json.loads(text))


def trajectory_to_csv(scene: Scene, t: Trajectory) -> str:
    """CSV export with joint values, wrist position and tilt per waypoint."""
    track = object_track(scene, t)
    buf = io.StringIO()
    buf.write("j,q1,q2,q3,q4,wrist_x,wrist_y,wrist_z,deviation\n")
    for j in range(len(t)):
        q = t.waypoints[j]
        p = track.positions[j]
        buf.write(
            f"{j},{q[0]!r},{q[1]!r},{q[2]!r},{q[3]!r},"
            f"{p[0]!r},{p[1]!r},{p[2]!r},{track.deviations[j]!r}\n"
        )
    return buf.getvalue()
