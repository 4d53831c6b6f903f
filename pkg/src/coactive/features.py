"""Blocked feature extraction for scored trajectories.

Two blocks feed the linear score:

* interaction features (4*M^2 entries for M attribute labels): waypoints
  link to nearby or underlying scene objects, and each link contributes a
  4-vector (per-axis collision-distance projections plus a below bit) into
  the block selected by the (other-object attribute, carried-object
  attribute) pair.
* motion features (75 entries): arm posture extrema in cylindrical
  coordinates per time third (27), carried-object tilt and oscillation
  spectra (28), and clearances from surrounding surfaces, table and goal
  with a vertical-clearance spectrogram grid (20).

Motion entries are rescaled by published per-entry constants (distances by
2 m, angles by pi, spectra and cosines untouched) so that feature norms
stay comparable across blocks. Everything here is a pure function of its
inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .trajectory import Trajectory, object_track, thirds
from .world import (
    BELOW_MARGIN,
    Scene,
    SceneObject,
    cylindrical_many,
    wrist_elbow_positions,
)

# Collision-proximity threshold linking a waypoint to an object, meters.
DEFAULT_PROXIMITY = 0.10

# Horizontal clearance is capped so the feature stays bounded when no
# surface is anywhere near.
HORIZONTAL_CAP = 2.0

DISTANCE_SCALE = 2.0
ANGLE_SCALE = math.pi

ROBOT_BLOCK = 27
OBJECT_BLOCK = 28
ENV_BLOCK = 20
MOTION_LENGTH = ROBOT_BLOCK + OBJECT_BLOCK + ENV_BLOCK  # 75


def interaction_length(n_attributes: int) -> int:
    return 4 * n_attributes * n_attributes


@dataclass(frozen=True)
class FeatureVector:
    interaction: np.ndarray  # (4*M^2,)
    motion: np.ndarray       # (75,)

    def __post_init__(self):
        inter = np.array(self.interaction, dtype=float)
        mot = np.array(self.motion, dtype=float)
        if mot.shape != (MOTION_LENGTH,):
            raise ValueError(f"motion block must have length {MOTION_LENGTH}")
        if inter.ndim != 1 or inter.size % 4 != 0:
            raise ValueError("interaction block length must be a multiple of 4")
        if not (np.all(np.isfinite(inter)) and np.all(np.isfinite(mot))):
            raise ValueError("feature entries must be finite")
        inter.setflags(write=False)
        mot.setflags(write=False)
        object.__setattr__(self, "interaction", inter)
        object.__setattr__(self, "motion", mot)

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.interaction, self.motion])


@dataclass(frozen=True)
class InteractionEdge:
    """Link between a waypoint and a scene object that affects it."""

    waypoint_index: int
    object_id: str
    base_features: np.ndarray  # (sep_x, sep_y, sep_z, below)


@lru_cache(maxsize=128)
def _dft_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    j = np.arange(n)
    k = np.arange(n // 2 + 1)
    angles = 2.0 * math.pi * np.outer(k, j) / n
    return np.cos(angles), np.sin(angles)


def periodogram(signal) -> np.ndarray:
    """One-sided, energy-normalized power spectrum of a mean-removed signal.

    Bin k (0..n//2) carries the power at k/n cycles per sample; interior
    bins are doubled so the bins sum to the mean squared signal exactly
    (Parseval). The DC bin is zero by construction.
    """
    x = np.asarray(signal, dtype=float)
    n = x.size
    if n == 0:
        return np.zeros(1)
    d = x - x.sum() / n
    cos_t, sin_t = _dft_tables(n)
    re = cos_t @ d
    im = sin_t @ d
    psd = (re * re + im * im) / (n * n)
    m = n // 2
    if n % 2 == 0:
        psd[1:m] *= 2.0
    else:
        psd[1:] *= 2.0
    return psd


def psd_bands(signal) -> tuple[float, float]:
    """Mean spectral power below and above the half-Nyquist split.

    Segments shorter than 3 samples have no resolvable high band; it is
    defined as 0 and all non-DC power lands in the low band.
    """
    x = np.asarray(signal, dtype=float)
    n = x.size
    psd = periodogram(x)
    m = n // 2
    if n < 3:
        low = float(psd[1:].sum() / (m)) if m >= 1 else 0.0
        return low, 0.0
    split = m // 2
    low = psd[1 : split + 1]
    high = psd[split + 1 : m + 1]
    return (
        float(low.sum() / low.size) if low.size else 0.0,
        float(high.sum() / high.size) if high.size else 0.0,
    )


def _edges_arrays(
    scene: Scene, positions: np.ndarray, proximity: float
) -> tuple[np.ndarray, np.ndarray, list[SceneObject]]:
    """Per (waypoint, obstacle) link mask and base feature 4-vectors."""
    others = list(scene.obstacles)
    n = positions.shape[0]
    if not others:
        return np.zeros((n, 0), dtype=bool), np.zeros((n, 0, 4)), others
    carried = scene.manipulated.half_extents
    centers = np.stack([o.center for o in others])       # (K, 3)
    halves = np.stack([o.half_extents for o in others])  # (K, 3)
    delta = np.abs(positions[:, None, :] - centers[None, :, :])
    gaps = np.maximum(delta - (halves[None, :, :] + carried[None, None, :]), 0.0)
    dist = np.sqrt(np.sum(gaps * gaps, axis=2))  # (N, K)
    tops = centers[:, 2] + halves[:, 2]
    below = (
        (tops[None, :] < positions[:, 2:3])
        & (delta[:, :, 0] <= halves[None, :, 0] + BELOW_MARGIN)
        & (delta[:, :, 1] <= halves[None, :, 1] + BELOW_MARGIN)
    )
    mask = (dist < proximity) | below
    base = np.concatenate([gaps, below[:, :, None].astype(float)], axis=2)
    return mask, base, others


def build_edges(
    scene: Scene, t: Trajectory, proximity: float = DEFAULT_PROXIMITY, *, track=None
) -> list[InteractionEdge]:
    """All (waypoint, object) links: close to collision or resting above."""
    if not proximity > 0:
        raise ValueError("proximity threshold must be positive")
    track = track if track is not None else object_track(scene, t)
    mask, base, others = _edges_arrays(scene, track.positions, proximity)
    edges = []
    for j, k in zip(*np.nonzero(mask)):
        edges.append(
            InteractionEdge(
                waypoint_index=int(j),
                object_id=others[k].id,
                base_features=base[j, k].copy(),
            )
        )
    return edges


def interaction_features(
    scene: Scene, t: Trajectory, proximity: float = DEFAULT_PROXIMITY, *, track=None
) -> np.ndarray:
    """Accumulate edge 4-vectors into attribute-pair blocks.

    Block (p, q) collects edges whose object has attribute p while the
    carried object has attribute q; blocks are laid out p-major.
    """
    if not proximity > 0:
        raise ValueError("proximity threshold must be positive")
    m = len(scene.attributes)
    track = track if track is not None else object_track(scene, t)
    mask, base, others = _edges_arrays(scene, track.positions, proximity)
    carried_attrs = scene.manipulated.attributes.astype(float)
    out = np.zeros((m, m, 4))
    if others:
        labels = np.stack([o.attributes for o in others]).astype(float)  # (K, M)
        weighted = mask[:, :, None] * base                               # (N, K, 4)
        per_attr = np.einsum("kp,jkc->pc", labels, weighted)             # (M, 4)
        out = per_attr[:, None, :] * carried_attrs[None, :, None]        # (M, M, 4)
    return out.reshape(-1)


def _third_slices(n: int) -> tuple[slice, slice, slice]:
    parts = thirds(n)
    return tuple(slice(p.start, p.stop) for p in parts)  # type: ignore[return-value]


def arm_posture_features(scene: Scene, t: Trajectory) -> np.ndarray:
    """27 posture extrema: per time third, max/min of r, theta, z over the
    wrist-and-elbow point set plus the elbow coordinate wherever the wrist
    coordinate peaks (earliest waypoint on ties)."""
    n = len(t)
    if n < 3:
        raise ValueError("need at least 3 waypoints")
    elbow, wrist = wrist_elbow_positions(scene.arm, t.waypoints)
    origin = scene.arm.shoulder_origin
    wr = cylindrical_many(wrist, origin)
    el = cylindrical_many(elbow, origin)
    out = np.empty(ROBOT_BLOCK)
    pos = 0
    for sl in _third_slices(n):
        for wc, ec in zip(wr, el):
            both = np.concatenate([wc[sl], ec[sl]])
            out[pos] = both.max()
            out[pos + 1] = both.min()
            pos += 2
        for wc, ec in zip(wr, el):
            peak = int(np.argmax(wc[sl]))
            out[pos] = ec[sl][peak]
            pos += 1
    return out


def object_behavior_features(scene: Scene, t: Trajectory, *, track=None) -> np.ndarray:
    """28 tilt and oscillation features.

    Per third: cosine of the largest tilt excursion from the final tilt,
    then low/high spectral power of wrist x, y, z and of the tilt signal.
    One global entry holds the largest excursion over the whole motion.
    """
    n = len(t)
    if n < 3:
        raise ValueError("need at least 3 waypoints")
    track = track if track is not None else object_track(scene, t)
    dev = track.deviations
    excursion = np.abs(dev - dev[-1])
    signals = (
        track.positions[:, 0],
        track.positions[:, 1],
        track.positions[:, 2],
        dev,
    )
    out = np.empty(OBJECT_BLOCK)
    pos = 0
    for sl in _third_slices(n):
        out[pos] = math.cos(float(excursion[sl].max()))
        pos += 1
        for sig in signals:
            low, high = psd_bands(sig[sl])
            out[pos] = low
            out[pos + 1] = high
            pos += 2
    out[pos] = float(excursion.max())
    return out


def _support_gaps(scene: Scene, positions: np.ndarray) -> np.ndarray:
    """Vertical gap from the carried-object bottom to the highest surface
    underneath (table, or any box top whose footprint contains the x-y)."""
    carried = scene.manipulated.half_extents
    bottoms = positions[:, 2] - carried[2]
    support = np.full_like(bottoms, scene.table_height)
    for obj in scene.obstacles:
        inside = (np.abs(positions[:, 0] - obj.center[0]) <= obj.half_extents[0]) & (
            np.abs(positions[:, 1] - obj.center[1]) <= obj.half_extents[1]
        )
        under = inside & (obj.top <= bottoms)
        support[under] = np.maximum(support[under], obj.top)
    return bottoms - support


def _horizontal_clearances(scene: Scene, positions: np.ndarray) -> np.ndarray:
    """Horizontal distance to the nearest box overlapping vertically, capped."""
    carried = scene.manipulated.half_extents
    n = positions.shape[0]
    best = np.full(n, HORIZONTAL_CAP)
    bottoms = positions[:, 2] - carried[2]
    tops = positions[:, 2] + carried[2]
    for obj in scene.obstacles:
        overlap = (obj.bottom <= tops) & (obj.top >= bottoms)
        gx = np.maximum(
            np.abs(positions[:, 0] - obj.center[0]) - (obj.half_extents[0] + carried[0]), 0.0
        )
        gy = np.maximum(
            np.abs(positions[:, 1] - obj.center[1]) - (obj.half_extents[1] + carried[1]), 0.0
        )
        d = np.hypot(gx, gy)
        best = np.where(overlap, np.minimum(best, d), best)
    return np.minimum(best, HORIZONTAL_CAP)


def environment_features(scene: Scene, t: Trajectory, *, track=None) -> np.ndarray:
    """20 clearance features: per-third minima of support gap, horizontal
    clearance, table distance and goal distance; trajectory-wide means of
    the first two; and a 3x2 spectrogram grid of the support-gap signal."""
    n = len(t)
    if n < 3:
        raise ValueError("need at least 3 waypoints")
    track = track if track is not None else object_track(scene, t)
    pos = track.positions
    vgap = _support_gaps(scene, pos)
    hclear = _horizontal_clearances(scene, pos)
    tdist = np.abs(pos[:, 2] - scene.table_height)
    gdist = np.linalg.norm(pos - scene.goal, axis=1)
    out = np.empty(ENV_BLOCK)
    i = 0
    slices = _third_slices(n)
    for sl in slices:
        out[i] = vgap[sl].min()
        out[i + 1] = hclear[sl].min()
        out[i + 2] = tdist[sl].min()
        out[i + 3] = gdist[sl].min()
        i += 4
    out[i] = vgap.mean()
    out[i + 1] = hclear.mean()
    i += 2
    for sl in slices:
        low, high = psd_bands(vgap[sl])
        out[i] = low
        out[i + 1] = high
        i += 2
    return out


def motion_scale() -> np.ndarray:
    """Published per-entry divisors for the motion block."""
    scale = np.ones(MOTION_LENGTH)
    i = 0
    for _ in range(3):  # posture thirds: r, r, theta, theta, z, z, r, theta, z
        scale[i : i + 9] = [
            DISTANCE_SCALE,
            DISTANCE_SCALE,
            ANGLE_SCALE,
            ANGLE_SCALE,
            DISTANCE_SCALE,
            DISTANCE_SCALE,
            DISTANCE_SCALE,
            ANGLE_SCALE,
            DISTANCE_SCALE,
        ]
        i += 9
    i += OBJECT_BLOCK - 1  # cosines and spectra stay raw
    scale[i] = ANGLE_SCALE  # global tilt excursion is an angle
    i += 1
    scale[i : i + 14] = DISTANCE_SCALE  # 12 clearance minima + 2 means
    i += 14
    # 6 spectrogram-grid entries stay raw
    return scale


MOTION_SCALE = motion_scale()
MOTION_SCALE.setflags(write=False)


def extract(
    scene: Scene, t: Trajectory, proximity: float = DEFAULT_PROXIMITY
) -> FeatureVector:
    """Full feature vector: interaction block plus scaled motion block."""
    track = object_track(scene, t)
    motion = np.concatenate(
        [
            arm_posture_features(scene, t),
            object_behavior_features(scene, t, track=track),
            environment_features(scene, t, track=track),
        ]
    )
    motion /= MOTION_SCALE
    return FeatureVector(
        interaction=interaction_features(scene, t, proximity, track=track),
        motion=motion,
    )


def feature_layout(attributes: tuple[str, ...]) -> list[dict]:
    """Index-keyed layout manifest for both blocks, for UIs and exports."""
    entries: list[dict] = []
    m = len(attributes)
    components = ("sep_x", "sep_y", "sep_z", "below")
    idx = 0
    for p in range(m):
        for q in range(m):
            for comp in components:
                entries.append(
                    {
                        "vector": "interaction",
                        "index": idx,
                        "block": f"pair[{attributes[p]}:{attributes[q]}]",
                        "third": None,
                        "description": f"{comp} accumulated over edges where the other "
                        f"object is {attributes[p]} and the carried object is {attributes[q]}",
                    }
                )
                idx += 1
    idx = 0
    posture_names = (
        "r max", "r min", "theta max", "theta min", "z max", "z min",
        "elbow r at wrist r peak", "elbow theta at wrist theta peak",
        "elbow z at wrist z peak",
    )
    for third in range(3):
        for name in posture_names:
            entries.append(
                {
                    "vector": "motion",
                    "index": idx,
                    "block": "arm_posture",
                    "third": third,
                    "description": f"{name} (third {third + 1})",
                }
            )
            idx += 1
    behavior_names = (
        "cos of max tilt excursion from final",
        "wrist x PSD low", "wrist x PSD high",
        "wrist y PSD low", "wrist y PSD high",
        "wrist z PSD low", "wrist z PSD high",
        "tilt PSD low", "tilt PSD high",
    )
    for third in range(3):
        for name in behavior_names:
            entries.append(
                {
                    "vector": "motion",
                    "index": idx,
                    "block": "object_behavior",
                    "third": third,
                    "description": f"{name} (third {third + 1})",
                }
            )
            idx += 1
    entries.append(
        {
            "vector": "motion",
            "index": idx,
            "block": "object_behavior",
            "third": None,
            "description": "max tilt excursion from final over whole trajectory",
        }
    )
    idx += 1
    env_names = (
        "min support gap", "min horizontal clearance",
        "min table distance", "min goal distance",
    )
    for third in range(3):
        for name in env_names:
            entries.append(
                {
                    "vector": "motion",
                    "index": idx,
                    "block": "environment",
                    "third": third,
                    "description": f"{name} (third {third + 1})",
                }
            )
            idx += 1
    for name in ("mean support gap", "mean horizontal clearance"):
        entries.append(
            {
                "vector": "motion",
                "index": idx,
                "block": "environment",
                "third": None,
                "description": name,
            }
        )
        idx += 1
    for third in range(3):
        for band in ("low", "high"):
            entries.append(
                {
                    "vector": "motion",
                    "index": idx,
                    "block": "environment",
                    "third": third,
                    "description": f"support gap PSD {band} (time bin {third + 1})",
                }
            )
            idx += 1
    for entry in entries:
        if entry["vector"] == "motion":
            entry["scale"] = float(MOTION_SCALE[entry["index"]])
        else:
            entry["scale"] = 1.0
    return entries
