"""Independent brute-force reference implementations for tests.

Everything here is deliberately written with scalar math and explicit
loops, separate from the vectorized production pipeline; tests compare
the two within tight tolerances.
"""
from __future__ import annotations

import cmath
import math

import numpy as np

from coactive.features import MOTION_SCALE, HORIZONTAL_CAP
from coactive.trajectory import thirds as _thirds


def fk_points(arm, q):
    ox, oy, oz = arm.shoulder_origin
    l1, l2 = arm.link_upper, arm.link_fore
    q1, q2, q3, _ = q
    elbow = (
        ox + l1 * math.cos(q2) * math.cos(q1),
        oy + l1 * math.cos(q2) * math.sin(q1),
        oz + l1 * math.sin(q2),
    )
    wrist = (
        elbow[0] + l2 * math.cos(q2 + q3) * math.cos(q1),
        elbow[1] + l2 * math.cos(q2 + q3) * math.sin(q1),
        elbow[2] + l2 * math.sin(q2 + q3),
    )
    return elbow, wrist


def cyl(p, origin):
    dx, dy = p[0] - origin[0], p[1] - origin[1]
    r = math.hypot(dx, dy)
    theta = 0.0 if r < 1e-12 else math.atan2(dy, dx)
    return r, theta, p[2] - origin[2]


def deviation_of(q):
    pitch = q[1] + q[2] + q[3]
    wrapped = math.fmod(pitch + math.pi, 2.0 * math.pi)
    if wrapped < 0:
        wrapped += 2.0 * math.pi
    return abs(wrapped - math.pi)


def track_of(scene, traj):
    positions, deviations = [], []
    for q in traj.waypoints:
        _, wrist = fk_points(scene.arm, q)
        positions.append(wrist)
        deviations.append(deviation_of(q))
    return positions, deviations


def axis_gap(c1, h1, c2, h2):
    return max(0.0, abs(c1 - c2) - (h1 + h2))


def edges_oracle(scene, traj, proximity):
    """Exhaustive (waypoint, object) edge enumeration."""
    positions, _ = track_of(scene, traj)
    carried = scene.manipulated.half_extents
    out = []
    for j, pos in enumerate(positions):
        for obj in scene.obstacles:
            gaps = [
                axis_gap(pos[a], carried[a], obj.center[a], obj.half_extents[a])
                for a in range(3)
            ]
            dist = math.sqrt(sum(g * g for g in gaps))
            below = (
                obj.center[2] + obj.half_extents[2] < pos[2]
                and abs(pos[0] - obj.center[0]) <= obj.half_extents[0] + 0.05
                and abs(pos[1] - obj.center[1]) <= obj.half_extents[1] + 0.05
            )
            if dist < proximity or below:
                out.append((j, obj.id, gaps + [1.0 if below else 0.0]))
    return out


def interaction_oracle(scene, traj, proximity):
    m = len(scene.attributes)
    vec = [0.0] * (4 * m * m)
    carried_attrs = scene.manipulated.attributes
    by_id = {o.id: o for o in scene.objects}
    for _, obj_id, base in edges_oracle(scene, traj, proximity):
        labels = by_id[obj_id].attributes
        for p in range(m):
            if not labels[p]:
                continue
            for q in range(m):
                if not carried_attrs[q]:
                    continue
                start = 4 * (p * m + q)
                for c in range(4):
                    vec[start + c] += base[c]
    return vec


def dft_psd_oracle(signal):
    """Direct O(n^2) DFT periodogram, energy-normalized, one-sided."""
    n = len(signal)
    mean = sum(signal) / n
    d = [v - mean for v in signal]
    bins = []
    for k in range(n // 2 + 1):
        acc = 0j
        for j, v in enumerate(d):
            acc += v * cmath.exp(-2j * math.pi * j * k / n)
        bins.append(abs(acc) ** 2 / (n * n))
    m = n // 2
    for k in range(1, m + (0 if n % 2 == 0 else 1)):
        bins[k] *= 2.0
    return bins


def bands_oracle(signal):
    n = len(signal)
    bins = dft_psd_oracle(signal)
    m = n // 2
    if n < 3:
        return (sum(bins[1:]) / m if m >= 1 else 0.0), 0.0
    split = m // 2
    low = bins[1 : split + 1]
    high = bins[split + 1 : m + 1]
    return (
        sum(low) / len(low) if low else 0.0,
        sum(high) / len(high) if high else 0.0,
    )


def posture_oracle(scene, traj):
    n = len(traj)
    origin = scene.arm.shoulder_origin
    wrist_c, elbow_c = [], []
    for q in traj.waypoints:
        elbow, wrist = fk_points(scene.arm, q)
        wrist_c.append(cyl(wrist, origin))
        elbow_c.append(cyl(elbow, origin))
    out = []
    for part in _thirds(n):
        idxs = list(part)
        for coord in range(3):
            values = [wrist_c[i][coord] for i in idxs] + [elbow_c[i][coord] for i in idxs]
            out.append(max(values))
            out.append(min(values))
        for coord in range(3):
            best_i = idxs[0]
            for i in idxs:
                if wrist_c[i][coord] > wrist_c[best_i][coord]:
                    best_i = i
            out.append(elbow_c[best_i][coord])
    return out


def behavior_oracle(scene, traj):
    positions, deviations = track_of(scene, traj)
    ref = deviations[-1]
    excursion = [abs(d - ref) for d in deviations]
    out = []
    for part in _thirds(len(traj)):
        idxs = list(part)
        out.append(math.cos(max(excursion[i] for i in idxs)))
        for signal in (
            [positions[i][0] for i in idxs],
            [positions[i][1] for i in idxs],
            [positions[i][2] for i in idxs],
            [deviations[i] for i in idxs],
        ):
            low, high = bands_oracle(signal)
            out.append(low)
            out.append(high)
    out.append(max(excursion))
    return out


def environment_oracle(scene, traj):
    positions, _ = track_of(scene, traj)
    carried = scene.manipulated.half_extents
    n = len(positions)
    vgap, hclear, tdist, gdist = [], [], [], []
    for pos in positions:
        bottom = pos[2] - carried[2]
        top = pos[2] + carried[2]
        support = scene.table_height
        for obj in scene.obstacles:
            inside = (
                abs(pos[0] - obj.center[0]) <= obj.half_extents[0]
                and abs(pos[1] - obj.center[1]) <= obj.half_extents[1]
            )
            obj_top = obj.center[2] + obj.half_extents[2]
            if inside and obj_top <= bottom:
                support = max(support, obj_top)
        vgap.append(bottom - support)
        best = HORIZONTAL_CAP
        for obj in scene.obstacles:
            obj_top = obj.center[2] + obj.half_extents[2]
            obj_bottom = obj.center[2] - obj.half_extents[2]
            if obj_bottom <= top and obj_top >= bottom:
                gx = axis_gap(pos[0], carried[0], obj.center[0], obj.half_extents[0])
                gy = axis_gap(pos[1], carried[1], obj.center[1], obj.half_extents[1])
                best = min(best, math.hypot(gx, gy))
        hclear.append(min(best, HORIZONTAL_CAP))
        tdist.append(abs(pos[2] - scene.table_height))
        gdist.append(
            math.dist(pos, tuple(scene.goal))
        )
    out = []
    parts = _thirds(n)
    for part in parts:
        idxs = list(part)
        out.append(min(vgap[i] for i in idxs))
        out.append(min(hclear[i] for i in idxs))
        out.append(min(tdist[i] for i in idxs))
        out.append(min(gdist[i] for i in idxs))
    out.append(sum(vgap) / n)
    out.append(sum(hclear) / n)
    for part in parts:
        idxs = list(part)
        low, high = bands_oracle([vgap[i] for i in idxs])
        out.append(low)
        out.append(high)
    return out


def motion_oracle(scene, traj):
    """Full scaled motion block via the scalar reference path."""
    raw = (
        posture_oracle(scene, traj)
        + behavior_oracle(scene, traj)
        + environment_oracle(scene, traj)
    )
    return [v / s for v, s in zip(raw, MOTION_SCALE)]


def ndcg_oracle(labels, k):
    def dcg(seq):
        return sum(l / math.log2(i + 2) for i, l in enumerate(seq[:k]))

    return dcg(list(labels)) / dcg(sorted(labels, reverse=True))
