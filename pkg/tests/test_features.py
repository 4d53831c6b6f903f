import math

import numpy as np
import pytest

from coactive.features import (
    DEFAULT_PROXIMITY,
    MOTION_LENGTH,
    MOTION_SCALE,
    FeatureVector,
    arm_posture_features,
    build_edges,
    environment_features,
    extract,
    feature_layout,
    interaction_features,
    interaction_length,
    object_behavior_features,
    periodogram,
    psd_bands,
)
from coactive.trajectory import Trajectory
from coactive.world import DEFAULT_ATTRIBUTES, Scene, SceneObject

from conftest import make_object, make_scene, random_toy_scene
from oracles import (
    behavior_oracle,
    edges_oracle,
    environment_oracle,
    interaction_oracle,
    motion_oracle,
    posture_oracle,
)


def still_trajectory(n=9, q=(0.0, 0.3, -0.6, 0.3)):
    return Trajectory(np.tile(np.asarray(q, dtype=float), (n, 1)))


class TestEdges:
    def test_far_scene_has_no_edges(self):
        scene = make_scene(objects=(make_object("far", (5.0, 5.0, 0.2)),))
        assert build_edges(scene, still_trajectory()) == []

    def test_object_below_links_every_waypoint(self):
        # wrist of the held posture sits at roughly (0.83, 0, 0.40)
        scene = make_scene(objects=(make_object("under", (0.83, 0.0, 0.05), (0.1, 0.1, 0.05)),))
        t = still_trajectory(7)
        edges = build_edges(scene, t)
        below_edges = [e for e in edges if e.base_features[3] == 1.0]
        assert len(below_edges) == 7
        assert {e.waypoint_index for e in below_edges} == set(range(7))

    def test_matches_exhaustive_enumeration(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            scene, traj = random_toy_scene(rng)
            got = [
                (e.waypoint_index, e.object_id, list(e.base_features))
                for e in build_edges(scene, traj)
            ]
            expected = edges_oracle(scene, traj, DEFAULT_PROXIMITY)
            assert len(got) == len(expected)
            for (j1, k1, b1), (j2, k2, b2) in zip(got, expected):
                assert (j1, k1) == (j2, k2)
                assert np.allclose(b1, b2, atol=1e-12)

    def test_below_indicator_binary_and_projections_nonnegative(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            scene, traj = random_toy_scene(rng)
            for edge in build_edges(scene, traj):
                assert edge.base_features[3] in (0.0, 1.0)
                assert np.all(edge.base_features[:3] >= 0)


class TestInteractionFeatures:
    def test_attributeless_carried_object_zeroes_block(self):
        rng = np.random.default_rng(1)
        scene, traj = random_toy_scene(rng)
        objs = [o for o in scene.objects if o.id != "carried"]
        bare = SceneObject("carried", (0.4, 0, 0.3), (0.04, 0.04, 0.05), np.zeros(6, dtype=np.int8))
        scene2 = Scene(
            attributes=scene.attributes,
            objects=(bare, *objs),
            manipulated_id="carried",
            table_height=scene.table_height,
            goal=scene.goal,
            start_config=scene.start_config,
            arm=scene.arm,
        )
        assert np.all(interaction_features(scene2, traj) == 0.0)

    def test_single_pair_single_block(self):
        scene = make_scene(
            objects=(make_object("laptop", (0.83, 0.0, 0.05), (0.1, 0.1, 0.05), ["electronic"]),),
            carried_attrs=("liquid",),
        )
        t = still_trajectory(3)
        vec = interaction_features(scene, t)
        m = len(DEFAULT_ATTRIBUTES)
        p = DEFAULT_ATTRIBUTES.index("electronic")
        q = DEFAULT_ATTRIBUTES.index("liquid")
        block = vec[4 * (p * m + q) : 4 * (p * m + q) + 4]
        mask = np.zeros_like(vec, dtype=bool)
        mask[4 * (p * m + q) : 4 * (p * m + q) + 4] = True
        assert np.all(vec[~mask] == 0.0)
        assert block[3] == 3.0  # below bit accumulated over 3 waypoints

    def test_shared_block_sums(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            scene, traj = random_toy_scene(rng)
            assert np.allclose(
                interaction_features(scene, traj),
                interaction_oracle(scene, traj, DEFAULT_PROXIMITY),
                atol=1e-9,
            )

    def test_score_decomposition_over_edges(self):
        rng = np.random.default_rng(3)
        m = 6
        for _ in range(10):
            scene, traj = random_toy_scene(rng)
            w = rng.normal(size=interaction_length(m))
            direct = float(w @ interaction_features(scene, traj))
            by_id = {o.id: o for o in scene.objects}
            total = 0.0
            carried = scene.manipulated.attributes
            for j, oid, base in [
                (e.waypoint_index, e.object_id, e.base_features)
                for e in build_edges(scene, traj)
            ]:
                labels = by_id[oid].attributes
                for p in range(m):
                    for q in range(m):
                        if labels[p] and carried[q]:
                            block = w[4 * (p * m + q) : 4 * (p * m + q) + 4]
                            total += float(block @ base)
            assert math.isclose(direct, total, abs_tol=1e-9)


class TestPeriodogram:
    def test_parseval(self):
        rng = np.random.default_rng(4)
        for n in (2, 3, 4, 5, 8, 10, 11, 30):
            x = rng.normal(size=n)
            psd = periodogram(x)
            d = x - x.mean()
            assert math.isclose(psd.sum(), float(np.mean(d * d)), abs_tol=1e-9)

    def test_constant_signal_zero(self):
        low, high = psd_bands(np.full(10, 3.3))
        assert low == 0.0 and high == 0.0

    def test_alternating_energy_in_high_band(self):
        sig = np.array([1.0, -1.0] * 5)
        psd = periodogram(sig)
        # all energy lands in the Nyquist bin
        assert math.isclose(psd[-1], 1.0, abs_tol=1e-9)
        assert np.allclose(psd[:-1], 0.0, atol=1e-9)
        low, high = psd_bands(sig)
        assert math.isclose(high, 1.0 / 3.0, abs_tol=1e-9)  # mean over the 3 high bins
        assert abs(low) < 1e-12

    def test_short_segment_high_band_empty(self):
        low, high = psd_bands(np.array([1.0, -2.0]))
        assert high == 0.0
        assert low > 0

    def test_psd_nonnegative(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            x = rng.normal(size=int(rng.integers(1, 20)))
            assert np.all(periodogram(x) >= 0)


class TestPostureFeatures:
    def test_stationary_arm_extrema_collapse(self):
        from coactive.world import cylindrical, forward_kinematics

        scene = make_scene()
        q = (0.0, 0.3, -0.6, 0.3)
        t = still_trajectory(9, q)
        vec = arm_posture_features(scene, t)
        assert vec.shape == (27,)
        pose = forward_kinematics(scene.arm, q)
        wrist_c = cylindrical(pose.wrist, scene.arm.shoulder_origin)
        elbow_c = cylindrical(pose.elbow, scene.arm.shoulder_origin)
        for third in range(3):
            nine = vec[9 * third : 9 * third + 9]
            # no temporal variation: extrema are the pointwise extremes of
            # the two joints, and every third agrees with every other
            for coord in range(3):
                assert math.isclose(nine[2 * coord], max(wrist_c[coord], elbow_c[coord]), abs_tol=1e-12)
                assert math.isclose(nine[2 * coord + 1], min(wrist_c[coord], elbow_c[coord]), abs_tol=1e-12)
            # the elbow-at-peak companions are the elbow's own coordinates
            assert np.allclose(nine[6:9], elbow_c, atol=1e-12)
        assert np.allclose(vec[:9], vec[9:18])
        assert np.allclose(vec[:9], vec[18:27])

    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            scene, traj = random_toy_scene(rng)
            assert np.allclose(
                arm_posture_features(scene, traj), posture_oracle(scene, traj), atol=1e-9
            )

    def test_rejects_short(self):
        scene = make_scene()
        with pytest.raises(ValueError):
            arm_posture_features(scene, Trajectory(np.zeros((2, 4))))


class TestBehaviorFeatures:
    def test_constant_trajectory_dc_only(self):
        scene = make_scene()
        vec = object_behavior_features(scene, still_trajectory(12))
        assert vec.shape == (28,)
        per_third = vec[:27].reshape(3, 9)
        assert np.allclose(per_third[:, 0], 1.0)     # tilt cosine
        assert np.allclose(per_third[:, 1:], 0.0)    # spectra
        assert vec[27] == 0.0

    def test_matches_dft_oracle(self):
        rng = np.random.default_rng(8)
        for _ in range(30):
            scene, traj = random_toy_scene(rng)
            assert np.allclose(
                object_behavior_features(scene, traj), behavior_oracle(scene, traj), atol=1e-9
            )


class TestEnvironmentFeatures:
    def test_constant_glide_over_empty_table(self):
        scene = make_scene(objects=())
        # posture chosen so wrist hovers at a constant height
        t = still_trajectory(9)
        vec = environment_features(scene, t)
        assert vec.shape == (20,)
        wrist_z = 0.45 + 0.5 * math.sin(0.3) + 0.5 * math.sin(-0.3)
        expected_gap = wrist_z - 0.05  # carried half height
        for third in range(3):
            assert math.isclose(vec[4 * third], expected_gap, abs_tol=1e-9)
            assert vec[4 * third + 1] == 2.0  # capped: nothing around
        assert math.isclose(vec[12], expected_gap, abs_tol=1e-9)
        assert vec[13] == 2.0
        assert np.allclose(vec[14:], 0.0)

    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            scene, traj = random_toy_scene(rng)
            assert np.allclose(
                environment_features(scene, traj), environment_oracle(scene, traj), atol=1e-9
            )


class TestExtract:
    def test_block_lengths(self, simple_scene):
        f = extract(simple_scene, still_trajectory())
        assert f.motion.shape == (75,)
        assert f.interaction.shape == (144,)
        assert MOTION_LENGTH == 75
        assert interaction_length(6) == 144

    def test_purity_bitwise(self):
        rng = np.random.default_rng(10)
        scene, traj = random_toy_scene(rng)
        a = extract(scene, traj)
        b = extract(scene, traj)
        assert np.array_equal(a.interaction, b.interaction)
        assert np.array_equal(a.motion, b.motion)

    def test_degenerate_still_trajectory_is_finite(self):
        scene = make_scene()
        f = extract(scene, still_trajectory(3))
        assert np.all(np.isfinite(f.stacked()))

    def test_matches_scaled_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            scene, traj = random_toy_scene(rng)
            f = extract(scene, traj)
            assert np.allclose(f.motion, motion_oracle(scene, traj), atol=1e-9)

    def test_yaw_invariance_of_r_z_and_spectra(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            scene, traj = random_toy_scene(rng)
            delta = float(rng.uniform(-1.0, 1.0))
            c, s = math.cos(delta), math.sin(delta)
            rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
            origin = np.asarray(scene.arm.shoulder_origin)

            def spin(p):
                return rot @ (np.asarray(p) - origin) + origin

            objects = tuple(
                SceneObject(o.id, spin(o.center), o.half_extents, o.attributes)
                for o in scene.objects
            )
            spun_traj = traj.waypoints.copy()
            spun_traj[:, 0] += delta
            lo, hi = scene.arm.joint_limits[0]
            if spun_traj[:, 0].max() > hi or spun_traj[:, 0].min() < lo:
                continue
            spun_scene = Scene(
                attributes=scene.attributes,
                objects=objects,
                manipulated_id=scene.manipulated_id,
                table_height=scene.table_height,
                goal=spin(scene.goal),
                start_config=scene.start_config,
                arm=scene.arm,
            )
            base = arm_posture_features(scene, traj)
            spun = arm_posture_features(spun_scene, Trajectory(spun_traj))
            for third in range(3):
                nine_a = base[9 * third : 9 * third + 9]
                nine_b = spun[9 * third : 9 * third + 9]
                # r and z extrema and the elbow r/z companions are invariant
                for idx in (0, 1, 4, 5, 6, 8):
                    assert math.isclose(nine_a[idx], nine_b[idx], abs_tol=1e-9)
            behav_a = object_behavior_features(scene, traj)
            behav_b = object_behavior_features(spun_scene, Trajectory(spun_traj))
            per_a = behav_a[:27].reshape(3, 9)
            per_b = behav_b[:27].reshape(3, 9)
            # tilt cosine, z spectra and tilt spectra are yaw invariant
            for col in (0, 5, 6, 7, 8):
                assert np.allclose(per_a[:, col], per_b[:, col], atol=1e-9)
            assert math.isclose(behav_a[27], behav_b[27], abs_tol=1e-9)

    def test_scale_constants_published(self):
        layout = feature_layout(DEFAULT_ATTRIBUTES)
        assert len(layout) == 144 + 75
        motion_entries = [e for e in layout if e["vector"] == "motion"]
        assert len(motion_entries) == 75
        for entry in motion_entries:
            assert entry["scale"] == MOTION_SCALE[entry["index"]]
        assert MOTION_SCALE[0] == 2.0          # posture r max
        assert MOTION_SCALE[2] == math.pi      # posture theta max
        assert MOTION_SCALE[27] == 1.0         # tilt cosine
        assert MOTION_SCALE[54] == math.pi     # global tilt excursion
        assert MOTION_SCALE[55] == 2.0         # clearance minimum
        assert MOTION_SCALE[69] == 1.0         # spectrogram grid
