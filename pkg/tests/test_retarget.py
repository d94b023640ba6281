from __future__ import annotations

import math

import numpy as np
import pytest

from limbswap import quat
from limbswap.prosthesis import Box, Capsule, Channel, Joint, Sphere, load_spec, serialize_spec
from limbswap.retarget import (
    ObjectPose,
    RigidTransform,
    attach,
    collision_proxy_world,
    drive_articulation,
    object_pose,
    smooth,
    with_proxy_velocities,
    wrist_frame,
)

from .conftest import axis_angle_quat, make_pose, rotation_matrix
from .test_prosthesis import doc


def spec_with(**overrides):
    return load_spec(doc(**overrides))


class TestWristFrame:
    def test_identity(self):
        t = wrist_frame(make_pose())
        assert np.array_equal(t.translation, [0, 0, 0])
        assert np.array_equal(t.rotation, [1, 0, 0, 0])
        assert t.scale == 1.0

    def test_translation_passthrough(self):
        t = wrist_frame(make_pose(wrist=(0.1, 0, 0)))
        assert np.allclose(t.translation, [0.1, 0, 0])

    def test_orientation_passthrough(self):
        q = axis_angle_quat([0, 1, 0], math.pi / 2)
        t = wrist_frame(make_pose(quat=q))
        assert np.array_equal(t.rotation, q)


class TestAttach:
    def test_identity_pose_offset(self):
        spec = spec_with(
            attachment={"translation": [0, 0, 0.10], "rotation": [1, 0, 0, 0], "scale": 1.0}
        )
        pose = attach(make_pose(), spec)
        assert np.allclose(pose.transform.translation, [0, 0, 0.10], atol=1e-12)

    def test_rotated_pose_rotates_offset(self):
        # Oracle: rotate the offset with an explicit rotation matrix.
        q = axis_angle_quat([0, 1, 0], math.pi / 2)
        spec = spec_with(
            attachment={"translation": [0, 0, 0.10], "rotation": [1, 0, 0, 0], "scale": 1.0}
        )
        pose = attach(make_pose(quat=q), spec)
        expected = rotation_matrix(q) @ np.array([0, 0, 0.10])
        assert np.allclose(pose.transform.translation, expected, atol=1e-9)
        assert np.allclose(pose.transform.translation, [0.10, 0, 0], atol=1e-9)

    def test_scale_applies_to_offset(self):
        spec = spec_with(
            attachment={"translation": [0, 0, 0.10], "rotation": [1, 0, 0, 0], "scale": 2.0}
        )
        pose = attach(make_pose(), spec)
        assert np.allclose(pose.transform.translation, [0, 0, 0.20], atol=1e-12)
        assert pose.transform.scale == 2.0

    def test_rigid_equivariance_sample(self, catalog):
        rng = np.random.default_rng(7)
        specs = [catalog["whisk"], catalog["hook"], catalog["tentacle_octet"]]
        for _ in range(10):
            wrist = rng.uniform(-0.5, 0.5, 3)
            q_pose = axis_angle_quat(rng.normal(size=3), rng.uniform(0, math.pi))
            pose = make_pose(wrist=wrist, quat=q_pose)
            t_vec = rng.uniform(-1, 1, 3)
            q_t = axis_angle_quat(rng.normal(size=3), rng.uniform(0, math.pi))
            moved = make_pose(
                wrist=t_vec + rotation_matrix(q_t) @ wrist, quat=quat.mul(q_t, q_pose)
            )
            for spec in specs:
                a = attach(pose, spec).transform
                b = attach(moved, spec).transform
                assert np.allclose(
                    b.translation, t_vec + rotation_matrix(q_t) @ a.translation, atol=1e-6
                )
                expected_q = quat.mul(q_t, a.rotation)
                assert min(
                    np.max(np.abs(b.rotation - expected_q)), np.max(np.abs(b.rotation + expected_q))
                ) < 1e-6


class TestArticulation:
    def joint_spec(self, lo=0.0, hi=math.pi / 2):
        return spec_with(
            articulation=[
                {
                    "name": "bend",
                    "axis": [0, 0, 1],
                    "pivot": [0, 0, 0],
                    "angle_lo": lo,
                    "angle_hi": hi,
                    "channel": {"source": "finger_flexion", "finger": 1},
                }
            ]
        )

    def test_flexion_zero_gives_lo(self):
        angles = drive_articulation(make_pose(flexions=(0,) * 5), self.joint_spec(lo=0.2, hi=1.0))
        assert angles == (0.2,)

    def test_flexion_one_gives_hi(self):
        angles = drive_articulation(make_pose(flexions=(0, 1, 0, 0, 0)), self.joint_spec(hi=0.9))
        assert angles == (0.9,)

    def test_linear_midpoint_exact(self):
        angles = drive_articulation(make_pose(flexions=(0, 0.5, 0, 0, 0)), self.joint_spec())
        assert angles[0] == math.pi / 4

    def test_out_of_range_channel_clamped(self):
        pose = make_pose(flexions=(0, 1.5, 0, 0, 0))  # bypasses validation on purpose
        angles = drive_articulation(pose, self.joint_spec())
        assert angles[0] == math.pi / 2
        pose = make_pose(flexions=(0, -0.5, 0, 0, 0))
        assert drive_articulation(pose, self.joint_spec())[0] == 0.0


class TestSmooth:
    def make_poses(self):
        prev = ObjectPose(RigidTransform(np.zeros(3), np.array([1.0, 0, 0, 0]), 1.0))
        target = ObjectPose(RigidTransform(np.array([1.0, 0, 0]), np.array([1.0, 0, 0, 0]), 1.0))
        return prev, target

    def test_alpha_zero_snaps(self):
        prev, target = self.make_poses()
        assert smooth(prev, target, 0.0, 1 / 120) is target

    def test_alpha_one_freezes(self):
        prev, target = self.make_poses()
        assert smooth(prev, target, 1.0, 1 / 120) is prev

    def test_half_blend_at_tick_dt(self):
        prev, target = self.make_poses()
        out = smooth(prev, target, 0.5, 1 / 120, tick_dt=1 / 120)
        assert np.allclose(out.transform.translation, [0.5, 0, 0])

    def test_longer_dt_blends_more(self):
        prev, target = self.make_poses()
        one = smooth(prev, target, 0.5, 1 / 120, tick_dt=1 / 120)
        two = smooth(prev, target, 0.5, 2 / 120, tick_dt=1 / 120)
        assert two.transform.translation[0] > one.transform.translation[0]


def sample_primitive_surface(g, rng, n=100):
    if isinstance(g, Sphere):
        dirs = rng.normal(size=(n, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        return g.center + g.radius * dirs
    if isinstance(g, Capsule):
        dirs = rng.normal(size=(n, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        ts = rng.uniform(0, 1, size=(n, 1))
        return g.p0 + ts * (g.p1 - g.p0) + g.radius * dirs
    corners = rng.choice([-1.0, 1.0], size=(n, 3))
    fade = rng.uniform(0.0, 1.0, size=(n, 1))
    local = corners * g.half_extents * np.where(rng.uniform(size=(n, 3)) < 0.5, 1.0, fade)
    m = rotation_matrix(g.orientation)
    return g.center + local @ m.T


class TestCollisionProxies:
    def test_single_sphere_translated(self):
        spec = spec_with(
            geometry=[{"shape": "sphere", "center": [0.0, 0.0, 0.0], "radius": 0.05}],
            attachment={"translation": [0, 0, 0.1], "rotation": [1, 0, 0, 0], "scale": 1.0},
        )
        proxies = collision_proxy_world(spec, attach(make_pose(), spec))
        assert len(proxies) == 1
        assert np.allclose(proxies[0].center, [0, 0, 0.1], atol=1e-12)
        assert proxies[0].radius == 0.05

    def test_capsule_sphere_chain_covers_endpoints(self):
        spec = spec_with(
            geometry=[{"shape": "capsule", "p0": [0, 0, 0], "p1": [0, 0, 0.2], "radius": 0.05}]
        )
        proxies = collision_proxy_world(spec, attach(make_pose(), spec))
        assert len(proxies) >= 4
        for endpoint in ([0, 0, 0], [0, 0, 0.2]):
            assert any(
                np.linalg.norm(p.center - endpoint) <= p.radius + 1e-12 for p in proxies
            )

    def test_box_corner_spheres(self):
        spec = spec_with(
            geometry=[
                {
                    "shape": "box",
                    "center": [0, 0, 0],
                    "half_extents": [0.1, 0.2, 0.3],
                    "orientation": [1, 0, 0, 0],
                }
            ]
        )
        proxies = collision_proxy_world(spec, attach(make_pose(), spec))
        assert len(proxies) == 8
        half_diag = 0.5 * math.sqrt(0.1**2 + 0.2**2 + 0.3**2)
        assert all(p.radius == pytest.approx(half_diag) for p in proxies)
        corner = np.array([0.1, 0.2, 0.3])
        assert any(np.linalg.norm(p.center - corner) <= p.radius + 1e-12 for p in proxies)

    def test_joint_rotation_applied_before_object_transform(self):
        # pi/2 about +Z moves a point at (0.1, 0, 0) to (0, 0.1, 0).
        spec = spec_with(
            geometry=[
                {"shape": "sphere", "center": [0.1, 0.0, 0.0], "radius": 0.02, "joint": "j"}
            ],
            articulation=[
                {
                    "name": "j",
                    "axis": [0, 0, 1],
                    "pivot": [0, 0, 0],
                    "angle_lo": 0.0,
                    "angle_hi": math.pi / 2,
                    "channel": {"source": "grab_strength"},
                }
            ],
        )
        pose = object_pose(make_pose(grab=1.0), spec)
        proxies = collision_proxy_world(spec, pose)
        oracle = rotation_matrix(axis_angle_quat([0, 0, 1], math.pi / 2)) @ np.array([0.1, 0, 0])
        assert np.allclose(proxies[0].center, oracle, atol=1e-9)
        assert np.allclose(proxies[0].center, [0, 0.1, 0], atol=1e-9)

    def test_proxy_covers_primitive_surfaces(self, catalog):
        rng = np.random.default_rng(11)
        for spec_id in ("whisk", "hammer", "paw", "tentacle_octet", "butterfly"):
            spec = catalog[spec_id]
            pose = object_pose(make_pose(grab=0.3, flexions=(0.2,) * 5), spec)
            proxies = collision_proxy_world(spec, pose)
            joints = {j.name: a for j, a in zip(spec.articulation, pose.joint_angles)}
            for g in spec.geometry:
                pts = sample_primitive_surface(g, rng)
                if g.joint is not None:
                    j = next(j for j in spec.articulation if j.name == g.joint)
                    m = rotation_matrix(axis_angle_quat(j.axis, joints[g.joint]))
                    pts = j.pivot + (pts - j.pivot) @ m.T
                t = pose.transform
                world = t.translation + t.scale * (pts @ rotation_matrix(t.rotation).T)
                for w in world:
                    assert any(
                        np.linalg.norm(w - p.center) <= p.radius + 1e-9 for p in proxies
                    ), spec_id

    def test_proxy_velocities(self):
        spec = spec_with()
        a = collision_proxy_world(spec, attach(make_pose(), spec))
        b = collision_proxy_world(spec, attach(make_pose(wrist=(0.01, 0, 0)), spec))
        moved = with_proxy_velocities(b, a, 0.01)
        assert np.allclose(moved[0].velocity, [1.0, 0, 0], atol=1e-9)

    def test_anchor_articulation(self):
        spec = spec_with(
            anchors=[
                {
                    "name": "tipper",
                    "local_position": [0.1, 0.0, 0.0],
                    "local_direction": [1.0, 0.0, 0.0],
                    "role": "tip",
                    "joint": "j",
                }
            ],
            articulation=[
                {
                    "name": "j",
                    "axis": [0, 0, 1],
                    "pivot": [0, 0, 0],
                    "angle_lo": 0.0,
                    "angle_hi": math.pi / 2,
                    "channel": {"source": "pinch_strength"},
                }
            ],
        )
        pose = object_pose(make_pose(pinch=1.0), spec)
        anchor = pose.anchors_world[0]
        assert np.allclose(anchor.position, [0, 0.1, 0], atol=1e-9)
        assert np.allclose(anchor.direction, [0, 1, 0], atol=1e-9)
