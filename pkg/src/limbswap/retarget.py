"""Hand pose -> prosthesis pose retargeting.

Composes the wrist frame with a spec's attachment to place the object in
the world, drives articulation joints from finger/pinch/grab channels,
computes world-space anchors, smooths motion, and converts geometry into
world-space collision proxy spheres for contact tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import quat
from .errors import RangeError
from .pose import HandPoseFrame
from .prosthesis import Box, Capsule, Joint, ProsthesisSpec, Sphere

DEFAULT_TICK_DT = 1.0 / 120.0


@dataclass(frozen=True, eq=False)
class RigidTransform:
    translation: np.ndarray
    rotation: np.ndarray  # unit quaternion (w, x, y, z)
    scale: float = 1.0

    def apply(self, p) -> np.ndarray:
        """Map a local point into the parent frame: t + s * R(p)."""
        return self.translation + self.scale * quat.rotate(self.rotation, p)

    def apply_direction(self, d) -> np.ndarray:
        return quat.rotate(self.rotation, d)


IDENTITY_TRANSFORM = RigidTransform(np.zeros(3), quat.IDENTITY.copy(), 1.0)


@dataclass(frozen=True, eq=False)
class WorldAnchor:
    name: str
    position: np.ndarray
    direction: np.ndarray
    role: str


@dataclass(frozen=True, eq=False)
class ObjectPose:
    transform: RigidTransform
    joint_angles: tuple[float, ...] = ()
    anchors_world: tuple[WorldAnchor, ...] = ()


@dataclass(frozen=True, eq=False)
class ProxySphere:
    center: np.ndarray
    radius: float
    velocity: np.ndarray  # world m/s, zero when unknown


def wrist_frame(pose: HandPoseFrame) -> RigidTransform:
    return RigidTransform(pose.wrist_position, pose.palm_orientation, 1.0)


def attach(pose: HandPoseFrame, spec: ProsthesisSpec) -> ObjectPose:
    """Object-local -> world transform for this pose.

    The attachment is applied in the wrist frame: its translation is scaled
    then rotated by the wrist orientation, rotations compose, scales
    multiply (wrist scale is 1).
    """
    a = spec.attachment
    wrist = wrist_frame(pose)
    translation = wrist.translation + quat.rotate(wrist.rotation, a.scale * a.translation)
    rotation = quat.mul(wrist.rotation, a.rotation)
    return ObjectPose(RigidTransform(translation, rotation, a.scale))


def channel_value(pose: HandPoseFrame, joint: Joint) -> float:
    src = joint.channel.source
    if src == "finger_flexion":
        v = pose.fingers[joint.channel.finger].flexion
    elif src == "grab_strength":
        v = pose.grab_strength
    else:
        v = pose.pinch_strength
    return min(1.0, max(0.0, float(v)))


def drive_articulation(pose: HandPoseFrame, spec: ProsthesisSpec) -> tuple[float, ...]:
    """Joint angles: angle_lo + channel * (angle_hi - angle_lo), clamped."""
    return tuple(
        j.angle_lo + channel_value(pose, j) * (j.angle_hi - j.angle_lo)
        for j in spec.articulation
    )


def _joint_rotate(j: Joint, angle: float, p: np.ndarray) -> np.ndarray:
    """Rotate a local point about the joint's pivot/axis."""
    q = quat.from_axis_angle(j.axis, angle)
    return j.pivot + quat.rotate(q, p - j.pivot)


def _joint_map(spec: ProsthesisSpec, joint_angles) -> dict[str, tuple[Joint, float]]:
    return {j.name: (j, a) for j, a in zip(spec.articulation, joint_angles)}


def _articulated_point(joints, joint_name: str | None, p: np.ndarray) -> np.ndarray:
    if joint_name is None:
        return p
    j, angle = joints[joint_name]
    return _joint_rotate(j, angle, p)


def _articulated_direction(joints, joint_name: str | None, d: np.ndarray) -> np.ndarray:
    if joint_name is None:
        return d
    j, angle = joints[joint_name]
    return quat.rotate(quat.from_axis_angle(j.axis, angle), d)


def anchors_world(spec: ProsthesisSpec, transform: RigidTransform, joint_angles) -> tuple[WorldAnchor, ...]:
    joints = _joint_map(spec, joint_angles)
    out = []
    for a in spec.anchors:
        p = _articulated_point(joints, a.joint, a.local_position)
        d = _articulated_direction(joints, a.joint, a.local_direction)
        out.append(WorldAnchor(a.name, transform.apply(p), transform.apply_direction(d), a.role))
    return tuple(out)


def object_pose(pose: HandPoseFrame, spec: ProsthesisSpec) -> ObjectPose:
    """Full retarget: attach, articulate, and place anchors."""
    base = attach(pose, spec)
    angles = drive_articulation(pose, spec)
    return ObjectPose(
        transform=base.transform,
        joint_angles=angles,
        anchors_world=anchors_world(spec, base.transform, angles),
    )


def smooth(
    previous: ObjectPose | None,
    target: ObjectPose,
    alpha: float,
    dt: float,
    spec: ProsthesisSpec | None = None,
    tick_dt: float = DEFAULT_TICK_DT,
) -> ObjectPose:
    """Exponential smoothing toward the target pose.

    Per-tick blend weight is ``1 - alpha**(dt/tick_dt)``: alpha 0 snaps to
    the target, alpha 1 freezes. Anchors are recomputed from the blended
    transform and joint angles when a spec is supplied.
    """
    if not 0.0 <= alpha <= 1.0:
        raise RangeError(f"smoothing alpha {alpha} outside [0, 1]")
    if previous is None or alpha == 0.0:
        return target
    if alpha == 1.0:
        return previous
    w = 1.0 - alpha ** (dt / tick_dt)
    pt, tt = previous.transform, target.transform
    blended = RigidTransform(
        translation=pt.translation + (tt.translation - pt.translation) * w,
        rotation=quat.slerp(pt.rotation, tt.rotation, w),
        scale=pt.scale + (tt.scale - pt.scale) * w,
    )
    angles = tuple(
        pa + (ta - pa) * w for pa, ta in zip(previous.joint_angles, target.joint_angles)
    )
    anchors = anchors_world(spec, blended, angles) if spec is not None else target.anchors_world
    return ObjectPose(blended, angles, anchors)


def _capsule_proxy_local(g: Capsule) -> list[tuple[np.ndarray, float]]:
    axis = g.p1 - g.p0
    length = float(np.linalg.norm(axis))
    if length == 0.0:
        return [(g.p0, g.radius)]
    count = int(math.ceil(length / g.radius)) + 1  # spacing <= radius
    spacing = length / (count - 1)
    # Inflate so the sphere chain covers the capsule surface between centers.
    r = math.sqrt(g.radius * g.radius + 0.25 * spacing * spacing)
    return [(g.p0 + axis * (k / (count - 1)), r) for k in range(count)]


def _box_proxy_local(g: Box) -> list[tuple[np.ndarray, float]]:
    # One sphere per octant sub-box, circumscribing it: 8 corner-covering
    # spheres of half-diagonal radius.
    he = g.half_extents
    r = 0.5 * float(np.linalg.norm(he))
    out = []
    for sx in (-0.5, 0.5):
        for sy in (-0.5, 0.5):
            for sz in (-0.5, 0.5):
                local = np.array([sx * he[0], sy * he[1], sz * he[2]])
                out.append((g.center + quat.rotate(g.orientation, local), r))
    return out


def collision_proxy_world(spec: ProsthesisSpec, pose: ObjectPose) -> tuple[ProxySphere, ...]:
    """Geometry converted to covering world-space spheres.

    Articulated primitives rotate about their joint first, then everything
    maps through the object transform. Radii scale with the transform.
    """
    joints = _joint_map(spec, pose.joint_angles)
    t = pose.transform
    zero = np.zeros(3)
    out = []
    for g in spec.geometry:
        if isinstance(g, Sphere):
            local = [(g.center, g.radius)]
        elif isinstance(g, Capsule):
            local = _capsule_proxy_local(g)
        else:
            local = _box_proxy_local(g)
        for c, r in local:
            c = _articulated_point(joints, g.joint, c)
            out.append(ProxySphere(t.apply(c), t.scale * r, zero))
    return tuple(out)


def with_proxy_velocities(
    current: tuple[ProxySphere, ...], previous: tuple[ProxySphere, ...] | None, dt: float
) -> tuple[ProxySphere, ...]:
    """Finite-difference proxy velocities between ticks (zero on the first)."""
    if previous is None or len(previous) != len(current) or dt <= 0:
        return current
    return tuple(
        replace(c, velocity=(c.center - p.center) / dt) for c, p in zip(current, previous)
    )
