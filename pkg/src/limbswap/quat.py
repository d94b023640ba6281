"""Quaternion helpers.

Conventions used across the package:

- Quaternions are ``(w, x, y, z)`` numpy arrays of float64.
- Rotations are right-handed; coordinates are meters; +Y is up and +Z
  points from the screen toward the user.
- ``slerp`` always takes the shorter arc (antipodal sign flip).
"""

from __future__ import annotations

import math

import numpy as np

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def vec3(x, y=None, z=None) -> np.ndarray:
    """Coerce a 3-vector (sequence or three scalars) to a float64 array."""
    if y is None:
        a = np.asarray(x, dtype=np.float64)
        if a.shape != (3,):
            raise ValueError(f"expected a 3-vector, got shape {a.shape}")
        return a
    return np.array([x, y, z], dtype=np.float64)


def norm(q) -> float:
    q = np.asarray(q, dtype=np.float64)
    return math.sqrt(float(np.dot(q, q)))


def normalize(q) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    n = norm(q)
    if n == 0.0 or not math.isfinite(n):
        raise ValueError("cannot normalize a zero or non-finite quaternion")
    return q / n


def mul(a, b) -> np.ndarray:
    """Hamilton product a*b (apply b's rotation first, then a's)."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def conjugate(q) -> np.ndarray:
    w, x, y, z = q
    return np.array([w, -x, -y, -z])


def rotate(q, v) -> np.ndarray:
    """Rotate vector v by unit quaternion q."""
    w, x, y, z = q
    # q * (0, v) * q^-1 expanded; cheaper than building matrices.
    tx = 2.0 * (y * v[2] - z * v[1])
    ty = 2.0 * (z * v[0] - x * v[2])
    tz = 2.0 * (x * v[1] - y * v[0])
    return np.array(
        [
            v[0] + w * tx + (y * tz - z * ty),
            v[1] + w * ty + (z * tx - x * tz),
            v[2] + w * tz + (x * ty - y * tx),
        ]
    )


def from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=np.float64)
    n = math.sqrt(float(np.dot(axis, axis)))
    if n == 0.0:
        raise ValueError("zero rotation axis")
    half = 0.5 * angle
    s = math.sin(half) / n
    return np.array([math.cos(half), axis[0] * s, axis[1] * s, axis[2] * s])


def to_axis_angle(q) -> tuple[np.ndarray, float]:
    q = normalize(q)
    if q[0] < 0:
        q = -q
    angle = 2.0 * math.acos(min(1.0, q[0]))
    s = math.sqrt(max(0.0, 1.0 - q[0] * q[0]))
    if s < 1e-12:
        return np.array([1.0, 0.0, 0.0]), 0.0
    return q[1:] / s, angle


def slerp(a, b, t: float) -> np.ndarray:
    """Spherical interpolation along the shorter arc, renormalized."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    dot = float(np.dot(a, b))
    if dot < 0.0:
        b = -b
        dot = -dot
    if dot > 1.0 - 1e-10:
        out = a + t * (b - a)
        return out / norm(out)
    theta = math.acos(min(1.0, dot))
    s = math.sin(theta)
    out = (math.sin((1.0 - t) * theta) / s) * a + (math.sin(t * theta) / s) * b
    return out / norm(out)


def to_matrix(q) -> np.ndarray:
    """3x3 rotation matrix for unit quaternion q."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def from_matrix(m) -> np.ndarray:
    """Unit quaternion for a proper rotation matrix (Shepperd's method)."""
    m = np.asarray(m, dtype=np.float64)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0:
        s = math.sqrt(tr + 1.0) * 2.0
        q = np.array(
            [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
        )
    elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        q = np.array(
            [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
        )
    elif m[1, 1] >= m[2, 2]:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        q = np.array(
            [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]
        )
    else:
        s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
        q = np.array(
            [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]
        )
    if q[0] < 0:
        q = -q
    return q / norm(q)
