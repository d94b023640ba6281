from __future__ import annotations

import math

import numpy as np
import pytest

from limbswap.pose import FingerState, HandPoseFrame
from limbswap.prosthesis import catalog_by_id


@pytest.fixture(scope="session")
def catalog():
    return catalog_by_id()


def make_pose(
    t: float = 0.0,
    wrist=(0.0, 0.0, 0.0),
    quat=(1.0, 0.0, 0.0, 0.0),
    palm_offset=(0.0, 0.0, 0.09),
    flexions=(0.0,) * 5,
    pinch: float = 0.0,
    grab: float = 0.0,
) -> HandPoseFrame:
    """Hand frame built without validation, for targeted unit tests."""
    wrist = np.asarray(wrist, dtype=np.float64)
    palm = wrist + np.asarray(palm_offset, dtype=np.float64)
    fingers = tuple(
        FingerState(flexions[i], palm + np.array([0.01 * i, 0.0, 0.05])) for i in range(5)
    )
    return HandPoseFrame(
        timestamp_s=t,
        palm_position=palm,
        palm_orientation=np.asarray(quat, dtype=np.float64),
        wrist_position=wrist,
        fingers=fingers,
        pinch_strength=pinch,
        grab_strength=grab,
        confidence=1.0,
    )


def axis_angle_quat(axis, angle: float) -> np.ndarray:
    """Independent quaternion construction from the half-angle formula."""
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    return np.array(
        [
            math.cos(angle / 2.0),
            axis[0] * math.sin(angle / 2.0),
            axis[1] * math.sin(angle / 2.0),
            axis[2] * math.sin(angle / 2.0),
        ]
    )


def rotation_matrix(q) -> np.ndarray:
    """Independent quaternion -> matrix oracle (textbook formula)."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * y * y - 2 * z * z, 2 * x * y - 2 * w * z, 2 * x * z + 2 * w * y],
            [2 * x * y + 2 * w * z, 1 - 2 * x * x - 2 * z * z, 2 * y * z - 2 * w * x],
            [2 * x * z - 2 * w * y, 2 * y * z + 2 * w * x, 1 - 2 * x * x - 2 * y * y],
        ]
    )
