from __future__ import annotations

import io
import json
import math

import numpy as np
import pytest

from limbswap import quat
from limbswap.errors import DegenerateError, OrderError, ParseError, RangeError, TooShort
from limbswap.pose import (
    PoseTrace,
    frame_to_record,
    frames_allclose,
    interpolate,
    load_trace,
    palm_velocity,
    resample_trace,
    save_trace,
    validate_frame,
)

from .conftest import axis_angle_quat, make_pose


def record(t=0.0, **overrides):
    rec = {
        "timestamp_s": t,
        "palm_pos": [0.0, 0.0, 0.09],
        "palm_quat": [1.0, 0.0, 0.0, 0.0],
        "wrist_pos": [0.0, 0.0, 0.0],
        "fingers": [{"flex": 0.0, "tip": [0.0, 0.0, 0.15]} for _ in range(5)],
        "pinch_strength": 0.0,
        "grab_strength": 0.0,
        "confidence": 1.0,
    }
    rec.update(overrides)
    return rec


class TestValidateFrame:
    def test_identity_accepted_unchanged(self):
        f = validate_frame(record())
        assert f.timestamp_s == 0.0
        assert np.array_equal(f.palm_orientation, [1.0, 0.0, 0.0, 0.0])
        assert all(fi.flexion == 0.0 for fi in f.fingers)

    def test_slightly_off_quaternion_renormalized(self):
        f = validate_frame(record(palm_quat=[1.0005, 0.0, 0.0, 0.0]))
        assert np.allclose(f.palm_orientation, [1.0, 0.0, 0.0, 0.0], atol=1e-12)
        assert quat.norm(f.palm_orientation) == pytest.approx(1.0, abs=1e-12)

    def test_far_off_quaternion_rejected(self):
        with pytest.raises(DegenerateError):
            validate_frame(record(palm_quat=[2.0, 0.0, 0.0, 0.0]))

    def test_zero_quaternion_rejected(self):
        with pytest.raises(DegenerateError):
            validate_frame(record(palm_quat=[0.0, 0.0, 0.0, 0.0]))

    def test_flexion_out_of_range(self):
        bad = record()
        bad["fingers"][2]["flex"] = 1.2
        with pytest.raises(RangeError):
            validate_frame(bad)

    def test_nonfinite_coordinate(self):
        with pytest.raises(DegenerateError):
            validate_frame(record(palm_pos=[float("nan"), 0.0, 0.0]))

    def test_hand_span_bound(self):
        with pytest.raises(RangeError):
            validate_frame(record(palm_pos=[0.0, 0.0, 0.5]))

    def test_negative_timestamp(self):
        with pytest.raises(RangeError):
            validate_frame(record(t=-0.5))


class TestInterpolate:
    def test_endpoints_exact(self):
        a = make_pose(0.0, wrist=(0, 0, 0))
        b = make_pose(1.0, wrist=(1, 0, 0))
        assert interpolate(a, b, 0.0) is a
        assert interpolate(a, b, 1.0) is b

    def test_halfway_rotation_matches_half_angle_oracle(self):
        # 90 degrees about +Z at t=0.5 must be 45 degrees about +Z.
        a = make_pose(0.0)
        b = make_pose(1.0, quat=axis_angle_quat([0, 0, 1], math.pi / 2))
        mid = interpolate(a, b, 0.5)
        expected = axis_angle_quat([0, 0, 1], math.pi / 4)
        assert np.allclose(mid.palm_orientation, expected, atol=1e-6)
        assert mid.timestamp_s == pytest.approx(0.5)

    def test_orientation_stays_unit_on_grid(self):
        a = make_pose(0.0, quat=axis_angle_quat([1, 2, 3], 0.3))
        b = make_pose(1.0, quat=axis_angle_quat([-1, 1, 0.5], 2.4))
        for t in np.linspace(0.0, 1.0, 101):
            q = interpolate(a, b, float(t)).palm_orientation
            assert abs(quat.norm(q) - 1.0) <= 1e-6

    def test_shorter_arc_sign_flip(self):
        q = axis_angle_quat([0, 1, 0], 0.4)
        a = make_pose(0.0, quat=q)
        b = make_pose(1.0, quat=-axis_angle_quat([0, 1, 0], 0.6))  # antipodal encoding
        mid = interpolate(a, b, 0.5)
        expected = axis_angle_quat([0, 1, 0], 0.5)
        assert min(
            np.max(np.abs(mid.palm_orientation - expected)),
            np.max(np.abs(mid.palm_orientation + expected)),
        ) < 1e-9

    def test_order_error(self):
        a = make_pose(1.0)
        b = make_pose(0.5)
        with pytest.raises(OrderError):
            interpolate(a, b, 0.5)


class TestResample:
    def test_identity_at_same_rate(self):
        frames = tuple(make_pose(k / 120.0, wrist=(k * 0.001, 0, 0)) for k in range(25))
        trace = PoseTrace(frames)
        out = resample_trace(trace, 120.0)
        assert len(out) == len(trace)
        for a, b in zip(trace.frames, out.frames):
            assert frames_allclose(a, b, tol=1e-9)

    def test_two_frames_at_4hz(self):
        trace = PoseTrace((make_pose(0.0), make_pose(1.0, wrist=(1, 0, 0))))
        out = resample_trace(trace, 4.0)
        assert [f.timestamp_s for f in out.frames] == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_single_frame_returned_as_is(self):
        trace = PoseTrace((make_pose(0.3),))
        assert resample_trace(trace, 60.0) is trace

    def test_endpoint_preserved_on_ragged_span(self):
        trace = PoseTrace((make_pose(0.0), make_pose(0.9, wrist=(0.9, 0, 0))))
        out = resample_trace(trace, 4.0)
        assert out.frames[-1].timestamp_s == 0.9
        assert out.frames[0].timestamp_s == 0.0

    def test_bad_rate(self):
        trace = PoseTrace((make_pose(0.0), make_pose(1.0)))
        with pytest.raises(RangeError):
            resample_trace(trace, 0.0)


class TestPalmVelocity:
    def test_stationary_zero(self):
        trace = PoseTrace(tuple(make_pose(k * 0.01) for k in range(10)))
        assert np.allclose(palm_velocity(trace, 5), [0, 0, 0])

    def test_linear_motion_exact(self):
        trace = PoseTrace(tuple(make_pose(k * 0.01, wrist=(k * 0.01, 0, 0)) for k in range(20)))
        for i in range(1, 19):
            assert np.allclose(palm_velocity(trace, i), [1.0, 0, 0], atol=1e-6)

    def test_quadratic_matches_analytic_derivative(self):
        # x(t) = t^2, sampled at 100 Hz; dx/dt at t=0.5 is 1.0.
        trace = PoseTrace(
            tuple(make_pose(k / 100.0, wrist=((k / 100.0) ** 2, 0, 0)) for k in range(101))
        )
        v = palm_velocity(trace, 50)
        assert v[0] == pytest.approx(1.0, abs=1e-3)

    def test_too_short(self):
        with pytest.raises(TooShort):
            palm_velocity(PoseTrace((make_pose(0.0),)), 0)


class TestTraceIO:
    def test_round_trip(self, tmp_path):
        frames = tuple(make_pose(k / 60.0, wrist=(0.1 * k, 0.2, -0.05 * k)) for k in range(7))
        trace = PoseTrace(frames, source_label="unit")
        path = tmp_path / "t.poses.jsonl"
        save_trace(trace, str(path))
        back = load_trace(str(path))
        assert len(back) == len(trace)
        for a, b in zip(trace.frames, back.frames):
            assert frame_to_record(a) == frame_to_record(b)

    def test_header_checked(self, tmp_path):
        p = tmp_path / "bad.poses.jsonl"
        p.write_text('{"format":"pose-trace","version":9}\n')
        with pytest.raises(ParseError):
            load_trace(str(p))
        p.write_text('{"format":"something"}\n')
        with pytest.raises(ParseError):
            load_trace(str(p))

    def test_empty_file(self):
        with pytest.raises(ParseError):
            load_trace(io.StringIO(""))

    def test_bad_frame_line_number(self, tmp_path):
        p = tmp_path / "trunc.poses.jsonl"
        good = json.dumps(frame_to_record(make_pose(0.0)))
        p.write_text('{"format":"pose-trace","version":1}\n' + good + "\n{broken\n")
        with pytest.raises(ParseError) as exc:
            load_trace(str(p))
        assert exc.value.line == 3

    def test_timestamps_must_increase(self):
        with pytest.raises(OrderError):
            PoseTrace((make_pose(0.5), make_pose(0.5)))
