from __future__ import annotations

import math

import numpy as np
import pytest

from dataclasses import replace

from limbswap.errors import BadConfig
from limbswap.prosthesis import load_spec
from limbswap.retarget import ProxySphere, WorldAnchor
from limbswap.tasks import (
    BallTaskConfig,
    DrawTaskConfig,
    TaskMetrics,
    ball_config_from_mapping,
    ball_metrics,
    ball_step,
    draw_config_from_mapping,
    draw_metrics,
    draw_step,
    make_ball_state,
    make_draw_state,
    plane_basis,
    ray_plane,
)

from .test_prosthesis import doc


def spec_with(**overrides):
    return load_spec(doc(**overrides))


PUSH_SPEC = spec_with(affordances=[{"gesture": "swipe", "action": {"kind": "push", "impulse_gain": 1.0}}])
PLAIN_SPEC = spec_with()
GRIP_DOC = dict(
    anchors=[
        {"name": "grip", "local_position": [0, 0, 0.1], "local_direction": [0, 0, 1], "role": "grip"}
    ],
    affordances=[{"gesture": "grab", "action": {"kind": "grab_attach"}}],
)
GRAB_SPEC = spec_with(**GRIP_DOC)
DELICATE_SPEC = spec_with(
    affordances=[{"gesture": "stillness", "action": {"kind": "delicate_touch", "max_speed": 0.25}}]
)


def proxy(center, radius=0.05, velocity=(0, 0, 0)):
    return ProxySphere(np.asarray(center, dtype=float), radius, np.asarray(velocity, dtype=float))


def anchor(name, pos, role="grip", direction=(0, 0, 1)):
    return WorldAnchor(name, np.asarray(pos, dtype=float), np.asarray(direction, dtype=float), role)


def step_ball(state, cfg, spec=PUSH_SPEC, proxies=(), anchors=(), grab=False, palm_speed=0.0, tick=0, dt=1 / 120):
    return ball_step(state, tuple(proxies), tuple(anchors), spec, grab, palm_speed, tick, dt, cfg)


class TestBallPhysics:
    def test_rest_stays_at_rest(self):
        cfg = BallTaskConfig()
        state = make_ball_state(cfg)
        out, events = step_ball(state, cfg)
        assert np.array_equal(out.ball_position, state.ball_position)
        assert np.array_equal(out.ball_velocity, [0, 0, 0])
        assert [e.kind for e in events] == []

    def test_damping_matches_closed_form(self):
        # 100 steps of dt=0.01 at damping 2/s: |v| = e^-2 within 1%.
        cfg = BallTaskConfig(damping=2.0, goal_radius=1e-9)
        state = make_ball_state(cfg)
        state = replace(state, **{"ball_velocity": np.array([1.0, 0, 0])})
        for k in range(100):
            state, _ = step_ball(state, cfg, spec=PLAIN_SPEC, tick=k, dt=0.01)
        assert float(np.linalg.norm(state.ball_velocity)) == pytest.approx(math.exp(-2.0), rel=0.01)

    def test_speed_non_increasing_without_contact(self):
        cfg = BallTaskConfig(bounds_lo=(-50, -50, -50), bounds_hi=(50, 50, 50))
        state = make_ball_state(cfg)
        rng = np.random.default_rng(5)
        state = replace(state, **{"ball_velocity": rng.normal(size=3)})
        prev_speed = float(np.linalg.norm(state.ball_velocity))
        for k in range(50):
            state, _ = step_ball(state, cfg, tick=k)
            speed = float(np.linalg.norm(state.ball_velocity))
            assert speed <= prev_speed + 1e-12
            prev_speed = speed

    def test_push_impulse_along_contact_normal(self):
        cfg = BallTaskConfig()
        state = make_ball_state(cfg)
        # Proxy approaching from -x at 1 m/s, overlapping the ball.
        p = proxy(state.ball_position - [0.08, 0, 0], radius=0.05, velocity=[1.0, 0, 0])
        out, events = step_ball(state, cfg, proxies=[p])
        assert out.ball_velocity[0] > 0
        assert abs(out.ball_velocity[1]) < 1e-12 and abs(out.ball_velocity[2]) < 1e-12
        assert any(e.kind == "ball_contact" for e in events)

    def test_no_push_affordance_no_impulse(self):
        cfg = BallTaskConfig()
        state = make_ball_state(cfg)
        p = proxy(state.ball_position - [0.08, 0, 0], velocity=[1.0, 0, 0])
        out, events = step_ball(state, cfg, spec=PLAIN_SPEC, proxies=[p])
        assert np.array_equal(out.ball_velocity, [0, 0, 0])
        assert events == []

    def test_receding_contact_no_impulse(self):
        cfg = BallTaskConfig()
        state = make_ball_state(cfg)
        p = proxy(state.ball_position - [0.08, 0, 0], velocity=[-1.0, 0, 0])
        out, _ = step_ball(state, cfg, proxies=[p])
        assert np.array_equal(out.ball_velocity, [0, 0, 0])

    def test_delicate_touch_gate(self):
        cfg = BallTaskConfig()
        state = make_ball_state(cfg)
        p = proxy(state.ball_position - [0.08, 0, 0], velocity=[0.5, 0, 0])
        fast, events_fast = step_ball(state, cfg, spec=DELICATE_SPEC, proxies=[p], palm_speed=0.5)
        assert np.all(np.abs(fast.ball_velocity) <= 1e-9)
        assert all(e.kind != "ball_contact" for e in events_fast)
        slow, events_slow = step_ball(state, cfg, spec=DELICATE_SPEC, proxies=[p], palm_speed=0.2)
        assert slow.ball_velocity[0] > 0
        assert any(e.kind == "ball_contact" for e in events_slow)

    def test_grab_attach_and_exact_tracking(self):
        cfg = BallTaskConfig()
        state = make_ball_state(cfg)
        grip = anchor("grip", state.ball_position + [0.05, 0, 0])
        state, events = step_ball(state, cfg, spec=GRAB_SPEC, anchors=[grip], grab=True)
        assert state.attached_to == "grip"
        assert any(e.kind == "ball_attached" for e in events)
        # The ball tracks the anchor exactly while held.
        for k in range(1, 20):
            grip = anchor("grip", [0.05 + 0.01 * k, 0.02 * k, 0.15])
            state, _ = step_ball(state, cfg, spec=GRAB_SPEC, anchors=[grip], grab=True, tick=k)
            assert float(np.linalg.norm(state.ball_position - grip.position)) <= 1e-9
        state, events = step_ball(state, cfg, spec=GRAB_SPEC, anchors=[grip], grab=False, tick=20)
        assert state.attached_to is None
        assert any(e.kind == "ball_released" for e in events)
        assert float(np.linalg.norm(state.ball_velocity)) > 0  # thrown

    def test_paw_like_spec_cannot_attach(self):
        cfg = BallTaskConfig()
        state = make_ball_state(cfg)
        grip = anchor("grip", state.ball_position + [0.03, 0, 0])
        out, events = step_ball(state, cfg, spec=PUSH_SPEC, anchors=[grip], grab=True)
        assert out.attached_to is None
        assert all(e.kind != "ball_attached" for e in events)

    def test_attach_requires_proximity(self):
        cfg = BallTaskConfig()
        state = make_ball_state(cfg)
        far = anchor("grip", state.ball_position + [0.5, 0, 0])
        out, _ = step_ball(state, cfg, spec=GRAB_SPEC, anchors=[far], grab=True)
        assert out.attached_to is None

    def test_bounds_reflection_fuzz(self):
        cfg = BallTaskConfig(damping=0.1, restitution=0.5)
        state = make_ball_state(cfg)
        rng = np.random.default_rng(17)
        lo = state.bounds_lo + state.ball_radius - 1e-9
        hi = state.bounds_hi - state.ball_radius + 1e-9
        for k in range(100_000):
            if k % 50 == 0:
                state = state.__class__(
                    **{**state.__dict__, "ball_velocity": rng.normal(scale=4.0, size=3)}
                )
            state, _ = step_ball(state, cfg, tick=k)
            assert np.all(state.ball_position >= lo) and np.all(state.ball_position <= hi)

    def test_goal_requires_slow_arrival(self):
        cfg = BallTaskConfig(goal_center=(0.0, 0.0, 0.15), goal_radius=0.2)
        state = make_ball_state(cfg)
        state = replace(state, **{"ball_velocity": np.array([3.0, 0, 0])})
        state, events = step_ball(state, cfg)
        assert state.done_tick is None  # inside the region but too fast
        state = replace(state, **{"ball_velocity": np.zeros(3)})
        state, events = step_ball(state, cfg, tick=1)
        assert state.done_tick == 1
        assert any(e.kind == "ball_goal" for e in events)

    def test_dt_bounds(self):
        cfg = BallTaskConfig()
        state = make_ball_state(cfg)
        with pytest.raises(BadConfig):
            step_ball(state, cfg, dt=0.5)


class TestBallMetrics:
    def test_straight_run_efficiency_one(self):
        cfg = BallTaskConfig(damping=0.0, goal_center=(0.4, 0.0, 0.15), goal_radius=0.05, goal_speed_eps=2.0)
        state = make_ball_state(cfg)
        state = replace(state, **{"ball_velocity": np.array([1.0, 0, 0])})
        k = 0
        while state.done_tick is None and k < 200:
            state, _ = step_ball(state, cfg, tick=k)
            k += 1
        m = ball_metrics(state, 1 / 120)
        assert state.done_tick is not None
        assert m.time_to_goal_s == pytest.approx(state.done_tick / 120.0, abs=1e-9)
        assert m.path_efficiency == pytest.approx(1.0, abs=1e-6)

    def test_detour_halves_efficiency(self):
        # Right 0.5 m, then up 0.25 and back down 0.25: path 1.0, displacement 0.5.
        cfg = BallTaskConfig(
            damping=0.0,
            goal_center=(0.5, 0.0, 0.15),
            goal_radius=0.01,
            goal_speed_eps=10.0,
            bounds_lo=(-1, -1, -1),
            bounds_hi=(1, 1, 1),
        )
        state = make_ball_state(cfg)
        dt = 1 / 120
        legs = [((1.0, 0, 0), 0.5), ((0, 1.0, 0), 0.25), ((0, -1.0, 0), 0.25)]
        expected_path = sum(d for _, d in legs)  # independent of the stepper
        tick = 0
        for direction, dist in legs:
            v = np.asarray(direction) * 1.0
            steps = int(round(dist / (1.0 * dt)))
            state = replace(state, **{"ball_velocity": v, "done_tick": None})
            for _ in range(steps):
                state, _ = step_ball(state, cfg, tick=tick)
                tick += 1
        assert state.path_length_accum == pytest.approx(expected_path, rel=1e-6)
        state = replace(state, **{"done_tick": tick, "ball_velocity": np.zeros(3)})
        m = ball_metrics(state, dt)
        assert m.path_efficiency == pytest.approx(0.5, rel=0.02)

    def test_not_applicable_before_done(self):
        state = make_ball_state(BallTaskConfig())
        m = ball_metrics(state, 1 / 120)
        assert m.time_to_goal_s is None and m.path_efficiency is None


TIP_DOC = dict(
    anchors=[
        {"name": "tip", "local_position": [0, 0, 0.1], "local_direction": [0, 0, 1], "role": "tip"}
    ]
)
NOZZLE_DOC = dict(
    anchors=[
        {
            "name": "nozzle",
            "local_position": [0, 0, 0.1],
            "local_direction": [0, 0, 1],
            "role": "nozzle",
        }
    ],
    affordances=[{"gesture": "pinch", "action": {"kind": "trigger"}}],
)
TIP_SPEC = spec_with(**TIP_DOC)
NOZZLE_SPEC = spec_with(**NOZZLE_DOC)


def step_draw(state, cfg, spec, anchors, pinch=False, grab=False, still=False, tick=0, dt=1 / 120):
    return draw_step(state, tuple(anchors), spec, pinch, grab, still, tick, dt, cfg)


class TestDrawTask:
    def test_pen_contact_appends_projection(self):
        cfg = DrawTaskConfig()
        state = make_draw_state(cfg)
        tip = anchor("tip", [0.02, 0.03, 0.003], role="tip", direction=(0, 0, -1))
        state, events = step_draw(state, cfg, TIP_SPEC, [tip])
        assert state.ink_count == 1
        (stroke,) = state.strokes
        x, y, w = stroke[0]
        assert (x, y) == pytest.approx((0.02, 0.03), abs=1e-12)
        assert w == pytest.approx(cfg.base_width, abs=1e-12)  # above plane: no penetration
        assert any(e.kind == "stroke_start" for e in events)

    def test_penetration_widens_stroke(self):
        cfg = DrawTaskConfig()
        state = make_draw_state(cfg)
        tip = anchor("tip", [0, 0, -0.003], role="tip")
        state, _ = step_draw(state, cfg, TIP_SPEC, [tip])
        w = state.strokes[0][0][2]
        assert w == pytest.approx(cfg.base_width * (1 + 0.003 / cfg.contact_threshold), abs=1e-12)

    def test_pen_beyond_threshold_no_ink_even_with_pinch(self):
        cfg = DrawTaskConfig()
        state = make_draw_state(cfg)
        tip = anchor("tip", [0, 0, 0.010], role="tip")
        state, _ = step_draw(state, cfg, TIP_SPEC, [tip], pinch=True)
        assert state.ink_count == 0

    def test_airbrush_ray_example(self):
        cfg = DrawTaskConfig()
        state = make_draw_state(cfg)
        nozzle = anchor("nozzle", [0, 0, 0.2], role="nozzle", direction=(0, 0, -1))
        state, _ = step_draw(state, cfg, NOZZLE_SPEC, [nozzle], pinch=True)
        assert state.ink_count == 1
        x, y, w = state.strokes[0][0]
        assert (x, y) == pytest.approx((0.0, 0.0), abs=1e-12)
        assert w == pytest.approx(cfg.spot_base + 0.2 * cfg.spot_spread, abs=1e-12)

    def test_airbrush_needs_trigger_gesture(self):
        cfg = DrawTaskConfig()
        state = make_draw_state(cfg)
        nozzle = anchor("nozzle", [0, 0, 0.2], role="nozzle", direction=(0, 0, -1))
        state, _ = step_draw(state, cfg, NOZZLE_SPEC, [nozzle], pinch=False)
        assert state.ink_count == 0

    def test_no_drawing_anchor_draws_nothing(self):
        cfg = DrawTaskConfig()
        state = make_draw_state(cfg)
        surface = anchor("pad", [0, 0, 0.001], role="surface")
        state, _ = step_draw(state, cfg, PLAIN_SPEC, [surface], pinch=True)
        assert state.ink_count == 0

    def test_stroke_ends_on_lift(self):
        cfg = DrawTaskConfig()
        state = make_draw_state(cfg)
        down = anchor("tip", [0, 0, 0.0], role="tip")
        up = anchor("tip", [0, 0, 0.02], role="tip")
        state, _ = step_draw(state, cfg, TIP_SPEC, [down], tick=0)
        state, events = step_draw(state, cfg, TIP_SPEC, [up], tick=1)
        assert any(e.kind == "stroke_end" for e in events)
        state, _ = step_draw(state, cfg, TIP_SPEC, [down], tick=2)
        assert len(state.strokes) == 2

    def test_contact_points_lie_on_plane(self):
        # Tilted canvas: reconstructed 3-D ink must sit on the plane.
        normal = np.array([0.0, 1.0, 1.0]) / math.sqrt(2)
        cfg = DrawTaskConfig(plane_point=(0.1, -0.2, 0.05), plane_normal=tuple(normal))
        state = make_draw_state(cfg)
        u, v = plane_basis(state.plane_normal)
        rng = np.random.default_rng(23)
        for k in range(40):
            target = state.plane_point + rng.uniform(-0.1, 0.1) * u + rng.uniform(-0.1, 0.1) * v
            tip = anchor("tip", target + normal * rng.uniform(-0.004, 0.004), role="tip")
            state, _ = step_draw(state, cfg, TIP_SPEC, [tip], tick=k)
        assert state.ink_count == 40
        for stroke in state.strokes:
            for x, y, w in stroke:
                p3 = state.plane_point + x * u + y * v
                assert abs(float(np.dot(p3 - state.plane_point, state.plane_normal))) <= 1e-9

    def test_ink_budget(self):
        cfg = DrawTaskConfig(ink_budget=3)
        state = make_draw_state(cfg)
        tip = anchor("tip", [0, 0, 0.0], role="tip")
        for k in range(10):
            state, _ = step_draw(state, cfg, TIP_SPEC, [tip], tick=k)
        assert state.ink_count == 3


class TestRayPlane:
    def test_straight_down(self):
        hit = ray_plane([0, 0, 1], [0, 0, -1], [0, 0, 0], [0, 0, 1])
        assert np.allclose(hit, [0, 0, 0], atol=1e-15)

    def test_parallel_none(self):
        assert ray_plane([0, 0, 1], [1, 0, 0], [0, 0, 0], [0, 0, 1]) is None

    def test_behind_none(self):
        assert ray_plane([0, 0, -1], [0, 0, -1], [0, 0, 0], [0, 0, 1]) is None


class TestDrawMetrics:
    def test_identical_stroke_perfect_scores(self):
        target = ((-0.1, 0.0), (0.1, 0.0))
        cfg = DrawTaskConfig(target_polyline=target)
        state = make_draw_state(cfg)
        pts = tuple((float(x), 0.0, 0.002) for x in np.linspace(-0.1, 0.1, 50))
        state = replace(state, **{"strokes": (pts,), "ink_count": 50})
        m = draw_metrics(state, cfg)
        assert m.stroke_rms_deviation_m == pytest.approx(0.0, abs=1e-12)
        assert m.ink_coverage == 1.0

    def test_offset_stroke_rms(self):
        target = ((-0.1, 0.0), (0.1, 0.0))
        cfg = DrawTaskConfig(target_polyline=target)
        state = make_draw_state(cfg)
        pts = tuple((float(x), 0.01, 0.002) for x in np.linspace(-0.1, 0.1, 50))
        state = replace(state, **{"strokes": (pts,), "ink_count": 50})
        m = draw_metrics(state, cfg)
        assert m.stroke_rms_deviation_m == pytest.approx(0.01, abs=1e-9)

    def test_no_target_not_applicable(self):
        cfg = DrawTaskConfig()
        m = draw_metrics(make_draw_state(cfg), cfg)
        assert m.stroke_rms_deviation_m is None and m.ink_coverage is None

    def test_no_ink_zero_coverage(self):
        cfg = DrawTaskConfig(target_polyline=((0.0, 0.0), (0.1, 0.0)))
        m = draw_metrics(make_draw_state(cfg), cfg)
        assert m.ink_coverage == 0.0

    def test_metrics_determinism(self):
        cfg = DrawTaskConfig(target_polyline=((0.0, 0.0), (0.1, 0.0)))
        state = make_draw_state(cfg)
        pts = tuple((0.01 * k, 0.001 * k, 0.002) for k in range(20))
        state = replace(state, **{"strokes": (pts,), "ink_count": 20})
        import json

        a = json.dumps(draw_metrics(state, cfg).to_record())
        b = json.dumps(draw_metrics(state, cfg).to_record())
        assert a == b


class TestConfigParsing:
    def test_ball_overrides(self):
        cfg = ball_config_from_mapping({"damping": 1.0, "goal_center": [0.1, 0.2, 0.3]})
        assert cfg.damping == 1.0
        assert cfg.goal_center == (0.1, 0.2, 0.3)

    def test_unknown_key_rejected(self):
        with pytest.raises(BadConfig):
            ball_config_from_mapping({"gravity": 9.8})
        with pytest.raises(BadConfig):
            draw_config_from_mapping({"pen_size": 1})

    def test_draw_target_polyline(self):
        cfg = draw_config_from_mapping({"target_polyline": [[0, 0], [0.1, 0.2]]})
        assert cfg.target_polyline == ((0.0, 0.0), (0.1, 0.2))
