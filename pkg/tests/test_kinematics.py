"""Ballistic segment solver and trajectory assembly tests."""

import time

import numpy as np
import pytest

from rallyforge.errors import ConfigError, RangeError, ValidationError
from rallyforge.ingest import EventKind, SpinType
from rallyforge.kinematics import (
    BACKSPIN_ACCEL,
    TOPSPIN_ACCEL,
    BallKeyframe,
    assemble_ball_trajectory,
    sample_trajectory,
    solve_vertical_segment,
    spin_acceleration,
)


def test_spin_acceleration_constants():
    assert spin_acceleration(SpinType.TOPSPIN) == -9.81
    assert spin_acceleration(SpinType.BACKSPIN) == -10.81


# ------------------------------------------------------------
# Single-segment solver
# ------------------------------------------------------------


def test_launch_velocity_level_flight():
    # h0 = h1 = 1 over one second of topspin: v0 = -a/2 = 4.905
    seg = solve_vertical_segment(1.0, 1.0, 1.0, SpinType.TOPSPIN)
    assert seg.v0 == pytest.approx(4.905)


def test_launch_velocity_free_fall():
    # dropping 1 m from rest takes sqrt(2/9.81) ~ 0.4515 s
    seg = solve_vertical_segment(1.0, 0.0, 0.4515, SpinType.TOPSPIN)
    assert abs(seg.v0) <= 1e-3


def test_launch_velocity_backspin():
    seg = solve_vertical_segment(0.9, 0.0, 0.5, SpinType.BACKSPIN)
    assert seg.v0 == pytest.approx(0.9025)
    assert seg.accel == BACKSPIN_ACCEL


def test_serve_drop_hits_ground_at_endpoint():
    seg = solve_vertical_segment(2.8, 0.0, 0.6, SpinType.TOPSPIN)
    assert seg.height_at(0.6) == pytest.approx(0.0, abs=1e-12)
    assert seg.height_at(0.0) == 2.8


def test_endpoints_exact_over_random_segments():
    rng = np.random.default_rng(99)
    start = time.perf_counter()
    for _ in range(1000):
        h0 = rng.uniform(0.0, 3.5)
        h1 = rng.uniform(0.0, 3.5)
        t = rng.uniform(0.05, 2.5)
        spin = SpinType.TOPSPIN if rng.integers(2) else SpinType.BACKSPIN
        seg = solve_vertical_segment(h0, h1, t, spin)
        assert abs(seg.height_at(0.0) - h0) <= 1e-9
        assert abs(seg.height_at(t) - h1) <= 1e-9
    assert time.perf_counter() - start < 1.0


def test_velocity_matches_finite_difference():
    seg = solve_vertical_segment(0.8, 1.9, 0.7, SpinType.TOPSPIN)
    eps = 1e-5
    for tau in (0.1, 0.35, 0.6):
        fd = (seg.height_at(tau + eps) - seg.height_at(tau - eps)) / (2 * eps)
        assert abs(fd - seg.velocity_at(tau)) <= 1e-4


def test_peak_matches_dense_sampling():
    seg = solve_vertical_segment(1.0, 0.5, 1.2, SpinType.TOPSPIN)
    t_star, h_star = seg.peak()
    taus = np.linspace(0.0, seg.duration, 200001)
    heights = seg.h0 + seg.v0 * taus + 0.5 * seg.accel * taus**2
    assert h_star >= heights.max() - 1e-6
    assert abs(taus[int(heights.argmax())] - t_star) <= 1e-4


def test_peak_at_boundary_when_vertex_outside():
    # strongly downward launch: the maximum is the starting height
    seg = solve_vertical_segment(2.0, 0.0, 0.1, SpinType.TOPSPIN)
    t_star, h_star = seg.peak()
    if seg.v0 < 0:
        assert (t_star, h_star) == (0.0, 2.0)


def test_solver_input_validation():
    with pytest.raises(ValidationError):
        solve_vertical_segment(1.0, 1.0, 0.0, SpinType.TOPSPIN)
    with pytest.raises(ValidationError):
        solve_vertical_segment(-0.2, 1.0, 1.0, SpinType.TOPSPIN)
    with pytest.raises(ValidationError):
        solve_vertical_segment(1.0, float("nan"), 1.0, SpinType.TOPSPIN)


# ------------------------------------------------------------
# Trajectory assembly
# ------------------------------------------------------------


def _rally_keyframes():
    return [
        BallKeyframe(t=0.0, position=(0.0, -11.885), kind=EventKind.CONTACT,
                     height=2.8, spin=SpinType.TOPSPIN),
        BallKeyframe(t=0.6, position=(1.2, 5.5), kind=EventKind.BOUNCE),
        BallKeyframe(t=1.1, position=(2.0, 10.0), kind=EventKind.CONTACT,
                     height=1.0, spin=SpinType.BACKSPIN),
        BallKeyframe(t=1.9, position=(-1.5, -6.4), kind=EventKind.BOUNCE),
    ]


def test_assembled_trajectory_passes_through_keyframes():
    traj = assemble_ball_trajectory(_rally_keyframes())
    assert traj.warnings == ()
    for k in traj.keyframes:
        p = traj.evaluate(k.t)
        assert (p.x, p.y) == pytest.approx(k.position, abs=1e-9)
    # forced heights at the structural keyframes
    assert traj.evaluate(0.0).z == pytest.approx(2.8, abs=1e-9)
    assert traj.evaluate(0.6).z == pytest.approx(0.0, abs=1e-9)
    assert traj.evaluate(1.1).z == pytest.approx(1.0, abs=1e-9)


def test_bounce_height_annotation_is_overridden():
    frames = _rally_keyframes()
    frames[1] = BallKeyframe(t=0.6, position=(1.2, 5.5), kind=EventKind.BOUNCE, height=0.4)
    traj = assemble_ball_trajectory(frames)
    assert traj.evaluate(0.6).z == pytest.approx(0.0, abs=1e-9)


def test_net_cord_keyframe_pins_cord_height():
    frames = [
        BallKeyframe(t=0.0, position=(0.0, -10.0), kind=EventKind.CONTACT,
                     height=1.1, spin=SpinType.TOPSPIN),
        BallKeyframe(t=0.4, position=(0.5, 0.0), kind=EventKind.NET_CORD),
        BallKeyframe(t=0.9, position=(1.0, 4.0), kind=EventKind.BOUNCE),
    ]
    traj = assemble_ball_trajectory(frames)
    assert traj.evaluate(0.4).z == pytest.approx(0.9, abs=1e-9)


def test_spin_inherited_from_most_recent_contact():
    frames = _rally_keyframes() + [
        BallKeyframe(t=2.5, position=(-2.0, -10.0), kind=EventKind.BOUNCE),
    ]
    traj = assemble_ball_trajectory(frames)
    accels = [seg.accel for seg in traj.vertical]
    # contact(top) -> bounce -> contact(back) -> bounce -> bounce
    assert accels == [TOPSPIN_ACCEL, TOPSPIN_ACCEL, BACKSPIN_ACCEL, BACKSPIN_ACCEL]


def test_planar_positions_interpolate_linearly():
    traj = assemble_ball_trajectory(_rally_keyframes())
    p = traj.evaluate(0.3)  # halfway through the first segment
    assert (p.x, p.y) == pytest.approx((0.6, (-11.885 + 5.5) / 2), abs=1e-12)


def test_evaluate_outside_span_raises():
    traj = assemble_ball_trajectory(_rally_keyframes())
    with pytest.raises(RangeError):
        traj.evaluate(-0.01)
    with pytest.raises(RangeError):
        traj.evaluate(1.91)


def test_assembly_validation():
    with pytest.raises(ValidationError):
        assemble_ball_trajectory([])
    with pytest.raises(ValidationError):
        assemble_ball_trajectory(_rally_keyframes()[:1])
    # starts at a bounce: no spin to inherit
    with pytest.raises(ValidationError):
        assemble_ball_trajectory(_rally_keyframes()[1:])
    # contact without spin annotation
    frames = _rally_keyframes()
    frames[0] = BallKeyframe(t=0.0, position=(0.0, -11.885), kind=EventKind.CONTACT, height=2.8)
    with pytest.raises(ValidationError):
        assemble_ball_trajectory(frames)
    # non-increasing times
    frames = _rally_keyframes()
    frames[2] = BallKeyframe(t=0.6, position=(2.0, 10.0), kind=EventKind.CONTACT,
                             height=1.0, spin=SpinType.BACKSPIN)
    with pytest.raises(ValidationError):
        assemble_ball_trajectory(frames)
    # contact without height annotation
    frames = _rally_keyframes()
    frames[2] = BallKeyframe(t=1.1, position=(2.0, 10.0), kind=EventKind.CONTACT,
                             spin=SpinType.BACKSPIN)
    with pytest.raises(ValidationError):
        assemble_ball_trajectory(frames)


# ------------------------------------------------------------
# Sampling
# ------------------------------------------------------------


def test_sampling_covers_span_and_hits_keyframes():
    traj = assemble_ball_trajectory(_rally_keyframes())
    samples = sample_trajectory(traj, 10.0)
    assert samples[0, 0] == traj.t_start
    assert samples[-1, 0] >= traj.t_end - 1e-9
    by_time = {round(row[0], 9): row for row in samples}
    for k in traj.keyframes[:-1]:  # keyframes at 0.0, 0.6 land on the 10 Hz grid
        key = round(k.t, 9)
        if key in by_time:
            row = by_time[key]
            assert (row[1], row[2]) == pytest.approx(k.position, abs=1e-9)


def test_sampling_nests_when_rate_doubles():
    traj = assemble_ball_trajectory(_rally_keyframes())
    coarse = sample_trajectory(traj, 25.0)
    fine = sample_trajectory(traj, 50.0)
    assert fine.shape[0] >= 2 * coarse.shape[0] - 1
    assert np.allclose(fine[::2][: coarse.shape[0]], coarse[: fine[::2].shape[0]], atol=1e-9)


def test_sampling_rejects_bad_rate():
    traj = assemble_ball_trajectory(_rally_keyframes())
    with pytest.raises(ConfigError):
        sample_trajectory(traj, 0.0)
    with pytest.raises(ConfigError):
        sample_trajectory(traj, -5.0)
