"""Piecewise ballistic reconstruction of the ball's vertical motion.

Between consecutive keyframes the planar path has constant velocity and the
height follows h(tau) = h0 + v0*tau + a*tau^2/2 with a spin-dependent
effective vertical acceleration: -9.81 m/s^2 under topspin, -10.81 m/s^2
under backspin (backspin carry makes the drop read heavier). Given both
endpoint heights and the duration, the launch velocity is

    v0 = (h1 - h0 - a*t^2/2) / t

which reproduces both endpoints exactly by construction.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .court import COURT, CourtPoint
from .errors import ConfigError, RangeError, ValidationError
from .ingest import EventKind, SpinType
from .refine import PlanarSegment, reconstruct_planar

TOPSPIN_ACCEL = -9.81
BACKSPIN_ACCEL = -10.81

BOUNCE_HEIGHT = 0.0
NET_CORD_HEIGHT = COURT.net_cord_height

# Solved heights below -1 cm are a physical inconsistency worth flagging;
# smaller excursions are numeric noise and only clamped.
CLAMP_TOLERANCE_M = 0.01


def spin_acceleration(spin: SpinType) -> float:
    return TOPSPIN_ACCEL if spin is SpinType.TOPSPIN else BACKSPIN_ACCEL


@dataclass(frozen=True)
class VerticalSegment:
    """Closed-form vertical motion over one keyframe interval."""

    duration: float
    h0: float
    h1: float
    accel: float
    v0: float

    def height_at(self, tau: float) -> float:
        return self.h0 + self.v0 * tau + 0.5 * self.accel * tau * tau

    def velocity_at(self, tau: float) -> float:
        return self.v0 + self.accel * tau

    def peak(self) -> Tuple[float, float]:
        """(time, height) of the maximum over [0, duration]."""
        tau_star = -self.v0 / self.accel
        if 0.0 <= tau_star <= self.duration:
            return (tau_star, self.height_at(tau_star))
        h_end = self.height_at(self.duration)
        return (0.0, self.h0) if self.h0 >= h_end else (self.duration, h_end)


def solve_vertical_segment(h0: float, h1: float, t_dur: float, spin: SpinType) -> VerticalSegment:
    """Solve the launch velocity connecting two known heights over a duration."""
    if not (math.isfinite(t_dur) and t_dur > 0):
        raise ValidationError(f"segment duration must be positive, got {t_dur!r}")
    for name, h in (("h0", h0), ("h1", h1)):
        if not (math.isfinite(h) and h >= 0):
            raise ValidationError(f"{name} must be a non-negative height, got {h!r}")
    a = spin_acceleration(spin)
    v0 = (h1 - h0 - 0.5 * a * t_dur * t_dur) / t_dur
    return VerticalSegment(duration=t_dur, h0=h0, h1=h1, accel=a, v0=v0)


@dataclass(frozen=True)
class BallKeyframe:
    """One annotated instant of the ball's flight."""

    t: float
    position: Tuple[float, float]
    kind: EventKind
    height: Optional[float] = None
    spin: Optional[SpinType] = None


@dataclass(frozen=True)
class PhysicalInconsistency:
    """A solved segment dipped below the ground by more than the tolerance."""

    segment_index: int
    min_height_m: float

    def __str__(self):
        return (f"segment {self.segment_index} dips to {self.min_height_m:.3f} m; "
                f"heights are clamped to 0 on evaluation")


@dataclass(frozen=True)
class BallTrajectory3D:
    """Assembled piecewise trajectory with closed-form evaluation."""

    keyframes: Tuple[BallKeyframe, ...]
    planar: Tuple[PlanarSegment, ...]
    vertical: Tuple[VerticalSegment, ...]
    warnings: Tuple[PhysicalInconsistency, ...] = ()
    _times: Tuple[float, ...] = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_times", tuple(k.t for k in self.keyframes))

    @property
    def t_start(self) -> float:
        return self._times[0]

    @property
    def t_end(self) -> float:
        return self._times[-1]

    def segment_index_at(self, t: float) -> int:
        if not (self.t_start <= t <= self.t_end):
            raise RangeError(
                f"t={t} outside trajectory span [{self.t_start}, {self.t_end}]")
        return min(max(bisect.bisect_right(self._times, t) - 1, 0), len(self.planar) - 1)

    def evaluate(self, t: float) -> CourtPoint:
        i = self.segment_index_at(t)
        x, y = self.planar[i].position_at(t)
        z = self.vertical[i].height_at(t - self.planar[i].t_start)
        return CourtPoint(x, y, max(0.0, z))


def assemble_ball_trajectory(keyframes: Sequence[BallKeyframe],
                             net_cord_height: float = NET_CORD_HEIGHT) -> BallTrajectory3D:
    """Connect annotated keyframes into a full 3D trajectory.

    Bounce keyframes are pinned to height 0 and net-cord keyframes to the cord
    height regardless of any annotated value; those constants are more
    trustworthy than a detector estimate. Contact keyframes need an annotated
    height and spin; segments inherit spin from the most recent contact at or
    before their start.
    """
    if not keyframes:
        raise ValidationError("cannot assemble a trajectory from no keyframes")
    if len(keyframes) < 2:
        raise ValidationError("a trajectory needs at least two keyframes")
    for k0, k1 in zip(keyframes[:-1], keyframes[1:]):
        if not (k1.t > k0.t):
            raise ValidationError("keyframe times must be strictly increasing")

    heights: List[float] = []
    for i, k in enumerate(keyframes):
        if k.kind is EventKind.BOUNCE:
            heights.append(BOUNCE_HEIGHT)
        elif k.kind is EventKind.NET_CORD:
            heights.append(net_cord_height)
        elif k.height is not None:
            heights.append(k.height)
        else:
            raise ValidationError(f"keyframe {i} ({k.kind.value}) has no height annotation")

    planar = reconstruct_planar([(k.t, k.position) for k in keyframes])

    vertical: List[VerticalSegment] = []
    warnings: List[PhysicalInconsistency] = []
    spin: Optional[SpinType] = None
    for i, k in enumerate(keyframes[:-1]):
        if k.kind is EventKind.CONTACT:
            if k.spin is None:
                raise ValidationError(f"contact keyframe {i} has no spin annotation")
            spin = k.spin
        if spin is None:
            raise ValidationError(
                "the first segment has no spin to inherit; trajectories must start at a contact")
        seg = solve_vertical_segment(heights[i], heights[i + 1],
                                     keyframes[i + 1].t - k.t, spin)
        low = min(seg.h0, seg.h1)
        if seg.accel > 0:  # defensive: our solver never produces this
            tau_star = -seg.v0 / seg.accel
            if 0 <= tau_star <= seg.duration:
                low = min(low, seg.height_at(tau_star))
        if low < -CLAMP_TOLERANCE_M:
            warnings.append(PhysicalInconsistency(segment_index=i, min_height_m=float(low)))
        vertical.append(seg)

    return BallTrajectory3D(
        keyframes=tuple(keyframes),
        planar=tuple(planar),
        vertical=tuple(vertical),
        warnings=tuple(warnings),
    )


def sample_trajectory(trajectory: BallTrajectory3D, rate_hz: float) -> np.ndarray:
    """Sample the trajectory on the grid t_start + n/rate, rows of (t, x, y, z).

    The grid covers the whole span; doubling the rate keeps every existing
    sample time, so supersampled exports nest.
    """
    if not (math.isfinite(rate_hz) and rate_hz > 0):
        raise ConfigError(f"sample rate must be positive, got {rate_hz!r}")
    span = trajectory.t_end - trajectory.t_start
    count = int(math.floor(span * rate_hz + 1e-9)) + 1
    out = np.empty((count, 4))
    for n in range(count):
        t = trajectory.t_start + n / rate_hz
        p = trajectory.evaluate(min(t, trajectory.t_end))
        out[n] = (t, p.x, p.y, p.z)
    return out
