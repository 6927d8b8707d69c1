"""Time-series refinement for planar court-space tracks.

Series are numpy arrays of shape (n, 2) (or (n,) for scalar series); absent
samples are NaN. The pipeline applies, in order:

* players: gap fill -> moving average -> resolution stabilization
* ball:    gap fill -> planar validation -> keyframe-piecewise moving average

The ball is smoothed between keyframes rather than across them because every
contact and bounce is a genuine velocity discontinuity; a window that straddles
one drags positions toward the other side of the kink.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError, InsufficientData, ValidationError
from .ingest import EventAnnotation, EventKind
from .projection import Homography

BALL_OUTLIER_THRESHOLD_M = 3.0

# Stage-one outlier refill is iterated to a fixed point; this caps pathological inputs.
MAX_REFILL_PASSES = 8


@dataclass(frozen=True)
class RefinementConfig:
    knn_k: int = 5
    ma_window: int = 5
    stabilization_deadband_px: float = 1.0
    ball_outlier_threshold_m: float = BALL_OUTLIER_THRESHOLD_M

    def __post_init__(self):
        if not isinstance(self.knn_k, int) or self.knn_k < 1:
            raise ConfigError(f"knn_k must be a positive integer, got {self.knn_k!r}")
        if not isinstance(self.ma_window, int) or self.ma_window < 1 or self.ma_window % 2 == 0:
            raise ConfigError(f"ma_window must be a positive odd integer, got {self.ma_window!r}")
        if self.stabilization_deadband_px < 0:
            raise ConfigError("stabilization_deadband_px must be >= 0")
        if self.ball_outlier_threshold_m <= 0:
            raise ConfigError("ball_outlier_threshold_m must be > 0")


def _as_series(series) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(series, dtype=float)
    scalar = arr.ndim == 1
    if scalar:
        arr = arr[:, None]
    if arr.ndim != 2 or len(arr) == 0:
        raise ValidationError("series must be a non-empty 1-D or 2-D array")
    return arr.copy(), scalar


def _present_mask(arr: np.ndarray) -> np.ndarray:
    # a sample missing any coordinate counts as absent
    return np.all(np.isfinite(arr), axis=1)


def fill_gaps_knn(series, k: int = 5):
    """Fill absent samples with the unweighted mean of the k nearest present ones.

    Distance is temporal (frame index difference); ties prefer the earlier
    frame. Present samples pass through untouched.

    Raises InsufficientData when fewer than k samples are present, ConfigError
    for a non-positive k.
    """
    if not isinstance(k, int) or k < 1:
        raise ConfigError(f"k must be a positive integer, got {k!r}")
    arr, scalar = _as_series(series)
    present = _present_mask(arr)
    present_idx = np.flatnonzero(present)
    if len(present_idx) < k:
        raise InsufficientData(
            f"gap filling needs at least k={k} present samples, got {len(present_idx)}"
        )
    for i in np.flatnonzero(~present):
        # probe outward from i; at equal distance the earlier frame wins
        pos = int(np.searchsorted(present_idx, i))
        lo, hi = pos - 1, pos
        chosen = []
        while len(chosen) < k:
            d_lo = i - present_idx[lo] if lo >= 0 else math.inf
            d_hi = present_idx[hi] - i if hi < len(present_idx) else math.inf
            if d_lo <= d_hi:
                chosen.append(present_idx[lo])
                lo -= 1
            else:
                chosen.append(present_idx[hi])
                hi += 1
        arr[i] = arr[chosen].mean(axis=0)
    return arr[:, 0] if scalar else arr


def smooth_moving_average(series, window: int = 5):
    """Centred moving average with symmetric shrink-to-fit windows at the edges.

    The first and last samples keep their values (window of one); interior
    samples use the largest symmetric window up to ``window``. Requires a
    complete series (fill gaps first) and an odd window.
    """
    if not isinstance(window, int) or window < 1 or window % 2 == 0:
        raise ConfigError(f"window must be a positive odd integer, got {window!r}")
    arr, scalar = _as_series(series)
    if not _present_mask(arr).all():
        raise ValidationError("smoothing requires a complete series; fill gaps first")
    n = len(arr)
    out = arr.copy()
    max_half = window // 2
    prefix = np.vstack([np.zeros((1, arr.shape[1])), np.cumsum(arr, axis=0)])
    for i in range(n):
        half = min(i, n - 1 - i, max_half)
        if half:
            out[i] = (prefix[i + half + 1] - prefix[i - half]) / (2 * half + 1)
    return out[:, 0] if scalar else out


def smooth_moving_average_piecewise(series, window: int, boundaries: Iterable[int]):
    """Moving average applied independently between consecutive boundary indices.

    Boundary samples fall at the shrunken window of one on both sides, so they
    are never altered, and no window mixes samples across a boundary. Used for
    the ball, whose velocity genuinely jumps at contacts and bounces.
    """
    arr, scalar = _as_series(series)
    n = len(arr)
    cuts = sorted({int(b) for b in boundaries if 0 <= int(b) < n})
    edges = [0] + cuts + [n - 1]
    out = arr.copy()
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            out[a:b + 1] = smooth_moving_average(arr[a:b + 1], window)
    return out[:, 0] if scalar else out


def stabilize_resolution(series, homography: Homography, deadband_px: float = 1.0):
    """Suppress sub-pixel oscillation of an otherwise stationary track.

    A step from the currently held position smaller than the court-space
    length of ``deadband_px`` at that position is discarded (the held position
    repeats); larger steps pass through and become the new held position. The
    local pixel length is measured by mapping one-pixel offsets through the
    calibration at the held point.
    """
    if deadband_px < 0:
        raise ConfigError("deadband_px must be >= 0")
    arr, scalar = _as_series(series)
    if scalar:
        raise ValidationError("stabilization operates on planar (n, 2) series")
    if not _present_mask(arr).all():
        raise ValidationError("stabilization requires a complete series; fill gaps first")
    if deadband_px == 0.0:
        return arr

    out = arr.copy()
    held = arr[0]
    threshold = deadband_px * _pixel_scale_at(homography, held)
    for i in range(1, len(arr)):
        if float(np.hypot(*(arr[i] - held))) < threshold:
            out[i] = held
        else:
            held = arr[i]
            threshold = deadband_px * _pixel_scale_at(homography, held)
    return out


def _pixel_scale_at(h: Homography, point: np.ndarray) -> float:
    """Court-space length of one pixel near the given court point (metres/px)."""
    u, v = h.world_to_image(point[0], point[1])
    x0, y0 = h.image_to_world(u, v)
    x1, y1 = h.image_to_world(u + 1.0, v)
    x2, y2 = h.image_to_world(u, v + 1.0)
    return (math.hypot(x1 - x0, y1 - y0) + math.hypot(x2 - x0, y2 - y0)) / 2.0


# ============================================================
# Ball-specific validation
# ============================================================


def validate_ball_planar(ball_series, events: Sequence[EventAnnotation],
                         player_tracks: Dict[str, np.ndarray],
                         outlier_threshold_m: float = BALL_OUTLIER_THRESHOLD_M,
                         knn_k: int = 5,
                         stats: Optional[dict] = None) -> np.ndarray:
    """Two-stage plausibility pass over a complete planar ball series.

    Stage one anchors the longitudinal coordinate at Bounce frames (bounce
    detections are trusted) and linearly interpolates between consecutive
    anchors; samples deviating more than ``outlier_threshold_m`` from that
    baseline are discarded and refilled from their temporal neighbours. The
    refill is iterated to a fixed point, with any stubborn sample pinned to
    the anchor baseline, which makes the whole pass idempotent.

    Stage two replaces the ball position at every Contact frame with the
    contacting player's foot position, the most reliable planar estimate at
    the moment of a hit.

    Pass ``stats`` to collect outlier and substitution counts.
    """
    arr, scalar = _as_series(ball_series)
    if scalar:
        raise ValidationError("ball validation operates on planar (n, 2) series")
    if not _present_mask(arr).all():
        raise ValidationError("ball validation requires a complete series; fill gaps first")
    n = len(arr)

    bounce_frames = sorted(e.frame for e in events if e.kind is EventKind.BOUNCE)
    contact_events = [e for e in events if e.kind is EventKind.CONTACT]
    for e in contact_events:
        if e.frame >= n:
            raise ValidationError(f"Contact event frame {e.frame} is outside the series")

    flagged: set = set()
    if len(bounce_frames) >= 2:
        baseline_y = _anchor_baseline(arr, bounce_frames)
        checked = np.zeros(n, dtype=bool)
        checked[bounce_frames[0]:bounce_frames[-1] + 1] = True
        checked[bounce_frames] = False  # anchors are trusted by definition

        def current_outliers() -> frozenset:
            deviation = np.abs(arr[:, 1] - baseline_y)
            return frozenset(np.flatnonzero(checked & (deviation > outlier_threshold_m)))

        previous: Optional[frozenset] = None
        for _ in range(MAX_REFILL_PASSES):
            outliers = current_outliers()
            flagged |= outliers
            if not outliers or outliers == previous:
                break
            previous = outliers
            holes = arr.copy()
            holes[list(outliers)] = np.nan
            arr = fill_gaps_knn(holes, knn_k)
        # pin anything still deviating to the anchor baseline so the pass
        # reaches a fixed point (and is therefore idempotent)
        for i in current_outliers():
            arr[i, 1] = baseline_y[i]

    substituted = 0
    for e in contact_events:
        track = player_tracks.get(e.player_id)
        if track is None:
            raise ValidationError(f"Contact at frame {e.frame} references unknown player {e.player_id!r}")
        foot = track[e.frame]
        if not np.all(np.isfinite(foot)):
            raise ValidationError(
                f"player {e.player_id!r} has no position at contact frame {e.frame}")
        arr[e.frame] = foot
        substituted += 1

    if stats is not None:
        stats["ball_outliers"] = len(flagged)
        stats["contact_substitutions"] = substituted
    return arr


def _anchor_baseline(arr: np.ndarray, bounce_frames: List[int]) -> np.ndarray:
    """Longitudinal baseline: linear in time through the bounce-frame values.

    Outside the first/last anchor the nearest anchor value extends flat; those
    regions are never checked, so the extension only keeps the array total.
    """
    y = np.empty(len(arr))
    y[:] = arr[bounce_frames[0], 1]
    for f0, f1 in zip(bounce_frames[:-1], bounce_frames[1:]):
        span = np.arange(f0, f1 + 1)
        y[span] = np.interp(span, [f0, f1], [arr[f0, 1], arr[f1, 1]])
    y[bounce_frames[-1]:] = arr[bounce_frames[-1], 1]
    return y


# ============================================================
# Planar segments
# ============================================================


@dataclass(frozen=True)
class PlanarSegment:
    """Constant-velocity planar motion between two keyframes."""

    t_start: float
    t_end: float
    x0: float
    y0: float
    vx: float
    vy: float

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    def position_at(self, t: float) -> Tuple[float, float]:
        tau = t - self.t_start
        return (self.x0 + self.vx * tau, self.y0 + self.vy * tau)


def reconstruct_planar(keyframes: Sequence[Tuple[float, Tuple[float, float]]]) -> List[PlanarSegment]:
    """Piecewise constant-velocity segments through (time, position) keyframes.

    Velocity on each segment is displacement over duration. Times must be
    strictly increasing; at least two keyframes are required.
    """
    if len(keyframes) < 2:
        raise ValidationError("planar reconstruction needs at least two keyframes")
    segments = []
    for (t0, p0), (t1, p1) in zip(keyframes[:-1], keyframes[1:]):
        if not (t1 > t0):
            raise ValidationError("keyframe times must be strictly increasing")
        dt = t1 - t0
        segments.append(PlanarSegment(
            t_start=t0, t_end=t1, x0=p0[0], y0=p0[1],
            vx=(p1[0] - p0[0]) / dt, vy=(p1[1] - p0[1]) / dt,
        ))
    return segments
