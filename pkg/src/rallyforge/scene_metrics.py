"""Zone-tagged event logging and windowed zone metrics.

Every Bounce, Contact, and NetCord in a point becomes one EventRecord tagged
with the court zone it happened in. Metrics aggregate those records either
over the whole record log (MatchStart) or over the trailing run of points
that belong to the game in progress (CurrentGame); the game boundary is
detected from the score timeline, since games and sets only ever change
between points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .court import CourtPoint, Phase, ZoneId, classify_zone
from .errors import InsufficientData, ValidationError
from .ingest import CourtTracks, EventAnnotation, EventKind, KEYFRAME_KINDS
from .kinematics import BallTrajectory3D
from .scoring import ScoreState


class MetricsWindow(Enum):
    MATCH_START = "MatchStart"
    CURRENT_GAME = "CurrentGame"


@dataclass(frozen=True)
class EventRecord:
    """One zone-tagged in-play event."""

    t: float
    kind: EventKind
    zone: ZoneId
    player_id: Optional[str]
    point_index: int
    position: Optional[CourtPoint] = None

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "kind": self.kind.value,
            "zone": self.zone.key(),
            "player_id": self.player_id,
            "point_index": self.point_index,
            "position": list(self.position.as_xyz()) if self.position else None,
        }


# ============================================================
# Event logging
# ============================================================


def _point_spans(events: Sequence[EventAnnotation]) -> List[Tuple[int, int]]:
    spans = []
    open_start = None
    for e in events:
        if e.kind is EventKind.POINT_START:
            open_start = e.frame
        elif e.kind is EventKind.POINT_END:
            spans.append((open_start, e.frame))
            open_start = None
    return spans


def log_zone_events(
    tracks: CourtTracks,
    trajectories: Union[BallTrajectory3D, Sequence[BallTrajectory3D]],
    events: Sequence[EventAnnotation],
) -> List[EventRecord]:
    """Tag every in-play event with the zone it happened in.

    ``trajectories`` holds one reconstructed ball trajectory per point span,
    in order (a single trajectory is accepted for single-point clips). Bounce
    and net-cord zones come from the trajectory's planar position at the event
    time; contact zones come from the hitting player's track. A bounce is
    classified under serve rules only while at most one contact (the serve
    itself) has happened in its point.
    """
    if isinstance(trajectories, BallTrajectory3D):
        trajectories = [trajectories]
    spans = _point_spans(events)
    if len(trajectories) != len(spans):
        raise ValidationError(
            f"need one trajectory per point: got {len(trajectories)} for {len(spans)} spans")

    records: List[EventRecord] = []
    point_index = -1
    contacts_seen = 0
    for e in events:
        if e.kind is EventKind.POINT_START:
            point_index += 1
            contacts_seen = 0
            continue
        if e.kind not in KEYFRAME_KINDS:
            continue
        t = e.frame / tracks.fps
        traj = trajectories[point_index]
        if not (traj.t_start <= t <= traj.t_end):
            raise ValidationError(
                f"{e.kind.value} at t={t:.3f}s lies outside its trajectory span "
                f"[{traj.t_start:.3f}, {traj.t_end:.3f}]")

        if e.kind is EventKind.CONTACT:
            contacts_seen += 1
            xy = tracks.players[e.player_id][e.frame]
            if np.any(np.isnan(xy)):
                raise InsufficientData(
                    f"player {e.player_id!r} has no position at frame {e.frame}; "
                    "fill gaps before logging zone events")
            position = CourtPoint(float(xy[0]), float(xy[1]))
            zone = classify_zone(position, Phase.RALLY)
        else:
            p = traj.evaluate(t)
            phase = Phase.SERVE if (e.kind is EventKind.BOUNCE and contacts_seen <= 1) else Phase.RALLY
            position = CourtPoint(p.x, p.y, p.z)
            zone = classify_zone(CourtPoint(p.x, p.y), phase)
        records.append(EventRecord(t=t, kind=e.kind, zone=zone,
                                   player_id=e.player_id, point_index=point_index,
                                   position=position))
    return records


# ============================================================
# Windowed metrics
# ============================================================


def _game_signature(state: ScoreState) -> tuple:
    return (state.sets, state.games)


def _current_game_points(score_timeline: Sequence[ScoreState]) -> set:
    """Indices of the trailing points that share the last point's game."""
    if not score_timeline:
        return set()
    last = _game_signature(score_timeline[-1])
    included = set()
    for i in range(len(score_timeline) - 1, -1, -1):
        if _game_signature(score_timeline[i]) != last:
            break
        included.add(i)
    return included


def _apportioned_percentages(counts: Dict[str, int]) -> Dict[str, float]:
    """Percentages in tenths that sum to exactly 100.0.

    Independent rounding can drift (six equal zones round to 16.7 each,
    totalling 100.2), so leftover tenths go to the largest remainders.
    """
    total = sum(counts.values())
    raw = {zone: 1000.0 * c / total for zone, c in counts.items()}
    base = {zone: math.floor(v) for zone, v in raw.items()}
    leftover = 1000 - sum(base.values())
    order = sorted(raw, key=lambda zone: (base[zone] - raw[zone], zone))
    for zone in order[:leftover]:
        base[zone] += 1
    return {zone: base[zone] / 10.0 for zone in sorted(base)}


@dataclass(frozen=True)
class ZoneMetrics:
    """Per-kind zone counts and percentages over one window.

    ``percentages`` omits kinds with no events; present kinds always sum to
    exactly 100.0 by apportionment.
    """

    window: MetricsWindow
    counts: Dict[str, Dict[str, int]]
    percentages: Dict[str, Dict[str, float]]

    def to_dict(self) -> dict:
        return {
            "window": self.window.value,
            "counts": {k: dict(sorted(v.items())) for k, v in sorted(self.counts.items())},
            "percentages": {k: dict(sorted(v.items())) for k, v in sorted(self.percentages.items())},
        }


def compute_zone_metrics(
    records: Sequence[EventRecord],
    score_timeline: Sequence[ScoreState],
    window: MetricsWindow,
) -> ZoneMetrics:
    """Aggregate zone counts over a window of the record log.

    ``score_timeline[i]`` is the score before point ``i``. MatchStart counts
    everything; CurrentGame counts only points whose score shares the last
    point's games-and-sets signature (an empty timeline keeps all records,
    treating the log as a single game).
    """
    if window is MetricsWindow.CURRENT_GAME and score_timeline:
        included = _current_game_points(score_timeline)
        records = [r for r in records if r.point_index in included]

    counts: Dict[str, Dict[str, int]] = {}
    for r in records:
        per_zone = counts.setdefault(r.kind.value, {})
        per_zone[r.zone.key()] = per_zone.get(r.zone.key(), 0) + 1

    percentages = {
        kind: _apportioned_percentages(per_zone)
        for kind, per_zone in counts.items()
        if sum(per_zone.values()) > 0
    }
    return ZoneMetrics(window=window, counts=counts, percentages=percentages)
