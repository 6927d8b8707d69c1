"""Zone event logging and windowed metrics tests."""

import numpy as np
import pytest

from rallyforge.court import CourtPoint, Phase, classify_zone
from rallyforge.errors import InsufficientData, ValidationError
from rallyforge.ingest import EventAnnotation, EventKind
from rallyforge.kinematics import BallKeyframe, assemble_ball_trajectory
from rallyforge.ingest import CourtTracks, SpinType
from rallyforge.projection import Homography
from rallyforge.scene_metrics import (
    EventRecord,
    MetricsWindow,
    compute_zone_metrics,
    log_zone_events,
)
from rallyforge.scoring import advance_score, new_match


def make_tracks(n=60, fps=25.0, p1=(1.0, -11.0), p2=(-1.5, 10.0)):
    players = {
        "p1": np.tile(np.asarray(p1, dtype=float), (n, 1)),
        "p2": np.tile(np.asarray(p2, dtype=float), (n, 1)),
    }
    return CourtTracks(homography=Homography.identity(), calibration={"median_px": 0.0},
                       fps=fps, ball=np.full((n, 2), np.nan), players=players)


def serve_point_fixture():
    """One serve point: contact at frame 5, serve bounce 15, return contact 25,
    rally bounce 40, with matching trajectory keyframes."""
    events = [
        EventAnnotation(frame=0, kind=EventKind.POINT_START),
        EventAnnotation(frame=5, kind=EventKind.CONTACT, player_id="p1"),
        EventAnnotation(frame=15, kind=EventKind.BOUNCE),
        EventAnnotation(frame=25, kind=EventKind.CONTACT, player_id="p2"),
        EventAnnotation(frame=40, kind=EventKind.BOUNCE),
        EventAnnotation(frame=50, kind=EventKind.POINT_END),
    ]
    keyframes = [
        BallKeyframe(t=5 / 25, position=(1.0, -11.0), kind=EventKind.CONTACT,
                     height=2.8, spin=SpinType.TOPSPIN),
        BallKeyframe(t=15 / 25, position=(-3.9, 4.0), kind=EventKind.BOUNCE),
        BallKeyframe(t=25 / 25, position=(-1.5, 10.0), kind=EventKind.CONTACT,
                     height=1.0, spin=SpinType.BACKSPIN),
        BallKeyframe(t=40 / 25, position=(0.5, -10.0), kind=EventKind.BOUNCE),
    ]
    return events, assemble_ball_trajectory(keyframes)


def test_log_zone_events_serve_point():
    events, traj = serve_point_fixture()
    records = log_zone_events(make_tracks(), traj, events)
    assert [r.kind.value for r in records] == ["Contact", "Bounce", "Contact", "Bounce"]
    assert [r.point_index for r in records] == [0, 0, 0, 0]

    serve_bounce = records[1]
    assert serve_bounce.t == pytest.approx(0.6)
    assert serve_bounce.zone.key() == "serve:Deuce:Wide"
    # one contact happened after the serve: later bounces use rally rules
    rally_bounce = records[3]
    assert rally_bounce.zone.key() == classify_zone(CourtPoint(0.5, -10.0), Phase.RALLY).key()
    assert rally_bounce.zone.key() == "rally:Center:Deep:Near"

    # contact zones come from the player tracks and carry the player id
    assert records[0].player_id == "p1"
    assert records[0].zone.key() == classify_zone(CourtPoint(1.0, -11.0), Phase.RALLY).key()
    assert records[2].zone.key() == classify_zone(CourtPoint(-1.5, 10.0), Phase.RALLY).key()


def test_log_zone_events_empty_point():
    events = [
        EventAnnotation(frame=0, kind=EventKind.POINT_START),
        EventAnnotation(frame=10, kind=EventKind.POINT_END),
    ]
    _, traj = serve_point_fixture()
    assert log_zone_events(make_tracks(), [traj], events) == []


def test_log_zone_events_net_cord_uses_rally_rules():
    events = [
        EventAnnotation(frame=0, kind=EventKind.POINT_START),
        EventAnnotation(frame=5, kind=EventKind.CONTACT, player_id="p1"),
        EventAnnotation(frame=10, kind=EventKind.NET_CORD),
        EventAnnotation(frame=20, kind=EventKind.BOUNCE),
        EventAnnotation(frame=30, kind=EventKind.POINT_END),
    ]
    keyframes = [
        BallKeyframe(t=0.2, position=(1.0, -11.0), kind=EventKind.CONTACT,
                     height=2.8, spin=SpinType.TOPSPIN),
        BallKeyframe(t=0.4, position=(0.8, 0.0), kind=EventKind.NET_CORD),
        BallKeyframe(t=0.8, position=(0.6, 4.0), kind=EventKind.BOUNCE),
    ]
    traj = assemble_ball_trajectory(keyframes)
    records = log_zone_events(make_tracks(), traj, events)
    assert records[1].kind is EventKind.NET_CORD
    assert records[1].zone.key() == classify_zone(CourtPoint(0.8, 0.0), Phase.RALLY).key()


def test_log_zone_events_validates_span_and_counts():
    events, traj = serve_point_fixture()
    with pytest.raises(ValidationError):
        log_zone_events(make_tracks(), [traj, traj], events)
    # an event outside the trajectory span
    bad = list(events)
    bad[4] = EventAnnotation(frame=45, kind=EventKind.BOUNCE)
    with pytest.raises(ValidationError):
        log_zone_events(make_tracks(), traj, bad)


def test_log_zone_events_requires_filled_player_tracks():
    events, traj = serve_point_fixture()
    tracks = make_tracks()
    tracks.players["p1"][5] = np.nan
    with pytest.raises(InsufficientData):
        log_zone_events(tracks, traj, events)


# ------------------------------------------------------------
# Windowed metrics
# ------------------------------------------------------------


def _rec(point_index, zone_key="rally:Center:Deep:Near", kind=EventKind.BOUNCE):
    zone = classify_zone(CourtPoint(0.5, -10.0), Phase.RALLY)
    assert zone.key() == "rally:Center:Deep:Near"
    zones = {
        "rally:Center:Deep:Near": zone,
        "rally:Left:Short:Far": classify_zone(CourtPoint(-2.0, 3.0), Phase.RALLY),
        "serve:Deuce:Wide": classify_zone(CourtPoint(-3.9, 4.0), Phase.SERVE),
    }
    return EventRecord(t=float(point_index), kind=kind, zone=zones[zone_key],
                       player_id=None, point_index=point_index)


def test_metrics_single_zone_is_hundred_percent():
    records = [_rec(i) for i in range(4)]
    m = compute_zone_metrics(records, [], MetricsWindow.MATCH_START)
    assert m.counts["Bounce"] == {"rally:Center:Deep:Near": 4}
    assert m.percentages["Bounce"] == {"rally:Center:Deep:Near": 100.0}


def test_metrics_three_to_one_split():
    records = [_rec(0), _rec(1), _rec(2), _rec(3, "rally:Left:Short:Far")]
    m = compute_zone_metrics(records, [], MetricsWindow.MATCH_START)
    assert m.percentages["Bounce"] == {
        "rally:Center:Deep:Near": 75.0,
        "rally:Left:Short:Far": 25.0,
    }


def test_metrics_kinds_are_separate():
    records = [_rec(0), _rec(0, kind=EventKind.CONTACT), _rec(1, kind=EventKind.CONTACT)]
    m = compute_zone_metrics(records, [], MetricsWindow.MATCH_START)
    assert m.counts["Bounce"]["rally:Center:Deep:Near"] == 1
    assert m.counts["Contact"]["rally:Center:Deep:Near"] == 2


def test_metrics_empty_window():
    m = compute_zone_metrics([], [], MetricsWindow.MATCH_START)
    assert m.counts == {} and m.percentages == {}


def test_metrics_percentages_apportion_to_exactly_hundred():
    # six equal zones naively round to 16.7 each (100.2 total)
    zones = [
        classify_zone(CourtPoint(x, y), Phase.RALLY)
        for x, y in [(-2, 3), (0, 3), (2, 3), (-2, -3), (0, -3), (2, -3)]
    ]
    assert len({z.key() for z in zones}) == 6
    records = [
        EventRecord(t=float(i), kind=EventKind.BOUNCE, zone=z, player_id=None, point_index=0)
        for i, z in enumerate(zones)
    ]
    m = compute_zone_metrics(records, [], MetricsWindow.MATCH_START)
    values = m.percentages["Bounce"].values()
    assert sum(values) == pytest.approx(100.0, abs=1e-9)
    assert all(v in (16.6, 16.7) for v in values)


def test_metrics_percentage_sum_invariant_random_fixtures():
    rng = np.random.default_rng(31)
    zone_pool = [
        classify_zone(CourtPoint(float(x), float(y)), Phase.RALLY)
        for x, y in [(-2, 3), (0, 3), (2, 3), (-2, -3), (0, -3), (2, -3), (0, 10), (3, -11)]
    ]
    for _ in range(50):
        n = int(rng.integers(1, 40))
        records = [
            EventRecord(t=float(i), kind=EventKind.BOUNCE,
                        zone=zone_pool[int(rng.integers(len(zone_pool)))],
                        player_id=None, point_index=0)
            for i in range(n)
        ]
        m = compute_zone_metrics(records, [], MetricsWindow.MATCH_START)
        assert sum(m.percentages["Bounce"].values()) == pytest.approx(100.0, abs=0.1)


def test_current_game_window_filters_by_game_boundary():
    # p1 wins points 0-3 (game one), then points 4-5 start game two
    states = [new_match()]
    for _ in range(5):
        states.append(advance_score(states[-1], "p1"))
    score_timeline = states[:6]
    assert score_timeline[4].games != score_timeline[3].games  # boundary after point 3

    records = [_rec(i) for i in range(6)]
    current = compute_zone_metrics(records, score_timeline, MetricsWindow.CURRENT_GAME)
    assert current.counts["Bounce"]["rally:Center:Deep:Near"] == 2
    full = compute_zone_metrics(records, score_timeline, MetricsWindow.MATCH_START)
    assert full.counts["Bounce"]["rally:Center:Deep:Near"] == 6


def test_current_game_window_spans_whole_tiebreak():
    state = new_match()
    # reach 6-6: alternate game wins (server alternates anyway)
    for game in range(12):
        winner = state.players[game % 2]
        for _ in range(4):
            state = advance_score(state, winner)
    assert state.tiebreak_points is not None
    timeline = [state]
    for i in range(4):  # four tiebreak points: same game signature throughout
        state = advance_score(state, state.players[i % 2])
        timeline.append(state)
    records = [_rec(i) for i in range(len(timeline))]
    m = compute_zone_metrics(records, timeline, MetricsWindow.CURRENT_GAME)
    assert m.counts["Bounce"]["rally:Center:Deep:Near"] == len(timeline)


def test_metrics_to_dict_round_trips_cleanly():
    records = [_rec(0), _rec(1, "serve:Deuce:Wide")]
    m = compute_zone_metrics(records, [], MetricsWindow.MATCH_START)
    d = m.to_dict()
    assert d["window"] == "MatchStart"
    assert d["counts"]["Bounce"]["serve:Deuce:Wide"] == 1
    assert d["percentages"]["Bounce"]["rally:Center:Deep:Near"] == 50.0
