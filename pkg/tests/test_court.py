"""Court geometry and zone classification tests."""

import math

import numpy as np
import pytest

from rallyforge.court import (
    COURT,
    CourtPoint,
    CourtSide,
    DepthBand,
    LateralBand,
    Phase,
    ServeBand,
    ServeBox,
    ZoneId,
    all_zones,
    classify_zone,
    reference_keypoints,
)
from rallyforge.errors import ValidationError


def test_dimensions():
    assert COURT.length == 23.77
    assert COURT.singles_half_width == 4.115
    assert COURT.doubles_half_width == 5.485
    assert COURT.service_line_y == 6.40
    assert COURT.baseline_y == pytest.approx(11.885)
    assert COURT.net_cord_height == 0.9
    assert COURT.mid_depth_y == pytest.approx(9.1425)


def test_keypoint_count_and_first_corner():
    pts = reference_keypoints()
    assert len(pts) == 14
    assert pts[0] == CourtPoint(-5.485, -11.885, 0.0)
    assert all(p.z == 0.0 for p in pts)


def test_keypoints_symmetric_under_point_reflection():
    pts = {(p.x, p.y) for p in reference_keypoints()}
    assert {(-x, -y) for x, y in pts} == pts
    assert {(-x, y) for x, y in pts} == pts


def test_keypoint_groups():
    pts = reference_keypoints()
    assert {(p.x, p.y) for p in pts[0:4]} == {
        (-5.485, -11.885), (5.485, -11.885), (-5.485, 11.885), (5.485, 11.885)
    }
    assert {(p.x, p.y) for p in pts[4:8]} == {
        (-4.115, -11.885), (4.115, -11.885), (-4.115, 11.885), (4.115, 11.885)
    }
    assert {(p.x, p.y) for p in pts[8:12]} == {
        (-4.115, -6.40), (4.115, -6.40), (-4.115, 6.40), (4.115, 6.40)
    }
    assert {(p.x, p.y) for p in pts[12:14]} == {(0.0, -6.40), (0.0, 6.40)}


# ------------------------------------------------------------
# Zone classification
# ------------------------------------------------------------


def test_rally_zone_example():
    zone = classify_zone(CourtPoint(0.5, 10.0), Phase.RALLY)
    assert zone == ZoneId.rally(LateralBand.CENTER, DepthBand.DEEP, CourtSide.FAR)


def test_serve_zone_wide_example():
    zone = classify_zone(CourtPoint(-3.9, 4.0), Phase.SERVE)
    assert zone.phase is Phase.SERVE
    assert zone.serve_band is ServeBand.WIDE
    assert zone.box is ServeBox.DEUCE  # receiver on the far half, their right is x < 0


def test_doubles_alley_is_out_of_bounds():
    assert classify_zone(CourtPoint(4.8, 3.0), Phase.RALLY).is_out_of_bounds
    assert classify_zone(CourtPoint(-5.0, -10.0), Phase.RALLY).is_out_of_bounds
    assert classify_zone(CourtPoint(4.5, 3.0), Phase.SERVE).is_out_of_bounds


def test_beyond_baseline_is_out():
    assert classify_zone(CourtPoint(0.0, 12.0), Phase.RALLY).is_out_of_bounds
    assert classify_zone(CourtPoint(0.0, -11.9), Phase.RALLY).is_out_of_bounds


def test_serve_beyond_service_line_is_out():
    assert classify_zone(CourtPoint(0.5, 6.5), Phase.SERVE).is_out_of_bounds
    # on the net line there is no receiving box
    assert classify_zone(CourtPoint(0.5, 0.0), Phase.SERVE).is_out_of_bounds


def test_boundary_ties_go_to_band_nearer_centre():
    b = 4.115 / 3.0
    z = classify_zone(CourtPoint(b, 3.0), Phase.SERVE)
    assert z.serve_band is ServeBand.T
    z = classify_zone(CourtPoint(2 * b + 1e-12, 3.0), Phase.SERVE)
    assert z.serve_band is ServeBand.WIDE
    z = classify_zone(CourtPoint(b, 3.0), Phase.RALLY)
    assert z.lateral is LateralBand.CENTER
    z = classify_zone(CourtPoint(0.0, 6.40), Phase.RALLY)
    assert z.depth is DepthBand.SHORT
    z = classify_zone(CourtPoint(0.0, 9.1425), Phase.RALLY)
    assert z.depth is DepthBand.MID
    # lines are in: the sideline and baseline still count
    assert not classify_zone(CourtPoint(4.115, 11.885), Phase.RALLY).is_out_of_bounds
    assert not classify_zone(CourtPoint(4.115, 6.40), Phase.SERVE).is_out_of_bounds


def test_serve_band_thirds_are_equal_width():
    assert 4.115 / 3.0 == pytest.approx(1.3717, abs=1e-4)


def test_deuce_ad_convention():
    # near half: occupant faces +y, their right is +x
    assert classify_zone(CourtPoint(2.0, -3.0), Phase.SERVE).box is ServeBox.DEUCE
    assert classify_zone(CourtPoint(-2.0, -3.0), Phase.SERVE).box is ServeBox.AD
    # far half mirrors
    assert classify_zone(CourtPoint(-2.0, 3.0), Phase.SERVE).box is ServeBox.DEUCE
    assert classify_zone(CourtPoint(2.0, 3.0), Phase.SERVE).box is ServeBox.AD


def test_non_finite_rejected():
    with pytest.raises(ValidationError):
        classify_zone(CourtPoint(math.nan, 0.0), Phase.RALLY)


def test_zone_keys_are_unique():
    keys = [z.key() for z in all_zones(Phase.SERVE) + all_zones(Phase.RALLY)]
    assert len(keys) == len(set(keys))
    assert len(all_zones(Phase.SERVE)) == 6
    assert len(all_zones(Phase.RALLY)) == 18


# ------------------------------------------------------------
# Partition property: analytic areas versus Monte Carlo
# ------------------------------------------------------------


def _serve_area(zone: ZoneId) -> float:
    # every direction band is a (4.115/3) x 6.40 rectangle; two per box side
    assert zone.phase is Phase.SERVE
    return 2.0 * (4.115 / 3.0) * 6.40


def _rally_area(zone: ZoneId) -> float:
    b = 4.115 / 3.0
    widths = {
        LateralBand.LEFT: 4.115 - b,
        LateralBand.CENTER: 2.0 * b,
        LateralBand.RIGHT: 4.115 - b,
    }
    depths = {
        DepthBand.SHORT: 6.40,
        DepthBand.MID: 9.1425 - 6.40,
        DepthBand.DEEP: 11.885 - 9.1425,
    }
    return widths[zone.lateral] * depths[zone.depth]


def _sample_in_bounds(rng, phase):
    if phase is Phase.SERVE:
        x = rng.uniform(-4.115, 4.115)
        y = rng.uniform(-6.40, 6.40)
        while y == 0.0:
            y = rng.uniform(-6.40, 6.40)
    else:
        x = rng.uniform(-4.115, 4.115)
        y = rng.uniform(-11.885, 11.885)
    return CourtPoint(x, y)


@pytest.mark.parametrize("phase", [Phase.SERVE, Phase.RALLY])
def test_partition_and_monte_carlo_areas(phase):
    rng = np.random.default_rng(2024)
    n = 10_000
    counts = {}
    for _ in range(n):
        zone = classify_zone(_sample_in_bounds(rng, phase), phase)
        assert not zone.is_out_of_bounds
        counts[zone] = counts.get(zone, 0) + 1

    if phase is Phase.SERVE:
        total = 2.0 * 2.0 * 4.115 * 6.40
        areas = {z: _serve_area(z) for z in all_zones(phase)}
    else:
        total = 2.0 * 4.115 * 23.77
        areas = {z: _rally_area(z) for z in all_zones(phase)}
    assert sum(areas.values()) == pytest.approx(total)

    for zone, area in areas.items():
        estimated = counts.get(zone, 0) / n
        # tolerance is two percent of the total in-bounds area
        assert abs(estimated - area / total) <= 0.02
