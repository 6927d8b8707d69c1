"""Closed-loop rally synthesis: ground truth, projection, and round-trip scoring.

The simulator builds rallies from the same closed forms the reconstruction
solves (piecewise-ballistic ball between integer-frame keyframes, piecewise
constant-velocity players with direction changes only at event frames), then
projects them through a pinhole ground-plane camera into the clip format the
ingest layer reads. Because every generated motion lies exactly in the model
class the refinement stages preserve, a noiseless projection must reconstruct
to within numerical error; anything larger is a pipeline defect, not a
modelling gap.

Player legs run either at zero velocity or fast enough that every per-frame
step clears the resolution-stabilization deadband at the default calibration,
so stabilization passes clean tracks through unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .court import COURT, CourtModel, DepthBand, LateralBand
from .errors import ConfigError, ValidationError
from .ingest import EventKind, PointOutcome, SpinType
from .kinematics import BallKeyframe, BallTrajectory3D, assemble_ball_trajectory
from .projection import Homography
from .rng import SplitMix64
from .scoring import ScoreState, ScoringRules, advance_score, new_match

# Players are driven at walking-to-jogging speeds. The floor keeps every
# per-frame step above the stabilization deadband (~0.88 m/s at the default
# camera's worst on-court pixel scale); the ceiling keeps motion plausible
# and trackable.
LEG_SPEED_MIN = 1.0
LEG_SPEED_MAX = 1.28
PAD_SPEED_TARGET = 1.8
PAD_FRAMES_MIN = 50
PAD_FRAMES_MAX = 110

HOP_FRAMES = 4            # bounce -> following contact
SERVE_WINDUP_FRAMES = 8   # PointStart -> serve contact
LEAD_IN_FRAMES = 25
TAIL_FRAMES = 30
NET_CORD_PROBABILITY = 0.07

# Relative preference for where rally balls are aimed, by landing zone.
# Baseline play: deep corners dominate, drop shots are rare.
RALLY_ZONE_WEIGHTS: Dict[Tuple[LateralBand, DepthBand], float] = {
    (LateralBand.LEFT, DepthBand.DEEP): 3.0,
    (LateralBand.CENTER, DepthBand.DEEP): 2.1,
    (LateralBand.RIGHT, DepthBand.DEEP): 3.0,
    (LateralBand.LEFT, DepthBand.MID): 1.2,
    (LateralBand.CENTER, DepthBand.MID): 0.7,
    (LateralBand.RIGHT, DepthBand.MID): 1.2,
    (LateralBand.LEFT, DepthBand.SHORT): 0.25,
    (LateralBand.CENTER, DepthBand.SHORT): 0.12,
    (LateralBand.RIGHT, DepthBand.SHORT): 0.25,
}

SERVE_BAND_WEIGHTS = (("T", 0.40), ("Body", 0.22), ("Wide", 0.38))

SHOT_COUNT_WEIGHTS = (
    (2, 0.21), (3, 0.17), (4, 0.14), (5, 0.11), (6, 0.08), (7, 0.07),
    (8, 0.05), (9, 0.045), (10, 0.035), (11, 0.025), (12, 0.02),
    (13, 0.015), (14, 0.01), (15, 0.01),
)

RALLY_OUTCOME_WEIGHTS = (("Winner", 0.42), ("ForcedError", 0.30), ("UnforcedError", 0.28))


# ============================================================
# Camera and configuration
# ============================================================


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera whose ground-plane restriction is an exact homography."""

    position: Tuple[float, float, float] = (0.0, -45.0, 30.0)
    look_at: Tuple[float, float, float] = (0.0, -1.5, 0.0)
    focal_px: float = 3000.0
    principal: Tuple[float, float] = (960.0, 540.0)

    def __post_init__(self):
        if not (math.isfinite(self.focal_px) and self.focal_px > 0):
            raise ConfigError(f"focal_px must be positive, got {self.focal_px!r}")
        if self.position[2] <= 0:
            raise ConfigError("camera must sit above the ground plane")
        fx, fy = self.look_at[0] - self.position[0], self.look_at[1] - self.position[1]
        if math.hypot(fx, fy) < 1e-9:
            raise ConfigError("camera cannot look straight down; the image frame is degenerate")

    def homography(self) -> Homography:
        c = np.asarray(self.position, dtype=float)
        forward = np.asarray(self.look_at, dtype=float) - c
        forward /= np.linalg.norm(forward)
        right = np.cross(forward, (0.0, 0.0, 1.0))
        right /= np.linalg.norm(right)
        down = np.cross(forward, right)
        rot = np.stack([right, down, forward])
        t = -rot @ c
        k = np.array([
            [self.focal_px, 0.0, self.principal[0]],
            [0.0, self.focal_px, self.principal[1]],
            [0.0, 0.0, 1.0],
        ])
        return Homography(k @ np.column_stack([rot[:, 0], rot[:, 1], t]))

    def to_dict(self) -> dict:
        return {
            "position": list(self.position),
            "look_at": list(self.look_at),
            "focal_px": self.focal_px,
            "principal": list(self.principal),
        }

    @staticmethod
    def from_dict(obj: dict) -> "CameraModel":
        if not isinstance(obj, dict):
            raise ConfigError("camera must be an object")
        kwargs = {}
        for key, n in (("position", 3), ("look_at", 3), ("principal", 2)):
            if key in obj:
                v = obj[key]
                if not (isinstance(v, (list, tuple)) and len(v) == n
                        and all(isinstance(c, (int, float)) and math.isfinite(c) for c in v)):
                    raise ConfigError(f"camera.{key} must be a list of {n} finite numbers")
                kwargs[key] = tuple(float(c) for c in v)
        if "focal_px" in obj:
            kwargs["focal_px"] = float(obj["focal_px"])
        return CameraModel(**kwargs)


DEFAULT_CAMERA = CameraModel()


@dataclass(frozen=True)
class SimConfig:
    """Everything that determines a simulated clip, bit for bit."""

    seed: int
    points: int = 3
    pixel_noise_sigma_px: float = 0.0
    dropout_rate: float = 0.0
    quantize_pixels: bool = False
    fps: float = 25.0
    width: int = 1920
    height: int = 1080
    camera: CameraModel = DEFAULT_CAMERA

    def __post_init__(self):
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if not isinstance(self.points, int) or self.points < 1:
            raise ConfigError("points must be >= 1")
        if not (math.isfinite(self.pixel_noise_sigma_px) and self.pixel_noise_sigma_px >= 0):
            raise ConfigError("pixel_noise_sigma_px must be >= 0")
        if not (0.0 <= self.dropout_rate < 1.0):
            raise ConfigError("dropout_rate must lie in [0, 1)")
        if not (math.isfinite(self.fps) and self.fps > 0):
            raise ConfigError("fps must be positive")
        if self.width <= 0 or self.height <= 0:
            raise ConfigError("image dimensions must be positive")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "points": self.points,
            "pixel_noise_sigma_px": self.pixel_noise_sigma_px,
            "dropout_rate": self.dropout_rate,
            "quantize_pixels": self.quantize_pixels,
            "fps": self.fps,
            "width": self.width,
            "height": self.height,
            "camera": self.camera.to_dict(),
        }

    @staticmethod
    def from_dict(obj: dict) -> "SimConfig":
        if not isinstance(obj, dict) or "seed" not in obj:
            raise ConfigError("simulator config needs at least a seed")
        kwargs: dict = {"seed": obj["seed"]}
        for key in ("points", "width", "height"):
            if key in obj:
                kwargs[key] = obj[key]
        for key in ("pixel_noise_sigma_px", "dropout_rate", "fps"):
            if key in obj:
                kwargs[key] = float(obj[key])
        if "quantize_pixels" in obj:
            kwargs["quantize_pixels"] = bool(obj["quantize_pixels"])
        if "camera" in obj:
            kwargs["camera"] = CameraModel.from_dict(obj["camera"])
        return SimConfig(**kwargs)


# ============================================================
# Ground truth containers
# ============================================================


@dataclass(frozen=True)
class TruthKeyframe:
    """One exact ball keyframe at an integer frame index."""

    frame: int
    kind: EventKind
    x: float
    y: float
    z: float
    player_id: Optional[str] = None
    spin: Optional[SpinType] = None

    def to_dict(self) -> dict:
        return {
            "frame": self.frame,
            "kind": self.kind.value,
            "x": self.x, "y": self.y, "z": self.z,
            "player_id": self.player_id,
            "spin": self.spin.value if self.spin else None,
        }

    @staticmethod
    def from_dict(obj: dict) -> "TruthKeyframe":
        return TruthKeyframe(
            frame=int(obj["frame"]),
            kind=EventKind(obj["kind"]),
            x=float(obj["x"]), y=float(obj["y"]), z=float(obj["z"]),
            player_id=obj.get("player_id"),
            spin=SpinType(obj["spin"]) if obj.get("spin") else None,
        )


@dataclass(frozen=True)
class SimulatedPoint:
    index: int
    start_frame: int
    end_frame: int
    keyframes: Tuple[TruthKeyframe, ...]
    outcome: PointOutcome
    score_before: ScoreState

    @property
    def shot_count(self) -> int:
        return sum(1 for k in self.keyframes if k.kind is EventKind.CONTACT)


@dataclass(frozen=True)
class GroundTruthRally:
    """Exact description of a simulated clip, independent of any projection."""

    fps: float
    n_frames: int
    points: Tuple[SimulatedPoint, ...]
    knots: Dict[str, Tuple[Tuple[int, float, float], ...]]
    final_score: ScoreState
    camera: CameraModel = DEFAULT_CAMERA
    seed: int = 0

    # ---- player tracks ----

    def player_ids(self) -> List[str]:
        return sorted(self.knots)

    def player_track(self, player_id: str) -> np.ndarray:
        """(n_frames, 2) planar positions, linearly interpolated between knots."""
        kn = self.knots[player_id]
        frames = np.array([k[0] for k in kn], dtype=float)
        xs = np.array([k[1] for k in kn])
        ys = np.array([k[2] for k in kn])
        grid = np.arange(self.n_frames, dtype=float)
        return np.column_stack([np.interp(grid, frames, xs), np.interp(grid, frames, ys)])

    def player_position(self, player_id: str, t: float) -> Tuple[float, float]:
        kn = self.knots[player_id]
        frames = [k[0] for k in kn]
        f = t * self.fps
        x = float(np.interp(f, frames, [k[1] for k in kn]))
        y = float(np.interp(f, frames, [k[2] for k in kn]))
        return (x, y)

    # ---- ball ----

    def trajectory(self, point: SimulatedPoint) -> BallTrajectory3D:
        kfs = [
            BallKeyframe(
                t=k.frame / self.fps,
                position=(k.x, k.y),
                kind=k.kind,
                height=k.z if k.kind is EventKind.CONTACT else None,
                spin=k.spin,
            )
            for k in point.keyframes
        ]
        return assemble_ball_trajectory(kfs)

    def ball_planar_track(self) -> np.ndarray:
        """(n_frames, 2) planar ball positions; held at the last keyframe between points."""
        out = np.empty((self.n_frames, 2))
        first = self.points[0].keyframes[0]
        held = (first.x, first.y)
        cursor = 0
        for point in self.points:
            traj = self.trajectory(point)
            f0 = point.keyframes[0].frame
            f1 = point.keyframes[-1].frame
            out[cursor:f0] = held
            for f in range(f0, f1 + 1):
                p = traj.evaluate(f / self.fps)
                out[f] = (p.x, p.y)
            last = point.keyframes[-1]
            held = (last.x, last.y)
            cursor = f1 + 1
        out[cursor:] = held
        return out

    # ---- serialization ----

    def to_dict(self) -> dict:
        return {
            "fps": self.fps,
            "n_frames": self.n_frames,
            "seed": self.seed,
            "camera": self.camera.to_dict(),
            "players": {
                pid: [[f, x, y] for f, x, y in kn]
                for pid, kn in sorted(self.knots.items())
            },
            "points": [
                {
                    "index": p.index,
                    "start_frame": p.start_frame,
                    "end_frame": p.end_frame,
                    "score_before": p.score_before.to_dict(),
                    "outcome": p.outcome.to_dict(),
                    "keyframes": [k.to_dict() for k in p.keyframes],
                }
                for p in self.points
            ],
            "final_score": self.final_score.to_dict(),
        }

    @staticmethod
    def from_dict(obj: dict) -> "GroundTruthRally":
        try:
            points = tuple(
                SimulatedPoint(
                    index=int(p["index"]),
                    start_frame=int(p["start_frame"]),
                    end_frame=int(p["end_frame"]),
                    keyframes=tuple(TruthKeyframe.from_dict(k) for k in p["keyframes"]),
                    outcome=PointOutcome.from_dict(p["outcome"]),
                    score_before=ScoreState.from_dict(p["score_before"]),
                )
                for p in obj["points"]
            )
            return GroundTruthRally(
                fps=float(obj["fps"]),
                n_frames=int(obj["n_frames"]),
                seed=int(obj.get("seed", 0)),
                camera=CameraModel.from_dict(obj["camera"]) if "camera" in obj else DEFAULT_CAMERA,
                points=points,
                knots={
                    pid: tuple((int(f), float(x), float(y)) for f, x, y in kn)
                    for pid, kn in obj["players"].items()
                },
                final_score=ScoreState.from_dict(obj["final_score"]),
            )
        except (KeyError, TypeError, IndexError) as e:
            raise ValidationError(f"malformed ground-truth document: {e}") from None


# ============================================================
# Rally synthesis
# ============================================================


def _zone_box(lateral: LateralBand, depth: DepthBand,
              court: CourtModel) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """(x_range, y_range) of a rally zone on the far half, shrunk off the lines."""
    w = court.serve_band_width
    sx = court.singles_half_width
    pad = 0.12
    ranges = {
        LateralBand.LEFT: (-sx + pad, -w),
        LateralBand.CENTER: (-w + pad, w - pad),
        LateralBand.RIGHT: (w, sx - pad),
    }
    depths = {
        DepthBand.SHORT: (0.4, court.service_line_y - pad),
        DepthBand.MID: (court.service_line_y + pad, court.mid_depth_y - pad),
        DepthBand.DEEP: (court.mid_depth_y + pad, court.baseline_y - pad),
    }
    return ranges[lateral], depths[depth]


def _sample_rally_target(rng: SplitMix64, side_sign: float,
                         court: CourtModel) -> np.ndarray:
    """A landing position on the given half, biased by the zone-preference table."""
    zones = list(RALLY_ZONE_WEIGHTS)
    zone = rng.choice_weighted(zones, [RALLY_ZONE_WEIGHTS[z] for z in zones])
    (x0, x1), (y0, y1) = _zone_box(zone[0], zone[1], court)
    return np.array([rng.uniform(x0, x1), side_sign * rng.uniform(y0, y1)])


def _sample_serve_bounce(rng: SplitMix64, receiver_sign: float, deuce: bool,
                         court: CourtModel, fault: bool) -> np.ndarray:
    """A serve landing spot: in the correct box, or long when the serve faults."""
    w = court.serve_band_width
    band = rng.choice_weighted([b for b, _ in SERVE_BAND_WEIGHTS],
                               [wt for _, wt in SERVE_BAND_WEIGHTS])
    mag = {
        "T": rng.uniform(0.25, w - 0.1),
        "Body": rng.uniform(w + 0.1, 2 * w - 0.1),
        "Wide": rng.uniform(2 * w + 0.1, court.singles_half_width - 0.2),
    }[band]
    # cross-court: the deuce box on the far half has x <= 0 (and mirrored on
    # the near half), matching the zone classification convention
    box_sign = (-1.0 if deuce else 1.0) * (1.0 if receiver_sign > 0 else -1.0)
    y = rng.uniform(7.0, 7.9) if fault else rng.uniform(3.4, 6.2)
    return np.array([box_sign * mag, receiver_sign * y])


class _PlayerMotion:
    """Knot bookkeeping for one player: corners only at event frames."""

    def __init__(self, start_pos: np.ndarray):
        self.knots: List[Tuple[int, float, float]] = [(0, float(start_pos[0]), float(start_pos[1]))]

    @property
    def frame(self) -> int:
        return self.knots[-1][0]

    @property
    def pos(self) -> np.ndarray:
        return np.array(self.knots[-1][1:])

    def hold(self, frame: int):
        """Stand still through the given frame."""
        if frame < self.frame:
            raise ValidationError("player knots must advance in time")
        if frame > self.frame:
            _, x, y = self.knots[-1]
            self.knots.append((frame, x, y))

    def leg_to(self, frame: int, aim: np.ndarray, event_frames: Sequence[int],
               fps: float) -> np.ndarray:
        """Move toward ``aim``, arriving at ``frame``; returns the reached position.

        One constant-velocity run whose speed stays inside
        [LEG_SPEED_MIN, LEG_SPEED_MAX]. When the full interval would be too
        slow the start is delayed to a later event frame, and when no event
        frame admits a legal speed the player stands instead.
        """
        f0 = self.frame
        p0 = self.pos
        if frame <= f0:
            raise ValidationError("player legs must advance in time")
        disp = np.asarray(aim, dtype=float) - p0
        dist = float(np.hypot(*disp))
        if dist < 0.18:
            self.hold(frame)
            return self.pos
        t_full = (frame - f0) / fps
        v_full = dist / t_full
        if v_full >= LEG_SPEED_MIN:
            reach = min(v_full, LEG_SPEED_MAX) * t_full
            end = p0 + disp / dist * reach
            self.knots.append((frame, float(end[0]), float(end[1])))
            return end
        for split in sorted((f for f in event_frames if f0 < f < frame), reverse=True):
            v = dist / ((frame - split) / fps)
            if LEG_SPEED_MIN <= v <= LEG_SPEED_MAX:
                self.hold(split)
                self.knots.append((frame, float(aim[0]), float(aim[1])))
                return self.pos
        self.hold(frame)
        return self.pos


def _pad_walk(motions: Dict[str, _PlayerMotion], targets: Dict[str, np.ndarray],
              start_frame: int, fps: float) -> int:
    """Walk both players to their stands over one shared pad; returns its end frame.

    Pads contain no events, so each walk must be a single constant-velocity
    run. Too-short walks are extended sideways until the speed clears the
    stabilization floor.
    """
    dists = {pid: float(np.hypot(*(targets[pid] - motions[pid].pos))) for pid in targets}
    frames = int(min(PAD_FRAMES_MAX,
                     max(PAD_FRAMES_MIN,
                         math.ceil(fps * max(dists.values()) / PAD_SPEED_TARGET))))
    t_pad = frames / fps
    end = start_frame + frames
    for pid in sorted(targets):
        motion = motions[pid]
        target = targets[pid].copy()
        if dists[pid] < LEG_SPEED_MIN * t_pad:
            # lengthen the walk laterally so the speed clears the floor
            need = 1.15 * t_pad
            dy = float(target[1] - motion.pos[1])
            dx = math.sqrt(max(need * need - dy * dy, 0.0))
            base = float(motion.pos[0])
            for sign in ((-1.0, 1.0) if base > 0 else (1.0, -1.0)):
                if abs(base + sign * dx) <= 5.3:
                    target[0] = base + sign * dx
                    break
            else:
                target[0] = math.copysign(5.3, base)
        motion.knots.append((end, float(target[0]), float(target[1])))
    return end


def _maybe_net_cord(rng: SplitMix64, contact: TruthKeyframe, f_bounce: int,
                    bounce: np.ndarray) -> Optional[TruthKeyframe]:
    """A net-cord keyframe on the flight's net crossing, kept on the planar line.

    The clipped ball stays on the contact-to-bounce chord (so the planar track
    keeps a single constant velocity across the cord) while the solved height
    is forced through the cord; only flights whose crossing rounds to a frame
    at least two frames clear of both endpoints qualify.
    """
    if rng.uniform() >= NET_CORD_PROBABILITY:
        return None
    y0, y1 = contact.y, float(bounce[1])
    if y0 == y1 or (y0 > 0) == (y1 > 0):
        return None
    frac = (0.0 - y0) / (y1 - y0)
    f_net = int(round(contact.frame + frac * (f_bounce - contact.frame)))
    if not (contact.frame + 2 <= f_net <= f_bounce - 2):
        return None
    lerp = (f_net - contact.frame) / (f_bounce - contact.frame)
    x = contact.x + lerp * (float(bounce[0]) - contact.x)
    y = y0 + lerp * (y1 - y0)
    return TruthKeyframe(frame=f_net, kind=EventKind.NET_CORD,
                         x=float(x), y=float(y), z=COURT.net_cord_height)


def simulate_rally(config: SimConfig, court: CourtModel = COURT,
                   rules: Optional[ScoringRules] = None) -> GroundTruthRally:
    """Generate an exact multi-point rally under the given configuration.

    All randomness comes from per-point substreams of the seed, so inserting
    extra draws into one point never shifts any other point's geometry. The
    simulation stops early only if the match completes.
    """
    fps = config.fps
    master = SplitMix64(config.seed)
    state = new_match(rules=rules) if rules is not None else new_match()
    p_near, p_far = state.players
    side_signs = {p_near: -1.0, p_far: 1.0}

    motions: Dict[str, _PlayerMotion] = {}
    points: List[SimulatedPoint] = []
    cursor: Optional[int] = None  # frame of the previous PointEnd

    for index in range(config.points):
        if state.winner is not None:
            break
        rng = master.substream(index)
        server = state.server
        receiver = state.opponent(server)
        s_sign = side_signs[server]
        r_sign = side_signs[receiver]

        in_game = sum(state.tiebreak_points) if state.in_tiebreak else sum(state.points)
        deuce = in_game % 2 == 0

        # outcome and rally length are drawn up front so the point's geometry
        # can be built toward them
        roll = rng.uniform()
        if roll < 0.045:
            how, shots = "Ace", 1
        elif roll < 0.085:
            how, shots = "DoubleFault", 1
        else:
            shots = rng.choice_weighted([s for s, _ in SHOT_COUNT_WEIGHTS],
                                        [w for _, w in SHOT_COUNT_WEIGHTS])
            how = rng.choice_weighted([o for o, _ in RALLY_OUTCOME_WEIGHTS],
                                      [w for _, w in RALLY_OUTCOME_WEIGHTS])
        last_hitter = server if shots % 2 == 1 else receiver
        if how in ("Winner", "Ace"):
            winner = last_hitter
        elif how == "DoubleFault":
            winner = receiver
        else:
            winner = state.opponent(last_hitter)

        serve_bounce = _sample_serve_bounce(rng, r_sign, deuce, court,
                                            fault=(how == "DoubleFault"))

        stand_x_sign = s_sign * (-1.0 if deuce else 1.0)
        serve_stand = np.array([stand_x_sign * rng.uniform(0.4, 1.8),
                                s_sign * rng.uniform(12.1, 12.6)])
        return_stand = np.array([
            float(np.clip(serve_bounce[0] + rng.uniform(-0.5, 0.5), -4.6, 4.6)),
            r_sign * rng.uniform(11.2, 12.2),
        ])

        if cursor is None:
            # first point: both players start the clip already on their marks
            motions[server] = _PlayerMotion(serve_stand)
            motions[receiver] = _PlayerMotion(return_stand)
            f_start = LEAD_IN_FRAMES
            for m in motions.values():
                m.hold(f_start)
        else:
            f_start = _pad_walk(motions,
                                {server: serve_stand, receiver: return_stand},
                                cursor, fps)

        event_frames: List[int] = [f_start]
        keyframes: List[TruthKeyframe] = []
        prepared: Optional[Tuple[int, np.ndarray]] = None  # pre-run leg result

        hitter = server
        f_contact = f_start + SERVE_WINDUP_FRAMES
        for shot in range(1, shots + 1):
            # ---- contact ----
            if shot <= 2:
                # serve and return are struck from the prepared stands
                motions[hitter].hold(f_contact)
                contact = motions[hitter].pos
            else:
                if prepared is None or prepared[0] != f_contact:
                    raise ValidationError("rally builder lost a prepared contact")
                contact = prepared[1]
            other = receiver if hitter == server else server
            motions[other].hold(f_contact)
            event_frames.append(f_contact)
            contact_kf = TruthKeyframe(
                frame=f_contact, kind=EventKind.CONTACT,
                x=float(contact[0]), y=float(contact[1]),
                z=rng.uniform(2.55, 3.0) if shot == 1 else rng.uniform(0.75, 1.45),
                player_id=hitter,
                spin=rng.choice_weighted([SpinType.TOPSPIN, SpinType.BACKSPIN],
                                         [0.75 if shot == 1 else 0.7,
                                          0.25 if shot == 1 else 0.3]),
            )
            keyframes.append(contact_kf)

            # ---- flight to the next landing ----
            flight = rng.randint(17, 21) if shot == 1 else rng.randint(22, 30)
            f_bounce = f_contact + flight
            event_frames.append(f_bounce)
            next_hitter = receiver if hitter == server else server

            if shot == 1:
                bounce = serve_bounce
            elif shot < shots:
                # land one short hop before wherever the next hitter's legs
                # put them at their contact frame
                f_next = f_bounce + HOP_FRAMES
                target = _sample_rally_target(rng, side_signs[next_hitter], court)
                home = np.array([0.0, side_signs[next_hitter] * 10.6])
                aim = 0.62 * target + 0.38 * home
                aim[0] += rng.uniform(-0.3, 0.3)
                next_contact = motions[next_hitter].leg_to(f_next, aim, event_frames, fps)
                direction = next_contact - contact
                norm = float(np.hypot(*direction))
                if norm > 1e-9:
                    direction = direction / norm
                else:
                    direction = np.array([0.0, side_signs[next_hitter]])
                bounce = next_contact - direction * rng.uniform(0.55, 1.05)
                bounce[0] = float(np.clip(bounce[0], -4.05, 4.05))
                sgn = side_signs[next_hitter]
                bounce[1] = sgn * float(np.clip(bounce[1] * sgn, 0.35, court.baseline_y - 0.1))
                prepared = (f_next, next_contact)
            else:
                # terminal landing: the purest use of the preference table
                bounce = _sample_rally_target(rng, side_signs[next_hitter], court)

            if shot > 2:
                # serve and return flights never clip the cord: their
                # preceding landing sits far from the striker, which would
                # push the cord outside the longitudinal plausibility gate
                cord = _maybe_net_cord(rng, contact_kf, f_bounce, bounce)
                if cord is not None:
                    event_frames.append(cord.frame)
                    keyframes.append(cord)
            keyframes.append(TruthKeyframe(
                frame=f_bounce, kind=EventKind.BOUNCE,
                x=float(bounce[0]), y=float(bounce[1]), z=0.0,
            ))

            hitter = next_hitter
            if shot == 1 and shots >= 2:
                # the returner holds their stand through the return contact
                f_contact = f_bounce + HOP_FRAMES
            elif shot < shots:
                f_contact = f_bounce + HOP_FRAMES

        f_end = f_bounce + rng.randint(10, 16)
        for m in motions.values():
            m.hold(f_end)
        event_frames.append(f_end)

        outcome = PointOutcome(winner=winner, how=how)
        points.append(SimulatedPoint(
            index=index, start_frame=f_start, end_frame=f_end,
            keyframes=tuple(keyframes), outcome=outcome, score_before=state,
        ))
        state = advance_score(state, winner)
        cursor = f_end

    n_frames = points[-1].end_frame + TAIL_FRAMES + 1
    for m in motions.values():
        m.hold(n_frames - 1)

    return GroundTruthRally(
        fps=fps,
        n_frames=n_frames,
        points=tuple(points),
        knots={pid: tuple(m.knots) for pid, m in motions.items()},
        final_score=state,
        camera=config.camera,
        seed=config.seed & ((1 << 64) - 1),
    )


# ============================================================
# Projection into the clip format
# ============================================================


def _quantize(uv: Tuple[float, float]) -> List[int]:
    return [int(math.floor(uv[0] + 0.5)), int(math.floor(uv[1] + 0.5))]


# Pixel offsets of a plausible hitting arm, relative to the foot anchor.
_JOINT_OFFSETS_PX = {
    "shoulder": (-6.0, -38.0),
    "elbow": (8.0, -28.0),
    "wrist": (22.0, -21.0),
}


def project_clip(rally: GroundTruthRally, config: SimConfig) -> Tuple[dict, dict]:
    """Render ground truth into an ingest-format clip plus its truth document.

    Detector noise applies to the tracked samples (ball, feet, joints); events,
    keyframe annotations, and calibration keypoints are emitted exactly, the
    way a human-verified annotation pass would be.
    """
    from .court import reference_keypoints  # local import keeps module load light

    h = config.camera.homography()
    sigma = config.pixel_noise_sigma_px
    noise = SplitMix64(config.seed).substream(1_000_003)
    drops = SplitMix64(config.seed).substream(1_000_033)

    def project(x: float, y: float, jitter: bool) -> List[float]:
        u, v = h.world_to_image(x, y)
        if jitter and sigma > 0:
            u += noise.normal(0.0, sigma)
            v += noise.normal(0.0, sigma)
        return _quantize((u, v)) if config.quantize_pixels else [u, v]

    ball_planar = rally.ball_planar_track()
    player_tracks = {pid: rally.player_track(pid) for pid in rally.player_ids()}
    hitter_at: Dict[int, str] = {
        k.frame: k.player_id
        for p in rally.points for k in p.keyframes
        if k.kind is EventKind.CONTACT and k.player_id
    }

    frames = []
    for f in range(rally.n_frames):
        ball_px: Optional[List[float]] = project(*ball_planar[f], jitter=True)
        if config.dropout_rate > 0 and drops.uniform() < config.dropout_rate:
            ball_px = None
        players = []
        for pid in rally.player_ids():
            entry: dict = {"id": pid, "foot_px": project(*player_tracks[pid][f], jitter=True)}
            if hitter_at.get(f) == pid:
                u0, v0 = h.world_to_image(*player_tracks[pid][f])
                joints = {}
                for name, (du, dv) in _JOINT_OFFSETS_PX.items():
                    ju, jv = u0 + du, v0 + dv
                    if sigma > 0:
                        ju += noise.normal(0.0, sigma)
                        jv += noise.normal(0.0, sigma)
                    joints[name] = _quantize((ju, jv)) if config.quantize_pixels else [ju, jv]
                entry["joints_px"] = joints
            players.append(entry)
        frames.append({"index": f, "ball_px": ball_px, "players": players})

    events: List[dict] = []
    annotations: List[dict] = []
    for p in rally.points:
        events.append({"frame": p.start_frame, "kind": EventKind.POINT_START.value})
        for k in p.keyframes:
            e: dict = {"frame": k.frame, "kind": k.kind.value}
            if k.kind is EventKind.CONTACT:
                e["player_id"] = k.player_id
                annotations.append({
                    "frame": k.frame,
                    "height_m": k.z,
                    "spin": k.spin.value if k.spin else None,
                })
            events.append(e)
        events.append({"frame": p.end_frame, "kind": EventKind.POINT_END.value})

    clip_doc = {
        "header": {
            "clip_id": f"sim-{rally.seed:016x}-{len(rally.points)}pt",
            "fps": rally.fps,
            "width": config.width,
            "height": config.height,
            "court_keypoints_px": [
                [*h.world_to_image(p.x, p.y)] for p in reference_keypoints()
            ],
            "score_before": rally.points[0].score_before.to_dict(),
            "point_outcomes": [p.outcome.to_dict() for p in rally.points],
        },
        "frames": frames,
        "events": events,
        "keyframe_annotations": annotations,
    }
    return clip_doc, rally.to_dict()


def simulate_clip(config: SimConfig, court: CourtModel = COURT,
                  rules: Optional[ScoringRules] = None) -> Tuple[dict, dict]:
    """Convenience: simulate and project in one call."""
    return project_clip(simulate_rally(config, court, rules), config)


# ============================================================
# Round-trip comparison
# ============================================================


def round_trip_report(truth: GroundTruthRally, scene,
                      sample_rate_hz: float = 50.0) -> dict:
    """Compare a reconstruction against the ground truth it was rendered from.

    ``scene`` needs ``span`` (t0, t1), ``entity_position(name, t)`` returning a
    CourtPoint, and ``point_spans()`` in seconds. Players are compared across
    the whole clip; the ball is compared inside each point's keyframe span,
    where its trajectory is defined. Mismatched spans are an error, not a
    large RMSE.
    """
    t0, t1 = scene.span
    truth_t1 = (truth.n_frames - 1) / truth.fps
    if abs(t0 - 0.0) > 1e-9 or abs(t1 - truth_t1) > 1e-9:
        raise ValidationError(
            f"scene span ({t0}, {t1}) does not match truth span (0.0, {truth_t1})")

    scene_spans = scene.point_spans()
    if len(scene_spans) != len(truth.points):
        raise ValidationError(
            f"scene has {len(scene_spans)} points, truth has {len(truth.points)}")

    step = 1.0 / sample_rate_hz

    ball_sq: List[float] = []
    ball_axis_sq = {"x": [], "y": [], "z": []}
    ball_max = 0.0
    for point, (s0, s1) in zip(truth.points, scene_spans):
        k0 = point.keyframes[0].frame / truth.fps
        k1 = point.keyframes[-1].frame / truth.fps
        if not (s0 - 1e-9 <= k0 and k1 <= s1 + 1e-9):
            raise ValidationError(
                f"point {point.index} keyframe span [{k0}, {k1}] escapes scene span [{s0}, {s1}]")
        traj = truth.trajectory(point)
        n = int(math.floor((k1 - k0) * sample_rate_hz + 1e-9)) + 1
        for i in range(n):
            t = min(k0 + i * step, k1)
            want = traj.evaluate(t)
            got = scene.entity_position("ball", t)
            dx, dy, dz = got.x - want.x, got.y - want.y, got.z - want.z
            err = math.sqrt(dx * dx + dy * dy + dz * dz)
            ball_max = max(ball_max, err)
            ball_sq.append(err * err)
            ball_axis_sq["x"].append(dx * dx)
            ball_axis_sq["y"].append(dy * dy)
            ball_axis_sq["z"].append(dz * dz)

    player_sq: List[float] = []
    player_axis_sq = {"x": [], "y": []}
    player_max = 0.0
    n = int(math.floor((t1 - t0) * sample_rate_hz + 1e-9)) + 1
    for pid in truth.player_ids():
        for i in range(n):
            t = min(t0 + i * step, t1)
            wx, wy = truth.player_position(pid, t)
            got = scene.entity_position(pid, t)
            dx, dy = got.x - wx, got.y - wy
            err = math.hypot(dx, dy)
            player_max = max(player_max, err)
            player_sq.append(err * err)
            player_axis_sq["x"].append(dx * dx)
            player_axis_sq["y"].append(dy * dy)

    def rms(values: List[float]) -> float:
        return math.sqrt(sum(values) / len(values)) if values else 0.0

    return {
        "ball_rmse_m": rms(ball_sq),
        "ball_max_m": ball_max,
        "player_rmse_m": rms(player_sq),
        "player_max_m": player_max,
        "per_axis": {
            "ball": {axis: rms(v) for axis, v in ball_axis_sq.items()},
            "players": {axis: rms(v) for axis, v in player_axis_sq.items()},
        },
        "ball_samples": len(ball_sq),
        "player_samples": len(player_sq),
    }
