"""Ground-truth kinematics for a swarm of unicycle robots.

Each robot carries two poses that advance together: the world pose, used
only to synthesize sensor data and to score estimates, and the odometry
pose, i.e. the cumulative displacement in the frame fixed at the robot's
own start pose (x-axis along the initial heading).  Integration uses exact
circular arcs so that frame-consistency identities hold to near machine
precision over long runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Angle, Rotation3Z

# Below this yaw rate the arc degenerates to a straight segment.
OMEGA_EPS = 1e-8


@dataclass(frozen=True)
class Pose4:
    """Planar position, altitude and yaw in some named frame."""

    x: float
    y: float
    z: float
    yaw: Angle

    @classmethod
    def zero(cls) -> "Pose4":
        return cls(0.0, 0.0, 0.0, Angle(0.0))

    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def horizontal(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class VelocityCommand:
    """Body-frame command: forward speed, vertical speed, yaw rate."""

    v_h: float
    v_z: float
    w: float

    @classmethod
    def zero(cls) -> "VelocityCommand":
        return cls(0.0, 0.0, 0.0)

    def as_vector(self) -> np.ndarray:
        return np.array([self.v_h, self.v_z, self.w])


@dataclass(frozen=True)
class RobotTruth:
    """World pose plus odometry-frame bookkeeping for one robot."""

    id: int
    world_pose: Pose4
    odom_pose: Pose4

    @classmethod
    def spawn(cls, id: int, x: float, y: float, z: float, yaw: float) -> "RobotTruth":
        """New robot at a world pose; odometry starts exactly at zero."""
        return cls(id, Pose4(x, y, z, Angle(yaw)), Pose4.zero())

    def initial_world_yaw(self) -> float:
        """World yaw of the odometry frame's x-axis."""
        return self.world_pose.yaw.radians - self.odom_pose.yaw.radians


def _arc_delta(v_h: float, w: float, dt: float) -> tuple[float, float]:
    """Planar displacement over dt relative to the heading at the start of the step."""
    if abs(w) > OMEGA_EPS:
        return (v_h / w) * math.sin(w * dt), (v_h / w) * (1.0 - math.cos(w * dt))
    return v_h * dt, 0.0


def _advance(pose: Pose4, dlx: float, dly: float, dz: float, dyaw: float) -> Pose4:
    c = math.cos(pose.yaw.radians)
    s = math.sin(pose.yaw.radians)
    return Pose4(pose.x + c * dlx - s * dly,
                 pose.y + s * dlx + c * dly,
                 pose.z + dz,
                 Angle(pose.yaw.radians + dyaw))


def step(state: RobotTruth, cmd: VelocityCommand, dt: float) -> RobotTruth:
    """Integrate the unicycle kinematics over one step.

    The same heading-relative displacement is applied to the world pose and
    to the odometry pose, each expressed through its own current yaw, which
    keeps the two books exactly consistent up to rounding.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    dlx, dly = _arc_delta(cmd.v_h, cmd.w, dt)
    dz = cmd.v_z * dt
    dyaw = cmd.w * dt
    return RobotTruth(state.id,
                      _advance(state.world_pose, dlx, dly, dz, dyaw),
                      _advance(state.odom_pose, dlx, dly, dz, dyaw))


def frame_rotation(a: RobotTruth, b: RobotTruth) -> Rotation3Z:
    """Rotation taking b's odometry-frame coordinates into a's.

    The rotation angle is psi_b(0) - psi_a(0): the yaw of frame O_b
    measured in frame O_a.
    """
    return Rotation3Z.from_angle(b.initial_world_yaw() - a.initial_world_yaw())


def relative_truth(a: RobotTruth, b: RobotTruth) -> tuple[np.ndarray, Angle]:
    """Ground-truth relative position of (a minus b) in frame O_a, and
    the relative orientation of b's body frame measured in a's.

    Test/metrics path only; estimators never see this.
    """
    psi_a0 = a.initial_world_yaw()
    diff = a.world_pose.position() - b.world_pose.position()
    p = Rotation3Z.from_angle(psi_a0).apply_inverse(diff)
    theta = b.world_pose.yaw.radians - a.world_pose.yaw.radians
    return p, Angle(theta)


def world_distance(a: RobotTruth, b: RobotTruth) -> float:
    return float(np.linalg.norm(a.world_pose.position() - b.world_pose.position()))
