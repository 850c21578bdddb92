"""Concurrent-learning parameter estimator and relative pose reconstruction.

Each ordered robot pair owns a 7-vector estimate updated from the current
innovation plus innovations replayed over the recorded history:

    theta <- theta - eta * [ S theta - b + phi_k (phi_k' theta - y_k) ]

with S, b maintained by the pair's DataRecord.  The learning rate is
eta = lambda_min(S) / (lambda_max(U_k) + lambda_max(S)^2) as stated by the
update law; a second variant with denominator (lambda_max(U_k) +
lambda_max(S))^2, the one the convergence proof actually uses, is
selectable.  lambda_max(U_k) = phi_k'phi_k = 1 for unit-norm regressors.
While the record is rank deficient lambda_min is 0 and the update is a
no-op, so the estimate simply waits for sufficient excitation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .geometry import Angle, Rotation3Z, norm_project
from .regression import THETA_DIM, DataRecord, RegressorSample
from .sensing import OdomBroadcast
from .world import Pose4

RATE_VARIANTS = ("stated", "proof")


class StaleBroadcast(RuntimeError):
    """Neighbor odometry is older than the allowed horizon."""


@dataclass(frozen=True)
class ThetaEstimate:
    """Current parameter estimate bundled with its pair's data record."""

    theta_hat: np.ndarray
    data: DataRecord
    rate_variant: str = "stated"

    @classmethod
    def fresh(cls, data: DataRecord, rate_variant: str = "stated") -> "ThetaEstimate":
        if rate_variant not in RATE_VARIANTS:
            raise ValueError(f"unknown rate variant {rate_variant!r}")
        return cls(np.zeros(THETA_DIM), data, rate_variant)


@dataclass(frozen=True)
class RelativePoseEstimate:
    """Initial relative position and frame rotation recovered from theta."""

    p0_hat: np.ndarray
    R0_hat: Rotation3Z


def learning_rate(data: DataRecord, lam_u: float = 1.0, variant: str = "stated") -> float:
    if variant == "stated":
        denom = lam_u + data.lambda_max ** 2
    elif variant == "proof":
        denom = (lam_u + data.lambda_max) ** 2
    else:
        raise ValueError(f"unknown rate variant {variant!r}")
    if denom <= 0.0:
        return 0.0
    return data.lambda_min / denom


def cl_update(est: ThetaEstimate, current: RegressorSample) -> ThetaEstimate:
    """One concurrent-learning step against the record plus the current sample."""
    data = est.data
    if len(data) == 0:
        raise ValueError("cl_update requires a non-empty record")
    lam_u = float(current.phi @ current.phi)
    eta = learning_rate(data, lam_u, est.rate_variant)
    if eta == 0.0:
        return est
    # Replay innovations over the raw recorded samples; with all residuals
    # zero the step is exactly zero, not just zero up to rounding.
    resid = data.phis @ est.theta_hat - data.ys
    grad = data.phis.T @ resid
    grad += current.phi * (current.phi @ est.theta_hat - current.y)
    return replace(est, theta_hat=est.theta_hat - eta * grad)


def innovation(est: ThetaEstimate, sample: RegressorSample) -> float:
    """Predicted-minus-measured residual theta' phi - y."""
    return float(est.theta_hat @ sample.phi - sample.y)


def reconstruct_pose(est: ThetaEstimate) -> RelativePoseEstimate:
    """Initial relative pose from the estimate: position block plus the
    normalized trig pair.  Raises DegenerateRotation while the trig pair is
    uninformative; the caller then keeps its previous pose.
    """
    rot = norm_project(est.theta_hat[5], est.theta_hat[6])
    return RelativePoseEstimate(est.theta_hat[:3].copy(), Rotation3Z(rot))


def realtime_relative_pose(est: ThetaEstimate, own_odom: Pose4,
                           neighbor: OdomBroadcast, t_k: int,
                           horizon: int = 0) -> tuple[np.ndarray, Angle]:
    """Real-time relative position (in own odometry frame) and body-frame
    relative yaw for the pair, composed from the initial-pose estimate and
    both cumulative odometries.
    """
    if t_k - neighbor.t_k > horizon:
        raise StaleBroadcast(
            f"neighbor {neighbor.sender} tick {neighbor.t_k} older than {t_k} - {horizon}")
    pose = reconstruct_pose(est)
    p = pose.p0_hat + own_odom.position() - pose.R0_hat.apply(neighbor.cum_pos)
    theta = (pose.R0_hat.yaw()
             + neighbor.cum_yaw.radians - own_odom.yaw.radians)
    return p, Angle(theta)
