"""Position-force coordinating controller: continuous, latched, and z-domain forms.

The law on either side is

    tau = -K_v*(dq_own - dq_remote) - (K_d + P_eps)*dq_own - K_p*(q_own - q_remote)

with the remote signals taken from the delayed sample latch.  Both robots run
identical gains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .lti import RationalTF

__all__ = [
    "ControllerGains",
    "LatchedState",
    "NotYetInitialized",
    "control_continuous",
    "control_sampled",
    "controller_z_tf",
    "passivity_gain_rule",
]


class NotYetInitialized(RuntimeError):
    """Sampled control requested before the latch holds a remote sample."""


@dataclass(frozen=True)
class ControllerGains:
    """Coordination gains shared by master and slave.

    kp may be zero (uncontrolled degenerations are legitimate test inputs);
    the stability results assume kp > 0.  ``nu`` is the optional passivity
    margin used by :func:`passivity_gain_rule`.
    """

    kp: float  # N*m/rad
    kv: float  # N*m*s/rad, coordination damping
    kd: float  # N*m*s/rad, local dissipation
    p_eps: float  # N*m*s/rad, excess-passivity dissipation
    nu: float | None = None

    def __post_init__(self) -> None:
        for name in ("kp", "kv", "kd", "p_eps"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and nonnegative")
        if self.nu is not None and not self.nu > 0.0:
            raise ValueError("nu must be positive when given")


@dataclass(frozen=True)
class LatchedState:
    """Most recent own and (delayed) remote samples held by one side."""

    own_pos: float | None = None
    own_vel: float | None = None
    remote_pos: float | None = None
    remote_vel: float | None = None
    sample_time: float | None = None


def control_continuous(
    g: ControllerGains,
    own: tuple[float, float],
    remote_delayed: tuple[float, float],
) -> float:
    """Controller torque from instantaneous own and delayed remote signals."""
    q, dq = own
    qr, dqr = remote_delayed
    return -g.kv * (dq - dqr) - (g.kd + g.p_eps) * dq - g.kp * (q - qr)


def control_sampled(g: ControllerGains, latch: LatchedState) -> float:
    """Controller torque from latched samples; identical arithmetic to the
    continuous law on the latched values."""
    if (
        latch.own_pos is None
        or latch.own_vel is None
        or latch.remote_pos is None
        or latch.remote_vel is None
    ):
        raise NotYetInitialized("latch holds no complete sample pair yet")
    return control_continuous(
        g, (latch.own_pos, latch.own_vel), (latch.remote_pos, latch.remote_vel)
    )


def controller_z_tf(g: ControllerGains, T: float, derivative: str = "backward") -> RationalTF:
    """z-domain controller C(z), positive-gain convention.

    backward (shipped form):  C(z) = (K_v + K_d + P_eps)*(z-1)/(Tz) + K_p
    tustin  (alternate map):  C(z) = (K_v + K_d + P_eps)*(2/T)(z-1)/(z+1) + K_p

    C(1) = K_p either way.
    """
    if not T > 0.0:
        raise ValueError("sampling period must be positive")
    k_deriv = g.kv + g.kd + g.p_eps
    if derivative == "backward":
        # ((k_deriv + kp*T) z - k_deriv) / (T z)
        return RationalTF(num=(-k_deriv, k_deriv + g.kp * T), den=(0.0, T))
    if derivative == "tustin":
        return RationalTF(
            num=(g.kp * T - 2.0 * k_deriv, g.kp * T + 2.0 * k_deriv),
            den=(T, T),
        )
    raise ValueError(f"unknown derivative kernel {derivative!r}")


def passivity_gain_rule(kp: float, nu: float) -> float:
    """Dissipation gain K_d = (nu/2)*K_p that restores controller passivity."""
    if not kp > 0.0:
        raise ValueError("kp must be positive")
    if not nu > 0.0:
        raise ValueError("nu must be positive")
    return 0.5 * nu * kp
