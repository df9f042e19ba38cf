"""Absolute-stability tests for the sampled-data teleoperation loop.

The loop with samplers, holds, and integer-period network delays reduces to a
scattering-style small-gain condition

    sup_w | M_m(w) N_m(w) + M_s(w) N_s(w) | < 1

built from the hold kernel r(jw) = (T/2)(e^(-jwT) - 1)/(1 - cos wT), the
z-domain controllers, and the ZOH-discretized robot plants.  A closed-form
damping bound and a delay-robust ratio condition for the unscaled (alpha = 0)
architecture complete the certificate set.

All tests quantify over passive terminations, so the plants default to the
bare robots; optional termination impedances can be folded in for sensitivity
work.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .control import ControllerGains, controller_z_tf
from .lti import FrequencyGrid, RationalTF, eval_tf, make_grid
from .plants import FREE, ImpedanceModel, RobotParams, plant_position_tf, sampled_plant_tf

__all__ = [
    "ChannelConfig",
    "TeleopSystem",
    "DelayModel",
    "StabilityReport",
    "MaxPeriodResult",
    "KernelSingular",
    "SingularDenominator",
    "NoBracket",
    "AssumptionViolated",
    "r_kernel",
    "mn_terms",
    "small_gain_value",
    "alpha_zero_condition",
    "damping_bound",
    "max_stable_period",
    "induced_delay_gamma",
]

_KERNEL_FLOOR = 1e-14  # on 1 - cos(wT)
_SINGULAR_RTOL = 64.0 * np.finfo(float).eps
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_BISECT_REL_WIDTH = 1e-4


class KernelSingular(ArithmeticError):
    """Hold kernel r(jw) evaluated where 1 - cos(wT) vanishes."""


class SingularDenominator(ArithmeticError):
    """Shared loop denominator vanished at the requested frequency."""


class NoBracket(ValueError):
    """Criterion fails at T_lo but passes at T_hi; no first flip exists."""


class AssumptionViolated(ValueError):
    """Observed sampling intervals violate the minimum-interval assumption."""


@dataclass(frozen=True)
class ChannelConfig:
    """Sampling period, integer-period delays, and position scaling.

    alpha scales the transmitted position signal in the frequency-domain test
    terms; the time-domain control law is independent of it.
    """

    T: float  # s
    d1: int  # forward (master -> slave) delay, periods
    d2: int  # backward (slave -> master) delay, periods
    eps_min: float  # s, minimum admissible sampling interval
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if not self.T > 0.0:
            raise ValueError("sampling period must be positive")
        for name in ("d1", "d2"):
            d = getattr(self, name)
            if isinstance(d, bool) or not isinstance(d, int) or d < 0:
                raise ValueError(f"{name} must be a nonnegative integer (periods)")
        if not (0.0 < self.eps_min <= self.T):
            raise ValueError("eps_min must satisfy 0 < eps_min <= T")
        if self.alpha < 0.0:
            raise ValueError("alpha must be nonnegative")

    @property
    def t1(self) -> float:
        """Forward delay in seconds."""
        return self.d1 * self.T

    @property
    def t2(self) -> float:
        """Backward delay in seconds."""
        return self.d2 * self.T


@dataclass(frozen=True)
class TeleopSystem:
    """Robots, shared gains, and optional termination impedances for analysis."""

    master: RobotParams
    slave: RobotParams
    gains: ControllerGains
    human: ImpedanceModel = FREE
    env: ImpedanceModel = FREE


class DelayModel:
    """Sample instants, hold-update instants, and the induced delay mu(t).

    Every hold update lags its source sample by the constant network delay:
    t_k = t_hat_k + delay.  The induced delay of the held signal is
    mu(t) = t - t_hat_k for t in [t_k, t_{k+1}), and its supremum is
    gamma = sup(t_hat_{k+1} - t_hat_k) + delay.
    """

    def __init__(self, sample_instants, delay: float):
        instants = tuple(float(t) for t in sample_instants)
        if len(instants) < 2:
            raise ValueError("need at least two sample instants")
        if delay < 0.0:
            raise ValueError("delay must be nonnegative")
        if any(b <= a for a, b in zip(instants, instants[1:])):
            raise ValueError("sample instants must be strictly increasing")
        self.sample_instants = instants
        self.delay = float(delay)
        self.hold_update_instants = tuple(t + self.delay for t in instants)

    def mu(self, t: float) -> float:
        """Age of the held sample at time t (defined from the first update)."""
        if t < self.hold_update_instants[0]:
            raise ValueError("no sample has been delivered yet")
        k = 0
        for i, h in enumerate(self.hold_update_instants):
            if h <= t:
                k = i
            else:
                break
        return t - self.sample_instants[k]

    @property
    def gamma(self) -> float:
        """Supremum of the induced delay over the recorded instants."""
        intervals = [
            b - a for a, b in zip(self.sample_instants, self.sample_instants[1:])
        ]
        return max(intervals) + self.delay


@dataclass(frozen=True)
class StabilityReport:
    """Joint outcome of the frequency-domain test and the damping bound."""

    period: float
    small_gain_value: float
    small_gain_pass: bool
    argmax_frequency: float  # rad/s
    grid_size: int
    excluded_points: int
    damping_bound: float
    damping_pass_master: bool
    damping_pass_slave: bool


@dataclass(frozen=True)
class MaxPeriodResult:
    """Largest certified period plus both endpoint evaluations.

    status is "bracketed" when the criterion flipped inside the range,
    "always_pass"/"always_fail" when it never did (period is then the
    corresponding endpoint).
    """

    period: float
    status: str
    criterion: str
    t_lo: float
    t_hi: float
    pass_lo: bool
    pass_hi: bool


def r_kernel(omega: float, T: float) -> complex:
    """Hold kernel r(jw) = (T/2)(e^(-jwT) - 1)/(1 - cos wT).

    Evaluated through the identity r = -(T/2)(1 + j*cot(wT/2)), which is the
    same function without the 1 - cos cancellation (about five digits are
    lost near the grid floor otherwise).  Equivalently r = T/(e^(jwT) - 1).
    """
    if not T > 0.0:
        raise ValueError("sampling period must be positive")
    half = 0.5 * omega * T
    sin_half = math.sin(half)
    if 2.0 * sin_half * sin_half < _KERNEL_FLOOR:
        raise KernelSingular(f"1 - cos(wT) ~ 0 at omega = {omega}, T = {T}")
    return complex(-0.5 * T, -0.5 * T * (math.cos(half) / sin_half))


@dataclass(frozen=True)
class _LoopContext:
    """Frequency-independent pieces of the loop, prepared once per (sys, ch)."""

    T: float
    alpha: float
    b_m: float
    b_s: float
    cm_tf: RationalTF  # z-domain controller, master side
    cs_tf: RationalTF
    gm_tf: RationalTF  # ZOH-discretized plants, z-domain
    gs_tf: RationalTF
    t1: float
    t2: float


def _context(system: TeleopSystem, ch: ChannelConfig) -> _LoopContext:
    c_tf = controller_z_tf(system.gains, ch.T)
    return _LoopContext(
        T=ch.T,
        alpha=ch.alpha,
        b_m=system.master.damping,
        b_s=system.slave.damping,
        cm_tf=c_tf,
        cs_tf=c_tf,
        gm_tf=sampled_plant_tf(plant_position_tf(system.master, system.human), ch.T),
        gs_tf=sampled_plant_tf(plant_position_tf(system.slave, system.env), ch.T),
        t1=ch.t1,
        t2=ch.t2,
    )


def _mn_from_context(ctx: _LoopContext, omega: float):
    r = r_kernel(omega, ctx.T)
    z = cmath.exp(1j * omega * ctx.T)
    cm = eval_tf(ctx.cm_tf, z)
    cs = eval_tf(ctx.cs_tf, z)
    gm = eval_tf(ctx.gm_tf, z)
    gs = eval_tf(ctx.gs_tf, z)
    t_alpha = ctx.alpha * ctx.b_s * cm * r
    t_slave = ctx.b_m * cs * r
    den = 2.0 * ctx.b_m * ctx.b_s + t_alpha + t_slave
    scale = 2.0 * ctx.b_m * ctx.b_s + abs(t_alpha) + abs(t_slave)
    if abs(den) <= _SINGULAR_RTOL * scale:
        raise SingularDenominator(f"loop denominator ~ 0 at omega = {omega}")
    n_m = t_alpha / den
    n_s = t_slave / den
    m_m = -1.0 + (2.0 * ctx.b_m / r) * gm
    m_s = -1.0 + (2.0 * ctx.b_s / r) * gs
    return m_m, m_s, n_m, n_s


def mn_terms(system: TeleopSystem, ch: ChannelConfig, omega: float):
    """Scattering terms (M_m, M_s, N_m, N_s) of the loop at one frequency.

    N_m = alpha*b_s*C_m*r / D,  N_s = b_m*C_s*r / D  with the shared
    denominator D = 2*b_m*b_s + alpha*b_s*C_m*r + b_m*C_s*r;
    M_side = -1 + (2*b_side/r)*G_side(e^(jwT)), controllers and discretized
    plants evaluated at z = e^(jwT).
    """
    return _mn_from_context(_context(system, ch), omega)


def _small_gain_at(ctx: _LoopContext, omega: float) -> float:
    m_m, m_s, n_m, n_s = _mn_from_context(ctx, omega)
    return abs(m_m * n_m + m_s * n_s)


def _golden_refine(ctx: _LoopContext, lo: float, hi: float) -> tuple[float, float]:
    """Golden-section maximization of the test value on [lo, hi]."""

    def f(w: float) -> float:
        try:
            return _small_gain_at(ctx, w)
        except (SingularDenominator, KernelSingular):
            return -math.inf

    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    best_w, best_v = (x1, f1) if f1 >= f2 else (x2, f2)
    for _ in range(200):
        if (b - a) <= 1e-9 * b:
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        if f1 >= best_v:
            best_w, best_v = x1, f1
        if f2 >= best_v:
            best_w, best_v = x2, f2
    return best_w, best_v


def small_gain_value(
    system: TeleopSystem, ch: ChannelConfig, grid: FrequencyGrid
) -> StabilityReport:
    """Estimate sup_w |M_m N_m + M_s N_s| over the grid and judge the loop.

    The grid argmax is refined by a golden-section pass over its bracketing
    interval.  Frequencies where the shared denominator is numerically
    singular are excluded and counted; a passing verdict requires the value
    below one *and* zero exclusions.

    The value tends to 1 from below as w -> 0 for position-coordinating
    loops, so the reported sup depends on the grid floor; comparisons across
    grid sizes are meaningful because every grid shares the same floor.
    """
    ctx = _context(system, ch)
    best_v = -math.inf
    best_i = -1
    excluded = 0
    values = []
    for i, w in enumerate(grid.points):
        try:
            v = _small_gain_at(ctx, w)
        except (SingularDenominator, KernelSingular):
            excluded += 1
            values.append(None)
            continue
        values.append(v)
        if v > best_v:
            best_v = v
            best_i = i
    if best_i < 0:
        raise SingularDenominator("every grid point was singular")
    lo = grid.points[best_i - 1] if best_i > 0 else grid.points[0]
    hi = grid.points[best_i + 1] if best_i + 1 < len(grid.points) else grid.points[-1]
    best_w = grid.points[best_i]
    if hi > lo:
        w_ref, v_ref = _golden_refine(ctx, lo, hi)
        if v_ref > best_v:
            best_v, best_w = v_ref, w_ref
    bound = damping_bound(system.gains, ch.T)
    return StabilityReport(
        period=ch.T,
        small_gain_value=best_v,
        small_gain_pass=(best_v < 1.0 and excluded == 0),
        argmax_frequency=best_w,
        grid_size=len(grid.points),
        excluded_points=excluded,
        damping_bound=bound,
        damping_pass_master=system.master.damping > bound,
        damping_pass_slave=system.slave.damping > bound,
    )


def alpha_zero_condition(system: TeleopSystem, ch: ChannelConfig, omega: float) -> float:
    """Delay-robust ratio test for the unscaled (alpha = 0) architecture.

    Returns (|D + b_s C_m r| + |D + b_m C_s r| + |D|) /
    |2 b_m b_s C_m C_s + b_s C_m^2 C_s r + b_m C_s^2 C_m r + D|
    with D = r^2 (1 - e^(-(T1+T2) s))/2 at s = j*omega; the loop passes at
    this frequency when the ratio is below one.  Periodic in (T1+T2)*omega
    with period 2*pi; reduces to the undelayed test at T1 = T2 = 0.
    """
    ctx = _context(system, ch)
    r = r_kernel(omega, ctx.T)
    z = cmath.exp(1j * omega * ctx.T)
    cm = eval_tf(ctx.cm_tf, z)
    cs = eval_tf(ctx.cs_tf, z)
    d_term = r * r * (1.0 - cmath.exp(-(ctx.t1 + ctx.t2) * 1j * omega)) / 2.0
    num = abs(d_term + ctx.b_s * cm * r) + abs(d_term + ctx.b_m * cs * r) + abs(d_term)
    t0 = 2.0 * ctx.b_m * ctx.b_s * cm * cs
    t1 = ctx.b_s * cm * cm * cs * r
    t2 = ctx.b_m * cs * cs * cm * r
    den = t0 + t1 + t2 + d_term
    scale = abs(t0) + abs(t1) + abs(t2) + abs(d_term)
    if abs(den) <= _SINGULAR_RTOL * scale:
        raise SingularDenominator(f"ratio denominator ~ 0 at omega = {omega}")
    return num / abs(den)


def damping_bound(g: ControllerGains, T: float) -> float:
    """Closed-form damping bound K_p*T + 2*K_d - 2*P_eps - 2*K_v.

    A robot with damping strictly above this value passes.  Affine in T with
    slope K_p.
    """
    if not T > 0.0:
        raise ValueError("sampling period must be positive")
    return g.kp * T + 2.0 * g.kd - 2.0 * g.p_eps - 2.0 * g.kv


def _criterion_pass(
    system: TeleopSystem,
    ch_template: ChannelConfig,
    criterion: str,
    T: float,
    grid_points: int,
) -> bool:
    if criterion == "damping_bound":
        bound = damping_bound(system.gains, T)
        return min(system.master.damping, system.slave.damping) > bound
    if criterion == "small_gain":
        ch = replace(ch_template, T=T, eps_min=min(ch_template.eps_min, T))
        report = small_gain_value(system, ch, make_grid(T, grid_points))
        return report.small_gain_pass
    raise ValueError(f"unknown criterion {criterion!r}")


def max_stable_period(
    system: TeleopSystem,
    ch_template: ChannelConfig,
    criterion: str,
    t_range: tuple[float, float],
    grid_points: int = 512,
) -> MaxPeriodResult:
    """Largest sampling period the chosen criterion certifies on [T_lo, T_hi].

    Bisects to a relative bracket width of 1e-4 when the criterion passes at
    T_lo and fails at T_hi.  If it never flips, the corresponding endpoint is
    returned with an always_pass / always_fail status.  An inverted bracket
    (fail at T_lo, pass at T_hi) has no first flip and raises NoBracket.
    """
    t_lo, t_hi = t_range
    if not (0.0 < t_lo < t_hi):
        raise ValueError("need 0 < T_lo < T_hi")
    pass_lo = _criterion_pass(system, ch_template, criterion, t_lo, grid_points)
    pass_hi = _criterion_pass(system, ch_template, criterion, t_hi, grid_points)
    common = dict(
        criterion=criterion, t_lo=t_lo, t_hi=t_hi, pass_lo=pass_lo, pass_hi=pass_hi
    )
    if pass_lo and pass_hi:
        return MaxPeriodResult(period=t_hi, status="always_pass", **common)
    if not pass_lo and not pass_hi:
        return MaxPeriodResult(period=t_lo, status="always_fail", **common)
    if not pass_lo:
        raise NoBracket("criterion fails at T_lo but passes at T_hi")
    lo, hi = t_lo, t_hi
    while (hi - lo) > _BISECT_REL_WIDTH * hi:
        mid = 0.5 * (lo + hi)
        if _criterion_pass(system, ch_template, criterion, mid, grid_points):
            lo = mid
        else:
            hi = mid
    return MaxPeriodResult(period=0.5 * (lo + hi), status="bracketed", **common)


def induced_delay_gamma(ch: ChannelConfig, observed_intervals) -> float:
    """Worst-case induced delay sup mu(t) from observed sampling intervals.

    gamma = max interval + forward network delay d1*T.  Every interval must
    respect the minimum-interval assumption (>= eps_min).
    """
    intervals = [float(v) for v in observed_intervals]
    if not intervals:
        raise ValueError("need at least one observed interval")
    for iv in intervals:
        if iv < ch.eps_min:
            raise AssumptionViolated(
                f"interval {iv} below the minimum admissible {ch.eps_min}"
            )
    return max(intervals) + ch.t1
