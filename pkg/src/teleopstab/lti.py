"""Rational transfer functions and the frequency kernels of sampled-data loops.

Coefficient convention: ascending powers, so ``num=[1, 0.5]`` over ``den=[0, 1]``
is (1 + 0.5*s)/s.  The indeterminate is whatever the caller evaluates at -- the
Laplace variable for continuous models, z for discretized ones.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RationalTF",
    "ComplexResponse",
    "FrequencyGrid",
    "PoleHit",
    "DegenerateZ",
    "BadGrid",
    "eval_tf",
    "zoh_factor",
    "backward_diff_gain",
    "tustin_gain",
    "make_grid",
    "freq_response",
]

# |den(s)| below this multiple of the rounding-noise floor counts as a pole hit
_POLE_RTOL = 64.0 * np.finfo(float).eps

# below |sT| = 1e-8 the closed-form hold factor loses digits; switch to series
_ZOH_SERIES_CUT = 1e-8

_LOG_GRID_DECADES = 1e6  # log-spaced grids start at pi/(T * 1e6)


class PoleHit(ArithmeticError):
    """Transfer-function evaluation requested at (or numerically on) a pole."""


class DegenerateZ(ValueError):
    """Discrete-derivative kernel evaluated where it is undefined."""


class BadGrid(ValueError):
    """Frequency-grid request cannot be satisfied."""


def _trimmed(coeffs) -> tuple[float, ...]:
    # drop exact zeros at the high-order end so degree is well defined
    out = [float(c) for c in coeffs]
    if not out:
        raise ValueError("empty coefficient list")
    for c in out:
        if not math.isfinite(c):
            raise ValueError("coefficients must be finite")
    while len(out) > 1 and out[-1] == 0.0:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class RationalTF:
    """Ratio of real-coefficient polynomials in ascending powers.

    Improper ratios are allowed: impedances such as m*s + b are first-class.
    The denominator must have at least one nonzero coefficient.
    """

    num: tuple[float, ...]
    den: tuple[float, ...]

    def __post_init__(self) -> None:
        num = _trimmed(self.num)
        den = _trimmed(self.den)
        if den == (0.0,):
            raise ValueError("denominator is identically zero")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def num_degree(self) -> int:
        return len(self.num) - 1

    @property
    def den_degree(self) -> int:
        return len(self.den) - 1

    def is_strictly_proper(self) -> bool:
        return self.num != (0.0,) and self.num_degree < self.den_degree


@dataclass(frozen=True)
class ComplexResponse:
    """One frequency-response sample."""

    frequency: float  # rad/s
    value: complex

    def __post_init__(self) -> None:
        if not self.frequency > 0.0:
            raise ValueError("frequency must be positive")


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing evaluation frequencies on (0, nyquist]."""

    points: tuple[float, ...]
    nyquist: float  # rad/s, = pi/T

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise BadGrid("grid needs at least two points")
        prev = 0.0
        for p in self.points:
            if not (p > prev):
                raise BadGrid("grid points must be strictly increasing and positive")
            prev = p
        if prev > self.nyquist:
            raise BadGrid("grid exceeds the Nyquist frequency")

    def __len__(self) -> int:
        return len(self.points)


def _horner(coeffs: tuple[float, ...], s: complex) -> complex:
    acc = complex(coeffs[-1])
    for c in reversed(coeffs[:-1]):
        acc = acc * s + c
    return acc


def _horner_mag(coeffs: tuple[float, ...], r: float) -> float:
    # same recurrence on |c_k| and |s|: a running bound on evaluation noise
    acc = abs(coeffs[-1])
    for c in reversed(coeffs[:-1]):
        acc = acc * r + abs(c)
    return acc


def eval_tf(tf: RationalTF, s: complex) -> complex:
    """Evaluate ``tf`` at the complex point ``s`` by Horner's scheme.

    Raises PoleHit when the denominator magnitude falls below a machine-scaled
    threshold (64 eps times the coefficient-magnitude bound at ``s``).
    """
    den = _horner(tf.den, s)
    scale = _horner_mag(tf.den, abs(s))
    if abs(den) <= _POLE_RTOL * scale:
        raise PoleHit(f"denominator ~ 0 at s = {s!r}")
    return _horner(tf.num, s) / den


def freq_response(tf: RationalTF, grid: FrequencyGrid) -> list[ComplexResponse]:
    """Evaluate ``tf`` at s = j*omega over the grid."""
    return [ComplexResponse(w, eval_tf(tf, 1j * w)) for w in grid.points]


def zoh_factor(s: complex, T: float) -> complex:
    """Frequency response (1 - e^(-sT))/(sT) of the zero-order hold.

    Below |sT| = 1e-8 the direct quotient is replaced by its series
    1 - sT/2 + (sT)^2/6 so the removable singularity at s = 0 stays smooth.
    """
    if not T > 0.0:
        raise ValueError("sampling period must be positive")
    x = s * T
    if abs(x) < _ZOH_SERIES_CUT:
        return 1.0 - x / 2.0 + x * x / 6.0
    return (1.0 - cmath.exp(-x)) / x


def backward_diff_gain(z: complex, T: float) -> complex:
    """Backward-difference derivative kernel (z - 1)/(T z)."""
    if not T > 0.0:
        raise ValueError("sampling period must be positive")
    if z == 0:
        raise DegenerateZ("backward difference undefined at z = 0")
    return (z - 1.0) / (T * z)


def tustin_gain(z: complex, T: float) -> complex:
    """Trapezoidal (Tustin) derivative kernel (2/T)(z - 1)/(z + 1).

    Alternate map for sensitivity studies; the shipped controller uses the
    backward difference.
    """
    if not T > 0.0:
        raise ValueError("sampling period must be positive")
    if z == -1:
        raise DegenerateZ("Tustin map undefined at z = -1")
    return (2.0 / T) * (z - 1.0) / (z + 1.0)


def make_grid(T: float, n_points: int = 512, spacing: str = "log") -> FrequencyGrid:
    """Build an evaluation grid on (0, pi/T], last point exactly Nyquist.

    Log spacing (default) starts at pi/(T*1e6); linear spacing places points
    at k*pi/(T*n) for k = 1..n.
    """
    if not T > 0.0:
        raise ValueError("sampling period must be positive")
    if n_points < 2:
        raise BadGrid(f"n_points = {n_points}, need at least 2")
    nyq = math.pi / T
    if spacing == "linear":
        pts = (np.arange(1, n_points + 1) * (nyq / n_points)).tolist()
    elif spacing == "log":
        pts = np.geomspace(nyq / _LOG_GRID_DECADES, nyq, n_points).tolist()
    else:
        raise ValueError(f"unknown spacing {spacing!r}")
    pts[-1] = nyq
    return FrequencyGrid(points=tuple(pts), nyquist=nyq)
