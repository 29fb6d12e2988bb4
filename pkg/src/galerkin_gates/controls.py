"""
Piecewise-constant control laws and their L1 accounting.

Every control handed to the propagator is a :class:`PiecewiseConstantControl`:
an ordered list of ``(duration, amplitude)`` steps. Smooth laws such as
``a cos(w t + theta)`` are sampled at step midpoints.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import models
from .errors import InvalidControlError, NoTransitionError


@dataclass(frozen=True, eq=False)
class PiecewiseConstantControl:
    """Finite schedule ``u(t) = amplitudes[i]`` on the ``i``-th step."""

    durations: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        d = np.array(self.durations, dtype=float).reshape(-1)
        a = np.array(self.amplitudes, dtype=float).reshape(-1)
        if d.shape != a.shape:
            raise InvalidControlError("durations and amplitudes differ in length")
        if np.any(~(d > 0)) or not np.all(np.isfinite(d)):
            raise InvalidControlError("every step duration must be positive and finite")
        if not np.all(np.isfinite(a)):
            raise InvalidControlError("amplitudes must be finite")
        d.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "durations", d)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def empty(cls) -> "PiecewiseConstantControl":
        return cls(np.zeros(0), np.zeros(0))

    @classmethod
    def from_steps(cls, steps) -> "PiecewiseConstantControl":
        steps = list(steps)
        if not steps:
            return cls.empty()
        d, a = zip(*steps)
        return cls(np.asarray(d), np.asarray(a))

    @property
    def steps(self) -> list[tuple[float, float]]:
        return list(zip(self.durations.tolist(), self.amplitudes.tolist()))

    @property
    def total_duration(self) -> float:
        return math.fsum(self.durations)

    @property
    def l1(self) -> float:
        return math.fsum(self.durations * np.abs(self.amplitudes))

    @property
    def breakpoints(self) -> np.ndarray:
        """Step boundaries ``t_0 = 0 < t_1 < ... < T``."""
        return np.concatenate([[0.0], np.cumsum(self.durations)])

    def __len__(self):
        return self.durations.size

    def __eq__(self, other):
        if not isinstance(other, PiecewiseConstantControl):
            return NotImplemented
        return np.array_equal(self.durations, other.durations) and np.array_equal(
            self.amplitudes, other.amplitudes
        )


def pulse_train(
    period: float, pulse_width: float, amplitude: float, n_periods: int
) -> PiecewiseConstantControl:
    """Repeat ``[amplitude for pulse_width, 0 for period - pulse_width]``."""
    if not 0 < pulse_width < period:
        raise InvalidControlError(
            f"need 0 < pulse_width < period, got pulse_width={pulse_width}, period={period}"
        )
    if int(n_periods) != n_periods or n_periods < 1:
        raise InvalidControlError(f"n_periods must be a positive integer, got {n_periods}")
    n = int(n_periods)
    d = np.tile([pulse_width, period - pulse_width], n)
    a = np.tile([amplitude, 0.0], n)
    return PiecewiseConstantControl(d, a)


def discretize_sinusoid(
    amplitude: float, angular_frequency: float, phase: float, duration: float, step: float
) -> PiecewiseConstantControl:
    """Sample ``amplitude * cos(w t + phase)`` on ``[0, duration]`` at step midpoints.

    The last step is shortened so the schedule ends exactly at ``duration``.
    """
    if not duration > 0 or not step > 0:
        raise InvalidControlError("duration and step must be positive")
    if step > duration:
        raise InvalidControlError(f"step {step} exceeds duration {duration}")
    ratio = duration / step
    n_full = int(round(ratio)) if abs(ratio - round(ratio)) < 1e-9 * ratio else int(ratio)
    d = np.full(n_full, step)
    rem = duration - n_full * step
    if rem > 1e-12 * duration:
        d = np.append(d, rem)
    starts = np.concatenate([[0.0], np.cumsum(d)[:-1]])
    mid = starts + 0.5 * d
    a = amplitude * np.cos(angular_frequency * mid + phase)
    return PiecewiseConstantControl(d, a)


def concat(*controls: PiecewiseConstantControl) -> PiecewiseConstantControl:
    if not controls:
        return PiecewiseConstantControl.empty()
    return PiecewiseConstantControl(
        np.concatenate([c.durations for c in controls]),
        np.concatenate([c.amplitudes for c in controls]),
    )


def sinusoid_l1(amplitude: float, angular_frequency: float, phase: float, t0: float, t1: float) -> float:
    """Exact ``int_{t0}^{t1} |amplitude cos(w t + phase)| dt`` in closed form."""
    if angular_frequency == 0:
        return abs(amplitude * math.cos(phase)) * (t1 - t0)

    def antiderivative(s):
        m = math.floor((s + math.pi / 2) / math.pi)
        return 2 * m + (-1) ** m * math.sin(s)

    w = abs(angular_frequency)
    sgn = 1.0 if angular_frequency > 0 else -1.0
    # cos is even, so cos(-w t + phase) = cos(w t - phase)
    ph = phase * sgn
    return abs(amplitude) / w * (antiderivative(w * t1 + ph) - antiderivative(w * t0 + ph))


@dataclass(frozen=True)
class SinusoidSpec:
    """An undiscretized law ``amplitude * cos(angular_frequency * t + phase)``."""

    amplitude: float
    angular_frequency: float
    phase: float
    duration: float

    def discretize(self, step: float) -> PiecewiseConstantControl:
        return discretize_sinusoid(
            self.amplitude, self.angular_frequency, self.phase, self.duration, step
        )

    @property
    def period(self) -> float:
        return 2 * math.pi / self.angular_frequency

    @property
    def l1(self) -> float:
        return sinusoid_l1(self.amplitude, self.angular_frequency, self.phase, 0.0, self.duration)


def synthesize_resonant_transfer(
    model: models.QuantumModel, j: int, k: int, amplitude: float, phase: float = 0.0
) -> SinusoidSpec:
    """Resonant drive for the ``j <-> k`` transfer.

    The frequency is the gap ``|lambda_j - lambda_k|``. In the rotating-wave
    approximation the populations of ``j`` and ``k`` exchange completely when
    ``amplitude * |b_jk| * T = pi``, which fixes the duration. Smaller
    amplitudes trade longer transfers for less off-resonant leakage.
    """
    if not amplitude > 0:
        raise InvalidControlError("amplitude must be positive")
    b = abs(models.coupling(model, j, k))
    if b == 0:
        raise NoTransitionError(f"levels {j} and {k} are not coupled")
    omega = abs(models.eigenvalue(model, j) - models.eigenvalue(model, k))
    return SinusoidSpec(amplitude, omega, phase, math.pi / (amplitude * b))
