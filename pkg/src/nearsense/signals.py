"""Synthetic three-axis ambient-sensor traces.

A quiet space produces a sum of fixed sinusoids plus a constant offset per
axis, optionally with additive Gaussian sensor noise. A nearby person adds
extra sinusoids whose amplitudes are modulated and jittered over time, plus
a wideband Gaussian disturbance:

* steady:      ``sum_i a_i * sin(w_i t + p_i) + lambda``
* non-steady:  ``sum_i gamma_i(t) * sin(w_i t + p_i) + lambda``, where the
  human-added sinusoids use ``gamma_i(t) = a_i * (1 + m sin(w_mod t)) + g_i(t)``
  with ``g_i(t) ~ N(0, sigma_g^2)`` per sample, and a noise term
  ``h(t) ~ N(0, sigma_h^2)`` is added to every axis.

All randomness is drawn from named substreams keyed by (seed, sensor, axis,
stream, phase start) so regenerating with the same seed is bit-identical and
adding a sensor never perturbs the draws of another.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

__all__ = [
    "HumanConfig",
    "SensorProfile",
    "SensorTrace",
    "SinusoidSpec",
    "SpaceConfig",
    "WINDOW_READINGS",
    "gen_dataset",
    "gen_nonsteady",
    "gen_steady",
]

#: Canonical number of readings per windowed instance.
WINDOW_READINGS = 512

#: Millisecond timestamps stay strictly increasing only up to this rate.
MAX_SAMPLE_RATE_HZ = 1000.0

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SinusoidSpec:
    """One sinusoidal component: amplitude, angular frequency (rad/s), phase."""

    amplitude: float
    omega: float
    phase: float = 0.0

    def __post_init__(self):
        if not (self.amplitude >= 0.0 and math.isfinite(self.amplitude)):
            raise ConfigError(f"sinusoid amplitude must be >= 0, got {self.amplitude}")
        if not (self.omega > 0.0 and math.isfinite(self.omega)):
            raise ConfigError(f"sinusoid omega must be > 0, got {self.omega}")
        if not (0.0 <= self.phase < _TWO_PI):
            raise ConfigError(f"sinusoid phase must lie in [0, 2*pi), got {self.phase}")


@dataclass(frozen=True)
class SpaceConfig:
    """Steady-state behaviour of a quiet space for one sensor.

    The same sinusoid sum drives all three axes; per-axis offsets come from
    the sensor profile's baseline, and sensor noise is drawn independently
    per axis.
    """

    sinusoids: tuple[SinusoidSpec, ...]
    lambda_offset: float = 0.0
    sample_rate_hz: float = 10.0
    duration_s: float = 60.0
    sensor_noise_sigma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "sinusoids", tuple(self.sinusoids))
        if len(self.sinusoids) < 1:
            raise ConfigError("a space needs at least one steady sinusoid")
        if not (self.sample_rate_hz > 0.0):
            raise ConfigError(f"sample_rate_hz must be > 0, got {self.sample_rate_hz}")
        if self.sample_rate_hz > MAX_SAMPLE_RATE_HZ:
            raise ConfigError(
                f"sample_rate_hz must be <= {MAX_SAMPLE_RATE_HZ:g} so that "
                f"millisecond timestamps stay strictly increasing, got "
                f"{self.sample_rate_hz}"
            )
        if not (self.duration_s > 0.0):
            raise ConfigError(f"duration_s must be > 0, got {self.duration_s}")
        if not (self.sensor_noise_sigma >= 0.0):
            raise ConfigError(
                f"sensor_noise_sigma must be >= 0, got {self.sensor_noise_sigma}"
            )


@dataclass(frozen=True)
class HumanConfig:
    """Perturbation a nearby person adds on top of the steady space."""

    extra_sinusoids: tuple[SinusoidSpec, ...]
    modulation_depth: float = 0.0
    modulation_omega: float = 1.0
    random_amplitude_sigma: float = 0.0
    noise_sigma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "extra_sinusoids", tuple(self.extra_sinusoids))
        if len(self.extra_sinusoids) < 1:
            raise ConfigError("a human perturbation needs at least one extra sinusoid")
        if not (0.0 <= self.modulation_depth <= 1.0):
            raise ConfigError(
                f"modulation_depth must lie in [0, 1], got {self.modulation_depth}"
            )
        if not (self.modulation_omega > 0.0):
            raise ConfigError(
                f"modulation_omega must be > 0, got {self.modulation_omega}"
            )
        if not (self.random_amplitude_sigma >= 0.0):
            raise ConfigError(
                f"random_amplitude_sigma must be >= 0, got {self.random_amplitude_sigma}"
            )
        if not (self.noise_sigma >= 0.0):
            raise ConfigError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


@dataclass(frozen=True)
class SensorProfile:
    """One sensor: identity, per-axis baselines, steady space, optional human."""

    sensor_id: str
    space: SpaceConfig
    baseline: tuple[float, float, float] = (0.0, 0.0, 0.0)
    human: HumanConfig | None = None

    def __post_init__(self):
        if not self.sensor_id:
            raise ConfigError("sensor_id must be a non-empty string")
        baseline = tuple(float(b) for b in self.baseline)
        if len(baseline) != 3:
            raise ConfigError(
                f"sensor '{self.sensor_id}': baseline needs 3 values, got {len(baseline)}"
            )
        object.__setattr__(self, "baseline", baseline)


@dataclass
class SensorTrace:
    """Generated readings of one sensor: strictly increasing ms timestamps
    and an (n, 3) value array."""

    sensor_id: str
    timestamps_ms: np.ndarray
    values: np.ndarray

    def __len__(self) -> int:
        return self.values.shape[0]


def _substream(seed: int, sensor_id: str, axis: int, stream: str, start: int):
    """Independent generator for one (sensor, axis, stream, phase) tuple."""
    words = [
        int(seed) & 0xFFFFFFFFFFFFFFFF,
        zlib.crc32(sensor_id.encode("utf-8")),
        axis,
        zlib.crc32(stream.encode("utf-8")),
        start,
    ]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(words)))


def _normal_or_zero(rng_factory, sigma: float, n: int):
    if sigma <= 0.0:
        return 0.0
    return rng_factory().normal(0.0, sigma, n)


def _render(
    profile: SensorProfile,
    human: HumanConfig | None,
    seed: int,
    start_sample: int,
    n_samples: int,
) -> SensorTrace:
    """Render ``n_samples`` readings beginning at sample index ``start_sample``."""
    space = profile.space
    rate = space.sample_rate_hz
    k = start_sample + np.arange(n_samples, dtype=np.int64)
    t = k / rate
    timestamps = np.round(k * (1000.0 / rate)).astype(np.int64)
    if n_samples > 1 and not np.all(np.diff(timestamps) > 0):
        raise ConfigError(
            f"sensor '{profile.sensor_id}': sample rate {rate:g} Hz does not "
            f"give strictly increasing millisecond timestamps"
        )

    steady = np.zeros(n_samples)
    for s in space.sinusoids:
        steady += s.amplitude * np.sin(s.omega * t + s.phase)

    # Human sinusoids accumulate right after the steady ones, before the
    # offset/baseline/noise terms, in the same order a merged sinusoid list
    # would: with zero modulation and zero sigmas the non-steady trace is
    # then bit-identical to the steady trace of the merged list.
    values = np.empty((n_samples, 3))
    for axis in range(3):
        def rng(stream: str, _axis=axis):
            return _substream(seed, profile.sensor_id, _axis, stream, start_sample)

        v = steady.copy()
        if human is not None:
            envelope = 1.0 + human.modulation_depth * np.sin(human.modulation_omega * t)
            for j, s in enumerate(human.extra_sinusoids):
                gamma = s.amplitude * envelope + _normal_or_zero(
                    lambda: rng(f"human-amp-{j}"), human.random_amplitude_sigma, n_samples
                )
                v += gamma * np.sin(s.omega * t + s.phase)
        v = v + space.lambda_offset
        v = v + profile.baseline[axis]
        v = v + _normal_or_zero(lambda: rng("sensor-noise"), space.sensor_noise_sigma, n_samples)
        if human is not None:
            v = v + _normal_or_zero(lambda: rng("human-noise"), human.noise_sigma, n_samples)
        values[:, axis] = v
    return SensorTrace(profile.sensor_id, timestamps, values)


def _check_min_length(profile: SensorProfile, n_samples: int) -> None:
    if n_samples < WINDOW_READINGS:
        raise ConfigError(
            f"sensor '{profile.sensor_id}': duration {profile.space.duration_s:g} s at "
            f"{profile.space.sample_rate_hz:g} Hz yields {n_samples} readings; "
            f"at least {WINDOW_READINGS} are needed for one window"
        )


def _n_samples(space: SpaceConfig) -> int:
    return int(math.floor(space.duration_s * space.sample_rate_hz))


def gen_steady(profile: SensorProfile, seed: int) -> SensorTrace:
    """Trace of a quiet space over the profile's configured duration."""
    n = _n_samples(profile.space)
    _check_min_length(profile, n)
    return _render(profile, None, seed, 0, n)


def gen_nonsteady(profile: SensorProfile, human: HumanConfig, seed: int) -> SensorTrace:
    """Trace of the same space with a person nearby.

    With ``modulation_depth=0`` and both human sigmas 0 this reduces exactly,
    sample for sample, to ``gen_steady`` over the merged sinusoid list: the
    sensor-noise substream does not depend on the human configuration.
    """
    if human is None:
        raise ConfigError(f"sensor '{profile.sensor_id}': human configuration is required")
    n = _n_samples(profile.space)
    _check_min_length(profile, n)
    return _render(profile, human, seed, 0, n)


def gen_dataset(
    profiles,
    n_control_windows: int,
    n_near_windows: int,
    seed: int,
) -> tuple[dict[str, SensorTrace], dict[int, str]]:
    """Window-aligned control-then-near traces for a set of sensors.

    Every sensor emits ``(n_control + n_near) * 512`` readings on one shared
    clock: first the steady phase, then — for sensors with a human profile —
    the perturbed phase continuing the same timeline. Returns the traces by
    sensor id plus the window-index label map (``"control"`` / ``"near"``).
    """
    profiles = list(profiles)
    if not profiles:
        raise ConfigError("at least one sensor profile is required")
    ids = [p.sensor_id for p in profiles]
    duplicates = sorted({i for i in ids if ids.count(i) > 1})
    if duplicates:
        raise ConfigError(f"duplicate sensor ids: {', '.join(duplicates)}")
    if n_control_windows < 0 or n_near_windows < 0:
        raise ConfigError("window counts must be >= 0")
    if n_control_windows + n_near_windows < 1:
        raise ConfigError("at least one window is required")

    n_control = n_control_windows * WINDOW_READINGS
    n_near = n_near_windows * WINDOW_READINGS
    traces: dict[str, SensorTrace] = {}
    for profile in profiles:
        parts = []
        if n_control:
            parts.append(_render(profile, None, seed, 0, n_control))
        if n_near:
            parts.append(_render(profile, profile.human, seed, n_control, n_near))
        traces[profile.sensor_id] = SensorTrace(
            profile.sensor_id,
            np.concatenate([p.timestamps_ms for p in parts]),
            np.vstack([p.values for p in parts]),
        )
    labels = {i: "control" for i in range(n_control_windows)}
    labels.update(
        {n_control_windows + i: "near" for i in range(n_near_windows)}
    )
    return traces, labels
