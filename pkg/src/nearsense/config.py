"""Run configuration: JSON schema, strict loading, and built-in defaults.

A run config is a JSON object with these keys (all optional — omitted keys
take the documented defaults; unknown keys are rejected):

``seed``, ``window_size``, ``generator`` (``n_control_windows``,
``n_near_windows``, ``sensors`` list of sensor profiles), ``features``
(``literal_telescoping``, ``include_gcs_pdf``), ``selection`` (``keep``),
``train`` (``algorithm``, ``normalize_inputs``, ``smo``, ``mlp``, ``nb``
sub-objects), and ``split`` (``stratified``).

The built-in default describes nine synthetic ambient sensors with 500
control and 500 near windows per sensor; its numbers are invented,
physically plausible values, not measurements.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .signals import HumanConfig, SensorProfile, SinusoidSpec, SpaceConfig

__all__ = [
    "MlpConfig",
    "RunConfig",
    "SmoConfig",
    "TrainConfig",
    "default_config",
    "load_config",
    "parse_config",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SmoConfig:
    C: float = 1.0
    tolerance: float = 1e-3
    kernel: str = "linear"


@dataclass(frozen=True)
class MlpConfig:
    hidden_units: int | str = "auto"
    learning_rate: float = 0.3
    momentum: float = 0.2
    epochs: int = 500


@dataclass(frozen=True)
class NbConfig:
    sigma_floor_fraction: float = 1e-6


@dataclass(frozen=True)
class TrainConfig:
    algorithm: str = "smo"
    normalize_inputs: bool = True
    smo: SmoConfig = field(default_factory=SmoConfig)
    mlp: MlpConfig = field(default_factory=MlpConfig)
    nb: NbConfig = field(default_factory=NbConfig)

    def __post_init__(self):
        if self.algorithm not in ("smo", "nb", "mlp"):
            raise ConfigError(
                f"algorithm must be one of smo, nb, mlp; got {self.algorithm!r}"
            )


@dataclass(frozen=True)
class GeneratorConfig:
    n_control_windows: int = 500
    n_near_windows: int = 500
    sensors: tuple[SensorProfile, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sensors", tuple(self.sensors))


@dataclass(frozen=True)
class FeatureConfig:
    literal_telescoping: bool = False
    include_gcs_pdf: bool = False


@dataclass(frozen=True)
class SelectionConfig:
    keep: str = "positive"


@dataclass(frozen=True)
class SplitConfig:
    stratified: bool = False


@dataclass(frozen=True)
class RunConfig:
    seed: int = 7
    window_size: int = 512
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    selection: SelectionConfig = field(default_factory=SelectionConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    split: SplitConfig = field(default_factory=SplitConfig)

    def __post_init__(self):
        if self.window_size < 2 or (self.window_size & (self.window_size - 1)) != 0:
            raise ConfigError(
                f"window_size must be a power of two >= 2, got {self.window_size}"
            )


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown keys: {', '.join(unknown)}")


def _build(cls, obj: dict, where: str, transforms: dict | None = None):
    fields = {f for f in cls.__dataclass_fields__}
    _check_keys(obj, fields, where)
    kwargs = dict(obj)
    if transforms:
        for key, fn in transforms.items():
            if key in kwargs:
                kwargs[key] = fn(kwargs[key])
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _parse_sinusoid(obj: dict, where: str) -> SinusoidSpec:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: sinusoid must be an object")
    return _build(SinusoidSpec, obj, where)


def _parse_space(obj: dict, where: str) -> SpaceConfig:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: space must be an object")
    return _build(
        SpaceConfig,
        obj,
        where,
        {
            "sinusoids": lambda lst: tuple(
                _parse_sinusoid(s, f"{where}.sinusoids[{i}]") for i, s in enumerate(lst)
            )
        },
    )


def _parse_human(obj, where: str) -> HumanConfig | None:
    if obj is None:
        return None
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: human must be an object or null")
    return _build(
        HumanConfig,
        obj,
        where,
        {
            "extra_sinusoids": lambda lst: tuple(
                _parse_sinusoid(s, f"{where}.extra_sinusoids[{i}]")
                for i, s in enumerate(lst)
            )
        },
    )


def _parse_sensor(obj: dict, where: str) -> SensorProfile:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: sensor must be an object")
    return _build(
        SensorProfile,
        obj,
        where,
        {
            "space": lambda s: _parse_space(s, f"{where}.space"),
            "human": lambda h: _parse_human(h, f"{where}.human"),
            "baseline": tuple,
        },
    )


def parse_config(obj: dict, where: str = "config") -> RunConfig:
    """Build a :class:`RunConfig` from a parsed JSON object, strictly."""
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: top level must be a JSON object")
    _check_keys(
        obj,
        {"seed", "window_size", "generator", "features", "selection", "train", "split"},
        where,
    )
    kwargs: dict = {}
    for key in ("seed", "window_size"):
        if key in obj:
            kwargs[key] = obj[key]
    if "generator" in obj:
        gen = obj["generator"]
        if not isinstance(gen, dict):
            raise ConfigError(f"{where}.generator must be an object")
        kwargs["generator"] = _build(
            GeneratorConfig,
            gen,
            f"{where}.generator",
            {
                "sensors": lambda lst: tuple(
                    _parse_sensor(s, f"{where}.generator.sensors[{i}]")
                    for i, s in enumerate(lst)
                )
            },
        )
    if "features" in obj:
        kwargs["features"] = _build(FeatureConfig, obj["features"], f"{where}.features")
    if "selection" in obj:
        kwargs["selection"] = _build(
            SelectionConfig, obj["selection"], f"{where}.selection"
        )
    if "train" in obj:
        train = dict(obj["train"])
        _check_keys(
            train,
            {"algorithm", "normalize_inputs", "smo", "mlp", "nb"},
            f"{where}.train",
        )
        for sub, cls in (("smo", SmoConfig), ("mlp", MlpConfig), ("nb", NbConfig)):
            if sub in train:
                train[sub] = _build(cls, train[sub], f"{where}.train.{sub}")
        kwargs["train"] = _build(TrainConfig, train, f"{where}.train")
    if "split" in obj:
        kwargs["split"] = _build(SplitConfig, obj["split"], f"{where}.split")
    try:
        return RunConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def load_config(path) -> RunConfig:
    """Load and validate a JSON run configuration file."""
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return parse_config(obj, where=str(path))


# ---------------------------------------------------------------------------
# built-in default: nine synthetic ambient sensors
# ---------------------------------------------------------------------------

def _hz(f: float) -> float:
    return _TWO_PI * f


def _sensor(
    sensor_id: str,
    baseline: tuple[float, float, float],
    steady: list[tuple[float, float, float]],
    noise: float,
    extra: list[tuple[float, float, float]],
    depth: float,
    mod_hz: float,
    amp_sigma: float,
    human_noise: float,
) -> SensorProfile:
    return SensorProfile(
        sensor_id=sensor_id,
        baseline=baseline,
        space=SpaceConfig(
            sinusoids=tuple(SinusoidSpec(a, _hz(f), p) for a, f, p in steady),
            lambda_offset=0.0,
            sample_rate_hz=10.0,
            duration_s=60.0,
            sensor_noise_sigma=noise,
        ),
        human=HumanConfig(
            extra_sinusoids=tuple(SinusoidSpec(a, _hz(f), p) for a, f, p in extra),
            modulation_depth=depth,
            modulation_omega=_hz(mod_hz),
            random_amplitude_sigma=amp_sigma,
            noise_sigma=human_noise,
        ),
    )


def default_sensor_profiles() -> tuple[SensorProfile, ...]:
    """Nine synthetic ambient sensors with invented, plausible magnitudes.

    Each sensor idles as a small sinusoid mix around a physical baseline;
    a nearby person contributes extra low-frequency components with
    modulated, jittered amplitudes plus wideband noise. Effect sizes vary
    by sensor so the feature ranking and leave-one-sensor-out sweeps have
    genuine structure: pressure/gravity/temperature react strongly,
    humidity/magnetometer barely react, and the rest sit in between.
    """
    return (
        _sensor(
            "pressure", (1013.25, 0.0, 0.0),
            steady=[(0.02, 0.05, 0.0), (0.012, 0.21, 1.1)], noise=0.006,
            extra=[(0.035, 0.33, 0.4), (0.02, 0.9, 2.2)],
            depth=0.5, mod_hz=0.08, amp_sigma=0.012, human_noise=0.010,
        ),
        _sensor(
            "gravity", (0.05, 0.03, 9.81),
            steady=[(0.004, 0.12, 0.7)], noise=0.0015,
            extra=[(0.009, 0.6, 0.0), (0.005, 1.3, 0.9)],
            depth=0.4, mod_hz=0.1, amp_sigma=0.003, human_noise=0.0025,
        ),
        _sensor(
            "accelerometer", (0.02, -0.01, 0.98),
            steady=[(0.006, 0.4, 0.0), (0.003, 1.7, 2.0)], noise=0.004,
            extra=[(0.012, 1.1, 0.3), (0.007, 2.4, 1.5)],
            depth=0.6, mod_hz=0.15, amp_sigma=0.004, human_noise=0.005,
        ),
        _sensor(
            "temperature", (23.8, 0.0, 0.0),
            steady=[(0.05, 0.02, 0.3)], noise=0.012,
            extra=[(0.10, 0.07, 1.8), (0.05, 0.25, 0.6)],
            depth=0.5, mod_hz=0.04, amp_sigma=0.03, human_noise=0.02,
        ),
        _sensor(
            "humidity", (54.0, 0.0, 0.0),
            steady=[(0.25, 0.03, 0.0)], noise=0.10,
            extra=[(0.08, 0.11, 0.9)],
            depth=0.2, mod_hz=0.05, amp_sigma=0.02, human_noise=0.03,
        ),
        _sensor(
            "magnetometer", (22.0, -8.0, 31.0),
            steady=[(0.12, 0.08, 1.2), (0.06, 0.9, 0.0)], noise=0.08,
            extra=[(0.05, 0.5, 2.5)],
            depth=0.2, mod_hz=0.06, amp_sigma=0.015, human_noise=0.025,
        ),
        _sensor(
            "gyroscope", (0.0, 0.0, 0.0),
            steady=[(0.002, 0.9, 0.0)], noise=0.0025,
            extra=[(0.004, 1.6, 1.0)],
            depth=0.35, mod_hz=0.12, amp_sigma=0.0018, human_noise=0.002,
        ),
        _sensor(
            "light", (301.0, 0.0, 0.0),
            steady=[(1.8, 0.016, 0.5), (0.7, 0.12, 2.8)], noise=0.5,
            extra=[(2.4, 0.2, 0.0), (1.1, 0.55, 1.2)],
            depth=0.45, mod_hz=0.05, amp_sigma=0.8, human_noise=0.6,
        ),
        _sensor(
            "rotation-vector", (0.01, -0.02, 0.15),
            steady=[(0.003, 0.25, 0.0)], noise=0.002,
            extra=[(0.005, 0.7, 0.8), (0.003, 1.9, 0.2)],
            depth=0.5, mod_hz=0.09, amp_sigma=0.002, human_noise=0.0022,
        ),
    )


def default_config() -> RunConfig:
    """The built-in run configuration: 9 sensors, 500+500 windows, seed 7."""
    return RunConfig(
        seed=7,
        generator=GeneratorConfig(
            n_control_windows=500,
            n_near_windows=500,
            sensors=default_sensor_profiles(),
        ),
    )
