"""Per-window feature extraction for three-axis sensor windows.

Each window of w readings over axes X/Y/Z yields 25 features per sensor:

* ``Mean``, ``SD``, ``Entropy``, ``MAD`` per axis (12),
* ``MRW`` magnitude of the resultant across axes (1),
* ``GCS-CDF`` coverage span of the Gaussian CDF transform per axis (3),
* ``GAPI-PDF`` / ``GAPI-CDF`` log-distance between adjacent peaks of the
  Gaussian PDF/CDF transforms per axis (6),
* ``FFT-ADPI-CDF`` distance between adjacent dominant peaks of the FFT
  magnitude of the CDF transform per axis (3).

Feature keys for multi-sensor instances are ``<name>@<sensor_id>``, e.g.
``Mean-X@pressure``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import as_series, as_xyz
from .errors import DataError, ParseError
from .fourier import fft_magnitudes

__all__ = [
    "AXES",
    "SIGMA_FLOOR",
    "VARIANCE_FLOOR",
    "GaussianStats",
    "WindowFeatureExtractor",
    "base_feature_names",
    "cdf_transform",
    "detect_peaks",
    "entropy",
    "erf",
    "extract_all",
    "feature_names_for_sensors",
    "fft_adpi",
    "gapi",
    "gaussian_stats",
    "gcs",
    "instances_to_frame",
    "mad",
    "mean",
    "mrw",
    "pdf_transform",
    "read_feature_matrix",
    "std_dev",
    "write_feature_matrix",
]

AXES = ("X", "Y", "Z")

#: Below this standard deviation a window axis is treated as constant and the
#: Gaussian transforms short-circuit to their degenerate values.
SIGMA_FLOOR = 1e-12

#: Variance clamp inside the entropy formula so constant windows stay finite.
VARIANCE_FLOOR = 1e-12

LABEL_COLUMN = "label"


# ---------------------------------------------------------------------------
# moment-style statistics
# ---------------------------------------------------------------------------

def mean(axis_values) -> float:
    """Arithmetic mean of one axis of a window."""
    return float(np.mean(as_series(axis_values, "axis values")))


def std_dev(axis_values) -> float:
    """Population standard deviation (divisor n, not n-1).

    A constant series returns exactly 0.0; the ~1-ulp rounding noise of a
    computed mean must not leak into the degeneracy contract.
    """
    v = as_series(axis_values, "axis values")
    if np.min(v) == np.max(v):
        return 0.0
    return float(np.std(v))


def entropy(axis_values) -> float:
    """Differential entropy of a Gaussian fit, in nats.

    Computed as ``0.5 * ln(2*pi*e * max(var, 1e-12))``; the clamp keeps the
    value finite (and large-negative) for constant windows.
    """
    v = as_series(axis_values, "axis values")
    var = max(float(np.var(v)), VARIANCE_FLOOR)
    return 0.5 * math.log(2.0 * math.pi * math.e * var)


def mad(axis_values) -> float:
    """Mean absolute deviation about the window mean.

    Constant series return exactly 0.0, mirroring :func:`std_dev`.
    """
    v = as_series(axis_values, "axis values")
    if np.min(v) == np.max(v):
        return 0.0
    return float(np.mean(np.abs(v - v.mean())))


def mrw(window) -> float:
    """Root mean square of the per-reading resultant across the three axes."""
    values = as_xyz(_window_values(window))
    return float(np.sqrt(np.sum(values * values) / values.shape[0]))


# ---------------------------------------------------------------------------
# Gaussian error function and distribution transforms
# ---------------------------------------------------------------------------

_ERF_P = 0.3275911
_ERF_A1 = 0.254829592
_ERF_A2 = -0.284496736
_ERF_A3 = 1.421413741
_ERF_A4 = -1.453152027
_ERF_A5 = 1.061405429


def erf(r):
    """Gaussian error function via a degree-5 rational polynomial fit.

    Absolute error is below 1.5e-7 everywhere. Odd symmetry is applied
    before the fit, so ``erf(-r) == -erf(r)`` holds exactly, and zero maps
    to exactly zero (the polynomial itself leaves a ~1e-9 residual there).
    Scalars map to floats; array input is evaluated elementwise.
    """
    arr = np.asarray(r, dtype=np.float64)
    sign = np.where(np.signbit(arr), -1.0, 1.0)
    a = np.abs(arr)
    t = 1.0 / (1.0 + _ERF_P * a)
    poly = t * (_ERF_A1 + t * (_ERF_A2 + t * (_ERF_A3 + t * (_ERF_A4 + t * _ERF_A5))))
    out = sign * (1.0 - poly * np.exp(-a * a))
    out = np.where(a == 0.0, 0.0, out)
    if arr.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class GaussianStats:
    """Mean and population spread of one axis of one window."""

    mu: float
    sigma: float
    sigma_sq: float

    @property
    def degenerate(self) -> bool:
        return self.sigma < SIGMA_FLOOR


def gaussian_stats(axis_values) -> GaussianStats:
    v = as_series(axis_values, "axis values")
    var = float(np.var(v))
    return GaussianStats(mu=float(v.mean()), sigma=math.sqrt(var), sigma_sq=var)


def pdf_transform(axis_values) -> np.ndarray:
    """Gaussian density of each reading under the window's own fit.

    A constant window (sigma below ``SIGMA_FLOOR``) yields all zeros rather
    than a divide-by-zero.
    """
    v = as_series(axis_values, "axis values")
    stats = gaussian_stats(v)
    if stats.degenerate:
        return np.zeros_like(v)
    z = (v - stats.mu) / stats.sigma
    return np.exp(-0.5 * z * z) / (stats.sigma * math.sqrt(2.0 * math.pi))


def cdf_transform(axis_values) -> np.ndarray:
    """Gaussian CDF of each reading under the window's own fit.

    A constant window yields all 0.5 (every reading sits at the mean).
    """
    v = as_series(axis_values, "axis values")
    stats = gaussian_stats(v)
    if stats.degenerate:
        return np.full_like(v, 0.5)
    z = (v - stats.mu) / (stats.sigma * math.sqrt(2.0))
    return 0.5 * (1.0 + erf(z))


def gcs(transformed) -> float:
    """Coverage span max - min of a transformed series."""
    v = as_series(transformed, "transformed series")
    return float(v.max() - v.min())


# ---------------------------------------------------------------------------
# peak-based features
# ---------------------------------------------------------------------------

def _peak_indices(v: np.ndarray) -> np.ndarray:
    """Indices of strict interior local maxima (plateaus excluded)."""
    if v.size < 3:
        return np.empty(0, dtype=np.intp)
    mid = v[1:-1]
    return np.flatnonzero((mid > v[:-2]) & (mid > v[2:])) + 1


def detect_peaks(series) -> list[tuple[int, float]]:
    """Strict interior local maxima of a series as (index, value) pairs.

    Endpoints never qualify, and plateau points fail the strict comparison
    on at least one side, so a constant series has no peaks.
    """
    v = as_series(series)
    idx = _peak_indices(v)
    return list(zip(idx.tolist(), v[idx].tolist()))


def gapi(transformed, *, literal_telescoping: bool = False) -> float:
    """Accumulated log-distance between adjacent positive peaks, per reading.

    Sums ``|ln(pk_i) - ln(pk_{i+1})|`` over consecutive positive-valued peaks
    and divides by the series length. Fewer than two usable peaks yields 0.
    With ``literal_telescoping=True`` the signed differences are summed
    instead, which telescopes to ``ln(pk_first) - ln(pk_last)``.
    """
    v = as_series(transformed, "transformed series")
    peak_vals = v[_peak_indices(v)]
    peak_vals = peak_vals[peak_vals > 0.0]
    if peak_vals.size < 2:
        return 0.0
    diffs = np.diff(np.log(peak_vals))
    total = -float(np.sum(diffs)) if literal_telescoping else float(np.sum(np.abs(diffs)))
    return total / v.size


def _adpi_from_magnitudes(mag: np.ndarray, literal_telescoping: bool) -> float:
    peak_vals = mag[_peak_indices(mag)]
    peak_vals = peak_vals[peak_vals >= float(np.mean(mag))]
    if peak_vals.size < 2:
        return 0.0
    diffs = np.diff(peak_vals)
    total = -float(np.sum(diffs)) if literal_telescoping else float(np.sum(np.abs(diffs)))
    return total / mag.size


def fft_adpi(series, *, literal_telescoping: bool = False) -> float:
    """Accumulated distance between adjacent dominant FFT peaks, per reading.

    The series is transformed to its FFT magnitude spectrum; peaks at or
    above the mean magnitude count as dominant. Sums ``|pk_i - pk_{i+1}|``
    over consecutive dominant peaks and divides by the series length. Fewer
    than two dominant peaks yields 0. ``literal_telescoping=True`` sums the
    signed differences instead.
    """
    return _adpi_from_magnitudes(
        fft_magnitudes(as_series(series)), literal_telescoping
    )


# ---------------------------------------------------------------------------
# per-window assembly
# ---------------------------------------------------------------------------

def base_feature_names(include_gcs_pdf: bool = False) -> list[str]:
    """The per-sensor feature names, in canonical column order."""
    names = [f"{family}-{ax}" for family in ("Mean", "SD", "Entropy", "MAD") for ax in AXES]
    names.append("MRW")
    names += [f"GCS-CDF-{ax}" for ax in AXES]
    if include_gcs_pdf:
        names += [f"GCS-PDF-{ax}" for ax in AXES]
    names += [f"GAPI-PDF-{ax}" for ax in AXES]
    names += [f"GAPI-CDF-{ax}" for ax in AXES]
    names += [f"FFT-ADPI-CDF-{ax}" for ax in AXES]
    return names


def feature_names_for_sensors(sensor_ids, include_gcs_pdf: bool = False) -> list[str]:
    """Flattened ``<name>@<sensor>`` column order for a list of sensors."""
    base = base_feature_names(include_gcs_pdf)
    return [f"{name}@{sid}" for sid in sensor_ids for name in base]


def _window_values(window) -> np.ndarray:
    values = getattr(window, "values", window)
    return as_xyz(values)


def extract_all(
    window,
    *,
    literal_telescoping: bool = False,
    include_gcs_pdf: bool = False,
) -> dict[str, float]:
    """All per-sensor features of one window, keyed by feature name.

    ``window`` may be a ``ReadingWindow`` or a bare (n, 3) array. Keys carry
    no sensor suffix; multi-sensor assembly adds it.
    """
    values = _window_values(window)
    out: dict[str, float] = {}
    for j, ax in enumerate(AXES):
        out[f"Mean-{ax}"] = mean(values[:, j])
    for j, ax in enumerate(AXES):
        out[f"SD-{ax}"] = std_dev(values[:, j])
    for j, ax in enumerate(AXES):
        out[f"Entropy-{ax}"] = entropy(values[:, j])
    for j, ax in enumerate(AXES):
        out[f"MAD-{ax}"] = mad(values[:, j])
    out["MRW"] = mrw(values)
    cdfs = [cdf_transform(values[:, j]) for j in range(3)]
    pdfs = [pdf_transform(values[:, j]) for j in range(3)]
    for j, ax in enumerate(AXES):
        out[f"GCS-CDF-{ax}"] = gcs(cdfs[j])
    if include_gcs_pdf:
        for j, ax in enumerate(AXES):
            out[f"GCS-PDF-{ax}"] = gcs(pdfs[j])
    for j, ax in enumerate(AXES):
        out[f"GAPI-PDF-{ax}"] = gapi(pdfs[j], literal_telescoping=literal_telescoping)
    for j, ax in enumerate(AXES):
        out[f"GAPI-CDF-{ax}"] = gapi(cdfs[j], literal_telescoping=literal_telescoping)
    magnitudes = fft_magnitudes(np.stack(cdfs))  # one batched call for all axes
    for j, ax in enumerate(AXES):
        out[f"FFT-ADPI-CDF-{ax}"] = _adpi_from_magnitudes(
            magnitudes[j], literal_telescoping
        )
    bad = [k for k, v in out.items() if not math.isfinite(v)]
    if bad:
        raise DataError(f"non-finite feature values: {', '.join(sorted(bad))}")
    return out


def instances_to_frame(
    instances,
    *,
    literal_telescoping: bool = False,
    include_gcs_pdf: bool = False,
    sensor_order=None,
) -> tuple[pd.DataFrame, pd.Series]:
    """Feature matrix and label series for a list of multi-sensor instances.

    Column order is sensor-major (``sensor_order`` or first instance's key
    order), feature-minor in canonical order. Labels may contain None for
    unlabeled instances.
    """
    if not instances:
        raise DataError("no instances to extract features from")
    sensors = list(sensor_order) if sensor_order is not None else list(instances[0].windows)
    columns = feature_names_for_sensors(sensors, include_gcs_pdf)
    rows = np.empty((len(instances), len(columns)))
    labels = []
    for i, inst in enumerate(instances):
        missing = [s for s in sensors if s not in inst.windows]
        if missing:
            raise DataError(
                f"instance {inst.window_index} lacks sensors: {', '.join(missing)}"
            )
        offset = 0
        for sid in sensors:
            feats = extract_all(
                inst.windows[sid],
                literal_telescoping=literal_telescoping,
                include_gcs_pdf=include_gcs_pdf,
            )
            rows[i, offset : offset + len(feats)] = list(feats.values())
            offset += len(feats)
        labels.append(inst.label)
    index = pd.RangeIndex(len(instances))
    return (
        pd.DataFrame(rows, columns=columns, index=index),
        pd.Series(labels, index=index, name=LABEL_COLUMN),
    )


class WindowFeatureExtractor(TransformerMixin, BaseEstimator):
    """Stateless transformer from assembled instances to a feature matrix.

    Parameters
    ----------
    literal_telescoping:
        Sum signed (telescoping) peak differences instead of absolute ones.
    include_gcs_pdf:
        Also emit the coverage span of the PDF transform per axis.
    sensor_order:
        Explicit sensor column ordering; defaults to the order sensors
        appear in the first instance.
    """

    def __init__(self, literal_telescoping=False, include_gcs_pdf=False, sensor_order=None):
        self.literal_telescoping = literal_telescoping
        self.include_gcs_pdf = include_gcs_pdf
        self.sensor_order = sensor_order

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> pd.DataFrame:
        frame, _ = instances_to_frame(
            X,
            literal_telescoping=self.literal_telescoping,
            include_gcs_pdf=self.include_gcs_pdf,
            sensor_order=self.sensor_order,
        )
        return frame


# ---------------------------------------------------------------------------
# feature-matrix file format
# ---------------------------------------------------------------------------

def write_feature_matrix(X: pd.DataFrame, y, path) -> None:
    """Write features plus a trailing ``label`` column as CSV.

    Floats are written with 17 significant digits so they round-trip exactly.
    """
    out = X.copy()
    out[LABEL_COLUMN] = ["" if lbl is None else str(lbl) for lbl in y]
    out.to_csv(path, index=False, float_format="%.17g")


def read_feature_matrix(path) -> tuple[pd.DataFrame, pd.Series]:
    """Read a feature-matrix CSV back into (features, labels).

    Floats are parsed with the correctly-rounded converter so values written
    by :func:`write_feature_matrix` come back bit-identical.
    """
    frame = pd.read_csv(path, float_precision="round_trip")
    if LABEL_COLUMN not in frame.columns:
        raise ParseError(f"{path}: feature matrix lacks a '{LABEL_COLUMN}' column")
    y = frame[LABEL_COLUMN].astype(object).where(frame[LABEL_COLUMN].notna(), None)
    X = frame.drop(columns=[LABEL_COLUMN])
    bad = [c for c in X.columns if not np.issubdtype(X[c].dtype, np.number)]
    if bad:
        raise DataError(f"non-numeric feature columns: {', '.join(bad)}")
    return X, pd.Series(y, name=LABEL_COLUMN)
