"""Raw-log parsing, windowing, and multi-sensor instance assembly.

File formats
------------
Raw log (CSV): header ``sensor_id,timestamp_ms,x,y,z``; one reading per row,
grouped by sensor in time order. Label sidecar (CSV): header
``window_index,label``. Window manifest (CSV): header
``sensor_id,window_index,start_ts,end_ts``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ._validation import as_xyz
from .errors import DataError, LabelingError, ParseError
from .signals import SensorTrace, WINDOW_READINGS

__all__ = [
    "RawInstance",
    "ReadingWindow",
    "assemble_instances",
    "parse_log",
    "read_labels",
    "windowize",
    "write_labels",
    "write_raw_log",
    "write_window_manifest",
]

RAW_LOG_COLUMNS = ("sensor_id", "timestamp_ms", "x", "y", "z")
LABEL_COLUMNS = ("window_index", "label")


@dataclass
class ReadingWindow:
    """A fixed-length run of consecutive readings from one sensor."""

    sensor_id: str
    window_index: int
    timestamps_ms: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.values = as_xyz(self.values, f"window values ({self.sensor_id})")
        self.timestamps_ms = np.asarray(self.timestamps_ms, dtype=np.int64)
        if self.timestamps_ms.shape[0] != self.values.shape[0]:
            raise DataError(
                f"sensor '{self.sensor_id}' window {self.window_index}: "
                f"{self.timestamps_ms.shape[0]} timestamps vs "
                f"{self.values.shape[0]} readings"
            )
        if np.any(np.diff(self.timestamps_ms) < 0):
            raise DataError(
                f"sensor '{self.sensor_id}' window {self.window_index}: "
                f"timestamps decrease"
            )

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass
class RawInstance:
    """One window index across every sensor, with an optional label."""

    window_index: int
    windows: dict[str, ReadingWindow] = field(default_factory=dict)
    label: str | None = None


def _first_bad_line(mask: np.ndarray) -> int:
    # +2: one for the header row, one for 1-based line numbering
    return int(np.flatnonzero(mask)[0]) + 2


def parse_log(path) -> dict[str, SensorTrace]:
    """Parse a raw-log CSV into per-sensor traces, in order of appearance.

    Malformed input raises :class:`ParseError` naming the first offending
    line (1-based, counting the header as line 1).
    """
    try:
        frame = pd.read_csv(
            path,
            dtype={"sensor_id": str},
            skip_blank_lines=False,
            float_precision="round_trip",
        )
    except pd.errors.EmptyDataError:
        raise ParseError(f"{path}: file is empty") from None
    except pd.errors.ParserError as exc:
        raise ParseError(f"{path}: {exc}") from None

    if list(frame.columns) != list(RAW_LOG_COLUMNS):
        raise ParseError(
            f"{path}: expected header {','.join(RAW_LOG_COLUMNS)}, "
            f"got {','.join(str(c) for c in frame.columns)}"
        )

    if frame["sensor_id"].isna().any():
        line = _first_bad_line(frame["sensor_id"].isna().to_numpy())
        raise ParseError(f"{path}: line {line}: missing sensor_id")

    ts = pd.to_numeric(frame["timestamp_ms"], errors="coerce").to_numpy(dtype=np.float64)
    with np.errstate(invalid="ignore"):
        bad_ts = ~np.isfinite(ts) | (ts < 0) | (ts != np.floor(ts))
    if bad_ts.any():
        line = _first_bad_line(bad_ts)
        raise ParseError(
            f"{path}: line {line}: timestamp_ms must be a non-negative integer, "
            f"got {frame['timestamp_ms'].iloc[line - 2]!r}"
        )
    timestamps = ts.astype(np.int64)

    axis_values = np.empty((len(frame), 3))
    for j, col in enumerate(("x", "y", "z")):
        numeric = pd.to_numeric(frame[col], errors="coerce").to_numpy(dtype=np.float64)
        bad = ~np.isfinite(numeric)
        if bad.any():
            line = _first_bad_line(bad)
            raise ParseError(
                f"{path}: line {line}: column '{col}' must be a finite number, "
                f"got {frame[col].iloc[line - 2]!r}"
            )
        axis_values[:, j] = numeric

    traces: dict[str, SensorTrace] = {}
    sensor_col = frame["sensor_id"].to_numpy()
    for sid in pd.unique(frame["sensor_id"]):
        rows = sensor_col == sid
        traces[sid] = SensorTrace(sid, timestamps[rows], axis_values[rows])
    return traces


def windowize(trace: SensorTrace, w_r: int = WINDOW_READINGS) -> list[ReadingWindow]:
    """Split one sensor trace into consecutive non-overlapping windows.

    A trailing partial window is dropped. A trace shorter than ``w_r``
    yields zero windows and a warning rather than an error.
    """
    if w_r < 1:
        raise DataError(f"window size must be >= 1, got {w_r}")
    if np.any(np.diff(trace.timestamps_ms) < 0):
        first = int(np.flatnonzero(np.diff(trace.timestamps_ms) < 0)[0])
        raise DataError(
            f"sensor '{trace.sensor_id}': timestamps decrease at reading {first + 1}"
        )
    n_windows = len(trace) // w_r
    if n_windows == 0:
        warnings.warn(
            f"sensor '{trace.sensor_id}': {len(trace)} readings is fewer than "
            f"one window of {w_r}; no windows produced",
            stacklevel=2,
        )
        return []
    return [
        ReadingWindow(
            trace.sensor_id,
            k,
            trace.timestamps_ms[k * w_r : (k + 1) * w_r],
            trace.values[k * w_r : (k + 1) * w_r],
        )
        for k in range(n_windows)
    ]


def assemble_instances(
    windows_by_sensor: dict[str, list[ReadingWindow]],
    labels: dict[int, str] | None = None,
) -> list[RawInstance]:
    """Join windows across sensors by window index.

    The instance count is the minimum window count over sensors; trailing
    windows of longer sensors are dropped. When ``labels`` is given, every
    joined window index must be present in it.
    """
    if not windows_by_sensor:
        raise DataError("no sensors to assemble instances from")
    empty = sorted(sid for sid, wins in windows_by_sensor.items() if not wins)
    if empty:
        raise DataError(f"sensors with zero windows: {', '.join(empty)}")
    n_instances = min(len(wins) for wins in windows_by_sensor.values())
    instances = []
    for k in range(n_instances):
        label = None
        if labels is not None:
            if k not in labels:
                raise LabelingError(f"label sidecar lacks window_index {k}")
            label = labels[k]
        instances.append(
            RawInstance(
                window_index=k,
                windows={sid: wins[k] for sid, wins in windows_by_sensor.items()},
                label=label,
            )
        )
    return instances


# ---------------------------------------------------------------------------
# file IO
# ---------------------------------------------------------------------------

def write_raw_log(traces: dict[str, SensorTrace], path) -> None:
    """Write traces as a raw-log CSV, sensors in dict order.

    Values use shortest round-trip float formatting, so reading the file
    back reproduces them exactly.
    """
    frames = [
        pd.DataFrame(
            {
                "sensor_id": trace.sensor_id,
                "timestamp_ms": trace.timestamps_ms,
                "x": trace.values[:, 0],
                "y": trace.values[:, 1],
                "z": trace.values[:, 2],
            }
        )
        for trace in traces.values()
    ]
    pd.concat(frames, ignore_index=True).to_csv(path, index=False)


def write_labels(labels: dict[int, str], path) -> None:
    """Write the window-index label sidecar CSV."""
    frame = pd.DataFrame(
        {"window_index": sorted(labels), "label": [labels[k] for k in sorted(labels)]}
    )
    frame.to_csv(path, index=False)


def read_labels(path) -> dict[int, str]:
    """Read a label sidecar CSV into a window-index map."""
    try:
        frame = pd.read_csv(path, dtype={"label": str})
    except pd.errors.EmptyDataError:
        raise ParseError(f"{path}: file is empty") from None
    if list(frame.columns) != list(LABEL_COLUMNS):
        raise ParseError(
            f"{path}: expected header {','.join(LABEL_COLUMNS)}, "
            f"got {','.join(str(c) for c in frame.columns)}"
        )
    idx = pd.to_numeric(frame["window_index"], errors="coerce")
    bad = idx.isna() | (idx % 1 != 0)
    if bad.any():
        line = int(np.flatnonzero(bad.to_numpy())[0]) + 2
        raise ParseError(f"{path}: line {line}: window_index must be an integer")
    if frame["label"].isna().any():
        line = int(np.flatnonzero(frame["label"].isna().to_numpy())[0]) + 2
        raise ParseError(f"{path}: line {line}: missing label")
    return dict(zip(idx.astype(int).tolist(), frame["label"].tolist()))


def write_window_manifest(windows_by_sensor: dict[str, list[ReadingWindow]], path) -> None:
    """Write one manifest row per window: sensor, index, first/last timestamp."""
    rows = [
        {
            "sensor_id": w.sensor_id,
            "window_index": w.window_index,
            "start_ts": int(w.timestamps_ms[0]),
            "end_ts": int(w.timestamps_ms[-1]),
        }
        for wins in windows_by_sensor.values()
        for w in wins
    ]
    pd.DataFrame(rows, columns=["sensor_id", "window_index", "start_ts", "end_ts"]).to_csv(
        path, index=False
    )
