"""Train/test splitting, classification metrics, ROC curves, and ablation.

The positive class throughout is the alphabetically second label (``"near"``
for the standard ``control``/``near`` pair). Metrics with an empty
denominator are defined as 0 rather than raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DataError

__all__ = [
    "AblationRow",
    "ConfusionMatrix",
    "EvalReport",
    "ablation",
    "evaluate_run",
    "f_measure",
    "metrics_from_confusion",
    "roc_curve",
    "roc_svg",
    "split_60_40",
    "train_test_indices",
    "write_ablation",
    "write_report",
    "write_roc_points",
]

TRAIN_FRACTION = 0.6
MIN_SPLIT_SIZE = 5


# ---------------------------------------------------------------------------
# splitting
# ---------------------------------------------------------------------------

def train_test_indices(labels, seed: int, stratified: bool = False):
    """Seeded 60/40 split of row indices: (train_idx, test_idx).

    Rows are shuffled once and the first ``ceil(0.6 n)`` go to training.
    With ``stratified=True`` the same rule applies within each class
    separately, then the folds are shuffled once more.
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    if n < MIN_SPLIT_SIZE:
        raise DataError(f"need at least {MIN_SPLIT_SIZE} instances to split, got {n}")
    rng = np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)
    if not stratified:
        perm = rng.permutation(n)
        n_train = math.ceil(TRAIN_FRACTION * n)
        return perm[:n_train], perm[n_train:]
    train_parts, test_parts = [], []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        perm = members[rng.permutation(members.size)]
        n_train = math.ceil(TRAIN_FRACTION * members.size)
        train_parts.append(perm[:n_train])
        test_parts.append(perm[n_train:])
    train = np.concatenate(train_parts)
    test = np.concatenate(test_parts)
    return train[rng.permutation(train.size)], test[rng.permutation(test.size)]


def split_60_40(items, seed: int, stratified: bool = False, labels=None):
    """Split any indexable collection 60/40; returns (train, test) lists.

    ``stratified`` needs ``labels`` (or items with a ``label`` attribute).
    """
    items = list(items)
    if stratified and labels is None:
        labels = [getattr(item, "label", None) for item in items]
        if any(lbl is None for lbl in labels):
            raise DataError("stratified split needs labels")
    if labels is None:
        labels = np.zeros(len(items))
    train_idx, test_idx = train_test_indices(labels, seed, stratified)
    return [items[i] for i in train_idx], [items[i] for i in test_idx]


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts with the positive class fixed at creation."""

    tp: int
    fp: int
    tn: int
    fn: int
    positive_label: str = "near"

    @classmethod
    def from_predictions(cls, y_true, y_pred, positive_label: str) -> "ConfusionMatrix":
        y_true = np.asarray(y_true)
        y_pred = np.asarray(y_pred)
        if y_true.shape != y_pred.shape:
            raise DataError(
                f"{y_true.shape[0]} true labels vs {y_pred.shape[0]} predictions"
            )
        actual_pos = y_true == positive_label
        predicted_pos = y_pred == positive_label
        return cls(
            tp=int(np.sum(actual_pos & predicted_pos)),
            fp=int(np.sum(~actual_pos & predicted_pos)),
            tn=int(np.sum(~actual_pos & ~predicted_pos)),
            fn=int(np.sum(actual_pos & ~predicted_pos)),
            positive_label=str(positive_label),
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def f_measure(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    return _ratio(2.0 * precision * recall, precision + recall)


def metrics_from_confusion(cm: ConfusionMatrix) -> dict[str, float]:
    """Accuracy, sensitivity/specificity, and per-class precision/recall/F.

    ``*_pos`` metrics describe the positive class; ``*_neg`` describe the
    complement class (treating it as the target). Sensitivity equals the
    positive recall, and ``one_minus_specificity`` is the ROC x-axis value.
    """
    precision_pos = _ratio(cm.tp, cm.tp + cm.fp)
    recall_pos = _ratio(cm.tp, cm.tp + cm.fn)
    precision_neg = _ratio(cm.tn, cm.tn + cm.fn)
    recall_neg = _ratio(cm.tn, cm.tn + cm.fp)
    specificity = recall_neg
    return {
        "accuracy": _ratio(cm.tp + cm.tn, cm.total),
        "sensitivity": recall_pos,
        "specificity": specificity,
        "one_minus_specificity": 1.0 - specificity,
        "precision_pos": precision_pos,
        "recall_pos": recall_pos,
        "f_measure_pos": f_measure(precision_pos, recall_pos),
        "precision_neg": precision_neg,
        "recall_neg": recall_neg,
        "f_measure_neg": f_measure(precision_neg, recall_neg),
    }


# ---------------------------------------------------------------------------
# ROC
# ---------------------------------------------------------------------------

def roc_curve(y_true, scores, positive_label: str) -> tuple[list[tuple[float, float]], float]:
    """ROC points and trapezoidal AUC from per-instance positive scores.

    Instances are swept by descending score; tied scores move as one group,
    so the curve is threshold-faithful. Points are (1-specificity,
    sensitivity), starting at (0, 0) and ending at (1, 1).
    """
    y_true = np.asarray(y_true)
    scores = np.asarray(scores, dtype=np.float64)
    if y_true.shape[0] != scores.shape[0]:
        raise DataError(f"{y_true.shape[0]} labels vs {scores.shape[0]} scores")
    pos = y_true == positive_label
    n_pos = int(pos.sum())
    n_neg = int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise DataError("ROC needs both classes present in the evaluation set")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_pos = pos[order]
    points = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    n = scores.shape[0]
    while i < n:
        j = i
        while j < n and sorted_scores[j] == sorted_scores[i]:
            j += 1
        tp += int(sorted_pos[i:j].sum())
        fp += (j - i) - int(sorted_pos[i:j].sum())
        points.append((fp / n_neg, tp / n_pos))
        i = j
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))

    auc = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        auc += (x1 - x0) * (y0 + y1) / 2.0
    return points, auc


# ---------------------------------------------------------------------------
# single evaluation run and ablation
# ---------------------------------------------------------------------------

@dataclass
class EvalReport:
    """Everything measured in one train/evaluate pass."""

    confusion: ConfusionMatrix
    metrics: dict[str, float]
    roc_points: list[tuple[float, float]]
    auc: float
    n_train: int
    n_test: int
    selected_features: list[str] = field(default_factory=list)
    ranking: pd.DataFrame | None = None


def evaluate_run(
    X: pd.DataFrame,
    y,
    make_model,
    seed: int,
    stratified: bool = False,
    selector=None,
) -> EvalReport:
    """Split, (optionally) select features on the training fold, train, score.

    ``make_model`` is a zero-argument factory so repeated runs (ablation)
    start from identical untrained state. The selector, when given, is fit
    on the training fold only.
    """
    y = np.asarray(y)
    train_idx, test_idx = train_test_indices(y, seed, stratified)
    X_train, X_test = X.iloc[train_idx], X.iloc[test_idx]
    y_train, y_test = y[train_idx], y[test_idx]

    selected = list(X.columns)
    ranking = None
    if selector is not None:
        selector.fit(X_train, y_train)
        X_train = selector.transform(X_train)
        X_test = selector.transform(X_test)
        selected = list(X_train.columns)
        ranking = selector.ranking_

    model = make_model()
    model.fit(X_train, y_train)
    positive = str(model.classes_[1])
    predictions = model.predict(X_test)
    scores = model.positive_score(X_test)
    cm = ConfusionMatrix.from_predictions(y_test, predictions, positive)
    points, auc = roc_curve(y_test, scores, positive)
    return EvalReport(
        confusion=cm,
        metrics=metrics_from_confusion(cm),
        roc_points=points,
        auc=auc,
        n_train=len(train_idx),
        n_test=len(test_idx),
        selected_features=selected,
        ranking=ranking,
    )


@dataclass(frozen=True)
class AblationRow:
    """Positive-class scores after removing one sensor's features."""

    removed_sensor: str
    precision: float
    recall: float
    f_measure: float
    baseline_diff: float


def _sensor_of(column: str) -> str:
    if "@" not in column:
        raise DataError(f"feature column {column!r} lacks an @sensor suffix")
    return column.rsplit("@", 1)[1]


def ablation(
    X: pd.DataFrame,
    y,
    make_model,
    seed: int,
    stratified: bool = False,
    make_selector=None,
    sensors=None,
) -> tuple[EvalReport, list[AblationRow]]:
    """Leave-one-sensor-out sweep against an all-sensor baseline.

    Every run reuses the same seed, so the split is identical throughout;
    only the feature columns change. ``sensors`` limits which sensors are
    dropped (default: every sensor present). Returns the baseline report
    and one row per dropped sensor with positive-class precision/recall/F
    and the F-measure change versus baseline.
    """
    all_sensors = []
    for col in X.columns:
        sid = _sensor_of(str(col))
        if sid not in all_sensors:
            all_sensors.append(sid)
    targets = list(sensors) if sensors is not None else all_sensors
    unknown = sorted(set(targets) - set(all_sensors))
    if unknown:
        raise DataError(
            f"unknown sensors: {', '.join(unknown)}; "
            f"available: {', '.join(all_sensors)}"
        )

    def run(frame: pd.DataFrame) -> EvalReport:
        selector = make_selector() if make_selector is not None else None
        return evaluate_run(frame, y, make_model, seed, stratified, selector)

    baseline = run(X)
    base_f = baseline.metrics["f_measure_pos"]
    rows = []
    for sensor in targets:
        keep = [c for c in X.columns if _sensor_of(str(c)) != sensor]
        if not keep:
            raise DataError(f"removing sensor '{sensor}' leaves no features")
        report = run(X.loc[:, keep])
        rows.append(
            AblationRow(
                removed_sensor=sensor,
                precision=report.metrics["precision_pos"],
                recall=report.metrics["recall_pos"],
                f_measure=report.metrics["f_measure_pos"],
                baseline_diff=report.metrics["f_measure_pos"] - base_f,
            )
        )
    return baseline, rows


# ---------------------------------------------------------------------------
# report files
# ---------------------------------------------------------------------------

def write_report(report: EvalReport, path, extra: dict | None = None) -> None:
    """Write a ``metric,value`` CSV: counts, metrics, AUC, then any extras."""
    rows = [
        ("n_train", report.n_train),
        ("n_test", report.n_test),
        ("tp", report.confusion.tp),
        ("fp", report.confusion.fp),
        ("tn", report.confusion.tn),
        ("fn", report.confusion.fn),
    ]
    rows += sorted(report.metrics.items())
    rows.append(("auc", report.auc))
    rows.append(("n_selected_features", len(report.selected_features)))
    if extra:
        rows += sorted(extra.items())
    frame = pd.DataFrame(rows, columns=["metric", "value"])
    frame["value"] = frame["value"].map(
        lambda v: format(v, ".17g") if isinstance(v, float) else v
    )
    frame.to_csv(path, index=False)


def write_roc_points(points, path) -> None:
    """Write raw ROC points as ``one_minus_specificity,sensitivity`` CSV."""
    frame = pd.DataFrame(points, columns=["one_minus_specificity", "sensitivity"])
    frame.to_csv(path, index=False, float_format="%.17g")


def write_ablation(baseline: EvalReport, rows, path, baseline_label: str = "all-sensors") -> None:
    """Write the ablation table with the baseline model as first row."""
    records = [
        {
            "model": baseline_label,
            "precision": baseline.metrics["precision_pos"],
            "recall": baseline.metrics["recall_pos"],
            "f_measure": baseline.metrics["f_measure_pos"],
            "baseline_diff": "",
        }
    ]
    for row in rows:
        records.append(
            {
                "model": f"without-{row.removed_sensor}",
                "precision": row.precision,
                "recall": row.recall,
                "f_measure": row.f_measure,
                "baseline_diff": format(row.baseline_diff, ".17g"),
            }
        )
    frame = pd.DataFrame(
        records, columns=["model", "precision", "recall", "f_measure", "baseline_diff"]
    )
    for col in ("precision", "recall", "f_measure"):
        frame[col] = frame[col].map(lambda v: format(v, ".17g"))
    frame.to_csv(path, index=False)


# ---------------------------------------------------------------------------
# ROC plot (standalone SVG, no plotting dependency)
# ---------------------------------------------------------------------------

_SVG_W, _SVG_H = 640, 480
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 20, 20, 60


def _svg_x(v: float) -> float:
    return _MARGIN_L + v * (_SVG_W - _MARGIN_L - _MARGIN_R)


def _svg_y(v: float) -> float:
    return _SVG_H - _MARGIN_B - v * (_SVG_H - _MARGIN_T - _MARGIN_B)


def roc_svg(points, path, title: str = "ROC") -> None:
    """Render the ROC polyline as a small self-contained SVG file."""
    ticks = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<text x="{_SVG_W / 2:.1f}" y="14" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{title}</text>',
    ]
    for t in ticks:
        x = _svg_x(t)
        y = _svg_y(t)
        parts.append(
            f'<line x1="{x:.1f}" y1="{_svg_y(0):.1f}" x2="{x:.1f}" '
            f'y2="{_svg_y(0) + 5:.1f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.1f}" y="{_svg_y(0) + 18:.1f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{t:.1f}</text>'
        )
        parts.append(
            f'<line x1="{_svg_x(0) - 5:.1f}" y1="{y:.1f}" x2="{_svg_x(0):.1f}" '
            f'y2="{y:.1f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_svg_x(0) - 8:.1f}" y="{y + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{t:.1f}</text>'
        )
    # axes, diagonal reference, curve
    parts.append(
        f'<line x1="{_svg_x(0):.1f}" y1="{_svg_y(0):.1f}" x2="{_svg_x(1):.1f}" '
        f'y2="{_svg_y(0):.1f}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{_svg_x(0):.1f}" y1="{_svg_y(0):.1f}" x2="{_svg_x(0):.1f}" '
        f'y2="{_svg_y(1):.1f}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{_svg_x(0):.1f}" y1="{_svg_y(0):.1f}" x2="{_svg_x(1):.1f}" '
        f'y2="{_svg_y(1):.1f}" stroke="#bbbbbb" stroke-dasharray="4,4"/>'
    )
    path_points = " ".join(f"{_svg_x(x):.2f},{_svg_y(y):.2f}" for x, y in points)
    parts.append(
        f'<polyline points="{path_points}" fill="none" stroke="#1f6fb2" stroke-width="2"/>'
    )
    parts.append(
        f'<text x="{(_svg_x(0) + _svg_x(1)) / 2:.1f}" y="{_SVG_H - 15}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="13">'
        f"1-Specificity</text>"
    )
    parts.append(
        f'<text x="18" y="{(_svg_y(0) + _svg_y(1)) / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {(_svg_y(0) + _svg_y(1)) / 2:.1f})">Sensitivity</text>'
    )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")
