"""Supervised feature ranking by information gain over MDL-discretized bins.

Each feature is discretized on its own by recursive binary splitting: a cut
point (midpoint between adjacent distinct values) is accepted only when the
class-entropy gain it brings exceeds the minimum-description-length cost of
encoding the split. Information gain is then the reduction in class entropy
(base 2) from knowing the bin. Features are ranked by gain, descending, with
lexicographic tie-breaking on the name.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import as_series
from .errors import ConfigError, DataError

__all__ = [
    "InfoGainSelector",
    "class_entropy",
    "info_gain",
    "mdl_cut_points",
    "rank_features",
    "write_ranking",
]


def _entropy_from_counts(counts: np.ndarray) -> float:
    """Shannon entropy (bits) of a class-count vector."""
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def class_entropy(labels) -> float:
    """Shannon entropy (bits) of a label sequence."""
    _, counts = np.unique(np.asarray(labels), return_counts=True)
    return _entropy_from_counts(counts)


def _encode_labels(labels) -> tuple[np.ndarray, int]:
    codes, _ = pd.factorize(np.asarray(labels))
    if (codes < 0).any():
        raise DataError("labels contain missing values")
    return codes, int(codes.max()) + 1


def _class_counts(codes: np.ndarray, n_classes: int) -> np.ndarray:
    return np.bincount(codes, minlength=n_classes)


def _best_cut(values: np.ndarray, codes: np.ndarray, n_classes: int):
    """Best single cut of a sorted block, or None if the block is pure/constant.

    Returns (cut_value, split_position, stats) minimizing class entropy after
    the split; equal-entropy ties go to the smallest cut value.
    """
    n = values.size
    total_counts = _class_counts(codes, n_classes)
    base_entropy = _entropy_from_counts(total_counts)
    if base_entropy == 0.0:
        return None

    # Candidate split positions: first index of each new distinct value.
    change = np.flatnonzero(np.diff(values) > 0) + 1
    if change.size == 0:
        return None

    one_hot = np.zeros((n, n_classes))
    one_hot[np.arange(n), codes] = 1.0
    cum = np.cumsum(one_hot, axis=0)
    left_counts = cum[change - 1]
    right_counts = total_counts - left_counts

    def block_entropy(counts: np.ndarray) -> np.ndarray:
        totals = counts.sum(axis=1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            p = np.where(counts > 0, counts / totals, 1.0)
            parts = np.where(counts > 0, -p * np.log2(p), 0.0)
        return parts.sum(axis=1)

    n_left = change.astype(np.float64)
    n_right = n - n_left
    weighted = (n_left * block_entropy(left_counts) + n_right * block_entropy(right_counts)) / n
    best = int(np.argmin(weighted))
    pos = int(change[best])
    gain = base_entropy - float(weighted[best])

    k = int(np.count_nonzero(total_counts))
    k1 = int(np.count_nonzero(left_counts[best]))
    k2 = int(np.count_nonzero(right_counts[best]))
    e1 = _entropy_from_counts(left_counts[best].astype(np.int64))
    e2 = _entropy_from_counts(right_counts[best].astype(np.int64))
    delta = math.log2(3.0**k - 2.0) - (k * base_entropy - k1 * e1 - k2 * e2)
    threshold = (math.log2(n - 1) + delta) / n
    if gain <= threshold:
        return None
    cut = (values[pos - 1] + values[pos]) / 2.0
    return cut, pos


def mdl_cut_points(values, labels) -> list[float]:
    """Accepted cut points for one feature, ascending. May be empty."""
    v = as_series(values, "feature values")
    codes, n_classes = _encode_labels(labels)
    if v.size != codes.size:
        raise DataError(f"{v.size} values vs {codes.size} labels")
    order = np.argsort(v, kind="stable")
    v_sorted = v[order]
    c_sorted = codes[order]

    cuts: list[float] = []
    stack = [(0, v.size)]
    while stack:
        lo, hi = stack.pop()
        found = _best_cut(v_sorted[lo:hi], c_sorted[lo:hi], n_classes)
        if found is None:
            continue
        cut, pos = found
        cuts.append(cut)
        stack.append((lo, lo + pos))
        stack.append((lo + pos, hi))
    return sorted(cuts)


def info_gain(values, labels, cut_points=None) -> float:
    """Information gain (bits) of one feature after MDL discretization.

    A feature with no accepted cut points lands in a single bin and scores
    exactly 0.
    """
    v = as_series(values, "feature values")
    codes, n_classes = _encode_labels(labels)
    if cut_points is None:
        cut_points = mdl_cut_points(v, labels)
    if not cut_points:
        return 0.0
    bins = np.searchsorted(np.asarray(cut_points, dtype=np.float64), v, side="left")
    base = _entropy_from_counts(_class_counts(codes, n_classes))
    conditional = 0.0
    for b in np.unique(bins):
        members = codes[bins == b]
        conditional += (
            members.size / v.size
        ) * _entropy_from_counts(_class_counts(members, n_classes))
    return base - conditional


def rank_features(X: pd.DataFrame, y) -> pd.DataFrame:
    """Rank every column of ``X`` by information gain, descending.

    Ties are broken by feature name, ascending, so the ranking is total and
    deterministic. Returns columns ``rank`` (1-based), ``feature``,
    ``info_gain_bits``.
    """
    if not isinstance(X, pd.DataFrame):
        X = pd.DataFrame(np.asarray(X))
        X.columns = [f"f{j}" for j in range(X.shape[1])]
    y = np.asarray(y)
    if y.shape[0] != X.shape[0]:
        raise DataError(f"{X.shape[0]} rows vs {y.shape[0]} labels")
    gains = {col: info_gain(X[col].to_numpy(dtype=np.float64), y) for col in X.columns}
    ordered = sorted(gains.items(), key=lambda item: (-item[1], item[0]))
    return pd.DataFrame(
        {
            "rank": np.arange(1, len(ordered) + 1),
            "feature": [name for name, _ in ordered],
            "info_gain_bits": [gain for _, gain in ordered],
        }
    )


def _parse_keep(keep) -> tuple[str, int | None]:
    if keep == "positive" or keep == "all":
        return keep, None
    if isinstance(keep, str) and keep.startswith("top:"):
        try:
            k = int(keep.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad keep rule {keep!r}: top:<k> needs an integer") from None
        if k < 1:
            raise ConfigError(f"bad keep rule {keep!r}: k must be >= 1")
        return "top", k
    raise ConfigError(
        f"bad keep rule {keep!r}: expected 'positive', 'all', or 'top:<k>'"
    )


class InfoGainSelector(TransformerMixin, BaseEstimator):
    """Select feature columns by information-gain ranking.

    Parameters
    ----------
    keep:
        ``"positive"`` keeps features with gain > 0 (falling back to the
        full set, with a warning, when every gain is 0), ``"all"`` keeps
        everything, ``"top:<k>"`` keeps the k best-ranked features.

    Attributes (after fit)
    ----------------------
    ranking_:
        DataFrame with rank/feature/info_gain_bits plus a ``selected`` flag.
    selected_features_:
        Names of retained columns, in ranking order.
    support_:
        Boolean mask over the input columns, in input order.
    """

    def __init__(self, keep: str = "positive"):
        self.keep = keep

    def fit(self, X, y):
        mode, top_k = _parse_keep(self.keep)
        if not isinstance(X, pd.DataFrame):
            X = pd.DataFrame(np.asarray(X))
            X.columns = [f"f{j}" for j in range(X.shape[1])]
        ranking = rank_features(X, y)
        if mode == "positive":
            selected = ranking["info_gain_bits"] > 0.0
            if not selected.any():
                warnings.warn(
                    "every feature has zero information gain; keeping the full set",
                    stacklevel=2,
                )
                selected = pd.Series(True, index=ranking.index)
        elif mode == "all":
            selected = pd.Series(True, index=ranking.index)
        else:
            selected = ranking["rank"] <= top_k
        self.ranking_ = ranking.assign(selected=selected.to_numpy())
        self.selected_features_ = ranking.loc[selected, "feature"].tolist()
        columns = list(X.columns)
        keep_set = set(self.selected_features_)
        self.support_ = np.array([c in keep_set for c in columns])
        self.feature_names_in_ = np.array(columns, dtype=object)
        self.n_features_in_ = len(columns)
        return self

    def transform(self, X):
        if not hasattr(self, "support_"):
            raise DataError("selector is not fitted")
        if isinstance(X, pd.DataFrame):
            missing = [c for c in self.feature_names_in_ if c not in X.columns]
            if missing:
                raise DataError(f"missing feature columns: {', '.join(missing)}")
            return X.loc[:, [c for c in self.feature_names_in_ if c in set(self.selected_features_)]]
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise DataError(
                f"expected {self.n_features_in_} feature columns, got shape {X.shape}"
            )
        return X[:, self.support_]


def write_ranking(ranking: pd.DataFrame, path) -> None:
    """Write a ranking table (with ``selected`` flags) as CSV."""
    out = ranking.copy()
    out["info_gain_bits"] = out["info_gain_bits"].map(lambda g: format(g, ".17g"))
    out.to_csv(path, index=False)
