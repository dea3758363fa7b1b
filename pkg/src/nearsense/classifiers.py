"""Binary classifiers over window-feature matrices, plus model file IO.

Three algorithms share one estimator surface (``fit`` / ``predict`` /
``positive_score`` / ``save``):

* :class:`SMOClassifier` — a support-vector machine trained by sequential
  minimal optimization with maximal-violating-pair working-set selection,
* :class:`GaussianNaiveBayes` — per-class per-feature Gaussian likelihoods,
* :class:`MultilayerPerceptron` — one sigmoid hidden layer trained by
  online backpropagation with momentum.

All three min-max normalize inputs to the training ranges by default. The
alphabetically second class label acts as the positive class for scores;
prediction ties resolve to the first.
"""

from __future__ import annotations

import json
import math
import warnings

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, ClassifierMixin

from ._validation import check_feature_matrix
from .errors import ConfigError, DivergenceError, SchemaError, TrainingError

__all__ = [
    "GaussianNaiveBayes",
    "MultilayerPerceptron",
    "SMOClassifier",
    "load_model",
    "save_model",
]

MODEL_FORMAT = "nearsense-model"
MODEL_VERSION = 1

#: Feature ranges narrower than this are treated as constant when normalizing.
_RANGE_FLOOR = 1e-30


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


class _BinaryModel(ClassifierMixin, BaseEstimator):
    """Shared label handling, normalization, and schema checking."""

    algorithm = ""

    def _fit_common(self, X, y):
        if isinstance(X, pd.DataFrame):
            names = [str(c) for c in X.columns]
            values = check_feature_matrix(X.to_numpy(dtype=np.float64))
        else:
            values = check_feature_matrix(X)
            names = None
        y = np.asarray(y)
        if y.shape[0] != values.shape[0]:
            raise TrainingError(f"{values.shape[0]} rows vs {y.shape[0]} labels")
        classes = np.unique(y)
        if classes.shape[0] != 2:
            raise TrainingError(
                f"exactly two classes are required, got {classes.shape[0]}: "
                f"{', '.join(map(str, classes))}"
            )
        self.classes_ = classes
        self.feature_names_in_ = names
        self.n_features_in_ = values.shape[1]
        # y01: 0 for the first (negative) class, 1 for the second (positive)
        y01 = (y == classes[1]).astype(np.int64)
        if self.normalize:
            lo = values.min(axis=0)
            hi = values.max(axis=0)
        else:
            lo = np.zeros(values.shape[1])
            hi = np.ones(values.shape[1])
        self.norm_lo_ = lo
        self.norm_hi_ = hi
        return self._apply_norm(values), y01

    def _apply_norm(self, values: np.ndarray) -> np.ndarray:
        scale = self.norm_hi_ - self.norm_lo_
        safe = np.where(scale > _RANGE_FLOOR, scale, 1.0)
        return (values - self.norm_lo_) / safe

    def _check_matrix(self, X) -> np.ndarray:
        if not hasattr(self, "classes_"):
            raise TrainingError(f"{type(self).__name__} is not fitted")
        if isinstance(X, pd.DataFrame):
            if self.feature_names_in_ is not None:
                got = [str(c) for c in X.columns]
                if got != self.feature_names_in_:
                    expected = set(self.feature_names_in_)
                    seen = set(got)
                    missing = sorted(expected - seen)
                    extra = sorted(seen - expected)
                    if missing or extra:
                        parts = []
                        if missing:
                            parts.append(f"missing: {', '.join(missing)}")
                        if extra:
                            parts.append(f"unexpected: {', '.join(extra)}")
                        raise SchemaError(f"feature schema mismatch ({'; '.join(parts)})")
                    X = X.loc[:, self.feature_names_in_]
            values = check_feature_matrix(X.to_numpy(dtype=np.float64))
        else:
            values = check_feature_matrix(X)
        if values.shape[1] != self.n_features_in_:
            raise SchemaError(
                f"expected {self.n_features_in_} feature columns, got {values.shape[1]}"
            )
        return self._apply_norm(values)

    def predict(self, X):
        scores = self.positive_score(X)
        return np.where(scores > self._positive_threshold, self.classes_[1], self.classes_[0])

    def positive_score(self, X) -> np.ndarray:
        raise NotImplementedError


class SMOClassifier(_BinaryModel):
    """Linear-kernel SVM trained by sequential minimal optimization.

    The dual problem ``min 0.5*a'Qa - e'a`` subject to ``y'a = 0``,
    ``0 <= a <= C`` is solved by repeatedly updating the maximal violating
    pair until the duality gap measure ``m(a) - M(a)`` falls to
    ``tolerance``. Ties in pair selection go to the lowest index, so
    training is deterministic. The offset is ``b = (m + M) / 2`` at the
    final iterate.
    """

    algorithm = "smo"
    _positive_threshold = 0.0

    def __init__(self, C=1.0, tolerance=1e-3, kernel="linear", normalize=True,
                 max_iter=1_000_000):
        self.C = C
        self.tolerance = tolerance
        self.kernel = kernel
        self.normalize = normalize
        self.max_iter = max_iter

    def fit(self, X, y):
        if self.kernel != "linear":
            raise ConfigError(f"unsupported kernel {self.kernel!r}; only 'linear'")
        if not (self.C > 0):
            raise ConfigError(f"C must be > 0, got {self.C}")
        if not (self.tolerance > 0):
            raise ConfigError(f"tolerance must be > 0, got {self.tolerance}")
        Xn, y01 = self._fit_common(X, y)
        ysign = np.where(y01 == 1, 1.0, -1.0)
        alpha, b, iterations = _smo_solve(
            Xn, ysign, float(self.C), float(self.tolerance), int(self.max_iter)
        )
        self.alpha_ = alpha
        self.intercept_ = b
        self.n_iter_ = iterations
        self.train_y_ = ysign
        self.train_X_ = Xn
        sv = alpha > 0.0
        self.support_ = np.flatnonzero(sv)
        self.support_vectors_ = Xn[sv]
        self.dual_coef_ = (alpha * ysign)[sv]
        self.dual_objective_ = float(
            alpha.sum() - 0.5 * np.dot(alpha * ysign, Xn @ (Xn.T @ (alpha * ysign)))
        )
        return self

    def decision_function(self, X) -> np.ndarray:
        """Signed distance-like score; positive means the positive class."""
        Xn = self._check_matrix(X)
        return (Xn @ self.support_vectors_.T) @ self.dual_coef_ + self.intercept_

    def positive_score(self, X) -> np.ndarray:
        return self.decision_function(X)


def _smo_solve(Xn, y, C, tol, max_iter):
    """Maximal-violating-pair SMO on the normalized matrix. Returns
    (alpha, b, iterations)."""
    n = y.size
    K = Xn @ Xn.T
    Kdiag = np.diag(K).copy()
    alpha = np.zeros(n)
    grad = np.full(n, -1.0)  # gradient of 0.5*a'Qa - e'a at a=0
    yg = y.copy()  # -y * grad
    m = M = 0.0

    for iteration in range(max_iter):
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            m = M = 0.0
            break
        up_scores = np.where(up, yg, -np.inf)
        i = int(np.argmax(up_scores))
        m = up_scores[i]
        low_scores = np.where(low, yg, np.inf)
        j = int(np.argmin(low_scores))
        M = low_scores[j]
        if m - M <= tol:
            break

        s = y[i] * y[j]
        eta = Kdiag[i] + Kdiag[j] - 2.0 * K[i, j]
        if eta <= 0.0:
            eta = 1e-12
        # unconstrained step along (d_i, d_j) = (1, -s), then box clipping
        delta = -(grad[i] - s * grad[j]) / eta
        lo_lim = -alpha[i]
        hi_lim = C - alpha[i]
        if s > 0:
            lo_lim = max(lo_lim, alpha[j] - C)
            hi_lim = min(hi_lim, alpha[j])
        else:
            lo_lim = max(lo_lim, -alpha[j])
            hi_lim = min(hi_lim, C - alpha[j])
        delta = min(max(delta, lo_lim), hi_lim)
        if delta == 0.0:
            break
        alpha[i] += delta
        alpha[j] -= s * delta
        # grad = Q @ alpha - e, updated with the two changed coordinates
        grad += (y[i] * y) * K[i] * delta + (y[j] * y) * K[j] * (-s * delta)
        yg = -y * grad
    else:
        warnings.warn(
            f"SMO hit the iteration cap ({max_iter}) before reaching "
            f"tolerance {tol:g}",
            stacklevel=3,
        )
        iteration = max_iter

    b = (m + M) / 2.0
    return alpha, float(b), iteration


class GaussianNaiveBayes(_BinaryModel):
    """Naive Bayes with one Gaussian per class per feature.

    Per-class standard deviations are floored at 1e-6 times the feature's
    overall training range (1e-6 absolutely for constant features), so a
    within-class constant feature cannot produce an infinite likelihood.
    Posteriors are computed in log space and the positive score is the
    posterior probability of the positive class.
    """

    algorithm = "nb"
    _positive_threshold = 0.5

    def __init__(self, sigma_floor_fraction=1e-6, normalize=True):
        self.sigma_floor_fraction = sigma_floor_fraction
        self.normalize = normalize

    def fit(self, X, y):
        Xn, y01 = self._fit_common(X, y)
        n = Xn.shape[0]
        spread = Xn.max(axis=0) - Xn.min(axis=0)
        floor = np.where(
            spread > 0.0, self.sigma_floor_fraction * spread, self.sigma_floor_fraction
        )
        self.class_prior_ = np.array([(y01 == 0).sum() / n, (y01 == 1).sum() / n])
        self.theta_ = np.empty((2, Xn.shape[1]))
        self.sigma_ = np.empty((2, Xn.shape[1]))
        for cls in (0, 1):
            rows = Xn[y01 == cls]
            self.theta_[cls] = rows.mean(axis=0)
            self.sigma_[cls] = np.maximum(rows.std(axis=0), floor)
        return self

    def predict_log_joint(self, X) -> np.ndarray:
        Xn = self._check_matrix(X)
        out = np.empty((Xn.shape[0], 2))
        for cls in (0, 1):
            z = (Xn - self.theta_[cls]) / self.sigma_[cls]
            log_pdf = -0.5 * z * z - np.log(self.sigma_[cls]) - 0.5 * math.log(2.0 * math.pi)
            out[:, cls] = math.log(self.class_prior_[cls]) + log_pdf.sum(axis=1)
        return out

    def predict_proba(self, X) -> np.ndarray:
        """Posterior probabilities, columns ordered like ``classes_``."""
        log_joint = self.predict_log_joint(X)
        shift = log_joint - log_joint.max(axis=1, keepdims=True)
        likes = np.exp(shift)
        return likes / likes.sum(axis=1, keepdims=True)

    def positive_score(self, X) -> np.ndarray:
        return self.predict_proba(X)[:, 1]

    def predict(self, X):
        log_joint = self.predict_log_joint(X)
        # argmax resolves exact ties to the first (negative) class
        return self.classes_[np.argmax(log_joint, axis=1)]


class MultilayerPerceptron(_BinaryModel):
    """One-hidden-layer sigmoid network trained by online backpropagation.

    Architecture: ``n_features -> hidden -> 2`` with sigmoid activations on
    both layers and one output unit per class. Training minimizes the
    per-sample squared error ``0.5 * sum((out - target)^2)`` sample by
    sample in a freshly shuffled order each epoch, with learning-rate /
    momentum updates. ``hidden_units="auto"`` resolves to
    ``(n_features + n_classes) // 2``, at least 1. All randomness (initial
    weights, shuffles) comes from ``seed``.
    """

    algorithm = "mlp"
    _positive_threshold = 0.5

    def __init__(self, hidden_units="auto", learning_rate=0.3, momentum=0.2,
                 epochs=500, seed=0, normalize=True):
        self.hidden_units = hidden_units
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.epochs = epochs
        self.seed = seed
        self.normalize = normalize

    def _resolve_hidden(self, n_features: int) -> int:
        if self.hidden_units == "auto":
            n_classes = 2
            return max(1, (n_features + n_classes) // 2)
        h = int(self.hidden_units)
        if h < 1:
            raise ConfigError(f"hidden_units must be >= 1, got {self.hidden_units}")
        return h

    def fit(self, X, y):
        if not (self.learning_rate > 0):
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not (0.0 <= self.momentum < 1.0):
            raise ConfigError(f"momentum must lie in [0, 1), got {self.momentum}")
        if not (self.epochs >= 1):
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        Xn, y01 = self._fit_common(X, y)
        n, d = Xn.shape
        h = self._resolve_hidden(d)
        targets = np.zeros((n, 2))
        targets[np.arange(n), y01] = 1.0

        rng = np.random.default_rng(
            int(self.seed) & 0xFFFFFFFFFFFFFFFF
        )
        params = {
            "W1": rng.uniform(-0.5, 0.5, (d, h)),
            "b1": rng.uniform(-0.5, 0.5, h),
            "W2": rng.uniform(-0.5, 0.5, (h, 2)),
            "b2": rng.uniform(-0.5, 0.5, 2),
        }
        velocity = {k: np.zeros_like(v) for k, v in params.items()}
        lr = float(self.learning_rate)
        mom = float(self.momentum)

        self.loss_curve_ = []
        for epoch in range(int(self.epochs)):
            order = rng.permutation(n)
            epoch_loss = 0.0
            for idx in order:
                loss, grads = _mlp_sample_loss_and_grads(params, Xn[idx], targets[idx])
                epoch_loss += loss
                for key, grad in grads.items():
                    velocity[key] = mom * velocity[key] - lr * grad
                    params[key] += velocity[key]
            if not math.isfinite(epoch_loss):
                raise DivergenceError(
                    f"training loss became non-finite at epoch {epoch + 1}"
                )
            self.loss_curve_.append(epoch_loss)
        self.hidden_units_ = h
        self.coefs_ = params
        return self

    def _activations(self, X) -> np.ndarray:
        Xn = self._check_matrix(X)
        hidden = _sigmoid(Xn @ self.coefs_["W1"] + self.coefs_["b1"])
        return _sigmoid(hidden @ self.coefs_["W2"] + self.coefs_["b2"])

    def positive_score(self, X) -> np.ndarray:
        return self._activations(X)[:, 1]

    def predict(self, X):
        out = self._activations(X)
        return self.classes_[np.argmax(out, axis=1)]


def _mlp_forward(params, x):
    hidden = _sigmoid(x @ params["W1"] + params["b1"])
    out = _sigmoid(hidden @ params["W2"] + params["b2"])
    return hidden, out


def _mlp_sample_loss_and_grads(params, x, target):
    """Squared-error loss of one sample and its exact parameter gradients."""
    hidden, out = _mlp_forward(params, x)
    err = out - target
    loss = 0.5 * float(err @ err)
    delta_out = err * out * (1.0 - out)
    delta_hidden = (params["W2"] @ delta_out) * hidden * (1.0 - hidden)
    grads = {
        "W2": np.outer(hidden, delta_out),
        "b2": delta_out,
        "W1": np.outer(x, delta_hidden),
        "b1": delta_hidden,
    }
    return loss, grads


# ---------------------------------------------------------------------------
# model files
# ---------------------------------------------------------------------------

_ALGORITHMS = {
    "smo": SMOClassifier,
    "nb": GaussianNaiveBayes,
    "mlp": MultilayerPerceptron,
}


def _floats(arr) -> list:
    return np.asarray(arr, dtype=np.float64).tolist()


def save_model(model: _BinaryModel, path) -> None:
    """Write a fitted model as a versioned JSON document.

    Floats survive the JSON round trip exactly, so a loaded model scores
    bit-identically to the one saved.
    """
    if not hasattr(model, "classes_"):
        raise TrainingError("cannot save an unfitted model")
    state: dict = {}
    if isinstance(model, SMOClassifier):
        state = {
            "support_vectors": [_floats(row) for row in model.support_vectors_],
            "dual_coef": _floats(model.dual_coef_),
            "intercept": float(model.intercept_),
        }
    elif isinstance(model, GaussianNaiveBayes):
        state = {
            "class_prior": _floats(model.class_prior_),
            "theta": [_floats(row) for row in model.theta_],
            "sigma": [_floats(row) for row in model.sigma_],
        }
    elif isinstance(model, MultilayerPerceptron):
        state = {
            "hidden_units": model.hidden_units_,
            "W1": [_floats(row) for row in model.coefs_["W1"]],
            "b1": _floats(model.coefs_["b1"]),
            "W2": [_floats(row) for row in model.coefs_["W2"]],
            "b2": _floats(model.coefs_["b2"]),
        }
    else:
        raise ConfigError(f"cannot serialize model type {type(model).__name__}")
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "algorithm": model.algorithm,
        "params": model.get_params(),
        "classes": [str(c) for c in model.classes_],
        "feature_names": model.feature_names_in_,
        "n_features": model.n_features_in_,
        "normalization": {"lo": _floats(model.norm_lo_), "hi": _floats(model.norm_hi_)},
        "state": state,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_model(path) -> _BinaryModel:
    """Load a model file written by :func:`save_model`."""
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not a valid model file: {exc}") from None
    if payload.get("format") != MODEL_FORMAT:
        raise ConfigError(f"{path}: not a {MODEL_FORMAT} file")
    if payload.get("version") != MODEL_VERSION:
        raise ConfigError(
            f"{path}: unsupported model version {payload.get('version')!r}"
        )
    algo = payload.get("algorithm")
    if algo not in _ALGORITHMS:
        raise ConfigError(f"{path}: unknown algorithm {algo!r}")
    model = _ALGORITHMS[algo](**payload["params"])
    model.classes_ = np.array(payload["classes"])
    model.feature_names_in_ = payload["feature_names"]
    model.n_features_in_ = int(payload["n_features"])
    model.norm_lo_ = np.array(payload["normalization"]["lo"])
    model.norm_hi_ = np.array(payload["normalization"]["hi"])
    state = payload["state"]
    if algo == "smo":
        model.support_vectors_ = np.array(state["support_vectors"], dtype=np.float64).reshape(
            len(state["support_vectors"]), model.n_features_in_
        )
        model.dual_coef_ = np.array(state["dual_coef"])
        model.intercept_ = float(state["intercept"])
    elif algo == "nb":
        model.class_prior_ = np.array(state["class_prior"])
        model.theta_ = np.array(state["theta"])
        model.sigma_ = np.array(state["sigma"])
    else:
        model.hidden_units_ = int(state["hidden_units"])
        model.coefs_ = {
            "W1": np.array(state["W1"]),
            "b1": np.array(state["b1"]),
            "W2": np.array(state["W2"]),
            "b2": np.array(state["b2"]),
        }
    return model
